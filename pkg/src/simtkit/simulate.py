"""Step-wise generation loop with pluggable programmer/interpreter policies.

A programmer policy maps an :class:`EpisodeView` to a distribution over
{READ, WRITE}; an interpreter policy maps a view to a distribution over the
token vocabulary (EOS included). Policies only ever see revealed prefixes.
Masking, not rejection, keeps episode programs boundary-valid: READ is forced
on the first step and WRITE is forced once the source is exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .corpus import EOS_ID, EOS_TOKEN
from .program import Action, READ, WRITE, Program, g_vector, validity


class PolicyError(ValueError):
    """A policy returned a malformed distribution."""


@dataclass(frozen=True)
class EpisodeView:
    """Everything a policy may condition on: the revealed prefixes only."""

    revealed_source: tuple[int, ...]
    hypothesis: tuple[int, ...]
    actions: tuple[Action, ...]
    source_exhausted: bool

    @property
    def i(self) -> int:
        return len(self.revealed_source)

    @property
    def j(self) -> int:
        return len(self.hypothesis)

    @property
    def t(self) -> int:
        return len(self.actions)


class ProgrammerPolicy(Protocol):
    def action_dist(self, view: EpisodeView) -> np.ndarray: ...


class InterpreterPolicy(Protocol):
    def token_dist(self, view: EpisodeView) -> np.ndarray: ...


@dataclass(frozen=True)
class SimConfig:
    max_target_factor: float = 2.0
    max_target_slack: int = 10
    decoding: str = "greedy"

    def write_cap(self, src_len: int) -> int:
        cap = int(self.max_target_factor * src_len) + self.max_target_slack
        if cap < 1:
            raise ValueError("write cap must be >= 1")
        return cap


@dataclass(frozen=True)
class Step:
    t: int
    action: Action
    payload: int  # token id: revealed source token for READ, emitted for WRITE


@dataclass(frozen=True)
class Transcript:
    program: Program
    hypothesis: tuple[int, ...]
    steps: tuple[Step, ...]
    terminated: str  # "eos" | "step_cap" | "program_end"

    @property
    def revealed_source(self) -> tuple[int, ...]:
        return tuple(s.payload for s in self.steps if s.action is READ)


def _checked_dist(raw: np.ndarray, who: str, size: int | None = None) -> np.ndarray:
    dist = np.asarray(raw, dtype=float)
    if dist.ndim != 1 or (size is not None and dist.shape != (size,)):
        raise PolicyError(f"{who} distribution has shape {dist.shape}")
    if not np.all(np.isfinite(dist)) or np.any(dist < 0):
        raise PolicyError(f"{who} distribution has negative or non-finite entries")
    total = dist.sum()
    if not np.isclose(total, 1.0, atol=1e-6):
        raise PolicyError(f"{who} distribution sums to {total}, expected 1")
    return dist / total


def _decode(dist: np.ndarray, decoding: str, rng: np.random.Generator | None) -> int:
    if decoding == "greedy":
        return int(np.argmax(dist))
    if decoding == "sample":
        if rng is None:
            raise ValueError("sample decoding requires an rng")
        return int(rng.choice(len(dist), p=dist))
    raise ValueError(f"unknown decoding mode {decoding!r}")


def run_episode(
    programmer: ProgrammerPolicy,
    interpreter: InterpreterPolicy,
    source: Sequence[int],
    config: SimConfig = SimConfig(),
    rng: np.random.Generator | None = None,
    eos_id: int = EOS_ID,
) -> Transcript:
    """Alternate programmer decisions and interpreter emissions until the
    interpreter produces EOS or the write cap is hit.

    The WRITE that emits EOS stays in the program (so programs always end in
    WRITE) but EOS is never part of the hypothesis.
    """
    if not source:
        raise ValueError("source must be non-empty")
    source = tuple(source)
    cap = config.write_cap(len(source))
    revealed: list[int] = []
    hypothesis: list[int] = []
    actions: list[Action] = []
    steps: list[Step] = []
    terminated = None
    while terminated is None:
        view = EpisodeView(
            revealed_source=tuple(revealed),
            hypothesis=tuple(hypothesis),
            actions=tuple(actions),
            source_exhausted=len(revealed) == len(source),
        )
        t = view.t
        if t == 0:
            action = READ
        elif view.source_exhausted:
            action = WRITE
        else:
            dist = _checked_dist(programmer.action_dist(view), "programmer", size=2)
            action = Action(_decode(dist, config.decoding, rng))
        actions.append(action)
        if action is READ:
            revealed.append(source[len(revealed)])
            steps.append(Step(t, READ, revealed[-1]))
        else:
            token_dist = _checked_dist(interpreter.token_dist(view), "interpreter")
            token = _decode(token_dist, config.decoding, rng)
            steps.append(Step(t, WRITE, token))
            if token == eos_id:
                terminated = "eos"
            else:
                hypothesis.append(token)
                if len(hypothesis) >= cap:
                    terminated = "step_cap"
    return Transcript(tuple(actions), tuple(hypothesis), tuple(steps), terminated)


def playback(
    program: Sequence[Action],
    interpreter: InterpreterPolicy,
    source: Sequence[int],
    config: SimConfig = SimConfig(),
    rng: np.random.Generator | None = None,
    eos_id: int = EOS_ID,
) -> Transcript:
    """Execute a fixed program verbatim, letting the interpreter fill in the
    tokens; no programmer is involved (oracle-at-test mode).

    If the interpreter emits EOS early the remaining actions are dropped and
    the transcript ends at that WRITE.
    """
    source = tuple(source)
    program = tuple(program)
    reads = sum(1 for a in program if a is READ)
    writes = len(program) - reads
    if reads != len(source):
        raise ValueError(f"program reads {reads} tokens but source has {len(source)}")
    if writes < 1 or not validity(program, len(source), writes).boundary_valid:
        raise ValueError("playback requires a boundary-valid program")
    revealed: list[int] = []
    hypothesis: list[int] = []
    executed: list[Action] = []
    steps: list[Step] = []
    terminated = "program_end"
    for t, action in enumerate(program):
        view = EpisodeView(
            revealed_source=tuple(revealed),
            hypothesis=tuple(hypothesis),
            actions=tuple(executed),
            source_exhausted=len(revealed) == len(source),
        )
        executed.append(action)
        if action is READ:
            revealed.append(source[len(revealed)])
            steps.append(Step(t, READ, revealed[-1]))
        else:
            dist = _checked_dist(interpreter.token_dist(view), "interpreter")
            token = _decode(dist, config.decoding, rng)
            steps.append(Step(t, WRITE, token))
            if token == eos_id:
                terminated = "eos"
                break
            hypothesis.append(token)
    return Transcript(tuple(executed), tuple(hypothesis), tuple(steps), terminated)


def scoring_lag(transcript: Transcript, src_len: int) -> list[int]:
    """Lag vector of a transcript over its visible hypothesis tokens.

    The EOS write is excluded. When the episode ended before the full source
    was read, the final write is charged with the whole source (ending the
    translation commits to never reading the rest).
    """
    g = g_vector(transcript.program)[: len(transcript.hypothesis)]
    if g and g[-1] < src_len:
        g[-1] = src_len
    return g


class ScriptedWaitKProgrammer:
    """Reads k tokens up front, then alternates write/read; writes only once
    the source is exhausted."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("wait-k requires k >= 1")
        self.k = k

    def action_dist(self, view: EpisodeView) -> np.ndarray:
        if view.source_exhausted or view.i >= self.k + view.j:
            return np.array([0.0, 1.0])
        return np.array([1.0, 0.0])


class EchoInterpreter:
    """Emits the revealed source tokens verbatim, then EOS; testing aid."""

    def __init__(self, vocab_size: int, eos_id: int = EOS_ID):
        self.vocab_size = vocab_size
        self.eos_id = eos_id

    def token_dist(self, view: EpisodeView) -> np.ndarray:
        dist = np.zeros(self.vocab_size)
        if view.j < view.i:
            dist[view.revealed_source[view.j]] = 1.0
        else:
            dist[self.eos_id] = 1.0
        return dist


class TeacherInterpreter:
    """Emits a fixed reference sequence, then EOS; the quality upper bound."""

    def __init__(self, reference: Sequence[int], vocab_size: int, eos_id: int = EOS_ID):
        self.reference = tuple(reference)
        self.vocab_size = vocab_size
        self.eos_id = eos_id

    def token_dist(self, view: EpisodeView) -> np.ndarray:
        dist = np.zeros(self.vocab_size)
        if view.j < len(self.reference):
            dist[self.reference[view.j]] = 1.0
        else:
            dist[self.eos_id] = 1.0
        return dist


def render_trace(
    program: Sequence[Action],
    source_tokens: Sequence[str],
    output_tokens: Sequence[str],
    reference_tokens: Sequence[str] | None = None,
) -> str:
    """Two-row chunk table: each column holds a run of consecutive READs over
    the run of consecutive WRITEs that follows it.

    Writes beyond the visible output (the EOS write) render as the EOS
    symbol.
    """
    columns: list[tuple[str, str]] = []
    si = 0
    wi = 0
    idx = 0
    program = list(program)
    while idx < len(program):
        read_run = 0
        while idx < len(program) and program[idx] is READ:
            read_run += 1
            idx += 1
        write_run = 0
        while idx < len(program) and program[idx] is WRITE:
            write_run += 1
            idx += 1
        top = " ".join(source_tokens[si : si + read_run])
        bottom_toks = [
            output_tokens[w] if w < len(output_tokens) else EOS_TOKEN
            for w in range(wi, wi + write_run)
        ]
        bottom = " ".join(bottom_toks)
        columns.append((top, bottom))
        si += read_run
        wi += write_run
    widths = [max(len(top), len(bottom)) for top, bottom in columns]
    src_row = " | ".join(top.ljust(w) for (top, _), w in zip(columns, widths))
    out_row = " | ".join(bottom.ljust(w) for (_, bottom), w in zip(columns, widths))
    lines = [f"src: {src_row}".rstrip(), f"out: {out_row}".rstrip()]
    if reference_tokens is not None:
        lines.append(f"ref: {' '.join(reference_tokens)}")
    return "\n".join(lines)
