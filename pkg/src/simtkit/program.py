"""READ/WRITE action programs: validity, lag vector, wait-k, delay and perturbation.

A program is a plain tuple of :class:`Action`. Serialized form is one
character per action ("R"/"W"), one program per line.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


class Action(IntEnum):
    READ = 0
    WRITE = 1

    @property
    def char(self) -> str:
        return "R" if self is Action.READ else "W"


READ = Action.READ
WRITE = Action.WRITE

Program = tuple[Action, ...]


def parse_program(text: str) -> Program:
    actions = []
    for ch in text.strip():
        if ch == "R":
            actions.append(READ)
        elif ch == "W":
            actions.append(WRITE)
        else:
            raise ValueError(f"invalid action character {ch!r} in program {text!r}")
    return tuple(actions)


def format_program(program: Sequence[Action]) -> str:
    return "".join(a.char for a in program)


@dataclass(frozen=True)
class ValidityReport:
    count_valid: bool
    boundary_valid: bool
    read_count: int
    write_count: int
    first_action: Action | None
    last_action: Action | None


def validity(program: Sequence[Action], src_len: int, tgt_len: int) -> ValidityReport:
    """Check action counts against sentence lengths and the no-Write-first /
    no-Read-last boundary rule. Both flags are reported independently."""
    if src_len < 1 or tgt_len < 1:
        raise ValueError("src_len and tgt_len must be >= 1")
    if not program:
        return ValidityReport(False, False, 0, 0, None, None)
    reads = sum(1 for a in program if a is READ)
    writes = len(program) - reads
    count_valid = reads == src_len and writes == tgt_len
    boundary_valid = count_valid and program[0] is READ and program[-1] is WRITE
    return ValidityReport(count_valid, boundary_valid, reads, writes, program[0], program[-1])


def g_vector(program: Sequence[Action]) -> list[int]:
    """Number of READs emitted strictly before each WRITE, in write order."""
    g = []
    reads = 0
    for a in program:
        if a is READ:
            reads += 1
        else:
            g.append(reads)
    return g


def wait_k_program(k: int, src_len: int, tgt_len: int) -> Program:
    """Offline wait-k program: k READs, then alternating WRITE/READ, then a
    WRITE tail once the source is exhausted.

    If the target runs out while source remains, the leftover READs are
    folded in front of the final WRITE so the program stays boundary-valid.
    k >= src_len degenerates to read-everything-then-write.
    """
    if k < 1:
        raise ValueError("wait-k requires k >= 1 (k=0 would start with WRITE)")
    if src_len < 1 or tgt_len < 1:
        raise ValueError("src_len and tgt_len must be >= 1")
    actions: list[Action] = []
    prev = 0
    for j in range(1, tgt_len + 1):
        goal = src_len if j == tgt_len else min(k + j - 1, src_len)
        actions.extend([READ] * (goal - prev))
        actions.append(WRITE)
        prev = goal
    return tuple(actions)


def _is_read_block_front(program: Sequence[Action]) -> bool:
    seen_write = False
    for a in program:
        if a is WRITE:
            seen_write = True
        elif seen_write:
            return False
    return True


def add_delay(program: Sequence[Action], d: int) -> Program:
    """Move the last READ to the front of the program, d times.

    Saturates silently once the program is a READ block followed by a WRITE
    block; the input must be boundary-valid.
    """
    if d < 0:
        raise ValueError("delay must be >= 0")
    reads = sum(1 for a in program if a is READ)
    writes = len(program) - reads
    if not program or reads < 1 or writes < 1:
        raise ValueError("add_delay requires a boundary-valid program")
    if program[0] is not READ or program[-1] is not WRITE:
        raise ValueError("add_delay requires a boundary-valid program")
    actions = list(program)
    for _ in range(d):
        if _is_read_block_front(actions):
            break
        last_read = max(i for i, a in enumerate(actions) if a is READ)
        del actions[last_read]
        actions.insert(0, READ)
    return tuple(actions)


def perturb_prog_valid(
    program: Sequence[Action], beta3: float, rng: np.random.Generator
) -> Program:
    """Bernoulli-select interior positions, then uniformly permute the actions
    at the selected positions among themselves.

    First and last actions are never selected, so the output keeps the exact
    action multiset and boundary actions of the input.
    """
    if not 0.0 <= beta3 <= 1.0:
        raise ValueError("beta3 must be in [0, 1]")
    n = len(program)
    if n < 4 or beta3 == 0.0:
        return tuple(program)
    mask = rng.random(n - 2) < beta3
    chosen = np.flatnonzero(mask) + 1
    if len(chosen) < 2:
        return tuple(program)
    actions = list(program)
    order = rng.permutation(len(chosen))
    selected = [actions[i] for i in chosen]
    for slot, src in zip(chosen, order):
        actions[slot] = selected[src]
    return tuple(actions)


def perturb_seq(
    ground_truth: Sequence[T],
    beta: float,
    sampler: Callable[[int], tuple[Sequence[T], Sequence[float]]],
    rng: np.random.Generator,
) -> list[T]:
    """Independently replace each position with probability beta by a draw
    from sampler(t), which returns (candidates, probabilities) for position t.

    The sampler is expected to be computed from the unperturbed ground truth
    (a single teacher-forced pass); this function never feeds replacements
    back into it.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must be in [0, 1]")
    out = list(ground_truth)
    if beta == 0.0:
        return out
    replace = rng.random(len(out)) < beta
    for t in np.flatnonzero(replace):
        candidates, probs = sampler(int(t))
        idx = rng.choice(len(candidates), p=np.asarray(probs, dtype=float))
        out[t] = candidates[idx]
    return out
