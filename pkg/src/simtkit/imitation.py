"""Coupled imitation learning for programmer/interpreter policy pairs.

Both policies are linear-softmax models over sparse feature views of exactly
what they may condition on at generation time: action history, revealed
source prefix, and emitted target prefix. Scheduled sampling perturbs only
the conditioning inputs (y', a' via model samples, a'' via validity-preserving
permutation); the loss targets always stay the unperturbed ground truth.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import EOS_ID, SentencePair, Vocabulary, mean_length_ratio
from .metrics import average_lagging, average_proportion, corpus_bleu, differentiable_al
from .program import (
    Action,
    READ,
    WRITE,
    Program,
    g_vector,
    perturb_prog_valid,
    perturb_seq,
    validity,
    wait_k_program,
)
from .seeding import stream
from .simulate import EpisodeView, SimConfig, run_episode, scoring_lag

FEATURE_VERSIONS = {"rich": "linear-rich-v1", "bag": "linear-bag-v1"}
BUNDLE_FORMAT = "simtkit-policy-bundle"

SparseFeatures = tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class Example:
    """A sentence pair with the program the policies should imitate."""

    pair: SentencePair
    program: Program


class ProgrammerFeaturizer:
    """Sparse view for action decisions: counters, progress against the
    corpus length ratio, recent actions, last read/written token."""

    N_BASE = 11  # bias, i, j, progress, exhausted, 3x2 recent-action slots

    def __init__(self, vocab_size: int, r_bar: float):
        self.vocab_size = vocab_size
        self.r_bar = r_bar
        self.n_features = self.N_BASE + 2 * vocab_size

    def features(
        self,
        i: int,
        j: int,
        recent: Sequence[Action],
        last_read: int | None,
        last_written: int | None,
        exhausted: bool,
    ) -> SparseFeatures:
        idx = [0, 1, 2, 3]
        val = [1.0, 0.1 * i, 0.1 * j, i - j * self.r_bar]
        if exhausted:
            idx.append(4)
            val.append(1.0)
        for offset, act in enumerate(reversed(recent[-3:]), start=1):
            idx.append(5 + (offset - 1) * 2 + int(act))
            val.append(1.0)
        if last_read is not None:
            idx.append(self.N_BASE + last_read)
            val.append(1.0)
        if last_written is not None:
            idx.append(self.N_BASE + self.vocab_size + last_written)
            val.append(1.0)
        return np.asarray(idx, dtype=np.intp), np.asarray(val, dtype=float)


class InterpreterFeaturizer:
    """Sparse view for token decisions.

    Two capacities share one layout. The "bag" map sees the write index, the
    last read token, bag summaries of the read prefix and of the policy's own
    emitted prefix, and the previous written token; position-specific source
    content is deliberately out of reach, so reordered targets keep
    irreducible uncertainty (the regime where conditioning robustness
    matters). The "rich" map adds positional probes (token at position j,
    j-1, first, final-once-exhausted), which make the synthetic tasks fully
    learnable.
    """

    N_BASE = 6  # bias, j, i, exhausted, pos-j out of range, pos-(j-1) out of range

    def __init__(self, vocab_size: int, mode: str = "rich"):
        if mode not in ("rich", "bag"):
            raise ValueError(f"unknown interpreter feature mode {mode!r}")
        self.vocab_size = vocab_size
        self.mode = mode
        v = vocab_size
        self.LAST_READ = self.N_BASE
        self.PREV_WRITTEN = self.N_BASE + v
        self.BAG = self.N_BASE + 2 * v
        self.WRITTEN_BAG = self.N_BASE + 3 * v
        if mode == "rich":
            self.AT_J = self.N_BASE + 4 * v
            self.AT_JM1 = self.N_BASE + 5 * v
            self.FIRST = self.N_BASE + 6 * v
            self.FINAL = self.N_BASE + 7 * v
            self.n_features = self.N_BASE + 8 * v
        else:
            self.n_features = self.N_BASE + 4 * v

    def features(
        self,
        revealed: Sequence[int],
        j: int,
        emitted: Sequence[int],
        exhausted: bool,
    ) -> SparseFeatures:
        i = len(revealed)
        rich = self.mode == "rich"
        idx = [0, 1, 2]
        val = [1.0, 0.1 * j, 0.1 * i]
        if exhausted:
            idx.append(3)
            val.append(1.0)
        if rich:
            if j < i:
                idx.append(self.AT_J + revealed[j])
                val.append(1.0)
            else:
                idx.append(4)
                val.append(1.0)
            if 0 <= j - 1 < i:
                idx.append(self.AT_JM1 + revealed[j - 1])
                val.append(1.0)
            elif j >= 1:
                idx.append(5)
                val.append(1.0)
        if i:
            idx.append(self.LAST_READ + revealed[-1])
            val.append(1.0)
            for tok, count in Counter(revealed).items():
                idx.append(self.BAG + tok)
                val.append(count / i)
            if rich:
                idx.append(self.FIRST + revealed[0])
                val.append(1.0)
                if exhausted:
                    idx.append(self.FINAL + revealed[-1])
                    val.append(1.0)
        if emitted:
            idx.append(self.PREV_WRITTEN + emitted[-1])
            val.append(1.0)
            for tok, count in Counter(emitted).items():
                idx.append(self.WRITTEN_BAG + tok)
                val.append(count / len(emitted))
        return np.asarray(idx, dtype=np.intp), np.asarray(val, dtype=float)


class LinearSoftmax:
    """Multinomial logistic model over sparse features, trained by SGD."""

    def __init__(self, n_classes: int, n_features: int):
        self.weights = np.zeros((n_classes, n_features))

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "LinearSoftmax":
        dup = LinearSoftmax(self.n_classes, self.n_features)
        dup.weights = self.weights.copy()
        return dup

    def logits(self, idx: np.ndarray, val: np.ndarray) -> np.ndarray:
        return self.weights[:, idx] @ val

    def dist(self, idx: np.ndarray, val: np.ndarray) -> np.ndarray:
        z = self.logits(idx, val)
        z -= z.max()
        e = np.exp(z)
        return e / e.sum()

    def loss_and_grad(
        self, samples: Sequence[tuple[np.ndarray, np.ndarray, int]]
    ) -> tuple[float, np.ndarray]:
        """Summed cross-entropy and its dense gradient over the sample list."""
        grad = np.zeros_like(self.weights)
        loss = 0.0
        for idx, val, label in samples:
            p = self.dist(idx, val)
            loss -= np.log(max(p[label], 1e-300))
            grad[:, idx] += np.outer(p, val)
            grad[label, idx] -= val
        return loss, grad

    def sgd_step(
        self, samples: Sequence[tuple[np.ndarray, np.ndarray, int]], lr: float
    ) -> float:
        """One update on the summed loss of the samples; returns that loss.

        All distributions are evaluated at the pre-update parameters.
        """
        loss = 0.0
        pending = []
        for idx, val, label in samples:
            p = self.dist(idx, val)
            loss -= np.log(max(p[label], 1e-300))
            pending.append((idx, val, p, label))
        for idx, val, p, label in pending:
            self.weights[:, idx] -= lr * np.outer(p, val)
            self.weights[label, idx] += lr * val
        return loss


@dataclass
class PolicyPair:
    programmer: LinearSoftmax
    interpreter: LinearSoftmax
    vocab: Vocabulary
    r_bar: float
    features: str = "rich"

    def __post_init__(self):
        self.prog_features = ProgrammerFeaturizer(len(self.vocab), self.r_bar)
        self.intp_features = InterpreterFeaturizer(len(self.vocab), self.features)

    @property
    def feature_version(self) -> str:
        return FEATURE_VERSIONS[self.features]

    def copy(self) -> "PolicyPair":
        return PolicyPair(
            self.programmer.copy(),
            self.interpreter.copy(),
            self.vocab,
            self.r_bar,
            self.features,
        )

    def finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.programmer.weights))
            and np.all(np.isfinite(self.interpreter.weights))
        )

    def programmer_policy(self) -> "LinearProgrammerPolicy":
        return LinearProgrammerPolicy(self)

    def interpreter_policy(self) -> "LinearInterpreterPolicy":
        return LinearInterpreterPolicy(self)


def new_policy_pair(vocab: Vocabulary, r_bar: float, features: str = "rich") -> PolicyPair:
    v = len(vocab)
    prog = LinearSoftmax(2, ProgrammerFeaturizer(v, r_bar).n_features)
    intp = LinearSoftmax(v, InterpreterFeaturizer(v, features).n_features)
    return PolicyPair(prog, intp, vocab, r_bar, features)


class LinearProgrammerPolicy:
    def __init__(self, pair: PolicyPair):
        self.pair = pair

    def action_dist(self, view: EpisodeView) -> np.ndarray:
        feats = self.pair.prog_features.features(
            view.i,
            view.j,
            view.actions,
            view.revealed_source[-1] if view.i else None,
            view.hypothesis[-1] if view.j else None,
            view.source_exhausted,
        )
        return self.pair.programmer.dist(*feats)


class LinearInterpreterPolicy:
    def __init__(self, pair: PolicyPair):
        self.pair = pair

    def token_dist(self, view: EpisodeView) -> np.ndarray:
        feats = self.pair.intp_features.features(
            view.revealed_source,
            view.j,
            view.hypothesis,
            view.source_exhausted,
        )
        return self.pair.interpreter.dist(*feats)


def interpreter_samples(
    pair: PolicyPair,
    source: Sequence[int],
    target_inputs: Sequence[int],
    program: Program,
    labels: Sequence[int] | None,
    include_terminal: bool,
    eos_id: int = EOS_ID,
) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """Teacher-forced interpreter positions: one per WRITE in the program,
    plus an optional terminal position labelled EOS after the program ends."""
    fz = pair.intp_features
    src_len = len(source)
    samples = []
    i = 0
    j = 0
    for act in program:
        if act is READ:
            i += 1
        else:
            feats = fz.features(source[:i], j, target_inputs[:j], i == src_len)
            samples.append((*feats, labels[j] if labels is not None else -1))
            j += 1
    if include_terminal:
        feats = fz.features(source[:i], j, target_inputs[:j], i == src_len)
        samples.append((*feats, eos_id))
    return samples


def programmer_samples(
    pair: PolicyPair,
    actions_input: Sequence[Action],
    source: Sequence[int],
    target_inputs: Sequence[int],
    labels: Sequence[Action] | None,
) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """Teacher-forced programmer positions over an action history.

    Counters follow the input history; token lookups clamp to the sentence
    (perturbed histories may overrun either side).
    """
    fz = pair.prog_features
    src_len = len(source)
    tgt_len = len(target_inputs)
    samples = []
    i = 0
    j = 0
    for t, _ in enumerate(actions_input):
        last_read = source[min(i, src_len) - 1] if i >= 1 else None
        last_written = target_inputs[min(j, tgt_len) - 1] if j >= 1 else None
        recent = actions_input[max(0, t - 3) : t]
        feats = fz.features(i, j, recent, last_read, last_written, i >= src_len)
        samples.append((*feats, int(labels[t]) if labels is not None else -1))
        if actions_input[t] is READ:
            i += 1
        else:
            j += 1
    return samples


@dataclass(frozen=True)
class StepLosses:
    programmer: float
    interpreter: float
    programmer_positions: int
    interpreter_positions: int


@dataclass(frozen=True)
class TrainConfig:
    beta1: float = 0.05  # target-side scheduled sampling (y')
    beta2: float = 0.15  # programmer-side scheduled sampling (a')
    beta3: float = 0.15  # validity-preserving program permutation (a'')
    alpha1: float = 0.001  # interpreter learning rate
    alpha2: float = 0.001  # programmer learning rate
    epochs: int = 20
    max_decays: int = 4
    seed: int = 0
    batch_size: int = 1

    def __post_init__(self):
        for name in ("beta1", "beta2", "beta3"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _perturbed_target(
    pair: PolicyPair,
    example: Example,
    beta1: float,
    rng: np.random.Generator,
) -> list[int]:
    """y': gold target with positions resampled from the interpreter's own
    predictive distribution under the unperturbed oracle trajectory."""
    x, y = example.pair.source, example.pair.target
    if beta1 == 0.0:
        return list(y)
    g = g_vector(example.program)
    fz = pair.intp_features
    token_ids = np.arange(len(pair.vocab))

    def sampler(j: int):
        feats = fz.features(x[: g[j]], j, y[:j], g[j] == len(x))
        return token_ids, pair.interpreter.dist(*feats)

    return perturb_seq(y, beta1, sampler, rng)


_ACTIONS = (READ, WRITE)


def _perturbed_actions(
    pair: PolicyPair,
    example: Example,
    beta2: float,
    rng: np.random.Generator,
) -> list[Action]:
    """a': oracle program with positions resampled from the programmer's own
    predictive distribution under the unperturbed oracle trajectory."""
    a = example.program
    if beta2 == 0.0:
        return list(a)
    x, y = example.pair.source, example.pair.target
    fz = pair.prog_features
    counts = np.zeros((len(a), 2), dtype=int)
    i = j = 0
    for t, act in enumerate(a):
        counts[t] = (i, j)
        if act is READ:
            i += 1
        else:
            j += 1

    def sampler(t: int):
        i_t, j_t = int(counts[t][0]), int(counts[t][1])
        last_read = x[i_t - 1] if i_t >= 1 else None
        last_written = y[j_t - 1] if j_t >= 1 else None
        recent = a[max(0, t - 3) : t]
        feats = fz.features(i_t, j_t, recent, last_read, last_written, i_t >= len(x))
        return _ACTIONS, pair.programmer.dist(*feats)

    return perturb_seq(a, beta2, sampler, rng)


def clone_step(
    pair: PolicyPair,
    example: Example,
    cfg: TrainConfig,
    rng: np.random.Generator,
    lr1: float | None = None,
    lr2: float | None = None,
) -> StepLosses:
    """One coupled scheduled-sampling update on a single example.

    The interpreter trains on (x, y', a'') against the gold target plus a
    terminal EOS; the programmer trains on (a', x, y') against the gold
    program at every step. Parameters are updated in place.
    """
    x, y = example.pair.source, example.pair.target
    a = example.program
    if not validity(a, len(x), len(y)).boundary_valid:
        raise ValueError("clone_step requires a boundary-valid oracle program")
    y_prime = _perturbed_target(pair, example, cfg.beta1, rng)
    a_prime = _perturbed_actions(pair, example, cfg.beta2, rng)
    a_pp = perturb_prog_valid(a, cfg.beta3, rng)
    intp_batch = interpreter_samples(pair, x, y_prime, a_pp, y, include_terminal=True)
    intp_loss = pair.interpreter.sgd_step(intp_batch, cfg.alpha1 if lr1 is None else lr1)
    prog_batch = programmer_samples(pair, a_prime, x, y_prime, a)
    prog_loss = pair.programmer.sgd_step(prog_batch, cfg.alpha2 if lr2 is None else lr2)
    return StepLosses(prog_loss, intp_loss, len(prog_batch), len(intp_batch))


def perplexities(pair: PolicyPair, examples: Sequence[Example]) -> tuple[float, float]:
    """Teacher-forced (no perturbation) perplexity of each policy."""
    prog_loss = intp_loss = 0.0
    prog_n = intp_n = 0
    for ex in examples:
        x, y, a = ex.pair.source, ex.pair.target, ex.program
        for idx, val, label in programmer_samples(pair, a, x, y, a):
            p = pair.programmer.dist(idx, val)
            prog_loss -= np.log(max(p[label], 1e-300))
            prog_n += 1
        for idx, val, label in interpreter_samples(pair, x, y, a, y, include_terminal=True):
            p = pair.interpreter.dist(idx, val)
            intp_loss -= np.log(max(p[label], 1e-300))
            intp_n += 1
    return (
        float(np.exp(prog_loss / max(prog_n, 1))),
        float(np.exp(intp_loss / max(intp_n, 1))),
    )


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    programmer_loss: float
    interpreter_loss: float
    programmer_ppl: float
    interpreter_ppl: float
    programmer_lr: float
    interpreter_lr: float
    programmer_decays: int
    interpreter_decays: int


@dataclass
class TrainResult:
    pair: PolicyPair  # best-dev checkpoint
    final_pair: PolicyPair
    history: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1


def train(
    train_examples: Sequence[Example],
    dev_examples: Sequence[Example],
    vocab: Vocabulary,
    cfg: TrainConfig,
    init: PolicyPair | None = None,
    features: str = "rich",
) -> TrainResult:
    """Epochs of per-example coupled updates with perplexity-driven learning
    rate halving, tracked separately per model; stops at the configured decay
    count or the epoch cap and returns the best-dev checkpoint."""
    if not train_examples or not dev_examples:
        raise ValueError("train and dev corpora must be non-empty")
    if init is not None:
        pair = init.copy()
    else:
        pair = new_policy_pair(
            vocab, mean_length_ratio([ex.pair for ex in train_examples]), features
        )
    rng = stream(cfg.seed, "train")
    lr1, lr2 = cfg.alpha1, cfg.alpha2
    best_ppl1 = best_ppl2 = np.inf
    decays1 = decays2 = 0
    best_pair = pair.copy()
    best_score = np.inf
    best_epoch = -1
    history: list[EpochStats] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_examples))
        prog_loss = intp_loss = 0.0
        prog_n = intp_n = 0
        for index in order:
            losses = clone_step(pair, train_examples[index], cfg, rng, lr1=lr1, lr2=lr2)
            prog_loss += losses.programmer
            intp_loss += losses.interpreter
            prog_n += losses.programmer_positions
            intp_n += losses.interpreter_positions
        if not (np.isfinite(prog_loss) and np.isfinite(intp_loss)) or not pair.finite():
            raise RuntimeError(
                f"training diverged at epoch {epoch}: losses "
                f"prog={prog_loss}, intp={intp_loss}"
            )
        prog_ppl, intp_ppl = perplexities(pair, dev_examples)
        if intp_ppl > best_ppl1:
            lr1 /= 2
            decays1 += 1
        else:
            best_ppl1 = intp_ppl
        if prog_ppl > best_ppl2:
            lr2 /= 2
            decays2 += 1
        else:
            best_ppl2 = prog_ppl
        score = (prog_ppl + intp_ppl) / 2
        if score < best_score:
            best_score = score
            best_pair = pair.copy()
            best_epoch = epoch
        history.append(
            EpochStats(
                epoch,
                prog_loss / max(prog_n, 1),
                intp_loss / max(intp_n, 1),
                prog_ppl,
                intp_ppl,
                lr2,
                lr1,
                decays2,
                decays1,
            )
        )
        if decays1 >= cfg.max_decays or decays2 >= cfg.max_decays:
            break
    return TrainResult(best_pair, pair, history, best_epoch)


@dataclass(frozen=True)
class EvalReport:
    bleu: float
    ap: float
    al: float
    dal: float
    programmer_accuracy: float
    interpreter_accuracy: float
    programmer_ppl: float
    interpreter_ppl: float
    n_sentences: int
    n_delay_scored: int


def evaluate(
    pair: PolicyPair,
    examples: Sequence[Example],
    sim_config: SimConfig = SimConfig(),
    rng: np.random.Generator | None = None,
    eos_id: int = EOS_ID,
) -> EvalReport:
    """Episode rollout per sentence plus teacher-forced accuracy and
    perplexity against the reference programs.

    The rng is only consulted for sample decoding; greedy rollouts are
    deterministic.
    """
    programmer = pair.programmer_policy()
    interpreter = pair.interpreter_policy()
    hyps = []
    refs = []
    ap_sum = al_sum = dal_sum = 0.0
    n_delay = 0
    for ex in examples:
        transcript = run_episode(
            programmer, interpreter, ex.pair.source, sim_config, rng=rng, eos_id=eos_id
        )
        hyps.append(list(transcript.hypothesis))
        refs.append(list(ex.pair.target))
        g = scoring_lag(transcript, len(ex.pair.source))
        if g:
            ap_sum += average_proportion(g, len(ex.pair.source), len(g))
            al_sum += average_lagging(g, len(ex.pair.source), len(g))
            dal_sum += differentiable_al(g, len(ex.pair.source), len(g))
            n_delay += 1
    bleu = corpus_bleu(hyps, refs).score if hyps else 0.0
    prog_hits = prog_n = intp_hits = intp_n = 0
    prog_loss = intp_loss = 0.0
    for ex in examples:
        x, y, a = ex.pair.source, ex.pair.target, ex.program
        for idx, val, label in programmer_samples(pair, a, x, y, a):
            p = pair.programmer.dist(idx, val)
            prog_hits += int(np.argmax(p) == label)
            prog_loss -= np.log(max(p[label], 1e-300))
            prog_n += 1
        for idx, val, label in interpreter_samples(pair, x, y, a, y, include_terminal=True):
            p = pair.interpreter.dist(idx, val)
            intp_hits += int(np.argmax(p) == label)
            intp_loss -= np.log(max(p[label], 1e-300))
            intp_n += 1
    return EvalReport(
        bleu=bleu,
        ap=ap_sum / n_delay if n_delay else 0.0,
        al=al_sum / n_delay if n_delay else 0.0,
        dal=dal_sum / n_delay if n_delay else 0.0,
        programmer_accuracy=prog_hits / max(prog_n, 1),
        interpreter_accuracy=intp_hits / max(intp_n, 1),
        programmer_ppl=float(np.exp(prog_loss / max(prog_n, 1))),
        interpreter_ppl=float(np.exp(intp_loss / max(intp_n, 1))),
        n_sentences=len(examples),
        n_delay_scored=n_delay,
    )


@dataclass
class WarmStartResult:
    phase1: TrainResult
    final: TrainResult

    @property
    def pair(self) -> PolicyPair:
        return self.final.pair


def warm_start_wait_k(
    train_examples: Sequence[Example],
    dev_examples: Sequence[Example],
    vocab: Vocabulary,
    k: int,
    cfg: TrainConfig,
    phase1_epochs: int | None = None,
    features: str = "rich",
) -> WarmStartResult:
    """Clone both policies on wait-k trajectories, then finetune on the given
    oracle programs with the configured scheduled sampling.

    The interpreter stays trainable throughout the finetuning phase.
    """

    def waitk_example(ex: Example) -> Example:
        return Example(
            ex.pair, wait_k_program(k, len(ex.pair.source), len(ex.pair.target))
        )

    phase1_cfg = replace(
        cfg,
        beta1=0.0,
        beta2=0.0,
        beta3=0.0,
        epochs=cfg.epochs if phase1_epochs is None else phase1_epochs,
    )
    phase1 = train(
        [waitk_example(ex) for ex in train_examples],
        [waitk_example(ex) for ex in dev_examples],
        vocab,
        phase1_cfg,
        features=features,
    )
    final = train(train_examples, dev_examples, vocab, cfg, init=phase1.pair)
    return WarmStartResult(phase1, final)


def save_bundle(pair: PolicyPair, path: str | Path) -> None:
    payload = {
        "format": BUNDLE_FORMAT,
        "version": 1,
        "feature_version": pair.feature_version,
        "r_bar": pair.r_bar,
        "vocab": list(pair.vocab.tokens),
        "programmer": pair.programmer.weights.tolist(),
        "interpreter": pair.interpreter.weights.tolist(),
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_bundle(path: str | Path) -> PolicyPair:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"{path} is not a policy bundle")
    by_version = {v: k for k, v in FEATURE_VERSIONS.items()}
    mode = by_version.get(payload.get("feature_version"))
    if mode is None:
        raise ValueError(
            f"bundle feature map {payload.get('feature_version')!r} not supported "
            f"(expected one of {sorted(by_version)})"
        )
    tokens = payload["vocab"]
    vocab = Vocabulary(tokens[2:])
    if list(vocab.tokens) != tokens:
        raise ValueError(f"bundle vocabulary in {path} lacks the reserved UNK/EOS header")
    pair = new_policy_pair(vocab, float(payload["r_bar"]), mode)
    prog = np.asarray(payload["programmer"], dtype=float)
    intp = np.asarray(payload["interpreter"], dtype=float)
    if prog.shape != pair.programmer.weights.shape or intp.shape != pair.interpreter.weights.shape:
        raise ValueError("bundle weight shapes do not match the feature map")
    pair.programmer.weights = prog
    pair.interpreter.weights = intp
    return pair
