"""Translation-delay metrics (AP, AL, DAL) over lag vectors, plus corpus BLEU.

Lag vectors are 1-indexed in the formulas below; the stored g list is
0-indexed with g[j-1] = number of source tokens read when the j-th target
token is written. EOS is excluded throughout: programs are scored over the
visible target length.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

from .program import Action, Program, g_vector, validity


def _check_g(g: Sequence[int], src_len: int, tgt_len: int) -> None:
    if len(g) != tgt_len:
        raise ValueError(f"lag vector length {len(g)} does not match target length {tgt_len}")
    if any(b < a for a, b in zip(g, g[1:])):
        raise ValueError("lag vector must be non-decreasing")
    if g and g[-1] > src_len:
        raise ValueError(f"lag {g[-1]} exceeds source length {src_len}")


def average_proportion(g: Sequence[int], src_len: int, tgt_len: int) -> float:
    """Mean read fraction: sum of lags normalized by src_len * tgt_len."""
    _check_g(g, src_len, tgt_len)
    return sum(g) / (src_len * tgt_len)


def average_lagging(g: Sequence[int], src_len: int, tgt_len: int) -> float:
    """Mean lag behind the ideal diagonal, up to the first write after the
    source is fully read."""
    _check_g(g, src_len, tgt_len)
    r = tgt_len / src_len
    tau = next((j for j, gj in enumerate(g, start=1) if gj == src_len), None)
    if tau is None:
        raise ValueError("program does not read full source")
    return sum(g[j - 1] - (j - 1) / r for j in range(1, tau + 1)) / tau


def dal_adjusted_lags(g: Sequence[int], src_len: int, tgt_len: int) -> list[float]:
    """The DAL recurrence g'(j) = max(g(j), g'(j-1) + 1/r), with g'(0) = 0."""
    r = tgt_len / src_len
    adjusted: list[float] = []
    prev = 0.0
    for gj in g:
        prev = max(float(gj), prev + 1.0 / r)
        adjusted.append(prev)
    return adjusted


def differentiable_al(g: Sequence[int], src_len: int, tgt_len: int) -> float:
    """AL refinement that keeps charging writes issued after the source is
    exhausted, via the adjusted lag recurrence."""
    _check_g(g, src_len, tgt_len)
    r = tgt_len / src_len
    adjusted = dal_adjusted_lags(g, src_len, tgt_len)
    return sum(gp - (j - 1) / r for j, gp in enumerate(adjusted, start=1)) / tgt_len


@dataclass(frozen=True)
class DelayReport:
    ap: float
    al: float
    dal: float
    g: tuple[int, ...]
    g_prime: tuple[float, ...]
    src_len: int
    tgt_len: int


def delay_report(program: Program, src_len: int, tgt_len: int) -> DelayReport:
    """Bundle AP, AL and DAL for a boundary-valid program."""
    report = validity(program, src_len, tgt_len)
    if not report.boundary_valid:
        raise ValueError(
            f"delay metrics need a boundary-valid program "
            f"(reads {report.read_count}/{src_len}, writes {report.write_count}/{tgt_len})"
        )
    g = g_vector(program)
    return DelayReport(
        ap=average_proportion(g, src_len, tgt_len),
        al=average_lagging(g, src_len, tgt_len),
        dal=differentiable_al(g, src_len, tgt_len),
        g=tuple(g),
        g_prime=tuple(dal_adjusted_lags(g, src_len, tgt_len)),
        src_len=src_len,
        tgt_len=tgt_len,
    )


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int


def _ngram_counts(tokens: Sequence[Hashable], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(
    hypotheses: Sequence[Sequence[Hashable]],
    references: Sequence[Sequence[Hashable]],
    max_n: int = 4,
) -> BleuScore:
    """Corpus-level BLEU with clipped n-gram precision, exponential brevity
    penalty, and exponential smoothing of zero counts for n > 1.

    Tokens are compared exactly (case-sensitive); comparisons are meaningful
    within this toolkit, not against external scorers.
    """
    if not hypotheses:
        raise ValueError("empty hypothesis set")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"count mismatch: {len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if any(not ref for ref in references):
        raise ValueError("references must be non-empty")
    matched = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            total[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum(min(c, ref_counts[gram]) for gram, c in hyp_counts.items())
    precisions = []
    effective = []
    smooth = 1.0
    for n in range(1, max_n + 1):
        if total[n - 1] == 0:
            # no n-grams of this order anywhere in the hypotheses: the order
            # carries no evidence and is excluded from the geometric mean
            precisions.append(0.0)
            continue
        if matched[n - 1] > 0:
            p = matched[n - 1] / total[n - 1]
        elif n == 1:
            p = 0.0
        else:
            smooth *= 2.0
            p = 1.0 / (smooth * total[n - 1])
        precisions.append(p)
        effective.append(p)
    bp = math.exp(1.0 - ref_len / hyp_len) if 0 < hyp_len < ref_len else 1.0
    if hyp_len == 0 or not effective or effective[0] == 0.0:
        return BleuScore(0.0, tuple(precisions), bp, hyp_len, ref_len)
    geo_mean = math.exp(sum(math.log(p) for p in effective) / len(effective))
    return BleuScore(100.0 * bp * geo_mean, tuple(precisions), bp, hyp_len, ref_len)
