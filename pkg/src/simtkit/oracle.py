"""Oracle READ/WRITE programs from symmetrized word alignments.

For each target position the oracle reads up to the furthest-aligned source
word before writing; unaligned target words are written without reading.
Anchoring the first and last word pairs makes the output boundary-valid by
construction rather than by repair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import AlignmentSet, SentencePair
from .metrics import delay_report
from .program import READ, WRITE, Program, validity


@dataclass(frozen=True)
class OracleConfig:
    anchor_endpoints: bool = True


@dataclass(frozen=True)
class OracleStats:
    n_pairs: int
    mean_program_length: float
    mean_ap: float
    mean_al: float
    mean_dal: float
    anchored_links_added: int
    unaligned_target_words: int


def anchor_alignment(alignment: AlignmentSet, src_len: int, tgt_len: int) -> AlignmentSet:
    """Add the (first, first) and (last, last) word links; idempotent."""
    for i, j in alignment.links:
        if not (0 <= i < src_len and 0 <= j < tgt_len):
            raise ValueError(f"link ({i},{j}) out of range for {src_len}x{tgt_len}")
    return alignment.union({(0, 0), (src_len - 1, tgt_len - 1)})


def generate_oracle(
    alignment: AlignmentSet,
    src_len: int,
    tgt_len: int,
    config: OracleConfig = OracleConfig(),
) -> Program:
    """Emit, for each target word in order, enough READs to cover its
    furthest-aligned source word, then one WRITE.

    With anchoring enabled the result is always boundary-valid. With it
    disabled the raw program is returned even when invalid; callers can
    check with validity().
    """
    if src_len < 1 or tgt_len < 1:
        raise ValueError("src_len and tgt_len must be >= 1")
    for i, j in alignment.links:
        if not (0 <= i < src_len and 0 <= j < tgt_len):
            raise ValueError(f"link ({i},{j}) out of range for {src_len}x{tgt_len}")
    if config.anchor_endpoints:
        alignment = anchor_alignment(alignment, src_len, tgt_len)
    by_target: dict[int, int] = {}
    for i, j in alignment.links:
        by_target[j] = max(i, by_target.get(j, -1))
    actions = []
    furthest_read = -1
    for j in range(tgt_len):
        delta = by_target.get(j)
        if delta is not None and delta > furthest_read:
            actions.extend([READ] * (delta - furthest_read))
            furthest_read = delta
        assert furthest_read <= src_len - 1
        actions.append(WRITE)
    return tuple(actions)


def count_unaligned_targets(alignment: AlignmentSet, tgt_len: int) -> int:
    aligned = {j for _, j in alignment.links}
    return sum(1 for j in range(tgt_len) if j not in aligned)


def oracle_corpus(
    pairs: Sequence[SentencePair], config: OracleConfig = OracleConfig()
) -> tuple[list[Program], OracleStats]:
    """Generate one oracle program per pair and aggregate corpus statistics.

    Delay statistics are only accumulated for boundary-valid programs (always
    the case with anchoring on); an empty corpus yields zeroed stats.
    """
    programs: list[Program] = []
    total_len = 0
    total_ap = 0.0
    total_al = 0.0
    total_dal = 0.0
    n_scored = 0
    anchored_added = 0
    unaligned = 0
    for index, pair in enumerate(pairs):
        if pair.alignment is None:
            raise ValueError(f"sentence pair {index} has no alignment")
        src_len, tgt_len = len(pair.source), len(pair.target)
        program = generate_oracle(pair.alignment, src_len, tgt_len, config)
        programs.append(program)
        total_len += len(program)
        unaligned += count_unaligned_targets(pair.alignment, tgt_len)
        if config.anchor_endpoints:
            anchored_added += len(
                anchor_alignment(pair.alignment, src_len, tgt_len)
            ) - len(pair.alignment)
        if validity(program, src_len, tgt_len).boundary_valid:
            report = delay_report(program, src_len, tgt_len)
            total_ap += report.ap
            total_al += report.al
            total_dal += report.dal
            n_scored += 1
    n = len(programs)
    stats = OracleStats(
        n_pairs=n,
        mean_program_length=total_len / n if n else 0.0,
        mean_ap=total_ap / n_scored if n_scored else 0.0,
        mean_al=total_al / n_scored if n_scored else 0.0,
        mean_dal=total_dal / n_scored if n_scored else 0.0,
        anchored_links_added=anchored_added,
        unaligned_target_words=unaligned,
    )
    return programs, stats
