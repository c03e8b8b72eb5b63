"""Parallel-text ingestion, Pharaoh alignments, vocabulary, synthetic tasks.

Text is consumed pre-tokenized (whitespace-separated tokens, one sentence per
line). Tokens are interned to integer ids through a per-corpus
:class:`Vocabulary`; unseen tokens at evaluation time map to the reserved UNK
id. Alignments arrive one Pharaoh line ("i-j" pairs, 0-indexed) per sentence
pair, already symmetrized by an external aligner.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .seeding import stream

UNK_TOKEN = "<unk>"
EOS_TOKEN = "</s>"
UNK_ID = 0
EOS_ID = 1

REORDER_RULES = ("monotone", "final_to_second")


class Vocabulary:
    """Token interning table with reserved UNK and EOS entries."""

    def __init__(self, tokens: Iterable[str] | None = None):
        self._tokens: list[str] = [UNK_TOKEN, EOS_TOKEN]
        self._index: dict[str, int] = {UNK_TOKEN: UNK_ID, EOS_TOKEN: EOS_ID}
        if tokens is not None:
            for tok in tokens:
                self.add(tok)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._tokens)

    def add(self, token: str) -> int:
        """Intern a token, returning its id (existing id if already known)."""
        idx = self._index.get(token)
        if idx is None:
            idx = len(self._tokens)
            self._tokens.append(token)
            self._index[token] = idx
        return idx

    def lookup(self, token: str) -> int:
        """Id of a token, or UNK_ID when it was never interned."""
        return self._index.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        return self._tokens[idx]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self._tokens[i] for i in ids]

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self._tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if lines[:2] != [UNK_TOKEN, EOS_TOKEN]:
            raise ValueError(f"vocabulary file {path} lacks reserved UNK/EOS header")
        return cls(lines[2:])


@dataclass(frozen=True)
class AlignmentSet:
    """Set of (source index, target index) links, deduplicated, 0-indexed."""

    links: frozenset[tuple[int, int]]

    def __init__(self, links: Iterable[tuple[int, int]] = ()):
        object.__setattr__(self, "links", frozenset((int(i), int(j)) for i, j in links))

    def __len__(self) -> int:
        return len(self.links)

    def __contains__(self, link: tuple[int, int]) -> bool:
        return link in self.links

    def sorted_links(self) -> list[tuple[int, int]]:
        """Links in deterministic (target, source) order."""
        return sorted(self.links, key=lambda link: (link[1], link[0]))

    def source_indices_for(self, j: int) -> list[int]:
        return sorted(i for i, jj in self.links if jj == j)

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in self.sorted_links())

    def union(self, other: Iterable[tuple[int, int]]) -> "AlignmentSet":
        return AlignmentSet(set(self.links) | set(other))


def parse_pharaoh(line: str) -> AlignmentSet:
    """Parse one Pharaoh alignment line ("i-j" pairs); an empty line is an
    empty alignment."""
    links = []
    for token in line.split():
        left, dash, right = token.partition("-")
        if not dash:
            raise ValueError(f"malformed alignment pair {token!r}: missing '-'")
        try:
            i, j = int(left), int(right)
        except ValueError:
            raise ValueError(f"malformed alignment pair {token!r}: not integers") from None
        if i < 0 or j < 0:
            raise ValueError(f"malformed alignment pair {token!r}: negative index")
        links.append((i, j))
    return AlignmentSet(links)


@dataclass(frozen=True)
class SentencePair:
    """Tokenized source/target sentence (integer ids) with optional alignment."""

    source: tuple[int, ...]
    target: tuple[int, ...]
    alignment: AlignmentSet | None = None

    def __post_init__(self):
        if not self.source or not self.target:
            raise ValueError("source and target must be non-empty")
        if self.alignment is not None:
            for i, j in self.alignment.links:
                if not (0 <= i < len(self.source) and 0 <= j < len(self.target)):
                    raise ValueError(
                        f"alignment link ({i},{j}) out of range for lengths "
                        f"{len(self.source)}x{len(self.target)}"
                    )

    def with_alignment(self, alignment: AlignmentSet) -> "SentencePair":
        return SentencePair(self.source, self.target, alignment)


def split_lines(text: str) -> list[str]:
    """Split line-delimited text; a missing final newline is tolerated and a
    bare empty string is one (empty) line."""
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n")


def parse_parallel(
    source_text: str,
    target_text: str,
    vocab: Vocabulary,
    *,
    extend: bool = True,
) -> list[SentencePair]:
    """Pair up line-delimited token files. With extend=False unseen tokens
    map to UNK instead of growing the vocabulary."""
    src_lines = split_lines(source_text)
    tgt_lines = split_lines(target_text)
    if len(src_lines) != len(tgt_lines):
        raise ValueError(
            f"line-count mismatch: {len(src_lines)} source lines vs "
            f"{len(tgt_lines)} target lines"
        )
    intern = vocab.add if extend else vocab.lookup
    pairs = []
    for lineno, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1):
        src_toks = src.split()
        tgt_toks = tgt.split()
        if not src_toks or not tgt_toks:
            raise ValueError(f"empty line {lineno}")
        pairs.append(
            SentencePair(
                tuple(intern(t) for t in src_toks),
                tuple(intern(t) for t in tgt_toks),
            )
        )
    return pairs


def attach_alignments(pairs: Sequence[SentencePair], alignment_text: str) -> list[SentencePair]:
    """Attach one Pharaoh line per sentence pair, validating ranges."""
    lines = split_lines(alignment_text)
    if len(lines) != len(pairs):
        raise ValueError(
            f"line-count mismatch: {len(lines)} alignment lines vs {len(pairs)} pairs"
        )
    return [pair.with_alignment(parse_pharaoh(line)) for pair, line in zip(pairs, lines)]


@dataclass(frozen=True)
class SyntheticTaskConfig:
    vocab_size: int
    min_len: int
    max_len: int
    reorder_rule: str = "monotone"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.min_len <= self.max_len:
            raise ValueError("need 1 <= min_len <= max_len")
        if self.vocab_size < 2:
            raise ValueError("vocab_size must be >= 2")
        if self.reorder_rule not in REORDER_RULES:
            raise ValueError(f"reorder_rule must be one of {REORDER_RULES}")


def _reorder_final_to_second(ids: Sequence[int]) -> tuple[list[int], list[tuple[int, int]]]:
    n = len(ids)
    if n <= 2:
        return list(ids), [(i, i) for i in range(n)]
    target = [ids[0], ids[n - 1]] + list(ids[1 : n - 1])
    links = [(0, 0), (n - 1, 1)] + [(i, i + 1) for i in range(1, n - 1)]
    return target, links


def gen_synthetic(
    config: SyntheticTaskConfig, n: int, vocab: Vocabulary
) -> list[SentencePair]:
    """Generate n sentence pairs with bijective gold alignments.

    The source is random base tokens; the target is a token-wise mapped copy,
    reordered per the config rule. Every pair is drawn from a per-index
    derived stream, so generation is order-independent and reproducible.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    src_ids = [vocab.add(f"s{v}") for v in range(config.vocab_size)]
    tgt_ids = [vocab.add(f"t{v}") for v in range(config.vocab_size)]
    mapped = dict(zip(src_ids, tgt_ids))
    pairs = []
    for index in range(n):
        rng = stream(config.seed, "synth", index)
        length = int(rng.integers(config.min_len, config.max_len + 1))
        source = [src_ids[int(v)] for v in rng.integers(0, config.vocab_size, size=length)]
        translated = [mapped[s] for s in source]
        if config.reorder_rule == "monotone":
            target = translated
            links = [(i, i) for i in range(length)]
        else:
            target, links = _reorder_final_to_second(translated)
        pairs.append(SentencePair(tuple(source), tuple(target), AlignmentSet(links)))
    return pairs


def mean_length_ratio(pairs: Sequence[SentencePair]) -> float:
    """Corpus mean of |target| / |source|; 1.0 for an empty corpus."""
    if not pairs:
        return 1.0
    return sum(len(p.target) / len(p.source) for p in pairs) / len(pairs)
