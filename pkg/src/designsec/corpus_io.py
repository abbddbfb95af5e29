"""Comma-delimited corpus files of encoded scenarios, splitting and partitioning."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence, Union

import numpy as np

from .attack_domain import COLUMN_NAMES

HEADER = ",".join(("scenario_id", *COLUMN_NAMES, "pattern_id"))


class CorpusError(ValueError):
    """Malformed corpus content; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None) -> None:
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


@dataclass(frozen=True)
class EncodedScenario:
    """A scenario as it appears in a corpus file: twelve codes and a pattern ID."""

    scenario_id: str
    codes: tuple[int, ...]
    pattern_id: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "codes", tuple(int(c) for c in self.codes))
        if len(self.codes) != 12:
            raise ValueError(f"{self.scenario_id}: expected 12 codes, got {len(self.codes)}")


@dataclass
class Corpus:
    scenarios: list[EncodedScenario] = field(default_factory=list)
    source_path: str = ""

    def __post_init__(self) -> None:
        seen = set()
        for s in self.scenarios:
            if s.scenario_id in seen:
                raise CorpusError(f"duplicate scenario_id {s.scenario_id!r}")
            seen.add(s.scenario_id)

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    @property
    def pattern_ids(self) -> list[int]:
        return [s.pattern_id for s in self.scenarios]

    def codes_matrix(self) -> np.ndarray:
        return np.array([s.codes for s in self.scenarios], dtype=np.int64).reshape(-1, 12)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int = 42
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def _parse_nonneg(text: str, what: str, lineno: int) -> int:
    text = text.strip()
    if not text.isdigit():
        raise CorpusError(f"{what} must be a non-negative integer, got {text!r}", lineno)
    return int(text)


def parse_corpus(source: Union[str, os.PathLike, bytes, BinaryIO]) -> Corpus:
    """Parse a corpus from a path, raw bytes or a binary stream."""
    path = ""
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
        path = getattr(source, "name", "") or ""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        lineno = data[: exc.start].count(b"\n") + 1
        raise CorpusError("non-ASCII byte in corpus", lineno) from None

    scenarios = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split(",")
        if fields[0].strip() == "scenario_id":
            continue
        if len(fields) != 14:
            raise CorpusError(f"expected 14 fields, got {len(fields)}", lineno)
        sid = fields[0].strip()
        if not sid:
            raise CorpusError("empty scenario_id", lineno)
        if sid in seen:
            raise CorpusError(f"duplicate scenario_id {sid!r}", lineno)
        seen.add(sid)
        codes = tuple(_parse_nonneg(f, "code", lineno) for f in fields[1:13])
        pid = _parse_nonneg(fields[13], "pattern_id", lineno)
        if pid < 1:
            raise CorpusError("pattern_id must be >= 1", lineno)
        scenarios.append(EncodedScenario(sid, codes, pid))
    return Corpus(scenarios, path)


def corpus_to_text(c: Corpus) -> str:
    lines = [HEADER]
    for s in c.scenarios:
        lines.append(",".join((s.scenario_id, *map(str, s.codes), str(s.pattern_id))))
    return "\n".join(lines) + "\n"


def write_corpus(c: Corpus, destination: Union[str, os.PathLike, BinaryIO]) -> int:
    """Write ``c`` and return the number of bytes written."""
    data = corpus_to_text(c).encode("ascii")
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            return fh.write(data)
    return destination.write(data)


def _allocate_test_counts(counts: dict[int, int], n_test: int, rng: np.random.Generator) -> dict[int, int]:
    """Largest-remainder allocation of ``n_test`` over patterns, keeping one train sample each."""
    n = sum(counts.values())
    ids = sorted(counts)
    cap = {p: counts[p] - 1 for p in ids}
    ideal = {p: n_test * counts[p] / n for p in ids}
    alloc = {p: min(int(np.floor(ideal[p])), cap[p]) for p in ids}
    remaining = n_test - sum(alloc.values())
    # random tie-break keeps equal remainders from always favoring low IDs
    tiebreak = dict(zip(ids, rng.permutation(len(ids))))
    while remaining > 0:
        open_ids = [p for p in ids if alloc[p] < cap[p]]
        if not open_ids:
            break
        open_ids.sort(key=lambda p: (-(ideal[p] - alloc[p]), tiebreak[p]))
        for p in open_ids[:remaining]:
            alloc[p] += 1
        remaining = n_test - sum(alloc.values())
    return alloc


def split_corpus(c: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Seeded train/test split; both halves keep the corpus order."""
    n = len(c)
    if n < 2:
        raise CorpusError(f"corpus too small to split ({n} samples)")
    n_train = min(max(int(round(spec.train_fraction * n)), 1), n - 1)
    n_test = n - n_train
    rng = np.random.default_rng(spec.seed)

    if spec.stratified:
        by_pattern: dict[int, list[int]] = {}
        for i, s in enumerate(c.scenarios):
            by_pattern.setdefault(s.pattern_id, []).append(i)
        alloc = _allocate_test_counts({p: len(v) for p, v in by_pattern.items()}, n_test, rng)
        if sum(alloc.values()) == 0:
            raise CorpusError("corpus too small for a stratified split: every pattern has a single sample")
        test_idx = set()
        for p in sorted(by_pattern):
            members = by_pattern[p]
            picks = rng.permutation(len(members))[: alloc[p]]
            test_idx.update(members[j] for j in picks)
    else:
        test_idx = set(rng.permutation(n)[:n_test].tolist())

    train = [s for i, s in enumerate(c.scenarios) if i not in test_idx]
    test = [s for i, s in enumerate(c.scenarios) if i in test_idx]
    return Corpus(train, c.source_path), Corpus(test, c.source_path)


def check_ranges(ranges: Sequence[tuple[int, int]]) -> None:
    ordered = sorted(ranges)
    for lo, hi in ordered:
        if lo > hi:
            raise CorpusError(f"empty range ({lo}, {hi})")
    for (lo1, hi1), (lo2, hi2) in zip(ordered, ordered[1:]):
        if lo2 <= hi1:
            raise CorpusError(f"ranges ({lo1}, {hi1}) and ({lo2}, {hi2}) overlap on pattern id {lo2}")


def range_index(ranges: Sequence[tuple[int, int]], pattern_id: int) -> int | None:
    for k, (lo, hi) in enumerate(ranges):
        if lo <= pattern_id <= hi:
            return k
    return None


def partition_by_range(c: Corpus, ranges: Sequence[tuple[int, int]]) -> list[Corpus]:
    check_ranges(ranges)
    parts: list[list[EncodedScenario]] = [[] for _ in ranges]
    for s in c.scenarios:
        k = range_index(ranges, s.pattern_id)
        if k is None:
            raise CorpusError(f"pattern id {s.pattern_id} is not covered by any range")
        parts[k].append(s)
    return [Corpus(p, c.source_path) for p in parts]
