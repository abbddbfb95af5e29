"""Partitioned ensemble: one scalar-output network per contiguous pattern-ID range."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import mlp
from .attack_domain import AttackScenario, Vocabulary
from .corpus_io import Corpus, EncodedScenario, partition_by_range
from .encoder import (
    TargetScaling,
    decode_prediction,
    encode_scenario,
    normalize_features,
    round_half_away,
    scale_target,
    unscale_output,
)


class FingerprintMismatch(ValueError):
    """The model was trained against a different vocabulary."""


@dataclass
class Partition:
    lo: int
    hi: int
    scaling: TargetScaling
    network: mlp.Network
    report: Optional[mlp.TrainReport] = None

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("partition lo must be <= hi")
        if (self.scaling.lo, self.scaling.hi) != (self.lo, self.hi):
            raise ValueError("partition scaling bounds must equal its range")


@dataclass
class EnsembleModel:
    partitions: list[Partition]
    vocab_fingerprint: str

    def __post_init__(self) -> None:
        los = [p.lo for p in self.partitions]
        if los != sorted(los):
            raise ValueError("partitions must be sorted by lo")
        for a, b in zip(self.partitions, self.partitions[1:]):
            if b.lo <= a.hi:
                raise ValueError(f"partitions ({a.lo}, {a.hi}) and ({b.lo}, {b.hi}) overlap")

    @property
    def ranges(self) -> list[tuple[int, int]]:
        return [(p.lo, p.hi) for p in self.partitions]

    def dumps(self) -> str:
        parts = [f"ensemblev1,{len(self.partitions)},{self.vocab_fingerprint}\n"]
        for p in self.partitions:
            parts.append(f"{p.lo},{p.hi},{p.scaling.band!r}\n")
            parts.append(mlp.network_to_text(p.network))
        return "".join(parts)

    @classmethod
    def loads(cls, text: str) -> "EnsembleModel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty ensemble file")
        head = lines[0].split(",")
        if len(head) != 3 or head[0] != "ensemblev1":
            raise ValueError(f"not an ensemblev1 file: {lines[0]!r}")
        count, fingerprint = int(head[1]), head[2]
        partitions, pos = [], 1
        for _ in range(count):
            lo, hi, band = lines[pos].split(",")
            n_lines = mlp.network_line_count(lines[pos + 1])
            net = mlp.network_from_lines(lines[pos + 1 : pos + 1 + n_lines])
            scaling = TargetScaling(int(lo), int(hi), float(band))
            partitions.append(Partition(int(lo), int(hi), scaling, net))
            pos += 1 + n_lines
        if pos != len(lines):
            raise ValueError("trailing content after last partition")
        return cls(partitions, fingerprint)

    def save(self, path: Union[str, os.PathLike]) -> int:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            return fh.write(self.dumps())

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "EnsembleModel":
        with open(path, "r", encoding="ascii") as fh:
            return cls.loads(fh.read())


def build_partitions(ids_present: Iterable[int], max_classes_per_net: int = 28) -> list[tuple[int, int]]:
    """Greedy left-to-right ranges, each spanning at most ``max_classes_per_net`` ID values.

    A range opens at the smallest unassigned ID and closes at the largest
    present ID within ``max_classes_per_net`` consecutive values, since one
    scalar output has to resolve every integer between its bounds.
    """
    ids = sorted(set(ids_present))
    if not ids:
        raise ValueError("no pattern ids")
    if max_classes_per_net < 1:
        raise ValueError("max_classes_per_net must be >= 1")
    ranges = []
    i = 0
    while i < len(ids):
        lo = ids[i]
        while i + 1 < len(ids) and ids[i + 1] <= lo + max_classes_per_net - 1:
            i += 1
        ranges.append((lo, ids[i]))
        i += 1
    return ranges


def _partition_seed(seed: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, k])


def train_ensemble(
    train: Corpus,
    vocab: Vocabulary,
    config: mlp.TrainConfig = mlp.TrainConfig(),
    spec: mlp.NetworkSpec = mlp.NetworkSpec(),
    max_classes_per_net: int = 28,
    band: float = 0.8,
) -> EnsembleModel:
    if len(train) == 0:
        raise ValueError("empty training corpus")
    ranges = build_partitions(train.pattern_ids, max_classes_per_net)
    partitions = []
    for k, (part, (lo, hi)) in enumerate(zip(partition_by_range(train, ranges), ranges)):
        scaling = TargetScaling(lo, hi, band)
        X = normalize_features(part.codes_matrix(), vocab)
        T = np.array([[scale_target(s.pattern_id, scaling)] for s in part])
        net = mlp.init_network(spec, _partition_seed(config.seed, k))
        net, report = mlp.train(net, X, T, config)
        partitions.append(Partition(lo, hi, scaling, net, report))
    return EnsembleModel(partitions, vocab.fingerprint())


@dataclass(frozen=True)
class Prediction:
    predicted_id: int
    raw: float
    partition: int


def _routing_residual(raw: float, lo: int, hi: int) -> float:
    return abs(raw - min(max(round_half_away(raw), lo), hi))


def predict_codes(m: EnsembleModel, codes: Sequence[int], vocab: Vocabulary) -> Prediction:
    if vocab.fingerprint() != m.vocab_fingerprint:
        raise FingerprintMismatch(
            f"vocabulary fingerprint {vocab.fingerprint()} does not match model ({m.vocab_fingerprint})"
        )
    x = normalize_features(codes, vocab)
    best: Optional[tuple[float, int, float]] = None
    for k, p in enumerate(m.partitions):
        raw = unscale_output(float(mlp.predict(p.network, x)[0]), p.scaling)
        r = _routing_residual(raw, p.lo, p.hi)
        if best is None or r < best[0]:
            best = (r, k, raw)
    _, k, raw = best
    p = m.partitions[k]
    return Prediction(decode_prediction(raw, p.lo, p.hi), raw, k)


def predict_pattern(
    m: EnsembleModel, s: Union[AttackScenario, EncodedScenario], vocab: Vocabulary
) -> Prediction:
    """Route ``s`` to the partition whose output lands closest to an in-range ID."""
    codes = s.codes if isinstance(s, EncodedScenario) else encode_scenario(s, vocab)
    return predict_codes(m, codes, vocab)


@dataclass(frozen=True)
class EvalRow:
    scenario_id: str
    expected_id: int
    raw: float
    predicted_id: int
    correct: bool
    partition: int


@dataclass
class EvalReport:
    rows: list[EvalRow]
    partition_accuracy: dict[int, Fraction] = field(default_factory=dict)
    overall_accuracy: Fraction = Fraction(0)

    @property
    def overall(self) -> float:
        return float(self.overall_accuracy)

    def to_csv(self) -> str:
        lines = ["scenario_id,partition,expected,actual_raw,predicted,correct"]
        for r in self.rows:
            lines.append(
                f"{r.scenario_id},{r.partition},{r.expected_id},{r.raw:.4f},{r.predicted_id},{int(r.correct)}"
            )
        return "\n".join(lines) + "\n"

    def summary_lines(self, n_partitions: int) -> list[str]:
        out = []
        for k in range(n_partitions):
            rows = [r for r in self.rows if r.partition == k]
            acc = self.partition_accuracy.get(k)
            shown = "n/a" if acc is None else f"{float(acc):.4f}"
            out.append(f"partition {k}: {sum(r.correct for r in rows)}/{len(rows)} accuracy {shown}")
        correct = sum(r.correct for r in self.rows)
        out.append(f"overall: {correct}/{len(self.rows)} accuracy {self.overall:.4f}")
        return out


def evaluate(m: EnsembleModel, test: Corpus, vocab: Vocabulary) -> EvalReport:
    if len(test) == 0:
        raise ValueError("empty test corpus")
    rows = []
    for s in test:
        pred = predict_codes(m, s.codes, vocab)
        rows.append(
            EvalRow(s.scenario_id, s.pattern_id, pred.raw, pred.predicted_id, pred.predicted_id == s.pattern_id, pred.partition)
        )
    rows.sort(key=lambda r: (r.expected_id, r.scenario_id))
    per = {}
    for k in range(len(m.partitions)):
        mine = [r for r in rows if r.partition == k]
        if mine:
            per[k] = Fraction(sum(r.correct for r in mine), len(mine))
    overall = Fraction(sum(r.correct for r in rows), len(rows))
    return EvalReport(rows, per, overall)
