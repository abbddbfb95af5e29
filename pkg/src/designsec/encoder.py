"""Mapping between value strings, integer codes and the network's real-valued space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attack_domain import KINDS, AttackScenario, Vocabulary


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class TargetScaling:
    """Affine map from the pattern-ID range [lo, hi] onto [-band, band].

    A single-ID range (lo == hi) maps that ID to 0.
    """

    lo: int
    hi: int
    band: float = 0.8

    def __post_init__(self) -> None:
        if self.hi < self.lo:
            raise ValueError(f"hi ({self.hi}) must not be below lo ({self.lo})")
        if not 0.0 < self.band <= 1.0:
            raise ValueError("band must lie in (0, 1]")

    @property
    def degenerate(self) -> bool:
        return self.hi == self.lo


def encode_scenario(s: AttackScenario, vocab: Vocabulary) -> list[int]:
    codes = []
    for kind in KINDS:
        value = s.value(kind)
        if value is None:
            raise EncodingError(f"{s.scenario_id}: missing {kind.name}")
        code = vocab.code_of(kind, value)
        if code is None:
            raise EncodingError(f"{s.scenario_id}: unregistered {kind.name} value {value.text!r}")
        codes.append(code)
    return codes


def normalize_features(codes: Sequence[int] | np.ndarray, vocab: Vocabulary) -> np.ndarray:
    """Scale codes onto [-1, 1] per attribute by vocabulary size.

    Accepts one row of 12 codes or a 2-D array of rows.
    """
    arr = np.asarray(codes, dtype=np.int64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != 12:
        raise EncodingError(f"expected 12 codes per row, got {arr.shape[1]}")
    sizes = np.array(vocab.sizes(), dtype=np.int64)
    bad = (arr < 0) | (arr >= sizes)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise EncodingError(f"code {arr[r, c]} out of range for {KINDS[c].name} (size {sizes[c]})")
    span = (sizes - 1).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(span > 0, -1.0 + 2.0 * arr / np.where(span > 0, span, 1.0), 0.0)
    return x[0] if single else x


def scale_target(pattern_id: int, ts: TargetScaling) -> float:
    if not ts.lo <= pattern_id <= ts.hi:
        raise EncodingError(f"pattern id {pattern_id} outside [{ts.lo}, {ts.hi}]")
    if ts.degenerate:
        return 0.0
    return -ts.band + 2.0 * ts.band * (pattern_id - ts.lo) / (ts.hi - ts.lo)


def unscale_output(y: float, ts: TargetScaling) -> float:
    if ts.degenerate:
        return float(ts.lo)
    return ts.lo + (y + ts.band) * (ts.hi - ts.lo) / (2.0 * ts.band)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def decode_prediction(id_estimate: float, lo: int, hi: int) -> int:
    if hi < lo:
        raise ValueError("hi must be >= lo")
    return min(max(round_half_away(id_estimate), lo), hi)
