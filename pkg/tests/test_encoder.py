import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from designsec.attack_domain import KINDS, AttackScenario, AttributeKind, Vocabulary, default_vocabulary
from designsec.encoder import (
    EncodingError,
    TargetScaling,
    decode_prediction,
    encode_scenario,
    normalize_features,
    round_half_away,
    scale_target,
    unscale_output,
)
from test_attack_domain import WEBMAIL

P1 = TargetScaling(1, 28, 0.8)
P2 = TargetScaling(29, 53, 0.8)


def _vocab(sizes):
    v = Vocabulary()
    for kind, n in zip(KINDS, sizes):
        for i in range(n):
            v.register(kind, f"{kind.name} {i}")
    return v


def test_encode_webmail():
    s = AttackScenario.from_mapping("CVE-2003-1192", WEBMAIL, 3)
    assert encode_scenario(s, default_vocabulary()) == [0, 1, 9, 39, 5, 2, 6, 0, 0, 2, 3, 0]


def test_encode_unregistered_value():
    values = dict(WEBMAIL)
    values[AttributeKind.Target] = "Heap"
    s = AttackScenario.from_mapping("x", values, 3)
    with pytest.raises(EncodingError, match="Heap"):
        encode_scenario(s, default_vocabulary())


def test_normalize_endpoints_and_midpoint():
    v = _vocab([40, 11] + [1] * 10)
    x = normalize_features([0, 5] + [0] * 10, v)
    assert x[0] == -1.0 and x[1] == 0.0
    assert normalize_features([39, 0] + [0] * 10, v)[0] == 1.0
    assert np.all(x[2:] == 0.0)  # size-1 kinds


def test_normalize_out_of_range():
    v = _vocab([3] * 12)
    with pytest.raises(EncodingError, match="Attacker"):
        normalize_features([3] + [0] * 11, v)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=12, max_size=12), st.data())
def test_normalize_within_unit_box(sizes, data):
    v = _vocab(sizes)
    codes = [data.draw(st.integers(0, n - 1)) for n in sizes]
    x = normalize_features(codes, v)
    assert x.shape == (12,)
    assert np.all((-1.0 <= x) & (x <= 1.0))


def test_scale_examples():
    assert scale_target(1, P1) == -0.8
    assert scale_target(28, P1) == pytest.approx(0.8, abs=1e-15)
    assert scale_target(3, P1) == pytest.approx(-0.8 + 1.6 * 2 / 27, abs=1e-15)
    assert scale_target(3, P1) == pytest.approx(-0.68148, abs=1e-5)


def test_scale_outside_range():
    with pytest.raises(EncodingError):
        scale_target(29, P1)


def test_unscale_examples():
    assert unscale_output(-0.8, P1) == 1.0
    assert unscale_output(0.0, P1) == 14.5
    assert unscale_output(scale_target(14, P1), P1) == pytest.approx(14.0, abs=1e-12)
    # outside the band extrapolates linearly
    assert unscale_output(1.0, P1) == pytest.approx(28 + 0.2 * 27 / 1.6)


def test_degenerate_scaling():
    ts = TargetScaling(5, 5)
    assert scale_target(5, ts) == 0.0
    assert unscale_output(0.37, ts) == 5.0


@pytest.mark.parametrize("ts", [P1, P2, TargetScaling(1, 53, 0.5)])
def test_round_trip_every_id(ts):
    for pid in range(ts.lo, ts.hi + 1):
        back = unscale_output(scale_target(pid, ts), ts)
        assert abs(back - pid) < 1e-12
        assert decode_prediction(back, ts.lo, ts.hi) == pid


@pytest.mark.parametrize(
    "x,lo,hi,want",
    [(2.9761, 1, 28, 3), (19.9984, 1, 28, 20), (50.6745, 29, 53, 51), (0.2, 1, 28, 1), (60.0, 29, 53, 53)],
)
def test_decode_examples(x, lo, hi, want):
    assert decode_prediction(x, lo, hi) == want


def test_round_half_away_from_zero():
    assert [round_half_away(v) for v in (2.5, 3.5, -2.5, 0.49999, -0.5)] == [3, 4, -3, 0, -1]


@settings(max_examples=200, deadline=None)
@given(st.floats(-100, 100), st.floats(-100, 100))
def test_decode_monotone(a, b):
    a, b = sorted((a, b))
    assert decode_prediction(a, 1, 53) <= decode_prediction(b, 1, 53)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 60), st.integers(0, 60), st.floats(0.05, 1.0), st.data())
def test_scale_inverse_property(lo, span, band, data):
    ts = TargetScaling(lo, lo + span, band)
    pid = data.draw(st.integers(ts.lo, ts.hi))
    y = scale_target(pid, ts)
    assert -band - 1e-15 <= y <= band + 1e-15
    assert abs(unscale_output(y, ts) - pid) < 1e-12
