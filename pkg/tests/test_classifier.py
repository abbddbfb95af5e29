from fractions import Fraction

import numpy as np
import pytest

from designsec import classifier, mlp, synthgen
from designsec.attack_domain import KINDS, AttackScenario, default_vocabulary
from designsec.classifier import EnsembleModel, FingerprintMismatch, Partition, build_partitions
from designsec.corpus_io import Corpus, EncodedScenario, SplitSpec, split_corpus
from designsec.encoder import TargetScaling, scale_target
from test_attack_domain import WEBMAIL

ROSTER_IDS = [p for p in range(1, 54) if p not in (18, 19)]
FAST = mlp.TrainConfig(max_iterations=200)


def test_partitions_default_roster():
    assert build_partitions(ROSTER_IDS, 28) == [(1, 28), (29, 53)]


def test_partitions_single_id():
    assert build_partitions({5}) == [(5, 5)]


def test_partitions_sixty():
    ranges = build_partitions(range(1, 61), 28)
    assert ranges == [(1, 28), (29, 56), (57, 60)]
    assert [hi - lo + 1 for lo, hi in ranges] == [28, 28, 4]


def test_partitions_empty():
    with pytest.raises(ValueError):
        build_partitions([])


def _const_net(y: float, n_in: int = 12) -> mlp.Network:
    """A network whose linear output is the constant ``y``."""
    spec = mlp.NetworkSpec(n_in, 1, 1, "linear")
    return mlp.Network(np.zeros((1, n_in)), np.zeros(1), np.zeros((1, 1)), np.array([y]), spec)


def _model(raws, ranges, vocab):
    parts = []
    for raw, (lo, hi) in zip(raws, ranges):
        ts = TargetScaling(lo, hi)
        y = (raw - lo) * 2 * ts.band / (hi - lo) - ts.band
        parts.append(Partition(lo, hi, ts, _const_net(y)))
    return EnsembleModel(parts, vocab.fingerprint())


def test_routing_prefers_smaller_residual():
    v = default_vocabulary()
    m = _model([2.9761, 30.41], [(1, 28), (29, 53)], v)
    p = classifier.predict_codes(m, [0] * 12, v)
    assert (p.predicted_id, p.partition) == (3, 0)
    assert p.raw == pytest.approx(2.9761, abs=1e-9)


def test_routing_tie_goes_to_first_partition():
    v = default_vocabulary()
    m = _model([3.25, 40.25], [(1, 28), (29, 53)], v)
    assert classifier.predict_codes(m, [0] * 12, v).partition == 0


def test_routing_clamp_counts_in_residual():
    v = default_vocabulary()
    # 31.0 is a whole number but outside partition 0, so its residual is 3.0
    m = _model([31.0, 29.6], [(1, 28), (29, 53)], v)
    p = classifier.predict_codes(m, [0] * 12, v)
    assert (p.partition, p.predicted_id) == (1, 30)


def test_predict_webmail_scenario():
    v = default_vocabulary()
    m = _model([2.9761], [(1, 28)], v)
    s = AttackScenario.from_mapping("CVE-2003-1192", WEBMAIL, 3)
    assert classifier.predict_pattern(m, s, v).predicted_id == 3


def test_fingerprint_mismatch():
    v = default_vocabulary()
    m = _model([3.0], [(1, 28)], v)
    other = v.copy()
    other.register(KINDS[0], "Somebody Else")
    with pytest.raises(FingerprintMismatch):
        classifier.predict_codes(m, [0] * 12, other)


def test_evaluate_reproduces_pattern_52_miss():
    v = default_vocabulary()
    m = _model([50.6745], [(29, 53)], v)
    test = Corpus([EncodedScenario("row50", (0,) * 12, 52)])
    rep = classifier.evaluate(m, test, v)
    (row,) = rep.rows
    assert row.predicted_id == 51 and not row.correct
    assert rep.overall_accuracy == 0


def test_evaluate_flags_seven_against_ten():
    v = default_vocabulary()
    m = _model([7.0], [(1, 28)], v)
    rep = classifier.evaluate(m, Corpus([EncodedScenario("x", (0,) * 12, 10)]), v)
    assert not rep.rows[0].correct


def test_evaluate_accuracy_is_exact_ratio():
    v = default_vocabulary()
    m = _model([3.0], [(1, 28)], v)
    test = Corpus([EncodedScenario(f"s{i}", (0,) * 12, 3 if i else 4) for i in range(26)])
    rep = classifier.evaluate(m, test, v)
    assert rep.partition_accuracy[0] == Fraction(25, 26)
    assert rep.overall_accuracy == Fraction(25, 26)
    assert float(rep.overall_accuracy) == pytest.approx(0.9615, abs=1e-4)
    # rows ordered by expected id, then scenario id
    assert [r.expected_id for r in rep.rows][:2] == [3, 3] and rep.rows[-1].expected_id == 4


def test_eval_csv_layout():
    v = default_vocabulary()
    m = _model([2.9761], [(1, 28)], v)
    rep = classifier.evaluate(m, Corpus([EncodedScenario("CVE-2003-1192", (0,) * 12, 3)]), v)
    assert rep.to_csv() == "scenario_id,partition,expected,actual_raw,predicted,correct\nCVE-2003-1192,0,3,2.9761,3,1\n"
    assert rep.summary_lines(1)[-1] == "overall: 1/1 accuracy 1.0000"


def test_ensemble_file_round_trip(tmp_path):
    v = default_vocabulary()
    m = _model([2.9761, 40.2], [(1, 28), (29, 53)], v)
    path = tmp_path / "model.ens"
    m.save(path)
    back = EnsembleModel.load(path)
    assert back.ranges == m.ranges and back.vocab_fingerprint == m.vocab_fingerprint
    assert back.dumps() == path.read_text()


def test_overlapping_partitions_rejected():
    v = default_vocabulary()
    with pytest.raises(ValueError):
        _model([3.0, 12.0], [(1, 28), (10, 40)], v)


@pytest.fixture(scope="module")
def small_run():
    vocab = synthgen.synthetic_vocabulary()
    corpus = synthgen.generate_corpus(synthgen.default_templates(vocab), 6, 0.0, 42, vocab)
    train, test = split_corpus(corpus, SplitSpec(260 / 311, 42))
    return vocab, train, test


def test_single_pattern_partition_is_degenerate():
    vocab = synthgen.synthetic_vocabulary()
    t = [x for x in synthgen.default_templates(vocab) if x.pattern_id == 7]
    train = synthgen.generate_corpus(t, 4, 0.0, 1, vocab)
    m = classifier.train_ensemble(train, vocab, FAST)
    assert m.ranges == [(7, 7)]
    assert m.partitions[0].scaling.degenerate
    assert scale_target(7, m.partitions[0].scaling) == 0.0
    assert classifier.predict_codes(m, train.scenarios[0].codes, vocab).predicted_id == 7


def test_train_ensemble_deterministic(small_run):
    vocab, train, test = small_run
    a = classifier.train_ensemble(train, vocab, FAST)
    b = classifier.train_ensemble(train, vocab, FAST)
    assert a.dumps() == b.dumps()
    assert classifier.evaluate(a, test, vocab).to_csv() == classifier.evaluate(b, test, vocab).to_csv()
    assert a.ranges == [(1, 28), (29, 53)]


def test_noise_free_corpus_is_learned(small_run):
    vocab, train, test = small_run
    m = classifier.train_ensemble(train, vocab)
    rep = classifier.evaluate(m, test, vocab)
    assert rep.overall_accuracy == 1
    for r in rep.rows:
        lo, hi = m.ranges[r.partition]
        assert lo <= r.predicted_id <= hi
    assert sum(rep.partition_accuracy[k] * sum(r.partition == k for r in rep.rows) for k in rep.partition_accuracy) == sum(
        r.correct for r in rep.rows
    )


def test_empty_inputs_rejected():
    v = default_vocabulary()
    with pytest.raises(ValueError):
        classifier.train_ensemble(Corpus(), v)
    with pytest.raises(ValueError):
        classifier.evaluate(_model([3.0], [(1, 28)], v), Corpus(), v)
