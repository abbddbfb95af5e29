"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line; conftest prints them at the end of
the session.  Running this file directly prints the same lines.
"""

import time

import numpy as np
import pytest

from designsec import classifier, cli, mlp, synthgen
from designsec.attack_domain import AttackScenario, Vocabulary, default_vocabulary
from designsec.corpus_io import SplitSpec, corpus_to_text, parse_corpus, split_corpus
from designsec.encoder import TargetScaling, decode_prediction, encode_scenario, scale_target, unscale_output
from test_attack_domain import WEBMAIL
from test_mlp import XOR_T, XOR_X, max_absolute_error, max_relative_error

RESULTS: list[str] = []


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def test_criterion_01_activation_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    # strictly inside (-1, 1) only while exp(-2|n|) is resolvable next to 1.0
    n = rng.uniform(-18.0, 18.0, 100_000)
    a = mlp.tansig(n)
    wide = mlp.tansig(rng.normal(0.0, 1e3, 100_000))
    odd = float(np.max(np.abs(a + mlp.tansig(-n))))
    ok = (
        mlp.tansig(0.0) == 0.0
        and abs(mlp.tansig(1.0) - 0.7615941559557649) <= 1e-12
        and bool(np.all(np.abs(a) < 1.0))
        and bool(np.all(np.abs(wide) <= 1.0))
        and odd <= 1e-15
    )
    elapsed = time.perf_counter() - t0
    record(1, ok and elapsed < 1.0, f"tansig(1)={mlp.tansig(1.0)!r}, max odd error {odd:.1e}, {elapsed:.3f}s")


def test_criterion_02_gradient_oracle():
    rng = np.random.default_rng(2024)
    worst = worst_abs = 0.0
    for _ in range(50):
        net = mlp.init_network(mlp.NetworkSpec(12, 20, 1), int(rng.integers(2**32)))
        k = int(rng.integers(1, 16))
        X = rng.uniform(-1, 1, (k, 12))
        T = rng.uniform(-0.8, 0.8, (k, 1))
        worst = max(worst, max_relative_error(net, X, T))
        worst_abs = max(worst_abs, max_absolute_error(net, X, T))
    record(2, worst < 1e-6, f"50 networks, max relative error {worst:.2e} (max absolute {worst_abs:.1e})")


def test_criterion_03_xor():
    t0 = time.perf_counter()
    net = mlp.init_network(mlp.NetworkSpec(2, 4, 1, "linear"), 42)
    cfg = mlp.TrainConfig(learning_rate=0.1, momentum=0.9, max_iterations=2000, mse_goal=0.01, seed=42)
    trained, rep = mlp.train(net, XOR_X, XOR_T, cfg)
    rounded = np.rint(mlp.predict(trained, XOR_X))
    elapsed = time.perf_counter() - t0
    ok = rep.train_mse[-1] < 0.01 and rep.stopped_at_epoch <= 2000 and np.array_equal(rounded, XOR_T) and elapsed < 5
    record(3, ok, f"MSE {rep.train_mse[-1]:.4g} at epoch {rep.stopped_at_epoch}, {elapsed:.3f}s")


def test_criterion_04_encoding_fidelity():
    s = AttackScenario.from_mapping("CVE-2003-1192", WEBMAIL, 3)
    codes = encode_scenario(s, default_vocabulary())
    record(4, codes == [0, 1, 9, 39, 5, 2, 6, 0, 0, 2, 3, 0], f"codes {codes}")


def test_criterion_05_scale_round_trip():
    bad = []
    checked = 0
    for ts in (TargetScaling(1, 28), TargetScaling(29, 53)):
        for pid in range(1, 54):
            if not ts.lo <= pid <= ts.hi:
                continue
            checked += 1
            if decode_prediction(unscale_output(scale_target(pid, ts), ts), ts.lo, ts.hi) != pid:
                bad.append(pid)
    record(5, not bad and checked == 53, f"{checked} ids round-tripped, failures {bad}")


def _desk_run(seed: int):
    vocab = synthgen.synthetic_vocabulary()
    corpus = synthgen.generate_corpus(synthgen.default_templates(vocab), 6, 0.15, seed, vocab)
    train, test = split_corpus(corpus, SplitSpec(260 / 311, seed, stratified=True))
    t0 = time.perf_counter()
    model = classifier.train_ensemble(train, vocab, mlp.TrainConfig(seed=seed))
    elapsed = time.perf_counter() - t0
    return model, classifier.evaluate(model, test, vocab), elapsed


@pytest.fixture(scope="module")
def desk_run():
    return _desk_run(42)


def test_criterion_06_end_to_end(desk_run):
    model, report, elapsed = desk_run
    parts = ", ".join(f"p{k} {float(a):.4f}" for k, a in sorted(report.partition_accuracy.items()))
    ok = len(model.partitions) == 2 and report.overall >= 0.90 and elapsed <= 60
    record(6, ok, f"seed 42: accuracy {report.overall:.4f} ({parts}), {len(report.rows)} test rows, train {elapsed:.2f}s")


def test_criterion_07_stopping():
    model, _, _ = _desk_run(42)
    capped = all(p.report.stopped_at_epoch <= 1000 and len(p.report.train_mse) <= 1000 for p in model.partitions)
    rng = np.random.default_rng(7)
    X = rng.uniform(-1, 1, (60, 12))
    T = rng.uniform(-0.8, 0.8, (60, 1))
    cfg = mlp.TrainConfig(learning_rate=0.2, validation_fraction=0.25, patience=6, seed=7)
    net, rep = mlp.train(mlp.init_network(mlp.NetworkSpec(), 7), X, T, cfg)
    _, va = mlp._holdout(len(X), cfg.validation_fraction, cfg.seed)
    restored = mlp.mse(mlp.predict(net, X[va]), T[va])
    ok = (
        capped
        and rep.stop_reason == "patience_exhausted"
        and rep.stopped_at_epoch == rep.best_epoch + cfg.patience
        and rep.val_mse[rep.best_epoch - 1] == min(rep.val_mse)
        and restored == pytest.approx(min(rep.val_mse), abs=1e-15)
        and rep.stopped_at_epoch <= 1000
    )
    record(7, ok, f"ensemble epochs <= 1000: {capped}; patience stop at {rep.stopped_at_epoch}, best epoch {rep.best_epoch}")


def test_criterion_08_decode_anchors():
    got = (decode_prediction(2.9761, 1, 28), decode_prediction(19.9984, 1, 28), decode_prediction(50.6745, 29, 53))
    seven_vs_ten = decode_prediction(7.0000, 1, 28) == 10
    record(8, got == (3, 20, 51) and not seven_vs_ten, f"decoded {got}; 7.0000 vs 10 correct={seven_vs_ten}")


def test_criterion_09_determinism(tmp_path):
    d = tmp_path
    assert cli.main(["gen", "--out-dir", str(d), "--seed", "42"]) == 0
    assert cli.main(["split", "--corpus", str(d / "corpus.csv"), "--train-out", str(d / "tr.csv"), "--test-out", str(d / "te.csv")]) == 0
    same = True
    for run in ("a", "b"):
        out = d / run
        assert cli.main(["train", "--corpus", str(d / "tr.csv"), "--vocab", str(d / "vocab.txt"), "--out-dir", str(out), "--no-figures"]) == 0
        assert cli.main(["eval", "--model", str(out / "model.ens"), "--corpus", str(d / "te.csv"), "--vocab", str(d / "vocab.txt"),
                         "--out-dir", str(out), "--no-figures"]) == 0
    for name in ("model.ens", "eval_report.csv"):
        same = same and (d / "a" / name).read_bytes() == (d / "b" / name).read_bytes()
    record(9, same, "two train+eval runs byte-identical" if same else "outputs differ")


def test_criterion_10_format_round_trips():
    model, _, _ = _desk_run(42)
    vocab = synthgen.synthetic_vocabulary()
    corpus = synthgen.generate_corpus(synthgen.default_templates(vocab), 6, 0.15, 42, vocab)
    checks = {}
    text = corpus_to_text(corpus)
    checks["corpus"] = corpus_to_text(parse_corpus(text.encode("ascii"))) == text
    text = vocab.dumps()
    checks["vocabulary"] = Vocabulary.loads(text).dumps() == text
    text = mlp.network_to_text(model.partitions[0].network)
    checks["model"] = mlp.network_to_text(mlp.network_from_text(text)) == text
    text = model.dumps()
    checks["ensemble"] = classifier.EnsembleModel.loads(text).dumps() == text
    record(10, all(checks.values()), ", ".join(f"{k} {'ok' if v else 'DIFF'}" for k, v in checks.items()))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
