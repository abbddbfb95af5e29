"""Command-line entry point: ``designsec <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import classifier, mlp
from .attack_domain import (
    KINDS,
    AttackScenario,
    AttributeKind,
    Vocabulary,
    default_catalog,
    default_vocabulary,
    read_scenarios,
    scenario_validate,
)
from .corpus_io import Corpus, CorpusError, EncodedScenario, SplitSpec, parse_corpus, split_corpus, write_corpus
from .encoder import EncodingError, encode_scenario

log = logging.getLogger("designsec")


class CliError(Exception):
    """Reported on stderr; the process exits with status 1."""


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DS_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"DS_SEED must be an integer, got {env!r}") from None
    return 42


def _fraction(text: str) -> float:
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("fraction must lie in (0, 1)")
    return value


def _load_vocab(path: str) -> Vocabulary:
    try:
        return Vocabulary.load(path)
    except OSError as exc:
        raise CliError(f"cannot read vocabulary {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise CliError(f"bad vocabulary {path}: {exc}") from None


def _load_corpus(path: str) -> Corpus:
    try:
        return parse_corpus(path)
    except OSError as exc:
        raise CliError(f"cannot read corpus {path}: {exc.strerror}") from None
    except CorpusError as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_model(path: str) -> classifier.EnsembleModel:
    try:
        return classifier.EnsembleModel.load(path)
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc.strerror}") from None
    except (ValueError, IndexError) as exc:
        raise CliError(f"bad model file {path}: {exc}") from None


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def corpus_violations(corpus: Corpus, vocab: Vocabulary) -> list[str]:
    sizes = vocab.sizes()
    catalog = {p.id for p in default_catalog()}
    problems = []
    for s in corpus:
        for kind, code, size in zip(KINDS, s.codes, sizes):
            if code >= size:
                problems.append(f"{s.scenario_id}: {kind.name} code {code} not in vocabulary (size {size})")
        if s.pattern_id not in catalog:
            problems.append(f"{s.scenario_id}: unknown pattern id {s.pattern_id}")
    return problems


# -- subcommands ---------------------------------------------------------------


def cmd_vocab(args: argparse.Namespace) -> int:
    if args.action == "build":
        try:
            scenarios = read_scenarios(args.scenarios)
        except OSError as exc:
            raise CliError(f"cannot read {args.scenarios}: {exc.strerror}") from None
        except ValueError as exc:
            raise CliError(f"{args.scenarios}: {exc}") from None
        vocab = default_vocabulary()
        for s in scenarios:
            for kind in KINDS:
                value = s.value(kind)
                if value is not None:
                    vocab.register(kind, value)
        vocab.save(args.vocab)
        log.info("wrote %s (%d scenarios scanned)", args.vocab, len(scenarios))
        return 0
    vocab = _load_vocab(args.vocab)
    for kind, code, value in vocab.entries():
        print(f"{kind.ordinal},{code},{'<reserved>' if value is None else value.text}")
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    vocab = _load_vocab(args.vocab)
    try:
        scenarios = read_scenarios(args.scenarios)
    except OSError as exc:
        raise CliError(f"cannot read {args.scenarios}: {exc.strerror}") from None
    except ValueError as exc:
        raise CliError(f"{args.scenarios}: {exc}") from None
    catalog = default_catalog()
    problems = []
    for s in scenarios:
        problems.extend(str(v) for v in scenario_validate(s, vocab, catalog))
        if s.pattern_id is None:
            problems.append(f"{s.scenario_id}: missing pattern id")
    if problems:
        raise CliError("invalid scenarios:\n  " + "\n  ".join(problems))
    corpus = Corpus([EncodedScenario(s.scenario_id, encode_scenario(s, vocab), s.pattern_id) for s in scenarios])
    write_corpus(corpus, args.out)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    from . import synthgen

    vocab = synthgen.synthetic_vocabulary()
    if args.templates:
        try:
            templates = synthgen.load_templates(args.templates)
        except (OSError, ValueError) as exc:
            raise CliError(f"bad template file {args.templates}: {exc}") from None
    else:
        templates = synthgen.default_templates(vocab)
    try:
        corpus = synthgen.generate_corpus(templates, args.per_pattern, args.noise, _seed(args), vocab)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    os.makedirs(args.out_dir, exist_ok=True)
    write_corpus(corpus, os.path.join(args.out_dir, "corpus.csv"))
    vocab.save(os.path.join(args.out_dir, "vocab.txt"))
    synthgen.save_templates(templates, os.path.join(args.out_dir, "templates.csv"))
    print(f"{len(corpus)} scenarios from {len(templates)} templates -> {args.out_dir}")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    try:
        train, test = split_corpus(corpus, SplitSpec(args.train_fraction, _seed(args), not args.unstratified))
    except (CorpusError, ValueError) as exc:
        raise CliError(str(exc)) from None
    write_corpus(train, args.train_out)
    write_corpus(test, args.test_out)
    print(f"train {len(train)} / test {len(test)}")
    return 0


def _configs(args: argparse.Namespace) -> tuple[mlp.TrainConfig, mlp.NetworkSpec]:
    defaults = mlp.TrainConfig()
    try:
        config = mlp.TrainConfig(
            learning_rate=defaults.learning_rate if args.lr is None else args.lr,
            momentum=defaults.momentum if args.momentum is None else args.momentum,
            max_iterations=defaults.max_iterations if args.max_iter is None else args.max_iter,
            mse_goal=args.goal,
            patience=defaults.patience if args.patience is None else args.patience,
            validation_fraction=defaults.validation_fraction if args.val_fraction is None else args.val_fraction,
            seed=_seed(args),
        )
        spec = mlp.NetworkSpec(n_hidden=args.hidden, output_activation=args.output_activation)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return config, spec


def cmd_train(args: argparse.Namespace) -> int:
    vocab = _load_vocab(args.vocab)
    corpus = _load_corpus(args.corpus)
    if len(corpus) == 0:
        raise CliError(f"{args.corpus}: corpus is empty")
    problems = corpus_violations(corpus, vocab)
    if problems:
        raise CliError("invalid corpus:\n  " + "\n  ".join(problems))
    config, spec = _configs(args)
    model = classifier.train_ensemble(corpus, vocab, config, spec, args.max_classes, args.band)
    os.makedirs(args.out_dir, exist_ok=True)
    model.save(os.path.join(args.out_dir, "model.ens"))
    for k, part in enumerate(model.partitions):
        _write(os.path.join(args.out_dir, f"mse_partition{k}.csv"), part.report.to_csv())
        rep = part.report
        print(
            f"partition {k} [{part.lo},{part.hi}]: {rep.stop_reason} at epoch {rep.stopped_at_epoch}, "
            f"train MSE {rep.train_mse[-1]:.6g}"
        )
    if args.figures:
        from . import plotting

        plotting.plot_all_curves([p.report for p in model.partitions], args.out_dir)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    vocab = _load_vocab(args.vocab)
    model = _load_model(args.model)
    corpus = _load_corpus(args.corpus)
    if len(corpus) == 0:
        raise CliError(f"{args.corpus}: test corpus is empty")
    problems = corpus_violations(corpus, vocab)
    if problems:
        raise CliError("invalid corpus:\n  " + "\n  ".join(problems))
    try:
        report = classifier.evaluate(model, corpus, vocab)
    except classifier.FingerprintMismatch as exc:
        raise CliError(str(exc)) from None
    os.makedirs(args.out_dir, exist_ok=True)
    _write(os.path.join(args.out_dir, "eval_report.csv"), report.to_csv())
    for line in report.summary_lines(len(model.partitions)):
        print(line)
    if args.figures:
        from . import plotting

        plotting.plot_actual_vs_expected(report, os.path.join(args.out_dir, "actual_vs_expected.png"))
    return 0


def _parse_assignments(items: Sequence[str], vocab: Vocabulary) -> AttackScenario:
    values: dict[AttributeKind, str] = {}
    for item in items:
        if "=" not in item:
            raise CliError(f"expected kind=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            kind = AttributeKind.parse(key)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from None
        if kind in values:
            raise CliError(f"duplicate attribute {kind.name}")
        if not value.strip():
            raise CliError(f"empty value for {kind.name}")
        values[kind] = value
    missing = [k.name for k in KINDS if k not in values]
    if missing:
        raise CliError("missing attributes: " + ", ".join(missing))
    scenario = AttackScenario.from_mapping("cli", values)
    for kind in KINDS:
        if vocab.code_of(kind, values[kind]) is None:
            raise CliError(f"unknown {kind.name} value {values[kind]!r}")
    return scenario


def cmd_predict(args: argparse.Namespace) -> int:
    vocab = _load_vocab(args.vocab)
    model = _load_model(args.model)
    scenario = _parse_assignments(args.assignments, vocab)
    try:
        pred = classifier.predict_pattern(model, scenario, vocab)
    except (classifier.FingerprintMismatch, EncodingError) as exc:
        raise CliError(str(exc)) from None
    print(f"predicted={pred.predicted_id} raw={pred.raw:.4f} partition={pred.partition}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="designsec",
        description="Classify software-design attack scenarios into attack patterns with a partitioned MLP.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=None, help="RNG seed (overrides $DS_SEED; default 42)")

    figures = argparse.ArgumentParser(add_help=False)
    figures.add_argument("--no-figures", dest="figures", action="store_false", help="skip PNG figures")

    p = sub.add_parser("vocab", help="build or show a vocabulary file")
    p.add_argument("action", choices=("build", "show"))
    p.add_argument("--scenarios", help="value-string scenario CSV (build)")
    p.add_argument("--vocab", required=True, help="vocabulary file to write (build) or read (show)")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("encode", help="encode a value-string scenario CSV into a corpus file")
    p.add_argument("--scenarios", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("gen", parents=[seed], help="generate a synthetic corpus, vocabulary and templates")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--per-pattern", type=int, default=6)
    p.add_argument("--noise", type=float, default=0.15)
    p.add_argument("--templates", help="template CSV (default: built-in templates)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("split", parents=[seed], help="seeded train/test split of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--train-fraction", type=_fraction, default=_fraction("260/311"))
    p.add_argument("--unstratified", action="store_true")
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", parents=[seed, figures], help="train the partitioned ensemble")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--hidden", type=int, default=mlp.NetworkSpec().n_hidden)
    p.add_argument("--output-activation", choices=mlp.ACTIVATIONS, default=mlp.NetworkSpec().output_activation)
    p.add_argument("--lr", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--val-fraction", type=float)
    p.add_argument("--goal", type=float, default=0.0, help="training MSE goal (0 disables)")
    p.add_argument("--band", type=float, default=0.8)
    p.add_argument("--max-classes", type=int, default=28)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[figures], help="evaluate a model on a test corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict the pattern of one scenario given as kind=value pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("assignments", nargs="*", metavar="kind=value")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "vocab" and args.action == "build" and not args.scenarios:
        parser.error("vocab build requires --scenarios")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"designsec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
