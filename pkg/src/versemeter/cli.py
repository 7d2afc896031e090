"""Command-line front door: reproducible pipelines over the toolkit.

Subcommands: clean, encode, scan, generate, train, evaluate, gradcheck.
Every seeded subcommand is bit-reproducible: the same invocation writes
the same bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import dataset, encoding, rnn, scansion, textnorm
from .encoding import EncodingError
from .textnorm import TextNormError

ARABIC = "arabic"
ENGLISH = "english"


class IncompatibleCheckpoint(ValueError):
    pass


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# ---------------------------------------------------------------- experiment


@dataclass
class ExperimentConfig:
    """One training run: data representation plus network configuration."""

    data: str = ""
    out_dir: str = ""
    language: str = ARABIC
    scheme: str = encoding.TWO_HOT
    diacritics: str = "keep"  # keep | strip
    trim: bool = False  # drop the 5 smallest meters
    use_weights: bool = False
    cell: str = rnn.LSTM
    direction: str = rnn.BI
    layers: int = 2
    hidden_size: int = 32
    dropout: float = 0.2
    epochs: int = 30
    batch_size: int = 64
    learning_rate: float = 3e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    validation_fraction: float = 0.1
    test_fraction: float = 0.1
    stratified: bool = False
    seed: int = 0
    stop_at_val_accuracy: float | None = None

    def validate(self) -> list[str]:
        problems = []
        if not self.data:
            problems.append("an input dataset (--data) is required")
        if not self.out_dir:
            problems.append("an output directory (--out-dir) is required")
        if self.language not in (ARABIC, ENGLISH):
            problems.append(f"unknown language {self.language!r}")
        if self.scheme not in encoding.SCHEMES:
            problems.append(f"unknown scheme {self.scheme!r}")
        if self.diacritics not in ("keep", "strip"):
            problems.append("diacritics must be keep or strip")
        if self.cell not in (rnn.LSTM, rnn.GRU):
            problems.append(f"unknown cell {self.cell!r}")
        if self.direction not in (rnn.UNI, rnn.BI):
            problems.append(f"unknown direction {self.direction!r}")
        if self.layers < 1 or self.hidden_size < 1:
            problems.append("layers and hidden size must be >= 1")
        if self.language == ENGLISH:
            if self.scheme == encoding.TWO_HOT:
                problems.append("two-hot encoding is Arabic-only")
            if self.diacritics == "strip":
                problems.append("the diacritics axis is Arabic-only")
            if self.trim:
                problems.append("trimming is Arabic-only")
            if self.use_weights:
                problems.append("loss weighting is Arabic-only")
        problems += self.train_config().validate()
        return problems

    def train_config(self) -> rnn.TrainConfig:
        return rnn.TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            dropout=self.dropout,
            validation_fraction=self.validation_fraction,
            test_fraction=self.test_fraction,
            seed=self.seed,
            use_weights=self.use_weights,
            stop_at_validation_accuracy=self.stop_at_val_accuracy,
        )

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def prepare_verse_text(text: str, language: str):
    """Normalize one verse into what the encoders consume."""
    if language == ARABIC:
        verse = textnorm.canonicalize(text)
        if len(verse) == 0:
            raise EncodingError("verse is empty after cleaning")
        return verse
    normalized = encoding.normalize_english(text)
    if not normalized:
        raise EncodingError("verse is empty after cleaning")
    return normalized


def encode_records(records, language: str, scheme: str) -> list:
    """Encode a record list; errors are tagged with the verse index."""
    alpha = encoding.alphabet(language)
    out = []
    for i, record in enumerate(records):
        try:
            out.append(
                encoding.encode_verse(
                    prepare_verse_text(record.verse, language), scheme, alpha
                )
            )
        except (EncodingError, TextNormError) as exc:
            raise EncodingError(f"verse {i}: {exc}") from exc
    return out


def metrics_report(report: rnn.EvalReport, labels, config_echo: dict, wall: float) -> dict:
    per_class = [
        {
            "label": label,
            "accuracy": None if np.isnan(acc) else float(acc),
            "support": int(sup),
        }
        for label, acc, sup in zip(labels, report.per_class_accuracy, report.support)
    ]
    return {
        "overall_accuracy": report.overall_accuracy,
        "per_class": per_class,
        "confusion": report.confusion.tolist(),
        "labels": list(labels),
        "config": config_echo,
        "wall_clock_seconds": wall,
    }


def run_experiment(cfg: ExperimentConfig):
    """Load, transform, split, encode, train, and test one configuration.

    Returns (stack, curve, metrics dict, checkpoint extra dict).
    """
    started = time.perf_counter()
    corpus = dataset.load_csv(cfg.data, cfg.language)
    if cfg.language == ARABIC and cfg.diacritics == "strip":
        corpus = dataset.make_variant(corpus, "strip")
    if cfg.trim:
        corpus = dataset.trim_smallest(corpus, 5)
    if len(corpus) == 0:
        raise dataset.DatasetError("the corpus is empty")
    for i, record in enumerate(corpus.records):
        if record.meter is None:
            raise dataset.DatasetError(f"row {i} has no meter label; cannot train")

    labels = tuple(cfg_label for cfg_label in corpus.class_index)
    label_to_index = {label: i for i, label in enumerate(labels)}
    parts = dataset.split(
        corpus, cfg.validation_fraction, cfg.test_fraction, cfg.seed, cfg.stratified
    )

    def encoded(records):
        y = [label_to_index[r.meter] for r in records]
        return encode_records(records, cfg.language, cfg.scheme), y

    (x_train, y_train) = encoded(parts.train)
    (x_val, y_val) = encoded(parts.validation)
    (x_test, y_test) = encoded(parts.test)

    stack = rnn.RecurrentStack(
        cell_kind=cfg.cell,
        direction=cfg.direction,
        input_size=encoding.scheme_width(cfg.scheme, encoding.alphabet(cfg.language)),
        hidden_size=cfg.hidden_size,
        n_layers=cfg.layers,
        n_classes=len(labels),
        dropout=cfg.dropout,
        seed=cfg.seed,
    )
    stack, curve = rnn.train(stack, x_train, y_train, cfg.train_config(), x_val, y_val)

    report = rnn.evaluate(stack, x_test, y_test) if x_test else None
    wall = time.perf_counter() - started
    metrics = (
        metrics_report(report, labels, cfg.echo(), wall) if report is not None else None
    )
    extra = {
        "language": cfg.language,
        "scheme": cfg.scheme,
        "diacritics": cfg.diacritics,
        "labels": list(labels),
    }
    return stack, curve, metrics, extra


# ------------------------------------------------------------- subcommands


def cmd_clean(args) -> int:
    policy = "strict" if args.strict else "skip"
    try:
        corpus = dataset.load_csv(args.infile, ARABIC)
    except (OSError, UnicodeDecodeError, dataset.DatasetError) as exc:
        _err(str(exc))
        return 1
    cleaned = []
    failures = 0
    for i, record in enumerate(corpus.records):
        try:
            verse = textnorm.canonicalize(record.verse, policy)
        except TextNormError as exc:
            _err(f"row {i}: {exc}")
            failures += 1
            continue
        cleaned.append(
            dataset.Record(verse.text(), record.meter, record.poet, record.age)
        )
    dataset.save_csv(dataset.Corpus(ARABIC, tuple(cleaned)), args.out)
    return 1 if failures else 0


def cmd_encode(args) -> int:
    if (args.text is None) == (args.infile is None):
        _err("exactly one of --text or --in is required")
        return 2
    text = args.text
    if text is None:
        corpus = dataset.load_csv(args.infile, args.language)
        if not 0 <= args.row < len(corpus):
            _err(f"--row {args.row} out of range for {len(corpus)} rows")
            return 2
        text = corpus.records[args.row].verse
    try:
        matrix = encoding.encode_verse(
            prepare_verse_text(text, args.language),
            args.scheme,
            encoding.alphabet(args.language),
        )
    except (EncodingError, TextNormError) as exc:
        _err(str(exc))
        return 1
    encoding.save_matrix(matrix, args.out)
    print(f"wrote {matrix.width}x{matrix.length} matrix to {args.out}")
    return 0


def cmd_scan(args) -> int:
    import csv as _csv

    try:
        corpus = dataset.load_csv(args.infile, ARABIC)
    except (OSError, UnicodeDecodeError, dataset.DatasetError) as exc:
        _err(str(exc))
        return 1
    rows = []
    scanned = correct = labeled = 0
    for i, record in enumerate(corpus.records):
        try:
            verse = textnorm.canonicalize(record.verse)
            pattern = scansion.to_pattern(verse)
            name, distance = scansion.classify_rule_based(verse)
        except (TextNormError, scansion.ScansionError) as exc:
            _err(f"row {i}: {exc}")
            continue
        scanned += 1
        if record.meter:
            labeled += 1
            correct += name == record.meter
        rows.append(
            [record.verse, record.meter or "", name, distance,
             scansion.display(pattern, rtl=args.rtl)]
        )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["verse", "meter", "predicted", "distance", "pattern"])
        writer.writerows(rows)
    if labeled:
        print(f"accuracy: {correct}/{labeled} = {correct / labeled:.4f}")
    if corpus.records and not scanned:
        _err("every row failed to scan")
        return 1
    return 0


def cmd_generate(args) -> int:
    if args.meter == "all":
        names = scansion.METER_NAMES
    elif args.meter in scansion.METER_NAMES:
        names = (args.meter,)
    else:
        _err(f"unknown meter {args.meter!r}")
        return 2
    rng = __import__("random").Random(args.seed)
    records = []
    for name in names:
        for _ in range(args.count):
            verse = scansion.generate_synthetic(
                name, rng=rng, drop_diacritics=args.drop_diacritics
            )
            records.append(dataset.Record(verse.text(), name))
    dataset.save_csv(dataset.Corpus(ARABIC, tuple(records)), args.out)
    print(f"wrote {len(records)} verses to {args.out}")
    return 0


def cmd_train(args) -> int:
    overrides = _collect_overrides(args)
    file_values = _read_config_file(args.config) if args.config else {}
    try:
        cfg = _build_config(overrides, file_values)
    except ValueError as exc:
        _err(str(exc))
        return 2
    problems = cfg.validate()
    if problems:
        for p in problems:
            _err(p)
        return 2
    import os

    os.makedirs(cfg.out_dir, exist_ok=True)
    try:
        stack, curve, metrics, extra = run_experiment(cfg)
    except (OSError, UnicodeDecodeError, dataset.DatasetError,
            EncodingError, rnn.EmptySet) as exc:
        _err(str(exc))
        return 1
    ckpt = os.path.join(cfg.out_dir, "model.ckpt")
    rnn.save_checkpoint(ckpt, stack, extra)
    with open(os.path.join(cfg.out_dir, "curve.csv"), "w", encoding="utf-8") as fh:
        fh.write(curve.to_csv())
    if metrics is not None:
        with open(os.path.join(cfg.out_dir, "metrics.json"), "w", encoding="utf-8") as fh:
            json.dump(metrics, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"test accuracy: {metrics['overall_accuracy']:.4f}")
    print(f"wrote {ckpt}")
    return 0


def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    try:
        stack, extra = rnn.load_checkpoint(args.checkpoint)
    except (OSError, rnn.CheckpointError) as exc:
        _err(str(exc))
        return 1
    language, scheme = extra.get("language"), extra.get("scheme")
    labels = extra.get("labels", [])
    if not language or not scheme or not labels:
        _err("checkpoint carries no dataset metadata; cannot evaluate")
        return 1
    try:
        corpus = dataset.load_csv(args.data, language)
        if extra.get("diacritics") == "strip":
            corpus = dataset.make_variant(corpus, "strip")
        unknown = set(corpus.class_index) - set(labels)
        if unknown:
            raise IncompatibleCheckpoint(
                f"dataset labels {sorted(unknown)} unknown to this checkpoint"
            )
        label_to_index = {label: i for i, label in enumerate(labels)}
        sequences = encode_records(corpus.records, language, scheme)
        y = [label_to_index[r.meter] for r in corpus.records]
        report = rnn.evaluate(stack, sequences, y)
    except (OSError, UnicodeDecodeError, dataset.DatasetError, EncodingError,
            IncompatibleCheckpoint, rnn.EmptySet) as exc:
        _err(str(exc))
        return 1
    metrics = metrics_report(
        report, labels, {"checkpoint": args.checkpoint, "data": args.data},
        time.perf_counter() - started,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"accuracy: {metrics['overall_accuracy']:.4f}")
    return 0


def cmd_gradcheck(args) -> int:
    errors = rnn.run_gradient_check(
        args.cell, args.direction, args.layers, args.seed,
        dropout=args.dropout, corrupt=args.corrupt,
    )
    width = max(len(name) for name in errors)
    failed = False
    for name, err in errors.items():
        status = "ok" if err < rnn.TOLERANCE else "FAIL"
        failed = failed or err >= rnn.TOLERANCE
        print(f"{name:<{width}}  {err:.3e}  {status}")
    print(f"max relative error: {max(errors.values()):.3e} (tolerance {rnn.TOLERANCE})")
    return 1 if failed else 0


# ------------------------------------------------------- argument handling

_CONFIG_DEFAULTS = ExperimentConfig()


def _read_config_file(path: str) -> dict:
    """key=value file; '#' starts a comment; flags override these."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _cast_like(name: str, default, raw: str):
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if default is None or isinstance(default, float):
        return float(raw)
    return raw


def _collect_overrides(args) -> dict:
    return {
        f.name: getattr(args, f.name)
        for f in fields(ExperimentConfig)
        if getattr(args, f.name, None) is not None
    }


def _build_config(overrides: dict, file_values: dict) -> ExperimentConfig:
    values = {}
    for f in fields(ExperimentConfig):
        default = getattr(_CONFIG_DEFAULTS, f.name)
        if f.name in overrides:
            values[f.name] = overrides[f.name]
        elif f.name in file_values:
            values[f.name] = _cast_like(f.name, default, file_values[f.name])
        else:
            values[f.name] = default
    unknown = set(file_values) - {f.name for f in fields(ExperimentConfig)}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**values)


def _bool_flag(parser, name, help_text):
    parser.add_argument(name, action="store_const", const=True, default=None,
                        help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="versemeter",
        description="Classify poem verses by meter: rule-based scansion "
                    "or a from-scratch recurrent network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="normalize and factor an Arabic corpus CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true",
                   help="fail rows with unmappable codepoints instead of skipping")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("encode", help="encode one verse to a dense matrix file")
    p.add_argument("--text", help="verse text to encode")
    p.add_argument("--in", dest="infile", help="corpus CSV to take the verse from")
    p.add_argument("--row", type=int, default=0, help="row index within --in")
    p.add_argument("--language", choices=(ARABIC, ENGLISH), default=ARABIC)
    p.add_argument("--scheme", choices=encoding.SCHEMES, default=encoding.ONE_HOT)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("scan", help="rule-based nearest-meter classification")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rtl", action="store_true",
                   help="display patterns right-to-left, classical style")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("generate", help="mint labeled synthetic Arabic verses")
    p.add_argument("--meter", default="all", help="meter name or 'all'")
    p.add_argument("--count", type=int, default=100, help="verses per meter")
    p.add_argument("--drop-diacritics", type=float, default=0.0,
                   help="probability of removing each mark")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a recurrent classifier")
    p.add_argument("--config", help="key=value config file; flags win")
    p.add_argument("--data", help="corpus CSV")
    p.add_argument("--out-dir", dest="out_dir",
                   help="directory for model.ckpt, curve.csv, metrics.json")
    p.add_argument("--language", choices=(ARABIC, ENGLISH), default=None)
    p.add_argument("--scheme", choices=encoding.SCHEMES, default=None)
    p.add_argument("--diacritics", choices=("keep", "strip"), default=None)
    _bool_flag(p, "--trim", "drop the 5 smallest meters before splitting")
    _bool_flag(p, "--use-weights", "weight the loss by inverse class frequency")
    p.add_argument("--cell", choices=(rnn.LSTM, rnn.GRU), default=None)
    p.add_argument("--direction", choices=(rnn.UNI, rnn.BI), default=None)
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--hidden-size", dest="hidden_size", type=int, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--validation-fraction", dest="validation_fraction",
                   type=float, default=None)
    p.add_argument("--test-fraction", dest="test_fraction", type=float, default=None)
    _bool_flag(p, "--stratified", "stratify the split per class")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--stop-at-val-accuracy", dest="stop_at_val_accuracy",
                   type=float, default=None,
                   help="stop early once validation accuracy reaches this")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a labeled CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--cell", choices=(rnn.LSTM, rnn.GRU), default=rnn.LSTM)
    p.add_argument("--direction", choices=(rnn.UNI, rnn.BI), default=rnn.UNI)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--corrupt", help=argparse.SUPPRESS)  # test hook
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
