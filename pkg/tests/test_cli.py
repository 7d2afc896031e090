import csv
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from versemeter import encoding, scansion
from versemeter import textnorm as tn
from versemeter.cli import main

SCHEMA = json.loads(
    (Path(__file__).parent.parent / "src" / "versemeter" / "schemas"
     / "metrics.schema.json").read_text()
)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestGenerate:
    def test_all_meters_counting(self, tmp_path):
        out = tmp_path / "synth.csv"
        assert main(["generate", "--meter", "all", "--count", "5",
                     "--seed", "1", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 1 + 16 * 5
        assert {r[1] for r in rows[1:]} == set(scansion.METER_NAMES)

    def test_same_seed_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            main(["generate", "--meter", "al-Raml", "--count", "20",
                  "--seed", "9", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_full_noise_strips_all_marks(self, tmp_path):
        out = tmp_path / "noisy.csv"
        main(["generate", "--meter", "all", "--count", "2",
              "--drop-diacritics", "1.0", "--seed", "2", "--out", str(out)])
        for row in read_rows(out)[1:]:
            assert all(c.mark is None for c in tn.parse(row[0]).chars)

    def test_unknown_meter(self, tmp_path):
        assert main(["generate", "--meter", "al-Nope",
                     "--out", str(tmp_path / "x.csv")]) == 2


class TestScan:
    def test_clean_synthetic_is_perfect(self, tmp_path, capsys):
        synth = tmp_path / "synth.csv"
        main(["generate", "--meter", "all", "--count", "3",
              "--seed", "4", "--out", str(synth)])
        out = tmp_path / "scan.csv"
        assert main(["scan", "--in", str(synth), "--out", str(out)]) == 0
        assert "accuracy: 48/48 = 1.0000" in capsys.readouterr().out
        rows = read_rows(out)
        assert rows[0] == ["verse", "meter", "predicted", "distance", "pattern"]
        assert all(r[1] == r[2] and r[3] == "0" for r in rows[1:])

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("verse,meter,poet,age\n", encoding="utf-8")
        out = tmp_path / "scan.csv"
        assert main(["scan", "--in", str(empty), "--out", str(out)]) == 0
        assert read_rows(out) == [["verse", "meter", "predicted", "distance", "pattern"]]

    def test_undiacritized_row_skipped_with_diagnostic(self, tmp_path, capsys):
        mixed = tmp_path / "mixed.csv"
        verse = scansion.generate_synthetic("al-Raml", seed=1).text()
        mixed.write_text(
            f"verse,meter,poet,age\nبدر,al-Kamel,,\n{verse},al-Raml,,\n",
            encoding="utf-8",
        )
        out = tmp_path / "scan.csv"
        assert main(["scan", "--in", str(mixed), "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert "row 0" in captured.err
        assert len(read_rows(out)) == 2  # header + the one scannable row

    def test_all_rows_failing_is_an_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("verse,meter,poet,age\nبدر,al-Kamel,,\n", encoding="utf-8")
        assert main(["scan", "--in", str(bad), "--out", str(tmp_path / "o.csv")]) == 1

    def test_rtl_display(self, tmp_path):
        synth = tmp_path / "s.csv"
        main(["generate", "--meter", "al-Hazg", "--count", "1",
              "--seed", "3", "--out", str(synth)])
        out_ltr, out_rtl = tmp_path / "l.csv", tmp_path / "r.csv"
        main(["scan", "--in", str(synth), "--out", str(out_ltr)])
        main(["scan", "--in", str(synth), "--out", str(out_rtl), "--rtl"])
        assert read_rows(out_ltr)[1][4] == read_rows(out_rtl)[1][4][::-1]


class TestClean:
    def test_factors_composites(self, tmp_path):
        raw = tmp_path / "raw.csv"
        raw.write_text(
            "verse,meter,poet,age\n"
            "رَجُلٌ,al-Kamel,,\n"
            "دَّ,al-Raml,,\n",
            encoding="utf-8",
        )
        out = tmp_path / "clean.csv"
        assert main(["clean", "--in", str(raw), "--out", str(out)]) == 0
        rows = read_rows(out)
        assert rows[1][0] == "رَجُلُنْ"
        assert rows[2][0] == "دْدَ"

    def test_idempotent_bytes(self, tmp_path):
        synth = tmp_path / "synth.csv"
        main(["generate", "--meter", "all", "--count", "2",
              "--seed", "5", "--out", str(synth)])
        c1, c2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
        main(["clean", "--in", str(synth), "--out", str(c1)])
        main(["clean", "--in", str(c1), "--out", str(c2)])
        assert c1.read_bytes() == c2.read_bytes()

    def test_non_utf8_input(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_bytes(b"verse,meter\n\xff\xfe\x00x,al-Kamel\n")
        assert main(["clean", "--in", str(bad), "--out", str(tmp_path / "o.csv")]) == 1

    def test_strict_flags_bad_rows(self, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        raw.write_text("verse,meter,poet,age\nد!ر,al-Kamel,,\n", encoding="utf-8")
        out = tmp_path / "clean.csv"
        assert main(["clean", "--in", str(raw), "--out", str(out), "--strict"]) == 1
        assert "row 0" in capsys.readouterr().err
        assert len(read_rows(out)) == 1


class TestEncode:
    def test_text_round_trip(self, tmp_path):
        out = tmp_path / "m.vmx"
        rc = main(["encode", "--text", "مَرْحَبَا",
                   "--scheme", "two-hot", "--out", str(out)])
        assert rc == 0
        matrix = encoding.load_matrix(out)
        assert matrix.scheme == "two-hot"
        assert matrix.values.shape == (41, 5)

    def test_from_csv_row(self, tmp_path):
        synth = tmp_path / "s.csv"
        main(["generate", "--meter", "al-Kamel", "--count", "3",
              "--seed", "6", "--out", str(synth)])
        out = tmp_path / "row.vmx"
        assert main(["encode", "--in", str(synth), "--row", "2",
                     "--scheme", "binary", "--out", str(out)]) == 0
        assert encoding.load_matrix(out).values.shape[0] == 8

    def test_requires_exactly_one_source(self, tmp_path):
        assert main(["encode", "--out", str(tmp_path / "x.vmx")]) == 2
        assert main(["encode", "--text", "دَ", "--in", "x.csv",
                     "--out", str(tmp_path / "x.vmx")]) == 2

    def test_english(self, tmp_path):
        out = tmp_path / "e.vmx"
        assert main(["encode", "--text", "of Man's first disobedience",
                     "--language", "english", "--scheme", "binary",
                     "--out", str(out)]) == 0
        assert encoding.load_matrix(out).values.shape[0] == 5


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    """A small but real training run shared by the train/evaluate tests."""
    root = tmp_path_factory.mktemp("trainrun")
    data = root / "corpus.csv"
    main(["generate", "--meter", "all", "--count", "12",
          "--seed", "13", "--out", str(data)])
    out_dir = root / "run"
    rc = main([
        "train", "--data", str(data), "--out-dir", str(out_dir),
        "--scheme", "two-hot", "--cell", "lstm", "--direction", "uni",
        "--layers", "1", "--hidden-size", "12", "--dropout", "0.0",
        "--epochs", "2", "--batch-size", "32", "--learning-rate", "0.005",
        "--seed", "21",
    ])
    return rc, data, out_dir


class TestTrain:
    def test_writes_all_artifacts(self, trained_run):
        rc, _, out_dir = trained_run
        assert rc == 0
        assert (out_dir / "model.ckpt").exists()
        assert (out_dir / "curve.csv").exists()
        assert (out_dir / "metrics.json").exists()

    def test_metrics_schema_and_confusion_sums(self, trained_run):
        _, _, out_dir = trained_run
        metrics = json.loads((out_dir / "metrics.json").read_text())
        jsonschema.validate(metrics, SCHEMA)
        confusion = np.array(metrics["confusion"])
        supports = [c["support"] for c in metrics["per_class"]]
        assert confusion.sum(axis=1).tolist() == supports
        assert confusion.sum() == sum(supports)

    def test_curve_layout(self, trained_run):
        _, _, out_dir = trained_run
        lines = (out_dir / "curve.csv").read_text().splitlines()
        assert lines[0] == "epoch,train_loss,val_accuracy"
        assert len(lines) == 3

    def test_epochs_zero_keeps_initialization(self, tmp_path):
        data = tmp_path / "d.csv"
        main(["generate", "--meter", "all", "--count", "3",
              "--seed", "1", "--out", str(data)])
        out_dir = tmp_path / "run0"
        assert main(["train", "--data", str(data), "--out-dir", str(out_dir),
                     "--epochs", "0", "--hidden-size", "8", "--layers", "1",
                     "--direction", "uni", "--dropout", "0.0",
                     "--seed", "2"]) == 0
        assert (out_dir / "curve.csv").read_text() == "epoch,train_loss,val_accuracy\n"
        assert (out_dir / "model.ckpt").exists()

    def test_invalid_combination_lists_every_problem(self, tmp_path, capsys):
        rc = main([
            "train", "--data", "x.csv", "--out-dir", str(tmp_path / "r"),
            "--language", "english", "--scheme", "two-hot",
            "--trim", "--use-weights", "--epochs", "1",
        ])
        assert rc == 2
        err = capsys.readouterr().err
        assert "two-hot encoding is Arabic-only" in err
        assert "trimming is Arabic-only" in err
        assert "loss weighting is Arabic-only" in err

    def test_config_file_with_flag_override(self, tmp_path):
        data = tmp_path / "d.csv"
        main(["generate", "--meter", "all", "--count", "3",
              "--seed", "3", "--out", str(data)])
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "scheme = one-hot\nepochs = 1\nhidden-size = 6\nlayers = 1\n"
            "direction = uni\ndropout = 0.0\nseed = 4\n"
            "# a comment\ntrim = false\n",
            encoding="utf-8",
        )
        out_dir = tmp_path / "run"
        rc = main(["train", "--config", str(cfg), "--data", str(data),
                   "--out-dir", str(out_dir), "--scheme", "binary"])
        assert rc == 0
        metrics = json.loads((out_dir / "metrics.json").read_text())
        assert metrics["config"]["scheme"] == "binary"  # the flag won
        assert metrics["config"]["epochs"] == 1

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("epocs = 3\n", encoding="utf-8")
        rc = main(["train", "--config", str(cfg), "--data", "x.csv",
                   "--out-dir", str(tmp_path / "r")])
        assert rc == 2
        assert "epocs" in capsys.readouterr().err


class TestEvaluate:
    def test_deterministic_and_schema_valid(self, trained_run, tmp_path):
        _, data, out_dir = trained_run
        ckpt = str(out_dir / "model.ckpt")
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["evaluate", "--checkpoint", ckpt, "--data", str(data),
                     "--out", str(a)]) == 0
        assert main(["evaluate", "--checkpoint", ckpt, "--data", str(data),
                     "--out", str(b)]) == 0
        ja, jb = json.loads(a.read_text()), json.loads(b.read_text())
        jsonschema.validate(ja, SCHEMA)
        del ja["wall_clock_seconds"], jb["wall_clock_seconds"]
        assert ja == jb

    def test_incompatible_labels(self, tmp_path, capsys):
        # train on a 4-meter corpus, then evaluate on all 16 meters
        data4 = tmp_path / "four.csv"
        rows = ["verse,meter,poet,age"]
        for name in ("al-Kamel", "al-Raml", "al-Hazg", "al-Rigz"):
            for s in range(6):
                rows.append(f"{scansion.generate_synthetic(name, seed=s).text()},{name},,")
        data4.write_text("\n".join(rows) + "\n", encoding="utf-8")
        out_dir = tmp_path / "run4"
        assert main(["train", "--data", str(data4), "--out-dir", str(out_dir),
                     "--epochs", "1", "--hidden-size", "6", "--layers", "1",
                     "--direction", "uni", "--dropout", "0.0", "--seed", "1"]) == 0
        full = tmp_path / "full.csv"
        main(["generate", "--meter", "all", "--count", "2",
              "--seed", "2", "--out", str(full)])
        rc = main(["evaluate", "--checkpoint", str(out_dir / "model.ckpt"),
                   "--data", str(full), "--out", str(tmp_path / "m.json")])
        assert rc == 1
        assert "unknown to this checkpoint" in capsys.readouterr().err

    def test_missing_checkpoint(self, tmp_path):
        assert main(["evaluate", "--checkpoint", str(tmp_path / "no.ckpt"),
                     "--data", "x.csv", "--out", str(tmp_path / "m.json")]) == 1


class TestGradcheck:
    def test_passes(self, capsys):
        assert main(["gradcheck", "--cell", "lstm", "--direction", "uni",
                     "--layers", "1", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "max relative error" in out

    def test_bi_gru_two_layers(self):
        assert main(["gradcheck", "--cell", "gru", "--direction", "bi",
                     "--layers", "2", "--seed", "4"]) == 0

    def test_corrupted_gradient_fails(self, capsys):
        assert main(["gradcheck", "--cell", "lstm", "--direction", "uni",
                     "--layers", "1", "--seed", "5", "--corrupt", "head.W"]) == 1
        assert "FAIL" in capsys.readouterr().out
