"""Command-line interface, exercised in-process through main()."""

import json
import subprocess
import sys

import pytest

from seqrec.cli import main
from seqrec.embed import load_model


def write_events(path, leak_user=False):
    """A small event log: unique items everywhere, two time halves.

    Users 0-2 get two second-half sequences (parts B and D), users 3-5
    get three (B, C and D), cold9 is second-half only. leak_user adds
    a user whose first-half sequence repeats verbatim later.
    """
    lines = ["# user\titem\ttimestamp"]

    def emit(user, tag, t0, n_items=3):
        for k in range(n_items):
            lines.append("%s\t%s\t%d" % (user, "%s_i%d" % (tag, k), t0 + 10 * k))

    for u in range(6):
        user = "user%d" % u
        for s in range(2):
            emit(user, "u%da%d" % (u, s), u * 1000 + s * 120_000)
        for s in range(2 if u < 3 else 3):
            emit(user, "u%db%d" % (u, s), 550_000 + u * 1000 + s * 120_000)
    for s in range(2):
        emit("cold9", "c9b%d" % s, 560_000 + s * 120_000)
    if leak_user:
        emit("sneak", "leak", 2_000)
        emit("sneak", "leak", 700_000)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


FAST = [
    "--dim", "8", "--epochs", "2", "--window", "3", "--negatives", "3",
    "--max-n", "2", "--bucket-count", "512", "--lr", "0.05",
]


@pytest.fixture()
def workdir(tmp_path):
    write_events(tmp_path / "events.tsv")
    return tmp_path


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestPipeline:
    def test_end_to_end(self, workdir, capsys):
        events = workdir / "events.tsv"
        seqs = workdir / "sequences.tsv"
        splits = workdir / "splits"
        model = workdir / "model.bin"
        vectors = workdir / "vectors.jsonl"
        recs = workdir / "recs.jsonl"
        scores = workdir / "scores.csv"

        assert run_cli("ingest", "--input", events, "--output", seqs) == 0
        assert "skipped" in capsys.readouterr().err
        assert len(seqs.read_text().splitlines()) == 1 + 29

        assert run_cli("split", "--sequences", seqs, "--outdir", splits) == 0
        assert "split sizes: A=12 B=7 C=3 D=7" in capsys.readouterr().err
        for part in "abcd":
            assert (splits / ("part_%s.tsv" % part)).is_file()

        assert run_cli(
            "train", "--splits", splits, "--model", model,
            "--export-jsonl", vectors, "--seed", "5", *FAST,
        ) == 0
        assert "backend" in capsys.readouterr().err
        assert model.stat().st_size > 0
        assert len(vectors.read_text().splitlines()) == 12  # one per A token

        assert run_cli(
            "recommend", "--model", model, "--candidates", splits / "part_a.tsv",
            "--queries", splits / "part_d.tsv", "--output", recs, "--k", "3",
        ) == 0
        lines = [json.loads(x) for x in recs.read_text().splitlines()]
        assert len(lines) == 7
        assert [x["user"] for x in lines] == sorted(x["user"] for x in lines)
        for payload in lines:
            ranked = payload["recommendations"]
            assert 1 <= len(ranked) <= 3
            scores_out = [r["score"] for r in ranked]
            assert scores_out == sorted(scores_out, reverse=True)
            assert all(isinstance(r["items"], list) and r["items"] for r in ranked)

        assert run_cli(
            "score", "--recommendations", recs, "--references", splits / "part_d.tsv",
            "--output", scores,
        ) == 0
        rows = scores.read_text().splitlines()
        assert rows[0] == (
            "user,n_lists,rouge1_precision,rouge1_recall,rouge1_f,"
            "rougeL_precision,rougeL_recall,rougeL_f"
        )
        assert len(rows) == 1 + 7 + 1
        assert rows[-1].startswith("MACRO_AVG,7,")

    def test_score_micro(self, workdir, capsys):
        splits = workdir / "splits"
        run_cli("ingest", "--input", workdir / "events.tsv",
                "--output", workdir / "seqs.tsv")
        run_cli("split", "--sequences", workdir / "seqs.tsv", "--outdir", splits)
        run_cli("train", "--splits", splits, "--model", workdir / "m.bin",
                "--seed", "5", *FAST)
        run_cli("recommend", "--model", workdir / "m.bin",
                "--candidates", splits / "part_a.tsv",
                "--queries", splits / "part_d.tsv",
                "--output", workdir / "r.jsonl")
        capsys.readouterr()
        out = workdir / "micro.csv"
        assert run_cli("score", "--recommendations", workdir / "r.jsonl",
                       "--references", splits / "part_d.tsv",
                       "--output", out, "--micro") == 0
        assert out.read_text().splitlines()[-1].startswith("MICRO_AVG,")


class TestRun:
    def test_same_seed_same_bytes(self, workdir, capsys):
        events = workdir / "events.tsv"
        outs = []
        for name in ("r1.csv", "r2.csv"):
            out = workdir / name
            rec = workdir / (name + ".jsonl")
            assert run_cli(
                "run", "--input", events, "--output", out,
                "--recommendations-out", rec, "--seed", "11", *FAST,
            ) == 0
            outs.append((out.read_bytes(), rec.read_bytes()))
        capsys.readouterr()
        assert outs[0] == outs[1]

    def test_seed_required(self, workdir, capsys):
        rc = run_cli("run", "--input", workdir / "events.tsv",
                     "--output", workdir / "r.csv", *FAST)
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_leaked_sequence_is_an_error(self, tmp_path, capsys):
        events = write_events(tmp_path / "events.tsv", leak_user=True)
        rc = run_cli("run", "--input", events, "--output", tmp_path / "r.csv",
                     "--seed", "3", *FAST)
        assert rc == 2
        assert "held-out" in capsys.readouterr().err

    def test_missing_input_is_an_error(self, tmp_path, capsys):
        rc = run_cli("run", "--input", tmp_path / "nope.tsv",
                     "--output", tmp_path / "r.csv", "--seed", "3")
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestConfigPrecedence:
    def test_flags_beat_file_beats_defaults(self, workdir, capsys):
        splits = workdir / "splits"
        run_cli("ingest", "--input", workdir / "events.tsv",
                "--output", workdir / "seqs.tsv")
        run_cli("split", "--sequences", workdir / "seqs.tsv", "--outdir", splits)
        cfg = workdir / "run.cfg"
        cfg.write_text(
            "# comment\ndim = 4\nepochs = 1\nwith_boundaries = false\nseed = 5\n",
            encoding="utf-8",
        )
        model = workdir / "m.bin"
        assert run_cli("train", "--splits", splits, "--model", model,
                       "--config", cfg, "--dim", "6",
                       "--bucket-count", "512") == 0
        capsys.readouterr()
        got = load_model(model)
        assert got.dim == 6  # flag wins
        assert got.epochs == 1  # file beats default (5)
        assert got.with_boundaries is False
        assert got.seed == 5

    def test_boundary_flag_beats_file(self, workdir, capsys):
        splits = workdir / "splits"
        run_cli("ingest", "--input", workdir / "events.tsv",
                "--output", workdir / "seqs.tsv")
        run_cli("split", "--sequences", workdir / "seqs.tsv", "--outdir", splits)
        cfg = workdir / "run.cfg"
        cfg.write_text("with_boundaries = true\nseed = 5\ndim = 4\nepochs = 1\n")
        model = workdir / "m.bin"
        assert run_cli("train", "--splits", splits, "--model", model,
                       "--config", cfg, "--no-boundaries",
                       "--bucket-count", "512") == 0
        capsys.readouterr()
        assert load_model(model).with_boundaries is False

    def test_unknown_config_key_is_an_error(self, workdir, capsys):
        cfg = workdir / "bad.cfg"
        cfg.write_text("learning_rate = 0.1\n")
        rc = run_cli("grams", "--items", "a b", "--config", cfg)
        assert rc == 2
        assert "unknown config key" in capsys.readouterr().err


class TestSmallCommands:
    def test_grams_with_boundaries(self, capsys):
        assert run_cli("grams", "--items", "a b", "--max-n", "2") == 0
        assert capsys.readouterr().out.splitlines() == [
            "<s>", "<s> a", "a", "a b", "b", "b </s>", "</s>",
        ]

    def test_grams_bare(self, capsys):
        assert run_cli("grams", "--items", "a b",
                       "--max-n", "2", "--no-boundaries") == 0
        assert capsys.readouterr().out.splitlines() == ["a", "a b", "b"]

    def test_grams_needs_a_source(self, capsys):
        assert run_cli("grams") == 2
        assert "error:" in capsys.readouterr().err

    def test_sweep_records_bad_values(self, workdir, capsys):
        events = workdir / "events.tsv"
        out = workdir / "sweep.csv"
        assert run_cli("sweep", "--input", events, "--axis", "dim",
                       "--values", "4,x", "--output", out,
                       "--seed", "3", *FAST[2:]) == 0
        assert "1 failed" in capsys.readouterr().err
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert ",ok," in lines[1]
        assert "failed:" in lines[2]

    def test_compare(self, workdir, capsys):
        events = workdir / "events.tsv"
        r1 = workdir / "r1.csv"
        r2 = workdir / "r2.csv"
        run_cli("run", "--input", events, "--output", r1,
                "--seed", "11", "--config-type", "I", *FAST)
        run_cli("run", "--input", events, "--output", r2,
                "--seed", "11", "--config-type", "II", *FAST)
        out = workdir / "cmp.csv"
        assert run_cli("compare", "--reports", r1, r2, "--output", out) == 0
        capsys.readouterr()
        text = out.read_text()
        assert "cold_start_contrast" in text
        assert text.splitlines()[0] == "config_a,config_b,metric,a,b,delta,note"

    def test_compare_needs_two_rows(self, workdir, capsys):
        events = workdir / "events.tsv"
        r1 = workdir / "r1.csv"
        run_cli("run", "--input", events, "--output", r1, "--seed", "11", *FAST)
        rc = run_cli("compare", "--reports", r1, "--output", workdir / "c.csv")
        assert rc == 2
        assert "at least two" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "seqrec", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip()
