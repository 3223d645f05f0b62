import subprocess
import sys

import pytest

from lyricbench.cli import build_parser, bundled_config, main
from lyricbench.harness import PipelineConfig


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--n-pairs", "300", "--seed", "2", "--out", str(d / "c.jsonl")]) == 0
    assert main(["split", "--in", str(d / "c.jsonl"), "--test", "15", "--dev", "10",
                 "--seed", "1", "--out", str(d / "sp")]) == 0
    return d


def test_ingest_and_stats(workdir, capsys):
    out = workdir / "clean.jsonl"
    assert main(["ingest", "--in", str(workdir / "c.jsonl"), "--english-only", "--strip-links",
                 "--out", str(out)]) == 0
    assert main(["stats", "--in", str(out)]) == 0
    text = capsys.readouterr().out
    assert "n_pairs\t" in text and "ci_fraction\t0.3500" in text


def test_split_outputs(workdir):
    for name in ("splits.tsv", "test.jsonl", "dev.jsonl", "train.jsonl"):
        assert (workdir / "sp" / name).exists()


def test_retrieval_and_evaluate(workdir, capsys):
    sp = workdir / "sp"
    assert main(["retrieval", "build", "--train", str(sp / "train.jsonl"), "--out", str(workdir / "idx")]) == 0
    assert main(["retrieval", "annotate", "--index", str(workdir / "idx"), "--test", str(sp / "test.jsonl"),
                 "--out", str(workdir / "r.txt")]) == 0
    capsys.readouterr()
    assert main(["evaluate", "--test", str(sp / "test.jsonl"), "--hyp", str(workdir / "r.txt"),
                 "--name", "retrieval"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("system\tbleu") and lines[1].startswith("retrieval\t")


def test_smt_commands(workdir, capsys):
    sp, model = workdir / "sp", workdir / "model"
    assert main(["smt", "train", "--train", str(sp / "train.jsonl"), "--out", str(model),
                 "--beam", "5", "--distortion", "2"]) == 0
    assert main(["smt", "tune", "--dev", str(sp / "dev.jsonl"), "--model", str(model),
                 "--iters", "2", "--nbest", "5", "--restarts", "1", "--seed", "3"]) == 0
    assert main(["smt", "annotate", "--model", str(model), "--test", str(sp / "test.jsonl"),
                 "--out", str(workdir / "s.txt"), "--beam", "5"]) == 0
    assert len((workdir / "s.txt").read_text(encoding="utf-8").splitlines()) == 15


def test_agreement_commands(tmp_path, capsys):
    ratings = tmp_path / "r.csv"
    ratings.write_text("item_id,rater_id,fluency,information\n"
                       "1,a,5,2\n1,b,4,2\n2,a,1,4\n2,b,2,5\n3,a,3,3\n3,b,3,1\n", encoding="utf-8")
    scores = tmp_path / "s.tsv"
    scores.write_text("item_id\tbleu\n1\t30\n2\t5\n3\t12\n", encoding="utf-8")
    assert main(["agreement", "--ratings", str(ratings)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("kappa_fluency\t") and "kappa_information\t" in out
    assert main(["correlate", "--ratings", str(ratings), "--scores", str(scores)]) == 0
    assert capsys.readouterr().out.startswith("bleu\tfluency\t")


def test_run_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_pairs = 300\ntest_size = 10\ndev_size = 5\nbeam = 4\n", encoding="utf-8")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-tune",
                 "--beam", "3", "--max-options", "4"]) == 0
    used = PipelineConfig.load(tmp_path / "o" / "config.txt")
    assert used.beam == 3 and used.tune is False and used.test_size == 10 and used.max_options == 4
    assert "smt\t" in capsys.readouterr().out


def test_every_config_field_has_a_flag():
    run = build_parser()._subparsers._group_actions[0].choices["run"]
    dests = {a.dest for a in run._actions}
    for name in PipelineConfig.__dataclass_fields__:
        assert name in dests


def test_bundled_config_loads():
    cfg = PipelineConfig.load(bundled_config())
    assert cfg.n_pairs == 5000 and cfg.corpus == "synthetic"


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["stats", "--in", str(tmp_path / "missing.jsonl")]) == 1
    assert "error" in capsys.readouterr().err


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "lyricbench.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "lyricbench" in proc.stdout
