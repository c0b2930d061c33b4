import json
import subprocess
import sys

import pytest

from abxlab import cli
from abxlab.apc import load_checkpoint
from abxlab.corpus import FrameLabelTrack, load_feature_archive, write_label_track
from abxlab.errors import InconclusiveGradCheck
from abxlab.manifest import verify_digests, write_outputs


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    rc = cli.main([
        "synth", "--phones", "a,b", "--dim", "4", "--speakers", "2",
        "--segments-per-cell", "3", "--frames", "4:6", "--noise-scale", "0.05",
        "--seed", "7", "--out", str(out),
    ])
    assert rc == 0
    return out


@pytest.fixture(scope="session")
def eval_dir(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("eval")
    rc = cli.main([
        "eval", "--features", str(corpus_dir / "features"),
        "--items", str(corpus_dir / "items.item"),
        "--mode", "within", "--out", str(out),
    ])
    assert rc == 0
    return out


# ---------------------------------------------------------------------------
# eval


def test_eval_outputs(eval_dir):
    report = json.loads((eval_dir / "report.json").read_text())
    assert set(report) >= {"overall", "pairwise", "categories", "metadata"}
    assert 0.0 <= float(report["overall"]) <= 1.0
    assert "jobs" not in report["metadata"]
    lines = (eval_dir / "pairwise.csv").read_text().splitlines()
    assert lines[0] == "category_x,category_y,context_prev,context_next,condition,rate"
    assert len(lines) > 1


def test_eval_manifest_digests(eval_dir, corpus_dir):
    manifest = json.loads((eval_dir / "manifest.json").read_text())
    assert manifest["command"][0] == "abxlab"
    assert manifest["config"]["mode"] == "within"
    assert manifest["config"]["jobs"] >= 1
    assert verify_digests(manifest["inputs"]) == []
    victim = corpus_dir / "items.item"
    original = victim.read_bytes()
    try:
        victim.write_bytes(original + b"# extra\n")
        assert str(victim) in verify_digests(manifest["inputs"])
    finally:
        victim.write_bytes(original)


def test_eval_jobs_do_not_change_bytes(corpus_dir, tmp_path):
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"j{jobs}"
        rc = cli.main([
            "eval", "--features", str(corpus_dir / "features"),
            "--items", str(corpus_dir / "items.item"),
            "--mode", "across", "--jobs", jobs, "--out", str(out),
        ])
        assert rc == 0
        outs.append((out / "report.json").read_bytes())
    assert outs[0] == outs[1]


def test_eval_usage_errors(corpus_dir, tmp_path):
    args = [
        "eval", "--features", str(corpus_dir / "features"),
        "--items", str(corpus_dir / "items.item"), "--mode", "within",
    ]
    assert cli.main(args + ["--task", "af", "--out", str(tmp_path / "a")]) == 2
    assert cli.main(
        args + ["--af-table", "english-moa", "--out", str(tmp_path / "b")]
    ) == 2
    assert cli.main(
        args + ["--task", "af", "--af-table", "no-such-table",
                "--out", str(tmp_path / "c")]
    ) == 2


def test_eval_missing_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["eval", "--mode", "within", "--out", "x"])
    assert e.value.code == 2


def test_eval_bad_archive_exits_3(corpus_dir, tmp_path):
    feats = tmp_path / "features"
    feats.mkdir()
    (feats / "u.fbin").write_bytes(b"FEATgarbage")
    rc = cli.main([
        "eval", "--features", str(feats),
        "--items", str(corpus_dir / "items.item"),
        "--mode", "within", "--out", str(tmp_path / "out"),
    ])
    assert rc == 3


def test_eval_empty_task_exits_4(tmp_path):
    rc = cli.main([
        "synth", "--phones", "a,b", "--dim", "2", "--speakers", "1",
        "--segments-per-cell", "1", "--seed", "1", "--out", str(tmp_path / "c"),
    ])
    assert rc == 0
    rc = cli.main([
        "eval", "--features", str(tmp_path / "c" / "features"),
        "--items", str(tmp_path / "c" / "items.item"),
        "--mode", "within", "--out", str(tmp_path / "out"),
    ])
    assert rc == 4


def test_eval_af_task(corpus_dir, tmp_path, monkeypatch):
    table = tmp_path / "af.tsv"
    table.write_text("a\tLow\nb\tHigh\n")
    rc = cli.main([
        "eval", "--features", str(corpus_dir / "features"),
        "--items", str(corpus_dir / "items.item"),
        "--mode", "within", "--task", "af", "--af-table", str(table),
        "--out", str(tmp_path / "out"),
    ])
    assert rc == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert set(report["categories"]) == {"High", "Low"}
    assert report["metadata"]["task"] == "af"


def test_jobs_env_fallback(corpus_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("ABXLAB_JOBS", "2")
    assert cli._resolve_jobs(None) == 2
    assert cli._resolve_jobs(1) == 1  # flag wins
    monkeypatch.setenv("ABXLAB_JOBS", "zero")
    with pytest.raises(Exception):
        cli._resolve_jobs(None)
    monkeypatch.setenv("ABXLAB_JOBS", "2")
    rc = cli.main([
        "eval", "--features", str(corpus_dir / "features"),
        "--items", str(corpus_dir / "items.item"),
        "--mode", "within", "--out", str(tmp_path / "out"),
    ])
    assert rc == 0


# ---------------------------------------------------------------------------
# analyze


def test_analyze_phoneme_matches_report(eval_dir, tmp_path):
    rc = cli.main([
        "analyze", "phoneme", "--pairwise", str(eval_dir / "pairwise.csv"),
        "--out", str(tmp_path / "ph"),
    ])
    assert rc == 0
    phoneme = json.loads((tmp_path / "ph" / "phoneme.json").read_text())
    report = json.loads((eval_dir / "report.json").read_text())
    assert phoneme["xi"] == report["categories"]
    assert (tmp_path / "ph" / "bars.svg").read_text().startswith("<svg")
    csv_lines = (tmp_path / "ph" / "phoneme.csv").read_text().splitlines()
    assert csv_lines[0] == "category,rate,n_pairs,tag"


def test_analyze_phoneme_bad_csv_exits_3(tmp_path):
    bad = tmp_path / "pairwise.csv"
    bad.write_text("nope,nope\n")
    assert cli.main(
        ["analyze", "phoneme", "--pairwise", str(bad), "--out", str(tmp_path / "o")]
    ) == 3


def test_analyze_confusion_identity(tmp_path):
    tracks = [
        FrameLabelTrack("u1", [(0.0, 0.05, "a"), (0.05, 0.10, "b")]),
        FrameLabelTrack("u2", [(0.0, 0.10, "b")]),
    ]
    write_label_track(tracks, tmp_path / "truth.tsv")
    write_label_track(tracks, tmp_path / "hyp.tsv")
    rc = cli.main([
        "analyze", "confusion", "--truth", str(tmp_path / "truth.tsv"),
        "--hyp", str(tmp_path / "hyp.tsv"), "--frame-period", "10000",
        "--out", str(tmp_path / "out"),
    ])
    assert rc == 0
    doc = json.loads((tmp_path / "out" / "confusion.json").read_text())
    assert doc["p_co"]["a"]["p_co"] == "1.000000"
    assert doc["p_co"]["b"]["p_co"] == "1.000000"
    pco_lines = (tmp_path / "out" / "pco.csv").read_text().splitlines()
    assert pco_lines[0] == "phone,p_co,label"


def test_analyze_reduce_and_correlate(tmp_path):
    base = {"a": 0.4, "b": 0.2, "c": 0.0}
    improved = {"a": 0.2, "b": 0.15, "c": 0.0}
    (tmp_path / "base.json").write_text(json.dumps(base))
    (tmp_path / "imp.json").write_text(json.dumps(improved))
    rc = cli.main([
        "analyze", "reduce", "--baseline", str(tmp_path / "base.json"),
        "--improved", str(tmp_path / "imp.json"), "--out", str(tmp_path / "rd"),
    ])
    assert rc == 0
    doc = json.loads((tmp_path / "rd" / "reduction.json").read_text())
    assert doc["reduction"]["a"] == "50.000000"
    assert doc["undefined"] == ["c"]

    pco = {"a": {"p_co": 0.75}, "b": {"p_co": 0.5}, "c": {"p_co": 0.5}}
    (tmp_path / "pco.json").write_text(json.dumps({"p_co": pco}))
    rc = cli.main([
        "analyze", "correlate", "--baseline", str(tmp_path / "base.json"),
        "--improved", str(tmp_path / "imp.json"),
        "--pco", str(tmp_path / "pco.json"), "--out", str(tmp_path / "co"),
    ])
    assert rc == 0
    doc = json.loads((tmp_path / "co" / "correlate.json").read_text())
    assert doc["n"] == 2
    assert doc["method"] == "pearson"
    assert doc["skipped_undefined"] == ["c"]
    assert (tmp_path / "co" / "scatter.svg").exists()


def test_analyze_correlate_needs_two_points(tmp_path):
    (tmp_path / "base.json").write_text(json.dumps({"a": 0.4}))
    (tmp_path / "imp.json").write_text(json.dumps({"a": 0.2}))
    (tmp_path / "pco.json").write_text(json.dumps({"a": 0.9}))
    rc = cli.main([
        "analyze", "correlate", "--baseline", str(tmp_path / "base.json"),
        "--improved", str(tmp_path / "imp.json"),
        "--pco", str(tmp_path / "pco.json"), "--out", str(tmp_path / "co"),
    ])
    assert rc == 3


# ---------------------------------------------------------------------------
# synth


def test_synth_requires_seed(tmp_path):
    assert cli.main(["synth", "--out", str(tmp_path / "c")]) == 2


def test_synth_config_file_and_flag_precedence(tmp_path):
    cfg = {"phones": ["a", "b"], "dim": 3, "seed": 5, "segments_per_cell": 2}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    out = tmp_path / "c"
    rc = cli.main([
        "synth", "--config", str(tmp_path / "cfg.json"), "--dim", "6",
        "--out", str(out),
    ])
    assert rc == 0
    sidecar = json.loads((out / "synth.json").read_text())
    assert sidecar["config"]["dim"] == 6  # flag beats file
    assert sidecar["config"]["seed"] == 5  # file supplies the seed
    archive = load_feature_archive(out / "features")
    assert archive.dim == 6


def test_synth_same_seed_same_bytes(tmp_path):
    args = ["synth", "--phones", "a,b", "--dim", "3", "--seed", "9"]
    for name in ("one", "two"):
        assert cli.main(args + ["--out", str(tmp_path / name)]) == 0
    a = sorted((tmp_path / "one").rglob("*"))
    b = sorted((tmp_path / "two").rglob("*"))
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        if pa.is_file() and pa.name != "manifest.json":
            assert pa.read_bytes() == pb.read_bytes(), pa.name


# ---------------------------------------------------------------------------
# apc


def test_apc_train_extract_gradcheck(corpus_dir, tmp_path, capsys):
    train_out = tmp_path / "train"
    rc = cli.main([
        "apc", "train", "--features", str(corpus_dir / "features"),
        "--n", "1", "--layers", "1", "--hidden-dim", "5", "--cell", "simple-rnn",
        "--epochs", "3", "--seed", "0", "--out", str(train_out),
    ])
    assert rc == 0
    model = load_checkpoint(train_out / "apc.ckpt")
    assert model.config.hidden_dim == 5
    assert model.config.input_dim == 4
    curve = (train_out / "loss_curve.csv").read_text().splitlines()
    assert curve[0] == "epoch,loss"
    assert len(curve) == 1 + 3 + 1  # header + initial eval + 3 epochs
    manifest = json.loads((train_out / "manifest.json").read_text())
    assert manifest["config"]["hidden_dim"] == 5

    extract_out = tmp_path / "feats"
    rc = cli.main([
        "apc", "extract", "--model", str(train_out / "apc.ckpt"),
        "--features", str(corpus_dir / "features"), "--out", str(extract_out),
    ])
    assert rc == 0
    extracted = load_feature_archive(extract_out)
    assert extracted.dim == 5

    rc = cli.main(["apc", "gradcheck", "--seed", "0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "gradcheck ok" in out
    assert "bound 0.0001" in out


def test_apc_gradcheck_failure_paths(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_gradient_check", lambda *a, **k: (5e-4, 3))
    assert cli.main(["apc", "gradcheck"]) == 1
    assert "gradcheck FAIL" in capsys.readouterr().out

    def explode(*a, **k):
        raise InconclusiveGradCheck("kinks everywhere")

    monkeypatch.setattr(cli, "run_gradient_check", explode)
    assert cli.main(["apc", "gradcheck"]) == 5
    assert "kinks everywhere" in capsys.readouterr().err


def test_apc_train_bad_config_file(corpus_dir, tmp_path):
    (tmp_path / "cfg.json").write_text("{\"cell_kind\": \"gru\"}")
    rc = cli.main([
        "apc", "train", "--features", str(corpus_dir / "features"),
        "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "o"),
    ])
    assert rc == 2


# ---------------------------------------------------------------------------
# plumbing


def test_write_outputs_is_atomic(tmp_path):
    out = tmp_path / "out"
    with pytest.raises(TypeError):
        write_outputs(out, {"a.txt": b"ok", "b.txt": "not bytes"})
    assert not (out / "a.txt").exists()
    assert not any(p.name.startswith("a.txt.tmp") for p in out.iterdir())


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "abxlab.cli", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("abxlab ")
    proc = subprocess.run(
        ["abxlab", "eval"], capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "required" in proc.stderr
