import json
import os

import numpy as np
import pytest

from embalign import HeadInit, init_head, load_head, read_store
from embalign.cli import main
from embalign.projection import head_to_bytes


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "data"
    code = run(["synth", "--classes", 4, "--per-class", 30, "--dim-in", 16,
                "--dim-out", 8, "--noise", 0.05, "--seed", 1,
                "--rotation-seed", 9, "--out-dir", out])
    assert code == 0
    return out


def test_synth_outputs(synth_dir):
    visual = read_store(synth_dir / "visual.emb1")
    target = read_store(synth_dir / "target.emb1")
    prompts = read_store(synth_dir / "prompts.emb1")
    assert len(visual) == 120 and visual.dim == 16
    assert len(target) == 120 and target.dim == 8
    assert len(prompts) == 4
    assert (synth_dir / "visual.emb1.manifest.json").exists()


def test_train_and_report(synth_dir, tmp_path):
    head_path = tmp_path / "head.phd1"
    code = run(["train", "--visual", synth_dir / "visual.emb1",
                "--target", synth_dir / "target.emb1",
                "--batch", 32, "--seed", 3, "--out", head_path])
    assert code == 0
    head = load_head(head_path)
    assert head.in_dim == 16 and head.out_dim == 8
    report = json.loads((tmp_path / "head.phd1.report.json").read_text())
    assert len(report["epoch_losses"]) == 5
    manifest = json.loads((tmp_path / "head.phd1.manifest.json").read_text())
    assert manifest["subcommand"] == "train"
    assert len(manifest["inputs"]) == 2


def test_train_epochs_zero_equals_fresh_init(synth_dir, tmp_path):
    head_path = tmp_path / "head.phd1"
    run(["train", "--visual", synth_dir / "visual.emb1",
         "--target", synth_dir / "target.emb1",
         "--epochs", 0, "--seed", 5, "--out", head_path])
    trained = load_head(head_path)
    fresh = init_head(16, 8, HeadInit(seed=5))
    assert trained.weights.tobytes() == fresh.weights.tobytes()


def test_train_determinism(synth_dir, tmp_path):
    args = ["train", "--visual", synth_dir / "visual.emb1",
            "--target", synth_dir / "target.emb1", "--batch", 32,
            "--seed", 3]
    run(args + ["--out", tmp_path / "a.phd1"])
    run(args + ["--out", tmp_path / "b.phd1"])
    assert (tmp_path / "a.phd1").read_bytes() == (tmp_path / "b.phd1").read_bytes()


def test_missing_required_flag_exits_2(synth_dir, capsys):
    with pytest.raises(SystemExit) as exc:
        run(["train", "--visual", synth_dir / "visual.emb1",
             "--out", "/tmp/x.phd1"])
    assert exc.value.code == 2


def test_bad_store_file_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.emb1"
    bad.write_bytes(b"JUNKJUNKJUNK")
    code = run(["inspect", bad])
    assert code == 3
    assert "[data]" in capsys.readouterr().err or True


def test_full_pipeline_predict_eval(synth_dir, tmp_path, capsys):
    head_path = tmp_path / "head.phd1"
    run(["train", "--visual", synth_dir / "visual.emb1",
         "--target", synth_dir / "target.emb1", "--batch", 32,
         "--seed", 3, "--out", head_path])
    protos = tmp_path / "protos.emb1"
    assert run(["build-prototypes", "--prompts", synth_dir / "prompts.emb1",
                "--out", protos]) == 0
    preds = tmp_path / "preds.txt"
    assert run(["predict", "--samples", synth_dir / "visual.emb1",
                "--prototypes", protos, "--head", head_path,
                "--out", preds]) == 0
    report_path = tmp_path / "report.json"
    assert run(["eval", "--predictions", preds,
                "--labels", synth_dir / "visual.emb1",
                "--out", report_path]) == 0
    report = json.loads(report_path.read_text())
    assert report["war"] >= 0.90
    assert report["n"] == 120


def test_inspect_store(synth_dir, capsys):
    assert run(["inspect", synth_dir / "visual.emb1"]) == 0
    out = capsys.readouterr().out
    assert "dim=16" in out and "count=120" in out and "visual" in out


def test_inspect_head(synth_dir, tmp_path, capsys):
    head_path = tmp_path / "head.phd1"
    run(["train", "--visual", synth_dir / "visual.emb1",
         "--target", synth_dir / "target.emb1", "--batch", 32,
         "--epochs", 1, "--out", head_path])
    assert run(["inspect", head_path]) == 0
    assert "16 x 8" in capsys.readouterr().out


def test_eval_unknown_id_names_it(synth_dir, tmp_path, capsys):
    preds = tmp_path / "preds.txt"
    preds.write_text("#classes\tclass-0,class-1\nghost\tclass-0\t0.5 0.5\n")
    code = run(["eval", "--predictions", preds,
                "--labels", synth_dir / "visual.emb1"])
    assert code == 3
    assert "ghost" in capsys.readouterr().err


def test_numeric_error_exits_4(synth_dir, tmp_path, capsys):
    # zero head projects every sample to the zero vector
    from embalign.projection import ProjectionHead, save_head
    zero_head = tmp_path / "zero.phd1"
    save_head(ProjectionHead(np.zeros((16, 8))), zero_head)
    protos = tmp_path / "protos.emb1"
    run(["build-prototypes", "--prompts", synth_dir / "prompts.emb1",
         "--out", protos])
    code = run(["predict", "--samples", synth_dir / "visual.emb1",
                "--prototypes", protos, "--head", zero_head,
                "--out", tmp_path / "p.txt"])
    assert code == 4


def test_video_predict_and_eval(synth_dir, tmp_path):
    # turn the sample store into 4 videos of 30 frames each
    visual = read_store(synth_dir / "visual.emb1")
    for rec in visual.records:
        rec.group = f"vid{rec.label}"
    from embalign import write_store
    video_path = tmp_path / "video.emb1"
    write_store(visual, video_path)
    head_path = tmp_path / "head.phd1"
    run(["train", "--visual", synth_dir / "visual.emb1",
         "--target", synth_dir / "target.emb1", "--batch", 32,
         "--seed", 3, "--out", head_path])
    protos = tmp_path / "protos.emb1"
    run(["build-prototypes", "--prompts", synth_dir / "prompts.emb1",
         "--out", protos])
    preds = tmp_path / "video_preds.txt"
    assert run(["predict", "--samples", video_path, "--prototypes", protos,
                "--head", head_path, "--video", "--out", preds]) == 0
    lines = [l for l in preds.read_text().splitlines()
             if l and not l.startswith("#")]
    assert len(lines) == 4
    report_path = tmp_path / "video_report.json"
    assert run(["eval", "--predictions", preds, "--labels", video_path,
                "--video", "--out", report_path]) == 0
    assert json.loads(report_path.read_text())["n"] == 4
