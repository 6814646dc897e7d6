import os

import numpy as np
import pytest

from gaborfeed.cli import main, read_detection_blocks
from gaborfeed.data import load_image, save_image
from gaborfeed.gabor import parse_kernels
from gaborfeed.nn.checkpoint import load, save


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    return rc, capsys.readouterr()


def test_kernel(tmp_path, capsys):
    rc, out = run(capsys, "kernel", "--preset", "age")
    assert rc == 0
    ks = parse_kernels(out.out)
    assert len(ks) == 8 and all(k.size == 5 for k in ks)
    rc, _ = run(capsys, "kernel", "--preset", "detect", "--out", tmp_path / "k.txt")
    assert rc == 0 and len(parse_kernels((tmp_path / "k.txt").read_text())) == 8


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["kernel", "--bogus"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2


def test_runtime_error(tmp_path, capsys):
    rc, out = run(capsys, "respond", "--in", tmp_path / "missing.pgm", "--outdir", tmp_path)
    assert rc == 1 and "missing.pgm" in out.err
    (tmp_path / "bad.pgm").write_bytes(b"P5\n2 2\n255\n")
    rc, out = run(capsys, "fuse", "--in", tmp_path / "bad.pgm", "--out", tmp_path / "f.pgm")
    assert rc == 1 and "truncated" in out.err


@pytest.fixture
def image(tmp_path, rng):
    img = rng.integers(0, 256, size=(20, 24)).astype(np.uint8)
    img[0, 0], img[0, 1] = 0, 255
    path = tmp_path / "in.pgm"
    save_image(path, img)
    return path


def test_respond(tmp_path, image, capsys):
    rc, out = run(capsys, "respond", "--in", image, "--preset", "age", "--outdir", tmp_path / "r")
    assert rc == 0
    files = sorted(os.listdir(tmp_path / "r"))
    assert len(files) == 8 and all(f.endswith(".pgm") for f in files)
    assert len(out.out.splitlines()) == 8 and " min " in out.out


def test_fuse_identity(tmp_path, image, capsys):
    for scale in ("minmax", "none"):
        rc, _ = run(capsys, "fuse", "--in", image, "--weights", "1,0,0,0,0,0,0,0,0", "--scale", scale,
                    "--out", tmp_path / "f.pgm")
        assert rc == 0
        assert (tmp_path / "f.pgm").read_bytes() == image.read_bytes()
    rc, out = run(capsys, "fuse", "--in", image, "--weights", "1,0", "--out", tmp_path / "f.pgm")
    assert rc == 1


def test_gradcheck(capsys):
    rc, out = run(capsys, "gradcheck", "--seed", "7", "--configs", "3")
    assert rc == 0
    worst = float(out.out.strip().splitlines()[-1].split()[1])
    assert worst <= 1e-3


def test_synth_and_manifest_training(tmp_path, capsys):
    rc, _ = run(capsys, "synth", "--kind", "orient", "--n", "40", "--size", "16", "--outdir", tmp_path / "d")
    assert rc == 0
    assert len(list((tmp_path / "d").glob("*.pgm"))) == 40
    ckpt = tmp_path / "g.ckpt"
    rc, out = run(capsys, "train", "--task", "age-class", "--input", "gf", "--manifest", tmp_path / "d/manifest.jsonl",
                  "--size", "16", "--folds", "4", "--epochs", "2", "--batch", "8", "--seed", "3", "--out", ckpt)
    assert rc == 0
    final = out.out.splitlines()[-2].split()[-1]
    rc, out = run(capsys, "eval", "--ckpt", ckpt, "--maps-dir", tmp_path / "maps")
    assert rc == 0
    lines = out.out.splitlines()
    assert lines[0] == f"val_accuracy {final}"
    assert sum(ln.startswith("fold ") for ln in lines) == 4
    assert len(list((tmp_path / "maps").glob("*.pgm"))) == 16  # first conv block width
    # age regression on the same files
    rc, out = run(capsys, "train", "--task", "age-reg", "--input", "image", "--manifest",
                  tmp_path / "d/manifest.jsonl", "--size", "16", "--folds", "4", "--epochs", "1", "--out", ckpt)
    assert rc == 0 and "val_mae" in out.out
    rc, out = run(capsys, "train", "--task", "gender", "--out", ckpt)
    assert rc == 1 and "--manifest" in out.err


def test_train_orient_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        rc, out = run(capsys, "train", "--task", "orient", "--input", "gf", "--n", "80", "--epochs", "2",
                      "--seed", "1", "--out", tmp_path / f"{name}.ckpt")
        assert rc == 0
        outs.append(out.out.replace(f"{name}.ckpt", ""))
    assert outs[0] == outs[1]
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()
    final = outs[0].splitlines()[-2].split()[-1]
    rc, out = run(capsys, "eval", "--ckpt", tmp_path / "a.ckpt")
    assert out.out.strip() == f"val_accuracy {final}"
    rc, out = run(capsys, "fuse", "--in", __file__, "--ckpt", tmp_path / "a.ckpt", "--out", tmp_path / "x.pgm")
    assert rc == 1  # not an image


def test_detect_and_score(tmp_path, capsys, cascade_run):
    nets_dir = tmp_path / "nets"
    nets_dir.mkdir()
    for name, net in zip(("pnet", "rnet", "onet"), cascade_run["nets"]):
        save(net, nets_dir / f"{name}.ckpt")
    rc, _ = run(capsys, "synth", "--kind", "scenes", "--n", "4", "--size", "64", "--seed", "12345",
                "--outdir", tmp_path / "s")
    assert rc == 0
    rc, out = run(capsys, "detect", "--nets", nets_dir, "--in", tmp_path / "s/scene_00000.pgm")
    assert rc == 0
    for line in out.out.splitlines():
        fields = line.split()
        assert len(fields) == 5 and all(len(f.split(".")[1]) == 6 for f in fields)
    rc, _ = run(capsys, "detect", "--nets", nets_dir, "--manifest", tmp_path / "s/manifest.jsonl",
                "--out", tmp_path / "d.txt")
    assert rc == 0
    blocks = read_detection_blocks((tmp_path / "d.txt").read_text())
    assert len(blocks) == 4
    rc, out = run(capsys, "score", "--dets", tmp_path / "d.txt", "--manifest", tmp_path / "s/manifest.jsonl")
    assert rc == 0 and out.out.splitlines()[0] == "faces 4"
    rc, out = run(capsys, "detect", "--nets", tmp_path, "--in", tmp_path / "s/scene_00000.pgm")
    assert rc == 1
