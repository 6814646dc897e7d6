"""Command-line interface: ``gaborfeed <command> [flags]``.

Exit status: 0 on success, 1 on a runtime failure (message on stderr),
2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import fusion
from ._io import atomic_write
from .convolve import apply_bank
from .gabor import Preset, dump_bank, make_bank
from .models import INPUT_MODES, build_network, prepare_inputs

log = logging.getLogger("gaborfeed")

TASKS = ("age-class", "age-reg", "gender", "orient", "pnet")
STAGE_FILES = ("pnet.ckpt", "rnet.ckpt", "onet.ckpt")


def _emit(path, image, scale: str = "minmax"):
    from .data.pnm import minmax_scale, save_image

    if scale == "minmax":
        scaled, lo, hi = minmax_scale(image)
    else:
        scaled, lo, hi = np.clip(image, 0.0, 1.0), 0.0, 1.0
    save_image(path, scaled)
    print(f"{path} min {lo + 0.0:.6f} max {hi + 0.0:.6f}")


def cmd_kernel(args):
    bank = make_bank(Preset.from_name(args.preset), envelope=args.envelope)
    text = dump_bank(bank)
    if args.out:
        atomic_write(args.out, text)
        print(f"wrote {len(bank)} kernels of size {bank.size} to {args.out}")
    else:
        sys.stdout.write(text)


def cmd_respond(args):
    from .data import load_image

    img = load_image(args.inp)
    bank = make_bank(Preset.from_name(args.preset))
    resp = apply_bank(img, bank, args.border)
    os.makedirs(args.outdir, exist_ok=True)
    for k, p in enumerate(bank.params):
        _emit(os.path.join(args.outdir, f"response_{k:02d}_theta{np.degrees(p.theta):03.0f}_phi{np.degrees(abs(p.phi)):02.0f}.pgm"),
              resp[..., k])


def _fusion_weights(args, nf):
    if args.ckpt:
        from .nn import Fusion1x1
        from .nn.checkpoint import load

        net, _ = load(args.ckpt)
        if not isinstance(net.layers[0], Fusion1x1):
            raise ValueError(f"{args.ckpt} has no fusion layer")
        return fusion.FusionWeights.from_array(net.params[0]["w"])
    if args.weights:
        return fusion.FusionWeights.from_array([float(v) for v in args.weights.split(",")])
    return fusion.FusionWeights.initial(nf)


def cmd_fuse(args):
    from .data import load_image

    img = load_image(args.inp)
    bank = make_bank(Preset.from_name(args.preset))
    t = fusion.stack(img, apply_bank(img, bank, args.border))
    w = _fusion_weights(args, len(bank))
    print("weights " + " ".join(f"{v:.6f}" for v in w.as_array()))
    _emit(args.out, fusion.fuse(t, w), args.scale)


# ---------------------------------------------------------------- training

def _load_manifest_task(meta):
    """Images (resized), labels, samples and fold plan for a manifest-backed task."""
    from .cascade.pyramid import resize_to
    from .data import load_image, read_manifest, split_folds

    samples = read_manifest(meta["manifest"])
    size = meta["size"]
    X = np.stack([resize_to(load_image(s.image), (size, size)) for s in samples])
    if meta["task"] == "age-reg":
        y = np.array([float(s.label) for s in samples])
    else:
        y = np.array([int(s.label) for s in samples], dtype=np.int64)
    plan = split_folds(samples, meta["folds"], meta["seed"])
    return X, y, samples, plan


def _train_manifest(args):
    from .nn import LossKind, TrainConfig, train
    from .nn.checkpoint import save

    if not args.manifest:
        raise ValueError(f"task {args.task} needs --manifest")
    meta = {"task": args.task, "input": args.input, "seed": args.seed, "manifest": os.path.abspath(args.manifest),
            "size": args.size, "folds": args.folds, "fold": args.fold, "preset": args.preset}
    X, y, samples, plan = _load_manifest_task(meta)
    bank = make_bank(Preset.from_name(args.preset))
    Xi = prepare_inputs(X, args.input, bank)
    tr, va = plan.split(samples, args.fold)
    regression = args.task == "age-reg"
    kind = (LossKind.MSE if args.loss == "mse" else LossKind.MAE) if regression else LossKind.SOFTMAX_CE
    n_out = 1 if regression else int(args.classes or (y.max() + 1))
    meta.update(metric="mae" if regression else "accuracy", n_out=n_out, loss=kind.value)
    net = build_network(args.input, (args.size, args.size), n_out, seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, batch=args.batch, lr=args.lr, seed=args.seed)
    _, hist = train(net, Xi[tr], y[tr], kind, cfg, val=(Xi[va], y[va]) if len(va) else None)
    for h in hist:
        print(f"epoch {h.epoch} lr {h.lr:.6f} train_loss {h.train_loss:.6f} val_{meta['metric']} "
              + ("-" if h.val_metric is None else f"{h.val_metric:.6f}"))
    meta["final_val"] = hist[-1].val_metric if hist else None
    save(net, args.out, meta)
    print(f"saved {args.out}")


def _train_orient(args):
    from dataclasses import replace

    from .experiments import OrientationConfig, run_orientation

    cfg = OrientationConfig()
    cfg = replace(cfg, n=args.n or cfg.n, noise=cfg.noise if args.noise is None else args.noise,
                  preset=args.preset, n_train=int(0.8 * (args.n or cfg.n)),
                  train=replace(cfg.train, epochs=args.epochs, batch=args.batch, lr=args.lr))
    res = run_orientation(args.input, args.seed, cfg)
    for h in res.history:
        print(f"epoch {h.epoch} lr {h.lr:.6f} train_loss {h.train_loss:.6f} val_accuracy {h.val_metric:.6f}")
    from .nn.checkpoint import save

    save(res.net, args.out, res.meta)
    print(f"saved {args.out}")


def _train_cascade(args):
    from .cascade import CascadeTrainConfig, train_cascade
    from .nn.checkpoint import save

    cfg = CascadeTrainConfig(seed=args.seed, fused=args.input != "image")
    if args.epochs_given:
        cfg.epochs = (args.epochs,) * 3
    nets, report = train_cascade(cfg, make_bank(Preset.DETECTION))
    os.makedirs(args.out, exist_ok=True)
    for name, net, fname in zip(("pnet", "rnet", "onet"), nets, STAGE_FILES):
        r = report[name]
        print(f"{name} samples {json.dumps(r['samples'], sort_keys=True)} "
              f"final_train_loss {r['history'][-1].train_loss:.6f} final_val_accuracy {r['history'][-1].val_metric:.6f}")
        save(net, os.path.join(args.out, fname), {"task": "pnet", "stage": name, "seed": args.seed})
    print(f"saved {args.out}")


def cmd_train(args):
    if args.input == "gt" and args.task == "pnet":
        raise ValueError("cascade stages use --input gf or image")
    if args.task == "orient":
        _train_orient(args)
    elif args.task == "pnet":
        _train_cascade(args)
    else:
        _train_manifest(args)


# ---------------------------------------------------------------- evaluation

def _dump_maps(net, x, outdir):
    """First convolution block's activations (after ReLU) for one input, one PGM per channel."""
    i = net.first_conv_index()
    if i is None:
        raise ValueError("network has no convolution layer")
    out = x[None]
    for layer, p in zip(net.layers[:i + 2], net.params[:i + 2]):
        out, _ = layer.forward(p, out)
    os.makedirs(outdir, exist_ok=True)
    for c in range(out.shape[-1]):
        _emit(os.path.join(outdir, f"map_{c:02d}.pgm"), out[0, ..., c])


def cmd_eval(args):
    from .nn import LossKind, evaluate
    from .nn.checkpoint import load

    if os.path.isdir(args.ckpt):
        return _eval_cascade(args)
    net, meta = load(args.ckpt)
    task = meta.get("task")
    if task == "orient":
        from .experiments import OrientationConfig, orientation_data
        from .nn import TrainConfig

        cfg = OrientationConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in meta["config"].items()},
                                train=TrainConfig(**meta["train"]))
        _, (Xv, yv) = orientation_data(cfg, meta["input"])
        acc = evaluate(net, Xv, yv, LossKind.SOFTMAX_CE)
        print(f"val_accuracy {acc:.6f}")
        x0 = Xv[0]
    elif task in ("age-class", "age-reg", "gender"):
        X, y, samples, plan = _load_manifest_task(meta)
        Xi = prepare_inputs(X, meta["input"], make_bank(Preset.from_name(meta["preset"])))
        kind = LossKind(meta["loss"])
        name = meta["metric"]
        _, va = plan.split(samples, meta["fold"])
        print(f"val_{name} {evaluate(net, Xi[va], y[va], kind):.6f}" if len(va) else f"val_{name} -")
        for f in range(plan.k):
            _, idx = plan.split(samples, f)
            role = "val" if f == meta["fold"] else "train"
            v = evaluate(net, Xi[idx], y[idx], kind) if len(idx) else float("nan")
            print(f"fold {f} ({role}) n {len(idx)} {name} {v:.6f}")
        x0 = Xi[va[0] if len(va) else 0]
    else:
        raise ValueError(f"checkpoint task {task!r} cannot be evaluated")
    if args.maps_dir:
        _dump_maps(net, x0, args.maps_dir)


def _load_nets(path):
    from .nn.checkpoint import load

    return [load(os.path.join(path, f))[0] for f in STAGE_FILES]


def _eval_cascade(args):
    from .cascade import detect, score
    from .cascade.training import make_scenes

    nets = _load_nets(args.ckpt)
    bank = make_bank(Preset.DETECTION)
    scenes = make_scenes(args.scenes, args.seed + 12345)
    dets = [detect(img, nets, bank) for img, _ in scenes]
    for line in score(dets, [[gt] for _, gt in scenes]).lines():
        print(line)


def _cascade_cfg(args):
    from .cascade import CascadeConfig

    cfg = CascadeConfig()
    if args.thresholds:
        cfg.thresholds = tuple(float(v) for v in args.thresholds.split(","))
    return cfg


def cmd_detect(args):
    from .cascade import detect, format_detections
    from .data import load_image, read_manifest

    nets = _load_nets(args.nets)
    bank = make_bank(Preset.DETECTION)
    cfg = _cascade_cfg(args)
    if args.inp:
        text = format_detections(detect(load_image(args.inp), nets, bank, cfg))
    elif args.manifest:
        blocks = []
        for s in read_manifest(args.manifest):
            dets = detect(load_image(s.image), nets, bank, cfg)
            blocks.append(f"{s.image}\n{len(dets)}\n" + format_detections(dets))
        text = "".join(blocks)
    else:
        raise ValueError("detect needs --in or --manifest")
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def read_detection_blocks(text: str) -> dict:
    """``path``, ``count``, then ``count`` lines of ``x y w h score``, repeated."""
    from .cascade import parse_detections

    lines = [ln for ln in text.splitlines() if ln.strip()]
    out, i = {}, 0
    while i < len(lines):
        path, n = lines[i], int(lines[i + 1])
        out[path] = parse_detections("\n".join(lines[i + 2:i + 2 + n]))
        i += 2 + n
    return out


def cmd_score(args):
    from .cascade import BBox, score
    from .data import read_manifest

    with open(args.dets, encoding="utf-8") as f:
        blocks = read_detection_blocks(f.read())
    samples = read_manifest(args.manifest)
    dets = [blocks.get(s.image, []) for s in samples]
    truths = [[BBox(*b) for b in s.label] for s in samples]
    for line in score(dets, truths, args.iou).lines():
        print(line)


def cmd_gradcheck(args):
    from .nn.gradcheck import run_suite

    res = run_suite(seed=args.seed, n_configs=args.configs)
    for k in sorted(res):
        print(f"{k} {res[k]:.6e}")
    worst = max(res.values())
    print(f"max_rel_error {worst:.6e}")
    if worst > args.tol:
        print(f"gradient check failed: {worst:.6e} > {args.tol:.1e}", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args):
    from .data import make_face_scene, make_synthetic_orientation_set, save_image, write_manifest

    os.makedirs(args.outdir, exist_ok=True)
    records = []
    if args.kind == "orient":
        X, y = make_synthetic_orientation_set(args.n, args.size, args.noise, args.seed)
        for i, (img, lab) in enumerate(zip(X, y)):
            name = f"orient_{i:05d}.pgm"
            save_image(os.path.join(args.outdir, name), np.clip(img, 0, 1))
            records.append((name, f"s{i:05d}", int(lab)))
    else:
        rng = np.random.default_rng(args.seed)
        for i in range(args.n):
            img, box = make_face_scene(args.size, rng)
            name = f"scene_{i:05d}.pgm"
            save_image(os.path.join(args.outdir, name), img)
            records.append((name, f"s{i:05d}", [list(box)]))
    write_manifest(os.path.join(args.outdir, "manifest.jsonl"), records)
    print(f"wrote {len(records)} images and manifest.jsonl to {args.outdir}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaborfeed", description="Gabor filter-bank features for small CNNs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    presets = ("age", "detect", "fer")

    s = sub.add_parser("kernel", help="dump a filter bank as text")
    s.add_argument("--preset", choices=presets, default="age")
    s.add_argument("--envelope", choices=("standard", "gamma-linear", "printed"), default="standard")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_kernel)

    s = sub.add_parser("respond", help="write each bank response as an 8-bit PGM")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--preset", choices=presets, default="age")
    s.add_argument("--border", choices=("replicate", "zero"), default="replicate")
    s.add_argument("--outdir", required=True)
    s.set_defaults(fn=cmd_respond)

    s = sub.add_parser("fuse", help="write the weighted fusion of an image and its responses")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--preset", choices=presets, default="age")
    s.add_argument("--border", choices=("replicate", "zero"), default="replicate")
    s.add_argument("--weights", help="comma-separated w_i,w_1..w_Nf")
    s.add_argument("--ckpt", help="take learned weights from a gf checkpoint")
    s.add_argument("--scale", choices=("minmax", "none"), default="minmax")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_fuse)

    s = sub.add_parser("train", help="train a model and write a checkpoint")
    s.add_argument("--task", choices=TASKS, required=True)
    s.add_argument("--input", choices=INPUT_MODES, default="gf")
    s.add_argument("--manifest")
    s.add_argument("--preset", choices=presets, default="age")
    s.add_argument("--size", type=int, default=64)
    s.add_argument("--classes", type=int)
    s.add_argument("--loss", choices=("mae", "mse"), default="mae")
    s.add_argument("--folds", type=int, default=5)
    s.add_argument("--fold", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--epochs", type=int, default=30)
    s.add_argument("--batch", type=int, default=32)
    s.add_argument("--lr", type=float, default=0.01)
    s.add_argument("--n", type=int, help="orient: dataset size")
    s.add_argument("--noise", type=float, help="orient: noise std")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_train)

    s = sub.add_parser("eval", help="re-evaluate a checkpoint (or a cascade directory)")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--maps-dir", help="write first-block feature maps of one validation input")
    s.add_argument("--scenes", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("detect", help="run the cascade; prints 'x y w h score' lines")
    s.add_argument("--nets", required=True, help="directory with pnet/rnet/onet checkpoints")
    s.add_argument("--in", dest="inp")
    s.add_argument("--manifest")
    s.add_argument("--thresholds", help="t1,t2,t3")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_detect)

    s = sub.add_parser("score", help="discrete and continuous detection scores")
    s.add_argument("--dets", required=True)
    s.add_argument("--manifest", required=True)
    s.add_argument("--iou", type=float, default=0.5)
    s.set_defaults(fn=cmd_score)

    s = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--configs", type=int, default=50)
    s.add_argument("--tol", type=float, default=1e-3)
    s.set_defaults(fn=cmd_gradcheck)

    s = sub.add_parser("synth", help="write a synthetic dataset with a manifest")
    s.add_argument("--kind", choices=("orient", "scenes"), default="orient")
    s.add_argument("--n", type=int, default=400)
    s.add_argument("--size", type=int, default=24)
    s.add_argument("--noise", type=float, default=0.25)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--outdir", required=True)
    s.set_defaults(fn=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.epochs_given = "--epochs" in argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        rc = args.fn(args)
    except (OSError, ValueError, KeyError, RuntimeError) as e:
        print(f"gaborfeed {args.command}: {e}", file=sys.stderr)
        return 1
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
