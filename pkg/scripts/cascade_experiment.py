"""Train the toy three-stage detector and score it on fresh synthetic scenes.

    python scripts/cascade_experiment.py --seed 0 --test 50 [--image-only] [--out nets/]
"""

import argparse
import os
import time

from gaborfeed.cascade import CascadeTrainConfig
from gaborfeed.experiments import run_cascade
from gaborfeed.nn.checkpoint import save


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--test", type=int, default=50)
    ap.add_argument("--scenes", type=int, default=200)
    ap.add_argument("--epochs", type=int, default=12)
    ap.add_argument("--image-only", action="store_true", help="train without the Gabor input")
    ap.add_argument("--out", help="directory for pnet/rnet/onet checkpoints")
    args = ap.parse_args()

    cfg = CascadeTrainConfig(n_scenes=args.scenes, epochs=(args.epochs,) * 3, seed=args.seed,
                             fused=not args.image_only)
    t0 = time.perf_counter()
    nets, report, _, score = run_cascade(args.seed, args.test, cfg=cfg)
    for name in ("pnet", "rnet", "onet"):
        h = report[name]["history"][-1]
        print(f"{name}: samples {report[name]['samples']}  val face accuracy {h.val_metric:.4f}")
    for line in score.lines():
        print(line)
    print(f"total {time.perf_counter() - t0:.1f}s")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, net in zip(("pnet", "rnet", "onet"), nets):
            save(net, os.path.join(args.out, f"{name}.ckpt"), {"task": "pnet", "stage": name, "seed": args.seed})


if __name__ == "__main__":
    main()
