"""Image-only vs tensor (GT) vs fused (GF) input on the synthetic orientation set.

    python scripts/orientation_experiment.py --seeds 0 1 2 --modes image gf
"""

import argparse
import json
import time

from gaborfeed.experiments import OrientationConfig, mean_final, run_orientation, summarize_orientation


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--modes", nargs="+", default=["image", "gt", "gf"], choices=["image", "gt", "gf"])
    ap.add_argument("--noise", type=float, default=None)
    ap.add_argument("--epochs", type=int, default=None)
    ap.add_argument("--json", help="write per-epoch histories here")
    args = ap.parse_args()

    cfg = OrientationConfig()
    if args.noise is not None:
        cfg.noise = args.noise
    if args.epochs is not None:
        cfg.train.epochs = args.epochs
    results = []
    for seed in args.seeds:
        for mode in args.modes:
            t0 = time.perf_counter()
            r = run_orientation(mode, seed, cfg)
            results.append(r)
            print(f"{mode:5s} seed {seed}  val_acc {r.final:.6f}  ({time.perf_counter() - t0:.1f}s)", flush=True)
    print()
    for line in summarize_orientation(results):
        print(line)
    for mode in args.modes:
        print(f"mean {mode:5s} {mean_final(results, mode):.6f}")
    for r in results:
        if r.mode == "gf":
            print(f"gf seed {r.seed} fusion weights " + " ".join(f"{w:.4f}" for w in r.net.params[0]["w"]))
    if args.json:
        with open(args.json, "w") as f:
            json.dump([{"mode": r.mode, "seed": r.seed, "history": [h.__dict__ for h in r.history]} for r in results],
                      f, indent=1)


if __name__ == "__main__":
    main()
