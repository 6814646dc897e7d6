"""Kernel, response and fused-image PGMs for one synthetic scene (the filter-bank figures).

    python scripts/make_figures.py --outdir figures/ [--preset age]
"""

import argparse
import os

import numpy as np

from gaborfeed import fusion
from gaborfeed.convolve import apply_bank
from gaborfeed.data import make_face_scene, minmax_scale, save_image
from gaborfeed.gabor import Preset, make_bank


def upscale(a, k):
    return np.kron(a, np.ones((k, k)))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--outdir", default="figures")
    ap.add_argument("--preset", default="age", choices=["age", "detect", "fer"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    bank = make_bank(Preset.from_name(args.preset))
    img, _ = make_face_scene(96, args.seed, face_range=(48, 64), distractors=0)
    save_image(os.path.join(args.outdir, "input.pgm"), img)
    # kernels side by side, enlarged so individual taps are visible
    tiles = [upscale(minmax_scale(k.values)[0], 8) for k in bank]
    gap = np.ones((tiles[0].shape[0], 4))
    row = [tiles[0]]
    for t in tiles[1:]:
        row += [gap, t]
    save_image(os.path.join(args.outdir, "kernels.pgm"), np.hstack(row))
    resp = apply_bank(img, bank)
    for k in range(len(bank)):
        save_image(os.path.join(args.outdir, f"response_{k}.pgm"), minmax_scale(resp[..., k])[0])
    fused = fusion.fuse(fusion.stack(img, resp), fusion.FusionWeights.initial(len(bank)))
    scaled, lo, hi = minmax_scale(fused)
    save_image(os.path.join(args.outdir, "fused.pgm"), scaled)
    print(f"wrote {len(bank) + 3} images to {args.outdir} (fused range {lo:.6f} .. {hi:.6f})")


if __name__ == "__main__":
    main()
