"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test prints one ``CRITERION n: PASS|FAIL`` line with the measured
numbers; a summary of all lines is printed when the module finishes.
"""

import math
import time

import numpy as np
import pytest

from gaborfeed import fusion
from gaborfeed.cascade import BBox, Detection, nms
from gaborfeed.convolve import convolve2d
from gaborfeed.experiments import OrientationConfig, run_cascade, run_orientation, summarize_orientation
from gaborfeed.gabor import GaborParams, Preset, make_kernel
from gaborfeed.nn import Conv2D, Fusion1x1, bbox_l2, det_ce, softmax_ce
from gaborfeed.nn.checkpoint import to_bytes
from gaborfeed.nn.gradcheck import LOSS_KINDS, run_suite
from oracles import check_greedy_assignment, naive_correlate, reference_nms

RESULTS = {}
SEEDS = (0, 1, 2)


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print("\n" + line)
    assert ok, line


@pytest.fixture(scope="module", autouse=True)
def summary():
    yield
    print("\n==== acceptance summary ====")
    for n in sorted(RESULTS):
        print(RESULTS[n])


# ---------------------------------------------------------------- 1

def kernel_errors(p: GaborParams, size: int):
    """(phase error, rotation error, envelope excess) for one parameter set."""
    h = size // 2
    k = make_kernel(p, size).values
    phase = abs(k[h, h] - math.cos(p.phi))
    # theta + pi/2 evaluated at (x, y) equals theta evaluated at (y, -x)
    k90 = make_kernel(p.replace(theta=p.theta + math.pi / 2), size).values
    rot = max(abs(k90[y + h, x + h] - k[-x + h, y + h]) for y in range(-h, h + 1) for x in range(-h, h + 1))
    env = 0.0
    c, s = math.cos(p.theta), math.sin(p.theta)
    for y in range(-h, h + 1):
        for x in range(-h, h + 1):
            xr, yr = x * c + y * s, -x * s + y * c
            env = max(env, abs(k[y + h, x + h]) - math.exp(-(xr ** 2 + p.gamma ** 2 * yr ** 2) / (2 * p.sigma ** 2)))
    return phase, rot, env


def test_criterion_1_kernels():
    t0 = time.perf_counter()
    cases = []
    for preset in Preset:
        for theta in (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4):
            for phi in (0.0, math.pi / 2):
                cases.append((preset.base_params().replace(theta=theta, phi=phi), preset.size))
    r = np.random.default_rng(2024)
    for _ in range(100):
        p = GaborParams(lam=r.uniform(1.5, 6), theta=r.uniform(0, math.pi), phi=r.uniform(-math.pi, math.pi),
                        gamma=r.uniform(0.05, 1.0), sigma=r.uniform(0.5, 4.0))
        cases.append((p, int(r.choice([3, 5, 7]))))
    errs = np.array([kernel_errors(p, n) for p, n in cases])
    dt = time.perf_counter() - t0
    worst = errs.max(axis=0)
    ok = worst[0] <= 1e-12 and worst[1] <= 1e-12 and worst[2] <= 1e-12 and dt < 5
    report(1, ok, f"{len(cases)} kernels; max phase err {worst[0]:.2e}, rotation err {worst[1]:.2e}, "
                  f"envelope excess {worst[2]:.2e} (tol 1e-12); {dt:.2f}s (< 5s)")


# ---------------------------------------------------------------- 2

def test_criterion_2_convolution_oracle():
    t0 = time.perf_counter()
    r = np.random.default_rng(7)
    worst, trials = 0.0, 0
    for _ in range(150):
        h, w = int(r.integers(1, 9)), int(r.integers(1, 9))
        k = int(r.choice([1, 3, 5]))
        img, ker = r.normal(size=(h, w)), r.normal(size=(k, k))
        for border in ("zero", "replicate"):
            worst = max(worst, float(np.max(np.abs(convolve2d(img, ker, border) - naive_correlate(img, ker, border)))))
            trials += 1
    dt = time.perf_counter() - t0
    report(2, worst <= 1e-12 and trials >= 100 and dt < 10,
           f"{trials} trials; max abs err {worst:.2e} (tol 1e-12); {dt:.2f}s (< 10s)")


# ---------------------------------------------------------------- 3

def test_criterion_3_fusion_is_conv1x1():
    r = np.random.default_rng(3)
    conv, layer = Conv2D(1, 1), Fusion1x1()
    worst = 0.0
    for _ in range(100):
        H, W, nf = int(r.integers(1, 12)), int(r.integers(1, 12)), int(r.integers(1, 12))
        t, w = r.normal(size=(H, W, nf + 1)), r.normal(size=nf + 1) * 3
        ref = fusion.fuse(t, fusion.FusionWeights.from_array(w))
        y, _ = conv.forward({"W": w.reshape(1, 1, -1, 1), "b": np.zeros(1)}, t[None])
        z, _ = layer.forward({"w": w}, t[None])
        worst = max(worst, float(np.max(np.abs(y[0, ..., 0] - ref))), float(np.max(np.abs(z[0, ..., 0] - ref))))
    report(3, worst <= 1e-12, f"100 draws; max abs err {worst:.2e} (tol 1e-12)")


# ---------------------------------------------------------------- 4

def test_criterion_4_gradient_suite():
    t0 = time.perf_counter()
    res = run_suite(seed=0, n_configs=50)
    dt = time.perf_counter() - t0
    layers = {k.split("/")[1] for k in res if k.startswith("layer/")}
    losses = {k.split("/")[1] for k in res if k.startswith("loss/")}
    covered = layers == {"Conv2D", "ReLU", "MaxPool", "FullyConnected", "Dropout", "Fusion1x1"} \
        and losses == set(LOSS_KINDS)
    worst_key = max(res, key=res.get)
    ok = covered and res[worst_key] <= 1e-3 and dt < 60
    report(4, ok, f"50 configs x ({len(layers)} layers + {len(losses)} losses) + networks; "
                  f"max rel err {res[worst_key]:.2e} at {worst_key} (tol 1e-3); {dt:.1f}s (< 60s)")


# ---------------------------------------------------------------- 5

def test_criterion_5_loss_spot_values():
    errs = []
    for n in (2, 4, 8, 10, 101):
        errs.append(abs(softmax_ce(np.zeros((3, n)), [0, 1, 1])[0] - math.log(n)))
    ce = abs(det_ce(0.5, 1.0)[0] - math.log(2))
    hand = [bbox_l2([1, 0, 0, 0], [0, 0, 0, 0])[0] == 1.0,
            bbox_l2([3, 4, 0, 0], [0, 0, 0, 0])[0] == 25.0,
            bbox_l2([0.5, 0.5, 0.5, 0.5], [0.5, 0.5, 0.5, 0.5])[0] == 0.0,
            bbox_l2([[1, 0, 0, 0], [0, 0, 2, 0]], np.zeros((2, 4)))[0] == 2.5]
    ok = max(errs) <= 1e-10 and ce <= 1e-10 and all(hand)
    report(5, ok, f"uniform softmax |loss - ln N| max {max(errs):.2e}; |det_ce(1, 0.5) - ln 2| {ce:.2e} "
                  f"(tol 1e-10); bbox_l2 hand cases exact {sum(hand)}/{len(hand)}")


# ---------------------------------------------------------------- 6

def test_criterion_6_nms_oracle():
    r = np.random.default_rng(6)
    mismatches = 0
    for _ in range(1000):
        items = []
        for _ in range(10):
            box = (float(r.uniform(0, 30)), float(r.uniform(0, 30)), float(r.uniform(2, 15)), float(r.uniform(2, 15)))
            score = float(r.choice([0.5, 0.8])) if r.random() < 0.3 else float(r.random())  # some ties
            items.append((box, score))
        thresh = float(r.choice([0.3, 0.5, 0.7]))
        dets = [Detection(BBox(*b), s) for b, s in items]
        kept = [next(i for i, d in enumerate(dets) if d is k) for k in nms(dets, thresh)]
        ref = reference_nms(items, thresh)
        if kept != ref or not check_greedy_assignment(items, kept, thresh):
            mismatches += 1
    report(6, mismatches == 0, f"1000 instances of 10 boxes; {mismatches} mismatches vs reference")


# ---------------------------------------------------------------- 7, 8, 9

def orientation_suite():
    t0 = time.perf_counter()
    runs = [run_orientation(mode, seed) for seed in SEEDS for mode in ("image", "gf")]
    return {"runs": runs, "seconds": time.perf_counter() - t0,
            "lines": summarize_orientation(runs), "ckpts": [r.checkpoint() for r in runs]}


@pytest.fixture(scope="module")
def orientation():
    return orientation_suite()


def test_criterion_7_orientation(orientation):
    runs = {(r.mode, r.seed): r for r in orientation["runs"]}
    for line in orientation["lines"]:
        print(line)
    diffs = [runs["gf", s].final - runs["image", s].final for s in SEEDS]
    gf = [runs["gf", s].final for s in SEEDS]
    dt = orientation["seconds"]
    ok = min(diffs) >= -0.01 and sum(d > 0 for d in diffs) >= 2 and min(gf) >= 0.90 and dt < 900
    cfg = OrientationConfig()
    report(7, ok, f"n={cfg.n}, {cfg.train.epochs} epochs; GF-image (pp) "
                  + " ".join(f"{100 * d:+.2f}" for d in diffs)
                  + f"; GF final acc " + " ".join(f"{a:.4f}" for a in gf)
                  + f" (>= 0.90); {dt / 60:.1f} min (< 15)")


def test_criterion_8_cascade(cascade_run):
    s = cascade_run["score"]
    dt = cascade_run["seconds"]
    for line in s.lines():
        print(line)
    ok = s.true_positives >= 45 and s.false_positives <= 10 and s.n_truth == 50 and dt < 600
    report(8, ok, f"{s.true_positives}/{s.n_truth} faces at IoU >= 0.5, {s.false_positives} false positives, "
                  f"continuous {s.continuous:.4f}; {dt / 60:.1f} min (< 10)")


def test_criterion_9_determinism(orientation, cascade_run):
    again = orientation_suite()
    same_orient = again["ckpts"] == orientation["ckpts"] and again["lines"] == orientation["lines"]
    nets, _, _, score = run_cascade(seed=0)
    same_casc = [to_bytes(n) for n in nets] == [to_bytes(n) for n in cascade_run["nets"]] \
        and score.lines() == cascade_run["score"].lines()
    report(9, same_orient and same_casc,
           f"orientation checkpoints+metrics identical: {same_orient}; cascade checkpoints+metrics identical: {same_casc}")
