import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaborfeed import fusion
from gaborfeed.convolve import apply_bank
from gaborfeed.gabor import Preset, make_bank
from gaborfeed.nn import Conv2D
from gaborfeed.nn.gradcheck import numerical_grad, rel_error
from oracles import loop_fuse


def test_stack_shapes(rng):
    img = rng.random((32, 32))
    t = fusion.stack(img, apply_bank(img, make_bank(Preset.AGE_GENDER)))
    assert t.shape == (32, 32, 9)
    np.testing.assert_array_equal(t[..., 0], img)
    one = fusion.stack(img)
    assert one.shape == (32, 32, 1)
    np.testing.assert_array_equal(one[..., 0], img)


def test_stack_mismatch(rng):
    with pytest.raises(ValueError):
        fusion.stack(rng.random((4, 4)), rng.random((4, 5, 8)))


def test_identity_and_zero(rng):
    t = rng.normal(size=(6, 6, 9))
    np.testing.assert_array_equal(fusion.fuse(t, [1] + [0] * 8), t[..., 0])
    np.testing.assert_array_equal(fusion.fuse(t, np.zeros(9)), np.zeros((6, 6)))


def test_loop_oracle(rng):
    for _ in range(20):
        t, w = rng.normal(size=(6, 6, 9)), rng.normal(size=9)
        assert np.max(np.abs(fusion.fuse(t, w) - loop_fuse(t, w))) <= 1e-12


def test_weights_validation():
    with pytest.raises(ValueError):
        fusion.FusionWeights(np.nan, np.zeros(8))
    with pytest.raises(ValueError):
        fusion.fuse(np.zeros((2, 2, 9)), np.zeros(8))
    w = fusion.FusionWeights.initial(8)
    assert w.w_i == 1.0 and np.all(w.w_k == 0.125) and w.nf == 8


def test_backward_zero(rng):
    t = rng.normal(size=(4, 4, 9))
    gw, gt = fusion.fuse_backward(t, rng.normal(size=9), np.zeros((4, 4)))
    assert not np.any(gw.as_array()) and not np.any(gt)


def test_backward_single_pixel():
    t = np.array([[[0.7, 0.2, -0.1]]])
    gw, gt = fusion.fuse_backward(t, [2.0, 3.0, 4.0], np.array([[1.5]]))
    assert gw.w_i == 1.5 * 0.7
    np.testing.assert_array_equal(gt[0, 0], [3.0, 4.5, 6.0])


def fd_check(seed):
    r = np.random.default_rng(seed)
    t, w, g = r.normal(size=(3, 4, 9)), r.normal(size=9), r.normal(size=(3, 4))
    gw, gt = fusion.fuse_backward(t, w, g)
    nw = numerical_grad(lambda: np.sum(g * fusion.fuse(t, w)), w, 1e-5)
    nt = numerical_grad(lambda: np.sum(g * fusion.fuse(t, w)), t, 1e-5)
    return max(rel_error(gw.as_array(), nw), rel_error(gt, nt))


def test_backward_finite_differences():
    assert max(fd_check(s) for s in range(100)) <= 1e-4


def test_matches_conv1x1(rng):
    conv = Conv2D(1, 1)
    for _ in range(20):
        t, w = rng.normal(size=(5, 6, 9)), rng.normal(size=9)
        y, _ = conv.forward({"W": w.reshape(1, 1, 9, 1), "b": np.zeros(1)}, t[None])
        assert np.max(np.abs(y[0, ..., 0] - fusion.fuse(t, w))) <= 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.floats(-10, 10), st.floats(-10, 10))
def test_linear_in_weights(seed, a, b):
    r = np.random.default_rng(seed)
    t, w1, w2 = r.normal(size=(4, 4, 9)), r.normal(size=9), r.normal(size=9)
    lhs = fusion.fuse(t, a * w1 + b * w2)
    rhs = a * fusion.fuse(t, w1) + b * fusion.fuse(t, w2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_backward_property(seed):
    assert fd_check(seed) <= 1e-4
