import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaborfeed.gabor import (GaborParams, Preset, dump_bank, make_bank, make_kernel, parse_kernels,
                             BANK_THETAS)


def direct(p, size, x, y):
    xr = x * math.cos(p.theta) + y * math.sin(p.theta)
    yr = -x * math.sin(p.theta) + y * math.cos(p.theta)
    return math.exp(-(xr ** 2 + p.gamma ** 2 * yr ** 2) / (2 * p.sigma ** 2)) * math.cos(2 * math.pi * xr / p.lam + p.phi)


params = st.builds(GaborParams,
                   lam=st.floats(0.5, 10), theta=st.floats(0, math.pi, exclude_max=True),
                   phi=st.sampled_from([0.0, math.pi / 2]), gamma=st.floats(0.01, 2), sigma=st.floats(0.3, 5))


def test_center_values():
    p = GaborParams(lam=2.5, theta=0.0, phi=0.0, gamma=0.3, sigma=2.0)
    assert make_kernel(p, 5).values[2, 2] == 1.0
    q = p.replace(phi=math.pi / 2)
    assert abs(make_kernel(q, 5).values[2, 2]) < 1e-15


def test_matches_direct_evaluation():
    p = GaborParams(lam=2.5, theta=0.7, phi=0.3, gamma=0.3, sigma=2.0)
    k = make_kernel(p, 5).values
    for r in range(5):
        for c in range(5):
            assert abs(k[r, c] - direct(p, 5, c - 2, r - 2)) < 1e-15


def test_rotation_by_quarter_turn():
    p = GaborParams(lam=2.5, theta=0.0, phi=0.0, gamma=0.3, sigma=2.0)
    k0 = make_kernel(p, 5).values
    k90 = make_kernel(p.replace(theta=math.pi / 2), 5).values
    # theta=pi/2 puts x' along +y, so the kernel at (x, y) equals k0 at (y, -x)
    for r in range(5):
        for c in range(5):
            x, y = c - 2, r - 2
            assert abs(k90[r, c] - k0[-x + 2, y + 2]) < 1e-12


@pytest.mark.parametrize("preset,sig,lam,gam,size", [
    (Preset.AGE_GENDER, 2.0, 2.5, 0.3, 5),
    (Preset.DETECTION, 0.75, 2.0, 0.05, 3),
    (Preset.FER, 1.4, 2.5, 0.1, 5),
])
def test_presets(preset, sig, lam, gam, size):
    bank = make_bank(preset)
    assert len(bank) == 8 and bank.size == size
    for p in bank.params:
        assert (p.sigma, p.lam, p.gamma) == (sig, lam, gam)
    thetas = [p.theta for p in bank.params]
    assert thetas == [t for t in BANK_THETAS for _ in range(2)]
    assert [p.phi for p in bank.params[:2]] == [0.0, math.pi / 2]


def test_single_combination_bank():
    bank = make_bank(Preset.AGE_GENDER.base_params(), thetas=[0.0], phis=[0.0], size=5)
    assert len(bank) == 1


@pytest.mark.parametrize("size", [4, 0, -3, 1])
def test_bad_size(size):
    with pytest.raises(ValueError):
        make_kernel(Preset.AGE_GENDER.base_params(), size)


@pytest.mark.parametrize("field,value", [("lam", 0.0), ("sigma", -1.0), ("gamma", float("nan")), ("lam", float("inf"))])
def test_bad_params(field, value):
    kw = dict(lam=2.5, theta=0.0, phi=0.0, gamma=0.3, sigma=2.0)
    kw[field] = value
    with pytest.raises(ValueError):
        GaborParams(**kw)


def test_theta_folding_keeps_kernel():
    p = GaborParams(lam=2.5, theta=math.pi + 0.4, phi=0.3, gamma=0.3, sigma=2.0)
    assert 0 <= p.theta < math.pi
    k = make_kernel(p, 5).values
    for r in range(5):
        for c in range(5):
            raw = type("P", (), dict(lam=2.5, theta=math.pi + 0.4, phi=0.3, gamma=0.3, sigma=2.0))
            assert abs(k[r, c] - direct(raw, 5, c - 2, r - 2)) < 1e-12
    assert p.phi == -0.3


def test_dump_round_trip():
    bank = make_bank(Preset.AGE_GENDER)
    text = dump_bank(bank)
    assert text.splitlines()[0].split()[0] == "5"
    back = parse_kernels(text)
    assert len(back) == 8
    for a, b in zip(bank, back):
        np.testing.assert_array_equal(a.values, b.values)
        assert a.params == b.params


def test_envelope_variants_differ():
    p = Preset.AGE_GENDER.base_params().replace(theta=math.pi / 4)
    a = make_kernel(p, 5).values
    b = make_kernel(p, 5, envelope="gamma-linear").values
    assert not np.allclose(a, b)
    with pytest.raises(ValueError):
        make_kernel(p, 5, envelope="nope")


@given(params)
def test_properties(p):
    k = make_kernel(p, 5).values
    assert abs(k[2, 2] - math.cos(p.phi)) < 1e-12
    assert np.all(np.abs(k) <= 1.0 + 1e-15)
    # envelope bound at every offset
    for r in range(5):
        for c in range(5):
            x, y = c - 2, r - 2
            xr = x * math.cos(p.theta) + y * math.sin(p.theta)
            yr = -x * math.sin(p.theta) + y * math.cos(p.theta)
            assert abs(k[r, c]) <= math.exp(-(xr ** 2 + p.gamma ** 2 * yr ** 2) / (2 * p.sigma ** 2)) + 1e-12
    assert np.array_equal(k, make_kernel(p, 5).values)


@given(st.floats(0.5, 10), st.floats(0.01, 2), st.floats(0.3, 5))
def test_symmetry_theta0_phi0(lam, gamma, sigma):
    k = make_kernel(GaborParams(lam, 0.0, 0.0, gamma, sigma), 5).values
    np.testing.assert_array_equal(k, k[::-1, :])
