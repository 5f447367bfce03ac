import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from sho_rake.closed_form import BranchProfile, GscSpec, gsc_cdf, gsc_distribution
from sho_rake.pdp import (
    PdpSpec,
    apply_distinctness_jitter,
    build_profile,
    calibrate_gamma_bar,
    exponential_mip,
    uniform,
)


def test_exponential_mip_examples():
    assert exponential_mip(1.0, 0.0, 4).gammas == (1.0,) * 4
    assert np.allclose(exponential_mip(1.0, math.log(2), 3).gammas, (1.0, 0.5, 0.25), rtol=1e-15)
    g = np.array(exponential_mip(2.0, 0.5, 5).gammas)
    assert np.allclose(g[1:] / g[:-1], np.exp(-0.5), rtol=1e-15, atol=0)


@given(st.floats(0.01, 100), st.floats(0, 5), st.integers(1, 10))
def test_exponential_mip_nonincreasing(gb, delta, n):
    g = exponential_mip(gb, delta, n).gammas
    assert all(a >= b for a, b in zip(g, g[1:]))


def test_jitter_rule():
    out = apply_distinctness_jitter(BranchProfile((1.0, 1.0, 1.0)))
    assert out.gammas == (1.0, 1.0 + 1e-9, 1.0 + 2e-9)
    p = BranchProfile((2.0, 1.0, 0.5))
    assert apply_distinctness_jitter(p) is p
    mixed = apply_distinctness_jitter(BranchProfile((0.5, 2.0, 0.5, 1.0)), 1e-8)
    assert mixed.gammas == (0.5, 2.0, 0.5 * (1 + 1e-8), 1.0)
    with pytest.raises(ValueError):
        apply_distinctness_jitter(p, 1e-3)


@given(st.lists(st.sampled_from([0.5, 1.0, 2.0]), min_size=1, max_size=8), st.sampled_from([1e-12, 1e-9, 1e-6]))
def test_jitter_separates_and_stays_close(values, eps):
    out = np.array(apply_distinctness_jitter(BranchProfile(tuple(values)), eps).gammas)
    v = np.array(values)
    assert np.all(np.abs(out / v - 1) <= len(v) * eps)
    srt = np.sort(out)
    rel = np.diff(srt) / srt[1:]
    assert np.all(rel >= 0.5 * eps)


def test_jittered_base_probabilities_shift_little():
    # exact i.i.d. oracle vs jittered closed form, base-scenario block sizes
    p = apply_distinctness_jitter(uniform(1.0, 5))
    for k in (2, 3):
        for x in np.linspace(0.2, 8, 9):
            assert abs(gsc_cdf(x, p, GscSpec(5, k)) - oracles.top_k_sum_cdf_iid(5, k, x)) <= 1e-5


def test_jittered_gsc_cdf_vs_monte_carlo_equal_means():
    p = apply_distinctness_jitter(uniform(1.0, 5))
    s = oracles.sample_sorted((1.0,) * 5, 10**6, 5)[:, :3].sum(axis=1)
    for x in (1.5, 3.0):
        emp = np.mean(s < x)
        se = math.sqrt(emp * (1 - emp) / s.size)
        assert abs(gsc_cdf(x, p, GscSpec(5, 3)) - emp) <= 3 * se


def test_calibration_sets_margin():
    gb = calibrate_gamma_bar(2.0, 3.0, 0.5, 5, 3)
    mean = gsc_distribution(exponential_mip(gb, 0.5, 5), 3).mean()
    assert 10 * np.log10(2.0 / mean) == pytest.approx(3.0, abs=1e-9)


def test_pdp_spec_validation_and_build():
    with pytest.raises(ValueError):
        PdpSpec("weird")
    with pytest.raises(ValueError):
        PdpSpec(delta=-1)
    with pytest.raises(ValueError):
        PdpSpec("explicit")
    with pytest.raises(ValueError):
        build_profile(PdpSpec("explicit", values=(1.0, 2.0)), 3)
    assert build_profile(PdpSpec("explicit", values=(1.0, 2.0, 3.0)), 3).gammas == (1.0, 2.0, 3.0)
    assert build_profile(PdpSpec("uniform", gamma_bar=2.0, delta=9.0), 2).gammas == (2.0, 2.0)
