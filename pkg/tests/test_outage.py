import numpy as np
import pytest

from sho_rake.closed_form import BranchProfile, GscSpec, gsc_cdf
from sho_rake.monte_carlo import make_streams, partial_sums, sample_slot, simulate_final_snr, top_sum
from sho_rake.outage import (
    OutageModel,
    ShoConfig,
    outage_cdf,
    outage_curve,
    prob_band_gsc,
    prob_final_below,
    prob_two_way_band,
)
from sho_rake.pdp import apply_distinctness_jitter, calibrate_gamma_bar, exponential_mip

FIG2 = ShoConfig(4, (5, 5, 5, 5), 3, 2, 1.0)


def profiles(delta, gamma_bar=1.0, L=4, n=5):
    return [apply_distinctness_jitter(exponential_mip(gamma_bar, delta, n, b)) for b in range(1, L + 1)]


def _mc_draw(cfg, profs, n, seed):
    d = sample_slot(profs, make_streams(seed, len(profs)), n)
    y, w1 = partial_sums(d.paths[0], cfg.n_c, cfg.n_s)
    wmax = w1.copy()
    for p in d.paths[1:]:
        wmax = np.maximum(wmax, top_sum(p, cfg.n_s))
    return y, w1, wmax


def _within(cf, hits, n, slack=0.0):
    p = hits / n
    se = np.sqrt(p * (1 - p) / n)
    assert abs(cf - p) <= 3 * se + slack, (cf, p, se)


def test_config_validation():
    with pytest.raises(ValueError):
        ShoConfig(1, (5,), 3, 2, 1.0)
    with pytest.raises(ValueError):
        ShoConfig(2, (5, 5), 2, 2, 1.0)
    with pytest.raises(ValueError):
        ShoConfig(2, (5, 3), 3, 2, 1.0)
    with pytest.raises(ValueError):
        ShoConfig(2, (5, 5), 3, 2, -1.0)
    with pytest.raises(ValueError):
        ShoConfig(2, (5,), 3, 2, 1.0)


def test_band_gsc():
    p = exponential_mip(1.0, 0.5, 5)
    assert prob_band_gsc(1.0, 1.0, p, FIG2) == 0.0
    assert prob_band_gsc(0.0, 2.0, p, FIG2) == pytest.approx(float(gsc_cdf(2.0, p, GscSpec(5, 3))), abs=1e-15)
    profs = profiles(0.5)
    y, w1, _ = _mc_draw(FIG2, profs, 10**6, 31)
    s = y + w1
    _within(prob_band_gsc(1.0, 3.0, profs[0], FIG2), np.count_nonzero((s >= 1.0) & (s < 3.0)), s.size)


def test_final_below():
    profs = profiles(0.5)
    assert prob_final_below(0.0, FIG2, profs) == 0.0
    y, _, wmax = _mc_draw(FIG2, profs, 10**6, 32)
    _within(prob_final_below(2.0, FIG2, profs), np.count_nonzero(y + wmax < 2.0), y.size)


def test_final_below_vanishing_competitor():
    cfg = ShoConfig(2, (5, 5), 3, 2, 1.0)
    serving = exponential_mip(1.0, 0.5, 5)
    weak = exponential_mip(1e-7, 0.5, 5, 2)
    for x in (0.5, 1.5, 3.0):
        assert prob_final_below(x, cfg, [serving, weak]) == pytest.approx(
            float(gsc_cdf(x, serving, GscSpec(5, 3))), abs=1e-6
        )


def test_two_way_band():
    profs = profiles(0.5)
    assert prob_two_way_band(1.0, 1.0, FIG2, profs) == pytest.approx(0.0, abs=1e-12)
    assert prob_two_way_band(0.0, 2.0, FIG2, profs) == 0.0
    y, w1, wmax = _mc_draw(FIG2, profs, 10**6, 33)
    hits = np.count_nonzero((y + w1 < 1.0) & (y + wmax >= 1.0) & (y + wmax < 2.5))
    _within(prob_two_way_band(1.0, 2.5, FIG2, profs), hits, y.size)


def test_outage_edges():
    profs = profiles(0.5)
    assert outage_cdf(0.0, FIG2, profs).probability == 0.0
    cfg0 = ShoConfig(4, (5, 5, 5, 5), 3, 2, 0.0)
    x = np.array([0.3, 1.0, 2.2, 4.0])
    pts = outage_curve(x, cfg0, profs)
    assert all(p.branch == "above-target" for p in pts)
    assert np.allclose([p.probability for p in pts], gsc_cdf(x, profs[0], GscSpec(5, 3)), atol=1e-12)


def test_base_iid_curve_against_monte_carlo():
    profs = profiles(0.0)
    x = 10 ** (np.linspace(-10, 10, 20) / 10)
    cf = np.array([p.probability for p in outage_curve(x, FIG2, profs)])
    s = np.sort(simulate_final_snr(FIG2, profs, 10**6, 34))
    hits = np.searchsorted(s, x)
    for c, h in zip(cf, hits):
        _within(c, h, s.size, 1e-3)


@pytest.mark.parametrize(
    "cfg,delta",
    [
        (ShoConfig(2, (4, 4), 3, 2, 1.5), 0.3),
        (ShoConfig(3, (5, 5, 6), 4, 2, 2.0), 0.7),
        (ShoConfig(3, (6, 6, 6), 4, 1, 1.0), 0.2),
    ],
)
def test_independent_configs_against_monte_carlo(cfg, delta):
    profs = [apply_distinctness_jitter(exponential_mip(0.8, delta, n, b)) for b, n in enumerate(cfg.n_paths, 1)]
    x = np.linspace(0.1, 3 * cfg.gamma_t, 12)
    cf = np.array([p.probability for p in outage_curve(x, cfg, profs)])
    s = np.sort(simulate_final_snr(cfg, profs, 4 * 10**5, 35))
    for c, h in zip(cf, np.searchsorted(s, x)):
        _within(c, h, s.size, 1e-3)


def test_monotone_and_continuous_at_target():
    profs = profiles(0.5, gamma_bar=calibrate_gamma_bar(1.0, 3.0, 0.5, 5, 3))
    model = OutageModel(FIG2, profs)
    x = np.linspace(0, 5.0, 100)
    p = np.array([pt.probability for pt in model.curve(x)])
    assert np.all(np.diff(p) >= -1e-9)
    eps = 1e-6
    lo, hi = model.curve([1.0 - eps, 1.0 + eps])
    assert abs(lo.probability - hi.probability) <= 1e-4


def test_more_target_stations_never_hurt():
    x = np.linspace(1.0, 4.0, 8)
    curves = []
    for L in (2, 3, 4):
        cfg = ShoConfig(L, (5,) * L, 3, 2, 1.0)
        curves.append(np.array([p.probability for p in outage_curve(x, cfg, profiles(0.5, 0.3, L))]))
    assert np.all(curves[1] <= curves[0] + 1e-9)
    assert np.all(curves[2] <= curves[1] + 1e-9)


def test_path_unbalance_degrades():
    gb = calibrate_gamma_bar(1.0, 3.0, 0.0, 5, 3)
    x = 10 ** (np.linspace(-10, 10, 20) / 10)
    curves = [np.array([p.probability for p in outage_curve(x, FIG2, profiles(d, gb))]) for d in (0.0, 0.5, 1.0)]
    assert np.all(curves[1] >= curves[0] - 1e-9)
    assert np.all(curves[2] >= curves[1] - 1e-9)
