"""Closed-form order-statistic building blocks against Monte Carlo.

For a few profiles prints the worst normalised deviation |cf - mc| / (3 SE)
of the GSC CDF, the best-N_s block CDF and 2-D histogram bins of the joint
density of (Y, W_1).  Values <= 1 mean agreement; being a maximum over
correlated points it exceeds 1 now and then for some seeds.

    python3 scripts/check_statistics.py --samples 2000000
"""

import argparse

import numpy as np

from sho_rake.closed_form import GscSpec, JointDensity, best_ns_sum_cdf, gsc_cdf
from sho_rake.monte_carlo import simulate_statistic
from sho_rake.pdp import apply_distinctness_jitter, exponential_mip

CONFIGS = [(4, 3, 2, 0.5), (5, 3, 1, 1.0), (6, 4, 2, 0.3), (5, 4, 2, 0.0)]


def cdf_dev(samples, x, cf):
    s = np.sort(samples)
    hits = np.searchsorted(s, x)
    keep = (hits >= 100) & (s.size - hits >= 100)
    emp = hits[keep] / s.size
    se = np.sqrt(emp * (1 - emp) / s.size)
    return float(np.max(np.abs(cf[keep] - emp) / (3 * se)))


def joint_dev(yw, jd, bins=8):
    xe = np.linspace(0, np.quantile(yw[:, 0], 0.99), bins + 1)
    ye = np.linspace(0, np.quantile(yw[:, 1], 0.99), bins + 1)
    counts, _, _ = np.histogram2d(yw[:, 0], yw[:, 1], bins=[xe, ye])
    worst = 0.0
    for i in range(bins):
        for j in range(bins):
            if counts[i, j] < 100:
                continue
            p = counts[i, j] / yw.shape[0]
            se = np.sqrt(p * (1 - p) / yw.shape[0])
            worst = max(worst, abs(jd.box_probability(xe[i], xe[i + 1], ye[j], ye[j + 1], n=24) - p) / (3 * se))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    print(f"{'N':>2} {'N_c':>3} {'N_s':>3} {'delta':>5}  {'gsc':>6} {'wn':>6} {'joint':>6}")
    for n, nc, ns, delta in CONFIGS:
        p = apply_distinctness_jitter(exponential_mip(1.0, delta, n))
        x = np.linspace(0.05, 4.0, 25) * sum(p.gammas[:nc]) / nc
        g = simulate_statistic(p, args.samples, args.seed, "gsc", nc, ns)
        w = simulate_statistic(p, args.samples, args.seed + 1, "wn", nc, ns)
        yw = simulate_statistic(p, args.samples, args.seed + 2, "joint", nc, ns)
        dg = cdf_dev(g, x, gsc_cdf(x, p, GscSpec(n, nc)))
        dw = cdf_dev(w, x, best_ns_sum_cdf(x, p, GscSpec(n, ns)))
        dj = joint_dev(yw, JointDensity(p, nc, ns))
        print(f"{n:>2} {nc:>3} {ns:>3} {delta:>5}  {dg:6.3f} {dw:6.3f} {dj:6.3f}")


if __name__ == "__main__":
    main()
