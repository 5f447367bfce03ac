"""Outage CDF of the final combined SNR under full-scan finger replacement.

Below the target the final SNR is ``Y + max(W_1..W_L)``.  Above it the CDF
collects three pieces: the mass already below the target, the band of the
unmodified GSC output, and the band reached only through replacement.  The
two replacement terms are 2-D integrals of the serving-BS joint density of
``(Y, W_1)`` against products of the target-BS block CDFs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .closed_form import BranchProfile, joint_density, gsc_distribution
from .quadrature import QuadratureSettings, Region, quadrature_2d


@dataclass(frozen=True)
class ShoConfig:
    L: int
    n_paths: tuple[int, ...]
    n_c: int
    n_s: int
    gamma_t: float

    def __post_init__(self):
        object.__setattr__(self, "n_paths", tuple(int(n) for n in self.n_paths))
        if self.L < 2:
            raise ValueError(f"need at least two base stations, got L={self.L}")
        if len(self.n_paths) != self.L:
            raise ValueError(f"n_paths lists {len(self.n_paths)} base stations, L={self.L}")
        if not 1 <= self.n_s < self.n_c < min(self.n_paths):
            raise ValueError(
                f"need 1 <= N_s < N_c < min N_n, got N_s={self.n_s}, N_c={self.n_c}, N_n={self.n_paths}"
            )
        if not (np.isfinite(self.gamma_t) and self.gamma_t >= 0):
            raise ValueError(f"gamma_T must be finite and >= 0, got {self.gamma_t}")


@dataclass(frozen=True)
class OutagePoint:
    x: float
    probability: float
    branch: str  # "below-target" | "above-target"
    error: float = 0.0


class OutageModel:
    """Cached closed-form pieces for one configuration."""

    def __init__(self, cfg: ShoConfig, profiles: Sequence[BranchProfile],
                 settings: QuadratureSettings = QuadratureSettings()):
        if len(profiles) != cfg.L:
            raise ValueError(f"need {cfg.L} profiles, got {len(profiles)}")
        for n, (prof, count) in enumerate(zip(profiles, cfg.n_paths), start=1):
            if prof.n_paths != count:
                raise ValueError(f"BS {n}: profile has {prof.n_paths} paths, config says {count}")
        self.cfg = cfg
        self.profiles = tuple(profiles)
        self.settings = settings
        self.joint = joint_density(self.profiles[0], cfg.n_c, cfg.n_s)
        self.gsc = gsc_distribution(self.profiles[0], cfg.n_c)
        self.blocks = [gsc_distribution(p, cfg.n_s) for p in self.profiles[1:]]
        self.kinks = self.joint.kink_slopes()

    def target_cdf_product(self, t):
        """``prod_{n>=2} F_{W_n}(t)``, zero for ``t <= 0``."""
        t = np.asarray(t, dtype=float)
        tp = np.maximum(t, 0.0)
        out = np.ones_like(tp)
        for blk in self.blocks:
            out = out * blk.cdf(tp)
        return np.where(t > 0, out, 0.0)

    def prob_band_gsc(self, gamma_t, x):
        gamma_t, x = float(gamma_t), np.asarray(x, dtype=float)
        if np.any(x < gamma_t) or gamma_t < 0:
            raise ValueError("need x >= gamma_T >= 0")
        return np.clip(self.gsc.cdf(x) - self.gsc.cdf(gamma_t), 0.0, 1.0)

    def prob_final_below(self, x):
        """``Pr[Y + max(W_1..W_L) < x]`` for a scalar ``x``; returns (value, error)."""
        x = float(x)
        if x < 0:
            raise ValueError("x must be >= 0")
        if x == 0:
            return 0.0, 0.0

        def integrand(y, w):
            return self.joint.pdf(y, w) * self.target_cdf_product(x - y)

        val, err = quadrature_2d(integrand, Region(x, x, -1.0), self.settings, self.kinks)
        return float(np.clip(val, 0.0, 1.0)), float(err)

    def prob_two_way_band(self, gamma_t, x):
        """``Pr[Y + W_1 < gamma_T, gamma_T <= Y + max(..) < x]`` for all ``x`` at once."""
        gamma_t = float(gamma_t)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < gamma_t) or gamma_t < 0:
            raise ValueError("need x >= gamma_T >= 0")
        if gamma_t == 0:
            return np.zeros_like(x), np.zeros_like(x)

        def integrand(y, w):
            f = self.joint.pdf(y, w)
            upper = self.target_cdf_product(x[None, :] - y[:, None])
            lower = self.target_cdf_product(gamma_t - y)
            return f[:, None] * (upper - lower[:, None])

        val, err = quadrature_2d(integrand, Region(gamma_t, gamma_t, -1.0), self.settings, self.kinks)
        return np.clip(np.atleast_1d(val), 0.0, 1.0), np.atleast_1d(err)

    def curve(self, x_grid, map_fn=map) -> list[OutagePoint]:
        """Outage CDF on a grid.

        Points below the target each need their own quadrature; everything at
        or above it shares one vector-valued quadrature.  ``map_fn`` lets a
        caller farm these jobs out (e.g. ``executor.map``); results are
        assembled in grid order.
        """
        x = np.asarray(x_grid, dtype=float)
        if np.any(x < 0):
            raise ValueError("thresholds must be >= 0")
        gt = self.cfg.gamma_t
        below = np.flatnonzero(x < gt)
        above = np.flatnonzero(x >= gt)
        jobs = [("below", float(x[i])) for i in below]
        if above.size:
            jobs.append(("above", x[above]))
        results = list(map_fn(self._job, jobs))
        out: list[OutagePoint | None] = [None] * x.size
        for i, (p, e) in zip(below, results):
            out[i] = OutagePoint(float(x[i]), p, "below-target", e)
        if above.size:
            base, base_err, band, two_way, tw_err = results[-1]
            for j, i in enumerate(above):
                p = float(np.clip(base + band[j] + two_way[j], 0.0, 1.0))
                out[i] = OutagePoint(float(x[i]), p, "above-target", base_err + float(tw_err[j]))
        return out

    def _job(self, job):
        kind, arg = job
        if kind == "below":
            return self.prob_final_below(arg)
        gt = self.cfg.gamma_t
        base, base_err = self.prob_final_below(gt)
        band = self.prob_band_gsc(gt, arg)
        two_way, tw_err = self.prob_two_way_band(gt, arg)
        return base, base_err, band, two_way, tw_err

def prob_band_gsc(gamma_t, x, profile: BranchProfile, cfg: ShoConfig):
    return gsc_distribution(profile, cfg.n_c).cdf(x) - gsc_distribution(profile, cfg.n_c).cdf(gamma_t)


def prob_final_below(x, cfg: ShoConfig, profiles, settings=QuadratureSettings()):
    return OutageModel(cfg, profiles, settings).prob_final_below(x)[0]


def prob_two_way_band(gamma_t, x, cfg: ShoConfig, profiles, settings=QuadratureSettings()):
    val, _ = OutageModel(cfg, profiles, settings).prob_two_way_band(gamma_t, x)
    return float(val[0]) if np.ndim(x) == 0 else val


def outage_cdf(x, cfg: ShoConfig, profiles, settings=QuadratureSettings()) -> OutagePoint:
    return OutageModel(cfg, profiles, settings).curve([x])[0]


def outage_curve(x_grid, cfg: ShoConfig, profiles, settings=QuadratureSettings()) -> list[OutagePoint]:
    return OutageModel(cfg, profiles, settings).curve(x_grid)
