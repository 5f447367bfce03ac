"""Direct simulation of the finger-replacement system.

Path SNRs are drawn by inverse transform from per-base-station PCG64
substreams spawned off one ``SeedSequence``, so a (seed, config) pair fixes
every sample regardless of how the draws are chunked.  All grid points of a
curve share one sample set (common random numbers).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .closed_form import BranchProfile

_CHUNK = 200_000


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int | None = None

    @classmethod
    def from_count(cls, hits: int, n: int, seed=None) -> "McEstimate":
        p = hits / n
        return cls(p, float(np.sqrt(p * (1.0 - p) / n)), n, seed)


@dataclass
class SlotDraw:
    """Unordered path SNRs of one batch of slots; ``paths[n]`` has shape (slots, N_n)."""

    paths: tuple[np.ndarray, ...]

    @property
    def n_slots(self) -> int:
        return self.paths[0].shape[0]


@dataclass
class ProbabilityCurve:
    x: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray | None = None
    provenance: str = "closed-form"
    n_samples: int | None = None
    seed: int | None = None

    def estimates(self) -> list[McEstimate]:
        se = self.std_errors if self.std_errors is not None else np.zeros_like(self.values)
        return [McEstimate(float(v), float(s), self.n_samples or 0, self.seed) for v, s in zip(self.values, se)]


@dataclass
class DensityHistogram:
    x_edges: np.ndarray
    y_edges: np.ndarray
    density: np.ndarray
    std_error: np.ndarray
    counts: np.ndarray
    observed: np.ndarray  # False marks empty bins (density and SE reported as 0)


def make_streams(seed: int, n_bs: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_bs)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def sample_slot(profiles: Sequence[BranchProfile], streams: Sequence[np.random.Generator], n_slots: int = 1) -> SlotDraw:
    """Independent exponential path SNRs with the profile means, one row per slot."""
    if len(streams) != len(profiles):
        raise ValueError("need one random stream per base station")
    paths = []
    for prof, gen in zip(profiles, streams):
        u = gen.random((n_slots, prof.n_paths))
        paths.append(-np.asarray(prof.gammas) * np.log1p(-u))
    return SlotDraw(tuple(paths))


def partial_sums(paths: np.ndarray, n_c: int, n_s: int):
    """``(Y, W_1)`` of a serving-BS draw: top ``n_c - n_s`` and the next ``n_s``."""
    srt = -np.sort(-paths, axis=1)
    m = n_c - n_s
    return srt[:, :m].sum(axis=1), srt[:, m:n_c].sum(axis=1)


def top_sum(paths: np.ndarray, k: int):
    srt = -np.sort(-paths, axis=1)
    return srt[:, :k].sum(axis=1)


def combine_final_snr(draw: SlotDraw, cfg) -> np.ndarray:
    """Final combined SNR per slot under full-scan finger replacement."""
    y, w1 = partial_sums(draw.paths[0], cfg.n_c, cfg.n_s)
    gsc = y + w1
    best = w1
    for paths in draw.paths[1:]:
        best = np.maximum(best, top_sum(paths, cfg.n_s))
    return np.where(gsc >= cfg.gamma_t, gsc, y + best)


def simulate_final_snr(cfg, profiles, n_samples: int, seed: int) -> np.ndarray:
    streams = make_streams(seed, len(profiles))
    out = np.empty(n_samples)
    for s in range(0, n_samples, _CHUNK):
        k = min(_CHUNK, n_samples - s)
        out[s : s + k] = combine_final_snr(sample_slot(profiles, streams, k), cfg)
    return out


def _count_below(samples: np.ndarray, x_grid) -> np.ndarray:
    return np.searchsorted(np.sort(samples), np.asarray(x_grid, dtype=float), side="left")


def estimate_outage_curve(x_grid, cfg, profiles, n_samples: int, seed: int) -> list[McEstimate]:
    """``Pr[gamma_F < x]`` at every grid point from one shared sample set."""
    if n_samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    samples = simulate_final_snr(cfg, profiles, n_samples, seed)
    hits = _count_below(samples, x_grid)
    return [McEstimate.from_count(int(h), n_samples, seed) for h in hits]


def simulate_statistic(profile: BranchProfile, n_samples: int, seed: int, statistic: str, n_c: int, n_s: int = 1):
    """Samples of a single-BS statistic: ``gsc`` (top n_c), ``wn`` (top n_s) or ``joint`` (Y, W_1)."""
    gen = make_streams(seed, 1)
    chunks = []
    for s in range(0, n_samples, _CHUNK):
        k = min(_CHUNK, n_samples - s)
        paths = sample_slot([profile], gen, k).paths[0]
        if statistic == "gsc":
            chunks.append(top_sum(paths, n_c))
        elif statistic == "wn":
            chunks.append(top_sum(paths, n_s))
        elif statistic == "joint":
            chunks.append(np.stack(partial_sums(paths, n_c, n_s), axis=1))
        else:
            raise ValueError(f"unknown statistic {statistic!r}")
    return np.concatenate(chunks)


def empirical_cdf(samples, x_grid, seed=None) -> ProbabilityCurve:
    samples = np.asarray(samples, dtype=float)
    x = np.asarray(x_grid, dtype=float)
    n = samples.size
    p = _count_below(samples, x) / n
    return ProbabilityCurve(x, p, np.sqrt(p * (1 - p) / n), "monte-carlo", n, seed)


def empirical_density_2d(y, w, bins) -> DensityHistogram:
    """Histogram density of (Y, W_1) with per-bin binomial standard errors."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    counts, xe, ye = np.histogram2d(y, w, bins=bins)
    n = y.size
    area = np.outer(np.diff(xe), np.diff(ye))
    p = counts / n
    density = p / area
    se = np.sqrt(p * (1 - p) / n) / area
    observed = counts > 0
    return DensityHistogram(xe, ye, density, se, counts.astype(np.int64), observed)
