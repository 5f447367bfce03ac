"""Power-delay (multipath intensity) profiles and the distinctness jitter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .closed_form import BranchProfile, gsc_distribution

KINDS = ("exponential", "uniform", "explicit")
DEFAULT_JITTER = 1e-9


@dataclass(frozen=True)
class PdpSpec:
    kind: str = "exponential"
    gamma_bar: float = 1.0
    delta: float = 0.0
    values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.gamma_bar) and self.gamma_bar > 0):
            raise ValueError(f"gamma_bar must be positive, got {self.gamma_bar}")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        vals = tuple(float(v) for v in self.values)
        if self.kind == "explicit" and not vals:
            raise ValueError("explicit profile needs values")
        if any(not (math.isfinite(v) and v > 0) for v in vals):
            raise ValueError(f"explicit average SNRs must be positive: {vals}")
        object.__setattr__(self, "values", vals)


def exponential_mip(gamma_bar: float, delta: float, n: int, bs_id: int = 1) -> BranchProfile:
    """``gamma_bar * exp(-delta (i-1))`` for ``i = 1..n``; delta = 0 gives i.i.d. paths."""
    if n < 1:
        raise ValueError("need at least one path")
    return BranchProfile(tuple(gamma_bar * np.exp(-delta * np.arange(n))), bs_id)


def uniform(gamma_bar: float, n: int, bs_id: int = 1) -> BranchProfile:
    return exponential_mip(gamma_bar, 0.0, n, bs_id)


def explicit(values: Sequence[float], bs_id: int = 1) -> BranchProfile:
    return BranchProfile(tuple(values), bs_id)


def build_profile(spec: PdpSpec, n: int, bs_id: int = 1) -> BranchProfile:
    if spec.kind == "explicit":
        if len(spec.values) != n:
            raise ValueError(f"BS {bs_id}: explicit profile has {len(spec.values)} values, expected {n}")
        return explicit(spec.values, bs_id)
    if spec.kind == "uniform":
        return uniform(spec.gamma_bar, n, bs_id)
    return exponential_mip(spec.gamma_bar, spec.delta, n, bs_id)


def apply_distinctness_jitter(profile: BranchProfile, rel_epsilon: float = DEFAULT_JITTER) -> BranchProfile:
    """Spread clusters of (nearly) equal means by factors ``1 + k*rel_epsilon``.

    Means are clustered by chaining neighbours (in sorted order) whose
    relative gap is at most ``rel_epsilon``; within a cluster the members keep
    their path order and the k-th one (k = 0, 1, ...) is scaled by
    ``1 + k*rel_epsilon``.  Profiles without such clusters come back unchanged.
    """
    if not 1e-12 <= rel_epsilon <= 1e-6:
        raise ValueError(f"rel_epsilon must lie in [1e-12, 1e-6], got {rel_epsilon}")
    g = np.asarray(profile.gammas)
    order = np.argsort(g, kind="stable")
    clusters = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if abs(g[cur] - g[prev]) <= rel_epsilon * max(g[cur], g[prev]):
            clusters[-1].append(cur)
        else:
            clusters.append([cur])
    if all(len(c) == 1 for c in clusters):
        return profile
    out = g.copy()
    for members in clusters:
        base = g[min(members)]
        for k, idx in enumerate(sorted(members)):
            out[idx] = base * (1.0 + k * rel_epsilon)
    return BranchProfile(tuple(out), profile.bs_id)


def calibrate_gamma_bar(gamma_t: float, margin_db: float, delta: float, n: int, n_c: int,
                        rel_epsilon: float = DEFAULT_JITTER) -> float:
    """First-path mean that puts ``gamma_t`` ``margin_db`` above the mean GSC output.

    The mean of the ``n_c``-finger GSC output is linear in the first-path
    mean for a fixed profile shape, so one unit-scale evaluation suffices.
    """
    unit = apply_distinctness_jitter(exponential_mip(1.0, delta, n), rel_epsilon)
    mean_unit = gsc_distribution(unit, n_c).mean()
    return gamma_t / 10.0 ** (margin_db / 10.0) / mean_unit
