"""Closed-form statistics of partial sums of ordered i.n.d. exponential SNRs.

Three statistics drive the outage analysis:

* the CDF (and density) of the sum of the ``k`` strongest of ``n`` paths,
  used both for the serving-BS GSC output ``Y + W_1`` and for the block
  ``W_n`` of each target BS;
* the joint density of the two adjacent partial sums ``Y`` (top
  ``N_c - N_s`` paths) and ``W_1`` (next ``N_s`` paths) of the serving BS.

Each is an exact finite sum over assignments of path indices to
order-statistic positions.  Every summand is the integral of an exponential
of an affine function over an interval, rectangle or trapezoid; those
integrals are evaluated through :mod:`sho_rake.numerics` so that vanishing
exponential rates (nearly equal means) cost no accuracy.

Term tables are built once per (profile, block sizes) and cached;
evaluation is vectorised over arrays of abscissae.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import combinatorics as cb
from .errors import SingularityError
from .numerics import exp_dd, exp_dd2, exp_dd3, exp_segment, exp_triangle, pairwise_sum, phi1

_CHUNK = 4096


@dataclass(frozen=True)
class BranchProfile:
    """Average SNRs (linear) of the resolvable paths of one base station."""

    gammas: tuple[float, ...]
    bs_id: int = 1

    def __post_init__(self):
        g = tuple(float(v) for v in self.gammas)
        if not g:
            raise ValueError("a branch profile needs at least one path")
        if any(not math.isfinite(v) or v <= 0 for v in g):
            raise ValueError(f"average SNRs must be finite and positive: {g}")
        object.__setattr__(self, "gammas", g)

    @property
    def n_paths(self) -> int:
        return len(self.gammas)

    @property
    def rates(self) -> np.ndarray:
        return 1.0 / np.asarray(self.gammas)

    def permuted(self, order: Sequence[int]) -> "BranchProfile":
        return BranchProfile(tuple(self.gammas[i] for i in order), self.bs_id)


@dataclass(frozen=True)
class GscSpec:
    n_total: int
    n_combine: int

    def __post_init__(self):
        if not 1 <= self.n_combine <= self.n_total:
            raise ValueError(f"need 1 <= n_combine <= n_total, got {self.n_combine}/{self.n_total}")


@dataclass(frozen=True)
class TermConstants:
    """Exponential rate aggregates of one joint-density summand.

    ``alpha*`` multiply the smallest W_1 order statistic and ``beta*`` the
    smallest Y order statistic.  Primes mark the variants with leftover-path
    expansion terms (``alpha1``, ``alpha3``) and with serving-block paths
    pushed above the Y/W_1 boundary (``alpha2``, ``alpha3``, ``beta1``).
    """

    alpha: float
    alpha1: float
    alpha2: float
    alpha3: float
    beta: float
    beta1: float


@dataclass(frozen=True)
class JointDensityPoint:
    x: float
    y: float
    density: float


def _check_points(v):
    v = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(v)):
        raise ValueError("non-finite argument")
    return v


# ---------------------------------------------------------------------------
# generic double-integral helpers


def helper_I(e, a, b, f, c, d, shift=0.0):
    """``int_c^d int_a^b exp(e x) exp(f y) dx dy``.

    Product of two one-dimensional exponential integrals; exact at ``e = 0``
    or ``f = 0`` where it degenerates to a length.
    """
    e, a, b, f, c, d = (_check_points(v) for v in (e, a, b, f, c, d))
    len_x = b - a
    len_y = d - c
    ax = np.where(e * len_x >= 0.0, b, a)
    ay = np.where(f * len_y >= 0.0, d, c)
    return (
        len_x
        * len_y
        * np.exp(shift + e * ax + f * ay)
        * phi1(-np.abs(e * len_x))
        * phi1(-np.abs(f * len_y))
    )


def helper_I_prime(e, a, b0, bslope, f, c, d, shift=0.0):
    """``int_c^d exp(f y) int_a^{b0 - bslope*y} exp(e x) dx dy``.

    The region is a trapezoid; it is split into two triangles whose
    integrals are exact divided differences of ``exp``.  Analytically this is
    ``(1/e) [exp(e b0) J(f - e bslope) - exp(e a) J(f)]`` with
    ``J(r) = int_c^d exp(r y) dy``.
    """
    e, a, b0, bslope, f, c, d = (_check_points(v) for v in (e, a, b0, bslope, f, c, d))
    uc = b0 - bslope * c
    ud = b0 - bslope * d
    p1 = (a, c)
    p2 = (uc, c)
    p3 = (ud, d)
    p4 = (a, d)
    return exp_triangle(e, f, p1, p2, p3, shift) + exp_triangle(e, f, p1, p3, p4, shift)


# ---------------------------------------------------------------------------
# sum of the k strongest of n paths


# Blocks whose rates are closer than this (relative) are summed as one
# divided difference instead of pole by pole.
_CLUSTER_RTOL = 0.1


def _min_rel_gap(rates):
    r = np.sort(np.asarray(rates, dtype=float))
    if r.size < 2:
        return math.inf
    return float(np.min(np.diff(r) / r[1:]))


class GscDistribution:
    """Distribution of the sum of the ``k`` largest of ``n`` exponential SNRs.

    Terms are indexed by the path taking the ``k``-th position, the set of
    paths above it and a subset of the paths below it (from expanding the
    product of their CDFs).  The hypoexponential block above contributes
    ``c x^(n+1)/k exp[0, -r2 x, -lam_A x]`` with ``n = k - 1`` poles; when its
    rates are well apart this is split over the poles by partial fractions
    (the cheap form), otherwise it is kept as one divided difference, which
    stays accurate for nearly equal means.
    """

    def __init__(self, profile: BranchProfile, n_combine: int):
        self.profile = profile
        self.spec = GscSpec(profile.n_paths, n_combine)
        self.k = n_combine
        if self.k > 1:
            self._build()

    def _build(self):
        n, k = self.spec.n_total, self.k
        lam = [1.0 / g for g in self.profile.gammas]
        count = n * math.comb(n - 1, k - 1) * (k - 1) * 2 ** (n - k)
        cb.check_capacity(count, "GSC CDF")
        poles: dict[tuple[float, float], list[float]] = {}
        blocks: dict[tuple[tuple[float, ...], float], list[float]] = {}
        paths = tuple(range(1, n + 1))
        if k > 2 and _min_rel_gap(lam) < cb.SINGULAR_RTOL:
            raise SingularityError("coincident average SNRs inside a hypoexponential block", paths)
        for c in paths:
            rest = tuple(p for p in paths if p != c)
            for above in cb.subsets_of(rest, k - 1):
                below = tuple(p for p in rest if p not in above)
                lam_a = [lam[p - 1] for p in above]
                split = _min_rel_gap(lam_a) >= _CLUSTER_RTOL
                if split:
                    weights = cb.partial_fraction_weights(lam_a, (c,) + above)
                scale = lam[c - 1] * math.prod(lam_a)
                for g in range(len(below) + 1):
                    sign = -1.0 if g % 2 else 1.0
                    for sub in cb.subsets_of(below, g):
                        r2 = math.fsum([lam[c - 1]] + lam_a + [lam[p - 1] for p in sub]) / k
                        if split:
                            for w, q in zip(weights, above):
                                poles.setdefault((lam[q - 1], r2), []).append(-lam[c - 1] * w * sign)
                        else:
                            blocks.setdefault((tuple(sorted(lam_a)), r2), []).append(sign * scale)
        keys = sorted(poles)
        self._r1 = np.array([key[0] for key in keys])
        self._r2 = np.array([key[1] for key in keys])
        self._coef = np.array([math.fsum(poles[key]) for key in keys])
        keys = sorted(blocks)
        self._blk_rates = np.array([key[0] for key in keys]).reshape(len(keys), k - 1)
        self._blk_r2 = np.array([key[1] for key in keys])
        self._blk_coef = np.array([math.fsum(blocks[key]) for key in keys])

    @property
    def n_terms(self) -> int:
        return 0 if self.k == 1 else self._coef.size + self._blk_coef.size

    def _evaluate(self, x, pole_kernel, block_kernel):
        x = _check_points(x)
        flat = x.reshape(-1)
        out = np.zeros_like(flat)
        step = _CHUNK if not self._blk_coef.size else max(1, _CHUNK // 4)
        for s in range(0, flat.size, step):
            xs = flat[s : s + step, None]
            if self._coef.size:
                out[s : s + step] += pairwise_sum(self._coef * pole_kernel(xs))
            if self._blk_coef.size:
                out[s : s + step] += pairwise_sum(self._blk_coef * block_kernel(xs))
        return out.reshape(x.shape)

    def _block_nodes(self, xs, with_zero):
        parts = [-self._blk_r2[None, :, None] * xs[..., None], -self._blk_rates[None] * xs[..., None]]
        if with_zero:
            parts.insert(0, np.zeros(parts[0].shape))
        shape = np.broadcast_shapes(*(p.shape[:-1] for p in parts))
        return np.concatenate([np.broadcast_to(p, shape + p.shape[-1:]) for p in parts], axis=-1)

    def cdf(self, x):
        x = _check_points(x)
        if np.any(x < 0):
            raise ValueError("SNR threshold must be non-negative")
        if self.k == 1:
            return np.prod(-np.expm1(-np.multiply.outer(x, self.profile.rates)), axis=-1)
        k, r1, r2 = self.k, self._r1, self._r2
        val = self._evaluate(
            x,
            lambda xs: xs * xs / k * exp_dd3(0.0, -r1 * xs, -r2 * xs),
            lambda xs: xs**k / k * exp_dd(self._block_nodes(xs, True)),
        )
        return np.clip(val, 0.0, 1.0)

    def pdf(self, z):
        z = _check_points(z)
        if np.any(z < 0):
            raise ValueError("SNR must be non-negative")
        rates = self.profile.rates
        if self.k == 1:
            zz = np.multiply.outer(z, rates)
            cdfs = -np.expm1(-zz)
            dens = rates * np.exp(-zz)
            out = np.zeros(z.shape)
            for i in range(rates.size):
                others = np.delete(cdfs, i, axis=-1)
                out = out + dens[..., i] * np.prod(others, axis=-1)
            return out
        k, r1, r2 = self.k, self._r1, self._r2
        return self._evaluate(
            z,
            lambda zs: zs / k * exp_dd2(-r1 * zs, -r2 * zs),
            lambda zs: zs ** (k - 1) / k * exp_dd(self._block_nodes(zs, False)),
        )

    def mean(self) -> float:
        """Exact mean of the sum.

        Each density term ``c (z/k) exp[-r1 z, -r2 z]`` has first moment
        ``c (r1 + r2) / (k r1^2 r2^2)``, and a block term with rates ``a`` has
        ``c sum(1/a) / (k prod(a))``; for ``k = 1`` inclusion-exclusion over the
        maximum is used instead.
        """
        if self.k == 1:
            lam = self.profile.rates
            total = []
            for g in range(1, lam.size + 1):
                for sub in cb.subsets_of(range(lam.size), g):
                    total.append((-1.0) ** (g + 1) / math.fsum(lam[list(sub)]))
            return math.fsum(total)
        r1, r2 = self._r1, self._r2
        parts = list(self._coef * (r1 + r2) / (self.k * r1 * r1 * r2 * r2))
        a = np.column_stack([self._blk_r2, self._blk_rates])
        parts += list(self._blk_coef * np.sum(1.0 / a, axis=1) / (self.k * np.prod(a, axis=1)))
        return math.fsum(parts)


@functools.lru_cache(maxsize=256)
def gsc_distribution(profile: BranchProfile, n_combine: int) -> GscDistribution:
    return GscDistribution(profile, n_combine)


def gsc_pdf(z, profile: BranchProfile, spec: GscSpec):
    """Density of the sum of the ``spec.n_combine`` strongest paths."""
    _match(profile, spec)
    return gsc_distribution(profile, spec.n_combine).pdf(z)


def gsc_cdf(x, profile: BranchProfile, spec: GscSpec):
    """CDF of the ``N_c/N``-GSC output SNR."""
    _match(profile, spec)
    return gsc_distribution(profile, spec.n_combine).cdf(x)


def _match(profile, spec):
    if spec.n_total != profile.n_paths:
        raise ValueError(f"spec has {spec.n_total} paths, profile has {profile.n_paths}")


def best_ns_sum_cdf(x, profile: BranchProfile, spec: GscSpec):
    """CDF of the sum of the ``N_s`` strongest paths of one base station.

    Written term by term in the textbook layout: outer index of the
    ``N_s``-th strongest path, the block of weaker paths, the block of
    stronger paths with its ``C`` weights from :func:`coefficient_C`, and the
    leftover-path expansion through ordered index chains.  This is a second,
    independent route to the same object as :func:`gsc_cdf`.
    """
    _match(profile, spec)
    x = _check_points(x)
    if np.any(x < 0):
        raise ValueError("SNR threshold must be non-negative")
    n, k = spec.n_total, spec.n_combine
    gam = profile.gammas
    if k == 1:
        out = np.ones_like(x)
        for g in gam:
            out = out * (1.0 - np.exp(-x / g))
        return out
    cb.check_capacity(n * math.comb(n - 1, k - 1) * (k - 1) * 2 ** (n - k), "W_n CDF")
    paths = tuple(range(1, n + 1))
    terms = []
    for c in paths:
        rest = tuple(p for p in paths if p != c)
        for weaker in cb.subsets_of(rest, n - k):
            stronger = tuple(p for p in rest if p not in weaker)
            block = [gam[p - 1] for p in stronger]
            top_rate = math.fsum(1.0 / gam[p - 1] for p in (c,) + stronger)
            for q in range(1, k):
                gq = block[q - 1]
                coeff = cb.coefficient_C(q, 1, k - 1, block)
                bracket = -_band_term(x, gq, top_rate, k)
                for depth in range(1, n - k + 1):
                    for chain in cb.ordered_chains(k + 1, n, depth):
                        extra = math.fsum(1.0 / gam[weaker[j - k - 1] - 1] for j in chain)
                        bracket = bracket - (-1) ** depth * _band_term(x, gq, top_rate + extra, k)
                terms.append(coeff / gam[c - 1] * bracket)
    return np.clip(pairwise_sum(np.stack(terms, axis=-1)), 0.0, 1.0)


def _band_term(x, gq, total_rate, k):
    """``int_0^x exp(-z/gq) int_0^{z/k} exp(-(total - k/gq) t) dt dz``."""
    a = total_rate - k / gq
    if abs(a) > 1e-6 * total_rate:
        return (gq * -np.expm1(-x / gq) - k / total_rate * -np.expm1(-total_rate * x / k)) / a
    # nearly removable singularity: same integral as a divided difference
    return x * x / k * exp_dd3(0.0, -x / gq, -total_rate * x / k)


# ---------------------------------------------------------------------------
# joint density of Y and W_1


def term_constants(lam_y, lam_w, lam_sub, lam_q, lam_h, lam_k, n_y, n_w) -> TermConstants:
    """Rate aggregates for one index assignment.

    ``lam_y``/``lam_w`` are the rates of the Y and W_1 blocks, ``lam_sub`` the
    selected leftover paths, ``lam_q`` the W_1 paths pushed above the
    Y/W_1 boundary, ``lam_h``/``lam_k`` the hypoexponential poles (0 for an
    empty block).
    """
    l = len(lam_q)
    sy, sw = math.fsum(lam_y), math.fsum(lam_w)
    ssub, sq = math.fsum(lam_sub), math.fsum(lam_q)
    return TermConstants(
        alpha=-(sw - n_w * lam_k),
        alpha1=-math.fsum([sw, ssub, -n_w * lam_k]),
        alpha2=-math.fsum([sw, -(n_w - l) * lam_k, -sq]),
        alpha3=-math.fsum([sw, ssub, -(n_w - l) * lam_k, -sq]),
        beta=-(sy - n_y * lam_h),
        beta1=-math.fsum([sy, sq, -n_y * lam_h, -l * lam_k]),
    )


class JointDensity:
    """Joint density of ``Y`` (top ``N_c - N_s``) and ``W_1`` (next ``N_s``).

    Arguments of :meth:`pdf` follow the convention ``f(x, y)`` with ``x`` the
    Y value and ``y`` the W_1 value; the support is
    ``y / N_s <= x / (N_c - N_s)``.
    """

    def __init__(self, profile: BranchProfile, n_c: int, n_s: int):
        n = profile.n_paths
        if not 1 <= n_s < n_c <= n:
            raise ValueError(f"need 1 <= N_s < N_c <= N, got N_s={n_s}, N_c={n_c}, N={n}")
        self.profile = profile
        self.n_c, self.n_s = n_c, n_s
        self.m = n_c - n_s
        self._build()

    def _build(self):
        n, m, s, nc = self.profile.n_paths, self.m, self.n_s, self.n_c
        lam = [1.0 / g for g in self.profile.gammas]
        count = (
            n * math.comb(n - 1, n - nc) * (nc - 1) * math.comb(nc - 2, s - 1)
            * 2 ** (n - nc) * 2 ** (s - 1) * max(m - 1, 1) * max(s - 1, 1)
        )
        cb.check_capacity(count, "joint density")
        acc: dict[tuple, list[float]] = {}
        paths = tuple(range(1, n + 1))
        for c in paths:
            rest = tuple(p for p in paths if p != c)
            for left in cb.subsets_of(rest, n - nc):
                inner = tuple(p for p in rest if p not in left)
                for a in inner:
                    pool = tuple(p for p in inner if p != a)
                    for bset in cb.subsets_of(pool, s - 1):
                        aset = tuple(p for p in pool if p not in bset)
                        self._add_assignment(acc, lam, c, left, a, aset, bset)
        keys = sorted(acc)
        arr = np.array(keys, dtype=float).reshape(-1, 5)
        self._lh, self._lk, self._beta, self._alpha, self._l = arr.T
        self._coef = np.array([math.fsum(acc[key]) for key in keys])

    def _add_assignment(self, acc, lam, c, left, a, aset, bset):
        m, s = self.m, self.n_s
        w_a = cb.partial_fraction_weights([lam[p - 1] for p in aset], aset) if aset else [1.0]
        w_b = cb.partial_fraction_weights([lam[p - 1] for p in bset], bset) if bset else [1.0]
        poles_h = [lam[p - 1] for p in aset] or [0.0]
        poles_k = [lam[p - 1] for p in bset] or [0.0]
        # each non-empty hypoexponential block contributes -sum C exp(..)
        base = lam[a - 1] * lam[c - 1] * (-1.0 if aset else 1.0) * (-1.0 if bset else 1.0)
        lam_y = [lam[p - 1] for p in (a,) + aset]
        lam_w = [lam[p - 1] for p in (c,) + bset]
        for g in range(len(left) + 1):
            for sub in cb.subsets_of(left, g):
                lam_sub = [lam[p - 1] for p in sub]
                for l in range(len(bset) + 1):
                    for qset in cb.subsets_of(bset, l):
                        lam_q = [lam[p - 1] for p in qset]
                        sign = (-1) ** (g + l)
                        for wh, lh in zip(w_a, poles_h):
                            for wk, lk in zip(w_b, poles_k):
                                tc = term_constants(lam_y, lam_w, lam_sub, lam_q, lh, lk, m, s)
                                if l == 0:
                                    beta, alpha = tc.beta, (tc.alpha1 if g else tc.alpha)
                                else:
                                    beta, alpha = tc.beta1, (tc.alpha3 if g else tc.alpha2)
                                key = (lh, lk, beta, alpha, float(l))
                                acc.setdefault(key, []).append(base * sign * wh * wk)

    @property
    def n_terms(self) -> int:
        return self._coef.size

    def in_support(self, x, y):
        x, y = np.broadcast_arrays(_check_points(x), _check_points(y))
        return (x >= 0) & (y >= 0) & (y * self.m <= x * self.n_s)

    def pdf(self, x, y):
        x, y = np.broadcast_arrays(_check_points(x), _check_points(y))
        shape = x.shape
        xf, yf = x.reshape(-1), y.reshape(-1)
        out = np.zeros(xf.size)
        ok = np.flatnonzero(self.in_support(xf, yf))
        for s in range(0, ok.size, _CHUNK):
            idx = ok[s : s + _CHUNK]
            out[idx] = self._density(xf[idx, None], yf[idx, None])
        return np.maximum(out, 0.0).reshape(shape)

    def _density(self, x, y):
        m, s = self.m, self.n_s
        lh, lk, beta, alpha, l = self._lh, self._lk, self._beta, self._alpha, self._l
        shift = -lh * x - lk * y
        u = y / s  # W_1 block's smallest value is at most this
        v = x / m  # Y block's smallest value is at least this
        if m > 1 and s > 1:
            lpos = np.maximum(l, 1.0)
            cut = np.clip((y - l * v) / np.maximum(s - l, 1.0), 0.0, u)
            cut = np.where(l == 0, u, cut)
            val = helper_I(beta, u, v, alpha, 0.0, cut, shift)
            trap = helper_I_prime(beta, u, y / lpos, (s - l) / lpos, alpha, cut, u, shift)
            val = val + np.where(l == 0, 0.0, trap)
        elif m == 1 and s > 1:
            # Y is a single order statistic: its value is x itself
            cut = np.clip((y - l * x) / np.maximum(s - l, 1.0), 0.0, u)
            cut = np.where(l == 0, u, cut)
            val = exp_segment(alpha, 0.0, cut, shift + beta * x)
        elif s == 1 and m > 1:
            # W_1 is a single order statistic: its value is y itself
            val = exp_segment(beta, y, v, shift + alpha * y)
        else:
            val = np.exp(shift + beta * x + alpha * y)
        return pairwise_sum(self._coef * val)

    def point(self, x: float, y: float) -> JointDensityPoint:
        return JointDensityPoint(float(x), float(y), float(self.pdf(x, y)))

    def box_probability(self, x0, x1, y0, y1, n: int = 16) -> float:
        """``Pr[x0 <= Y < x1, y0 <= W_1 < y1]`` by piecewise Gauss-Legendre.

        The inner (W_1) range is cut at the support line and at every kink
        line, so each piece has an analytic integrand.
        """
        t, w = np.polynomial.legendre.leggauss(n)
        xs = 0.5 * (x1 - x0) * (t + 1.0) + x0
        wx = 0.5 * (x1 - x0) * w
        slopes = [sl * 1.0 for sl in self.kink_slopes()]  # in y/x form, support last
        total = 0.0
        for xi, wxi in zip(xs, wx):
            hi = min(y1, slopes[-1] * xi)
            if hi <= y0:
                continue
            cuts = sorted({y0, hi} | {sl * xi for sl in slopes[:-1] if y0 < sl * xi < hi})
            for lo_c, hi_c in zip(cuts[:-1], cuts[1:]):
                ys = 0.5 * (hi_c - lo_c) * (t + 1.0) + lo_c
                vals = self.pdf(np.full(n, xi), np.minimum(ys, slopes[-1] * xi))
                total += wxi * 0.5 * (hi_c - lo_c) * float(np.dot(w, vals))
        return total

    def kink_slopes(self) -> tuple[float, ...]:
        """Slopes ``y/x`` of the lines through the origin where the density kinks."""
        s, m = self.n_s, self.m
        return tuple(sorted({l / m for l in range(1, s)} | {s / m}))


@functools.lru_cache(maxsize=128)
def joint_density(profile: BranchProfile, n_c: int, n_s: int) -> JointDensity:
    return JointDensity(profile, n_c, n_s)


def joint_pdf_y_w1(x, y, profile: BranchProfile, n_c: int, n_s: int):
    """``f_{Y,W_1}(x, y)``; zero outside ``y/N_s <= x/(N_c - N_s)``."""
    return joint_density(profile, n_c, n_s).pdf(x, y)
