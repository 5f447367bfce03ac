"""Adaptive cubature over ``{0 <= y <= y_max, 0 <= w <= g0 + g1*y}``.

The region is cut along rays through the origin where the integrand is known
to kink (for the joint density of two adjacent partial sums these are the
lines ``w = (l/m) y``), fan-triangulated, and refined adaptively.  The local
rule is a Gauss-Legendre product on the square collapsed onto the triangle
(Duffy map); the difference between an 8x8 and a 5x5 rule is the error
estimate.  Refinement is global: every triangle whose error exceeds the
tolerance divided by the current triangle count is split, which also copes
with jumps along lines the caller did not declare.  Integrands may be vector
valued and are called on whole batches of nodes at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_depth: int = 20

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if not 1 <= self.max_depth <= 60:
            raise ValueError("max_depth must lie in [1, 60]")


@dataclass(frozen=True)
class Region:
    """``{0 <= y <= y_max, 0 <= w <= g0 + g1*y}``; the upper edge must stay >= 0."""

    y_max: float
    g0: float
    g1: float = 0.0

    def __post_init__(self):
        if self.y_max < 0 or self.g0 < 0 or self.g0 + self.g1 * self.y_max < -1e-14 * max(1.0, self.g0):
            raise ValueError(f"degenerate integration region {self}")

    def polygon(self):
        top = max(self.g0 + self.g1 * self.y_max, 0.0)
        return [(0.0, 0.0), (self.y_max, 0.0), (self.y_max, top), (0.0, self.g0)]


def _gl_square(n):
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    # Duffy: (u, v) -> v0 + u (v1 - v0) + u v (v2 - v1), jacobian 2A u
    return u.ravel(), v.ravel(), (wu * wv * u).ravel()


_RULES = (_gl_square(8), _gl_square(5))


def _clip(poly, normal):
    """Keep the part of a convex polygon with ``normal . p >= 0``."""
    out = []
    for i, p in enumerate(poly):
        q = poly[(i + 1) % len(poly)]
        dp = normal[0] * p[0] + normal[1] * p[1]
        dq = normal[0] * q[0] + normal[1] * q[1]
        if dp >= 0:
            out.append(p)
        if (dp >= 0) != (dq >= 0):
            t = dp / (dp - dq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _initial_triangles(region: Region, kink_slopes: Sequence[float]):
    slopes = sorted(s for s in set(kink_slopes) if s > 0 and np.isfinite(s))
    pieces = [region.polygon()]
    for s in slopes:
        nxt = []
        for poly in pieces:
            # below the ray w = s y and above it
            for normal in ((s, -1.0), (-s, 1.0)):
                part = _clip(poly, normal)
                if len(part) >= 3:
                    nxt.append(part)
        pieces = nxt
    tris = []
    for poly in pieces:
        for i in range(1, len(poly) - 1):
            tri = (poly[0], poly[i], poly[i + 1])
            area2 = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (
                tri[1][1] - tri[0][1]
            )
            if abs(area2) > 0.0:
                tris.append(tri)
    return np.array(tris, dtype=float).reshape(-1, 3, 2)


def _apply_rules(integrand, tris):
    """Both rule estimates for a batch of triangles; shapes (T, ...) each."""
    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    area2 = np.abs(
        (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (v2[:, 0] - v0[:, 0]) * (v1[:, 1] - v0[:, 1])
    )
    out = []
    for u, v, w in _RULES:
        pts = (
            v0[:, None, :]
            + u[None, :, None] * (v1 - v0)[:, None, :]
            + (u * v)[None, :, None] * (v2 - v1)[:, None, :]
        )
        vals = np.asarray(integrand(pts[..., 0].ravel(), pts[..., 1].ravel()), dtype=float)
        vals = vals.reshape((tris.shape[0], u.size) + vals.shape[1:])
        wts = (area2[:, None] * w[None, :]).reshape((tris.shape[0], u.size) + (1,) * (vals.ndim - 2))
        out.append(np.sum(vals * wts, axis=1))
    return out[0], out[1], area2 / 2.0


def _split(tris):
    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    m01, m12, m20 = (v0 + v1) / 2, (v1 + v2) / 2, (v2 + v0) / 2
    kids = np.stack(
        [
            np.stack([v0, m01, m20], 1),
            np.stack([m01, v1, m12], 1),
            np.stack([m20, m12, v2], 1),
            np.stack([m01, m12, m20], 1),
        ],
        1,
    )
    return kids.reshape(-1, 3, 2)


def quadrature_2d(
    integrand: Callable,
    region: Region,
    settings: QuadratureSettings = QuadratureSettings(),
    kink_slopes: Sequence[float] = (),
):
    """Integrate ``integrand(y, w)`` over ``region``.

    ``integrand`` receives flat arrays of y and w and returns an array of the
    same length, or of shape ``(len, k)`` for ``k`` simultaneous integrands.
    Returns ``(value, error_estimate)``; raises :class:`QuadratureError`
    carrying the best estimate when ``max_depth`` refinements do not suffice.
    """
    tris = _initial_triangles(region, kink_slopes)
    if tris.shape[0] == 0:
        probe = np.asarray(integrand(np.zeros(1), np.zeros(1)), dtype=float)
        zero = np.zeros(probe.shape[1:]) if probe.ndim > 1 else 0.0
        return zero, zero
    hi, lo, _ = _apply_rules(integrand, tris)
    err = np.abs(hi - lo)
    depth = np.zeros(tris.shape[0], dtype=int)
    comp_axes = tuple(range(1, err.ndim))
    while True:
        value = np.sum(hi, axis=0)
        total_err = np.sum(err, axis=0)
        tol = np.maximum(settings.abs_tol, settings.rel_tol * np.abs(value))
        if np.all(total_err <= tol):
            return _out(value), _out(total_err)
        # refine every triangle above the per-triangle budget; the sum of
        # the rest is then within tolerance
        scaled = err / tol
        worst = np.max(scaled, axis=comp_axes) if comp_axes else scaled
        split = worst > 1.0 / tris.shape[0]
        if np.any(depth[split] >= settings.max_depth):
            break
        kids = _split(tris[split])
        k_hi, k_lo, _ = _apply_rules(integrand, kids)
        keep = ~split
        tris = np.concatenate([tris[keep], kids])
        hi = np.concatenate([hi[keep], k_hi])
        err = np.concatenate([err[keep], np.abs(k_hi - k_lo)])
        depth = np.concatenate([depth[keep], np.repeat(depth[split] + 1, 4)])
    raise QuadratureError(
        f"2-D quadrature did not converge in {settings.max_depth} refinements "
        f"(achieved error {np.max(total_err):.3e})",
        value=_out(value),
        error=_out(total_err),
    )


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v
