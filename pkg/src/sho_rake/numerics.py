"""Stable integrals of exp(linear) over segments, rectangles and triangles.

Every closed form in the package reduces to integrals of exponentials of
affine functions over polygons.  Written naively these are ratios like
``(exp(r*b) - exp(r*a)) / r`` that lose all accuracy when a rate ``r``
approaches zero, which happens routinely once path means are nearly equal.
Here they are expressed through divided differences of ``exp`` so that the
zero-rate limit is handled without branching on a threshold.

All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math

import numpy as np

# Spread below which the 3-node divided difference uses its Taylor series.
_SERIES_SPREAD = 1.0
_SERIES_TERMS = 24


def phi1(z):
    """``(exp(z) - 1) / z`` with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0.0
    zn = z[nz]
    out[nz] = np.expm1(zn) / zn
    return out


def exp_dd2(t0, t1):
    """First divided difference of exp at nodes ``t0``, ``t1``."""
    t0 = np.asarray(t0, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    hi = np.maximum(t0, t1)
    return np.exp(hi) * phi1(-np.abs(t1 - t0))


def exp_dd3(t0, t1, t2):
    """Second divided difference of exp at three (possibly equal) nodes.

    Equals the integral of ``exp`` over the standard simplex weighted by the
    Hermite-Genocchi measure, so it is positive and well defined for
    coincident nodes.
    """
    t0, t1, t2 = np.broadcast_arrays(
        np.asarray(t0, dtype=float), np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)
    )
    stacked = np.sort(np.stack([t0, t1, t2]), axis=0)
    lo, mid, hi = stacked[0], stacked[1], stacked[2]
    spread = hi - lo
    out = np.empty_like(hi)

    small = spread <= _SERIES_SPREAD
    if np.any(small):
        # shift by the top node: exp[t] = e^hi * exp[t - hi], nodes a <= b <= 0
        a = (lo - hi)[small]
        b = (mid - hi)[small]
        h = np.ones_like(a)  # complete homogeneous polynomial h_n(a, b)
        bn = np.ones_like(b)
        total = np.full_like(a, 0.5)
        fact = 2.0
        for n in range(1, _SERIES_TERMS):
            bn = bn * b
            h = a * h + bn
            fact *= n + 2
            total = total + h / fact
        out[small] = np.exp(hi[small]) * total

    big = ~small
    if np.any(big):
        upper = exp_dd2(mid[big], hi[big])
        lower = exp_dd2(lo[big], mid[big])
        out[big] = (upper - lower) / spread[big]
    return out


def exp_dd(nodes):
    """Divided difference of exp over the last axis of ``nodes`` (any count, repeats allowed).

    Sub-blocks of the sorted nodes whose spread is at most one are summed as
    ``exp(c) * sum_m h_m(t - c) / (m + n)!`` around their midpoint ``c``
    (``h_m`` the complete homogeneous polynomials); wider ones use the
    two-sided recurrence, whose division is then by at least one.
    """
    t = -np.sort(-np.asarray(nodes, dtype=float), axis=-1)  # descending
    n = t.shape[-1] - 1
    flat = t.reshape(-1, n + 1)
    table = {}
    for width in range(n + 1):
        for i in range(n + 1 - width):
            j = i + width
            hi, lo = flat[:, i], flat[:, j]
            spread = hi - lo
            out = np.empty(flat.shape[0])
            small = spread <= _SERIES_SPREAD
            if np.any(small):
                c = 0.5 * (hi[small] + lo[small])
                s = flat[small, i : j + 1] - c[:, None]
                # h[:, v] holds h_m over the first v+1 shifted nodes
                h = np.ones_like(s)
                fact = float(math.factorial(width))
                total = np.full(c.shape, 1.0 / fact)
                for m in range(1, _SERIES_TERMS + 1):
                    h = _next_h(h, s)
                    fact *= m + width
                    total = total + h[:, -1] / fact
                out[small] = np.exp(c) * total
            big = ~small
            if np.any(big):
                out[big] = (table[i, j - 1][big] - table[i + 1, j][big]) / spread[big]
            table[i, j] = out
    return table[0, n].reshape(t.shape[:-1])


def _next_h(h, s):
    """``h_m`` from ``h_{m-1}``: ``h_m(s_0..s_v) = h_m(s_0..s_{v-1}) + s_v h_{m-1}(s_0..s_v)``."""
    out = np.empty_like(h)
    acc = np.zeros(h.shape[0])
    for v in range(h.shape[1]):
        acc = acc + s[:, v] * h[:, v]
        out[:, v] = acc
    return out


def exp_segment(rate, lo, hi, shift=0.0):
    """``integral_lo^hi exp(shift + rate*t) dt`` (signed if ``hi < lo``)."""
    rate = np.asarray(rate, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    length = hi - lo
    # anchor at the endpoint with the larger exponent so nothing overflows
    anchor = np.where(rate * length >= 0.0, hi, lo)
    return length * np.exp(shift + rate * anchor) * phi1(-np.abs(rate * length))


def exp_triangle(e, f, v0, v1, v2, shift=0.0):
    """Integral of ``exp(shift + e*x + f*y)`` over the triangle ``v0 v1 v2``.

    Vertices are ``(x, y)`` pairs of arrays.  The result carries the sign of
    the vertex orientation (counter-clockwise positive), which keeps
    trapezoid decompositions valid when an edge folds over.
    """
    (x0, y0), (x1, y1), (x2, y2) = v0, v1, v2
    area2 = (np.asarray(x1) - x0) * (np.asarray(y2) - y0) - (np.asarray(x2) - x0) * (np.asarray(y1) - y0)
    t0 = shift + e * np.asarray(x0) + f * np.asarray(y0)
    t1 = shift + e * np.asarray(x1) + f * np.asarray(y1)
    t2 = shift + e * np.asarray(x2) + f * np.asarray(y2)
    return area2 * exp_dd3(t0, t1, t2)


def pairwise_sum(values, axis=-1):
    """Tree summation along ``axis`` (numpy reduces contiguous rows pairwise)."""
    values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    return np.sum(np.ascontiguousarray(values), axis=-1)
