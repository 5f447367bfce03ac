"""Index enumeration and partial-fraction coefficients.

The closed forms sum over assignments of path indices to order-statistic
positions.  Index tuples here are 1-based to match the path numbering used
throughout the package; enumeration order is lexicographic so that
floating-point sums are reproducible run to run.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, SingularityError

MAX_TERMS = 10**7

# A partial-fraction denominator is rejected when the product of the pairwise
# relative pole separations falls below this.  The default jitter (1e-9) keeps
# single-pair blocks just above it.
SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class ExpansionTerm:
    """One term ``sign * exp(-(sum of rates in subset) * t)``."""

    sign: int
    subset: tuple[int, ...]


def permutations_of(members: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
    """Ordered k-tuples without repetition, lexicographic in ``members`` order."""
    if k < 0 or k > len(members):
        raise ValueError(f"k={k} outside [0, {len(members)}]")
    return itertools.permutations(tuple(members), k)


def subsets_of(members: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
    """Increasing k-subsets; these are what the closed forms actually sum over."""
    if k < 0 or k > len(members):
        raise ValueError(f"k={k} outside [0, {len(members)}]")
    return itertools.combinations(tuple(members), k)


def ordered_chains(lo: int, hi: int, depth: int) -> Iterator[tuple[int, ...]]:
    """All ``lo <= j_1 < ... < j_depth <= hi``; empty when the range is too short."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if lo > hi + 1:
        raise ValueError(f"lo={lo} > hi+1={hi + 1}")
    return itertools.combinations(range(lo, hi + 1), depth)


def product_to_sum(rates: Sequence[float]) -> list[ExpansionTerm]:
    """Expand ``prod_j (1 - exp(-a_j t))`` into signed exponentials.

    Subsets refer to 1-based positions in ``rates``; the empty subset is the
    constant term.  ``2**len(rates)`` terms, grouped by subset size.
    """
    rates = [float(r) for r in rates]
    if any(not math.isfinite(r) or r <= 0 for r in rates):
        raise ValueError("rates must be finite and positive")
    n = len(rates)
    terms = [ExpansionTerm(1, ())]
    for g in range(1, n + 1):
        sign = -1 if g % 2 else 1
        terms.extend(ExpansionTerm(sign, chain) for chain in ordered_chains(1, n, g))
    return terms


def evaluate_expansion(terms: Sequence[ExpansionTerm], rates: Sequence[float], t):
    """Evaluate an expansion from :func:`product_to_sum` at ``t`` (array ok)."""
    t = np.asarray(t, dtype=float)
    rates = np.asarray(rates, dtype=float)
    cols = []
    for term in terms:
        agg = math.fsum(rates[j - 1] for j in term.subset)
        cols.append(term.sign * np.exp(-agg * t))
    stacked = np.stack(np.broadcast_arrays(*cols), axis=-1)
    return np.sum(stacked, axis=-1)


def f_prime(l: int, n1: int, n2: int, x: float, gammas: Sequence[float]) -> float:
    """Derivative of ``prod_{j=n1..n2} (x - 1/gammas[j])`` in expanded form.

    Evaluated through elementary symmetric sums over ordered index chains,
    exactly as the polynomial is written out; ``l`` only names the pole the
    caller is interested in and does not enter the value.  ``gammas`` is
    indexed by 1-based position.
    """
    if not n1 <= l <= n2:
        raise ValueError(f"need n1 <= l <= n2, got {n1}, {l}, {n2}")
    inv = {j: 1.0 / gammas[j - 1] for j in range(n1, n2 + 1)}
    span = n2 - n1
    total = (span + 1) * x**span
    for order in range(1, span + 1):
        esym = math.fsum(math.prod(inv[j] for j in chain) for chain in ordered_chains(n1, n2, order))
        total += (span - order + 1) * x ** (span - order) * (-1) ** order * esym
    return total


def _pole_separation(rates: np.ndarray, q: int) -> float:
    """Product of relative separations between pole ``q`` and the others."""
    others = np.delete(rates, q)
    rel = np.abs(rates[q] - others) / np.maximum(rates[q], others)
    return float(np.prod(rel)) if rel.size else 1.0


def coefficient_C(l: int, n1: int, n2: int, gammas: Sequence[float]) -> float:
    """Partial-fraction weight of pole ``l`` in the block ``n1..n2``.

    ``1 / (prod_j (-gamma_j) * F'(1/gamma_l))`` where ``F'`` is taken in its
    factored form ``prod_{m != l} (1/gamma_l - 1/gamma_m)``.  The hypoexponential
    density of the block is ``-sum_l C_l exp(-t / gamma_l)``.
    """
    if not n1 <= l <= n2:
        raise ValueError(f"need n1 <= l <= n2, got {n1}, {l}, {n2}")
    block = np.asarray([gammas[j - 1] for j in range(n1, n2 + 1)], dtype=float)
    if np.any(block <= 0):
        raise ValueError("average SNRs must be positive")
    rates = 1.0 / block
    q = l - n1
    if _pole_separation(rates, q) < SINGULAR_RTOL:
        raise SingularityError(
            f"coincident average SNRs in block {n1}..{n2} at position {l}",
            indices=tuple(range(n1, n2 + 1)),
        )
    fp = math.prod(rates[q] - r for m, r in enumerate(rates) if m != q)
    return 1.0 / (math.prod(-g for g in block) * fp)


def partial_fraction_weights(rates: Sequence[float], indices: Sequence[int] = ()) -> np.ndarray:
    """``C`` for every pole of a block given directly by its rates."""
    rates = np.asarray(rates, dtype=float)
    n = rates.size
    out = np.empty(n)
    for q in range(n):
        if _pole_separation(rates, q) < SINGULAR_RTOL:
            raise SingularityError("coincident average SNRs inside a hypoexponential block", indices)
        fp = math.prod(rates[q] - rates[m] for m in range(n) if m != q)
        # prod(-gamma) = (-1)^n / prod(rates)
        out[q] = (-1) ** n * math.prod(rates) / fp
    return out


def check_capacity(count: int, what: str = "closed form") -> None:
    if count > MAX_TERMS:
        raise CapacityError(f"{what} needs {count} terms (limit {MAX_TERMS}); reduce path counts")
