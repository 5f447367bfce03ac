import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import residues
from sho_rake.combinatorics import (
    MAX_TERMS,
    ExpansionTerm,
    check_capacity,
    coefficient_C,
    evaluate_expansion,
    f_prime,
    ordered_chains,
    partial_fraction_weights,
    permutations_of,
    product_to_sum,
)
from sho_rake.errors import CapacityError, SingularityError


def test_permutations_small():
    assert list(permutations_of([1, 2, 3], 2)) == [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)]
    assert list(permutations_of([4, 5], 0)) == [()]


def test_permutations_five_choose_two_by_nested_loops():
    brute = [(a, b) for a in range(1, 6) for b in range(1, 6) if a != b]
    got = list(permutations_of(range(1, 6), 2))
    assert got == brute and len(got) == 20


def test_permutations_domain_error():
    with pytest.raises(ValueError):
        list(permutations_of([1, 2], 3))


def test_permutation_and_chain_counts_exhaustive():
    for n in range(0, 8):
        members = list(range(1, n + 1))
        for k in range(0, n + 1):
            perms = list(permutations_of(members, k))
            assert len(perms) == math.perm(n, k) == len(set(perms))
            if k >= 1:
                chains = list(ordered_chains(1, n, k))
                assert len(chains) == math.comb(n, k)
                assert all(all(a < b for a, b in zip(c, c[1:])) for c in chains)


def test_ordered_chains_examples():
    assert list(ordered_chains(1, 3, 2)) == [(1, 2), (1, 3), (2, 3)]
    assert list(ordered_chains(4, 5, 1)) == [(4,), (5,)]
    brute = [(a, b, c) for a in range(1, 7) for b in range(a + 1, 7) for c in range(b + 1, 7)]
    assert list(ordered_chains(1, 6, 3)) == brute and len(brute) == 20
    assert list(ordered_chains(3, 4, 5)) == []
    assert list(ordered_chains(5, 4, 1)) == []  # lo = hi + 1 is an empty range, not an error
    with pytest.raises(ValueError):
        ordered_chains(1, 3, 0)
    with pytest.raises(ValueError):
        ordered_chains(6, 4, 1)


def test_enumeration_is_deterministic():
    assert list(permutations_of(range(1, 6), 3)) == list(permutations_of(range(1, 6), 3))
    assert product_to_sum([0.3, 0.7, 1.1]) == product_to_sum([0.3, 0.7, 1.1])


def test_product_to_sum_small_cases():
    assert product_to_sum([]) == [ExpansionTerm(1, ())]
    assert product_to_sum([2.0]) == [ExpansionTerm(1, ()), ExpansionTerm(-1, (1,))]
    assert product_to_sum([1.0, 2.0]) == [
        ExpansionTerm(1, ()),
        ExpansionTerm(-1, (1,)),
        ExpansionTerm(-1, (2,)),
        ExpansionTerm(1, (1, 2)),
    ]


def test_product_to_sum_three_rates():
    rates = (0.7, 1.3, 2.1)
    t = 0.9
    direct = np.prod([1 - np.exp(-a * t) for a in rates])
    assert evaluate_expansion(product_to_sum(rates), rates, t) == pytest.approx(direct, rel=1e-12)


@given(st.lists(st.floats(0.05, 5.0), min_size=1, max_size=10), st.floats(1e-3, 10.0))
def test_product_to_sum_normwise_any_t(rates, t):
    # where the product is tiny the alternating series can only be accurate
    # relative to the sum of its term magnitudes, prod(1 + exp(-a t))
    direct = np.prod(-np.expm1(-np.asarray(rates) * t))
    scale = np.prod(1 + np.exp(-np.asarray(rates) * t))
    got = evaluate_expansion(product_to_sum(rates), rates, np.array([t]))[0]
    assert abs(got - direct) <= 1e-14 * scale


def test_product_to_sum_rejects_bad_rates():
    with pytest.raises(ValueError):
        product_to_sum([1.0, -0.5])


@given(st.lists(st.floats(0.05, 5.0), min_size=1, max_size=8))
def test_expansion_terms_signs_and_count(rates):
    terms = product_to_sum(rates)
    assert len(terms) == 2 ** len(rates)
    for term in terms:
        assert term.sign == (-1) ** len(term.subset)
        assert list(term.subset) == sorted(set(term.subset))


def test_coefficient_C_single_element():
    assert coefficient_C(2, 2, 2, [3.0, 0.25, 7.0]) == pytest.approx(-1 / 0.25 * 1.0, rel=1e-15)
    assert coefficient_C(1, 1, 1, [2.0]) == -0.5


def test_coefficient_C_three_poles_matches_residues():
    gammas = [2.0, 1.0, 0.5]
    # residue of prod(l)/prod(s+l) at s = -l_q equals -C_q
    res = residues([1 / g for g in gammas])
    for q in range(3):
        assert coefficient_C(q + 1, 1, 3, gammas) == pytest.approx(-res[q], rel=1e-12)
    # hand value: 1 / ((-2)(-1)(-0.5) (0.5-1)(0.5-2))
    assert coefficient_C(1, 1, 3, gammas) == pytest.approx(-4 / 3, rel=1e-14)


def test_coefficient_C_subblock_indexing():
    gammas = [5.0, 2.0, 1.0, 0.5]
    assert coefficient_C(3, 2, 4, gammas) == pytest.approx(coefficient_C(2, 1, 3, gammas[1:]), rel=1e-15)


def test_coefficient_C_near_equal_raises():
    with pytest.raises(SingularityError) as err:
        coefficient_C(1, 1, 2, [1.0, 1.0 + 1e-13])
    assert err.value.indices == (1, 2)
    with pytest.raises(SingularityError):
        partial_fraction_weights([1.0, 1.0])


@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=6, unique=True), st.floats(0.0, 5.0))
def test_partial_fractions_reconstruct_rational_function(gammas, s):
    rates = [1 / g for g in gammas]
    seps = [abs(a - b) / max(a, b) for a, b in itertools.combinations(rates, 2)]
    if seps and min(seps) < 1e-3:
        return
    # Laplace transform of -sum C exp(-l t) must equal prod l / prod (s + l)
    terms = [-coefficient_C(q, 1, len(gammas), gammas) / (s + r) for q, r in enumerate(rates, 1)]
    lhs = math.fsum(terms)
    rhs = math.prod(r / (s + r) for r in rates)
    # the term sum cancels when poles crowd; bound the error by the term magnitudes
    assert abs(lhs - rhs) <= 1e-13 * math.fsum(abs(t) for t in terms)
    if not seps or min(seps) >= 0.1:
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_partial_fraction_weights_agree_with_coefficient_C():
    gammas = [1.7, 0.9, 0.4, 0.25]
    w = partial_fraction_weights([1 / g for g in gammas])
    for q in range(4):
        assert w[q] == pytest.approx(coefficient_C(q + 1, 1, 4, gammas), rel=1e-13)


def test_f_prime_degenerate_and_two_term():
    assert f_prime(3, 3, 3, 0.77, [1.0, 2.0, 3.0]) == 1.0
    # (x - 1/2)(x - 1/4) -> 2x - 3/4, symbolic expansion by hand
    assert f_prime(1, 1, 2, 1.0, [2.0, 4.0]) == pytest.approx(1.25, rel=1e-15)
    assert f_prime(2, 1, 2, 0.3, [2.0, 4.0]) == pytest.approx(0.6 - 0.75, rel=1e-14)


@given(st.lists(st.floats(0.2, 5.0), min_size=1, max_size=6), st.floats(-3.0, 3.0))
def test_f_prime_matches_polynomial_derivative(gammas, x):
    roots = [1 / g for g in gammas]
    poly = np.poly1d(np.poly(roots))
    deriv = poly.deriv()(x)
    h = 1e-6
    fd = (poly(x + h) - poly(x - h)) / (2 * h)
    val = f_prime(1, 1, len(gammas), x, gammas)
    scale = max(1.0, abs(deriv), *(abs(c) for c in poly.deriv().coeffs)) * max(1.0, abs(x)) ** len(gammas)
    assert abs(val - deriv) <= 1e-10 * scale
    assert abs(val - fd) <= 1e-5 * scale


def test_f_prime_at_pole_is_factored_denominator():
    gammas = [2.0, 1.0, 0.5]
    rates = [1 / g for g in gammas]
    for q in range(3):
        fp = math.prod(rates[q] - r for m, r in enumerate(rates) if m != q)
        assert f_prime(q + 1, 1, 3, rates[q], gammas) == pytest.approx(fp, rel=1e-12)


def test_capacity_guard():
    check_capacity(MAX_TERMS)
    with pytest.raises(CapacityError):
        check_capacity(MAX_TERMS + 1)
