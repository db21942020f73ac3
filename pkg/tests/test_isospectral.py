import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgraph_iso.errors import InfiniteCoupling, MixedTypes, SearchSpaceTooLarge, SizeMismatch
from qgraph_iso.graph import standard_graph
from qgraph_iso.isospectral import (
    MAX_SEARCH_VERTICES,
    _candidates,
    decoupled_isospectrality_check,
    determinant_ratio_constant,
    invert_sigma,
    lemma51_property,
    necessary_check,
    search_isospectral,
    sigma_multiset,
    sigma_values,
    trace_report,
    trace_sum,
    trace_sum_exact,
)
from qgraph_iso.spectrum import find_spectrum


LASSO_CUTOFF = 800  # about 27 eigenvalues for unit lengths


def lasso(a, b, c):
    return standard_graph("lasso", alphas=(a, 3 * b, 2 * c))


# ---------------------------------------------------------------- traces


def test_trace_examples():
    assert trace_sum_exact(standard_graph("example_3_4"), 1) == Fraction(-5, 12)
    assert trace_sum(standard_graph("example_3_4"), 1) == pytest.approx(-0.41667, abs=1e-5)
    for alphas in ((2, -2, 2, -2), (-2, 2, -2, 2)):
        assert trace_sum(standard_graph("cycle", alphas=alphas), 1) == 0
    zero = standard_graph("star", alphas=(0, 0, 0, 0))
    assert all(trace_sum(zero, m) == 0 for m in range(1, 6))


def test_trace_by_hand():
    g = standard_graph("example_3_4")  # sigma = -1, -2/3, 1, 1/4
    sig = [Fraction(-1), Fraction(-2, 3), Fraction(1), Fraction(1, 4)]
    for m in range(1, 7):
        assert trace_sum_exact(g, m) == sum(s**m for s in sig)


def test_trace_errors():
    g = standard_graph("star", alphas=(1, "inf", 1, 1))
    with pytest.raises(InfiniteCoupling):
        trace_sum(g, 1)
    with pytest.raises(ValueError):
        trace_sum(standard_graph("star"), 0)
    with pytest.raises(ValueError):
        trace_report(standard_graph("star"), standard_graph("star"), 0)


def test_trace_report_rows():
    rep = trace_report(standard_graph("cycle"), standard_graph("cycle", alphas=(-2, 2, -2, 2)), 6)
    assert [r.m for r in rep.rows] == list(range(1, 7))
    assert rep.max_residual == 0.0
    # m even: four terms of 1
    assert rep.rows[1].lhs_sum == 4.0


# ---------------------------------------------------------------- sigma


def test_sigma_examples():
    s = sigma_multiset(standard_graph("example_3_4"))
    np.testing.assert_allclose(s.values, [-1, -2 / 3, 1, 0.25])
    assert (s.deltaprime_zero_count, s.total_zero_count) == (0, 0)

    a, b, c = 1.5, -0.7, 2.25
    np.testing.assert_allclose(sigma_multiset(lasso(a, b, c)).values, [-a, -b, -c])

    g = standard_graph("example_3_4", alphas=(0, 1, 0, 0))
    s = sigma_multiset(g)
    assert s.values[2:] == (0.0, 0.0)
    assert s.deltaprime_zero_count == 2 and s.total_zero_count == 3

    c2 = standard_graph("cycle", size=2, types=("delta_prime",) * 2, alphas=(0, 0))
    s = sigma_multiset(c2)
    assert s.values == (0.0, 0.0) and s.deltaprime_zero_count == 2
    assert len(s.values) == c2.num_vertices


def test_invert_sigma_round_trip():
    rng = random.Random(5)
    g = standard_graph("example_3_4")
    for _ in range(20):
        alphas = [rng.uniform(-5, 5) for _ in range(4)]
        h = g.with_couplings(alphas)
        np.testing.assert_allclose(invert_sigma(g, sigma_values(h)), alphas, rtol=1e-14)


def test_necessary_check_examples():
    rep = necessary_check(standard_graph("cycle"), standard_graph("cycle", alphas=(-2, 2, -2, 2)))
    assert rep.passed and rep.first_violation is None
    rep = necessary_check(lasso(1, 2, 3), standard_graph("lasso", alphas=(2, 9, 2)))
    assert rep.passed
    assert rep.sigma1.sorted_values == rep.sigma2.sorted_values == (-3.0, -2.0, -1.0)
    assert all(r == 0 for r in rep.newton_residuals)
    rep = necessary_check(standard_graph("star"), standard_graph("star", alphas=(1, 1, 1, 2)))
    assert not rep.passed and "sigma" in rep.first_violation
    with pytest.raises(SizeMismatch):
        necessary_check(standard_graph("star"), standard_graph("cycle", size=3))


def test_necessary_check_zero_counts():
    g = standard_graph("example_3_4", alphas=(1, 2, 0, 4))
    h = standard_graph("example_3_4", alphas=(0, 2, 3, 4))
    rep = necessary_check(g, h)
    assert not rep.passed and "delta'" in rep.first_violation


# ---------------------------------------------------------------- power sums


def test_lemma51_examples():
    assert lemma51_property([1, 2, 3], [3, 1, 2], 3)
    assert not lemma51_property([1, 2, 3], [1, 2, 4], 3)
    with pytest.raises(SizeMismatch):
        lemma51_property([1, 2], [1, 2, 3], 3)
    with pytest.raises(ValueError):
        lemma51_property([1, 2, 3], [1, 2, 3], 2)


def test_lemma51_random_permutations():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 8)
        beta = [rng.uniform(-5, 5) for _ in range(n)]
        shuffled = beta[:]
        rng.shuffle(shuffled)
        assert lemma51_property(beta, sorted(shuffled), n)
        bad = beta[:]
        bad[rng.randrange(n)] += rng.choice((-1, 1)) * rng.uniform(10 * 1e-9 * 1.01, 1.0)
        # equal power sums would make the perturbed multiset a permutation of beta
        if sorted(bad) != sorted(beta):
            assert not lemma51_property(beta, bad, n)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(-6, 6), min_size=1, max_size=6),
    st.lists(st.integers(-6, 6), min_size=1, max_size=6),
)
def test_lemma51_matches_multiset_equality(a, b):
    if len(a) != len(b):
        return
    assert lemma51_property(a, b, len(a)) == (sorted(a) == sorted(b))


# ---------------------------------------------------------------- search


def test_search_c4():
    found = search_isospectral(standard_graph("cycle"), 50)
    assert [alphas for alphas, _ in found] == [(-2.0, 2.0, -2.0, 2.0)]
    assert found[0][1].isospectral


def test_search_lasso():
    found = search_isospectral(lasso(1, 2, 3), LASSO_CUTOFF)
    assert [alphas for alphas, _ in found] == [(2.0, 9.0, 2.0)]


def test_search_lasso_two_partners():
    # a=1, b=3, c=5 satisfies 2b = a + c
    g = lasso(1, 3, 5)
    found = {alphas for alphas, _ in search_isospectral(g, LASSO_CUTOFF)}
    assert (3.0, 15.0, 2.0) in found  # (b, c, a)
    for alphas in found:
        assert necessary_check(g, g.with_couplings(alphas)).passed


def test_search_is_symmetric():
    g = standard_graph("cycle")
    for alphas, _ in search_isospectral(g, 50):
        back = [a for a, _ in search_isospectral(g.with_couplings(alphas), 50)]
        assert g.couplings in back
    g = lasso(1, 2, 3)
    back = [a for a, _ in search_isospectral(g.with_couplings((2, 9, 2)), LASSO_CUTOFF)]
    assert (1.0, 6.0, 6.0) in back


@pytest.mark.parametrize("name", ["cycle", "lasso", "star", "chain_a4"])
def test_prescreen_does_not_change_results(name):
    g = standard_graph(name)
    cutoff = LASSO_CUTOFF if name == "lasso" else 50
    with_screen = [a for a, _ in search_isospectral(g, cutoff)]
    without = [a for a, _ in search_isospectral(g, cutoff, prescreen=False)]
    assert with_screen == without


def test_prescreen_accepts_isospectral_pairs():
    assert determinant_ratio_constant(standard_graph("cycle"), standard_graph("cycle", alphas=(-2, 2, -2, 2)))
    assert determinant_ratio_constant(lasso(1, 2, 3), standard_graph("lasso", alphas=(2, 9, 2)))
    assert not determinant_ratio_constant(standard_graph("star"), standard_graph("star", alphas=(1, 1, 2, 1)))


def test_star_uniqueness_spot_check():
    rng = random.Random(11)
    g = standard_graph("star")
    for _ in range(100):
        alphas = [rng.uniform(-5, 5) for _ in range(4)]
        assert search_isospectral(g.with_couplings(alphas), 40) == []


def test_a4_nonzero_internal_couplings():
    rng = random.Random(12)
    g = standard_graph("chain_a4")
    for _ in range(20):
        alphas = [rng.uniform(-5, 5) for _ in range(4)]
        assert search_isospectral(g.with_couplings(alphas), 40) == []


def test_odd_cycle_spot_check():
    rng = random.Random(13)
    g = standard_graph("cycle", size=3)
    for _ in range(10):
        alphas = [rng.uniform(-5, 5) for _ in range(3)]
        assert search_isospectral(g.with_couplings(alphas), 40) == []


def test_found_pairs_satisfy_traces_exactly():
    for g, cutoff in ((standard_graph("cycle"), 200), (lasso(1, 2, 3), LASSO_CUTOFF)):
        found = search_isospectral(g, cutoff)
        assert found
        for alphas, _ in found:
            partner = g.with_couplings(alphas)
            assert trace_report(g, partner, 6).max_residual < 1e-12
            assert necessary_check(g, partner).passed


def test_candidates_keep_deltaprime_zero_pattern():
    g = standard_graph("example_3_4", alphas=(1, 2, 0, 4))
    for alphas in _candidates(g):
        assert alphas[2] == 0.0 and alphas[3] != 0.0


def test_search_errors():
    with pytest.raises(SearchSpaceTooLarge):
        search_isospectral(standard_graph("star", size=MAX_SEARCH_VERTICES), 10)
    with pytest.raises(InfiniteCoupling):
        search_isospectral(standard_graph("star", alphas=(1, 1, 1, "inf")), 10)


def test_search_with_reference_spectrum():
    g = standard_graph("cycle")
    ref = find_spectrum(g, 50)
    assert search_isospectral(g, 50, reference=ref) == search_isospectral(g, 50)


# ---------------------------------------------------------------- decoupling


@pytest.mark.parametrize(
    "g",
    [
        standard_graph("star", alphas=(1, 1, 1, 1)),
        standard_graph("cycle", alphas=(1, 1, 1, 1)),
        standard_graph("interval", types=("delta_prime",) * 2, alphas=(1, 1)),
        standard_graph("cycle", size=2, types=("delta_prime",) * 2, alphas=(1, 1)),
    ],
)
def test_decoupled_differs(g):
    rep = decoupled_isospectrality_check(g, 30)
    assert rep.verdict == "different"
    assert rep.first_mismatch is not None


def test_decoupled_errors():
    with pytest.raises(MixedTypes):
        decoupled_isospectrality_check(standard_graph("example_3_4"), 30)
    with pytest.raises(ValueError):
        decoupled_isospectrality_check(standard_graph("star", alphas=(1, 0, 1, 1)), 30)
