import cmath
import math
import random

import numpy as np
import pytest

from qgraph_iso.errors import DivisionNearZero, GraphValidationError, InfiniteCoupling, PoleProximity
from qgraph_iso.graph import build_graph, standard_graph
from qgraph_iso.mfunction import (
    asymptotic_product,
    hadamard_limit,
    hadamard_ratio,
    m_matrix,
    pole_distance,
    pole_locations,
    secular_vertex,
)
from qgraph_iso.point import SpectralPoint

from conftest import random_graph
from oracles import example_3_4_closed_form, off_pole

C4_LENGTHS = (1.0, 1.4142135624, 1.7320508076, 2.2360679775)


def test_example_3_4_against_closed_forms():
    g = standard_graph("example_3_4")
    rng = random.Random(7)
    done = 0
    while done < 20:
        lam = rng.uniform(-25, 25)
        if not off_pole(lam, g.lengths):
            continue
        got = m_matrix(g, lam).entries
        want = example_3_4_closed_form(lam, g.lengths)
        assert got.dtype == float
        assert np.max(np.abs(want.imag)) < 1e-12 * max(1.0, np.max(np.abs(want)))
        for j in range(4):
            for k in range(4):
                if want[j, k] == 0:
                    assert got[j, k] == 0
                else:
                    assert abs(got[j, k] - want[j, k].real) <= 1e-10 * abs(want[j, k])
        done += 1


def test_example_3_4_unit_lengths_entries():
    g = standard_graph("example_3_4", lengths=(1, 1, 1, 1))
    lam = 2.0
    mu = math.sqrt(lam)
    M = m_matrix(g, lam).entries
    assert M[0, 1] == pytest.approx(mu / math.sin(mu), rel=1e-13)
    assert M[0, 2] == 0
    assert M[1, 2] == pytest.approx(-2 / math.cos(mu), rel=1e-13)
    assert M[3, 3] == pytest.approx(-(1 / mu) / math.tan(mu), rel=1e-13)


def test_negative_lambda_hyperbolic_values():
    g = build_graph([(0, 1, 1.0)], ["delta"] * 2, [0, 0])
    M = m_matrix(g, -1.0).entries
    assert M[0, 0] == pytest.approx(-1 / math.tanh(1.0), rel=1e-14)
    assert M[0, 0] == pytest.approx(-1.31304, abs=1e-5)
    assert M[0, 1] == pytest.approx(1 / math.sinh(1.0), rel=1e-14)
    assert M[0, 1] == pytest.approx(0.85092, abs=1e-5)
    # same numbers from complex evaluation at mu = i
    mu = 1j
    assert M[0, 0] == pytest.approx((-mu * cmath.cos(mu) / cmath.sin(mu)).real, rel=1e-14)


def test_zero_limit_single_edge():
    g = build_graph([(0, 1, 1.0)], ["delta"] * 2, [0, 0])
    np.testing.assert_array_equal(m_matrix(g, 0.0).entries, [[-1.0, 1.0], [1.0, -1.0]])
    near = m_matrix(g, 1e-9).entries
    np.testing.assert_allclose(near, [[-1.0, 1.0], [1.0, -1.0]], atol=1e-8)


def test_zero_limit_mixed_edge_is_finite():
    g = build_graph([(0, 1, 2.0)], ["delta", "delta_prime"], [1, 1])
    M0 = m_matrix(g, 0.0).entries
    # mu tan(mu l) -> 0, sec -> 1, tan(mu l)/mu -> l
    np.testing.assert_allclose(M0, [[0.0, -1.0], [-1.0, 2.0]], atol=1e-15)
    np.testing.assert_allclose(m_matrix(g, 1e-10).entries, M0, atol=1e-8)
    np.testing.assert_allclose(m_matrix(g, -1e-10).entries, M0, atol=1e-8)


def test_delta_prime_pole_at_zero():
    g = build_graph([(0, 1, 1.0)], ["delta_prime"] * 2, [1, 1])
    with pytest.raises(PoleProximity):
        m_matrix(g, 0.0)


def test_secular_vertex_worked_example():
    g = standard_graph("interval")
    assert secular_vertex(g, 2.25) == pytest.approx(-2.25, rel=1e-12)
    with pytest.raises(PoleProximity) as info:
        secular_vertex(g, 4.0)
    assert info.value.distance < 1e-8


def test_neumann_interval_vertex_zeros():
    g = standard_graph("interval")
    # det(B - M) = -lambda off poles for l = pi, alpha = 0; zero only at 0
    for lam in (0.3, 2.25, 6.1, 12.25):
        assert secular_vertex(g, lam) == pytest.approx(-lam, rel=1e-9)
    assert secular_vertex(g, 0.0) == 0.0


def test_c4_pair_vertex_secular_equal():
    a = standard_graph("cycle", alphas=(2, -2, 2, -2))
    b = standard_graph("cycle", alphas=(-2, 2, -2, 2))
    rng = random.Random(3)
    for _ in range(20):
        lam = rng.uniform(-20, 60)
        if pole_distance(a, lam) < 1e-4:
            continue
        va, vb = secular_vertex(a, lam), secular_vertex(b, lam)
        assert va == pytest.approx(vb, rel=1e-9, abs=1e-12)


def test_infinite_coupling_rejected():
    g = build_graph([(0, 1, 1.0)], ["delta"] * 2, ["inf", 0])
    with pytest.raises(InfiniteCoupling):
        m_matrix(g, 1.0)
    with pytest.raises(InfiniteCoupling):
        secular_vertex(g, 1.0)


def test_symmetry_sparsity_and_realness(rng):
    for _ in range(50):
        g = random_graph(rng)
        adjacent = {(e.left, e.right) for e in g.edges} | {(e.right, e.left) for e in g.edges}
        lam = rng.uniform(-30, 30)
        if pole_distance(g, lam) < 1e-6:
            continue
        M = m_matrix(g, lam).entries
        assert M.dtype == float
        assert np.array_equal(M, M.T)
        for j in range(g.num_vertices):
            for k in range(g.num_vertices):
                if j != k and (j, k) not in adjacent:
                    assert M[j, k] == 0


def test_real_lambda_matches_complex_continuation(rng):
    for _ in range(30):
        g = random_graph(rng)
        lam = rng.uniform(-30, 30)
        if pole_distance(g, lam) < 1e-3:
            continue
        real = m_matrix(g, lam).entries
        cplx = m_matrix(g, complex(lam, 1e-13)).entries
        np.testing.assert_allclose(cplx.real, real, rtol=1e-8, atol=1e-9)


@pytest.mark.parametrize("z", [1j, 1 + 1j, -4 + 0.5j, 3 + 2j, 10 + 0.1j])
def test_herglotz_and_conjugation(rng, z):
    for _ in range(20):
        g = random_graph(rng)
        M = m_matrix(g, z).entries
        assert np.linalg.eigvalsh(M.imag).min() > 0
        np.testing.assert_allclose(m_matrix(g, z.conjugate()).entries, M.conj(), rtol=0, atol=1e-12)
        np.testing.assert_array_equal(M, M.T)


def test_matrix_is_read_only():
    M = m_matrix(standard_graph("star"), 1.0).entries
    with pytest.raises(ValueError):
        M[0, 0] = 1.0


def test_spectral_point_branch():
    p = SpectralPoint.from_lambda(-4.0)
    assert p.mu == 2j and p.kappa == 2.0 and p.tau == pytest.approx(2.0)
    for lam in (3 + 4j, -3 - 4j, -1e-3 + 1e-9j, 2.0):
        q = SpectralPoint.from_lambda(lam)
        assert q.mu.imag >= 0
        assert abs(q.mu**2 - lam) <= 1e-14 * abs(lam)
    with pytest.raises(ValueError):
        SpectralPoint.from_lambda(math.nan)


def test_pole_locations_and_distance():
    g = standard_graph("interval", lengths=(1.0,))
    poles = pole_locations(g, 10.0)
    assert poles == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi])
    assert pole_distance(g, math.pi**2) == pytest.approx(0.0, abs=1e-12)
    mixed = build_graph([(0, 1, 1.0)], ["delta", "delta_prime"], [0, 0])
    assert pole_locations(mixed, 5.0) == pytest.approx([math.pi / 2, 3 * math.pi / 2])


@pytest.mark.parametrize("name", ["star", "cycle", "example_3_4", "lasso", "chain_a4"])
def test_asymptotic_product(name):
    g = standard_graph(name)
    tau = 50.0
    ratio = secular_vertex(g, -tau * tau) / asymptotic_product(g, tau)
    assert ratio == pytest.approx(1.0, rel=1e-4)


def test_hadamard_ratio_c4_pair():
    a = standard_graph("cycle", alphas=(2, -2, 2, -2))
    b = standard_graph("cycle", alphas=(-2, 2, -2, 2))
    samples = hadamard_ratio(a, b, [5, 10, 20])
    for _, r in samples:
        assert r == pytest.approx(1.0, abs=1e-6)
    assert hadamard_limit(a, b) == 1.0


def test_hadamard_ratio_identity_and_non_constant():
    g = standard_graph("star")
    assert all(r == 1.0 for _, r in hadamard_ratio(g, g, [1, 3, 9]))
    h = g.with_couplings((2, 2, 2, 2))
    rs = [r for _, r in hadamard_ratio(g, h, [1, 2, 5, 10, 20])]
    assert max(rs) - min(rs) > 1e-3


def test_hadamard_limit_delta_prime():
    g = standard_graph("example_3_4")
    h = g.with_couplings((1, 2, 6, 8))
    assert hadamard_limit(g, h) == pytest.approx(3 * 4 / (6 * 8))
    r = hadamard_ratio(g, h, [2000.0])[0][1]
    assert r == pytest.approx(hadamard_limit(g, h), rel=1e-2)
    z = g.with_couplings((1, 2, 0, 4))
    assert hadamard_limit(g, z) == math.inf


def test_hadamard_ratio_errors():
    a = standard_graph("star")
    with pytest.raises(GraphValidationError):
        hadamard_ratio(a, standard_graph("cycle"), [1.0])
    with pytest.raises(ValueError):
        hadamard_ratio(a, a, [0.0])


def test_hadamard_ratio_division_guard(monkeypatch):
    from qgraph_iso import mfunction

    g = standard_graph("star")
    h = g.with_couplings((2, 2, 2, 2))
    real = mfunction.secular_vertex
    monkeypatch.setattr(mfunction, "secular_vertex", lambda gg, lam: 0.0 if gg is h else real(gg, lam))
    with pytest.raises(DivisionNearZero):
        hadamard_ratio(g, h, [3.0])
