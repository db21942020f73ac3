import numpy as np
import pytest

from qgraph_iso.errors import MeshTooCoarse
from qgraph_iso.fd import convergence_order, fd_spectrum, fd_spectrum_below
from qgraph_iso.graph import FIXTURE_NAMES, standard_graph
from qgraph_iso.spectrum import Method, find_spectrum


def test_neumann_interval():
    s = fd_spectrum(standard_graph("interval"), 256, 5)
    assert s.method is Method.FINITE_DIFFERENCE
    np.testing.assert_allclose(s.values, [0, 1, 4, 9, 16], atol=1e-3)
    order, _, _ = convergence_order(standard_graph("interval"), [0, 1, 4, 9, 16])
    assert order == pytest.approx(2.0, abs=0.05)


def test_dirichlet_interval():
    s = fd_spectrum(standard_graph("interval", types=("delta_prime",) * 2), 256, 4)
    np.testing.assert_allclose(s.values, [1, 4, 9, 16], atol=1e-3)


def test_mesh_too_coarse():
    with pytest.raises(MeshTooCoarse):
        fd_spectrum(standard_graph("interval"), 8, 3)
    with pytest.raises(ValueError):
        fd_spectrum(standard_graph("interval"), 32, 0)


@pytest.mark.parametrize(
    "name,kw",
    [("lasso", {}), ("star", {"alphas": (0, 0, 0, 0)}), ("example_3_4", {}), ("cycle", {}), ("chain_a4", {})],
)
def test_agrees_with_edge_secular_to_h2(name, kw):
    g = standard_graph(name, **kw)
    exact = find_spectrum(g, 400).expanded()[:10]
    mesh = 256
    fd = fd_spectrum(g, mesh, 10).expanded()[:10]
    h = 1.0 / mesh
    for a, b in zip(fd, exact):
        assert abs(a - b) <= max(1.0, b * b) * h * h


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_observed_order(name):
    g = standard_graph(name)
    exact = find_spectrum(g, 400).expanded()[:10]
    order, e1, e2 = convergence_order(g, exact)
    assert 1.7 <= order <= 2.3
    assert e2 < e1


def test_below_cutoff():
    g = standard_graph("lasso")
    s = fd_spectrum_below(g, 128, 50.0)
    exact = find_spectrum(g, 50.0)
    assert len(s.values) == len(exact.values)
    assert s.lambda_max == 50.0


def test_sparse_path_matches_dense():
    g = standard_graph("star", size=8)
    sparse = fd_spectrum(g, 160, 6)  # > 3000 unknowns
    assert sparse.params["unknowns"] > 3000
    exact = find_spectrum(g, 60).expanded()[:6]
    np.testing.assert_allclose(sparse.expanded()[:6], exact, rtol=1e-3, atol=1e-4)
