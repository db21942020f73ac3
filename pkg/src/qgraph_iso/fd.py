"""Independent discretisation of the graph Laplacian (the FD oracle).

Each edge carries a uniform mesh.  The operator is discretised through its
quadratic form with piecewise-linear elements and a lumped (diagonal) mass
matrix, which in the interior of an edge is the three-point central
difference.  Vertex conditions enter the form:

* delta, finite alpha: one shared node, form term ``alpha |f(v)|^2``;
* delta, infinite: the shared node is removed (``f(v) = 0``);
* delta', finite alpha != 0: one node per endpoint, form term
  ``-(1/alpha) |sum f|^2``; equality of normal derivatives is natural;
* delta', alpha = 0: constraint ``sum f = 0`` (anchor node eliminated);
* delta', infinite: nothing to add (zero normal derivatives are natural).

The pencil ``K u = lambda W u`` is symmetric with ``W`` positive definite,
and the eigenvalue error is O(h^2).
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshTooCoarse
from .graph import DELTA, MarkedGraph, is_infinite
from .spectrum import Method, Spectrum, default_kappa_max

MIN_MESH = 16
_DENSE_LIMIT = 3000


def _assemble(g: MarkedGraph, mesh_per_unit: int):
    """Stiffness, lumped mass and reduction matrix; returns (K, W, Z, h_max)."""
    node_of_vertex: dict[int, int] = {}
    n_nodes = 0

    def new_node() -> int:
        nonlocal n_nodes
        n_nodes += 1
        return n_nodes - 1

    for k, t in enumerate(g.vertex_types):
        if t == DELTA:
            node_of_vertex[k] = new_node()

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    mass: dict[int, float] = {}
    endpoint_node: dict[tuple[int, int], int] = {}
    h_max = 0.0

    def end_node(e, side: int) -> int:
        k = e.left if side == 0 else e.right
        if g.vertex_types[k] == DELTA:
            return node_of_vertex[k]
        node = new_node()
        endpoint_node[(e.id, side)] = node
        return node

    for e in g.edges:
        m = max(2, int(round(e.length * mesh_per_unit)))
        h = e.length / m
        h_max = max(h_max, h)
        chain = [end_node(e, 0)] + [new_node() for _ in range(m - 1)] + [end_node(e, 1)]
        for a, b in zip(chain[:-1], chain[1:]):
            rows += [a, a, b, b]
            cols += [a, b, a, b]
            vals += [1 / h, -1 / h, -1 / h, 1 / h]
            mass[a] = mass.get(a, 0.0) + h / 2
            mass[b] = mass.get(b, 0.0) + h / 2

    removed: set[int] = set()
    eliminate: list[tuple[int, list[int]]] = []
    for k, (t, alpha) in enumerate(zip(g.vertex_types, g.couplings)):
        if t == DELTA:
            v = node_of_vertex[k]
            if is_infinite(alpha):
                removed.add(v)
            elif alpha != 0:
                rows.append(v)
                cols.append(v)
                vals.append(alpha)
            continue
        nodes = [endpoint_node[ep] for ep in g.endpoints(k)]
        if is_infinite(alpha):
            continue
        if alpha == 0:
            eliminate.append((nodes[0], nodes[1:]))
            continue
        for a in nodes:
            for b in nodes:
                rows.append(a)
                cols.append(b)
                vals.append(-1.0 / alpha)

    K = sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))
    W = sp.diags([mass[i] for i in range(n_nodes)]).tocsr()

    # reduction u = Z v onto the admissible subspace
    dropped = set(removed) | {anchor for anchor, _ in eliminate}
    keep = [i for i in range(n_nodes) if i not in dropped]
    col_of = {node: c for c, node in enumerate(keep)}
    zr, zc, zv = [], [], []
    for node in keep:
        zr.append(node)
        zc.append(col_of[node])
        zv.append(1.0)
    for anchor, others in eliminate:
        for node in others:
            zr.append(anchor)
            zc.append(col_of[node])
            zv.append(-1.0)
    Z = sp.csr_matrix((zv, (zr, zc)), shape=(n_nodes, len(keep)))
    return K, W, Z, h_max


def _cluster(values: np.ndarray, h: float) -> list[tuple[float, int]]:
    out: list[list[float]] = []
    for lam in values:
        tol = 1e-2 * h * h * max(1.0, abs(lam))
        if out and abs(lam - out[-1][-1]) <= tol:
            out[-1].append(float(lam))
        else:
            out.append([float(lam)])
    return [(float(np.mean(c)), len(c)) for c in out]


def fd_spectrum(g: MarkedGraph, mesh_per_unit: int, count: int) -> Spectrum:
    """Lowest ``count`` eigenvalues (with multiplicity) of the discretised operator."""
    if mesh_per_unit < MIN_MESH:
        raise MeshTooCoarse(f"mesh_per_unit must be >= {MIN_MESH}, got {mesh_per_unit}")
    if count < 1:
        raise ValueError("count must be >= 1")
    K, W, Z, h = _assemble(g, mesh_per_unit)
    Kr = (Z.T @ K @ Z).tocsc()
    Wr = (Z.T @ W @ Z).tocsc()
    size = Kr.shape[0]
    want = min(size, count + 4)
    if size <= _DENSE_LIMIT or want >= size - 1:
        lams = scipy.linalg.eigh(
            Kr.toarray(), Wr.toarray(), eigvals_only=True, subset_by_index=[0, want - 1]
        )
    else:
        shift = -(default_kappa_max(g) ** 2) - 1.0
        lams = spla.eigsh(Kr, k=want, M=Wr, sigma=shift, which="LM", return_eigenvectors=False)
    lams = np.sort(lams)
    clusters = _cluster(lams, h)
    kept: list[tuple[float, int]] = []
    total = 0
    for lam, mult in clusters:
        if total >= count:
            break
        kept.append((lam, mult))
        total += mult
    params = {"mesh_per_unit": mesh_per_unit, "count": count, "h_max": h, "unknowns": size}
    return Spectrum(tuple(kept), kept[-1][0], Method.FINITE_DIFFERENCE, params)


def convergence_order(
    g: MarkedGraph, reference: list[float], meshes: tuple[int, int] = (128, 256)
) -> tuple[float, float, float]:
    """Observed order ``log2(err_coarse / err_fine)`` against reference eigenvalues.

    ``reference`` is the expanded list (with multiplicity) of the lowest
    eigenvalues; returns ``(order, err_coarse, err_fine)`` in the 2-norm.
    """
    ref = np.asarray(reference, dtype=float)
    errs = []
    for mesh in meshes:
        approx = np.asarray(fd_spectrum(g, mesh, ref.size).expanded()[: ref.size])
        errs.append(float(np.linalg.norm(approx - ref)))
    ratio = meshes[1] / meshes[0]
    return math.log(errs[0] / errs[1]) / math.log(ratio), errs[0], errs[1]


def fd_spectrum_below(g: MarkedGraph, mesh_per_unit: int, lambda_max: float) -> Spectrum:
    """All discrete eigenvalues up to ``lambda_max`` (count grown until the cutoff is passed)."""
    count = int(g.total_length * math.sqrt(max(lambda_max, 0.0)) / math.pi) + g.num_vertices + g.num_edges + 4
    while True:
        spec = fd_spectrum(g, mesh_per_unit, count)
        if spec.eigenvalues[-1][0] > lambda_max or count >= spec.params["unknowns"]:
            break
        count *= 2
    return Spectrum(spec.below(lambda_max).eigenvalues, float(lambda_max), spec.method, spec.params)
