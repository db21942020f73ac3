"""Entire secular determinant assembled from per-edge fundamental solutions.

On edge ``j`` a solution of ``-f'' = lambda f`` is written
``f = a_j c(x) + b_j s(x)`` with ``c = cos(mu x)`` and ``s = sin(mu x) / mu``.
Both are entire in lambda, so the ``2n x 2n`` matching matrix is finite
everywhere, including at poles of the M-matrix and at ``lambda = 0``.

Rows per vertex (endpoints ordered by edge id, left before right):

* delta, finite alpha: ``gamma - 1`` value-continuity rows and
  ``sum dn f - (alpha / gamma) sum f = 0``
* delta, infinite: continuity rows and ``f(anchor) = 0``
* delta', finite alpha: ``gamma - 1`` derivative-equality rows and
  ``sum f + (alpha / gamma) sum dn f = 0``
* delta', infinite: equality rows and ``dn f(anchor) = 0``

For ``lambda = -kappa^2 < 0`` the default (``scaled=True``) returns the
determinant multiplied by ``prod_j exp(-kappa l_j)``.  Edges with
``kappa l > 1`` are then represented in the bounded basis
``exp(-kappa x), exp(-kappa (l - x))`` (rescaled so that the overall factor
is exactly the stated one), which keeps the matrix well conditioned for
large ``kappa``.  The zero set is unaffected.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import RankTolDegenerate, ScaledOverflow
from .graph import DELTA, MarkedGraph, is_infinite
from .point import SpectralPoint, as_point

_EXP_SWITCH = 1.0  # kappa * l above which the exponential basis is used


@dataclass(frozen=True)
class EdgeBasisValues:
    """Endpoint data of the two basis solutions on every edge.

    ``data[j]`` is a 4x2 array: rows (value at 0, dn at 0, value at l,
    dn at l), columns the two basis functions.  ``scale_note`` names the
    factor the determinant carries relative to the plain ``{c, s}`` basis.
    """

    at: SpectralPoint
    data: np.ndarray
    scale_note: str


@dataclass(frozen=True)
class MatchingSystem:
    at: SpectralPoint
    matrix: np.ndarray
    row_labels: tuple[str, ...]
    scale_note: str


@dataclass(frozen=True)
class _Template:
    p_val: np.ndarray
    p_der: np.ndarray
    labels: tuple[str, ...]
    lengths: np.ndarray


@lru_cache(maxsize=256)
def _template(g: MarkedGraph) -> _Template:
    size = 2 * g.num_edges
    p_val = np.zeros((size, size))
    p_der = np.zeros((size, size))
    labels: list[str] = []
    r = 0
    for k in range(g.num_vertices):
        eps = [2 * e + side for e, side in g.endpoints(k)]
        gamma = len(eps)
        alpha = g.couplings[k]
        is_delta = g.vertex_types[k] == DELTA
        chain = p_val if is_delta else p_der
        for i in range(gamma - 1):
            chain[r, eps[i]] += 1.0
            chain[r, eps[i + 1]] -= 1.0
            labels.append(f"V{k}: {'f' if is_delta else 'dn f'}[{i}] - {'f' if is_delta else 'dn f'}[{i + 1}] = 0")
            r += 1
        if is_infinite(alpha):
            (p_val if is_delta else p_der)[r, eps[0]] = 1.0
            labels.append(f"V{k}: {'f' if is_delta else 'dn f'}[anchor] = 0")
        elif is_delta:
            for e in eps:
                p_der[r, e] += 1.0
                p_val[r, e] -= alpha / gamma
            labels.append(f"V{k}: sum dn f - ({alpha:g}/{gamma}) sum f = 0")
        else:
            for e in eps:
                p_val[r, e] += 1.0
                p_der[r, e] += alpha / gamma
            labels.append(f"V{k}: sum f + ({alpha:g}/{gamma}) sum dn f = 0")
        r += 1
    assert r == size
    return _Template(p_val, p_der, tuple(labels), np.asarray(g.lengths, dtype=float))


def _endpoint_data_real(lams: np.ndarray, lengths: np.ndarray, scaled: bool) -> np.ndarray:
    """Endpoint data, shape (K, n, 4, 2), for real lambdas."""
    lam = lams[:, None]
    L = lengths[None, :]
    pos = lam > 0
    neg = lam < 0
    m = np.sqrt(np.where(pos, lam, 0.0))
    k = np.sqrt(np.where(neg, -lam, 0.0))
    kl = k * L
    if not scaled and np.any(kl > 700):
        raise ScaledOverflow("kappa * l too large for the unscaled determinant; use scaled=True")
    if np.any(kl > 1e8):
        raise ScaledOverflow("kappa * l exceeds the scaled representation range (1e8)")
    kl_safe = np.minimum(kl, 700.0)
    ml = m * L
    with np.errstate(divide="ignore", invalid="ignore"):
        s_pos = np.sin(ml) / np.where(pos, m, 1.0)
        s_neg = np.sinh(kl_safe) / np.where(neg, k, 1.0)
    c = np.where(pos, np.cos(ml), np.where(neg, np.cosh(kl_safe), 1.0))
    s = np.where(pos, s_pos, np.where(neg, s_neg, np.broadcast_to(L, c.shape)))
    lam_b = np.broadcast_to(lam, c.shape)

    data = np.zeros(c.shape + (4, 2))
    data[..., 0, 0] = 1.0
    data[..., 2, 0] = c
    data[..., 3, 0] = lam_b * s
    data[..., 1, 1] = 1.0
    data[..., 2, 1] = s
    data[..., 3, 1] = -c

    if scaled:
        small = neg & (kl <= _EXP_SWITCH)
        big = neg & (kl > _EXP_SWITCH)
        if np.any(small):
            data[small] *= np.exp(-kl[small] / 2)[:, None, None]
        if np.any(big):
            kb = np.broadcast_to(k, kl.shape)[big]
            E = np.exp(-kl[big])
            r = 1.0 / np.sqrt(2.0 * kb)
            blk = np.empty((kb.size, 4, 2))
            # exp(-kappa x)
            blk[:, 0, 0] = 1.0
            blk[:, 1, 0] = -kb
            blk[:, 2, 0] = E
            blk[:, 3, 0] = kb * E
            # exp(-kappa (l - x))
            blk[:, 0, 1] = E
            blk[:, 1, 1] = kb * E
            blk[:, 2, 1] = 1.0
            blk[:, 3, 1] = -kb
            data[big] = blk * r[:, None, None]
    return data


def _endpoint_data_complex(mu: complex, lengths: np.ndarray) -> np.ndarray:
    lam = mu * mu
    data = np.zeros((1, lengths.size, 4, 2), dtype=complex)
    for j, l in enumerate(lengths):
        z = mu * l
        c = cmath.cos(z)
        s = cmath.sin(z) / mu if mu != 0 else complex(l)
        data[0, j] = [[1, 0], [0, 1], [c, s], [lam * s, -c]]
    return data


def basis_values(g: MarkedGraph, p: SpectralPoint | complex | float, scaled: bool = True) -> EdgeBasisValues:
    p = as_point(p)
    lengths = np.asarray(g.lengths, dtype=float)
    if p.is_real:
        data = _endpoint_data_real(np.array([float(p.lam)]), lengths, scaled)[0]
        note = "prod_j exp(-kappa l_j)" if (scaled and p.lam < 0) else "none"
    else:
        data = _endpoint_data_complex(p.mu, lengths)[0]
        note = "none"
    return EdgeBasisValues(p, data, note)


def _assemble(t: _Template, data: np.ndarray) -> np.ndarray:
    """Matching matrices, shape (K, 2n, 2n), from endpoint data (K, n, 4, 2)."""
    K, n = data.shape[:2]
    V = np.zeros((K, 2 * n, 2 * n), dtype=data.dtype)
    D = np.zeros_like(V)
    for j in range(n):
        cols = slice(2 * j, 2 * j + 2)
        V[:, 2 * j, cols] = data[:, j, 0, :]
        D[:, 2 * j, cols] = data[:, j, 1, :]
        V[:, 2 * j + 1, cols] = data[:, j, 2, :]
        D[:, 2 * j + 1, cols] = data[:, j, 3, :]
    return t.p_val @ V + t.p_der @ D


def matching_system(g: MarkedGraph, p: SpectralPoint | complex | float, scaled: bool = True) -> MatchingSystem:
    t = _template(g)
    bv = basis_values(g, p, scaled)
    A = _assemble(t, bv.data[None])[0]
    return MatchingSystem(bv.at, A, t.labels, bv.scale_note)


def secular_edge(g: MarkedGraph, p: SpectralPoint | complex | float, scaled: bool = True):
    """Determinant of the matching system (float for real lambda)."""
    ms = matching_system(g, p, scaled)
    val = np.linalg.det(ms.matrix)
    return float(val) if ms.matrix.dtype == float else complex(val)


def secular_edge_many(g: MarkedGraph, lams: Sequence[float], scaled: bool = True) -> np.ndarray:
    """Vectorised :func:`secular_edge` over real lambdas."""
    t = _template(g)
    data = _endpoint_data_real(np.asarray(lams, dtype=float), t.lengths, scaled)
    return np.linalg.det(_assemble(t, data))


def singular_values(g: MarkedGraph, p: SpectralPoint | complex | float, scaled: bool = True) -> np.ndarray:
    return np.linalg.svd(matching_system(g, p, scaled).matrix, compute_uv=False)


def nullspace_dimension(g: MarkedGraph, p: SpectralPoint | complex | float, rank_tol: float = 1e-6) -> int:
    """Number of singular values below ``rank_tol * sigma_max``; the eigenvalue multiplicity at a root."""
    sv = singular_values(g, p)
    if sv[0] == 0:
        raise RankTolDegenerate("matching matrix is identically zero")
    return int(np.sum(sv < rank_tol * sv[0]))


# --------------------------------------------------------------------------
# single-edge boundary value problems
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeSolution:
    """Solution ``a c + b s`` of one edge problem and its endpoint data."""

    a: complex
    b: complex
    value_left: complex
    dn_left: complex
    value_right: complex
    dn_right: complex


def edge_solution(
    mu: complex,
    length: float,
    left: tuple[str, complex],
    right: tuple[str, complex],
) -> EdgeSolution:
    """Solve ``-f'' = mu^2 f`` on ``[0, length]`` with one datum per end.

    Each datum is ``("value", v)`` or ``("dn", d)``; ``dn`` is the normal
    derivative pointing into the edge.
    """
    mu = complex(mu)
    lam = mu * mu
    z = mu * length
    c = cmath.cos(z)
    s = cmath.sin(z) / mu if mu != 0 else complex(length)
    rows = {
        ("value", 0): [1.0, 0.0],
        ("dn", 0): [0.0, 1.0],
        ("value", 1): [c, s],
        ("dn", 1): [lam * s, -c],
    }
    for kind, _ in (left, right):
        if kind not in ("value", "dn"):
            raise ValueError(f"boundary datum kind must be 'value' or 'dn', got {kind!r}")
    A = np.array([rows[(left[0], 0)], rows[(right[0], 1)]], dtype=complex)
    rhs = np.array([left[1], right[1]], dtype=complex)
    a, b = np.linalg.solve(A, rhs)
    return EdgeSolution(
        complex(a),
        complex(b),
        complex(a),
        complex(b),
        complex(a * c + b * s),
        complex(a * lam * s - b * c),
    )
