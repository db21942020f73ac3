"""Weyl-Titchmarsh M-matrix of a marked graph and the vertex secular function.

The boundary maps are normalised per vertex: at a delta vertex the
boundary value is the common vertex value and the boundary derivative the
sum of normal derivatives; at a delta-prime vertex the roles swap (common
normal derivative, minus the sum of values).  With this choice the
coupling matrix is ``B = diag(alpha)`` and an eigenvalue off the poles of
``M`` is a zero of ``det(B - M(lambda))``.

Entries are built from the per-edge Dirichlet/Neumann responses:

* delta vertex, diagonal: ``-mu (sum_same cot(mu l) - sum_mixed tan(mu l) - 2 sum_loops tan(mu l / 2))``
* delta-prime vertex, diagonal: ``-(1/mu) (sum_same cot - sum_mixed tan + 2 sum_loops cot(mu l / 2))``
* delta/delta off-diagonal ``mu sum csc``, delta'/delta' ``-(1/mu) sum csc``,
  mixed ``-sum sec``; zero between non-adjacent vertices.

Real lambda is evaluated in real arithmetic (hyperbolic forms below zero,
series limits at zero); complex lambda uses bounded exponential forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DivisionNearZero, GraphValidationError, InfiniteCoupling, PoleProximity
from .graph import DELTA, MarkedGraph, incidence_sets
from .point import SpectralPoint, as_point

EPS_POLE = 1e-8



# --------------------------------------------------------------------------
# scalar kernels, real lambda
# --------------------------------------------------------------------------


def _mu_cot(lam: float, l: float) -> float:
    if lam > 0:
        m = math.sqrt(lam)
        return m * math.cos(m * l) / math.sin(m * l)
    if lam < 0:
        k = math.sqrt(-lam)
        return k / math.tanh(k * l)
    return 1.0 / l


def _mu_csc(lam: float, l: float) -> float:
    if lam > 0:
        m = math.sqrt(lam)
        return m / math.sin(m * l)
    if lam < 0:
        k = math.sqrt(-lam)
        x = k * l
        return 2.0 * k * math.exp(-x) if x > 700 else k / math.sinh(x)
    return 1.0 / l


def _mu_tan(lam: float, l: float) -> float:
    if lam > 0:
        m = math.sqrt(lam)
        return m * math.tan(m * l)
    if lam < 0:
        k = math.sqrt(-lam)
        return -k * math.tanh(k * l)
    return 0.0


def _sec(lam: float, l: float) -> float:
    if lam > 0:
        return 1.0 / math.cos(math.sqrt(lam) * l)
    if lam < 0:
        x = math.sqrt(-lam) * l
        return 2.0 * math.exp(-x) if x > 700 else 1.0 / math.cosh(x)
    return 1.0


def _tan_over_mu(lam: float, l: float) -> float:
    if lam > 0:
        m = math.sqrt(lam)
        return math.tan(m * l) / m
    if lam < 0:
        k = math.sqrt(-lam)
        return math.tanh(k * l) / k
    return l


def _cot_over_mu(lam: float, l: float) -> float:
    if lam > 0:
        m = math.sqrt(lam)
        return math.cos(m * l) / (m * math.sin(m * l))
    if lam < 0:
        k = math.sqrt(-lam)
        return -1.0 / (k * math.tanh(k * l))
    raise PoleProximity("cot(mu l)/mu has a pole at lambda = 0", 0.0)


def _csc_over_mu(lam: float, l: float) -> float:
    if lam > 0:
        m = math.sqrt(lam)
        return 1.0 / (m * math.sin(m * l))
    if lam < 0:
        k = math.sqrt(-lam)
        x = k * l
        return -2.0 * math.exp(-x) / k if x > 700 else -1.0 / (k * math.sinh(x))
    raise PoleProximity("csc(mu l)/mu has a pole at lambda = 0", 0.0)


# --------------------------------------------------------------------------
# complex kernels; w = exp(+-i z) keeps every intermediate bounded
# --------------------------------------------------------------------------


def _w(z: complex) -> tuple[complex, bool]:
    upper = z.imag >= 0
    return (cmath.exp(1j * z) if upper else cmath.exp(-1j * z)), upper


def ctan(z: complex) -> complex:
    w, upper = _w(z)
    w2 = w * w
    t = -1j * (w2 - 1) / (w2 + 1)
    return t if upper else -t


def ccot(z: complex) -> complex:
    return 1.0 / ctan(z)


def csec(z: complex) -> complex:
    w, _ = _w(z)
    return 2 * w / (1 + w * w)


def ccsc(z: complex) -> complex:
    w, upper = _w(z)
    return 2j * w / (w * w - 1) if upper else 2j * w / (1 - w * w)


# --------------------------------------------------------------------------
# per-graph assembly plan
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    n: int
    delta: tuple[bool, ...]
    diag: tuple[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]], ...]
    pairs: tuple[tuple[int, int, tuple[int, ...]], ...]
    lengths: tuple[float, ...]
    # (period, shift, n_min): poles at mu = (n + shift) * period for n >= n_min
    poles: tuple[tuple[float, float, int], ...]


@lru_cache(maxsize=256)
def _plan(g: MarkedGraph) -> _Plan:
    n = g.num_vertices
    delta = tuple(t == DELTA for t in g.vertex_types)
    diag = []
    poles: set[tuple[float, float, int]] = set()
    for k in range(n):
        inc = incidence_sets(g, k)
        diag.append((inc.same, inc.mixed, inc.loops))
        zero_pole = 0 if not delta[k] else 1
        for t in inc.same:
            poles.add((math.pi / g.edges[t].length, 0.0, zero_pole))
        for t in inc.mixed:
            poles.add((math.pi / g.edges[t].length, 0.5, 0))
        for t in inc.loops:
            period = 2 * math.pi / g.edges[t].length
            poles.add((period, 0.5, 0) if delta[k] else (period, 0.0, 0))
    pairs = []
    for k in range(n):
        for j in range(k + 1, n):
            between = tuple(e.id for e in g.edges if {e.left, e.right} == {k, j})
            if between:
                pairs.append((k, j, between))
                both_prime = not delta[k] and not delta[j]
                for t in between:
                    if delta[k] != delta[j]:
                        poles.add((math.pi / g.edges[t].length, 0.5, 0))
                    else:
                        poles.add((math.pi / g.edges[t].length, 0.0, 0 if both_prime else 1))
    return _Plan(n, delta, tuple(diag), tuple(pairs), g.lengths, tuple(sorted(poles)))


def pole_distance(g: MarkedGraph, p: SpectralPoint | complex | float) -> float:
    """Distance in the mu-plane from ``p`` to the nearest pole of any M entry."""
    p = as_point(p)
    mu = p.mu
    best = math.inf
    for period, shift, n_min in _plan(g).poles:
        centre = math.floor(mu.real / period - shift)
        for cand in (centre - 1, centre, centre + 1, centre + 2):
            if cand < n_min:
                cand = n_min
            best = min(best, abs(mu - (cand + shift) * period))
    return best


def pole_locations(g: MarkedGraph, mu_max: float) -> list[float]:
    """Sorted real mu >= 0 at which some M entry has a pole, up to ``mu_max``."""
    out = set()
    for period, shift, n_min in _plan(g).poles:
        n = n_min
        while (n + shift) * period <= mu_max:
            out.add((n + shift) * period)
            n += 1
    return sorted(out)


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MMatrix:
    at: SpectralPoint
    entries: np.ndarray

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)


def coupling_matrix(g: MarkedGraph) -> np.ndarray:
    if g.has_infinite_coupling:
        raise InfiniteCoupling("B = diag(alpha) needs finite couplings; use the edge formulation")
    return np.diag(np.asarray(g.couplings, dtype=float))


def m_matrix(g: MarkedGraph, p: SpectralPoint | complex | float, eps_pole: float = EPS_POLE) -> MMatrix:
    """Assemble ``M(lambda)``.  Raises :class:`PoleProximity` within ``eps_pole`` of a pole."""
    if g.has_infinite_coupling:
        raise InfiniteCoupling("the M-matrix is only used with finite couplings")
    p = as_point(p)
    dist = pole_distance(g, p)
    if dist < eps_pole:
        raise PoleProximity(f"lambda={p.lam!r} lies {dist:.3g} (in mu) from a pole of M", dist)
    plan = _plan(g)
    ls = plan.lengths
    if p.is_real:
        lam = float(p.lam)
        mu_cot = lambda l: _mu_cot(lam, l)  # noqa: E731
        mu_csc = lambda l: _mu_csc(lam, l)  # noqa: E731
        mu_tan = lambda l: _mu_tan(lam, l)  # noqa: E731
        sec = lambda l: _sec(lam, l)  # noqa: E731
        tan_mu = lambda l: _tan_over_mu(lam, l)  # noqa: E731
        cot_mu = lambda l: _cot_over_mu(lam, l)  # noqa: E731
        csc_mu = lambda l: _csc_over_mu(lam, l)  # noqa: E731
        out = np.zeros((plan.n, plan.n), dtype=float)
    else:
        mu = p.mu
        mu_cot = lambda l: mu * ccot(mu * l)  # noqa: E731
        mu_csc = lambda l: mu * ccsc(mu * l)  # noqa: E731
        mu_tan = lambda l: mu * ctan(mu * l)  # noqa: E731
        sec = lambda l: csec(mu * l)  # noqa: E731
        tan_mu = lambda l: ctan(mu * l) / mu  # noqa: E731
        cot_mu = lambda l: ccot(mu * l) / mu  # noqa: E731
        csc_mu = lambda l: ccsc(mu * l) / mu  # noqa: E731
        out = np.zeros((plan.n, plan.n), dtype=complex)

    for k, (same, mixed, loops) in enumerate(plan.diag):
        if plan.delta[k]:
            out[k, k] = -(
                sum(mu_cot(ls[t]) for t in same)
                - sum(mu_tan(ls[t]) for t in mixed)
                - 2 * sum(mu_tan(ls[t] / 2) for t in loops)
            )
        else:
            out[k, k] = -(
                sum(cot_mu(ls[t]) for t in same)
                - sum(tan_mu(ls[t]) for t in mixed)
                + 2 * sum(cot_mu(ls[t] / 2) for t in loops)
            )
    for k, j, between in plan.pairs:
        if plan.delta[k] and plan.delta[j]:
            val = sum(mu_csc(ls[t]) for t in between)
        elif not plan.delta[k] and not plan.delta[j]:
            val = -sum(csc_mu(ls[t]) for t in between)
        else:
            val = -sum(sec(ls[t]) for t in between)
        out[k, j] = out[j, k] = val
    return MMatrix(p, out)


def secular_vertex(g: MarkedGraph, p: SpectralPoint | complex | float, eps_pole: float = EPS_POLE):
    """``det(B - M(lambda))``; a real float for real lambda."""
    B = coupling_matrix(g)
    M = m_matrix(g, p, eps_pole).entries
    val = np.linalg.det(B - M)
    return float(val) if M.dtype == float else complex(val)


def asymptotic_product(g: MarkedGraph, tau: float) -> float:
    """Leading behaviour of ``det(B - M(-tau^2))`` as ``tau -> +inf``."""
    out = 1.0
    for is_delta, alpha, gamma in zip(_plan(g).delta, g.couplings, g.degrees):
        out *= (alpha + gamma * tau) if is_delta else (alpha - gamma / tau)
    return out


def hadamard_limit(g1: MarkedGraph, g2: MarkedGraph) -> float:
    """Limit of ``det(B1 - M) / det(B2 - M)`` along ``lambda -> -inf``.

    Finite only when the two coupling vectors have the same number of zero
    entries at delta-prime vertices.
    """
    _check_same_skeleton(g1, g2)
    num = den = 1.0
    z1 = z2 = 0
    for is_delta, a1, a2, gamma in zip(_plan(g1).delta, g1.couplings, g2.couplings, g1.degrees):
        if is_delta:
            continue
        if a1 != 0:
            num *= a1
        else:
            num *= gamma
            z1 += 1
        if a2 != 0:
            den *= a2
        else:
            den *= gamma
            z2 += 1
    if z1 != z2:
        return math.inf if z1 < z2 else 0.0
    return num / den


def _check_same_skeleton(g1: MarkedGraph, g2: MarkedGraph) -> None:
    if g1.edges != g2.edges or g1.vertex_types != g2.vertex_types:
        raise GraphValidationError("graphs must share topology, lengths and vertex types")


def hadamard_ratio(
    g1: MarkedGraph, g2: MarkedGraph, tau_grid: Iterable[float]
) -> list[tuple[float, float]]:
    """Sample ``det(B1 - M(-tau^2)) / det(B2 - M(-tau^2))`` on the negative half-line."""
    _check_same_skeleton(g1, g2)
    out = []
    for tau in tau_grid:
        tau = float(tau)
        if not tau > 0:
            raise ValueError("tau values must be positive")
        lam = -tau * tau
        den = secular_vertex(g2, lam)
        if abs(den) < 1e-300:
            raise DivisionNearZero(f"denominator vanishes at tau={tau}")
        out.append((tau, secular_vertex(g1, lam) / den))
    return out

