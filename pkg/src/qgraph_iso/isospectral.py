"""Trace identities, sigma multisets and the search for isospectral couplings.

For a coupling vector the scaled constants are

    sigma_k = -alpha_k / gamma_k      at delta vertices,
    sigma_k =  gamma_k / alpha_k      at delta' vertices with alpha_k != 0,
    sigma_k =  0                      at delta' vertices with alpha_k == 0.

Isospectral couplings on the same graph have equal power sums of the
non-trivial sigmas, hence (Newton) equal sigma multisets, and the same number
of zero couplings at delta' vertices.  These are necessary conditions only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InfiniteCoupling, MixedTypes, SearchSpaceTooLarge, SizeMismatch
from .graph import DELTA, MarkedGraph
from .mfunction import secular_vertex
from .spectrum import ComparisonReport, ScanConfig, Spectrum, compare_spectra, find_spectrum

MAX_SEARCH_VERTICES = 8

# complex points for the determinant-ratio prescreen (away from the real axis)
PRESCREEN_POINTS = (1j, 3 + 2j, -2 + 1j, 10 + 5j)


def _require_finite(g: MarkedGraph) -> None:
    if g.has_infinite_coupling:
        raise InfiniteCoupling("infinite couplings have no trace / sigma representation")


def _sigma_terms(g: MarkedGraph) -> list[Fraction]:
    """Exact non-trivial sigma values (zero delta' couplings contribute nothing)."""
    out = []
    for t, alpha, gamma in zip(g.vertex_types, g.couplings, g.degrees):
        if t == DELTA:
            out.append(-Fraction(alpha) / gamma)
        elif alpha != 0:
            out.append(Fraction(gamma) / Fraction(alpha))
    return out


def trace_sum_exact(g: MarkedGraph, m: int) -> Fraction:
    _require_finite(g)
    if m < 1:
        raise ValueError("m must be >= 1")
    return sum((s**m for s in _sigma_terms(g)), Fraction(0))


def trace_sum(g: MarkedGraph, m: int) -> float:
    """Power sum ``sum (-alpha/gamma)^m + sum (gamma/alpha)^m`` (exact, then rounded)."""
    return float(trace_sum_exact(g, m))


@dataclass(frozen=True)
class TraceRow:
    m: int
    lhs_sum: float
    rhs_sum: float
    residual: float


@dataclass(frozen=True)
class TraceReport:
    rows: tuple[TraceRow, ...]

    @property
    def max_residual(self) -> float:
        return max(abs(r.residual) for r in self.rows)


def trace_report(g1: MarkedGraph, g2: MarkedGraph, M: int) -> TraceReport:
    """Power sums of both graphs for ``m = 1..M``; residuals are computed exactly."""
    if M < 1:
        raise ValueError("M must be >= 1")
    rows = []
    for m in range(1, M + 1):
        a, b = trace_sum_exact(g1, m), trace_sum_exact(g2, m)
        rows.append(TraceRow(m, float(a), float(b), float(a - b)))
    return TraceReport(tuple(rows))


@dataclass(frozen=True)
class SigmaMultiset:
    values: tuple[float, ...]  # per vertex, in vertex order
    deltaprime_zero_count: int
    total_zero_count: int

    @property
    def sorted_values(self) -> tuple[float, ...]:
        return tuple(sorted(self.values))


def sigma_values(g: MarkedGraph) -> tuple[float, ...]:
    _require_finite(g)
    out = []
    for t, alpha, gamma in zip(g.vertex_types, g.couplings, g.degrees):
        if t == DELTA:
            out.append(-alpha / gamma if alpha != 0 else 0.0)
        else:
            out.append(gamma / alpha if alpha != 0 else 0.0)
    return tuple(out)


def sigma_multiset(g: MarkedGraph) -> SigmaMultiset:
    values = sigma_values(g)
    # zero counts use exact alpha == 0: a zero coupling is structural
    dp_zero = sum(1 for t, a in zip(g.vertex_types, g.couplings) if t != DELTA and a == 0)
    total_zero = sum(1 for a in g.couplings if a == 0)
    return SigmaMultiset(values, dp_zero, total_zero)


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    first_violation: str | None
    sigma1: SigmaMultiset
    sigma2: SigmaMultiset
    newton_residuals: tuple[float, ...]


def _multisets_match(a: Sequence[float], b: Sequence[float], tol: float) -> int | None:
    """Index of the first sorted pair differing by more than the scaled tolerance."""
    sa, sb = sorted(a), sorted(b)
    scale = max([1.0] + [abs(x) for x in sa + sb])
    for i, (x, y) in enumerate(zip(sa, sb)):
        if abs(x - y) > tol * scale:
            return i
    return None


def necessary_check(g1: MarkedGraph, g2: MarkedGraph, tol: float = 1e-10) -> CheckReport:
    if g1.num_vertices != g2.num_vertices:
        raise SizeMismatch(f"{g1.num_vertices} vs {g2.num_vertices} vertices")
    s1, s2 = sigma_multiset(g1), sigma_multiset(g2)
    residuals = tuple(r.residual for r in trace_report(g1, g2, g1.num_vertices).rows)
    violation = None
    if s1.deltaprime_zero_count != s2.deltaprime_zero_count:
        violation = (
            f"zero delta' couplings: {s1.deltaprime_zero_count} vs {s2.deltaprime_zero_count}"
        )
    elif s1.total_zero_count != s2.total_zero_count:
        violation = f"zero couplings: {s1.total_zero_count} vs {s2.total_zero_count}"
    else:
        i = _multisets_match(s1.values, s2.values, tol)
        if i is not None:
            violation = (
                f"sigma #{i} (sorted): {s1.sorted_values[i]:.12g} vs {s2.sorted_values[i]:.12g}"
            )
    return CheckReport(violation is None, violation, s1, s2, residuals)


def lemma51_property(
    beta1: Sequence[float], beta2: Sequence[float], M: int, tol: float = 1e-9
) -> bool:
    """Do the power sums of ``beta1`` and ``beta2`` agree for ``m = 1..M``?

    The m-th sums are compared with tolerance ``tol * m * scale^(m-1)``,
    the first-order change caused by moving one element by ``tol``.
    """
    b1 = np.asarray(beta1, dtype=float)
    b2 = np.asarray(beta2, dtype=float)
    if b1.size != b2.size:
        raise SizeMismatch(f"multisets of size {b1.size} and {b2.size}")
    if M < b1.size:
        raise ValueError("M must be at least the multiset size")
    scale = max(1.0, float(np.max(np.abs(np.concatenate([b1, b2])), initial=0.0)))
    for m in range(1, M + 1):
        p1 = math.fsum(b1**m)
        p2 = math.fsum(b2**m)
        if abs(p1 - p2) > tol * m * scale ** (m - 1):
            return False
    return True


# --------------------------------------------------------------------------
# search
# --------------------------------------------------------------------------


def invert_sigma(g: MarkedGraph, sigmas: Sequence[float]) -> tuple[float, ...]:
    """Coupling vector whose sigma values on ``g`` are ``sigmas``."""
    out = []
    for t, gamma, s in zip(g.vertex_types, g.degrees, sigmas):
        if t == DELTA:
            out.append(-s * gamma if s != 0 else 0.0)
        else:
            out.append(gamma / s if s != 0 else 0.0)
    return tuple(out)


def determinant_ratio_constant(g1: MarkedGraph, g2: MarkedGraph, rtol: float = 1e-8) -> bool:
    """Is ``det(B1 - M) / det(B2 - M)`` the same at a few complex points?

    Holds for every isospectral pair, so a failure rules the pair out
    cheaply before any spectrum is computed.
    """
    ratios = [secular_vertex(g1, z) / secular_vertex(g2, z) for z in PRESCREEN_POINTS]
    ref = ratios[0]
    return all(abs(r - ref) <= rtol * abs(ref) for r in ratios[1:])


def _candidates(g: MarkedGraph) -> list[tuple[float, ...]]:
    sig = sigma_values(g)
    zero_dp = tuple(t != DELTA and a == 0 for t, a in zip(g.vertex_types, g.couplings))
    seen: set[tuple[float, ...]] = set()
    out = []
    for perm in itertools.permutations(sig):
        if perm == sig or perm in seen:
            continue
        seen.add(perm)
        # Only delta' vertices distinguish sigma = 0 structurally (alpha = 0 there);
        # a zero sigma at a delta vertex is just alpha = 0.  Keep the delta'
        # zero pattern fixed.
        if any((t != DELTA and s == 0) != z for t, s, z in zip(g.vertex_types, perm, zero_dp)):
            continue
        out.append(invert_sigma(g, perm))
    return sorted(set(out))


def search_isospectral(
    g: MarkedGraph,
    lambda_max: float,
    tol: float = 1e-7,
    cfg: ScanConfig | None = None,
    prescreen: bool = True,
    reference: Spectrum | None = None,
) -> list[tuple[tuple[float, ...], ComparisonReport]]:
    """Permuted coupling vectors whose spectra match ``g`` below ``lambda_max``.

    Results are sorted lexicographically by coupling vector.
    """
    _require_finite(g)
    if g.num_vertices > MAX_SEARCH_VERTICES:
        raise SearchSpaceTooLarge(
            f"{g.num_vertices} vertices; the factorial search is limited to {MAX_SEARCH_VERTICES}"
        )
    base = reference if reference is not None else find_spectrum(g, lambda_max, cfg)
    found = []
    for alphas in _candidates(g):
        cand = g.with_couplings(alphas)
        if prescreen and not determinant_ratio_constant(g, cand):
            continue
        report = compare_spectra(base, find_spectrum(cand, lambda_max, cfg), tol)
        if report.isospectral:
            found.append((alphas, report))
    return found


def decoupled_isospectrality_check(
    g: MarkedGraph, lambda_max: float, tol: float = 1e-7, cfg: ScanConfig | None = None
) -> ComparisonReport:
    """Compare the spectrum of ``g`` with that of its fully decoupled version."""
    types = set(g.vertex_types)
    if len(types) != 1:
        raise MixedTypes("the decoupling comparison is defined for all-delta or all-delta' graphs")
    _require_finite(g)
    if any(a == 0 for a in g.couplings):
        raise ValueError("couplings must be non-zero")
    return compare_spectra(
        find_spectrum(g, lambda_max, cfg), find_spectrum(g.decoupled(), lambda_max, cfg), tol
    )
