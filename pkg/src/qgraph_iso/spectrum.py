"""Eigenvalues with multiplicities from the edge secular determinant.

The scan runs in the signed variable ``s`` with ``lambda = s |s|``: ``s = mu``
on the positive half-line and ``s = -kappa`` on the negative one.  Zeros are
roughly uniformly spaced in ``s``, so a fixed grid is safe.

Roots are collected three ways:

* sign changes on the grid, refined by (vectorised) bisection;
* same-sign local minima of ``|det|``, probed with a bounded minimisation
  (catches close pairs and even-multiplicity roots) and confirmed by a rank test;
* ``lambda = 0`` directly.

Multiplicities come from the nullity of the matching matrix.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .edge_secular import nullspace_dimension, secular_edge_many, singular_values
from .errors import BudgetExceeded, PoleProximity
from .graph import DELTA, MarkedGraph, is_infinite
from .mfunction import EPS_POLE, _plan, secular_vertex


class SuspectedMissedRoot(UserWarning):
    """Eigenvalue count disagrees with the Weyl estimate."""


class Method(str, enum.Enum):
    EDGE_SECULAR = "edge"
    FINITE_DIFFERENCE = "fd"


@dataclass(frozen=True)
class ScanConfig:
    mu_step: float | None = None  # None: pi / (2 L_total oversample)
    oversample: int = 8
    refine_tol: float = 1e-10  # in lambda
    merge_tol: float = 1e-7  # in s
    kappa_max: float | None = None  # None: derived from the couplings
    rank_tol: float = 1e-6
    max_evals: int = 5_000_000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.oversample < 4:
            raise ValueError("oversample must be >= 4")
        if self.mu_step is not None and not self.mu_step > 0:
            raise ValueError("mu_step must be positive")
        if not (self.refine_tol > 0 and self.merge_tol > 0 and self.rank_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def step_for(self, g: MarkedGraph) -> float:
        cap = math.pi / (2 * g.total_length)
        if self.mu_step is None:
            return cap / self.oversample
        return min(self.mu_step, cap)


def default_kappa_max(g: MarkedGraph) -> float:
    """Heuristic bound on ``sqrt(-lambda)`` for negative eigenvalues."""
    worst = 0.0
    for t, alpha, gamma in zip(g.vertex_types, g.couplings, g.degrees):
        if is_infinite(alpha):
            continue
        worst = max(worst, abs(alpha))
        if t != DELTA and alpha != 0:
            worst = max(worst, gamma / abs(alpha))
    return 1.0 + 2.0 * worst


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[tuple[float, int], ...]
    lambda_max: float
    method: Method
    params: dict[str, Any] = field(default_factory=dict, compare=False)
    warnings: tuple[str, ...] = ()

    @property
    def values(self) -> list[float]:
        return [lam for lam, _ in self.eigenvalues]

    def expanded(self) -> list[float]:
        """Eigenvalues repeated according to multiplicity."""
        return [lam for lam, m in self.eigenvalues for _ in range(m)]

    @property
    def count(self) -> int:
        return sum(m for _, m in self.eigenvalues)

    def below(self, cutoff: float) -> "Spectrum":
        kept = tuple((lam, m) for lam, m in self.eigenvalues if lam <= cutoff)
        return Spectrum(kept, min(cutoff, self.lambda_max), self.method, self.params, self.warnings)


def _lam(s):
    return s * np.abs(s)


class _Evaluator:
    """Batched secular evaluations with a budget."""

    def __init__(self, g: MarkedGraph, max_evals: int, workers: int):
        self.g = g
        self.max_evals = max_evals
        self.workers = workers
        self.evals = 0

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        self.evals += s.size
        if self.evals > self.max_evals:
            raise BudgetExceeded(f"more than {self.max_evals} secular evaluations")
        if self.workers > 1 and s.size >= 4 * self.workers:
            chunks = np.array_split(s, self.workers)
            with ThreadPoolExecutor(self.workers) as pool:
                parts = list(pool.map(lambda c: secular_edge_many(self.g, _lam(c)), chunks))
            return np.concatenate(parts)
        return secular_edge_many(self.g, _lam(s))


def _bisect(f: _Evaluator, a: np.ndarray, b: np.ndarray, fa: np.ndarray, refine_tol: float) -> np.ndarray:
    """Refine many sign-change brackets at once; returns midpoints in s."""
    a, b, fa = a.copy(), b.copy(), fa.copy()
    for _ in range(200):
        width = np.abs(_lam(b) - _lam(a))
        active = width > refine_tol
        if not active.any():
            break
        m = 0.5 * (a + b)
        active &= (m != a) & (m != b)
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        fm = f(m[idx])
        left = np.sign(fm) == np.sign(fa[idx])
        a[idx[left]] = m[idx[left]]
        fa[idx[left]] = fm[left]
        b[idx[~left]] = m[idx[~left]]
        done = fm == 0
        a[idx[done]] = b[idx[done]] = m[idx[done]]
    return 0.5 * (a + b)


def _sigma_ratio(g: MarkedGraph, s: float) -> float:
    sv = singular_values(g, float(_lam(s)))
    return sv[-1] / sv[0]


def _golden(fun, lo: float, hi: float, xtol: float) -> tuple[float, int]:
    """Golden-section minimum with an absolute tolerance.

    Used for the V-shaped smallest singular value, where the relative
    tolerance floor of Brent's method would limit accuracy to ~1e-8.
    """
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fun(c), fun(d)
    nfev = 2
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fun(d)
        nfev += 1
        if not a < c < d < b:
            break
    return (c if fc <= fd else d), nfev


def _probe_minimum(
    g: MarkedGraph, f: _Evaluator, lo: float, hi: float, sign: float, cfg: ScanConfig, scale: float
) -> list[float]:
    """Look for roots hidden between two same-sign grid values."""
    res = minimize_scalar(
        lambda x: sign * float(f(np.array([x]))[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13},
    )
    s_star = float(res.x)
    g_min = float(res.fun)
    if g_min < 0:
        fl = f(np.array([lo, hi]))
        out = _bisect(
            f,
            np.array([lo, s_star]),
            np.array([s_star, hi]),
            np.array([fl[0], g_min * sign]),
            cfg.refine_tol,
        )
        return [float(x) for x in out]
    if g_min > 1e-4 * scale:
        return []
    s_root, nfev = _golden(lambda x: _sigma_ratio(g, x), lo, hi, 1e-14)
    f.evals += nfev
    if nullspace_dimension(g, float(_lam(s_root)), cfg.rank_tol) >= 1:
        return [s_root]
    return []


def _merge(roots: Sequence[float], tol: float) -> list[list[float]]:
    clusters: list[list[float]] = []
    for r in sorted(roots):
        if clusters and r - clusters[-1][-1] <= tol:
            clusters[-1].append(r)
        else:
            clusters.append([r])
    return clusters


def find_spectrum(
    g: MarkedGraph,
    lambda_max: float,
    cfg: ScanConfig | None = None,
) -> Spectrum:
    """All eigenvalues in ``[-kappa_max^2, lambda_max]`` with multiplicities."""
    cfg = cfg or ScanConfig()
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    h = cfg.step_for(g)
    kappa_max = cfg.kappa_max if cfg.kappa_max is not None else default_kappa_max(g)
    s_hi = math.sqrt(lambda_max)
    n_neg = int(math.ceil(kappa_max / h))
    n_pos = int(math.ceil(s_hi / h)) + 1
    grid = np.arange(-n_neg, n_pos + 1, dtype=float) * h
    f = _Evaluator(g, cfg.max_evals, cfg.workers)
    vals = f(grid)

    roots: list[float] = [float(x) for x in grid[vals == 0]]

    sa, sb = np.sign(vals[:-1]), np.sign(vals[1:])
    idx = np.nonzero(sa * sb < 0)[0]
    if idx.size:
        roots.extend(float(x) for x in _bisect(f, grid[idx], grid[idx + 1], vals[idx], cfg.refine_tol))

    mag = np.abs(vals)
    window = max(cfg.oversample, 4)
    for i in range(1, grid.size - 1):
        if not (mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]):
            continue
        if vals[i] == 0 or np.sign(vals[i - 1]) != np.sign(vals[i]) or np.sign(vals[i + 1]) != np.sign(vals[i]):
            continue
        scale = float(mag[max(0, i - window) : i + window + 1].max())
        roots.extend(_probe_minimum(g, f, grid[i - 1], grid[i + 1], float(np.sign(vals[i])), cfg, scale))

    if nullspace_dimension(g, 0.0, cfg.rank_tol) >= 1:
        roots.append(0.0)

    eigen: list[tuple[float, int]] = []
    for cluster in _merge(roots, cfg.merge_tol):
        s = 0.0 if 0.0 in cluster else float(np.median(cluster))
        lam = float(_lam(s))
        if lam > lambda_max or s < -kappa_max:
            continue
        mult = max(1, nullspace_dimension(g, lam, cfg.rank_tol))
        eigen.append((lam, mult))

    params = asdict(cfg)
    params.update(mu_step=h, kappa_max=kappa_max, evaluations=f.evals)
    notes: list[str] = []
    if not g.has_infinite_coupling:
        count = sum(m for _, m in eigen)
        weyl = g.total_length * math.sqrt(lambda_max) / math.pi
        slack = g.num_vertices + g.num_edges
        if abs(count - weyl) > slack:
            msg = f"found {count} eigenvalues below {lambda_max:g}, Weyl estimate {weyl:.1f} (slack {slack})"
            notes.append(msg)
            warnings.warn(msg, SuspectedMissedRoot, stacklevel=2)
    return Spectrum(tuple(eigen), float(lambda_max), Method.EDGE_SECULAR, params, tuple(notes))


# --------------------------------------------------------------------------
# zeros of the vertex secular function (cross-check only)
# --------------------------------------------------------------------------


def vertex_zeros(
    g: MarkedGraph,
    lambda_max: float,
    step: float | None = None,
    kappa_max: float | None = None,
    pole_margin: float = 1e-6,
    refine_tol: float = 1e-10,
) -> list[float]:
    """Sign-change zeros of ``det(B - M)`` on pole-free intervals.

    Poles of M are cut out with ``pole_margin`` (in mu) so that sign flips
    across a pole are never reported.  Zeros closer than the margin to a
    pole, and eigenvalues sitting exactly on a pole, are not seen.
    """
    h = step if step is not None else math.pi / (16 * g.total_length)
    kmax = kappa_max if kappa_max is not None else default_kappa_max(g)
    s_hi = math.sqrt(lambda_max)
    plan = _plan(g)
    breaks = set()
    for period, shift, n_min in plan.poles:
        n = n_min
        while (n + shift) * period <= s_hi + h:
            breaks.add((n + shift) * period)
            n += 1
    cuts = sorted(b for b in breaks)
    zero_pole = 0.0 in breaks
    edges = [-kmax] + cuts + [s_hi + h]
    if not zero_pole:
        edges = sorted(set(edges))

    def F(s: float) -> float:
        try:
            return secular_vertex(g, float(_lam(s)), eps_pole=EPS_POLE)
        except PoleProximity:
            return math.nan

    out: list[float] = []
    for a, b in zip(edges[:-1], edges[1:]):
        lo = a + (pole_margin if a in breaks else 0.0)
        hi = b - (pole_margin if b in breaks else 0.0)
        if hi <= lo:
            continue
        n = max(2, int(math.ceil((hi - lo) / h)) + 1)
        xs = np.linspace(lo, hi, n)
        ys = np.array([F(x) for x in xs])
        for i in range(n - 1):
            ya, yb = ys[i], ys[i + 1]
            if not (np.isfinite(ya) and np.isfinite(yb)):
                continue
            if ya == 0:
                out.append(float(_lam(xs[i])))
                continue
            if ya * yb < 0:
                x0, x1, y0 = xs[i], xs[i + 1], ya
                for _ in range(200):
                    if abs(_lam(x1) - _lam(x0)) <= refine_tol:
                        break
                    xm = 0.5 * (x0 + x1)
                    if xm in (x0, x1):
                        break
                    ym = F(xm)
                    if ym == 0:
                        x0 = x1 = xm
                        break
                    if np.sign(ym) == np.sign(y0):
                        x0, y0 = xm, ym
                    else:
                        x1 = xm
                out.append(float(_lam(0.5 * (x0 + x1))))
        if np.isfinite(ys[-1]) and ys[-1] == 0:
            out.append(float(_lam(xs[-1])))
    return sorted(x for x in set(out) if x <= lambda_max)


# --------------------------------------------------------------------------
# comparison
# --------------------------------------------------------------------------

MIN_COMPARABLE = 10
TARGET_AGREEMENT = 25


@dataclass(frozen=True)
class Mismatch:
    index: int
    kind: str  # "value", "multiplicity" or "count"
    lambda1: float | None
    lambda2: float | None
    multiplicity1: int | None = None
    multiplicity2: int | None = None

    def describe(self) -> str:
        if self.kind == "count":
            return f"eigenvalue #{self.index}: present in one spectrum only ({self.lambda1 if self.lambda1 is not None else self.lambda2:.12g})"
        if self.kind == "multiplicity":
            return f"eigenvalue #{self.index} at {self.lambda1:.12g}: multiplicity {self.multiplicity1} vs {self.multiplicity2}"
        return f"eigenvalue #{self.index}: {self.lambda1:.12g} vs {self.lambda2:.12g}"


@dataclass(frozen=True)
class ComparisonReport:
    isospectral: bool
    verdict: str  # "isospectral", "different", "inconclusive"
    cutoff: float
    compared: int
    max_deviation: float
    first_mismatch: Mismatch | None
    counts: tuple[int, int]
    tol: float

    def summary(self) -> str:
        if self.verdict == "isospectral":
            return (
                f"ISOSPECTRAL up to {self.cutoff:g} ({self.compared} eigenvalues, "
                f"max dev {self.max_deviation:.1e})"
            )
        if self.verdict == "inconclusive":
            return f"INCONCLUSIVE up to {self.cutoff:g} (only {self.compared} eigenvalues)"
        assert self.first_mismatch is not None
        return f"DIFFERENT below {self.cutoff:g}: {self.first_mismatch.describe()}"


def compare_spectra(s1: Spectrum, s2: Spectrum, tol: float = 1e-7) -> ComparisonReport:
    """Compare two spectra, counting multiplicity, up to the smaller cutoff.

    An eigenvalue within ``tol`` of the cutoff that only one side reports is
    treated as a boundary effect and ignored.
    """
    cutoff = min(s1.lambda_max, s2.lambda_max)
    e1 = [(lam, m) for lam, m in s1.eigenvalues if lam <= cutoff]
    e2 = [(lam, m) for lam, m in s2.eigenvalues if lam <= cutoff]
    if len(e1) != len(e2):
        longer = e1 if len(e1) > len(e2) else e2
        shorter = e2 if longer is e1 else e1
        if len(longer) == len(shorter) + 1 and longer[-1][0] > cutoff - tol:
            longer.pop()
    counts = (sum(m for _, m in e1), sum(m for _, m in e2))
    max_dev = 0.0
    compared = 0
    mismatch: Mismatch | None = None
    for i, ((l1, m1), (l2, m2)) in enumerate(zip(e1, e2)):
        dev = abs(l1 - l2)
        if dev > tol:
            mismatch = Mismatch(i, "value", l1, l2, m1, m2)
            break
        max_dev = max(max_dev, dev)
        if m1 != m2:
            mismatch = Mismatch(i, "multiplicity", l1, l2, m1, m2)
            break
        compared += m1
    if mismatch is None and len(e1) != len(e2):
        i = min(len(e1), len(e2))
        extra1 = e1[i] if len(e1) > i else None
        extra2 = e2[i] if len(e2) > i else None
        mismatch = Mismatch(
            i,
            "count",
            extra1[0] if extra1 else None,
            extra2[0] if extra2 else None,
            extra1[1] if extra1 else None,
            extra2[1] if extra2 else None,
        )
    if mismatch is not None:
        verdict = "different"
    elif compared < MIN_COMPARABLE:
        verdict = "inconclusive"
    else:
        verdict = "isospectral"
    return ComparisonReport(
        isospectral=verdict == "isospectral",
        verdict=verdict,
        cutoff=cutoff,
        compared=compared,
        max_deviation=max_dev,
        first_mismatch=mismatch,
        counts=counts,
        tol=tol,
    )


__all__ = [
    "ComparisonReport",
    "Method",
    "Mismatch",
    "ScanConfig",
    "Spectrum",
    "SuspectedMissedRoot",
    "compare_spectra",
    "default_kappa_max",
    "find_spectrum",
    "vertex_zeros",
]
