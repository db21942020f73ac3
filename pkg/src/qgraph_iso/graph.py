"""Marked metric graphs: data model, validation, fixtures and JSON I/O.

A marked graph is a finite connected multigraph whose edges are intervals
``[0, l]`` and whose vertices carry a matching type (``delta`` or
``delta_prime``) plus a real coupling constant.  An infinite coupling
selects the decoupled condition at that vertex (zero value at a delta
vertex, zero normal derivative at a delta-prime vertex).

Edge orientation matters only for bookkeeping: the ``left`` vertex holds
the endpoint ``x = 0`` and the ``right`` vertex holds ``x = l``.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Iterable, Sequence

from .errors import (
    ArityMismatch,
    DisconnectedGraph,
    GraphValidationError,
    IndexOutOfRange,
    NonPositiveLength,
    ParamMismatch,
    UnknownFamily,
    UnknownFixture,
)

INF = math.inf

#: Default edge lengths used by the fixtures (rationally independent-looking).
DEFAULT_LENGTHS: tuple[float, ...] = (
    1.0,
    1.4142135624,
    1.7320508076,
    2.2360679775,
    2.6457513111,
    3.3166247904,
    3.6055512755,
    4.1231056256,
)

FIXTURE_NAMES: tuple[str, ...] = ("interval", "star", "chain_a4", "cycle", "lasso", "example_3_4")


class VertexType(str, enum.Enum):
    DELTA = "delta"
    DELTA_PRIME = "delta_prime"

    @classmethod
    def parse(cls, value: "VertexType | str") -> "VertexType":
        if isinstance(value, VertexType):
            return value
        try:
            return cls(str(value))
        except ValueError:
            raise GraphValidationError(
                f"unknown vertex type {value!r}; expected 'delta' or 'delta_prime'"
            ) from None


DELTA = VertexType.DELTA
DELTA_PRIME = VertexType.DELTA_PRIME


def parse_coupling(value: Any) -> float:
    """Return a coupling as a float; ``"inf"`` and ``math.inf`` mean infinite."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "+inf"):
            return INF
        raise GraphValidationError(f"coupling must be a number or 'inf', got {value!r}")
    if isinstance(value, bool):
        raise GraphValidationError("coupling must be a number, not a boolean")
    try:
        alpha = float(value)
    except (TypeError, ValueError):
        raise GraphValidationError(f"coupling must be a number or 'inf', got {value!r}") from None
    if math.isnan(alpha) or alpha == -INF:
        raise GraphValidationError(f"coupling must be finite real or +inf, got {value!r}")
    return alpha


def is_infinite(alpha: float) -> bool:
    return alpha == INF


@dataclass(frozen=True)
class Edge:
    id: int
    left: int
    right: int
    length: float

    @property
    def is_loop(self) -> bool:
        return self.left == self.right

    def other(self, k: int) -> int:
        return self.right if self.left == k else self.left


@dataclass(frozen=True)
class MarkedGraph:
    edges: tuple[Edge, ...]
    vertex_types: tuple[VertexType, ...]
    couplings: tuple[float, ...]
    _degrees: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n_vert = len(self.vertex_types)
        if n_vert < 1:
            raise ArityMismatch("a graph needs at least one vertex")
        if len(self.couplings) != n_vert:
            raise ArityMismatch(
                f"{len(self.couplings)} couplings given for {n_vert} vertices"
            )
        if len(self.edges) < 1:
            raise ArityMismatch("a graph needs at least one edge")
        for pos, e in enumerate(self.edges):
            if e.id != pos:
                raise GraphValidationError(f"edge ids must be 0..n-1 in order, got {e.id} at {pos}")
            if not (math.isfinite(e.length) and e.length > 0):
                raise NonPositiveLength(f"edge {e.id} has non-positive length {e.length!r}")
            for v in (e.left, e.right):
                if not 0 <= v < n_vert:
                    raise IndexOutOfRange(f"edge {e.id} references vertex {v}, have {n_vert}")
        degrees = [0] * n_vert
        for e in self.edges:
            degrees[e.left] += 1
            degrees[e.right] += 1
        object.__setattr__(self, "_degrees", tuple(degrees))
        _check_connected(n_vert, self.edges)

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_types)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> tuple[int, ...]:
        """Vertex degrees; a loop counts twice."""
        return self._degrees

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(e.length for e in self.edges)

    @property
    def total_length(self) -> float:
        return math.fsum(self.lengths)

    @property
    def has_infinite_coupling(self) -> bool:
        return any(is_infinite(a) for a in self.couplings)

    def endpoints(self, k: int) -> list[tuple[int, int]]:
        """Endpoints at vertex ``k`` as ``(edge_id, side)`` with side 0 = left, 1 = right.

        Ordered by edge id, left before right, so the first entry is the
        anchor endpoint of the vertex.
        """
        self._check_vertex(k)
        out = []
        for e in self.edges:
            if e.left == k:
                out.append((e.id, 0))
            if e.right == k:
                out.append((e.id, 1))
        return out

    def with_couplings(self, couplings: Iterable[Any]) -> "MarkedGraph":
        return MarkedGraph(self.edges, self.vertex_types, tuple(parse_coupling(a) for a in couplings))

    def decoupled(self) -> "MarkedGraph":
        return self.with_couplings([INF] * self.num_vertices)

    def _check_vertex(self, k: int) -> None:
        if not 0 <= k < self.num_vertices:
            raise IndexOutOfRange(f"vertex {k} out of range 0..{self.num_vertices - 1}")


def _check_connected(n_vert: int, edges: Sequence[Edge]) -> None:
    parent = list(range(n_vert))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in edges:
        ra, rb = find(e.left), find(e.right)
        if ra != rb:
            parent[ra] = rb
    roots = {find(v) for v in range(n_vert)}
    if len(roots) > 1:
        raise DisconnectedGraph(f"graph has {len(roots)} connected components")


def build_graph(
    edges: Iterable[Edge | Sequence[Any]],
    vertex_types: Sequence[VertexType | str],
    couplings: Sequence[Any],
) -> MarkedGraph:
    """Validate inputs and assemble a :class:`MarkedGraph`.

    ``edges`` may hold :class:`Edge` objects or ``(left, right, length)``
    triples; ids are reassigned in the given order.
    """
    edge_list = []
    for pos, item in enumerate(edges):
        if isinstance(item, Edge):
            left, right, length = item.left, item.right, item.length
        else:
            if len(item) != 3:
                raise ArityMismatch(f"edge {pos} must be (left, right, length)")
            left, right, length = item
        if isinstance(left, bool) or isinstance(right, bool) or int(left) != left or int(right) != right:
            raise GraphValidationError(f"edge {pos} endpoints must be integers")
        try:
            length = float(length)
        except (TypeError, ValueError):
            raise GraphValidationError(f"edge {pos} length must be a number") from None
        edge_list.append(Edge(pos, int(left), int(right), length))
    if len(vertex_types) != len(couplings):
        raise ArityMismatch(f"{len(vertex_types)} vertex types but {len(couplings)} couplings")
    types = tuple(VertexType.parse(t) for t in vertex_types)
    alphas = tuple(parse_coupling(a) for a in couplings)
    return MarkedGraph(tuple(edge_list), types, alphas)


# --------------------------------------------------------------------------
# incidence classification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IncidenceSets:
    """Edge ids classified around vertex ``k`` (and relative to ``j``).

    ``loops``: loops at ``k``; ``same``: non-loop edges at ``k`` whose other
    end has the same type; ``mixed``: non-loop edges at ``k`` whose other end
    has the other type; ``between_same`` / ``between_mixed``: edges joining
    ``k`` and ``j`` when the two types agree / differ.
    """

    k: int
    j: int | None
    loops: tuple[int, ...]
    same: tuple[int, ...]
    mixed: tuple[int, ...]
    between_same: tuple[int, ...] = ()
    between_mixed: tuple[int, ...] = ()


def incidence_sets(g: MarkedGraph, k: int, j: int | None = None) -> IncidenceSets:
    g._check_vertex(k)
    if j is not None:
        g._check_vertex(j)
    tk = g.vertex_types[k]
    loops, same, mixed = [], [], []
    for e in g.edges:
        if k not in (e.left, e.right):
            continue
        if e.is_loop:
            loops.append(e.id)
        elif g.vertex_types[e.other(k)] == tk:
            same.append(e.id)
        else:
            mixed.append(e.id)
    between: list[int] = []
    if j is not None and j != k:
        between = [e.id for e in g.edges if {e.left, e.right} == {k, j}]
    same_type = j is not None and g.vertex_types[j] == tk
    return IncidenceSets(
        k=k,
        j=j,
        loops=tuple(loops),
        same=tuple(same),
        mixed=tuple(mixed),
        between_same=tuple(between) if same_type else (),
        between_mixed=() if same_type else tuple(between),
    )


# --------------------------------------------------------------------------
# fixtures
# --------------------------------------------------------------------------


def _take(values: Sequence[Any] | None, default: Sequence[Any], count: int, what: str) -> list[Any]:
    if values is None:
        if len(default) < count:
            raise ParamMismatch(f"no default {what} for this size")
        return list(default[:count])
    values = list(values)
    if len(values) != count:
        raise ParamMismatch(f"expected {count} {what}, got {len(values)}")
    return values


def standard_graph(
    name: str,
    *,
    lengths: Sequence[float] | None = None,
    alphas: Sequence[Any] | None = None,
    types: Sequence[VertexType | str] | None = None,
    size: int | None = None,
) -> MarkedGraph:
    """Build one of the named fixture families.

    ``interval``     single edge V0-V1, default length pi, Neumann (delta, alpha=0).
    ``star``         ``size`` pendants V0..V{size-1} joined to centre V{size}.
    ``chain_a4``     path V0-V1-V2-V3.
    ``cycle``        cycle on ``size`` vertices, edge i joins Vi and V(i+1 mod size).
    ``lasso``        pendant V0-V1 plus two parallel edges V1-V2; degrees (1, 3, 2).
    ``example_3_4``  V0-V1, double edge V1-V2, V2-V3; types (delta, delta, delta', delta').
    """
    sized = name in ("star", "cycle")
    if size is not None and not sized:
        raise ParamMismatch(f"family {name!r} takes no size parameter")

    if name == "interval":
        ls = _take(lengths, (math.pi,), 1, "lengths")
        edges = [(0, 1, ls[0])]
        n_vert, default_alpha, default_types = 2, (0.0, 0.0), (DELTA, DELTA)
    elif name == "star":
        n = 3 if size is None else int(size)
        if n < 1:
            raise ParamMismatch("star needs at least one pendant")
        ls = _take(lengths, DEFAULT_LENGTHS, n, "lengths")
        edges = [(i, n, ls[i]) for i in range(n)]
        n_vert, default_alpha, default_types = n + 1, (1.0,) * (n + 1), (DELTA,) * (n + 1)
    elif name == "chain_a4":
        ls = _take(lengths, DEFAULT_LENGTHS, 3, "lengths")
        edges = [(0, 1, ls[0]), (1, 2, ls[1]), (2, 3, ls[2])]
        n_vert, default_alpha, default_types = 4, (1.0,) * 4, (DELTA,) * 4
    elif name == "cycle":
        n = 4 if size is None else int(size)
        if n < 1:
            raise ParamMismatch("cycle needs at least one vertex")
        ls = _take(lengths, DEFAULT_LENGTHS, n, "lengths")
        edges = [(i, (i + 1) % n, ls[i]) for i in range(n)]
        if n % 2 == 0:
            default_alpha = tuple(2.0 if i % 2 == 0 else -2.0 for i in range(n))
        else:
            default_alpha = (1.0,) * n
        n_vert, default_types = n, (DELTA,) * n
    elif name == "lasso":
        ls = _take(lengths, (1.0, 1.0, 1.0), 3, "lengths")
        edges = [(0, 1, ls[0]), (1, 2, ls[1]), (1, 2, ls[2])]
        n_vert, default_alpha, default_types = 3, (1.0, 6.0, 6.0), (DELTA,) * 3
    elif name == "example_3_4":
        ls = _take(lengths, DEFAULT_LENGTHS, 4, "lengths")
        edges = [(0, 1, ls[0]), (1, 2, ls[1]), (1, 2, ls[2]), (2, 3, ls[3])]
        n_vert = 4
        default_alpha = (1.0, 2.0, 3.0, 4.0)
        default_types = (DELTA, DELTA, DELTA_PRIME, DELTA_PRIME)
    else:
        raise UnknownFamily(f"unknown graph family {name!r}; known: {', '.join(FIXTURE_NAMES)}")

    alpha_list = _take(alphas, default_alpha, n_vert, "couplings")
    type_list = _take(types, default_types, n_vert, "vertex types")
    return build_graph(edges, type_list, alpha_list)


# --------------------------------------------------------------------------
# canonical JSON
# --------------------------------------------------------------------------

_TOP_KEYS = {"vertices", "edges"}
_VERTEX_KEYS = {"type", "alpha"}
_EDGE_KEYS = {"from", "to", "length"}


def to_dict(g: MarkedGraph) -> dict[str, Any]:
    return {
        "vertices": [
            {"type": t.value, "alpha": "inf" if is_infinite(a) else float(a)}
            for t, a in zip(g.vertex_types, g.couplings)
        ],
        "edges": [{"from": e.left, "to": e.right, "length": float(e.length)} for e in g.edges],
    }


def dumps(g: MarkedGraph) -> str:
    return json.dumps(to_dict(g), indent=2) + "\n"


def _strict_keys(obj: Any, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise GraphValidationError(f"{where} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise GraphValidationError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = allowed - set(obj)
    if missing:
        raise GraphValidationError(f"missing key(s) in {where}: {', '.join(sorted(missing))}")


def from_dict(data: Any) -> MarkedGraph:
    _strict_keys(data, _TOP_KEYS, "graph")
    if not isinstance(data["vertices"], list) or not isinstance(data["edges"], list):
        raise GraphValidationError("'vertices' and 'edges' must be lists")
    types, alphas = [], []
    for i, v in enumerate(data["vertices"]):
        _strict_keys(v, _VERTEX_KEYS, f"vertex {i}")
        types.append(v["type"])
        alphas.append(v["alpha"])
    edges = []
    for i, e in enumerate(data["edges"]):
        _strict_keys(e, _EDGE_KEYS, f"edge {i}")
        for key in ("from", "to"):
            if isinstance(e[key], bool) or not isinstance(e[key], int):
                raise GraphValidationError(f"edge {i}: '{key}' must be an integer vertex index")
        if isinstance(e["length"], bool) or not isinstance(e["length"], (int, float)):
            raise GraphValidationError(f"edge {i}: 'length' must be a number")
        edges.append((e["from"], e["to"], e["length"]))
    return build_graph(edges, types, alphas)


def loads(text: str) -> MarkedGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"invalid JSON: {exc}") from None
    return from_dict(data)


def load(path: str) -> MarkedGraph:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def emit_fixture(name: str) -> str:
    """Canonical JSON for a named fixture with its default parameters."""
    if name not in FIXTURE_NAMES:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
    return dumps(standard_graph(name))


# --------------------------------------------------------------------------
# rational independence advisory
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalAdvisory:
    lengths: tuple[float, ...]
    max_coeff: int
    relations: tuple[tuple[tuple[int, ...], float], ...]

    @property
    def independent(self) -> bool:
        return not self.relations

    @property
    def warnings(self) -> list[str]:
        return [f"{_format_relation(c)} = 0 (residual {r:.1e})" for c, r in self.relations]


def _format_relation(coeffs: Sequence[int]) -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        term = f"l{i + 1}" if mag == 1 else f"{mag}*l{i + 1}"
        if not parts:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {term}")
    return " ".join(parts)


def rational_independence_advisory(
    lengths: Sequence[float], max_coeff: int = 10, tol: float = 1e-9
) -> RationalAdvisory:
    """Scan small integer relations ``sum c_i l_i ~ 0`` with ``|c_i| <= max_coeff``.

    Advisory only: floating point cannot certify independence.  Reports
    primitive relations (gcd 1, first non-zero coefficient positive).
    """
    ls = [float(x) for x in lengths]
    if any(not (x > 0) for x in ls):
        raise NonPositiveLength("lengths must be positive")
    if max_coeff < 1:
        raise ParamMismatch("max_coeff must be >= 1")
    n = len(ls)
    found: list[tuple[tuple[int, ...], float]] = []
    if n >= 2:
        rng = range(-max_coeff, max_coeff + 1)
        for head in itertools.product(rng, repeat=n - 1):
            partial = math.fsum(c * x for c, x in zip(head, ls))
            last = round(-partial / ls[-1])
            if abs(last) > max_coeff:
                continue
            coeffs = head + (int(last),)
            if not any(coeffs):
                continue
            first = next(c for c in coeffs if c)
            if first < 0 or reduce(math.gcd, (abs(c) for c in coeffs)) != 1:
                continue
            resid = abs(partial + last * ls[-1])
            if resid <= tol:
                found.append((coeffs, resid))
    found.sort(key=lambda item: (sum(abs(c) for c in item[0]), [-c for c in item[0]]))
    return RationalAdvisory(tuple(ls), max_coeff, tuple(found))
