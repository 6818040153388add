"""Open metric graphs: vertices with Neumann/Dirichlet conditions, bonds, leads."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable

C_VACUUM = 2.99792458e8  # m/s

# Optical bond lengths of the two bundled networks, meters.
LENGTH_A = 0.0985
LENGTH_B = 0.1847
LENGTH_C = 0.2420


class BoundaryCondition(enum.Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class Vertex:
    id: int
    bc: BoundaryCondition = BoundaryCondition.NEUMANN


@dataclass(frozen=True)
class Bond:
    id: int
    endpoint_a: int
    endpoint_b: int
    optical_length: float


@dataclass(frozen=True)
class Lead:
    port: int
    vertex: int


class InvalidGraphError(ValueError):
    """Raised when an operation needs a valid graph and gets one that is not."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid graph: " + "; ".join(self.violations))


@dataclass(frozen=True)
class PhysicalConstants:
    c_vacuum: float = C_VACUUM
    epsilon: float = 2.08

    def __post_init__(self):
        if self.epsilon < 1:
            raise ValueError(f"epsilon must be >= 1, got {self.epsilon}")

    def physical_length(self, optical_length: float) -> float:
        return optical_length / math.sqrt(self.epsilon)

    def optical_length(self, physical_length: float) -> float:
        return physical_length * math.sqrt(self.epsilon)


@dataclass(frozen=True)
class MetricGraph:
    """An open metric graph.

    Construction does not validate, so that malformed inputs can still be
    inspected with :func:`validate`. Solvers call :meth:`require_valid`.
    Vertices, bonds and leads are kept in canonical order (by id / port), so
    two graphs built from the same elements in different order compare equal.
    """

    vertices: tuple[Vertex, ...]
    bonds: tuple[Bond, ...] = ()
    leads: tuple[Lead, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices, key=lambda v: v.id)))
        object.__setattr__(self, "bonds", tuple(sorted(self.bonds, key=lambda b: b.id)))
        object.__setattr__(self, "leads", tuple(sorted(self.leads, key=lambda l: l.port)))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @property
    def n_leads(self) -> int:
        return len(self.leads)

    def vertex(self, vid: int) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(f"unknown vertex id {vid}")

    def valency(self, vid: int) -> int:
        count = sum((b.endpoint_a == vid) + (b.endpoint_b == vid) for b in self.bonds)
        return count + sum(l.vertex == vid for l in self.leads)

    def require_valid(self) -> None:
        violations = validate(self)
        if violations:
            raise InvalidGraphError(violations)


def validate(graph: MetricGraph) -> list[str]:
    """Return every violated invariant of ``graph``; an empty list means valid."""
    out: list[str] = []
    ids = [v.id for v in graph.vertices]
    for vid, n in sorted(Counter(ids).items()):
        if n > 1:
            out.append(f"duplicate vertex id={vid}")
    for vid in ids:
        if not isinstance(vid, int) or vid < 0:
            out.append(f"vertex id must be a non-negative integer, got id={vid!r}")
    known = set(ids)
    bc = {v.id: v.bc for v in graph.vertices}

    for bid, n in sorted(Counter(b.id for b in graph.bonds).items()):
        if n > 1:
            out.append(f"duplicate bond id={bid}")
    for b in graph.bonds:
        if not (b.optical_length > 0) or not math.isfinite(b.optical_length):
            out.append(f"nonpositive length, bond id={b.id}")
        for end in (b.endpoint_a, b.endpoint_b):
            if end not in known:
                out.append(f"bond id={b.id} references unknown vertex id={end}")
        if b.endpoint_a == b.endpoint_b:
            out.append(f"self-loop, bond id={b.id}")

    ports = sorted(l.port for l in graph.leads)
    if ports != list(range(len(ports))):
        out.append(f"lead ports must be 0..{len(ports) - 1} each used once, got {ports}")
    for l in graph.leads:
        if l.vertex not in known:
            out.append(f"lead port={l.port} references unknown vertex id={l.vertex}")
        elif bc[l.vertex] is BoundaryCondition.DIRICHLET:
            out.append(f"lead on Dirichlet vertex, port={l.port} vertex id={l.vertex}")

    for v in graph.vertices:
        if graph.valency(v.id) == 0:
            out.append(f"isolated vertex id={v.id}")

    if graph.vertices and not _connected(graph):
        out.append("graph is not connected")
    if not graph.vertices:
        out.append("graph has no vertices")
    return out


def _connected(graph: MetricGraph) -> bool:
    adj: dict[int, set[int]] = {v.id: set() for v in graph.vertices}
    for b in graph.bonds:
        if b.endpoint_a in adj and b.endpoint_b in adj:
            adj[b.endpoint_a].add(b.endpoint_b)
            adj[b.endpoint_b].add(b.endpoint_a)
    start = graph.vertices[0].id
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def total_length(graph: MetricGraph) -> float:
    """Sum of optical bond lengths in meters; leads are excluded."""
    return math.fsum(b.optical_length for b in graph.bonds)


def wavelength_count(graph: MetricGraph, nu: float, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """Number of vacuum wavelengths at frequency ``nu`` spanned by all bonds."""
    if not nu > 0:
        raise ValueError(f"frequency must be positive, got {nu}")
    return total_length(graph) * nu / constants.c_vacuum


def with_boundary_override(graph: MetricGraph, vertex: int, bc: BoundaryCondition) -> MetricGraph:
    target = graph.vertex(vertex)  # KeyError on unknown id
    if bc is BoundaryCondition.DIRICHLET and any(l.vertex == vertex for l in graph.leads):
        raise ValueError(f"vertex {vertex} carries a lead and cannot be Dirichlet")
    if target.bc is bc:
        return graph
    vertices = tuple(replace(v, bc=bc) if v.id == vertex else v for v in graph.vertices)
    return replace(graph, vertices=vertices)


def without_leads(graph: MetricGraph) -> MetricGraph:
    """The closed graph obtained by detaching every lead."""
    return replace(graph, leads=())


def make_graph(
    vertices: Iterable[tuple[int, str | BoundaryCondition]],
    bonds: Iterable[tuple[int, int, float]],
    lead_vertices: Iterable[int] = (),
) -> MetricGraph:
    """Convenience builder: bonds get ids in order, leads get ports in order."""
    vs = tuple(Vertex(vid, BoundaryCondition(bc)) for vid, bc in vertices)
    bs = tuple(Bond(i, a, b, float(l)) for i, (a, b, l) in enumerate(bonds))
    ls = tuple(Lead(p, v) for p, v in enumerate(lead_vertices))
    return MetricGraph(vs, bs, ls)


def paper_graph(which: str) -> MetricGraph:
    """One of the two bundled isoscattering graphs, ``"I"`` (4 vertices) or ``"II"`` (6 vertices).

    Leads sit on vertices 1 (port 0) and 2 (port 1) in both graphs. With this
    labeling the two-port S-matrices obey S_II = T^-1 S_I T for T = [[1, -1], [1, 1]].
    """
    a, b, c = LENGTH_A, LENGTH_B, LENGTH_C
    N, D = "neumann", "dirichlet"
    if which == "I":
        return make_graph(
            [(1, N), (2, N), (3, N), (4, D)],
            [(1, 2, 2 * a), (1, 2, 2 * b), (1, 4, c), (2, 3, c)],
            [1, 2],
        )
    if which == "II":
        # Both Neumann-terminated pendants hang off vertex 1, both Dirichlet ones off vertex 2.
        return make_graph(
            [(1, N), (2, N), (3, N), (4, D), (5, N), (6, D)],
            [(1, 2, 2 * c), (1, 3, a), (1, 5, b), (2, 4, a), (2, 6, b)],
            [1, 2],
        )
    raise ValueError(f"unknown paper graph {which!r}; expected 'I' or 'II'")
