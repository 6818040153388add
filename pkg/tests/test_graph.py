import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from isoscat.graph import (
    Bond,
    BoundaryCondition,
    Lead,
    MetricGraph,
    PhysicalConstants,
    Vertex,
    make_graph,
    paper_graph,
    total_length,
    validate,
    wavelength_count,
    with_boundary_override,
    without_leads,
)

N, D = BoundaryCondition.NEUMANN, BoundaryCondition.DIRICHLET

# table values, meters
A, B, C = 0.0985, 0.1847, 0.2420


@pytest.mark.parametrize("which", ["I", "II"])
def test_paper_graphs_valid(which):
    assert validate(paper_graph(which)) == []


def test_paper_graph_I_structure():
    g = paper_graph("I")
    assert (g.n_vertices, g.n_bonds, g.n_leads) == (4, 4, 2)
    assert g.valency(1) == g.valency(2) == 4
    assert g.valency(3) == g.valency(4) == 1
    assert [v.bc for v in g.vertices] == [N, N, N, D]
    pairs = [tuple(sorted((b.endpoint_a, b.endpoint_b))) for b in g.bonds]
    assert pairs.count((1, 2)) == 2


def test_paper_graph_II_structure():
    g = paper_graph("II")
    assert (g.n_vertices, g.n_bonds) == (6, 5)
    assert {v.id for v in g.vertices if v.bc is D} == {4, 6}
    pairs = [tuple(sorted((b.endpoint_a, b.endpoint_b))) for b in g.bonds]
    assert len(set(pairs)) == len(pairs)


@pytest.mark.parametrize("which", ["I", "II"])
def test_leads_on_neumann_hubs(which):
    g = paper_graph(which)
    assert [(l.port, l.vertex) for l in g.leads] == [(0, 1), (1, 2)]
    assert all(g.vertex(l.vertex).bc is N for l in g.leads)


def test_total_length():
    expected = 2 * A + 2 * B + 2 * C
    assert expected == pytest.approx(1.0504, abs=1e-12)
    assert total_length(paper_graph("I")) == pytest.approx(expected, abs=1e-12)
    assert total_length(paper_graph("II")) == pytest.approx(expected, abs=1e-12)
    assert total_length(MetricGraph((Vertex(0),))) == 0


def test_wavelength_count():
    n1 = wavelength_count(paper_graph("I"), 1.7e9)
    assert n1 == pytest.approx(5.96, abs=0.01)
    assert wavelength_count(paper_graph("II"), 1.7e9) == pytest.approx(n1, rel=1e-12)
    assert wavelength_count(paper_graph("I"), 1e-3) < 1e-11
    with pytest.raises(ValueError):
        wavelength_count(paper_graph("I"), 0.0)


def test_validate_zero_length():
    g = make_graph([(0, "neumann"), (1, "dirichlet")], [(0, 1, 0.0)], [0])
    assert "nonpositive length, bond id=0" in validate(g)


def test_validate_lead_on_dirichlet():
    g = make_graph([(0, "dirichlet"), (1, "dirichlet")], [(0, 1, 1.0)], [0])
    assert any(v.startswith("lead on Dirichlet vertex") for v in validate(g))


def test_validate_other_breaches():
    g = MetricGraph(
        (Vertex(0), Vertex(1), Vertex(2), Vertex(3)),
        (Bond(0, 0, 0, 1.0), Bond(1, 1, 2, 1.0), Bond(2, 2, 9, 1.0)),
        (Lead(1, 1),),
    )
    report = validate(g)
    assert "self-loop, bond id=0" in report
    assert any("unknown vertex id=9" in v for v in report)
    assert any("lead ports" in v for v in report)
    assert "isolated vertex id=3" in report
    assert "graph is not connected" in report


def test_single_dirichlet_vertex_is_rejected():
    assert validate(MetricGraph((Vertex(1, D),))) != []


def test_boundary_override():
    g = paper_graph("II")
    h = with_boundary_override(g, 5, D)
    assert h.vertex(5).bc is D
    assert g.vertex(5).bc is N
    assert [v for v in h.vertices if v.id != 5] == [v for v in g.vertices if v.id != 5]
    assert with_boundary_override(h, 5, N) == g
    assert with_boundary_override(g, 3, N) == g


def test_boundary_override_errors():
    with pytest.raises(ValueError, match="lead"):
        with_boundary_override(paper_graph("II"), 1, D)
    with pytest.raises(KeyError):
        with_boundary_override(paper_graph("II"), 42, D)


def test_without_leads():
    closed = without_leads(paper_graph("I"))
    assert closed.n_leads == 0
    assert validate(closed) == []
    assert closed.valency(1) == 3


def test_physical_constants():
    pc = PhysicalConstants()
    assert pc.physical_length(pc.optical_length(0.3)) == pytest.approx(0.3)
    assert pc.physical_length(A) == pytest.approx(A / math.sqrt(2.08))
    with pytest.raises(ValueError):
        PhysicalConstants(epsilon=0.5)


@given(
    lengths=st.lists(st.floats(0.01, 2.0), min_size=1, max_size=8),
    shift=st.integers(1, 50),
)
def test_total_length_additive_and_relabel_invariant(lengths, shift):
    n = len(lengths) + 1
    path = make_graph([(i, "neumann") for i in range(n)], [(i, i + 1, l) for i, l in enumerate(lengths)])
    relabeled = make_graph(
        [(i + shift, "neumann") for i in range(n)], [(i + shift, i + 1 + shift, l) for i, l in enumerate(lengths)]
    )
    assert total_length(path) == pytest.approx(math.fsum(lengths), rel=1e-15)
    assert total_length(relabeled) == total_length(path)
