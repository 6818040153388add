"""Exact scattering matrices of open metric graphs and the isoscattering pair checks."""

from .analysis import (
    ComparisonReport,
    SweepRecord,
    TransplantationMatrix,
    check_transplantation,
    compare_isoscattering,
    sweep,
    transplant,
    unwrap_phase,
)
from .graph import (
    Bond,
    BoundaryCondition,
    Lead,
    MetricGraph,
    PhysicalConstants,
    Vertex,
    paper_graph,
    total_length,
    validate,
    wavelength_count,
    with_boundary_override,
    without_leads,
)
from .io import load_graph, parse_graph, serialize_graph, write_sweep_csv
from .solver import (
    ConstantLoss,
    Lossless,
    PoleSet,
    SingularSystemError,
    SMatrix,
    SpectrumResult,
    SqrtFrequencyLoss,
    assemble_open_system,
    det_log,
    eigenvalues,
    find_poles,
    scattering_matrix,
    wavenumber,
)

__version__ = "0.1.0"
