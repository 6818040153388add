"""Frequency sweeps, determinant comparison and transplantation checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .graph import MetricGraph
from .solver import Lossless, LossModel, SMatrix, scattering_matrices

DEFAULT_NU_MIN = 0.01e9
DEFAULT_NU_MAX = 1.7e9
DEFAULT_POINTS = 2048


@dataclass(frozen=True)
class Tolerance:
    amplitude: float
    phase: float
    transplant: float


TOLERANCES = {
    "exact": Tolerance(1e-8, 1e-8, 1e-8),
    "experimental": Tolerance(0.05, 0.05, 0.05),
}


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    """S-matrices and det S over a frequency grid.

    Arrays are indexed by grid point. At singular points (``gaps``) the S
    entries and det fields are NaN. The unwrapped phase is continuous across
    the non-gap points only.
    """

    nu_grid: np.ndarray
    s: np.ndarray = field(repr=False)  # (N, L, L) complex
    det_amplitude: np.ndarray = field(repr=False)
    det_phase_unwrapped: np.ndarray = field(repr=False)
    gaps: tuple[int, ...] = ()

    def __len__(self):
        return len(self.nu_grid)

    @property
    def n_ports(self) -> int:
        return self.s.shape[1]

    @property
    def valid(self) -> np.ndarray:
        mask = np.ones(len(self.nu_grid), dtype=bool)
        mask[list(self.gaps)] = False
        return mask

    def s_matrix(self, i: int) -> SMatrix:
        return SMatrix(float(self.nu_grid[i]), self.s[i])

    @property
    def s_matrices(self) -> list[SMatrix]:
        return [self.s_matrix(i) for i in range(len(self))]


def unwrap_phase(principal) -> np.ndarray:
    """Add multiples of 2 pi so that successive differences satisfy |d| <= pi."""
    return np.unwrap(np.asarray(principal, dtype=float))


def frequency_grid(nu_min: float, nu_max: float, points: int) -> np.ndarray:
    if not 0 < nu_min < nu_max:
        raise ValueError("need 0 < nu_min < nu_max")
    if points < 2:
        raise ValueError("need at least 2 points")
    grid = np.linspace(nu_min, nu_max, points)
    grid[-1] = nu_max
    return grid


def sweep_from_s(nu_grid, s, gaps=()) -> SweepRecord:
    """Build a record from precomputed S-matrices (NaN rows are treated as gaps)."""
    nu_grid = np.asarray(nu_grid, dtype=float)
    s = np.asarray(s, dtype=complex)
    if s.ndim != 3 or s.shape[0] != len(nu_grid) or s.shape[1] != s.shape[2]:
        raise ValueError("s must have shape (N, L, L) matching the grid")
    bad = set(int(i) for i in gaps) | set(np.flatnonzero(np.isnan(s).any(axis=(1, 2))).tolist())
    det = np.full(len(nu_grid), np.nan + 0j)
    ok = np.array([i not in bad for i in range(len(nu_grid))], dtype=bool)
    det[ok] = np.linalg.det(s[ok])
    bad |= set(np.flatnonzero(ok & (det == 0)).tolist())
    ok = np.array([i not in bad for i in range(len(nu_grid))], dtype=bool)
    amp = np.abs(det)
    amp[~ok] = np.nan
    phase = np.full(len(nu_grid), np.nan)
    principal = np.angle(det[ok])
    if principal.size:
        steps = np.abs(np.angle(np.exp(1j * np.diff(principal))))
        if steps.size and steps.max() > 0.9 * math.pi:
            warnings.warn(
                "adjacent det phases differ by nearly pi; refine the frequency grid",
                RuntimeWarning,
                stacklevel=3,
            )
        phase[ok] = unwrap_phase(principal)
    s = s.copy()
    s[~ok] = np.nan
    return SweepRecord(nu_grid, s, amp, phase, tuple(sorted(bad)))


def sweep(
    graph: MetricGraph,
    nu_min: float = DEFAULT_NU_MIN,
    nu_max: float = DEFAULT_NU_MAX,
    points: int = DEFAULT_POINTS,
    loss: LossModel = Lossless(),
) -> SweepRecord:
    """S(nu) on a uniform grid including both endpoints; singular points become gaps."""
    grid = frequency_grid(nu_min, nu_max, points)
    s, singular = scattering_matrices(graph, grid, loss)
    return sweep_from_s(grid, s, np.flatnonzero(singular))


@dataclass(frozen=True)
class ComparisonReport:
    max_det_abs_diff: float  # max |det S_a - det S_b|
    max_amplitude_diff: float  # max ||det S_a| - |det S_b||
    max_phase_diff: float  # unwrapped, after removing one global 2 pi offset
    l2_det_diff: float  # RMS of |det S_a - det S_b| over the common points
    transplant_residual_max: float
    verdict_isoscattering: bool
    tol_amp: float
    tol_phase: float
    n_points: int
    n_gaps: int
    nu_min: float
    nu_max: float

    def as_lines(self) -> list[str]:
        rows = [
            ("n_points", self.n_points),
            ("n_gaps", self.n_gaps),
            ("nu_min_hz", self.nu_min),
            ("nu_max_hz", self.nu_max),
            ("max_det_abs_diff", self.max_det_abs_diff),
            ("max_amplitude_diff", self.max_amplitude_diff),
            ("max_phase_diff_rad", self.max_phase_diff),
            ("l2_det_diff", self.l2_det_diff),
            ("transplant_residual_max", self.transplant_residual_max),
            ("tol_amp", self.tol_amp),
            ("tol_phase", self.tol_phase),
            ("verdict_isoscattering", str(self.verdict_isoscattering).lower()),
        ]
        return [f"{k} = {_fmt(v)}" for k, v in rows]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _check_grids(a: SweepRecord, b: SweepRecord) -> None:
    if len(a.nu_grid) != len(b.nu_grid) or not np.array_equal(a.nu_grid, b.nu_grid):
        raise GridMismatchError("sweeps are on different frequency grids")


def compare_isoscattering(
    sweep_a: SweepRecord,
    sweep_b: SweepRecord,
    tol_amp: float = TOLERANCES["exact"].amplitude,
    tol_phase: float = TOLERANCES["exact"].phase,
) -> ComparisonReport:
    _check_grids(sweep_a, sweep_b)
    common = sweep_a.valid & sweep_b.valid
    n_gaps = int((~common).sum())
    if not common.any():
        raise ValueError("no common non-gap grid points")
    diff = np.abs(np.linalg.det(sweep_a.s[common]) - np.linalg.det(sweep_b.s[common]))

    pa = sweep_a.det_phase_unwrapped[common]
    pb = sweep_b.det_phase_unwrapped[common]
    offset = 2 * math.pi * round((pa[0] - pb[0]) / (2 * math.pi))
    phase_diff = np.abs(pa - pb - offset)

    amp_diff = np.abs(sweep_a.det_amplitude[common] - sweep_b.det_amplitude[common])
    max_det = float(diff.max())
    max_phase = float(phase_diff.max())
    try:
        residual = check_transplantation(sweep_a, sweep_b)
    except ValueError:
        residual = math.nan
    return ComparisonReport(
        max_det_abs_diff=max_det,
        max_amplitude_diff=float(amp_diff.max()),
        max_phase_diff=max_phase,
        l2_det_diff=float(np.sqrt(np.mean(diff**2))),
        transplant_residual_max=residual,
        verdict_isoscattering=bool(max_det < tol_amp and max_phase < tol_phase),
        tol_amp=tol_amp,
        tol_phase=tol_phase,
        n_points=len(sweep_a),
        n_gaps=n_gaps,
        nu_min=float(sweep_a.nu_grid[0]),
        nu_max=float(sweep_a.nu_grid[-1]),
    )


@dataclass(frozen=True)
class TransplantationMatrix:
    t: np.ndarray
    t_inverse: np.ndarray

    @classmethod
    def default(cls) -> "TransplantationMatrix":
        return cls(np.array([[1.0, -1.0], [1.0, 1.0]]), 0.5 * np.array([[1.0, 1.0], [-1.0, 1.0]]))

    @classmethod
    def from_matrix(cls, t) -> "TransplantationMatrix":
        t = np.asarray(t, dtype=float)
        return cls(t, np.linalg.inv(t))


def transplant(s, t: TransplantationMatrix | None = None):
    """T^-1 S T. Accepts an SMatrix (returns one at the same nu) or an (..., 2, 2) array."""
    t = t or TransplantationMatrix.default()
    entries = s.entries if isinstance(s, SMatrix) else np.asarray(s)
    if entries.shape[-2:] != (2, 2):
        raise ValueError(f"transplantation acts on 2x2 matrices, got shape {entries.shape}")
    out = t.t_inverse @ entries @ t.t
    return SMatrix(s.nu, out) if isinstance(s, SMatrix) else out


def check_transplantation(
    sweep_a: SweepRecord, sweep_b: SweepRecord, t: TransplantationMatrix | None = None
) -> float:
    """Largest entrywise |T^-1 S_a T - S_b| over the common non-gap points."""
    _check_grids(sweep_a, sweep_b)
    if sweep_a.n_ports != 2 or sweep_b.n_ports != 2:
        raise ValueError("transplantation check needs two 2-port sweeps")
    common = sweep_a.valid & sweep_b.valid
    moved = transplant(sweep_a.s[common], t)
    return float(np.abs(moved - sweep_b.s[common]).max())
