"""Wave propagation on open metric graphs.

Conventions: time dependence exp(-i w t); on a bond from u to w,
psi(x) = alpha exp(ikx) + beta exp(-ikx) with x = 0 at u; on lead j,
psi(x) = I_j exp(-ikx) + O_j exp(ikx) with x measured away from the vertex.
Absorption enters as Im k > 0 so that exp(ikl) decays along a bond.
Resonance poles then sit at Im k < 0.

Unknown vector layout: [alpha_0, beta_0, alpha_1, beta_1, ..., O_0, ..., O_{L-1}].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from .graph import C_VACUUM, BoundaryCondition, MetricGraph, total_length


# ---------------------------------------------------------------------------
# Loss models and the complex wavenumber
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lossless:
    def im_k(self, nu):
        return np.zeros_like(np.asarray(nu, dtype=float))


@dataclass(frozen=True)
class ConstantLoss:
    im_k_per_m: float

    def __post_init__(self):
        if self.im_k_per_m < 0:
            raise ValueError("im_k must be >= 0")

    def im_k(self, nu):
        return np.full_like(np.asarray(nu, dtype=float), self.im_k_per_m)


@dataclass(frozen=True)
class SqrtFrequencyLoss:
    """Im k = beta * sqrt(nu / nu_ref); beta is a free parameter, there is no default."""

    beta: float
    nu_ref: float

    def __post_init__(self):
        if self.beta < 0 or self.nu_ref <= 0:
            raise ValueError("need beta >= 0 and nu_ref > 0")

    def im_k(self, nu):
        return self.beta * np.sqrt(np.asarray(nu, dtype=float) / self.nu_ref)


LossModel = Union[Lossless, ConstantLoss, SqrtFrequencyLoss]


def wavenumber(nu, loss: LossModel = Lossless(), c_vacuum: float = C_VACUUM):
    """Complex vacuum wavenumber for frequency ``nu`` (Hz, scalar or array), to be used with optical lengths."""
    nu_arr = np.asarray(nu, dtype=float)
    if np.any(~(nu_arr > 0)):
        raise ValueError("frequency must be positive")
    k = 2 * np.pi * nu_arr / c_vacuum + 1j * loss.im_k(nu_arr)
    return complex(k) if k.ndim == 0 else k


# ---------------------------------------------------------------------------
# System assembly
# ---------------------------------------------------------------------------


class SingularSystemError(ArithmeticError):
    """The linear system is singular at this wavenumber (bound state of the open graph)."""

    def __init__(self, k, rcond):
        self.k = k
        self.rcond = rcond
        super().__init__(f"singular system at k={k} (rcond={rcond:.3e})")


@dataclass(frozen=True)
class SystemStencil:
    """M(k) = const + sum_b plus[b] exp(ik l_b) + minus[b] exp(-ik l_b), right-hand side ``rhs``.

    Derivative equations are divided by ik, which leaves the solution and
    the zero set of det M (for k != 0) unchanged and keeps every entry O(1)
    on the real axis. ``rhs`` column j is the forcing for unit incoming
    amplitude in lead j.
    """

    const: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    lengths: np.ndarray
    rhs: np.ndarray
    n_bonds: int
    n_leads: int

    @property
    def size(self) -> int:
        return self.const.shape[0]

    def matrix(self, k):
        """M evaluated at scalar k (n x n) or at an array of k (..., n, n)."""
        k = np.asarray(k, dtype=complex)
        ep = np.exp(1j * np.multiply.outer(k, self.lengths))
        em = np.exp(-1j * np.multiply.outer(k, self.lengths))
        return (
            self.const
            + np.einsum("...b,bij->...ij", ep, self.plus)
            + np.einsum("...b,bij->...ij", em, self.minus)
        )


def build_stencil(graph: MetricGraph) -> SystemStencil:
    graph.require_valid()
    B, L = graph.n_bonds, graph.n_leads
    n = 2 * B + L
    # Each endpoint: (value terms, derivative/ik terms, value rhs, derivative rhs).
    # A term is (column, phase, bond index, coefficient) with phase in {0, +1, -1}.
    ends: dict[int, list] = {v.id: [] for v in graph.vertices}
    for i, b in enumerate(graph.bonds):
        ca, cb = 2 * i, 2 * i + 1
        ends[b.endpoint_a].append(
            ([(ca, 0, i, 1.0), (cb, 0, i, 1.0)], [(ca, 0, i, 1.0), (cb, 0, i, -1.0)], None, None)
        )
        ends[b.endpoint_b].append(
            ([(ca, 1, i, 1.0), (cb, -1, i, 1.0)], [(ca, 1, i, -1.0), (cb, -1, i, 1.0)], None, None)
        )
    for lead in graph.leads:
        col = 2 * B + lead.port
        # value I + O, outward derivative/ik O - I
        ends[lead.vertex].append(([(col, 0, 0, 1.0)], [(col, 0, 0, 1.0)], (lead.port, 1.0), (lead.port, -1.0)))

    const = np.zeros((n, n), dtype=complex)
    plus = np.zeros((B, n, n), dtype=complex)
    minus = np.zeros((B, n, n), dtype=complex)
    rhs = np.zeros((n, L), dtype=complex)

    def put(row, terms, sign):
        for col, phase, bi, coef in terms:
            target = const if phase == 0 else (plus[bi] if phase == 1 else minus[bi])
            target[row, col] += sign * coef

    def put_rhs(row, src, sign):
        if src is not None:
            port, coef = src
            rhs[row, port] -= sign * coef  # incoming terms move to the right-hand side

    row = 0
    for v in graph.vertices:
        incident = ends[v.id]
        if v.bc is BoundaryCondition.DIRICHLET:
            for val, _, val_rhs, _ in incident:
                put(row, val, 1.0)
                put_rhs(row, val_rhs, 1.0)
                row += 1
        else:
            for p in range(len(incident) - 1):
                put(row, incident[p][0], 1.0)
                put(row, incident[p + 1][0], -1.0)
                put_rhs(row, incident[p][2], 1.0)
                put_rhs(row, incident[p + 1][2], -1.0)
                row += 1
            for _, der, _, der_rhs in incident:
                put(row, der, 1.0)
                put_rhs(row, der_rhs, 1.0)
            row += 1
    assert row == n, (row, n)
    lengths = np.array([b.optical_length for b in graph.bonds], dtype=float)
    return SystemStencil(const, plus, minus, lengths, rhs, B, L)


def assemble_open_system(graph: MetricGraph, k: complex) -> tuple[np.ndarray, np.ndarray]:
    """Return (M, R): the (2B+L) square system matrix at ``k`` and the L injection columns."""
    if k == 0:
        raise ValueError("k = 0 makes the plane-wave ansatz degenerate")
    st = build_stencil(graph)
    return st.matrix(k), st.rhs.copy()


# ---------------------------------------------------------------------------
# Scattering matrices
# ---------------------------------------------------------------------------

RCOND_SINGULAR = 1e-13


@dataclass(frozen=True)
class SMatrix:
    nu: float
    entries: np.ndarray = field(repr=False)

    @property
    def n_ports(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _s_from_stencil(st: SystemStencil, k: complex) -> np.ndarray:
    m = st.matrix(k)
    rcond = 1.0 / np.linalg.cond(m)
    if not rcond > RCOND_SINGULAR:
        raise SingularSystemError(k, rcond)
    lu = scipy.linalg.lu_factor(m, check_finite=False)
    x = scipy.linalg.lu_solve(lu, st.rhs, check_finite=False)
    return x[2 * st.n_bonds :, :]


def scattering_matrix(graph: MetricGraph, nu: float, loss: LossModel = Lossless()) -> SMatrix:
    """S(nu): column j holds the outgoing amplitudes for unit incoming wave in lead j.

    Raises :class:`SingularSystemError` when nu hits a bound state of the open graph.
    """
    if graph.n_leads < 1:
        raise ValueError("scattering matrix needs at least one lead")
    st = build_stencil(graph)
    return SMatrix(float(nu), _s_from_stencil(st, wavenumber(nu, loss)))


def scattering_matrices(graph: MetricGraph, nus, loss: LossModel = Lossless()):
    """Vectorized S over a frequency grid.

    Returns ``(s, singular)``: an (N, L, L) array, NaN where the system is
    singular, and the boolean mask of singular points.
    """
    if graph.n_leads < 1:
        raise ValueError("scattering matrix needs at least one lead")
    st = build_stencil(graph)
    ks = np.atleast_1d(wavenumber(nus, loss))
    m = st.matrix(ks)
    singular = ~(1.0 / np.linalg.cond(m) > RCOND_SINGULAR)
    s = np.full((len(ks), st.n_leads, st.n_leads), np.nan + 0j)
    ok = ~singular
    if ok.any():
        rhs = np.broadcast_to(st.rhs, (int(ok.sum()),) + st.rhs.shape)
        s[ok] = np.linalg.solve(m[ok], rhs)[:, 2 * st.n_bonds :, :]
    return s, singular


def det_log(s) -> tuple[float, float]:
    """(|det S|, principal Im log det S in (-pi, pi])."""
    d = complex(np.linalg.det(np.asarray(s)))
    if d == 0:
        raise ZeroDivisionError("det S = 0, phase undefined")
    phase = math.atan2(d.imag, d.real)
    if phase == -math.pi:
        phase = math.pi
    return abs(d), phase


# ---------------------------------------------------------------------------
# Closed-graph spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumResult:
    eigen_k: np.ndarray  # distinct, strictly ascending
    residuals: np.ndarray  # sigma_min / ||M|| at each root
    multiplicities: np.ndarray

    def with_multiplicity(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(self.eigen_k, self.multiplicities)


def _singular_values(st: SystemStencil, k) -> np.ndarray:
    return np.linalg.svd(st.matrix(k), compute_uv=False)


_INV_PHI = (math.sqrt(5) - 1) / 2


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    # sigma_min is V-shaped at a simple root, so no parabolic steps.
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    return x1 if f1 < f2 else x2


def eigenvalues(
    closed_graph: MetricGraph,
    k_min: float,
    k_max: float,
    scan_step: float = 1e-3,
    threshold: float = 1e-8,
    k_tol: float = 1e-10,
) -> SpectrumResult:
    """Real wavenumbers in [k_min, k_max] where M(k) x = 0 has nontrivial solutions.

    Local minima of sigma_min(M(k)) / ||M(k)||_2 on a uniform scan are refined by
    golden-section search to a bracket narrower than ``k_tol`` and accepted when below ``threshold``. Multiplicity is the
    number of singular values below threshold at the refined root.
    """
    if closed_graph.n_leads:
        raise ValueError("eigenvalues() needs a closed graph (no leads)")
    if not 0 < k_min < k_max:
        raise ValueError("need 0 < k_min < k_max")
    coarse = math.pi / (2 * total_length(closed_graph))
    if scan_step > coarse:
        warnings.warn(
            f"scan_step {scan_step:g} exceeds pi/(2 * total length) = {coarse:g}; roots may be missed",
            RuntimeWarning,
            stacklevel=2,
        )
    st = build_stencil(closed_graph)
    n_pts = max(3, int(math.ceil((k_max - k_min) / scan_step)) + 1)
    grid = np.linspace(k_min, k_max, n_pts)
    sv = np.linalg.svd(st.matrix(grid), compute_uv=False)
    rel = sv[:, -1] / sv[:, 0]

    def objective(k):
        s = _singular_values(st, k)
        return s[-1] / s[0]

    roots, residuals, mults = [], [], []
    for i in range(n_pts):
        left = rel[i - 1] if i > 0 else np.inf
        right = rel[i + 1] if i < n_pts - 1 else np.inf
        if not (rel[i] <= left and rel[i] < right):
            continue
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_pts - 1)]
        k0 = _golden_min(objective, float(lo), float(hi), k_tol)
        s = _singular_values(st, k0)
        if s[-1] / s[0] >= threshold or not (k_min <= k0 <= k_max):
            continue
        roots.append(k0)
        residuals.append(s[-1] / s[0])
        mults.append(int(np.sum(s / s[0] < threshold)))

    # merge roots found from neighbouring scan minima
    merged_k, merged_r, merged_m = [], [], []
    for k0, r0, m0 in sorted(zip(roots, residuals, mults)):
        if merged_k and k0 - merged_k[-1] < 10 * k_tol:
            if r0 < merged_r[-1]:
                merged_k[-1], merged_r[-1] = k0, r0
            merged_m[-1] = max(merged_m[-1], m0)
            continue
        merged_k.append(k0)
        merged_r.append(r0)
        merged_m.append(m0)
    return SpectrumResult(np.array(merged_k), np.array(merged_r), np.array(merged_m, dtype=int))


# ---------------------------------------------------------------------------
# Resonance poles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoleSet:
    poles: np.ndarray  # complex k, sorted by real part
    residuals: np.ndarray  # |det M| / prod of row norms
    diagnostics: tuple[str, ...] = ()
    # real zeros of det M: bound states decoupled from the leads, not poles of S
    bound_states: np.ndarray = field(default_factory=lambda: np.array([]))


def _relative_det(st: SystemStencil, k):
    m = st.matrix(k)
    d = np.linalg.det(m)
    scale = np.prod(np.linalg.norm(m, axis=-1), axis=-1)
    return d, np.abs(d) / scale


def find_poles(
    graph: MetricGraph,
    re_range: tuple[float, float],
    im_range: tuple[float, float],
    grid: tuple[int, int] = (400, 60),
    tol: float = 1e-10,
    dedup: float = 1e-8,
    max_iter: int = 60,
) -> PoleSet:
    """Complex zeros of det M(k) in a rectangle of the lower half-plane (poles of S).

    Seeds are local minima of log|det M| on an n_re x n_im grid; each is
    polished by Newton's method with a central-difference derivative,
    h = 1e-6 (1 + |k|). Zeros on the real axis are bound states embedded in
    the continuum; they are returned in ``bound_states``, not as poles.
    """
    if graph.n_leads < 1:
        raise ValueError("pole search needs an open graph")
    (re0, re1), (im0, im1) = re_range, im_range
    n_re, n_im = grid
    if not (re0 < re1 and im0 < im1 and n_re >= 2 and n_im >= 2):
        return PoleSet(np.array([], dtype=complex), np.array([]), ("empty search rectangle",))
    st = build_stencil(graph)
    re = np.linspace(re0, re1, n_re)
    im = np.linspace(im0, im1, n_im)
    kk = re[None, :] + 1j * im[:, None]
    tiny = kk == 0
    kk = np.where(tiny, 1e-9, kk)
    _, rel = _relative_det(st, kk)
    with np.errstate(divide="ignore"):
        logd = np.log(rel)
    padded = np.pad(logd, 1, constant_values=np.inf)
    is_min = np.ones_like(logd, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            nb = padded[1 + di : 1 + di + n_im, 1 + dj : 1 + dj + n_re]
            is_min &= logd <= nb
    seeds = kk[is_min]

    slack = 1e-9
    real_axis_tol = 1e-10
    bound: list[float] = []
    diags: list[str] = []
    found: list[complex] = []
    resid: list[float] = []
    for seed in seeds:
        k = complex(seed)
        converged = False
        for _ in range(max_iter):
            d, r = _relative_det(st, k)
            if r < tol:
                converged = True
                break
            h = 1e-6 * (1 + abs(k))
            dd = (np.linalg.det(st.matrix(k + h)) - np.linalg.det(st.matrix(k - h))) / (2 * h)
            if dd == 0:
                break
            k = k - d / dd
        if not converged:
            diags.append(f"seed {complex(seed):.6g} did not converge")
            continue
        if abs(k) < 1e-6:
            diags.append(f"seed {complex(seed):.6g} converged to k=0, discarded")
            continue
        if not (re0 - slack <= k.real <= re1 + slack and im0 - slack <= k.imag <= im1 + slack):
            diags.append(f"seed {complex(seed):.6g} left the rectangle to {k:.6g}")
            continue
        if abs(k.imag) < real_axis_tol:
            if not any(abs(k.real - b) < dedup for b in bound):
                bound.append(k.real)
            continue
        if any(abs(k - p) < dedup for p in found):
            continue
        found.append(k)
        resid.append(float(_relative_det(st, k)[1]))

    order = sorted(range(len(found)), key=lambda i: (found[i].real, found[i].imag))
    return PoleSet(
        np.array([found[i] for i in order], dtype=complex),
        np.array([resid[i] for i in order]),
        tuple(diags),
        np.array(sorted(bound)),
    )
