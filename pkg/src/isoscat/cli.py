"""Command-line entry point.

Exit status: 0 success, 1 error, 2 when compare/transplant finds the
property violated at the configured tolerance.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

from . import analysis, io, solver
from .graph import BoundaryCondition, InvalidGraphError, MetricGraph, with_boundary_override, without_leads

log = logging.getLogger("isoscat")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2
COMMANDS = ("sweep", "compare", "transplant", "spectrum", "poles", "builtin")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BcOverride:
    vertex: int
    bc: BoundaryCondition
    target: str = "a"  # which graph of a pair


@dataclass(frozen=True)
class RunConfig:
    command: str
    graphs: tuple[str, ...]
    nu_min: float = analysis.DEFAULT_NU_MIN
    nu_max: float = analysis.DEFAULT_NU_MAX
    points: int = analysis.DEFAULT_POINTS
    loss: solver.LossModel = solver.Lossless()
    bc_overrides: tuple[BcOverride, ...] = ()
    output: str | None = None
    tolerance: str = "exact"
    k_min: float = 0.05
    k_max: float = 70.0
    k_step: float = 1e-3
    re_range: tuple[float, float] = (0.0, 40.0)
    im_range: tuple[float, float] = (-3.0, 0.0)
    grid: tuple[int, int] = (400, 60)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not 0 < self.nu_min < self.nu_max:
            raise ConfigError("need 0 < fmin < fmax")
        if self.points < 2:
            raise ConfigError("need --points >= 2")
        if self.tolerance not in analysis.TOLERANCES:
            raise ConfigError(f"unknown tolerance preset {self.tolerance!r}")


def parse_loss(text: str) -> solver.LossModel:
    """``lossless``, ``constant:<im_k>`` or ``sqrt:<beta>,<nu_ref_ghz>``."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "lossless" and not arg:
            return solver.Lossless()
        if kind == "constant":
            return solver.ConstantLoss(float(arg))
        if kind == "sqrt":
            beta, nu_ref = arg.split(",")
            return solver.SqrtFrequencyLoss(float(beta), float(nu_ref) * 1e9)
    except ValueError as exc:
        raise ConfigError(f"bad --loss {text!r}: {exc}") from None
    raise ConfigError(f"bad --loss {text!r}; expected lossless, constant:<im_k> or sqrt:<beta>,<nu_ref_ghz>")


def parse_override(text: str) -> BcOverride:
    """``<vertex>:<neumann|dirichlet>[@a|b]``."""
    spec, _, target = text.partition("@")
    vertex, _, cond = spec.partition(":")
    try:
        return BcOverride(int(vertex), BoundaryCondition(cond.lower()), target or "a")
    except ValueError:
        raise ConfigError(f"bad --set-bc {text!r}; expected <vertex>:<neumann|dirichlet>@<a|b>") from None


def _apply_overrides(graph: MetricGraph, overrides, target: str) -> MetricGraph:
    for ov in overrides:
        if ov.target != target:
            continue
        try:
            graph = with_boundary_override(graph, ov.vertex, ov.bc)
        except KeyError:
            raise ConfigError(f"--set-bc: graph {target} has no vertex {ov.vertex}") from None
        except ValueError as exc:
            raise ConfigError(f"--set-bc: {exc}") from None
    return graph


def _load(config: RunConfig, index: int) -> MetricGraph:
    target = "ab"[index]
    return _apply_overrides(io.load_graph(config.graphs[index]), config.bc_overrides, target)


def _open_output(config: RunConfig, stdout: IO[str]):
    return config.output if config.output else stdout


def _write_report(lines: list[str], config: RunConfig, stdout: IO[str]) -> None:
    text = "\n".join(lines) + "\n"
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def _need_graphs(config: RunConfig, n: int) -> None:
    if len(config.graphs) != n:
        raise ConfigError(f"{config.command} needs {n} graph argument(s), got {len(config.graphs)}")


def run(config: RunConfig, stdout: IO[str] = sys.stdout) -> int:
    """Execute one command; returns the exit status."""
    cmd = config.command
    tol = analysis.TOLERANCES[config.tolerance]
    grid_args = dict(nu_min=config.nu_min, nu_max=config.nu_max, points=config.points, loss=config.loss)

    if cmd == "builtin":
        _need_graphs(config, 1)
        text = io.bundled_graph_text(config.graphs[0])
        if config.output:
            Path(config.output).write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
        return EXIT_OK

    if cmd == "sweep":
        _need_graphs(config, 1)
        record = analysis.sweep(_load(config, 0), **grid_args)
        n = io.write_sweep_csv(record, _open_output(config, stdout))
        log.info("wrote %d rows (%d gaps)", n, len(record.gaps))
        return EXIT_OK

    if cmd in ("compare", "transplant"):
        _need_graphs(config, 2)
        a = analysis.sweep(_load(config, 0), **grid_args)
        b = analysis.sweep(_load(config, 1), **grid_args)
        header = [
            f"command = {cmd}",
            f"graph_a = {config.graphs[0]}",
            f"graph_b = {config.graphs[1]}",
            f"loss = {config.loss!r}",
            f"tolerance_preset = {config.tolerance}",
        ]
        if cmd == "compare":
            report = analysis.compare_isoscattering(a, b, tol.amplitude, tol.phase)
            _write_report(header + report.as_lines(), config, stdout)
            return EXIT_OK if report.verdict_isoscattering else EXIT_VIOLATED
        residual = analysis.check_transplantation(a, b)
        holds = residual < tol.transplant
        _write_report(
            header
            + [
                f"n_points = {len(a)}",
                f"nu_min_hz = {a.nu_grid[0]!r}",
                f"nu_max_hz = {a.nu_grid[-1]!r}",
                f"transplant_residual_max = {residual!r}",
                f"tol_transplant = {tol.transplant!r}",
                f"verdict_transplantation = {str(holds).lower()}",
            ],
            config,
            stdout,
        )
        return EXIT_OK if holds else EXIT_VIOLATED

    if cmd == "spectrum":
        _need_graphs(config, 1)
        closed = without_leads(_load(config, 0))
        spec = solver.eigenvalues(closed, config.k_min, config.k_max, config.k_step)
        rows = zip(spec.eigen_k.tolist(), spec.multiplicities.tolist(), spec.residuals.tolist())
        io.write_table_csv(["k_per_m", "multiplicity", "residual"], rows, _open_output(config, stdout))
        return EXIT_OK

    if cmd == "poles":
        _need_graphs(config, 1)
        poles = solver.find_poles(_load(config, 0), config.re_range, config.im_range, config.grid)
        for msg in poles.diagnostics:
            log.info(msg)
        for k in poles.bound_states.tolist():
            log.info("bound state on the real axis at k=%r (not a pole of S)", k)
        rows = ((p.real, p.imag, r) for p, r in zip(poles.poles.tolist(), poles.residuals.tolist()))
        io.write_table_csv(["re_k_per_m", "im_k_per_m", "residual"], rows, _open_output(config, stdout))
        return EXIT_OK

    raise ConfigError(f"unknown command {cmd!r}")  # pragma: no cover


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isoscat", description="Scattering on open metric graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def freq(sp):
        sp.add_argument("--fmin", type=float, default=analysis.DEFAULT_NU_MIN / 1e9, help="GHz")
        sp.add_argument("--fmax", type=float, default=analysis.DEFAULT_NU_MAX / 1e9, help="GHz")
        sp.add_argument("--points", type=int, default=analysis.DEFAULT_POINTS)
        sp.add_argument("--loss", default="lossless", help="lossless | constant:<im_k> | sqrt:<beta>,<nu_ref_ghz>")

    def common(sp):
        sp.add_argument("--set-bc", action="append", default=[], metavar="V:COND@a|b")
        sp.add_argument("-o", "--output")

    sp = sub.add_parser("sweep", help="S(nu) sweep to CSV")
    sp.add_argument("graph")
    freq(sp)
    common(sp)

    for name in ("compare", "transplant"):
        sp = sub.add_parser(name)
        sp.add_argument("graph_a")
        sp.add_argument("graph_b")
        freq(sp)
        common(sp)
        sp.add_argument("--tol", choices=sorted(analysis.TOLERANCES), default="exact")

    sp = sub.add_parser("spectrum", help="eigenvalues of the graph with its leads removed")
    sp.add_argument("graph")
    sp.add_argument("--kmin", type=float, default=0.05)
    sp.add_argument("--kmax", type=float, default=70.0)
    sp.add_argument("--kstep", type=float, default=1e-3)
    common(sp)

    sp = sub.add_parser("poles", help="resonance poles in a rectangle of complex k")
    sp.add_argument("graph")
    sp.add_argument("--re", type=float, nargs=2, default=(0.0, 40.0), metavar=("MIN", "MAX"))
    sp.add_argument("--im", type=float, nargs=2, default=(-3.0, 0.0), metavar=("MIN", "MAX"))
    sp.add_argument("--grid", type=int, nargs=2, default=(400, 60), metavar=("N_RE", "N_IM"))
    common(sp)

    sp = sub.add_parser("builtin", help="write a bundled graph file")
    sp.add_argument("name", choices=sorted(io.BUNDLED))
    sp.add_argument("-o", "--output")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    graphs = (ns.graph_a, ns.graph_b) if cmd in ("compare", "transplant") else (
        (ns.name,) if cmd == "builtin" else (ns.graph,)
    )
    kw: dict = dict(command=cmd, graphs=graphs, output=ns.output)
    if hasattr(ns, "fmin"):
        kw.update(nu_min=ns.fmin * 1e9, nu_max=ns.fmax * 1e9, points=ns.points, loss=parse_loss(ns.loss))
    if hasattr(ns, "set_bc"):
        kw["bc_overrides"] = tuple(parse_override(s) for s in ns.set_bc)
    if hasattr(ns, "tol"):
        kw["tolerance"] = ns.tol
    if cmd == "spectrum":
        kw.update(k_min=ns.kmin, k_max=ns.kmax, k_step=ns.kstep)
    if cmd == "poles":
        kw.update(re_range=tuple(ns.re), im_range=tuple(ns.im), grid=tuple(ns.grid))
    return RunConfig(**kw)


def main(argv: Sequence[str] | None = None, stdout: IO[str] | None = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    try:
        return run(config_from_args(ns), stdout)
    except FileNotFoundError as exc:
        msg = str(exc) if str(exc).startswith("file not found") else f"file not found: {exc.filename}"
        print(f"error: {msg}", file=sys.stderr)
    except (InvalidGraphError, io.GraphFormatError, ConfigError, solver.SingularSystemError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR
