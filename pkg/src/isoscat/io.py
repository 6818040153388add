"""Graph JSON files and sweep CSV output."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path
from typing import IO

import numpy as np

from .analysis import SweepRecord
from .graph import Bond, BoundaryCondition, InvalidGraphError, Lead, MetricGraph, Vertex, validate

BUNDLED = {"paper-I": "paper-I.json", "paper-II": "paper-II.json"}


class GraphFormatError(ValueError):
    pass


def _check_keys(obj, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise GraphFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise GraphFormatError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}")
    missing = sorted(allowed - set(obj))
    if missing:
        raise GraphFormatError(f"{where}: missing key(s) {', '.join(map(repr, missing))}")


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def parse_graph(text: str) -> MetricGraph:
    """Parse and validate a graph description. Any problem raises with the offending element named."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _check_keys(doc, {"vertices", "bonds", "leads"}, "graph")
    for key in ("vertices", "bonds", "leads"):
        if not isinstance(doc[key], list):
            raise GraphFormatError(f"graph.{key}: expected a list")

    vertices = []
    for i, v in enumerate(doc["vertices"]):
        where = f"vertices[{i}]"
        _check_keys(v, {"id", "bc"}, where)
        try:
            bc = BoundaryCondition(v["bc"])
        except ValueError:
            raise GraphFormatError(
                f"{where}.bc: unknown boundary condition {v['bc']!r} (expected 'neumann' or 'dirichlet')"
            ) from None
        vertices.append(Vertex(_int(v["id"], f"{where}.id"), bc))

    bonds = []
    for i, b in enumerate(doc["bonds"]):
        where = f"bonds[{i}]"
        _check_keys(b, {"from", "to", "optical_length_m"}, where)
        length = b["optical_length_m"]
        if isinstance(length, bool) or not isinstance(length, (int, float)):
            raise GraphFormatError(f"{where}.optical_length_m: expected a number, got {length!r}")
        bonds.append(Bond(i, _int(b["from"], f"{where}.from"), _int(b["to"], f"{where}.to"), float(length)))

    leads = []
    for i, l in enumerate(doc["leads"]):
        where = f"leads[{i}]"
        _check_keys(l, {"port", "vertex"}, where)
        leads.append(Lead(_int(l["port"], f"{where}.port"), _int(l["vertex"], f"{where}.vertex")))

    graph = MetricGraph(tuple(vertices), tuple(bonds), tuple(leads))
    violations = validate(graph)
    if violations:
        raise InvalidGraphError(violations)
    return graph


def serialize_graph(graph: MetricGraph) -> str:
    """Canonical JSON text: elements sorted by id/port, floats at 17 significant digits."""

    def num(x: float) -> str:
        # repr() is the shortest string that round-trips, i.e. at most 17 significant digits
        return repr(float(x))

    lines = ["{", '  "vertices": [']
    lines += [
        f'    {{"id": {v.id}, "bc": "{v.bc.value}"}}' + ("," if i < graph.n_vertices - 1 else "")
        for i, v in enumerate(graph.vertices)
    ]
    lines += ["  ],", '  "bonds": [']
    lines += [
        f'    {{"from": {b.endpoint_a}, "to": {b.endpoint_b}, "optical_length_m": {num(b.optical_length)}}}'
        + ("," if i < graph.n_bonds - 1 else "")
        for i, b in enumerate(graph.bonds)
    ]
    lines += ["  ],", '  "leads": [']
    lines += [
        f'    {{"port": {l.port}, "vertex": {l.vertex}}}' + ("," if i < graph.n_leads - 1 else "")
        for i, l in enumerate(graph.leads)
    ]
    lines += ["  ]", "}", ""]
    return "\n".join(lines)


def bundled_graph_text(name: str) -> str:
    if name not in BUNDLED:
        raise KeyError(f"no bundled graph named {name!r}; available: {', '.join(BUNDLED)}")
    return resources.files("isoscat.data").joinpath(BUNDLED[name]).read_text(encoding="utf-8")


def load_graph(ref: str) -> MetricGraph:
    """Load a graph from a file path, or a bundled one by name (``paper-I``, ``paper-II``)."""
    if ref in BUNDLED:
        return parse_graph(bundled_graph_text(ref))
    path = Path(ref)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {ref}")
    return parse_graph(path.read_text(encoding="utf-8"))


def _num(x: float) -> str:
    return repr(float(x))


def sweep_header(n_ports: int) -> list[str]:
    sep = "_" if n_ports > 9 else ""
    cols = ["nu_hz"]
    for i in range(1, n_ports + 1):
        for j in range(1, n_ports + 1):
            cols += [f"re_s{i}{sep}{j}", f"im_s{i}{sep}{j}"]
    return cols + ["det_abs", "det_phase_unwrapped_rad"]


def write_sweep_csv(record: SweepRecord, destination: str | Path | IO[str]) -> int:
    """Write one row per grid point; returns the number of data rows.

    A trailing ``gap`` column is added only when the record has gaps; gap rows
    leave the numeric fields empty.
    """
    header = sweep_header(record.n_ports)
    has_gaps = bool(record.gaps)
    if has_gaps:
        header.append("gap")
    gaps = set(record.gaps)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, nu in enumerate(record.nu_grid):
        if i in gaps:
            writer.writerow([_num(nu)] + [""] * (len(header) - 2) + ["gap"])
            continue
        row = [_num(nu)]
        for z in np.asarray(record.s[i]).ravel():
            row += [_num(z.real), _num(z.imag)]
        row += [_num(record.det_amplitude[i]), _num(record.det_phase_unwrapped[i])]
        if has_gaps:
            row.append("")
        writer.writerow(row)
    _emit(buf.getvalue(), destination)
    return len(record.nu_grid)


def write_table_csv(header: list[str], rows, destination: str | Path | IO[str]) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    n = 0
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
        n += 1
    _emit(buf.getvalue(), destination)
    return n


def _emit(text: str, destination) -> None:
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
