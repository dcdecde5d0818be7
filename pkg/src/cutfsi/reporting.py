"""CSV and VTU output.

Every CSV starts with the resolved configuration as '#'-prefixed comment
lines so a result file is self-describing.  VTU files are ASCII XML
unstructured grids, one file per subdomain.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .analysis import ERROR_NORMS, ErrorReport, evaluate_scalar
from .config import SimulationConfig, format_config
from .discretization import Discretization
from .stepper import State, StepRecord

FLOAT_FMT = "%.8e"


def _write_csv(path, cfg: SimulationConfig, header: list[str],
               rows: list[list]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in format_config(cfg).splitlines():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([FLOAT_FMT % v if isinstance(v, float) else v
                             for v in row])


def write_step_log(path, cfg: SimulationConfig,
                   records: list[StepRecord]) -> None:
    """Per-step log: residuals and (if recorded) energy functionals."""
    energy_keys = sorted(records[0].energy) if records and records[0].energy else []
    header = ["n", "t", "solve_residual", "constraint_residual"] + energy_keys
    rows = [[r.n, float(r.t), float(r.solve_residual),
             float(r.constraint_residual)]
            + [float(r.energy[k]) for k in energy_keys] for r in records]
    _write_csv(path, cfg, header, rows)


def write_convergence_csv(path, cfg: SimulationConfig,
                          report: ErrorReport) -> None:
    """One row per level: h or k, the five errors, and the observed orders.

    Order cells are empty on the first level (no coarser level to compare).
    """
    label = "h" if report.mode == "space" else "k"
    header = ([label] + [f"err_{k}" for k in ERROR_NORMS]
              + [f"order_{k}" for k in ERROR_NORMS])
    orders = report.orders()
    rows = []
    for i, (lvl, errs) in enumerate(zip(report.levels, report.errors)):
        row = [float(lvl)] + [float(errs[k]) for k in ERROR_NORMS]
        if i == 0:
            row += [""] * len(ERROR_NORMS)
        else:
            row += [float(orders[i - 1][k]) for k in ERROR_NORMS]
        rows.append(row)
    _write_csv(path, cfg, header, rows)


def format_convergence_table(report: ErrorReport) -> str:
    """Human-readable table of errors and orders."""
    label = "h" if report.mode == "space" else "k"
    lines = [" ".join([f"{label:>10s}"] + [f"{k:>12s}" for k in ERROR_NORMS])]
    orders = report.orders()
    for i, (lvl, errs) in enumerate(zip(report.levels, report.errors)):
        lines.append(" ".join([f"{lvl:10.6f}"]
                              + [f"{errs[k]:12.5e}" for k in ERROR_NORMS]))
        if i > 0:
            lines.append(" ".join([f"{'order':>10s}"]
                                  + [f"{orders[i - 1][k]:12.2f}"
                                     for k in ERROR_NORMS]))
    return "\n".join(lines)


# -- VTU --------------------------------------------------------------------

_VTU_FIELDS = {"f": (("velocity", "vf", 2), ("pressure", "p", 1)),
               "s": (("velocity", "vs", 2), ("displacement", "u", 2))}


def write_vtu(path, disc: Discretization, state: State, side: str) -> None:
    """Subtriangulation of one side as a quad grid with nodal field data."""
    mesh = disc.mesh
    cells = disc.topo.tri_cells(side)
    conn = mesh.cell_vertices[cells]  # (nc, 4) counter-clockwise
    used = np.unique(conn)
    renum = np.full(mesh.vertices.shape[0], -1, dtype=int)
    renum[used] = np.arange(len(used))
    pts = mesh.vertices[used]
    owner = np.empty(len(used), dtype=int)
    for c, verts in zip(cells, conn):
        owner[renum[verts]] = c

    arrays = []
    for name, block, ncomp in _VTU_FIELDS[side]:
        coefs = state.x[disc.layout.slice(block)]
        comps = [evaluate_scalar(disc, block, coefs, pts, owner, comp=c)
                 for c in range(ncomp)]
        if ncomp == 2:
            comps.append(np.zeros(len(used)))
        arrays.append((name, np.column_stack(comps) if len(comps) > 1
                       else comps[0]))

    cls = disc.topo.cell_class[cells].astype(float)
    kappa = disc.topo.kappa(side)[cells]

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write('<?xml version="1.0"?>\n')
        fh.write('<VTKFile type="UnstructuredGrid" version="0.1" '
                 'byte_order="LittleEndian">\n<UnstructuredGrid>\n')
        fh.write(f'<Piece NumberOfPoints="{len(used)}" '
                 f'NumberOfCells="{len(cells)}">\n')
        fh.write('<Points>\n<DataArray type="Float64" '
                 'NumberOfComponents="3" format="ascii">\n')
        for x, y in pts:
            fh.write(f"{x:.10g} {y:.10g} 0\n")
        fh.write('</DataArray>\n</Points>\n<Cells>\n')
        fh.write('<DataArray type="Int32" Name="connectivity" format="ascii">\n')
        for verts in renum[conn]:
            fh.write(" ".join(str(v) for v in verts) + "\n")
        fh.write('</DataArray>\n'
                 '<DataArray type="Int32" Name="offsets" format="ascii">\n')
        fh.write("\n".join(str(4 * (i + 1)) for i in range(len(cells))) + "\n")
        fh.write('</DataArray>\n'
                 '<DataArray type="UInt8" Name="types" format="ascii">\n')
        fh.write("\n".join("9" for _ in cells) + "\n")
        fh.write('</DataArray>\n</Cells>\n<PointData>\n')
        for name, arr in arrays:
            ncomp = 1 if arr.ndim == 1 else arr.shape[1]
            fh.write(f'<DataArray type="Float64" Name="{name}" '
                     f'NumberOfComponents="{ncomp}" format="ascii">\n')
            for row in np.atleast_2d(arr.T).T:
                vals = np.atleast_1d(row)
                fh.write(" ".join(f"{v:.10g}" for v in vals) + "\n")
            fh.write('</DataArray>\n')
        fh.write('</PointData>\n<CellData>\n')
        for name, arr in (("cell_class", cls), ("kappa", kappa)):
            fh.write(f'<DataArray type="Float64" Name="{name}" '
                     'NumberOfComponents="1" format="ascii">\n')
            fh.write("\n".join(f"{v:.10g}" for v in arr) + "\n")
            fh.write('</DataArray>\n')
        fh.write('</CellData>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n')


def write_snapshot(outdir, disc: Discretization, state: State,
                   tag: str) -> list[Path]:
    """Fluid and solid VTU files for one state; returns the paths."""
    outdir = Path(outdir)
    paths = []
    for side, name in (("f", "fluid"), ("s", "solid")):
        p = outdir / f"{name}_{tag}.vtu"
        write_vtu(p, disc, state, side)
        paths.append(p)
    return paths
