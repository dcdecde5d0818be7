"""CSV and VTU output files."""

import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from cutfsi import SimulationConfig, TimeStepper
from cutfsi.analysis import ErrorReport
from cutfsi.reporting import (format_convergence_table, write_convergence_csv,
                              write_snapshot, write_step_log, write_vtu)


@pytest.fixture(scope="module")
def run8(disc8):
    stepper = TimeStepper(disc8)
    records, states = stepper.run(store_all=True)
    return records, states


def _read_csv(path):
    comments, rows = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                rows.append(line.rstrip("\n"))
    reader = csv.reader(rows)
    header = next(reader)
    return comments, header, list(reader)


def test_step_log(tmp_path, disc8, run8):
    records, _ = run8
    path = tmp_path / "steps.csv"
    write_step_log(path, disc8.cfg, records)
    comments, header, rows = _read_csv(path)
    assert "n = 8" in comments
    assert header[:4] == ["n", "t", "solve_residual", "constraint_residual"]
    assert len(rows) == len(records)
    assert float(rows[-1][1]) == pytest.approx(records[-1].t)
    assert float(rows[0][2]) == pytest.approx(records[0].solve_residual, rel=1e-6)


def test_convergence_csv_roundtrip(tmp_path):
    cfg = SimulationConfig()
    errs = [{k: 4.0 for k in ("vf_T", "vs_T", "grad_u_T", "grad_vf_I", "h_grad_p_I")},
            {k: 1.0 for k in ("vf_T", "vs_T", "grad_u_T", "grad_vf_I", "h_grad_p_I")}]
    report = ErrorReport(mode="space", levels=[0.25, 0.125], errors=errs)
    path = tmp_path / "conv.csv"
    write_convergence_csv(path, cfg, report)
    comments, header, rows = _read_csv(path)
    assert header[0] == "h"
    assert len(rows) == 2
    assert rows[0][header.index("order_vf_T")] == ""
    assert float(rows[1][header.index("order_vf_T")]) == pytest.approx(2.0)
    table = format_convergence_table(report)
    assert "order" in table and "vf_T" in table


def test_vtu_well_formed(tmp_path, disc8, run8):
    _, states = run8
    for side in ("f", "s"):
        path = tmp_path / f"out_{side}.vtu"
        write_vtu(path, disc8, states[-1], side)
        root = ET.parse(path).getroot()
        assert root.tag == "VTKFile"
        grid = root.find("UnstructuredGrid")
        piece = grid.find("Piece")
        npts = int(piece.get("NumberOfPoints"))
        ncells = int(piece.get("NumberOfCells"))
        assert npts > 0 and ncells > 0
        pts = np.fromstring(
            piece.find("Points/DataArray").text, sep=" ").reshape(-1, 3)
        assert pts.shape[0] == npts
        conn = np.fromstring(
            piece.find("Cells/DataArray[@Name='connectivity']").text,
            sep=" ", dtype=int)
        assert conn.size == 4 * ncells
        assert conn.max() < npts
        names = {d.get("Name") for d in piece.findall("PointData/DataArray")}
        assert "velocity" in names
        assert ("pressure" in names) == (side == "f")
        assert ("displacement" in names) == (side == "s")
        cell_names = {d.get("Name") for d in piece.findall("CellData/DataArray")}
        assert "cell_class" in cell_names and "kappa" in cell_names


def test_vtu_lid_velocity(tmp_path, disc8, run8):
    """The vertex at the lid midpoint carries the full inflow speed."""
    _, states = run8
    path = tmp_path / "f.vtu"
    write_vtu(path, disc8, states[-1], "f")
    root = ET.parse(path).getroot()
    piece = root.find("UnstructuredGrid/Piece")
    pts = np.fromstring(
        piece.find("Points/DataArray").text, sep=" ").reshape(-1, 3)
    vel = np.fromstring(
        piece.find("PointData/DataArray[@Name='velocity']").text,
        sep=" ").reshape(-1, 3)
    lid = np.flatnonzero((np.abs(pts[:, 0]) < 1e-12) & (np.abs(pts[:, 1] - 1) < 1e-12))
    assert len(lid) == 1
    assert vel[lid[0], 0] == pytest.approx(disc8.cfg.peak_inflow, rel=1e-6)
    assert vel[lid[0], 1] == pytest.approx(0.0, abs=1e-12)


def test_write_snapshot(tmp_path, disc8, run8):
    _, states = run8
    write_snapshot(tmp_path, disc8, states[-1], tag="final")
    assert (tmp_path / "fluid_final.vtu").exists()
    assert (tmp_path / "solid_final.vtu").exists()
