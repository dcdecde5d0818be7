"""Norms, energies, error evaluation and the ghost-extension probe."""

import numpy as np
import pytest

from cutfsi import (Discretization, SimulationConfig, TimeStepper,
                    convergence_order, error_vs_reference,
                    ghost_extension_ratios, verify_energy_decay)
from cutfsi.analysis import (Analyzer, domain_points, evaluate_scalar,
                             locate_cells, random_smooth_state)

R2 = 0.75
AREA_S = np.pi * R2
AREA_F = 4.0 - AREA_S


def test_convergence_order():
    assert convergence_order(4.0, 1.0) == pytest.approx(2.0)
    assert convergence_order(0.71550, 0.29700) == pytest.approx(1.2685, abs=1e-3)


@pytest.fixture(scope="module")
def an8(disc8):
    return Analyzer(disc8)


def test_locate_cells(disc8):
    pts = np.array([[-0.99, -0.99], [0.0, 0.0], [0.99, 0.99]])
    cells = locate_cells(disc8, pts)
    n = disc8.cfg.n
    h = disc8.h
    assert cells[0] == 0
    assert cells[2] == n * n - 1
    for p, c in zip(pts, cells):
        x0, y0 = disc8.mesh.cell_origin(c)
        assert x0 - 1e-12 <= p[0] <= x0 + h + 1e-12
        assert y0 - 1e-12 <= p[1] <= y0 + h + 1e-12


def test_evaluate_scalar_linear(disc8):
    """A field with nodal values x + 2y is reproduced exactly."""
    dm = disc8.dofmap("vf")
    coords = dm.node_coords
    coefs = coords[:, 0] + 2.0 * coords[:, 1]
    pts = np.array([[-0.9, -0.9], [0.9, 0.3]])
    cells = locate_cells(disc8, pts)
    vals = evaluate_scalar(disc8, "vf", coefs, pts, cells)
    assert np.allclose(vals, pts[:, 0] + 2.0 * pts[:, 1], atol=1e-12)
    dx = evaluate_scalar(disc8, "vf", coefs, pts, cells, dx=1)
    dy = evaluate_scalar(disc8, "vf", coefs, pts, cells, dy=1)
    assert np.allclose(dx, 1.0, atol=1e-11)
    assert np.allclose(dy, 2.0, atol=1e-11)


def test_domain_points_measure(disc8):
    for side, area in (("f", AREA_F), ("s", AREA_S)):
        pts, w, cells = domain_points(disc8, side)
        assert w.sum() == pytest.approx(area, abs=1e-10)
        assert len(pts) == len(w) == len(cells)


def test_field_norm_constant(an8, disc8):
    """|| (1,1) ||_{Omega_s} = sqrt(2 pi r^2) on the physical solid domain."""
    ones = np.ones(2 * disc8.s.n_scalar)
    assert an8.field_norm("vs", ones, physical=True) == pytest.approx(
        np.sqrt(2 * AREA_S), abs=1e-9)
    onesf = np.ones(2 * disc8.vf.n_scalar)
    assert an8.field_norm("vf", onesf, physical=True) == pytest.approx(
        np.sqrt(2 * AREA_F), abs=1e-9)


def test_field_norm_gradient(an8, disc8):
    """|| grad(x, 0) ||_{Omega_s} = sqrt(pi r^2) for the coordinate field."""
    x = disc8.dofmap("vs").node_coords[:, 0]
    coefs = np.concatenate([x, np.zeros_like(x)])
    assert an8.field_norm("vs", coefs, physical=True, operator="gradient") \
        == pytest.approx(np.sqrt(AREA_S), abs=1e-9)


def test_energy_zero_state(an8, disc8):
    stepper = TimeStepper(disc8)
    e = an8.energy(stepper.initialize())
    assert all(v == 0.0 for v in e.values())
    assert an8.lyapunov(stepper.initialize()) == 0.0


def test_energy_nonnegative_random(an8, disc8):
    state = random_smooth_state(disc8, seed=3)
    e = an8.energy(state)
    for key, val in e.items():
        assert val >= 0.0, key
    assert an8.lyapunov(state) >= 0.0


def test_error_vs_reference_self_is_zero(disc8):
    stepper = TimeStepper(disc8)
    _, states = stepper.run(store_all=True)
    errs = error_vs_reference(disc8, states, disc8, states)
    for key, val in errs.items():
        assert val <= 1e-13, key


def test_error_vs_reference_nested_constant(disc8, disc16):
    """A coarse/fine pair of identically-zero runs has zero error."""
    s8 = TimeStepper(disc8)
    s16 = TimeStepper(disc16)
    s8.g_profile = np.zeros_like(s8.g_profile)
    s16.g_profile = np.zeros_like(s16.g_profile)
    _, st8 = s8.run(store_all=True)
    _, st16 = s16.run(store_all=True)
    errs = error_vs_reference(disc8, st8, disc16, st16)
    for key, val in errs.items():
        assert val <= 1e-13, key


def test_error_vs_reference_rejects_non_nested(disc8):
    cfg = SimulationConfig(n=12)
    disc12 = Discretization(cfg)
    stepper = TimeStepper(disc8)
    _, states = stepper.run(store_all=True)
    with pytest.raises(ValueError):
        error_vs_reference(disc8, states, disc12, states)


def test_ghost_ratios_positive(disc8):
    ratio = ghost_extension_ratios(disc8, side="f", order=2, l=1,
                                   w_max=1.0, n_samples=20, seed=0)
    assert np.isfinite(ratio) and ratio > 0.0


def test_energy_decay_small(disc8):
    ok, history, violation = verify_energy_decay(disc8, n_steps=6, seed=1)
    assert ok, f"energy increased by relative {violation}"
    assert len(history) >= 6
    assert history[0] > 0.0
