"""Error norms, convergence orders, energy functionals and stability checks.

Space-time norms accumulate per-step squared norms weighted by k.  Errors
against a reference run are evaluated at the coarse mesh's cut quadrature
points (nested meshes make reference cell lookup exact).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import Forms, _Coo, _assemble_scalar_cells, _div_div, _eps_form, \
    _mass, _stiff, assemble_forms, interface_penalty_matrix, raw_jump_matrices
from .discretization import Discretization
from .fem import physical_eval, reference_basis
from .stepper import State, TimeStepper

ERROR_NORMS = ("vf_T", "vs_T", "grad_u_T", "grad_vf_I", "h_grad_p_I")


def convergence_order(e_coarse: float, e_fine: float) -> float:
    """alpha = log2(e_h / e_{h/2})."""
    if e_coarse <= 0.0 or e_fine <= 0.0:
        raise ValueError("convergence order requires positive errors")
    return float(np.log2(e_coarse / e_fine))


# -- pointwise field evaluation ---------------------------------------------

def locate_cells(disc: Discretization, pts: np.ndarray) -> np.ndarray:
    """Cell ids containing the points (uniform grid lookup)."""
    idx = np.clip(((pts + 1.0) / disc.h).astype(int), 0, disc.mesh.n - 1)
    return idx[:, 1] * disc.mesh.n + idx[:, 0]


def evaluate_scalar(disc: Discretization, block: str, coefs: np.ndarray,
                    pts: np.ndarray, cells: np.ndarray, comp: int = 0,
                    dx: int = 0, dy: int = 0) -> np.ndarray:
    """Evaluate one component of a field at points with known cells."""
    dm = disc.dofmap(block)
    basis = reference_basis(dm.order)
    rows = dm.cell_index[cells]
    if np.any(rows < 0):
        bad = np.flatnonzero(rows < 0)
        raise ValueError(f"{len(bad)} points fall outside the subtriangulation "
                         f"of block {block}")
    dofs = dm.cell_dofs[rows]  # (npts, nb)
    origins = disc.mesh.cell_origin(cells)
    ref = (pts - origins) / disc.h
    table = basis.eval(ref, dx=dx, dy=dy) / disc.h ** (dx + dy)
    vals = coefs[comp * dm.n_scalar + dofs]
    return np.einsum("pn,pn->p", table, vals)


# -- quadrature point sets over the physical subdomains ---------------------

def domain_points(disc: Discretization, side: str):
    """(points, weights, cells) covering Omega_i with the cut quadrature."""
    full, cut = disc.cell_quadrature(side, physical=True)
    pts_list, w_list, cell_list = [], [], []
    if len(full):
        origins = disc.mesh.cell_origin(full)  # (nc, 2)
        ref = disc.ref_pts  # (q, 2)
        pts = origins[:, None, :] + disc.h * ref[None, :, :]
        nq = len(ref)
        pts_list.append(pts.reshape(-1, 2))
        w_list.append(np.tile(disc.full_cell_weights, len(full)))
        cell_list.append(np.repeat(full, nq))
    for cell, pts, w in cut:
        pts_list.append(pts)
        w_list.append(w)
        cell_list.append(np.full(len(w), cell, dtype=int))
    return (np.vstack(pts_list), np.concatenate(w_list),
            np.concatenate(cell_list))


# -- norm matrices and energies ---------------------------------------------

class Analyzer:
    """Caches norm matrices and assembled forms for one discretization."""

    def __init__(self, disc: Discretization, forms: Forms | None = None):
        self.disc = disc
        self.forms = forms if forms is not None else assemble_forms(disc)
        self._scalar_mats: dict = {}
        self._vector_mats: dict = {}
        self._iface_pen = None

    def scalar_matrix(self, block: str, physical: bool, operator: str):
        key = (block, physical, operator)
        if key not in self._scalar_mats:
            dm = self.disc.dofmap(block)
            acc = _Coo((dm.n_scalar, dm.n_scalar))
            if operator == "value":
                _assemble_scalar_cells(self.disc, acc, block, block, physical, _mass)
            else:
                self._assemble_scalar_stiff(acc, block, physical)
            self._scalar_mats[key] = acc.tocsr()
        return self._scalar_mats[key]

    def _assemble_scalar_stiff(self, acc, block, physical):
        disc = self.disc
        dm = disc.dofmap(block)
        side = dm.side
        full, cut = disc.cell_quadrature(side, physical)
        if len(full):
            t = disc.full_cell_tables(dm.order)
            local = _stiff((t[1], t[2]), (t[1], t[2]), disc.full_cell_weights)
            rows = dm.cell_dofs[dm.cell_index[full]]
            acc.add_many(rows, rows, local)
        for cell, pts, w in cut:
            t = disc.tables_at(dm.order, cell, pts)
            ids = disc.cell_scalar_dofs(block, cell)
            acc.add(ids, ids, _stiff((t[1], t[2]), (t[1], t[2]), w))

    def vector_matrix(self, block: str, physical: bool, kind: str):
        """eps (int eps:eps) or divdiv (int div div) on a vector space."""
        key = (block, physical, kind)
        if key not in self._vector_mats:
            disc = self.disc
            dm = disc.dofmap(block)
            nloc = 2 * dm.n_scalar
            acc = _Coo((nloc, nloc))
            kernel = _eps_form if kind == "eps" else _div_div
            full, cut = disc.cell_quadrature(dm.side, physical)
            if len(full):
                t = disc.full_cell_tables(dm.order)
                local = kernel(t, disc.full_cell_weights)
                sc = dm.cell_dofs[dm.cell_index[full]]
                ids = np.concatenate([c * dm.n_scalar + sc for c in range(2)], axis=1)
                acc.add_many(ids, ids, local)
            for cell, pts, w in cut:
                t = disc.tables_at(dm.order, cell, pts)
                sc = disc.cell_scalar_dofs(block, cell)
                ids = np.concatenate([c * dm.n_scalar + sc for c in range(2)])
                acc.add(ids, ids, kernel(t, w))
            self._vector_mats[key] = acc.tocsr()
        return self._vector_mats[key]

    @property
    def interface_penalty(self):
        if self._iface_pen is None:
            self._iface_pen = interface_penalty_matrix(self.disc)
        return self._iface_pen

    # -- norms --------------------------------------------------------------

    def field_norm(self, block: str, coefs: np.ndarray, physical: bool = True,
                   operator: str = "value") -> float:
        """L2 norm of a field (or its gradient) over Omega_i or Omega_i^T.

        ``coefs`` is the block coefficient vector (component-major).
        """
        dm = self.disc.dofmap(block)
        M = self.scalar_matrix(block, physical, operator)
        total = 0.0
        for c in range(dm.ncomp):
            v = coefs[c * dm.n_scalar:(c + 1) * dm.n_scalar]
            total += float(v @ (M @ v))
        return float(np.sqrt(max(total, 0.0)))

    def quad_form(self, M, x) -> float:
        return float(x @ (M @ x))

    # -- energy functionals -------------------------------------------------

    def energy(self, state: State) -> dict:
        """Seminorm snapshot: kinetic/elastic energy, ghost energy, triple norm."""
        disc = self.disc
        cfg = disc.cfg
        x = state.x
        lay = disc.layout
        vf = x[lay.slice("vf")]
        p = x[lay.slice("p")]
        vs = x[lay.slice("vs")]
        u = x[lay.slice("u")]
        E_T2 = (0.5 * cfg.rho_f * self.field_norm("vf", vf, True, "value") ** 2
                + 0.5 * cfg.rho_s * self.field_norm("vs", vs, False, "value") ** 2
                + cfg.mu_s * self.field_norm("u", u, False, "gradient") ** 2)
        g_vs = self.quad_form(self.forms.ghost_vs, vs[:disc.s.n_scalar]) \
            + self.quad_form(self.forms.ghost_vs, vs[disc.s.n_scalar:])
        g_u = self.quad_form(self.forms.ghost_u, u[:disc.s.n_scalar]) \
            + self.quad_form(self.forms.ghost_u, u[disc.s.n_scalar:])
        g_p = self.quad_form(self.forms.ghost_p, p)
        E_g2 = 0.5 * cfg.rho_s * g_vs + cfg.mu_s * g_u
        trace2 = self.quad_form(self.interface_penalty, x) / disc.h
        triple2 = (cfg.rho_f * cfg.nu_f
                   * self.field_norm("vf", vf, False, "gradient") ** 2
                   + cfg.rho_f * cfg.nu_f * cfg.gamma_N * trace2 + g_p)
        return {"E_T2": E_T2, "E_g2": E_g2, "triple2": triple2,
                "trace2": trace2, "g_vs": g_vs, "g_u": g_u, "g_p": g_p}

    def lyapunov(self, state: State) -> float:
        """Discrete energy Q^n that decays step-to-step for homogeneous data."""
        disc = self.disc
        cfg = disc.cfg
        x = state.x
        lay = disc.layout
        vf = x[lay.slice("vf")]
        vs = x[lay.slice("vs")]
        u = x[lay.slice("u")]
        ns = disc.s.n_scalar
        g_vs = sum(self.quad_form(self.forms.ghost_vs, vs[c * ns:(c + 1) * ns])
                   for c in range(2))
        g_u = sum(self.quad_form(self.forms.ghost_u, u[c * ns:(c + 1) * ns])
                  for c in range(2))
        return (0.5 * cfg.rho_f * self.field_norm("vf", vf, True, "value") ** 2
                + 0.5 * cfg.rho_s * self.field_norm("vs", vs, True, "value") ** 2
                + 0.5 * cfg.rho_s * g_vs
                + cfg.mu_s * self.quad_form(self.vector_matrix("u", True, "eps"), u)
                + 0.5 * cfg.lambda_s * self.quad_form(self.vector_matrix("u", True, "divdiv"), u)
                + cfg.mu_s * g_u)


# -- errors against a nested reference run ----------------------------------

def _check_nested(disc_c: Discretization, disc_r: Discretization) -> None:
    if disc_r.mesh.n % disc_c.mesh.n != 0:
        raise ValueError(f"reference mesh n={disc_r.mesh.n} is not a nested "
                         f"refinement of n={disc_c.mesh.n}")


def error_vs_reference(disc_c: Discretization, states_c: list[State],
                       disc_r: Discretization, states_r: list[State]) -> dict:
    """Five error norms of (reference - coarse), Tables layout.

    Trajectories must share t=0..T; the reference may use a finer time grid
    (restricted to the coarse indices).
    """
    _check_nested(disc_c, disc_r)
    N_c = len(states_c) - 1
    N_r = len(states_r) - 1
    if N_r % N_c != 0:
        raise ValueError("time grids are not nested")
    stride = N_r // N_c
    ref_states = [states_r[i * stride] for i in range(N_c + 1)]

    pts_f, w_f, cells_f = domain_points(disc_c, "f")
    pts_s, w_s, cells_s = domain_points(disc_c, "s")
    rcells_f = locate_cells(disc_r, pts_f)
    rcells_s = locate_cells(disc_r, pts_s)
    k = disc_c.cfg.k

    def diff(block, state_c, state_r, pts, cells, rcells, comp, dx=0, dy=0):
        c_val = evaluate_scalar(disc_c, block, state_c.x[disc_c.layout.slice(block)],
                                pts, cells, comp, dx, dy)
        r_val = evaluate_scalar(disc_r, block, state_r.x[disc_r.layout.slice(block)],
                                pts, rcells, comp, dx, dy)
        return r_val - c_val

    sc, sr = states_c[-1], ref_states[-1]
    vf_T2 = sum(w_f @ diff("vf", sc, sr, pts_f, cells_f, rcells_f, c) ** 2
                for c in range(2))
    vs_T2 = sum(w_s @ diff("vs", sc, sr, pts_s, cells_s, rcells_s, c) ** 2
                for c in range(2))
    gu_T2 = sum(w_s @ diff("u", sc, sr, pts_s, cells_s, rcells_s, c, dx, dy) ** 2
                for c in range(2) for dx, dy in ((1, 0), (0, 1)))

    gvf_I2 = 0.0
    gp_I2 = 0.0
    for n in range(1, N_c + 1):
        a, b = states_c[n], ref_states[n]
        gvf_I2 += k * sum(
            w_f @ diff("vf", a, b, pts_f, cells_f, rcells_f, c, dx, dy) ** 2
            for c in range(2) for dx, dy in ((1, 0), (0, 1)))
        gp_I2 += k * sum(
            w_f @ diff("p", a, b, pts_f, cells_f, rcells_f, 0, dx, dy) ** 2
            for dx, dy in ((1, 0), (0, 1)))

    return {"vf_T": float(np.sqrt(vf_T2)),
            "vs_T": float(np.sqrt(vs_T2)),
            "grad_u_T": float(np.sqrt(gu_T2)),
            "grad_vf_I": float(np.sqrt(gvf_I2)),
            "h_grad_p_I": float(disc_c.h * np.sqrt(gp_I2))}


@dataclass
class ErrorReport:
    """Per-level errors plus orders between consecutive levels."""

    mode: str                 # "space" or "time"
    levels: list[float]       # h or k per level
    errors: list[dict]        # one dict per level, keys ERROR_NORMS

    def orders(self) -> list[dict]:
        out = []
        for coarse, fine in zip(self.errors[:-1], self.errors[1:]):
            out.append({key: convergence_order(coarse[key], fine[key])
                        for key in ERROR_NORMS})
        return out


def run_simulation(cfg, store_all: bool = True, observer=None):
    """Build a discretization, run to T; returns (disc, records, states)."""
    disc = Discretization(cfg)
    stepper = TimeStepper(disc)
    records, states = stepper.run(store_all=store_all, observer=observer)
    return disc, records, states


def spatial_study(base_cfg, n_levels: list[int], n_ref: int) -> ErrorReport:
    """Errors of a sequence of mesh levels against one fine reference run."""
    disc_r, _, states_r = run_simulation(base_cfg.replace(n=n_ref))
    levels, errors = [], []
    for n in n_levels:
        disc_c, _, states_c = run_simulation(base_cfg.replace(n=n))
        levels.append(disc_c.h)
        errors.append(error_vs_reference(disc_c, states_c, disc_r, states_r))
    return ErrorReport(mode="space", levels=levels, errors=errors)


def temporal_study(base_cfg, k_levels: list[float], k_ref: float) -> ErrorReport:
    """Errors of a sequence of step sizes against a fine-step reference run."""
    disc_r, _, states_r = run_simulation(base_cfg.replace(k=k_ref))
    levels, errors = [], []
    for k in k_levels:
        disc_c, _, states_c = run_simulation(base_cfg.replace(k=k))
        levels.append(k)
        errors.append(error_vs_reference(disc_c, states_c, disc_r, states_r))
    return ErrorReport(mode="time", levels=levels, errors=errors)


# -- stability verifications ------------------------------------------------

def ghost_extension_ratios(disc: Discretization, side: str, order: int,
                           l: int, w_max: float, gamma_on: bool = True,
                           n_samples: int = 100, seed: int = 0,
                           sampler: str = "band") -> float:
    """Max sampled ratio lhs/rhs of the ghost-extension estimate.

    lhs = |grad^l v|^2 over the computational domain Omega_i^T,
    rhs = |grad^l v|^2 over Omega_i minus the interface zone, plus the
    h-weighted sum of jump terms (dropped when gamma_on is False).

    Samples are random coefficient vectors on the interface zone: the
    "band" sampler draws one Gaussian over all cut-cell dofs per sample
    (distributed fields, used for the h-uniformity check), the "cell"
    sampler draws each sample on a single random cut cell (localized
    fields; the extension property is sharpest there, which exposes the
    blow-up when the jump terms are dropped).  Samples in the structural
    kernel of the rhs (functions vanishing identically outside the
    interface zone, where the estimate degenerates to 0 <= 0 or fails
    outright) are skipped.
    """
    block = {"f": {disc.cfg.m_f: "vf", disc.cfg.m_f - 1: "p"},
             "s": {disc.cfg.m_s: "vs"}}[side][order]
    ana = Analyzer.__new__(Analyzer)
    ana.disc = disc
    ana._scalar_mats = {}
    ana._vector_mats = {}
    ana._iface_pen = None
    op = "value" if l == 0 else "gradient"
    M_comp = ana.scalar_matrix(block, False, op)
    rhs_mat = _uncut_scalar_matrix(disc, block, op)
    if gamma_on:
        raws = raw_jump_matrices(disc, side, order, w_max=w_max)
        for j in range(1, order + 1):
            coeff = disc.h ** (2 * (j - l) + 1) / _factorial(j - l) ** 2
            rhs_mat = rhs_mat + coeff * raws[j - 1]
    dm = disc.dofmap(block)
    cut_dofs = [dm.cell_dofs[dm.cell_index[int(c)]]
                for c in disc.topo.cut_cells]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        v = np.zeros(dm.n_scalar)
        if sampler == "band":
            for ids in cut_dofs:
                v[ids] = rng.standard_normal(len(ids))
        elif sampler == "cell":
            ids = cut_dofs[rng.integers(len(cut_dofs))]
            v[ids] = rng.standard_normal(len(ids))
        else:
            raise ValueError(f"unknown sampler {sampler!r}")
        lhs = float(v @ (M_comp @ v))
        rhs = float(v @ (rhs_mat @ v))
        if rhs <= 1e-13 * lhs:
            continue
        worst = max(worst, lhs / rhs)
    return worst


def _factorial(m: int) -> float:
    out = 1.0
    for i in range(2, m + 1):
        out *= i
    return out


def _uncut_scalar_matrix(disc: Discretization, block: str, operator: str):
    """Scalar mass/stiffness over the uncut cells of the block's side."""
    dm = disc.dofmap(block)
    full = disc.topo.uncut_cells(dm.side)
    acc = _Coo((dm.n_scalar, dm.n_scalar))
    t = disc.full_cell_tables(dm.order)
    if operator == "value":
        local = _mass(t[0], t[0], disc.full_cell_weights)
    else:
        local = _stiff((t[1], t[2]), (t[1], t[2]), disc.full_cell_weights)
    if len(full):
        rows = dm.cell_dofs[dm.cell_index[full]]
        acc.add_many(rows, rows, local)
    return acc.tocsr()


def random_smooth_state(disc: Discretization, seed: int = 0) -> State:
    """Interpolants of random low-frequency fields, zero on the fluid boundary."""
    rng = np.random.default_rng(seed)
    lay = disc.layout
    x = np.zeros(lay.total)

    def smooth_field(coords):
        val = np.zeros(len(coords))
        for _ in range(4):
            kx, ky = rng.integers(1, 3, size=2)
            ph = rng.uniform(0, 2 * np.pi, size=2)
            amp = rng.normal()
            val += amp * np.sin(0.5 * np.pi * kx * coords[:, 0] + ph[0]) \
                * np.sin(0.5 * np.pi * ky * coords[:, 1] + ph[1])
        return 0.1 * val

    for block in ("vf", "p", "vs", "u"):
        dm = disc.dofmap(block)
        off = lay.offset(block)
        for c in range(dm.ncomp):
            vals = smooth_field(dm.node_coords)
            if block == "vf":
                vals[dm.dirichlet_nodes] = 0.0
            x[off + c * dm.n_scalar:(off + (c + 1) * dm.n_scalar)] = vals
    return State(index=0, t=0.0, x=x)


def verify_energy_decay(disc: Discretization, n_steps: int = 22,
                        seed: int = 0, tol: float = 1e-9):
    """Run with zero inflow from random initial data; report Q^n decay.

    Returns (ok, history, first_violation) where history is the list of
    Q^n values, monitored from the first computed step onward.
    """
    stepper = TimeStepper(disc)
    stepper.g_profile = np.zeros_like(stepper.g_profile)
    ana = Analyzer(disc, stepper.forms)
    state = random_smooth_state(disc, seed=seed)
    history = []
    q0 = None
    violation = None
    for _ in range(n_steps):
        state = stepper.step(state)
        q = ana.lyapunov(state)
        history.append(q)
        if q0 is None:
            q0 = q
        elif q > history[-2] + tol * max(q0, 1.0e-300) and violation is None:
            violation = state.index
    return violation is None, history, violation
