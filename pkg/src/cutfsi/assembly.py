"""Assembly of all bilinear forms of the monolithic time-step system.

Bulk integrals run over the physical subdomains via cut quadrature, ghost
penalties over full faces of the ghost face sets, Nitsche coupling over the
exact interface arcs.  Uncut cells share one local matrix per form (uniform
affine cells), so only the O(n) cut cells, ghost faces and arcs are
assembled individually.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .discretization import Discretization
from .fem import reference_basis
from .quadrature import gauss_1d


def weight_w(kappa, w_max: float):
    """Cut-fraction weight w(kappa) = 0.5 * w_max^(1 - 2 kappa)."""
    return 0.5 * np.power(w_max, 1.0 - 2.0 * np.asarray(kappa, dtype=float))


class _Coo:
    """COO accumulator; duplicate entries sum on conversion."""

    def __init__(self, shape):
        self.shape = shape
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows, cols, local):
        """Add a dense local block: rows (nr,), cols (nc,), local (nr, nc)."""
        nr, nc = local.shape
        self.rows.append(np.repeat(rows, nc))
        self.cols.append(np.tile(cols, nr))
        self.vals.append(np.asarray(local, dtype=float).ravel())

    def add_many(self, rows, cols, local):
        """Scatter one shared local block to many cells.

        rows, cols: (ncells, nr), (ncells, nc); local: (nr, nc).
        """
        ncells, nr = rows.shape
        nc = cols.shape[1]
        self.rows.append(np.repeat(rows, nc, axis=1).ravel())
        self.cols.append(np.tile(cols, (1, nr)).ravel())
        self.vals.append(np.tile(local.ravel(), ncells))

    def tocsr(self) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix(self.shape)
        m = sp.coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=self.shape)
        return m.tocsr()


# -- local kernels (tables: N, Gx, Gy of shape (q, nb); w of shape (q,)) ----

def _mass(Nr, Nc, w):
    return Nr.T @ (w[:, None] * Nc)


def _stiff(Gr, Gc, w):
    (Gxr, Gyr), (Gxc, Gyc) = Gr, Gc
    return Gxr.T @ (w[:, None] * Gxc) + Gyr.T @ (w[:, None] * Gyc)


def _vec_diag(local):
    """Expand a scalar local matrix to two components (component-major)."""
    nb_r, nb_c = local.shape
    out = np.zeros((2 * nb_r, 2 * nb_c))
    out[:nb_r, :nb_c] = local
    out[nb_r:, nb_c:] = local
    return out


def _blocks_to_local(blocks):
    """Assemble 2x2 component blocks into one component-major local matrix."""
    return np.block([[blocks[0][0], blocks[0][1]],
                     [blocks[1][0], blocks[1][1]]])


def _viscous(tabs, w, factor):
    """factor * int [delta_ab grad.grad + dN_a dN_b] (vector Laplace-eps)."""
    _, Gx, Gy = tabs
    G = (Gx, Gy)
    K = _stiff(G, G, w)
    blocks = [[None, None], [None, None]]
    for a in range(2):
        for b in range(2):
            m = G[b].T @ (w[:, None] * G[a])
            if a == b:
                m = m + K
            blocks[a][b] = factor * m
    return _blocks_to_local(blocks)


def _eps_form(tabs, w):
    """int eps(u):eps(v); equals half of the viscous kernel with factor 1."""
    return 0.5 * _viscous(tabs, w, 1.0)


def _div_div(tabs, w):
    """int (div u)(div v): blocks[a][b] = G_a^T W G_b."""
    _, Gx, Gy = tabs
    G = (Gx, Gy)
    blocks = [[G[a].T @ (w[:, None] * G[b]) for b in range(2)] for a in range(2)]
    return _blocks_to_local(blocks)


def _solid_bulk(tabs, w, mu, lam):
    """int sigma_s(u) : grad(v) = 2 mu eps:eps + lam div div."""
    return _viscous(tabs, w, mu) + lam * _div_div(tabs, w)


def _grad_p(tabs_v, tabs_p, w):
    """-(p, div phi): rows vector velocity, cols scalar pressure."""
    _, Gx, Gy = tabs_v
    P = tabs_p[0]
    return np.vstack([-Gx.T @ (w[:, None] * P), -Gy.T @ (w[:, None] * P)])


def _div_q(tabs_p, tabs_v, w):
    """(div v, xi): rows scalar pressure, cols vector velocity."""
    P = tabs_p[0]
    _, Gx, Gy = tabs_v
    return np.hstack([P.T @ (w[:, None] * Gx), P.T @ (w[:, None] * Gy)])


# -- cell-based assembly over a (sub)domain ---------------------------------

def assemble_cells(disc: Discretization, acc: _Coo, row_block: str,
                   col_block: str, side: str, physical: bool, kernel) -> None:
    """Assemble a cell-based form.

    ``kernel(tabs_row, tabs_col, w)`` returns the local matrix in the block
    dof layout (component-major for vector blocks).
    """
    rmap, cmap = disc.dofmap(row_block), disc.dofmap(col_block)
    full, cut = disc.cell_quadrature(side, physical)
    if len(full):
        tr = disc.full_cell_tables(rmap.order)
        tc = disc.full_cell_tables(cmap.order)
        local = kernel(tr, tc, disc.full_cell_weights)
        rows = _cells_vec_ids(disc, row_block, full)
        cols = _cells_vec_ids(disc, col_block, full)
        acc.add_many(rows, cols, local)
    for cell, pts, w in cut:
        tr = disc.tables_at(rmap.order, cell, pts)
        tc = tr if cmap.order == rmap.order else disc.tables_at(cmap.order, cell, pts)
        local = kernel(tr, tc, w)
        acc.add(_block_ids(disc, row_block, cell), _block_ids(disc, col_block, cell), local)


def _block_ids(disc: Discretization, block: str, cell: int) -> np.ndarray:
    sc = disc.cell_scalar_dofs(block, cell)
    dm = disc.dofmap(block)
    if dm.ncomp == 1:
        return disc.scalar_ids(block, sc)
    return disc.vector_ids(block, sc)


def _cells_vec_ids(disc: Discretization, block: str, cells: np.ndarray) -> np.ndarray:
    """(ncells, nloc) monolithic ids for a list of cells."""
    dm = disc.dofmap(block)
    rows = dm.cell_index[cells]
    sc = dm.cell_dofs[rows]  # (ncells, nb)
    off = disc.layout.offset(block)
    if dm.ncomp == 1:
        return off + sc
    return np.concatenate(
        [off + c * dm.n_scalar + sc for c in range(dm.ncomp)], axis=1)


# -- ghost penalty raw jump matrices ----------------------------------------

def raw_jump_matrices(disc: Discretization, side: str, order: int,
                      w_max: float | None = None,
                      face_npts: int = 4) -> list[sp.csr_matrix]:
    """Scalar matrices R_l, l = 1..order, of the weighted face-jump forms.

    R_l realizes  sum_F w_F^i int_F [d^l_n phi_i][d^l_n phi_j] ds  on the
    scalar dof map of the Q_order space of side i (no gamma, no h powers).
    """
    cfg = disc.cfg
    if w_max is None:
        w_max = cfg.w_max
    mesh = disc.mesh
    topo = disc.topo
    dm = disc.s if side == "s" else (disc.vf if order == cfg.m_f else disc.p)
    assert dm.order == order
    basis = reference_basis(order)
    kappa = topo.kappa(side)
    gx, gw = gauss_1d(face_npts)
    ns = dm.n_scalar
    accs = [_Coo((ns, ns)) for _ in range(order)]
    for f in topo.ghost_faces(side):
        k1, k2 = (int(c) for c in mesh.face_cells[f])
        axis = mesh.face_axis[f]
        tangent = 1 - axis
        pts = np.tile(mesh.face_origin[f], (face_npts, 1))
        pts[:, tangent] += mesh.h * gx
        wq = mesh.h * gw
        w_face = float(weight_w(kappa[k1], w_max) + weight_w(kappa[k2], w_max))
        ids = np.concatenate([dm.cell_dofs[dm.cell_index[k1]],
                              dm.cell_dofs[dm.cell_index[k2]]])
        for l in range(1, order + 1):
            dx, dy = (l, 0) if axis == 0 else (0, l)
            t1 = _phys_tables(basis, mesh, k1, pts, dx, dy)
            t2 = _phys_tables(basis, mesh, k2, pts, dx, dy)
            J = np.hstack([t1, -t2])  # (q, nb1+nb2)
            local = w_face * (J.T @ (wq[:, None] * J))
            accs[l - 1].add(ids, ids, local)
    return [a.tocsr() for a in accs]


def _phys_tables(basis, mesh, cell, pts, dx, dy):
    o = mesh.cell_origin(cell)
    ref = (pts - o) / mesh.h
    return basis.eval(ref, dx=dx, dy=dy) / mesh.h ** (dx + dy)


def ghost_matrix(disc: Discretization, which: str,
                 raw: list[sp.csr_matrix] | None = None) -> sp.csr_matrix:
    """Scalar ghost penalty matrix g_which with its gamma and h coefficients.

    which in {"v_f", "p", "v_s", "u"}.  Coefficient tables:
      g_vf: gamma_vf sum_{l=1..m_f}   h^(2l-1)/((l-1)!)^2
      g_p:  gamma_p  sum_{l=1..m_f-1} h^(2l+1)/(l!)^2
      g_vs: gamma_vs sum_{l=1..m_s}   h^(2l+1)/(l!)^2
      g_u:  gamma_u  sum_{l=1..m_s}   h^(2l-1)/((l-1)!)^2
    """
    cfg = disc.cfg
    h = disc.h
    spec = {
        "v_f": ("f", cfg.m_f, cfg.gamma_vf, lambda l: h ** (2 * l - 1) / _fact(l - 1) ** 2),
        "p": ("f", cfg.m_f - 1, cfg.gamma_p, lambda l: h ** (2 * l + 1) / _fact(l) ** 2),
        "v_s": ("s", cfg.m_s, cfg.gamma_vs, lambda l: h ** (2 * l + 1) / _fact(l) ** 2),
        "u": ("s", cfg.m_s, cfg.gamma_u, lambda l: h ** (2 * l - 1) / _fact(l - 1) ** 2),
    }
    side, order, gamma, coeff = spec[which]
    if raw is None:
        raw = raw_jump_matrices(disc, side, order)
    total = None
    for l in range(1, order + 1):
        term = coeff(l) * raw[l - 1]
        total = term if total is None else total + term
    return gamma * total.tocsr()


def _fact(m: int) -> float:
    out = 1.0
    for i in range(2, m + 1):
        out *= i
    return out


# -- Nitsche interface coupling ---------------------------------------------

def assemble_nitsche(disc: Discretization, acc_pen: _Coo, acc_cons: _Coo) -> None:
    """Interface terms: penalty into acc_pen, consistency terms into acc_cons.

    Penalty:     h^-1 rho_f nu_f gamma_N (v_f - v_s, phi_f - phi_s)
    Consistency: -(sigma_f(v_f, p) n_f, phi_f - phi_s)
                 -(v_f - v_s, sigma_f(phi_f, -xi) n_f)
    """
    cfg = disc.cfg
    rnu = cfg.rho_f * cfg.nu_f
    pen = rnu * cfg.gamma_N / disc.h
    for cell, rule in disc.iface_rules.items():
        pts, w, nrm = rule.points, rule.weights, rule.normals
        Nf, Gfx, Gfy = disc.tables_at(cfg.m_f, cell, pts)
        P = disc.tables_at(cfg.m_f - 1, cell, pts)[0]
        Ns = disc.tables_at(cfg.m_s, cell, pts)[0]
        nx, ny = nrm[:, 0], nrm[:, 1]
        G = (Gfx, Gfy)
        n_comp = (nx, ny)
        Gn = Gfx * nx[:, None] + Gfy * ny[:, None]

        ids_vf = disc.vector_ids("vf", disc.cell_scalar_dofs("vf", cell))
        ids_p = disc.scalar_ids("p", disc.cell_scalar_dofs("p", cell))
        ids_vs = disc.vector_ids("vs", disc.cell_scalar_dofs("vs", cell))
        test_tabs = {"vf": (Nf, +1.0, ids_vf), "vs": (Ns, -1.0, ids_vs)}

        # penalty: s_t s_tr delta_ab int N_t N_tr
        for tname, (Nt, st, rids) in test_tabs.items():
            for rname, (Ntr, str_, cids) in test_tabs.items():
                loc = pen * st * str_ * _mass(Nt, Ntr, w)
                acc_pen.add(rids, cids, _vec_diag(loc))

        # -(sigma_f(v_f, p) n, phi_f - phi_s)
        for tname, (Nt, st, rids) in test_tabs.items():
            blocks = [[None, None], [None, None]]
            for a in range(2):
                for b in range(2):
                    m = Nt.T @ (w[:, None] * G[a] * n_comp[b][:, None])
                    if a == b:
                        m = m + Nt.T @ (w[:, None] * Gn)
                    blocks[a][b] = -st * rnu * m
            acc_cons.add(rids, ids_vf, _blocks_to_local(blocks))
            # pressure part: +s_t (p n_a, N_t)
            loc_p = np.vstack([st * Nt.T @ (w[:, None] * P * n_comp[a][:, None])
                               for a in range(2)])
            acc_cons.add(rids, ids_p, loc_p)

        # -(v_f - v_s, sigma_f(phi_f, -xi) n): rows phi_f and xi
        for rname, (Ntr, str_, cids) in test_tabs.items():
            blocks = [[None, None], [None, None]]
            for a in range(2):
                for b in range(2):
                    m = (G[b] * n_comp[a][:, None]).T @ (w[:, None] * Ntr)
                    if a == b:
                        m = m + Gn.T @ (w[:, None] * Ntr)
                    blocks[a][b] = -str_ * rnu * m
            acc_cons.add(ids_vf, cids, _blocks_to_local(blocks))
            loc_q = np.hstack([-str_ * P.T @ (w[:, None] * Ntr * n_comp[b][:, None])
                               for b in range(2)])
            acc_cons.add(ids_p, cids, loc_q)


def interface_penalty_matrix(disc: Discretization) -> sp.csr_matrix:
    """Quadratic form int_Gamma |v_f - v_s|^2 on the monolithic vector."""
    acc = _Coo((disc.layout.total, disc.layout.total))
    for cell, rule in disc.iface_rules.items():
        pts, w = rule.points, rule.weights
        Nf = disc.tables_at(disc.cfg.m_f, cell, pts)[0]
        Ns = disc.tables_at(disc.cfg.m_s, cell, pts)[0]
        ids_vf = disc.vector_ids("vf", disc.cell_scalar_dofs("vf", cell))
        ids_vs = disc.vector_ids("vs", disc.cell_scalar_dofs("vs", cell))
        tabs = {"vf": (Nf, +1.0, ids_vf), "vs": (Ns, -1.0, ids_vs)}
        for _, (Nt, st, rids) in tabs.items():
            for _, (Ntr, str_, cids) in tabs.items():
                acc.add(rids, cids, _vec_diag(st * str_ * _mass(Nt, Ntr, w)))
    return acc.tocsr()


# -- monolithic system ------------------------------------------------------

@dataclass
class Forms:
    """All assembled matrices of one discretization (monolithic indexing)."""

    layout_total: int
    mass_fluid: sp.csr_matrix       # rho_f (v_f, phi_f)_Omega_f, vf block
    mass_solid: sp.csr_matrix       # rho_s (v_s, phi_s)_Omega_s, vs block
    mass_solid_scalar: sp.csr_matrix  # scalar (u, psi)_Omega_s on solid space
    fluid_bulk: sp.csr_matrix       # viscous + pressure couplings
    solid_bulk: sp.csr_matrix       # (sigma_s(u), grad phi_s), vs rows / u cols
    nitsche_pen: sp.csr_matrix
    nitsche_cons: sp.csr_matrix
    ghost_vf: sp.csr_matrix         # scalar matrices on their own spaces
    ghost_p: sp.csr_matrix
    ghost_vs: sp.csr_matrix
    ghost_u: sp.csr_matrix
    stab_fluid: sp.csr_matrix       # 2 rho nu g_vf + g_p, monolithic
    stab_solid: sp.csr_matrix       # 2 mu_s g_u(u, phi_s), monolithic
    ghost_vs_mono: sp.csr_matrix    # rho_s g_vs on vs block, monolithic
    constraint: sp.csr_matrix       # (u - k v_s, psi)_Omega_s rows (u block)
    constraint_rhs_op: sp.csr_matrix  # maps u_old -> constraint rhs


def _scatter_scalar(disc: Discretization, M: sp.csr_matrix, row_block: str,
                    col_block: str, ncomp: int) -> sp.coo_matrix:
    """Place a scalar-space matrix into the monolithic matrix (per component)."""
    total = disc.layout.total
    coo = M.tocoo()
    rdm, cdm = disc.dofmap(row_block), disc.dofmap(col_block)
    roff, coff = disc.layout.offset(row_block), disc.layout.offset(col_block)
    rows, cols, vals = [], [], []
    for c in range(ncomp):
        rows.append(roff + c * rdm.n_scalar + coo.row)
        cols.append(coff + c * cdm.n_scalar + coo.col)
        vals.append(coo.data)
    return sp.coo_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(total, total))


def assemble_forms(disc: Discretization) -> Forms:
    cfg = disc.cfg
    total = disc.layout.total
    shape = (total, total)

    acc = _Coo(shape)
    assemble_cells(disc, acc, "vf", "vf", "f", True,
                   lambda tr, tc, w: cfg.rho_f * _vec_diag(_mass(tr[0], tc[0], w)))
    mass_fluid = acc.tocsr()

    acc = _Coo(shape)
    assemble_cells(disc, acc, "vs", "vs", "s", True,
                   lambda tr, tc, w: cfg.rho_s * _vec_diag(_mass(tr[0], tc[0], w)))
    mass_solid = acc.tocsr()

    acc = _Coo((disc.s.n_scalar, disc.s.n_scalar))
    _assemble_scalar_cells(disc, acc, "vs", "vs", True, _mass)
    mass_solid_scalar = acc.tocsr()

    acc = _Coo(shape)
    assemble_cells(disc, acc, "vf", "vf", "f", True,
                   lambda tr, tc, w: _viscous(tr, w, cfg.rho_f * cfg.nu_f))
    assemble_cells(disc, acc, "vf", "p", "f", True,
                   lambda tr, tc, w: _grad_p(tr, tc, w))
    assemble_cells(disc, acc, "p", "vf", "f", True,
                   lambda tr, tc, w: _div_q(tr, tc, w))
    fluid_bulk = acc.tocsr()

    acc = _Coo(shape)
    assemble_cells(disc, acc, "vs", "u", "s", True,
                   lambda tr, tc, w: _solid_bulk(tr, w, cfg.mu_s, cfg.lambda_s))
    solid_bulk = acc.tocsr()

    acc_pen = _Coo(shape)
    acc_cons = _Coo(shape)
    assemble_nitsche(disc, acc_pen, acc_cons)
    nitsche_pen = acc_pen.tocsr()
    nitsche_cons = acc_cons.tocsr()

    raw_f2 = raw_jump_matrices(disc, "f", cfg.m_f)
    raw_f1 = raw_jump_matrices(disc, "f", cfg.m_f - 1)
    raw_s = raw_jump_matrices(disc, "s", cfg.m_s)
    ghost_vf = ghost_matrix(disc, "v_f", raw_f2)
    ghost_p = ghost_matrix(disc, "p", raw_f1)
    ghost_vs = ghost_matrix(disc, "v_s", raw_s)
    ghost_u = ghost_matrix(disc, "u", raw_s)

    stab_fluid = (2.0 * cfg.rho_f * cfg.nu_f
                  * _scatter_scalar(disc, ghost_vf, "vf", "vf", 2)
                  + _scatter_scalar(disc, ghost_p, "p", "p", 1)).tocsr()
    stab_solid = (2.0 * cfg.mu_s
                  * _scatter_scalar(disc, ghost_u, "vs", "u", 2)).tocsr()
    ghost_vs_mono = (cfg.rho_s
                     * _scatter_scalar(disc, ghost_vs, "vs", "vs", 2)).tocsr()

    constraint = (_scatter_scalar(disc, mass_solid_scalar, "u", "u", 2)
                  - cfg.k * _scatter_scalar(disc, mass_solid_scalar, "u", "vs", 2)).tocsr()
    constraint_rhs_op = _scatter_scalar(disc, mass_solid_scalar, "u", "u", 2).tocsr()

    return Forms(layout_total=total, mass_fluid=mass_fluid,
                 mass_solid=mass_solid, mass_solid_scalar=mass_solid_scalar,
                 fluid_bulk=fluid_bulk, solid_bulk=solid_bulk,
                 nitsche_pen=nitsche_pen, nitsche_cons=nitsche_cons,
                 ghost_vf=ghost_vf, ghost_p=ghost_p, ghost_vs=ghost_vs,
                 ghost_u=ghost_u, stab_fluid=stab_fluid,
                 stab_solid=stab_solid, ghost_vs_mono=ghost_vs_mono,
                 constraint=constraint, constraint_rhs_op=constraint_rhs_op)


def _assemble_scalar_cells(disc: Discretization, acc: _Coo, row_block: str,
                           col_block: str, physical: bool, kernel) -> None:
    """Like assemble_cells but on the scalar dof maps (no block offsets)."""
    rmap = disc.dofmap(row_block)
    cmap = disc.dofmap(col_block)
    side = rmap.side
    full, cut = disc.cell_quadrature(side, physical)
    if len(full):
        tr = disc.full_cell_tables(rmap.order)
        tc = disc.full_cell_tables(cmap.order)
        local = kernel(tr[0], tc[0], disc.full_cell_weights)
        rows = rmap.cell_dofs[rmap.cell_index[full]]
        cols = cmap.cell_dofs[cmap.cell_index[full]]
        acc.add_many(rows, cols, local)
    for cell, pts, w in cut:
        tr = disc.tables_at(rmap.order, cell, pts)
        tc = tr if cmap.order == rmap.order else disc.tables_at(cmap.order, cell, pts)
        acc.add(disc.cell_scalar_dofs(row_block, cell),
                disc.cell_scalar_dofs(col_block, cell),
                kernel(tr[0], tc[0], w))


def system_matrices(disc: Discretization, forms: Forms | None = None):
    """(A, B_old, forms): unconstrained step matrix and rhs operator.

    A x^n = B_old x^{n-1} + k F^n, with
    A = M + k (a_f + a_s + j) + k (S_f + S_s) + constraint rows and
    B_old = M + constraint rhs operator.
    """
    if forms is None:
        forms = assemble_forms(disc)
    cfg = disc.cfg
    k = cfg.k
    M = forms.mass_fluid + forms.mass_solid + forms.ghost_vs_mono
    A_h = (forms.fluid_bulk + forms.solid_bulk
           + forms.nitsche_pen + forms.nitsche_cons)
    S_h = forms.stab_fluid + forms.stab_solid
    A = (M + k * (A_h + S_h) + forms.constraint).tocsr()
    B_old = (M + forms.constraint_rhs_op).tocsr()
    return A, B_old, forms
