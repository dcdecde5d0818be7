"""Bundles mesh, cut topology, dof maps and quadrature for one mesh level.

The monolithic unknown is laid out block-wise as
(v_f_x, v_f_y | p | v_s_x, v_s_y | u_x, u_y), each field component-major
over its scalar dof map.  v_s and u share the same scalar space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimulationConfig
from .fem import DofMap, build_dof_map, physical_eval, reference_basis
from .geometry import CircleLevelSet
from .mesh import Mesh, build_cut_topology, build_mesh
from .quadrature import (QuadratureRule, cut_cell_rule, interface_rule,
                         reference_cell_rule)


@dataclass(frozen=True)
class BlockLayout:
    """Global offsets of the four unknown blocks (v_f, p, v_s, u)."""

    n_vf_scalar: int
    n_p: int
    n_s_scalar: int

    @property
    def off_vf(self) -> int:
        return 0

    @property
    def off_p(self) -> int:
        return 2 * self.n_vf_scalar

    @property
    def off_vs(self) -> int:
        return self.off_p + self.n_p

    @property
    def off_u(self) -> int:
        return self.off_vs + 2 * self.n_s_scalar

    @property
    def total(self) -> int:
        return self.off_u + 2 * self.n_s_scalar

    def offset(self, block: str) -> int:
        return {"vf": self.off_vf, "p": self.off_p,
                "vs": self.off_vs, "u": self.off_u}[block]

    def size(self, block: str) -> int:
        return {"vf": 2 * self.n_vf_scalar, "p": self.n_p,
                "vs": 2 * self.n_s_scalar, "u": 2 * self.n_s_scalar}[block]

    def slice(self, block: str) -> slice:
        off = self.offset(block)
        return slice(off, off + self.size(block))


class Discretization:
    """All mesh-level data needed to assemble and evaluate on one level."""

    def __init__(self, cfg: SimulationConfig, cut_npts: int = 8,
                 interface_npts: int = 12, bulk_npts: int = 3):
        cfg.validate()
        self.cfg = cfg
        self.mesh: Mesh = build_mesh(cfg.n)
        self.level_set = CircleLevelSet(cfg.radius_squared)
        self.topo = build_cut_topology(self.mesh, self.level_set)

        self.vf: DofMap = build_dof_map(self.mesh, self.topo, "v_f", 2, 2, "f",
                                        dirichlet_boundary=True)
        self.p: DofMap = build_dof_map(self.mesh, self.topo, "p", 1, 1, "f")
        self.s: DofMap = build_dof_map(self.mesh, self.topo, "s", cfg.m_s, 2, "s")
        self.layout = BlockLayout(n_vf_scalar=self.vf.n_scalar,
                                  n_p=self.p.n_scalar,
                                  n_s_scalar=self.s.n_scalar)

        self.bulk_npts = bulk_npts
        self._table_cache: dict[int, tuple] = {}
        self.ref_pts, self.ref_w = reference_cell_rule(bulk_npts)
        self.cut_rules: dict[str, dict[int, QuadratureRule]] = {"f": {}, "s": {}}
        self.iface_rules: dict[int, QuadratureRule] = {}
        for cell in self.topo.cut_cells:
            cell = int(cell)
            for side in ("f", "s"):
                self.cut_rules[side][cell] = cut_cell_rule(
                    self.mesh, self.topo, cell, side, npts=cut_npts)
            self.iface_rules[cell] = interface_rule(
                self.mesh, self.topo, cell, npts=interface_npts)

    @property
    def h(self) -> float:
        return self.mesh.h

    # -- quadrature helpers -------------------------------------------------

    def cell_quadrature(self, side: str, physical: bool):
        """(full_cells, cut_parts) covering Omega_i (physical) or Omega_i^T.

        ``cut_parts`` is a list of (cell, physical points, weights).
        """
        if physical:
            full = self.topo.uncut_cells(side)
            cut = [(int(c), self.cut_rules[side][int(c)].points,
                    self.cut_rules[side][int(c)].weights)
                   for c in self.topo.cut_cells]
            cut = [(c, p, w) for c, p, w in cut if len(w)]
        else:
            full = self.topo.tri_cells(side)
            cut = []
        return full, cut

    def full_cell_tables(self, order: int):
        """(N, Gx, Gy) tables at the shared full-cell rule, physical scaling."""
        if order not in self._table_cache:
            basis = reference_basis(order)
            N = basis.eval(self.ref_pts)
            Gx = basis.eval(self.ref_pts, dx=1) / self.h
            Gy = basis.eval(self.ref_pts, dy=1) / self.h
            self._table_cache[order] = (N, Gx, Gy)
        return self._table_cache[order]

    @property
    def full_cell_weights(self) -> np.ndarray:
        return self.ref_w * self.h ** 2

    def tables_at(self, order: int, cell: int, pts: np.ndarray):
        """(N, Gx, Gy) tables of the Q_order basis of a cell at physical points."""
        basis = reference_basis(order)
        o = self.mesh.cell_origin(cell)
        N = physical_eval(basis, o, self.h, pts)
        Gx = physical_eval(basis, o, self.h, pts, dx=1)
        Gy = physical_eval(basis, o, self.h, pts, dy=1)
        return N, Gx, Gy

    # -- dof helpers --------------------------------------------------------

    def dofmap(self, block: str) -> DofMap:
        return {"vf": self.vf, "p": self.p, "vs": self.s, "u": self.s}[block]

    def cell_scalar_dofs(self, block: str, cell: int) -> np.ndarray:
        dm = self.dofmap(block)
        row = dm.cell_index[cell]
        if row < 0:
            raise KeyError(f"cell {cell} not in subtriangulation of block {block}")
        return dm.cell_dofs[row]

    def vector_ids(self, block: str, scalar_ids: np.ndarray) -> np.ndarray:
        """Monolithic vector-field ids (component-major) for scalar dof ids."""
        dm = self.dofmap(block)
        off = self.layout.offset(block)
        return np.concatenate([off + c * dm.n_scalar + scalar_ids
                               for c in range(dm.ncomp)])

    def scalar_ids(self, block: str, scalar_ids: np.ndarray) -> np.ndarray:
        return self.layout.offset(block) + scalar_ids
