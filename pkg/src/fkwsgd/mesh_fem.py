"""Uniform meshes and P1 finite elements on (0,1) and (0,1)^2.

Zero Dirichlet data is imposed by dropping boundary nodes; every matrix and
nodal vector in this module lives on the free (interior) nodes only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.io
import scipy.sparse as sp


@dataclass(frozen=True)
class Mesh:
    dim: int
    m: int
    node_coords: np.ndarray  # (n_nodes, dim)
    free_nodes: np.ndarray  # indices into node_coords
    elements: np.ndarray  # (n_elem, dim + 1)

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def n_free(self) -> int:
        return len(self.free_nodes)

    @property
    def free_coords(self) -> np.ndarray:
        return self.node_coords[self.free_nodes]


@dataclass(frozen=True)
class FemSystem:
    mesh: Mesh
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    # boundary-inclusive matrices, kept for patch tests and exports
    mass_full: sp.csr_matrix
    stiffness_full: sp.csr_matrix


@dataclass(frozen=True)
class NodalField:
    values: np.ndarray
    time: float = 0.0

    def __len__(self) -> int:
        return len(self.values)


def build_mesh(dim: int, m: int) -> Mesh:
    """Uniform mesh with ``m`` cells per side.

    Nodes are sorted lexicographically by coordinates (x1, then x2).  In 2D
    each square cell is split along its lower-left to upper-right diagonal.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    x = np.arange(m + 1) / m
    if dim == 1:
        coords = x[:, None]
        free = np.arange(1, m)
        elements = np.column_stack([np.arange(m), np.arange(1, m + 1)])
        return Mesh(1, m, coords, free, elements)

    xx, yy = np.meshgrid(x, x, indexing="ij")
    coords = np.column_stack([xx.ravel(), yy.ravel()])
    idx = np.arange((m + 1) ** 2).reshape(m + 1, m + 1)  # idx[i1, i2]
    interior = idx[1:-1, 1:-1].ravel()
    ll = idx[:-1, :-1].ravel()
    lr = idx[1:, :-1].ravel()
    ul = idx[:-1, 1:].ravel()
    ur = idx[1:, 1:].ravel()
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    elements = np.empty((2 * m * m, 3), dtype=int)
    elements[0::2] = lower
    elements[1::2] = upper
    return Mesh(2, m, coords, interior, elements)


def _element_matrices(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Exact local mass and stiffness matrices, shape (n_elem, k, k).

    Geometry is evaluated in integer lattice units and scaled by ``h``
    afterwards, so the uniform-mesh stencils come out free of rounding.
    """
    h = mesh.h
    pts = np.rint(mesh.node_coords * mesh.m)[mesh.elements]
    if mesh.dim == 1:
        length = (pts[:, 1, 0] - pts[:, 0, 0])[:, None, None]
        mloc = (h * length) / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
        kloc = np.array([[1.0, -1.0], [-1.0, 1.0]]) / (h * length)
        return mloc, kloc

    e1 = pts[:, 1] - pts[:, 0]
    e2 = pts[:, 2] - pts[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    mloc = (h * h) * area[:, None, None] / 12.0 * (np.ones((3, 3)) + np.eye(3))
    # K_ij = (d_i . d_j) / (4 area), d_i the edge opposite vertex i; scale-free in 2D
    d = np.stack([pts[:, 2] - pts[:, 1], pts[:, 0] - pts[:, 2], pts[:, 1] - pts[:, 0]], axis=1)
    kloc = np.einsum("eid,ejd->eij", d, d) / (4.0 * area[:, None, None])
    return mloc, kloc


def assemble(mesh: Mesh) -> FemSystem:
    """Consistent mass and stiffness matrices, boundary rows/cols removed."""
    mloc, kloc = _element_matrices(mesh)
    k = mesh.elements.shape[1]
    rows = np.repeat(mesh.elements, k, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, k)).ravel()
    n = len(mesh.node_coords)

    def _coo_to_csr(vals: np.ndarray) -> sp.csr_matrix:
        a = sp.coo_matrix((vals.ravel(), (rows, cols)), shape=(n, n)).tocsr()
        a.sum_duplicates()
        a.sort_indices()
        return a.astype(complex)

    mass_full = _coo_to_csr(mloc)
    stiff_full = _coo_to_csr(kloc)
    # diagonal-neighbour couplings cancel exactly; keep the pattern canonical
    stiff_full.eliminate_zeros()
    free = mesh.free_nodes
    mass = mass_full[free][:, free].tocsr()
    stiff = stiff_full[free][:, free].tocsr()
    mass.sort_indices()
    stiff.sort_indices()
    return FemSystem(mesh, mass, stiff, mass_full, stiff_full)


def interpolate(mesh: Mesh, fn: Callable[..., np.ndarray], t: float = 0.0) -> NodalField:
    """Nodal interpolant over free nodes; ``fn(x, t)`` with ``x`` of shape (n, dim)."""
    vals = np.asarray(fn(mesh.free_coords, t), dtype=complex)
    if vals.ndim == 0:
        vals = np.full(mesh.n_free, vals)
    if vals.shape != (mesh.n_free,):
        raise ValueError(f"field returned shape {vals.shape}, expected ({mesh.n_free},)")
    return NodalField(vals, t)


def _values(v) -> np.ndarray:
    return v.values if isinstance(v, NodalField) else np.asarray(v)


def l2_norm(sys: FemSystem, v) -> float:
    """Discrete L2 norm ``sqrt(v^H M v)``."""
    x = _values(v)
    if x.shape != (sys.mass.shape[0],):
        raise ValueError(f"field has shape {x.shape}, system has {sys.mass.shape[0]} free nodes")
    val = np.vdot(x, sys.mass @ x).real
    return float(np.sqrt(max(val, 0.0)))


def dump_matrices(sys: FemSystem, path: str | Path) -> tuple[Path, Path]:
    """Write mass/stiffness as Matrix Market files ``<path>.mass.mtx`` etc."""
    base = Path(path)
    out = []
    for name, mat in (("mass", sys.mass), ("stiffness", sys.stiffness)):
        p = base.with_name(f"{base.name}.{name}.mtx")
        scipy.io.mmwrite(p, mat.tocoo(), field="complex", symmetry="general")
        out.append(p)
    return out[0], out[1]
