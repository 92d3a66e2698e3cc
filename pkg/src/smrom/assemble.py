"""Finite-element assembly on Taylor-Hood spaces.

All operators integrate with the single degree-5 rule, which is exact for
every form appearing in the scheme.  Matrices come out in CSR with summed,
sorted duplicates, so identical inputs give bit-identical results.
"""

import numpy as np
import scipy.sparse as sp

from . import kernels


class AssemblyError(Exception):
    pass


def _scatter(rows_idx, cols_idx, blocks, shape):
    """COO-scatter per-element blocks into a CSR matrix."""
    nel, a = rows_idx.shape
    b = cols_idx.shape[1]
    rows = np.broadcast_to(rows_idx[:, :, None], (nel, a, b)).ravel()
    cols = np.broadcast_to(cols_idx[:, None, :], (nel, a, b)).ravel()
    mat = sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=shape)
    return mat.tocsr()


def _scatter_scalar_as_vector(space, blocks):
    """Scatter identical x/x and y/y scalar blocks into the velocity space."""
    nodes = space.elem_nodes
    n = space.n_vel_dofs
    mx = _scatter(2 * nodes, 2 * nodes, blocks, (n, n))
    my = _scatter(2 * nodes + 1, 2 * nodes + 1, blocks, (n, n))
    out = (mx + my).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def assemble_mass_velocity(space):
    """L2 mass matrix on the vector P2 space (the POD velocity weight)."""
    pack = space.geometry_pack()
    blocks = kernels.mass_p2_local(pack.p2_vals, pack.detw)
    return _scatter_scalar_as_vector(space, blocks)


def assemble_mass_pressure(space):
    """L2 mass matrix on the P1 pressure space (the POD pressure weight)."""
    pack = space.geometry_pack()
    blocks = np.einsum("eq,qi,qj->eij", pack.detw, pack.p1_vals, pack.p1_vals)
    n = space.n_pres_dofs
    return _scatter(space.pressure_dof_map, space.pressure_dof_map, blocks, (n, n))


def assemble_stiffness_velocity(space):
    """Matrix of (grad u, grad v) on the vector P2 space."""
    pack = space.geometry_pack()
    blocks = kernels.stiffness_p2_local(pack.p2_grads, pack.detw)
    return _scatter_scalar_as_vector(space, blocks)


def assemble_graddiv(space):
    """Matrix of (div u, div v)."""
    pack = space.geometry_pack()
    blocks = kernels.graddiv_local(pack.p2_grads, pack.detw)
    n = space.n_vel_dofs
    return _scatter(space.velocity_dof_map, space.velocity_dof_map, blocks, (n, n))


def assemble_divergence(space):
    """Matrix B with B[q, v] = (div v, q): pressure rows, velocity columns."""
    pack = space.geometry_pack()
    blocks = kernels.divergence_local(pack.p1_vals, pack.p2_grads, pack.detw)
    return _scatter(space.pressure_dof_map, space.velocity_dof_map, blocks,
                    (space.n_pres_dofs, space.n_vel_dofs))


def assemble_convection(space, w):
    """Skew convection matrix N(w): v^T N(w) u equals the trilinear form
    with advecting field w, advected u, test v."""
    pack = space.geometry_pack()
    wq = space.velocity_at_quadrature(w, pack)
    blocks = kernels.convection_local(np.ascontiguousarray(wq), pack.p2_vals,
                                      pack.p2_grads, pack.detw)
    return _scatter_scalar_as_vector(space, blocks)


def assemble_pressure_tau_stiffness(space, tau):
    """Matrix of sum_K tau_K (grad p, grad q)_K on the P1 space."""
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (space.mesh.n_triangles,):
        raise AssemblyError("tau must have one entry per element")
    if np.any(tau <= 0.0):
        raise AssemblyError("tau entries must be positive")
    pack = space.geometry_pack()
    blocks = kernels.p1_stiffness_local(pack.p1_grads, pack.areas, tau)
    n = space.n_pres_dofs
    return _scatter(space.pressure_dof_map, space.pressure_dof_map, blocks, (n, n))


def pressure_mean_vector(space):
    """Vector m with m_i = integral of the i-th P1 hat function."""
    pack = space.geometry_pack()
    m = np.zeros(space.n_pres_dofs)
    contrib = np.repeat(pack.areas[:, None] / 3.0, 3, axis=1)
    np.add.at(m, space.pressure_dof_map, contrib)
    return m


def trilinear_b(space, u, v, w):
    """Skew trilinear form: 1/2 [ (u.grad v, w) - (u.grad w, v) ]."""
    pack = space.geometry_pack()
    uq = space.velocity_at_quadrature(u, pack)
    t1 = _convective_term(space, pack, uq, v, w)
    t2 = _convective_term(space, pack, uq, w, v)
    return 0.5 * (t1 - t2)


def _convective_term(space, pack, uq, v, w):
    """(u . grad v, w) with u given at quadrature points."""
    gv = space.velocity_gradient_at_quadrature(v, pack)
    wq = space.velocity_at_quadrature(w, pack)
    conv = np.einsum("eqb,eqab->eqa", uq, gv)
    return float(np.einsum("eq,eqa,eqa->", pack.detw, conv, wq))


def velocity_load(space, forcing, t):
    """Load vector (f(t), phi_i) by quadrature.

    forcing maps (points (..., 2), t) to values (..., 2); None means zero.
    """
    if forcing is None:
        return np.zeros(space.n_vel_dofs)
    pack = space.geometry_pack()
    fq = np.asarray(forcing(pack.qpoints, t), dtype=float)
    contrib = np.einsum("eq,eqc,qi->eic", pack.detw, fq, pack.p2_vals)
    load = np.zeros(space.n_vel_dofs)
    np.add.at(load, 2 * space.elem_nodes, contrib[:, :, 0])
    np.add.at(load, 2 * space.elem_nodes + 1, contrib[:, :, 1])
    return load


def elementwise_laplacian(space, u):
    """Exact per-element Laplacian of a P2 velocity field: (nel, 2)."""
    pack = space.geometry_pack()
    nodal = u[space.velocity_dof_map]
    comps = np.stack([nodal[:, 0::2], nodal[:, 1::2]], axis=2)  # (nel, 6, 2)
    return np.einsum("ei,eic->ec", pack.p2_lap, comps)


def tau_inner_product(space, tau, a, b):
    """(a, b)_tau = sum_K tau_K (a, b)_K.

    Accepts velocity dof fields (n_vel_dofs,), pressure dof fields
    (n_pres_dofs,), or per-element constants of shape (nel,) / (nel, 2).
    Both arguments must have the same representation.
    """
    tau = np.asarray(tau, dtype=float)
    pack = space.geometry_pack()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise AssemblyError("tau_inner_product arguments must match in shape")
    if a.ndim == 2 and a.shape == (space.mesh.n_triangles, 2):
        return float(np.sum(tau * pack.areas * np.sum(a * b, axis=1)))
    if a.shape == (space.mesh.n_triangles,):
        return float(np.sum(tau * pack.areas * a * b))
    if a.shape == (space.n_vel_dofs,):
        aq = space.velocity_at_quadrature(a, pack)
        bq = space.velocity_at_quadrature(b, pack)
        cell = np.einsum("eq,eqc,eqc->e", pack.detw, aq, bq)
        return float(np.sum(tau * cell))
    if a.shape == (space.n_pres_dofs,):
        an = a[space.pressure_dof_map]
        bn = b[space.pressure_dof_map]
        aq = an @ pack.p1_vals.T
        bq = bn @ pack.p1_vals.T
        cell = np.einsum("eq,eq,eq->e", pack.detw, aq, bq)
        return float(np.sum(tau * cell))
    raise AssemblyError(f"unsupported field shape {a.shape}")


def max_symmetry_defect(mat):
    """max |A - A^T| / max |A|, for the symmetry invariants."""
    diff = (mat - mat.T).tocoo()
    denom = np.abs(mat.data).max() if mat.nnz else 1.0
    num = np.abs(diff.data).max() if diff.nnz else 0.0
    return num / denom
