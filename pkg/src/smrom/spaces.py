"""Taylor-Hood P2/P1 spaces on triangular meshes.

Velocity: continuous piecewise quadratics, two components interleaved as
dof = 2*node + component over scalar nodes (vertices then edge midpoints).
Pressure: continuous piecewise linears on the vertices.

The class also precomputes the per-element geometry and reference shape
data ("geometry pack") consumed by the assembly kernels.
"""

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .meshing import all_element_geometry

# reference barycentric gradients
_GRAD_L = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])

# constant reference Hessians of the six P2 shape functions
_P2_HESS = np.empty((6, 2, 2))
_P2_HESS[0] = 4.0 * np.outer(_GRAD_L[0], _GRAD_L[0])
_P2_HESS[1] = 4.0 * np.outer(_GRAD_L[1], _GRAD_L[1])
_P2_HESS[2] = 4.0 * np.outer(_GRAD_L[2], _GRAD_L[2])
_P2_HESS[3] = 4.0 * (np.outer(_GRAD_L[0], _GRAD_L[1]) + np.outer(_GRAD_L[1], _GRAD_L[0]))
_P2_HESS[4] = 4.0 * (np.outer(_GRAD_L[1], _GRAD_L[2]) + np.outer(_GRAD_L[2], _GRAD_L[1]))
_P2_HESS[5] = 4.0 * (np.outer(_GRAD_L[2], _GRAD_L[0]) + np.outer(_GRAD_L[0], _GRAD_L[2]))


def p2_shape_values(points):
    """P2 shape functions at reference points (nq, 2) -> (nq, 6)."""
    x, y = points[:, 0], points[:, 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    return np.column_stack([
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ])


def p2_shape_gradients(points):
    """Reference gradients at points (nq, 2) -> (nq, 6, 2)."""
    x, y = points[:, 0], points[:, 1]
    l = np.column_stack([1.0 - x - y, x, y])
    nq = points.shape[0]
    g = np.empty((nq, 6, 2))
    for i in range(3):
        g[:, i, :] = (4.0 * l[:, i] - 1.0)[:, None] * _GRAD_L[i]
    pairs = [(0, 1), (1, 2), (2, 0)]
    for k, (a, b) in enumerate(pairs):
        g[:, 3 + k, :] = 4.0 * (l[:, b][:, None] * _GRAD_L[a] + l[:, a][:, None] * _GRAD_L[b])
    return g


def p1_shape_values(points):
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([1.0 - x - y, x, y])


class SpaceError(Exception):
    pass


@dataclass
class GeometryPack:
    """Per-element quadrature data shared by all assembly kernels."""

    det: np.ndarray          # (nel,)
    inv_jac_t: np.ndarray    # (nel, 2, 2)
    detw: np.ndarray         # (nel, nq): det * w_q / 2
    qpoints: np.ndarray      # (nel, nq, 2) physical coordinates
    p2_vals: np.ndarray      # (nq, 6)
    p2_grads: np.ndarray     # (nel, nq, 6, 2) physical gradients
    p1_vals: np.ndarray      # (nq, 3)
    p1_grads: np.ndarray     # (nel, 3, 2) physical gradients (constant in q)
    p2_lap: np.ndarray       # (nel, 6) Laplacian coefficient of each shape
    areas: np.ndarray        # (nel,)


class TaylorHoodSpace:
    """P2 velocity / P1 pressure dof maps with Dirichlet bookkeeping."""

    def __init__(self, mesh):
        self.mesh = mesh
        nv = mesh.n_vertices
        tris = mesh.triangles

        edge_ids = {}
        elem_edges = np.empty((mesh.n_triangles, 3), dtype=np.int64)
        for e, tri in enumerate(tris):
            for k, (a, b) in enumerate(((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0]))):
                key = (min(a, b), max(a, b))
                if key not in edge_ids:
                    edge_ids[key] = len(edge_ids)
                elem_edges[e, k] = edge_ids[key]
        self.n_edges = len(edge_ids)
        self.edge_ids = edge_ids

        self.n_scalar_nodes = nv + self.n_edges
        self.n_vel_dofs = 2 * self.n_scalar_nodes
        self.n_pres_dofs = nv

        # (nel, 6) scalar node indices: 3 vertices, then midpoints of
        # edges (v0,v1), (v1,v2), (v2,v0) matching the shape ordering
        self.elem_nodes = np.concatenate([tris, nv + elem_edges], axis=1)
        self.pressure_dof_map = tris

        # (nel, 12) interleaved velocity dof indices
        dof = np.empty((mesh.n_triangles, 12), dtype=np.int64)
        dof[:, 0::2] = 2 * self.elem_nodes
        dof[:, 1::2] = 2 * self.elem_nodes + 1
        self.velocity_dof_map = dof

        coords = np.empty((self.n_scalar_nodes, 2))
        coords[:nv] = mesh.vertices
        pairs = np.array(sorted(edge_ids, key=edge_ids.get))
        coords[nv:] = 0.5 * (mesh.vertices[pairs[:, 0]] + mesh.vertices[pairs[:, 1]])
        self.node_coords = coords

        self.dirichlet_dofs = np.empty(0, dtype=np.int64)
        self.dirichlet_values = np.empty(0)
        self._free_dofs = None
        self._packs = {}

    # -- geometry ---------------------------------------------------------
    def geometry_pack(self, degree=5):
        if degree in self._packs:
            return self._packs[degree]
        pts, w = quadrature.triangle_rule(degree)
        _, det, inv_t = all_element_geometry(self.mesh)
        p2v = p2_shape_values(pts)
        p2g_ref = p2_shape_gradients(pts)
        p2g = np.einsum("eab,qib->eqia", inv_t, p2g_ref)
        p1v = p1_shape_values(pts)
        p1g = np.einsum("eab,ib->eia", inv_t, _GRAD_L)
        detw = 0.5 * det[:, None] * w[None, :]
        v0 = self.mesh.vertices[self.mesh.triangles[:, 0]]
        jac = np.stack([self.mesh.vertices[self.mesh.triangles[:, 1]] - v0,
                        self.mesh.vertices[self.mesh.triangles[:, 2]] - v0], axis=2)
        qp = v0[:, None, :] + np.einsum("eab,qb->eqa", jac, pts)
        # tr(K H K^T) with K = inv_jac_t gives the physical Laplacian
        p2_lap = np.einsum("eab,ibc,eac->ei", inv_t, _P2_HESS, inv_t)
        pack = GeometryPack(det=det, inv_jac_t=inv_t, detw=detw, qpoints=qp,
                            p2_vals=p2v, p2_grads=p2g, p1_vals=p1v,
                            p1_grads=p1g, p2_lap=p2_lap, areas=0.5 * det)
        self._packs[degree] = pack
        return pack

    # -- Dirichlet --------------------------------------------------------
    def boundary_scalar_nodes(self, tags=None):
        """Scalar P2 node indices lying on facets with the given tags."""
        nv = self.mesh.n_vertices
        nodes = set()
        for v0, v1, tag in self.mesh.boundary_facets:
            if tags is not None and tag not in tags:
                continue
            key = (min(v0, v1), max(v0, v1))
            nodes.add(int(v0))
            nodes.add(int(v1))
            nodes.add(nv + self.edge_ids[key])
        return np.array(sorted(nodes), dtype=np.int64)

    def set_dirichlet(self, bc):
        """Install Dirichlet data from {tag: value}.

        value is a constant pair, or a callable mapping coordinates (n, 2)
        to velocities (n, 2), or a component-restricted pair
        (components, scalar) such as ((1,), 0.0) for a free-slip wall.
        Tags are applied in dict order, so later entries override shared
        corner nodes.
        """
        values = {}  # (node, component) -> value
        for tag, spec in bc.items():
            nodes = self.boundary_scalar_nodes({tag})
            if nodes.size == 0:
                raise SpaceError(f"no boundary facets with tag {tag}")
            comps = (0, 1)
            if isinstance(spec, tuple) and len(spec) == 2 and isinstance(spec[0], tuple):
                comps, spec = spec
            if callable(spec):
                vals = np.asarray(spec(self.node_coords[nodes]), dtype=float)
                if vals.ndim == 1:
                    vals = np.broadcast_to(vals[:, None], (nodes.size, 2))
            else:
                vals = np.broadcast_to(np.asarray(spec, dtype=float),
                                       (nodes.size, 2))
            for n, v in zip(nodes, vals):
                for c in comps:
                    values[(int(n), c)] = float(v[c]) if v.ndim else float(v)
        keys = sorted(values)
        self.dirichlet_dofs = np.array([2 * n + c for n, c in keys], dtype=np.int64)
        self.dirichlet_values = np.array([values[k] for k in keys])
        self._free_dofs = None

    @property
    def free_dofs(self):
        if self._free_dofs is None:
            mask = np.ones(self.n_vel_dofs, dtype=bool)
            mask[self.dirichlet_dofs] = False
            self._free_dofs = np.nonzero(mask)[0]
        return self._free_dofs

    def lift_vector(self, values=None):
        """Full-length velocity vector carrying the Dirichlet data."""
        g = np.zeros(self.n_vel_dofs)
        vals = self.dirichlet_values if values is None else values
        g[self.dirichlet_dofs] = vals
        return g

    # -- interpolation ----------------------------------------------------
    def interpolate_velocity(self, fn):
        """Nodal interpolant of fn(points (n,2)) -> (n,2)."""
        vals = np.asarray(fn(self.node_coords), dtype=float)
        u = np.empty(self.n_vel_dofs)
        u[0::2] = vals[:, 0]
        u[1::2] = vals[:, 1]
        return u

    def interpolate_pressure(self, fn):
        return np.asarray(fn(self.mesh.vertices), dtype=float)

    def velocity_at_quadrature(self, u, pack=None):
        """Velocity values at all quadrature points: (nel, nq, 2)."""
        pack = pack or self.geometry_pack()
        nodal = u[self.velocity_dof_map]  # (nel, 12)
        ux = nodal[:, 0::2]
        uy = nodal[:, 1::2]
        vx = np.einsum("ei,qi->eq", ux, pack.p2_vals)
        vy = np.einsum("ei,qi->eq", uy, pack.p2_vals)
        return np.stack([vx, vy], axis=2)

    def velocity_gradient_at_quadrature(self, u, pack=None):
        """Gradient tensor d u_a / d x_b at quadrature points: (nel, nq, 2, 2)."""
        pack = pack or self.geometry_pack()
        nodal = u[self.velocity_dof_map]
        comps = np.stack([nodal[:, 0::2], nodal[:, 1::2]], axis=1)  # (nel,2,6)
        return np.einsum("eci,eqib->eqcb", comps, pack.p2_grads)

    def pressure_gradients(self, p):
        """Elementwise-constant P1 gradients: (nel, 2)."""
        pack = self.geometry_pack()
        nodal = p[self.pressure_dof_map]  # (nel, 3)
        return np.einsum("ei,eia->ea", nodal, pack.p1_grads)
