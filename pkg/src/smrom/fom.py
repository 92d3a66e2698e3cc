"""Full-order grad-div-stabilized Navier-Stokes solver.

Backward-Euler time stepping of the P2/P1 Galerkin discretization with
grad-div stabilization; either fully implicit (Picard iteration on the
advecting field) or semi-implicit (advecting field frozen at the previous
step, one linear solve).  The saddle-point systems are solved by sparse LU;
when the whole boundary is Dirichlet, the pressure level is fixed by a
mass-weighted zero-mean Lagrange multiplier.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assemble
from .meshing import generate_cylinder_channel, generate_structured_square
from .spaces import TaylorHoodSpace


class PicardDivergence(Exception):
    """Implicit step failed to reach the Picard tolerance."""


class SingularSystem(Exception):
    """Sparse factorization of the saddle-point system failed."""


@dataclass
class FOMConfig:
    nu: float
    dt: float
    t_end: float
    mu_graddiv: float = 0.05
    scheme: str = "semi_implicit"   # or "implicit"
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    snapshot_stride: int = 1
    warmup_steps: int = 0
    forcing: object = None               # callable (points, t) -> values
    initial_velocity: object = None      # full dof vector or callable
    dirichlet_values_fn: object = None   # callable t -> values array
    pin_pressure_mean: bool = True
    collect_energy: bool = True

    def __post_init__(self):
        if self.nu <= 0 or self.dt <= 0 or self.picard_tol <= 0:
            raise ValueError("nu, dt and picard_tol must be positive")
        if self.mu_graddiv < 0:
            raise ValueError("mu_graddiv must be nonnegative")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if self.scheme not in ("implicit", "semi_implicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        if self.scheme == "implicit" and self.dt >= 1.0:
            warnings.warn("implicit stability analysis assumes dt <= 1 - delta; "
                          f"dt = {self.dt} violates it", stacklevel=2)


@dataclass
class EnergyAudit:
    """Per-step terms of the discrete energy identity.

    kinetic_increment + jump + viscous + graddiv = forcing_work +
    boundary_work holds up to solver tolerance; for homogeneous Dirichlet
    data boundary_work vanishes and the identity collapses to the textbook
    per-step energy inequality.
    """

    kinetic_increment: list = field(default_factory=list)
    jump: list = field(default_factory=list)
    viscous: list = field(default_factory=list)
    graddiv: list = field(default_factory=list)
    forcing_work: list = field(default_factory=list)
    boundary_work: list = field(default_factory=list)

    def identity_residuals(self):
        k = np.asarray(self.kinetic_increment)
        lhs = k + np.asarray(self.jump) + np.asarray(self.viscous) + np.asarray(self.graddiv)
        rhs = np.asarray(self.forcing_work) + np.asarray(self.boundary_work)
        return lhs - rhs

    def inequality_margins(self):
        """forcing_work - dissipative terms; nonnegative for zero-trace runs."""
        k = np.asarray(self.kinetic_increment)
        lhs = k + np.asarray(self.jump) + np.asarray(self.viscous) + np.asarray(self.graddiv)
        return np.asarray(self.forcing_work) - lhs


@dataclass
class SnapshotSet:
    """Time-stamped FOM trajectories (full dof vectors, lift included)."""

    space: object
    times: np.ndarray              # (N,)
    velocity: np.ndarray           # (N, n_vel_dofs)
    pressure: np.ndarray           # (N, n_pres_dofs)
    dt: float                      # snapshot spacing
    initial_velocity: np.ndarray = None
    initial_time: float = 0.0
    energy: EnergyAudit = None
    meta: dict = field(default_factory=dict)

    @property
    def n_snapshots(self):
        return self.velocity.shape[0]

    def validate(self, div_tol=1e-9, mean_tol=1e-10):
        times = np.asarray(self.times)
        if times.size > 1:
            gaps = np.diff(times)
            if not np.allclose(gaps, self.dt, rtol=1e-10, atol=1e-12):
                raise ValueError("snapshot times are not uniformly spaced")
        B = assemble.assemble_divergence(self.space)
        scale = max(1.0, float(np.abs(self.velocity).max()))
        for n in range(self.n_snapshots):
            defect = np.abs(B @ self.velocity[n]).max()
            if defect > div_tol * scale:
                raise ValueError(f"snapshot {n}: divergence defect {defect:.3e}")
        if self.meta.get("pin_pressure_mean", True):
            m = assemble.pressure_mean_vector(self.space)
            pscale = max(1.0, float(np.abs(self.pressure).max()))
            for n in range(self.n_snapshots):
                mean = abs(float(m @ self.pressure[n]))
                if mean > mean_tol * pscale:
                    raise ValueError(f"snapshot {n}: pressure mean {mean:.3e}")
        return True


class FOMSolver:
    """Assembled operators plus the time-stepping loop for one space.

    The saddle-point system fixes the pressure gauge by pinning one
    pressure dof (keeping the matrix sparse) and afterwards shifting the
    pressure to exact zero mass-weighted mean; both gauges have identical
    velocity, and the shifted pressure equals the Lagrange-multiplier
    solution.  Implicit steps run Picard as a defect correction against a
    frozen factorization, refactoring only when the residual stalls.
    """

    def __init__(self, space, config):
        self.space = space
        self.config = config
        self.mass = assemble.assemble_mass_velocity(space)
        self.stiffness = assemble.assemble_stiffness_velocity(space)
        self.graddiv = assemble.assemble_graddiv(space)
        self.divergence = assemble.assemble_divergence(space)
        self.mean_vector = assemble.pressure_mean_vector(space)
        self.domain_area = float(self.mean_vector.sum())
        self.free = space.free_dofs
        self.constrained = space.dirichlet_dofs
        self.n_free = self.free.size
        self.np_ = space.n_pres_dofs
        # time-independent velocity-block part of the system matrix
        self.base_matrix = (self.mass / config.dt
                            + config.nu * self.stiffness
                            + config.mu_graddiv * self.graddiv).tocsr()
        self.B_free_T = self.divergence[:, self.free].T.tocsr()
        if config.pin_pressure_mean:
            bf = self.divergence[:, self.free].tolil()
            bf[0, :] = 0.0
            self.B_free_gauged = bf.tocsr()
            corner = sp.coo_matrix(([1.0], ([0], [0])),
                                   shape=(self.np_, self.np_)).tocsr()
            self.p_block = corner
        else:
            self.B_free_gauged = self.divergence[:, self.free].tocsr()
            self.p_block = None

    def dirichlet_values(self, t):
        if self.config.dirichlet_values_fn is not None:
            return np.asarray(self.config.dirichlet_values_fn(t), dtype=float)
        return self.space.dirichlet_values

    def lift(self, t):
        g = np.zeros(self.space.n_vel_dofs)
        g[self.constrained] = self.dirichlet_values(t)
        return g

    def initial_state(self, t0=0.0):
        cfg = self.config
        if cfg.initial_velocity is None:
            u0 = self.lift(t0)
        elif callable(cfg.initial_velocity):
            u0 = self.space.interpolate_velocity(cfg.initial_velocity)
            u0[self.constrained] = self.dirichlet_values(t0)
        else:
            u0 = np.asarray(cfg.initial_velocity, dtype=float).copy()
        return u0

    def _factorize(self, conv):
        A = self.base_matrix + conv
        A_ff = A[self.free][:, self.free]
        K = sp.bmat([
            [A_ff, self.divergence[:, self.free].T],
            [self.B_free_gauged, self.p_block],
        ], format="csc")
        try:
            return spla.splu(K)
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc

    def _raw_residual(self, u, p, conv, rhs_mom):
        """(momentum rows on free dofs, continuity rows), unscaled."""
        mom = (self.base_matrix + conv) @ u + self.divergence.T @ p - rhs_mom
        return mom[self.free], self.divergence @ u

    def _rel_residual(self, u, p, conv, rhs_mom):
        mom_f, cont = self._raw_residual(u, p, conv, rhs_mom)
        scale = max(np.linalg.norm(rhs_mom[self.free]), 1e-30)
        return np.hypot(np.linalg.norm(mom_f), np.linalg.norm(cont)) / scale

    def _correct(self, lu, u, p, conv, rhs_mom):
        """One defect-correction update of (u[free], p) in place."""
        mom_f, cont = self._raw_residual(u, p, conv, rhs_mom)
        if self.config.pin_pressure_mean:
            cont = cont.copy()
            cont[0] = p[0]
        dx = lu.solve(-np.concatenate([mom_f, cont]))
        u[self.free] += dx[:self.n_free]
        p += dx[self.n_free:]
        return u, p

    def _shift_mean(self, p):
        if self.config.pin_pressure_mean:
            p -= (self.mean_vector @ p) / self.domain_area
        return p

    def step(self, u_n, t_next):
        """Advance one step; returns (u, p, load, conv)."""
        cfg = self.config
        load = assemble.velocity_load(self.space, cfg.forcing, t_next)
        rhs_mom = self.mass @ u_n / cfg.dt + load
        g_values = self.dirichlet_values(t_next)
        conv = assemble.assemble_convection(self.space, u_n)
        lu = self._factorize(conv)
        u = u_n.copy()
        u[self.constrained] = g_values
        p = np.zeros(self.np_)
        u, p = self._correct(lu, u, p, conv, rhs_mom)
        if cfg.scheme == "implicit":
            prev_res = np.inf
            for _ in range(cfg.picard_max_iters):
                conv = assemble.assemble_convection(self.space, u)
                res = self._rel_residual(u, p, conv, rhs_mom)
                if res <= cfg.picard_tol:
                    break
                if res > 0.7 * prev_res:   # frozen factorization stalling
                    lu = self._factorize(conv)
                prev_res = res
                u, p = self._correct(lu, u, p, conv, rhs_mom)
            else:
                conv = assemble.assemble_convection(self.space, u)
                res = self._rel_residual(u, p, conv, rhs_mom)
                if res > cfg.picard_tol:
                    raise PicardDivergence(
                        f"Picard residual {res:.3e} > {cfg.picard_tol:.1e} "
                        f"after {cfg.picard_max_iters} iterations")
        return u, self._shift_mean(p), load, conv

    def _energy_terms(self, audit, u0, u1, p1, conv, load):
        cfg = self.config
        M, S, G = self.mass, self.stiffness, self.graddiv
        du = u1 - u0
        audit.kinetic_increment.append(0.5 * (u1 @ (M @ u1) - u0 @ (M @ u0)))
        audit.jump.append(0.5 * (du @ (M @ du)))
        audit.viscous.append(cfg.nu * cfg.dt * (u1 @ (S @ u1)))
        audit.graddiv.append(cfg.mu_graddiv * cfg.dt * (u1 @ (G @ u1)))
        audit.forcing_work.append(cfg.dt * (load @ u1))
        rhs_mom = M @ u0 / cfg.dt + load
        full_res = (self.base_matrix + conv) @ u1 + self.divergence.T @ p1 - rhs_mom
        audit.boundary_work.append(
            cfg.dt * (u1[self.constrained] @ full_res[self.constrained]))

    def run(self, t0=0.0):
        """Time-march and collect snapshots from step warmup_steps + 1 on."""
        cfg = self.config
        n_steps = int(round(cfg.t_end / cfg.dt))
        u = self.initial_state(t0)
        u0_saved = u.copy()
        times, vels, press = [], [], []
        audit = EnergyAudit() if cfg.collect_energy else None
        for n in range(n_steps):
            t_next = t0 + (n + 1) * cfg.dt
            try:
                u_new, p_new, load, conv = self.step(u, t_next)
            except (PicardDivergence, SingularSystem) as exc:
                raise type(exc)(f"at step {n + 1} (t = {t_next:.6g}): {exc}")
            if audit is not None:
                self._energy_terms(audit, u, u_new, p_new, conv, load)
            u = u_new
            if n + 1 > cfg.warmup_steps and (n + 1 - cfg.warmup_steps) % cfg.snapshot_stride == 0:
                times.append(t_next)
                vels.append(u_new)
                press.append(p_new)
        return SnapshotSet(
            space=self.space,
            times=np.asarray(times),
            velocity=np.asarray(vels),
            pressure=np.asarray(press),
            dt=cfg.dt * cfg.snapshot_stride,
            initial_velocity=u0_saved,
            initial_time=t0,
            energy=audit,
            meta={"nu": cfg.nu, "mu_graddiv": cfg.mu_graddiv,
                  "scheme": cfg.scheme, "stride": cfg.snapshot_stride,
                  "pin_pressure_mean": cfg.pin_pressure_mean},
        )


def run_fom(config, space, t0=0.0):
    return FOMSolver(space, config).run(t0=t0)


# -- benchmark setups ------------------------------------------------------

def setup_cavity(n, lid_speed=1.0):
    """Lid-driven cavity space: no-slip walls, moving lid on top.

    The two top corner nodes belong to the lid (applied last, so it
    overrides the wall data there).
    """
    mesh = generate_structured_square(n)
    space = TaylorHoodSpace(mesh)
    space.set_dirichlet({
        1: (0.0, 0.0),            # bottom
        2: (0.0, 0.0),            # right
        4: (0.0, 0.0),            # left
        3: (lid_speed, 0.0),      # lid, applied last
    })
    return space


def setup_cylinder(refinement, inflow_speed=1.0):
    """Channel with cylinder: uniform inflow, free-slip walls, no-slip
    cylinder, do-nothing outlet (pressure level left to the outlet)."""
    mesh = generate_cylinder_channel(refinement)
    space = TaylorHoodSpace(mesh)
    space.set_dirichlet({
        3: ((1,), 0.0),           # walls: zero normal (y) component only
        4: (0.0, 0.0),            # cylinder, no slip
        1: (inflow_speed, 0.0),   # inlet, applied last (wins corners)
    })
    return space


class TaylorGreenSolution:
    """Decaying vortex pair on the unit square; solves the momentum and
    continuity equations with zero body force."""

    def __init__(self, nu):
        if nu <= 0:
            raise ValueError("nu must be positive")
        self.nu = nu

    def amplitude(self, t):
        return np.exp(-2.0 * self.nu * np.pi ** 2 * t)

    def velocity(self, points, t=0.0):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        e = self.amplitude(t)
        return np.stack([e * np.sin(np.pi * x) * np.cos(np.pi * y),
                         -e * np.cos(np.pi * x) * np.sin(np.pi * y)], axis=-1)

    def pressure(self, points, t=0.0):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        return 0.25 * self.amplitude(t) ** 2 * (np.cos(2 * np.pi * x)
                                                + np.cos(2 * np.pi * y))

    def forcing(self, points, t=0.0):
        """Momentum residual of the exact pair; identically zero, returned
        term by term so the cancellation is checkable."""
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        e = self.amplitude(t)
        pi = np.pi
        sx, cx = np.sin(pi * x), np.cos(pi * x)
        sy, cy = np.sin(pi * y), np.cos(pi * y)
        u1 = e * sx * cy
        u2 = -e * cx * sy
        dudt = -2.0 * self.nu * pi ** 2 * np.stack([u1, u2], axis=-1)
        conv1 = u1 * (e * pi * cx * cy) + u2 * (-e * pi * sx * sy)
        conv2 = u1 * (e * pi * sx * sy) + u2 * (-e * pi * cx * cy)
        lap = -2.0 * pi ** 2 * np.stack([u1, u2], axis=-1)
        gradp = 0.5 * pi * e ** 2 * np.stack([-np.sin(2 * pi * x),
                                              -np.sin(2 * pi * y)], axis=-1)
        conv = np.stack([conv1, conv2], axis=-1)
        return dudt + conv - self.nu * lap + gradp


def manufactured_taylor_green(nu):
    """(exact velocity, exact pressure, forcing) for the decaying vortex."""
    sol = TaylorGreenSolution(nu)
    return sol.velocity, sol.pressure, sol.forcing


def setup_taylor_green(n, nu):
    """Unit-square space with the vortex trace as (decaying) Dirichlet data,
    plus a config-ready boundary-values function."""
    mesh = generate_structured_square(n)
    space = TaylorHoodSpace(mesh)
    sol = TaylorGreenSolution(nu)
    space.set_dirichlet({tag: (lambda p: sol.velocity(p, 0.0)) for tag in (1, 2, 3, 4)})
    base = space.dirichlet_values.copy()

    def values_fn(t):
        return sol.amplitude(t) * base

    return space, sol, values_fn
