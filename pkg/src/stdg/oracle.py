"""Reference entropy solutions used to measure convergence.

Exact Riemann solutions cover Burgers and linear advection; anything else is
compared against a first-order Godunov finite-volume solution on a fine grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .fluxes import FluxFunction, Godunov


@dataclass(frozen=True)
class RiemannProblem:
    a: float
    b: float
    x0: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and np.isfinite(self.x0)):
            raise ValueError("Riemann states must be finite")

    def initial(self, x):
        return np.where(np.asarray(x, dtype=float) < self.x0, self.a, self.b)


def exact_burgers_riemann(rp: RiemannProblem, t, x):
    """Entropy solution of ``u_t + (u^2/2)_x = 0`` with Riemann data."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    xi = (x - rp.x0) / t
    a, b = rp.a, rp.b
    if a > b:
        s = 0.5 * (a + b)
        return np.where(xi < s, a, b)
    if a < b:
        return np.clip(xi, a, b)
    return np.full_like(x, a)


def burgers_riemann_breakpoints(rp: RiemannProblem, t):
    """Points where the exact solution is not smooth (shock or fan edges)."""
    if rp.a > rp.b:
        return (rp.x0 + 0.5 * (rp.a + rp.b) * t,)
    if rp.a < rp.b:
        return (rp.x0 + rp.a * t, rp.x0 + rp.b * t)
    return ()


def expansion_shock(rp: RiemannProblem, t, x):
    """The non-entropic weak solution: a discontinuity moving at ``(a + b) / 2``."""
    x = np.asarray(x, dtype=float)
    return np.where(x < rp.x0 + 0.5 * (rp.a + rp.b) * t, rp.a, rp.b)


def exact_advection(u0, c, t, x):
    return u0(np.asarray(x, dtype=float) - c * t)


@dataclass
class FVGrid:
    n_cells: int
    x_left: float
    x_right: float
    cfl: float = 0.45
    averages: np.ndarray | None = None

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError("CFL must lie in (0, 0.5]")

    @property
    def dx(self):
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def centres(self):
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx


def cell_averages(u0, grid: FVGrid, n_points=8):
    x, w = roots_legendre(n_points)
    edges = grid.x_left + grid.dx * np.arange(grid.n_cells + 1)
    pts = 0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * grid.dx * x
    return 0.5 * np.sum(w * u0(pts), axis=1)


def max_wave_speed(flux: FluxFunction, lo, hi):
    """``max |f'|`` over ``[lo, hi]``: attained at an end or an inflection point."""
    pts = np.array([lo, hi], dtype=float)
    infl = np.asarray(flux.inflection_points(), dtype=float)
    pts = np.concatenate([pts, infl[(infl > lo) & (infl < hi)]])
    return float(np.abs(flux.df(pts)).max())


def fv_solve(flux: FluxFunction, u0, grid: FVGrid, T):
    """Forward-Euler Godunov finite volumes with zero-gradient ghost cells.

    The time step uses the largest wave speed over the range of the data,
    which the monotone scheme preserves.  Returns the cell averages at
    ``T``; also stored on ``grid.averages``.
    """
    godunov = Godunov(flux)
    u = cell_averages(u0, grid)
    t = 0.0
    dx = grid.dx
    speed = max_wave_speed(flux, float(u.min()), float(u.max()))
    while t < T - 1e-14 * max(1.0, T):
        dt = grid.cfl * dx / speed if speed > 0 else T - t
        dt = min(dt, T - t)
        ext = np.concatenate([u[:1], u, u[-1:]])
        fhat = godunov(ext[:-1], ext[1:], 0.0, 1.0)
        u = u - dt / dx * (fhat[1:] - fhat[:-1])
        t += dt
    grid.averages = u
    return u


def fv_reference(grid: FVGrid):
    """Piecewise-constant function of ``x`` built from ``grid.averages``."""
    if grid.averages is None:
        raise ValueError("grid has no solution; call fv_solve first")

    def ref(x):
        x = np.asarray(x, dtype=float)
        i = np.clip(((x - grid.x_left) / grid.dx).astype(int), 0, grid.n_cells - 1)
        return grid.averages[i]

    return ref


def _composite_norm(u_h, reference, x_nodes, breakpoints, n_points, power):
    x, w = roots_legendre(n_points)
    cuts = np.union1d(x_nodes, [b for b in breakpoints if x_nodes[0] < b < x_nodes[-1]])
    lo, hi = cuts[:-1], cuts[1:]
    pts = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x
    diff = np.abs(u_h(pts.ravel()) - reference(pts.ravel())).reshape(pts.shape)
    return float(np.sum(0.5 * (hi - lo)[:, None] * w * diff ** power))


def l1_error(u_h, reference, x_nodes, breakpoints=(), n_points=8):
    """``int |u_h - ref| dx`` by Gauss-Legendre on each cell of ``x_nodes``.

    Cells are split at ``breakpoints`` of the reference so that the rule
    never straddles a discontinuity of ``ref``.
    """
    if n_points < 8:
        raise ValueError("use at least 8 points per element")
    return _composite_norm(u_h, reference, np.asarray(x_nodes, float), breakpoints,
                           n_points, 1)


def l2_error(u_h, reference, x_nodes, breakpoints=(), n_points=8):
    return np.sqrt(_composite_norm(u_h, reference, np.asarray(x_nodes, float),
                                   breakpoints, n_points, 2))


def final_trace_error(run, reference, breakpoints=(), n_points=8):
    """``(l1, l2)`` distance between ``u_h(T^-)`` and ``reference``."""
    sol = run.slabs[-1]
    nodes = sol.mesh.x_nodes
    return (l1_error(sol.top_trace, reference, nodes, breakpoints, n_points),
            l2_error(sol.top_trace, reference, nodes, breakpoints, n_points))


def riemann_entropy_dissipation(rp: RiemannProblem, pair, phi, speed=None):
    """``int q~(u).grad phi`` for the exact shock solution of a Riemann problem.

    For a single discontinuity moving at ``s`` the divergence theorem gives
    ``int phi(t, x0 + s t) (s [eta] - [q]) dt`` with ``[.]`` the right minus
    left state.  ``speed`` defaults to the Burgers shock speed.
    """
    s = 0.5 * (rp.a + rp.b) if speed is None else speed
    ua, ub = np.array([rp.a]), np.array([rp.b])
    jump_eta = float(pair.eta(ub)[0] - pair.eta(ua)[0])
    jump_q = float(pair.q(ub)[0] - pair.q(ua)[0])
    x, w = roots_legendre(64)
    lo, hi = phi.t_c - phi.r_t, phi.t_c + phi.r_t
    t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    line = float(np.sum(0.5 * (hi - lo) * w * phi(t, rp.x0 + s * t)))
    return line * (s * jump_eta - jump_q)
