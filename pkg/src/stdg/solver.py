"""Per-slab assembly and Newton/Picard solution of the space-time DG scheme.

On each slab the residual entry for element ``k`` and basis function ``i`` is

    int_k div f~(u) phi_i
    + sum over internal facets of int_e (h(u^k, u^ke; nu) - f~(u^k).nu) phi_i
    + int_{t_n} (u^+ - u^-) phi_i^+            (slab bottom, temporal upwinding)
    + eps_k int_k grad u . grad phi_i

Slab tops contribute nothing (the upwind state is the interior trace).  On
the truncated spatial boundary the exterior state is the far-field datum
(``u_0`` at the boundary point) or, optionally, the interior trace
(transmissive).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fluxes import FluxFunction, FluxKind, SpaceTimeFlux, make_numerical_flux
from .mesh import FacetKind, Pattern, SlabMesh, build_slab_mesh
from .polynomials import SimplexBasis, segment_rule, solver_quadrature_order, triangle_rule
from .shock_capturing import ViscosityParams, apply_shock_capturing, element_viscosity

logger = logging.getLogger(__name__)

_REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


class NonConvergence(RuntimeError):
    """Newton (or its damping) failed; ``history`` holds residual norms."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


@dataclass(frozen=True)
class NewtonSettings:
    abs_tol: float = 1e-10
    max_iter: int = 50
    min_step: float = 2.0 ** -10
    picard_sweeps: int = 3
    picard_tol: float = 1e-8
    linear_solver: str = "direct"
    linear_tol: float = 1e-12

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.linear_tol > 0 and self.picard_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1 or self.picard_sweeps < 1:
            raise ValueError("max_iter and picard_sweeps must be at least 1")
        if self.linear_solver not in ("direct", "gmres"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")


@dataclass(frozen=True)
class Scheme:
    """Everything that defines the discrete operator apart from the mesh."""

    flux: FluxFunction
    q: int = 1
    numerical_flux: FluxKind = FluxKind.GODUNOV
    viscosity: ViscosityParams = ViscosityParams()
    quadrature_order: int | None = None
    boundary: str = "farfield"

    def __post_init__(self):
        if not 1 <= self.q <= 4:
            raise ValueError(f"q must lie in [1, 4], got {self.q}")
        if self.boundary not in ("farfield", "transmissive"):
            raise ValueError(f"unknown boundary treatment {self.boundary!r}")

    @property
    def order(self):
        if self.quadrature_order is not None:
            return self.quadrature_order
        return solver_quadrature_order(self.q, self.flux.degree)


class SlabDiscretization:
    """Quadrature data and operators of one slab (immutable after setup)."""

    def __init__(self, mesh: SlabMesh, scheme: Scheme, h_global=None):
        self.mesh = mesh
        self.scheme = scheme
        self.basis = SimplexBasis(scheme.q)
        self.flux = scheme.flux
        self.st = SpaceTimeFlux(scheme.flux)
        self.nflux = make_numerical_flux(scheme.numerical_flux, scheme.flux)
        self.h_global = mesh.h if h_global is None else float(h_global)
        self.N = self.basis.dim
        self.K = mesh.n_elements

        tri = triangle_rule(scheme.order)
        seg = segment_rule(scheme.order)
        self.vol_ref_w = tri.weights
        self.vol_phi = self.basis.eval(tri.points)
        ref_grad = self.basis.eval_ref_grad(tri.points)
        self.vol_grad = np.einsum("qnr,krd->kqnd", ref_grad, mesh.inv_jac)
        self.vol_w = tri.weights[None, :] * mesh.det[:, None]
        self.vol_pts = mesh.origin[:, None, :] + np.einsum("kdr,qr->kqd", mesh.jac, tri.points)

        def side(facets, elems):
            pts, w = mesh.facet_points(facets, seg)
            ref = np.einsum("frd,fqd->fqr", mesh.inv_jac[elems], pts - mesh.origin[elems][:, None, :])
            return pts, w, self.basis.eval(ref)

        fi = mesh.facets_of_kind(FacetKind.INTERNAL)
        self.fi_own = mesh.facet_owner[fi]
        self.fi_nbr = mesh.facet_neighbor[fi]
        self.fi_nt = mesh.facet_normal[fi, 0][:, None]
        self.fi_nx = mesh.facet_normal[fi, 1][:, None]
        _, self.fi_w, self.fi_phi_o = side(fi, self.fi_own)
        _, _, self.fi_phi_n = side(fi, self.fi_nbr)

        fb = mesh.bottom_facets()
        self.fb_elem = mesh.facet_owner[fb]
        pts, self.fb_w, self.fb_phi = side(fb, self.fb_elem)
        self.fb_x = pts[..., 1]

        ft = mesh.top_facets()
        self.ft_elem = mesh.facet_owner[ft]
        pts, self.ft_w, self.ft_phi = side(ft, self.ft_elem)
        self.ft_x = pts[..., 1]

        fs = mesh.facets_of_kind(FacetKind.SPATIAL_BOUNDARY)
        self.fs_elem = mesh.facet_owner[fs]
        self.fs_nt = mesh.facet_normal[fs, 0][:, None]
        self.fs_nx = mesh.facet_normal[fs, 1][:, None]
        pts, self.fs_w, self.fs_phi = side(fs, self.fs_elem)
        self.fs_x = pts[..., 1]

        self._build_pattern()

    # -- traces --------------------------------------------------------------

    def volume_values(self, U):
        u = U @ self.vol_phi.T
        grad = np.einsum("kqnd,kn->kqd", self.vol_grad, U)
        return u, grad

    def divergence(self, u, grad):
        return grad[..., 0] + self.flux.df(u) * grad[..., 1]

    def internal_traces(self, U):
        a = np.einsum("fqn,fn->fq", self.fi_phi_o, U[self.fi_own])
        b = np.einsum("fqn,fn->fq", self.fi_phi_n, U[self.fi_nbr])
        return a, b

    def bottom_trace(self, U):
        return np.einsum("fqn,fn->fq", self.fb_phi, U[self.fb_elem])

    def top_trace(self, U):
        return np.einsum("fqn,fn->fq", self.ft_phi, U[self.ft_elem])

    def boundary_trace(self, U):
        return np.einsum("fqn,fn->fq", self.fs_phi, U[self.fs_elem])

    def prev_values(self, prev_trace):
        return np.asarray(prev_trace(self.fb_x), dtype=float).reshape(self.fb_x.shape)

    def exterior_values(self, boundary_state):
        if self.scheme.boundary == "transmissive" or boundary_state is None:
            return None
        return np.asarray(boundary_state(self.fs_x), dtype=float).reshape(self.fs_x.shape)

    def boundary_states(self, U, u_ext):
        """Interior and exterior traces on the spatial boundary."""
        a = self.boundary_trace(U)
        return a, (a if u_ext is None else u_ext)

    def project(self, fun):
        """Element-wise L2 projection of ``fun(t, x)``."""
        vals = fun(self.vol_pts[..., 0], self.vol_pts[..., 1])
        return np.einsum("q,kq,qn->kn", self.vol_ref_w, vals, self.vol_phi)

    # -- residual and Jacobian -------------------------------------------------

    def residual(self, U, eps, u_minus, u_ext=None):
        u, grad = self.volume_values(U)
        div = self.divergence(u, grad)
        R = np.einsum("kq,kq,qn->kn", self.vol_w, div, self.vol_phi)
        R += apply_shock_capturing(self, U, eps)

        a, b = self.internal_traces(U)
        h = self.nflux(a, b, self.fi_nt, self.fi_nx)
        g = self.st.dot
        np.add.at(R, self.fi_own, np.einsum(
            "fq,fq,fqn->fn", self.fi_w, h - g(a, self.fi_nt, self.fi_nx), self.fi_phi_o))
        np.add.at(R, self.fi_nbr, np.einsum(
            "fq,fq,fqn->fn", self.fi_w, g(b, self.fi_nt, self.fi_nx) - h, self.fi_phi_n))

        up = self.bottom_trace(U)
        np.add.at(R, self.fb_elem, np.einsum("fq,fq,fqn->fn", self.fb_w, up - u_minus, self.fb_phi))

        if u_ext is not None:
            a = self.boundary_trace(U)
            h = self.nflux(a, u_ext, self.fs_nt, self.fs_nx)
            np.add.at(R, self.fs_elem, np.einsum(
                "fq,fq,fqn->fn", self.fs_w, h - g(a, self.fs_nt, self.fs_nx), self.fs_phi))
        return R

    def _build_pattern(self):
        K, N = self.K, self.N
        loc_r, loc_c = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")

        def block_index(rows_el, cols_el):
            r = rows_el[:, None, None] * N + loc_r[None]
            c = cols_el[:, None, None] * N + loc_c[None]
            return r.ravel(), c.ravel()

        ek = np.arange(K)
        parts = [block_index(ek, ek),
                 block_index(self.fi_own, self.fi_own),
                 block_index(self.fi_own, self.fi_nbr),
                 block_index(self.fi_nbr, self.fi_own),
                 block_index(self.fi_nbr, self.fi_nbr),
                 block_index(self.fb_elem, self.fb_elem),
                 block_index(self.fs_elem, self.fs_elem)]
        self._rows = np.concatenate([p[0] for p in parts])
        self._cols = np.concatenate([p[1] for p in parts])
        self._stiff = np.einsum("kq,kqid,kqjd->kij", self.vol_w, self.vol_grad, self.vol_grad)
        self._bottom_mass = np.einsum("fq,fqi,fqj->fij", self.fb_w, self.fb_phi, self.fb_phi)

    def jacobian(self, U, eps, u_ext=None):
        """Sparse derivative of :meth:`residual` in the coefficients, ``eps`` frozen."""
        u, grad = self.volume_values(U)
        df = self.flux.df(u)
        d2f = self.flux.d2f(u)
        # d(div)/dc_j = dphi_j/dt + f'(u) dphi_j/dx + f''(u) u_x phi_j
        ddiv = (self.vol_grad[..., 0] + df[..., None] * self.vol_grad[..., 1]
                + (d2f * grad[..., 1])[..., None] * self.vol_phi[None])
        vol = np.einsum("kq,qi,kqj->kij", self.vol_w, self.vol_phi, ddiv)
        vol += eps[:, None, None] * self._stiff

        nt, nx = self.fi_nt, self.fi_nx
        a, b = self.internal_traces(U)
        _, ha, hb = self.nflux.evaluate(a, b, nt, nx)
        ga = self.st.ddot(a, nt, nx)
        gb = self.st.ddot(b, nt, nx)
        po, pn, w = self.fi_phi_o, self.fi_phi_n, self.fi_w
        oo = np.einsum("fq,fqi,fqj->fij", w * (ha - ga), po, po)
        on = np.einsum("fq,fqi,fqj->fij", w * hb, po, pn)
        no = np.einsum("fq,fqi,fqj->fij", -w * ha, pn, po)
        nn = np.einsum("fq,fqi,fqj->fij", w * (gb - hb), pn, pn)

        if u_ext is None:
            bd = np.zeros((len(self.fs_elem), self.N, self.N))
        else:
            a = self.boundary_trace(U)
            _, ha, _ = self.nflux.evaluate(a, u_ext, self.fs_nt, self.fs_nx)
            ga = self.st.ddot(a, self.fs_nt, self.fs_nx)
            bd = np.einsum("fq,fqi,fqj->fij", self.fs_w * (ha - ga), self.fs_phi, self.fs_phi)

        data = np.concatenate([vol.ravel(), oo.ravel(), on.ravel(), no.ravel(),
                               nn.ravel(), self._bottom_mass.ravel(), bd.ravel()])
        n = self.K * self.N
        return sp.csr_matrix((data, (self._rows, self._cols)), shape=(n, n))


@dataclass
class DGSolution:
    """Coefficients of ``u_h`` on one slab plus the viscosity the solve used."""

    mesh: SlabMesh
    coeffs: np.ndarray
    q: int
    eps: np.ndarray
    newton_iterations: int = 0
    residual_norm: float = 0.0

    def __post_init__(self):
        dim = (self.q + 1) * (self.q + 2) // 2
        if self.coeffs.shape != (self.mesh.n_elements, dim):
            raise ValueError("coefficient array does not match mesh and basis")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite coefficients")

    @property
    def basis(self):
        return SimplexBasis(self.q)

    def evaluate(self, elements, ref_points):
        """``u_h`` at reference points (``(..., 2)``) of the given elements."""
        phi = self.basis.eval(ref_points)
        return np.einsum("...n,...n->...", phi, self.coeffs[elements])

    def vertex_values(self):
        phi = self.basis.eval(_REF_VERTICES)
        return self.coeffs @ phi.T

    def _top_elements(self):
        mesh = self.mesh
        top = mesh.top_facets()
        xmid = 0.5 * (mesh.points[mesh.facet_ends[top, 0], 1]
                      + mesh.points[mesh.facet_ends[top, 1], 1])
        order = np.argsort(xmid)
        return mesh.facet_owner[top][order]

    def top_trace(self, x):
        """Trace ``u_h(t_{n+1}^-, x)``; valid on the matching spatial grid."""
        return self._trace_at(np.asarray(x, dtype=float), self.mesh.t_hi, self._top_elements())

    def _trace_at(self, x, t, column_elements):
        mesh = self.mesh
        col = np.clip(np.searchsorted(mesh.x_nodes, x, side="right") - 1, 0, len(mesh.x_nodes) - 2)
        elems = column_elements[col]
        pts = np.stack([np.full_like(x, t), x], axis=-1)
        ref = np.einsum("...rd,...d->...r", mesh.inv_jac[elems], pts - mesh.origin[elems])
        return self.evaluate(elems, ref)

    def write(self, path, mesh_file, slab_times):
        with open(path, "w") as fh:
            fh.write(f"# q {self.q}\n# slab {slab_times[0]!r} {slab_times[1]!r}\n"
                     f"# mesh {mesh_file}\n")
            for k, row in enumerate(self.coeffs):
                fh.write("elem %d %s\n" % (k, " ".join(repr(float(c)) for c in row)))


def _solve_linear(J, rhs, settings: NewtonSettings, block):
    if settings.linear_solver == "direct":
        return spla.spsolve(J.tocsc(), rhs)
    # block-Jacobi preconditioned restarted GMRES
    n = J.shape[0]
    dense = J.toarray() if n <= block else None
    inv_blocks = []
    for s in range(0, n, block):
        blk = (dense[s:s + block, s:s + block] if dense is not None
               else J[s:s + block, s:s + block].toarray())
        inv_blocks.append(np.linalg.inv(blk))
    binv = sp.block_diag(inv_blocks, format="csr")
    x, info = spla.gmres(J, rhs, M=binv, rtol=settings.linear_tol, atol=0.0,
                         restart=100, maxiter=50)
    if info != 0:
        raise NonConvergence(f"GMRES failed to converge (info={info})")
    return x


def newton(disc: SlabDiscretization, U, eps, u_minus, settings: NewtonSettings, u_ext=None):
    """Damped Newton on the slab residual with fixed viscosity."""
    history = []
    U = U.copy()
    R = disc.residual(U, eps, u_minus, u_ext)
    for it in range(settings.max_iter + 1):
        rn = float(np.abs(R).max())
        history.append(rn)
        if rn <= settings.abs_tol:
            return U, it, rn
        if it == settings.max_iter:
            break
        J = disc.jacobian(U, eps, u_ext)
        dU = _solve_linear(J, -R.ravel(), settings, disc.N).reshape(U.shape)
        r2 = np.linalg.norm(R)
        step = 1.0
        while step >= settings.min_step:
            U_try = U + step * dU
            R_try = disc.residual(U_try, eps, u_minus, u_ext)
            if np.linalg.norm(R_try) < (1.0 - 1e-4 * step) * r2:
                break
            step *= 0.5
        else:
            raise NonConvergence(
                f"line search failed at Newton iteration {it} (|R|_inf={rn:.3e})", history)
        U, R = U_try, R_try
    raise NonConvergence(f"Newton did not converge in {settings.max_iter} iterations "
                         f"(|R|_inf={history[-1]:.3e})", history)


def solve_slab(prev_trace: Callable, mesh: SlabMesh, scheme: Scheme,
               settings: NewtonSettings = NewtonSettings(), h_global=None,
               initial_guess=None, boundary_state=None) -> DGSolution:
    """Solve one slab given the trace ``u^-`` from below (``u_0`` on the first slab).

    The viscosity is lagged: each Picard sweep runs a full Newton solve with
    ``eps`` frozen, then recomputes ``eps`` from the new iterate.  The
    returned solution records the ``eps`` its final Newton solve used.
    ``boundary_state`` gives the far-field exterior state on the spatial
    boundary (defaults to ``prev_trace`` at the boundary points).
    """
    disc = SlabDiscretization(mesh, scheme, h_global)
    u_minus = disc.prev_values(prev_trace)
    u_ext = disc.exterior_values(prev_trace if boundary_state is None else boundary_state)
    if initial_guess is None:
        U = disc.project(lambda t, x: prev_trace(x))
    else:
        U = np.array(initial_guess, dtype=float)
    eps = element_viscosity(disc, U, u_minus, scheme.viscosity, u_ext)
    total_it = 0
    for sweep in range(settings.picard_sweeps):
        U, its, rn = newton(disc, U, eps, u_minus, settings, u_ext)
        total_it += its
        if sweep == settings.picard_sweeps - 1:
            break
        eps_new = element_viscosity(disc, U, u_minus, scheme.viscosity, u_ext)
        scale = max(float(np.abs(eps_new).max()), 1e-300)
        if float(np.abs(eps_new - eps).max()) <= settings.picard_tol * scale:
            break
        eps = eps_new
    logger.debug("slab [%g, %g]: %d Newton iterations, |R|=%.2e",
                 mesh.t_lo, mesh.t_hi, total_it, rn)
    return DGSolution(mesh, U, scheme.q, eps, total_it, rn)


@dataclass
class RunState:
    """A chain of solved slabs covering ``[0, t]``."""

    u0: Callable
    scheme: Scheme
    x_left: float
    x_right: float
    n_x: int
    pattern: Pattern = Pattern.CRISS_CROSS
    dt: float | None = None
    settings: NewtonSettings = NewtonSettings()
    slabs: list = field(default_factory=list)

    def __post_init__(self):
        if self.dt is None:
            self.dt = (self.x_right - self.x_left) / self.n_x

    @property
    def t(self):
        return self.slabs[-1].mesh.t_hi if self.slabs else 0.0

    @property
    def h(self):
        """Global mesh size ``max h_k`` of the nominal slab."""
        return build_slab_mesh(self.x_left, self.x_right, 0.0, self.dt, self.n_x, self.pattern).h

    def prev_trace(self):
        return self.slabs[-1].top_trace if self.slabs else self.u0

    def discretization(self, n):
        return SlabDiscretization(self.slabs[n].mesh, self.scheme, self.h)

    def exterior_values(self, disc):
        return disc.exterior_values(self.u0)


def advance(run: RunState, T: float) -> RunState:
    """Solve all slabs up to ``T`` (uniform slab heights ``<= run.dt``).

    A slab that fails to converge is retried once as two half-height slabs.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    t0 = run.t
    if T <= t0 + 1e-14 * max(1.0, T):
        return run
    n = max(1, math.ceil((T - t0) / run.dt - 1e-9))
    times = t0 + (T - t0) * np.arange(n + 1) / n
    times[-1] = T
    h_global = run.h
    slabs = list(run.slabs)
    for lo, hi in zip(times[:-1], times[1:]):
        prev = slabs[-1].top_trace if slabs else run.u0
        mesh = build_slab_mesh(run.x_left, run.x_right, lo, hi, run.n_x,
                               run.pattern, slab_index=len(slabs))
        try:
            slabs.append(solve_slab(prev, mesh, run.scheme, run.settings, h_global,
                                    boundary_state=run.u0))
        except NonConvergence:
            logger.warning("slab [%g, %g] did not converge; retrying with half height", lo, hi)
            mid = 0.5 * (lo + hi)
            for a, b in ((lo, mid), (mid, hi)):
                prev = slabs[-1].top_trace if slabs else run.u0
                mesh = build_slab_mesh(run.x_left, run.x_right, a, b, run.n_x,
                                       run.pattern, slab_index=len(slabs))
                slabs.append(solve_slab(prev, mesh, run.scheme, run.settings, h_global,
                                        boundary_state=run.u0))
    return replace(run, slabs=slabs)


def slab_top_integrals(run: RunState):
    """``(t_{n+1}, int u_h(t_{n+1}^-), int u_h(t_{n+1}^-)^2)`` per slab."""
    rows = []
    for n, sol in enumerate(run.slabs):
        disc = run.discretization(n)
        top = disc.top_trace(sol.coeffs)
        rows.append((sol.mesh.t_hi, float(np.sum(disc.ft_w * top)),
                     float(np.sum(disc.ft_w * top * top))))
    return rows
