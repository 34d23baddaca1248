"""Numerical checks of the stability and entropy estimates of the scheme.

Every generic constant is measured and reported rather than assumed.  The
checks operate on completed :class:`stdg.solver.RunState` objects.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .fluxes import Burgers, FluxFunction, LinearAdvection
from .polynomials import AffineMap, SimplexBasis, triangle_rule
from .projection import h1_project

_GL12_X, _GL12_W = roots_legendre(12)


# -- entropy pairs -------------------------------------------------------------

def _graded_integral(fun, k, u, delta, n_panels=48):
    """``int_k^u fun(xi) dxi`` on panels graded geometrically away from ``k``.

    Panel ends sit at ``k + sign(u - k) min(delta 2^j, |u - k|)``, which
    resolves the ``delta``-wide transition of the mollified Kruzkov
    derivative with a fixed 12-point Gauss-Legendre rule per panel.
    """
    u = np.asarray(u, dtype=float)
    d = u - k
    span = np.abs(d)
    ends = np.concatenate([[0.0], delta * 2.0 ** np.arange(n_panels)])
    ends = np.minimum(ends[None, :], span.reshape(-1, 1))
    if np.any(span > delta * 2.0 ** (n_panels - 1)):
        ends[:, -1] = span.reshape(-1)
    lo, hi = ends[:, :-1], ends[:, 1:]
    s = 0.5 * (lo + hi)[..., None] + 0.5 * (hi - lo)[..., None] * _GL12_X
    sign = np.sign(d).reshape(-1, 1, 1)
    vals = fun(k + sign * s)
    total = np.sum(0.5 * (hi - lo)[..., None] * _GL12_W * vals, axis=(1, 2))
    return (np.sign(d).reshape(-1) * total).reshape(u.shape)


class EntropyPair:
    """Entropy ``eta`` with flux ``q`` fixed by ``q' = f' eta'`` and ``q(u_ref) = 0``."""

    def __init__(self, flux: FluxFunction, u_ref=0.0):
        self.flux = flux
        self.u_ref = float(u_ref)

    def eta(self, u):
        raise NotImplementedError

    def deta(self, u):
        raise NotImplementedError

    def d2eta(self, u):
        raise NotImplementedError

    def q(self, u):
        return _graded_integral(lambda s: self.deta(s) * self.flux.df(s),
                                self.u_ref, u, 1e-2)

    def spacetime(self, u):
        """``q~ = (eta, q)`` stacked along the last axis."""
        return np.stack([self.eta(u), self.q(u)], axis=-1)


class QuadraticEntropy(EntropyPair):
    """``eta = u^2 / 2``, whose flux is the antiderivative-based L2 flux."""

    def eta(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u * u

    def deta(self, u):
        return np.asarray(u, dtype=float).copy()

    def d2eta(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    def q(self, u):
        return self.flux.l2_entropy_flux(u) - self.flux.l2_entropy_flux(self.u_ref)


class MollifiedKruzkov(EntropyPair):
    """``eta = sqrt((u - k)^2 + delta^2) - delta``, a smooth convex version of ``|u - k|``."""

    def __init__(self, flux: FluxFunction, k: float, delta: float):
        if not delta > 0:
            raise ValueError("delta must be positive")
        super().__init__(flux, u_ref=k)
        self.k = float(k)
        self.delta = float(delta)

    def eta(self, u):
        d = np.asarray(u, dtype=float) - self.k
        return np.hypot(d, self.delta) - self.delta

    def deta(self, u):
        d = np.asarray(u, dtype=float) - self.k
        return d / np.hypot(d, self.delta)

    def d2eta(self, u):
        d = np.asarray(u, dtype=float) - self.k
        return self.delta ** 2 / np.hypot(d, self.delta) ** 3

    def q(self, u):
        return kruzkov_flux(self.flux, self.k, self.delta, u)


def kruzkov_flux(flux: FluxFunction, k, delta, u, method="auto"):
    """``q_{k,delta}(u) = int_k^u eta'_{k,delta}(xi) f'(xi) dxi``.

    ``method="auto"`` uses the closed forms available for linear advection
    and Burgers; ``"quadrature"`` always integrates numerically.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    u = np.asarray(u, dtype=float)
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and isinstance(flux, LinearAdvection):
        return flux.c * (np.hypot(u - k, delta) - delta)
    if method == "auto" and isinstance(flux, Burgers):
        s = u - k
        r = np.hypot(s, delta)
        return 0.5 * s * r - 0.5 * delta ** 2 * np.arcsinh(s / delta) + k * (r - delta)
    return _graded_integral(lambda x: (x - k) / np.hypot(x - k, delta) * flux.df(x),
                            k, u, delta)


# -- test functions ----------------------------------------------------------------

def _chi(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _dchi(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si ** 2)) * (-2.0 * si / (1.0 - si ** 2) ** 2)
    return out


@dataclass(frozen=True)
class BumpFunction:
    """``phi(t, x) = chi((t - t_c) / r_t) chi((x - x_c) / r_x)``, ``chi(s) = exp(-1 / (1 - s^2))``."""

    t_c: float
    x_c: float
    r_t: float
    r_x: float

    def __post_init__(self):
        if not (self.r_t > 0 and self.r_x > 0):
            raise ValueError("bump radii must be positive")

    def __call__(self, t, x):
        return _chi((t - self.t_c) / self.r_t) * _chi((x - self.x_c) / self.r_x)

    def grad(self, t, x):
        st = (np.asarray(t) - self.t_c) / self.r_t
        sx = (np.asarray(x) - self.x_c) / self.r_x
        return (_dchi(st) * _chi(sx) / self.r_t, _chi(st) * _dchi(sx) / self.r_x)

    def check_support(self, T, x_left, x_right):
        if not (self.t_c - self.r_t > 0.0 and self.t_c + self.r_t < T
                and self.x_c - self.r_x > x_left and self.x_c + self.r_x < x_right):
            raise ValueError("test function support must lie inside (0, T) x (x_L, x_R)")


# -- run-level bookkeeping ---------------------------------------------------------

def _slab_data(run, n):
    disc = run.discretization(n)
    sol = run.slabs[n]
    prev = run.u0 if n == 0 else run.slabs[n - 1].top_trace
    return disc, sol, disc.prev_values(prev), run.exterior_values(disc)


@dataclass
class BalanceTerms:
    """Terms of the discrete L2 energy identity summed over all slabs.

    ``shock_capturing + interface + boundary_dissipation + temporal_jumps
    + final_energy + boundary_data + slab_mismatch = initial_energy``

    ``slab_mismatch`` collects the roundoff between the top energy of one
    slab and the bottom energy of the next.
    """

    shock_capturing: float
    interface: float
    boundary_dissipation: float
    temporal_jumps: float
    final_energy: float
    initial_energy: float
    boundary_data: float
    slab_mismatch: float
    min_interface_term: float
    min_shock_capturing_term: float
    min_temporal_jump_term: float
    min_boundary_term: float
    per_slab: list = field(default_factory=list)

    @property
    def residual(self):
        lhs = (self.shock_capturing + self.interface + self.boundary_dissipation
               + self.temporal_jumps + self.final_energy + self.boundary_data
               + self.slab_mismatch)
        return abs(lhs - self.initial_energy)

    @property
    def relative_residual(self):
        scale = 2.0 * self.initial_energy
        return self.residual / scale if scale > 0 else self.residual


def _entropy_potential(st, u, nt, nx):
    """``int_0^u f~(xi) . nu dxi``."""
    return st.integral_dot(np.zeros_like(u), u, nt, nx)


def l2_balance_terms(run) -> BalanceTerms:
    """Assemble each term of the L2 identity obtained by testing with ``u_h``.

    Interface terms are ``int_e int_a^b (f~(xi).nu - h(a, b)) dxi ds`` with
    ``a`` the owner trace; temporal jumps are ``1/2 int (u^+ - u^-)^2``.
    On the truncated boundary the far-field flux term splits into a
    dissipation part against the exterior state and a data part that
    vanishes when the exterior state is zero.
    """
    sc = inter = bdis = jumps = bdata = 0.0
    mins = dict(inter=np.inf, sc=np.inf, jump=np.inf, bdry=np.inf)
    per_slab = []
    init = 0.0
    for n in range(len(run.slabs)):
        disc, sol, u_minus, u_ext = _slab_data(run, n)
        U, eps = sol.coeffs, sol.eps
        st, nflux = disc.st, disc.nflux

        _, grad = disc.volume_values(U)
        sc_k = eps * np.einsum("kq,kqd,kqd->k", disc.vol_w, grad, grad)

        a, b = disc.internal_traces(U)
        h = nflux(a, b, disc.fi_nt, disc.fi_nx)
        d_f = np.einsum("fq,fq->f", disc.fi_w,
                        st.integral_dot(a, b, disc.fi_nt, disc.fi_nx) - h * (b - a))

        up = disc.bottom_trace(U)
        j_f = 0.5 * np.einsum("fq,fq->f", disc.fb_w, (up - u_minus) ** 2)

        a = disc.boundary_trace(U)
        if u_ext is None:
            q2 = 0.5 * disc.fs_nt * a * a + disc.fs_nx * disc.flux.l2_entropy_flux(a)
            bd_f = np.zeros(len(disc.fs_elem))
            data = float(np.sum(disc.fs_w * q2))
        else:
            hb = nflux(a, u_ext, disc.fs_nt, disc.fs_nx)
            bd_f = np.einsum("fq,fq->f", disc.fs_w,
                             st.integral_dot(a, u_ext, disc.fs_nt, disc.fs_nx)
                             - hb * (u_ext - a))
            data = float(np.sum(disc.fs_w * (hb * u_ext - _entropy_potential(
                st, u_ext, disc.fs_nt, disc.fs_nx))))

        if n == 0:
            init = 0.5 * float(np.sum(disc.fb_w * u_minus ** 2))
        row = dict(slab=n, t_lo=sol.mesh.t_lo, t_hi=sol.mesh.t_hi,
                   shock_capturing=float(sc_k.sum()), interface=float(d_f.sum()),
                   boundary_dissipation=float(bd_f.sum()), temporal_jumps=float(j_f.sum()),
                   boundary_data=data,
                   top_energy=0.5 * float(np.sum(disc.ft_w * disc.top_trace(U) ** 2)),
                   bottom_energy=0.5 * float(np.sum(disc.fb_w * u_minus ** 2)))
        per_slab.append(row)
        sc += row["shock_capturing"]
        inter += row["interface"]
        bdis += row["boundary_dissipation"]
        jumps += row["temporal_jumps"]
        bdata += data
        mins["sc"] = min(mins["sc"], float(sc_k.min(initial=np.inf)))
        mins["inter"] = min(mins["inter"], float(d_f.min(initial=np.inf)))
        mins["jump"] = min(mins["jump"], float(j_f.min(initial=np.inf)))
        mins["bdry"] = min(mins["bdry"], float(bd_f.min(initial=np.inf)))
    # consecutive slabs telescope: top energy of slab n equals the bottom
    # energy of slab n + 1 on matching grids, up to roundoff
    mismatch = sum(prev["top_energy"] - cur["bottom_energy"]
                   for prev, cur in zip(per_slab[:-1], per_slab[1:]))
    final = per_slab[-1]["top_energy"] if per_slab else 0.0
    return BalanceTerms(sc, inter, bdis, jumps, final, init, bdata, mismatch,
                        mins["inter"], mins["sc"], mins["jump"], mins["bdry"], per_slab)


def l2_balance_check(run) -> float:
    """Absolute defect of the L2 energy identity."""
    if not run.slabs:
        return 0.0
    return l2_balance_terms(run).residual


@dataclass
class MassBalance:
    initial: float
    final: float
    boundary_outflow: float

    @property
    def defect(self):
        return abs(self.final + self.boundary_outflow - self.initial)

    @property
    def drift(self):
        return abs(self.final - self.initial)


def mass_balance(run) -> MassBalance:
    """``int u_h(T^-)``, ``int u_0`` and the time-integrated boundary flux."""
    initial = final = outflow = 0.0
    for n in range(len(run.slabs)):
        disc, sol, u_minus, u_ext = _slab_data(run, n)
        if n == 0:
            initial = float(np.sum(disc.fb_w * u_minus))
        a = disc.boundary_trace(sol.coeffs)
        if u_ext is None:
            hb = disc.st.dot(a, disc.fs_nt, disc.fs_nx)
        else:
            hb = disc.nflux(a, u_ext, disc.fs_nt, disc.fs_nx)
        outflow += float(np.sum(disc.fs_w * hb))
        if n == len(run.slabs) - 1:
            final = float(np.sum(disc.ft_w * disc.top_trace(sol.coeffs)))
    return MassBalance(initial, final, outflow)


@dataclass
class JumpBound:
    constant: float
    n_facets: int
    vacuous: bool


def jump_bound_estimate(run, threshold=1e-8) -> JumpBound:
    """Smallest facet ratio ``int int_a^b (f~.nu - h) / int (a - b)^2``.

    Only internal facets with ``int |a - b| > threshold`` are used.  A
    positive constant certifies the quadratic jump bound on this run.
    """
    best, count = np.inf, 0
    for n in range(len(run.slabs)):
        disc, sol, _, _ = _slab_data(run, n)
        a, b = disc.internal_traces(sol.coeffs)
        h = disc.nflux(a, b, disc.fi_nt, disc.fi_nx)
        diss = np.einsum("fq,fq->f", disc.fi_w,
                         disc.st.integral_dot(a, b, disc.fi_nt, disc.fi_nx) - h * (b - a))
        size = np.einsum("fq,fq->f", disc.fi_w, np.abs(a - b))
        sq = np.einsum("fq,fq->f", disc.fi_w, (a - b) ** 2)
        sel = size > threshold
        if np.any(sel):
            count += int(sel.sum())
            best = min(best, float(np.min(diss[sel] / sq[sel])))
    return JumpBound(best if count else math.inf, count, count == 0)


# -- scaling studies -----------------------------------------------------------------

@dataclass
class ScalingFit:
    """Least-squares slope of ``log value`` against ``log h``."""

    h: np.ndarray
    values: np.ndarray
    order: float
    r_squared: float
    skipped: bool = False

    @classmethod
    def fit(cls, h, values, zero_tol=1e-20):
        """Fit ``values ~ h^order``; values all below ``zero_tol`` count as zero.

        The tolerance absorbs roundoff in quantities that vanish exactly in
        exact arithmetic (e.g. the divergence of a constant state).
        """
        h = np.asarray(h, dtype=float)
        values = np.asarray(values, dtype=float)
        if len(h) < 3:
            raise ValueError("a scaling fit needs at least 3 samples")
        if np.any(np.diff(h) >= 0):
            raise ValueError("h must be strictly decreasing")
        if np.all(np.abs(values) <= zero_tol):
            return cls(h, values, math.inf, 1.0, skipped=True)
        if np.any(values <= 0):
            raise ValueError("values must be positive for a log-log fit")
        x, y = np.log(h), np.log(values)
        slope, icpt = np.polyfit(x, y, 1)
        pred = slope * x + icpt
        ss_res = float(np.sum((y - pred) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return cls(h, values, float(slope), r2)

    def passes(self, minimum):
        return self.skipped or self.order >= minimum


def _check_ladder(runs):
    if len(runs) < 3:
        raise ValueError("scaling studies need at least 3 runs")


def flux_divergence_energy(run) -> float:
    """``sum h^(2 beta) int |div f~(u_h)|^2`` over all slabs."""
    beta = run.scheme.viscosity.beta
    total = 0.0
    for n in range(len(run.slabs)):
        disc = run.discretization(n)
        u, grad = disc.volume_values(run.slabs[n].coeffs)
        div = disc.divergence(u, grad)
        total += float(np.sum(disc.vol_w * div * div))
    return run.h ** (2.0 * beta) * total


def viscosity_integral(run) -> float:
    """``sum int eps(u_h)`` over all slabs, with the ``eps`` each solve used."""
    return float(sum(np.sum(s.eps * s.mesh.area) for s in run.slabs))


def residual_scaling(runs, zero_tol=1e-20) -> ScalingFit:
    """Fit of :func:`flux_divergence_energy`; quadratic in roundoff, hence the tiny tolerance."""
    _check_ladder(runs)
    return ScalingFit.fit([r.h for r in runs], [flux_divergence_energy(r) for r in runs],
                          zero_tol)


def viscosity_scaling(runs, zero_tol=1e-12) -> ScalingFit:
    """Fit of :func:`viscosity_integral`, which is linear in roundoff."""
    _check_ladder(runs)
    return ScalingFit.fit([r.h for r in runs], [viscosity_integral(r) for r in runs],
                          zero_tol)


def sup_norm(run) -> float:
    """``max |u_h|`` over volume quadrature points and vertices of every slab."""
    best = 0.0
    for n, sol in enumerate(run.slabs):
        disc = run.discretization(n)
        u, _ = disc.volume_values(sol.coeffs)
        best = max(best, float(np.abs(u).max()), float(np.abs(sol.vertex_values()).max()))
    return best


@dataclass
class LinfReport:
    sups: list
    bound: float
    passed: bool


def linf_check(runs, u0_sup, c_bound=2.0, growth=1.05) -> LinfReport:
    sups = [sup_norm(r) for r in runs]
    bound = c_bound * u0_sup
    ok = max(sups) <= bound + 1e-14 and sups[-1] <= growth * sups[0] + 1e-14
    return LinfReport(sups, bound, bool(ok))


# -- entropy consistency -------------------------------------------------------------

def entropy_residual(run, pair: EntropyPair, phi: BumpFunction, order=16) -> float:
    """``E_h = int q~(u_h) . grad phi`` over the space-time domain.

    For a smooth nonnegative ``phi`` supported away from ``t = 0`` and the
    spatial boundary, entropy consistency predicts ``liminf E_h >= 0``.
    """
    if not run.slabs:
        raise ValueError("run has no slabs")
    phi.check_support(run.t, run.x_left, run.x_right)
    rule = triangle_rule(order)
    basis = SimplexBasis(run.scheme.q)
    phi_ref = basis.eval(rule.points)
    total = 0.0
    for sol in run.slabs:
        mesh = sol.mesh
        if mesh.t_hi <= phi.t_c - phi.r_t or mesh.t_lo >= phi.t_c + phi.r_t:
            continue
        v = mesh.points[mesh.elements]
        near = (v[:, :, 1].max(axis=1) > phi.x_c - phi.r_x) & \
               (v[:, :, 1].min(axis=1) < phi.x_c + phi.r_x)
        k = np.flatnonzero(near)
        pts = mesh.origin[k, None, :] + np.einsum("kdr,qr->kqd", mesh.jac[k], rule.points)
        u = sol.coeffs[k] @ phi_ref.T
        gt, gx = phi.grad(pts[..., 0], pts[..., 1])
        w = rule.weights[None, :] * mesh.det[k, None]
        total += float(np.sum(w * (pair.eta(u) * gt + pair.q(u) * gx)))
    return total


# -- coercivity of the shock-capturing form under the H1 projection --------------------

def _lattice(n):
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = i + j <= n
    return np.column_stack([i[keep], j[keep]]) / n


def _random_triangle(rng, min_angle_deg=20.0):
    while True:
        v = rng.uniform(0.0, 1.0, size=(3, 2))
        e = v[[1, 2, 0]] - v
        lengths = np.linalg.norm(e, axis=1)
        area2 = e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]
        if abs(area2) < 1e-3:
            continue
        cosines = [-(e[i] @ e[(i + 2) % 3]) / (lengths[i] * lengths[(i + 2) % 3])
                   for i in range(3)]
        if np.degrees(np.arccos(np.clip(cosines, -1, 1))).min() >= min_angle_deg:
            if area2 < 0:
                v = v[[0, 2, 1]]
            return v


@dataclass
class CoercivityProbe:
    q: int
    p: int
    n_trials: int
    max_ratio: float
    max_ratio_half: float
    min_denominator: float
    n_skipped: int
    ratios: np.ndarray

    @property
    def drift(self):
        return abs(self.max_ratio_half - self.max_ratio) / self.max_ratio


def _probe_ratio(v_coef, tri, q, p, lattice):
    basis = SimplexBasis(q)
    amap = AffineMap.from_vertices(tri)
    inv = amap.inverse_jacobian()
    det = abs(amap.det)
    rule = triangle_rule(max(q * (p - 1) + q, 2 * q))
    dphi = basis.eval_ref_grad(rule.points) @ inv
    dv = np.einsum("qjd,j->qd", dphi, v_coef)
    grad_energy = det * float(np.einsum("q,qd,qd->", rule.weights, dv, dv))
    vmax = float(np.abs(basis.eval(lattice) @ v_coef).max())
    numer = vmax ** (p - 2) * grad_energy

    def g(t, x):
        ref = amap.to_reference(np.stack([t, x], axis=-1))
        return (basis.eval(ref) @ v_coef) ** (p - 1)

    c = h1_project(g, amap, q, q * (p - 1) + q)
    dpi = np.einsum("qjd,j->qd", dphi, c)
    denom = det * float(np.einsum("q,qd,qd->", rule.weights, dv, dpi))
    return numer, denom


def sc_coercivity_probe(q, p, n_trials=1000, seed=42, lattice_n=60, skip_tol=1e-14):
    """Estimate the constant in ``int |v|_inf^(p-2) |grad v|^2 <= C int grad v . grad Pi(v^(p-1))``.

    Random ``v`` have coefficients uniform in ``[-1, 1]`` in the orthonormal
    basis; elements are random triangles with all angles at least 20 degrees.
    Each trial is repeated on the same triangle scaled by 1/2 to expose any
    dependence on the element size.  ``|v|_inf`` is taken on a
    ``lattice_n``-subdivided barycentric lattice.
    """
    if p % 2 or p < 2:
        raise ValueError("p must be an even integer >= 2")
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    rng = np.random.default_rng(seed)
    lattice = _lattice(lattice_n)
    dim = (q + 1) * (q + 2) // 2
    ratios, ratios_half, dens = [], [], []
    skipped = 0
    for _ in range(n_trials):
        tri = _random_triangle(rng)
        v = rng.uniform(-1.0, 1.0, size=dim)
        num, den = _probe_ratio(v, tri, q, p, lattice)
        num2, den2 = _probe_ratio(v, 0.5 * tri, q, p, lattice)
        dens.extend([den, den2])
        if den <= skip_tol or den2 <= skip_tol:
            skipped += 1
            continue
        ratios.append(num / den)
        ratios_half.append(num2 / den2)
    ratios = np.array(ratios)
    return CoercivityProbe(q, p, n_trials, float(ratios.max()) if len(ratios) else math.nan,
                           float(np.max(ratios_half)) if ratios_half else math.nan,
                           float(min(dens)), skipped, ratios)


# -- report ------------------------------------------------------------------------

@dataclass
class CheckRow:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""


@dataclass
class DiagnosticsReport:
    rows: list = field(default_factory=list)

    def add(self, name, value, threshold, passed, note=""):
        value = float(value)
        if not (math.isfinite(value) or note):
            note = "non-finite value"
        self.rows.append(CheckRow(name, value, float(threshold), bool(passed), note))

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "value", "threshold", "status", "note"])
            for r in self.rows:
                w.writerow([r.name, f"{r.value:.17g}", f"{r.threshold:.17g}",
                            "PASS" if r.passed else "FAIL", r.note])

    def summary(self):
        width = max([len(r.name) for r in self.rows] + [4])
        lines = [f"{r.name:<{width}}  {r.value: .6e}  (threshold {r.threshold:.3g})  "
                 f"{'PASS' if r.passed else 'FAIL'}{'  ' + r.note if r.note else ''}"
                 for r in self.rows]
        verdict = "all checks passed" if self.passed else "some checks FAILED"
        return "\n".join(lines + [verdict])


__all__ = [
    "BalanceTerms", "BumpFunction", "CheckRow", "CoercivityProbe", "DiagnosticsReport",
    "EntropyPair", "JumpBound", "LinfReport", "MassBalance", "MollifiedKruzkov",
    "QuadraticEntropy", "ScalingFit", "entropy_residual", "flux_divergence_energy",
    "jump_bound_estimate", "kruzkov_flux", "l2_balance_check", "l2_balance_terms",
    "linf_check", "mass_balance", "residual_scaling", "sc_coercivity_probe",
    "sup_norm", "viscosity_integral", "viscosity_scaling",
]
