"""Physical fluxes, the space-time flux ``(u, f(u))`` and numerical fluxes.

All numerical fluxes act on the space-time normal ``nu = (nu_t, nu_x)`` and are
vectorized over arrays of traces and normals.  ``evaluate`` returns the flux
together with its partial derivatives in both traces (one-sided where the
flux is not differentiable), which the Newton solver consumes directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

_GL_X, _GL_W = roots_legendre(24)


class FluxFunction:
    """Scalar flux ``f`` with derivatives and the antiderivative ``F = int_0^u f``."""

    name = "flux"
    #: polynomial degree in ``u``; ``None`` for non-polynomial fluxes
    degree: int | None = None
    convex = False

    def f(self, u):
        raise NotImplementedError

    def df(self, u):
        raise NotImplementedError

    def d2f(self, u):
        raise NotImplementedError

    def antiderivative(self, u):
        u = np.asarray(u, dtype=float)
        return _gauss_integral(self.f, np.zeros_like(u), u)

    def derivative_roots(self, s):
        """Points ``xi`` with ``f'(xi) = s``; shape ``s.shape + (m,)``, NaN padded."""
        raise NotImplementedError

    def inflection_points(self):
        """Real points where ``f'' = 0``; ``f'`` has its local extrema there."""
        return np.empty(0)

    def l2_entropy_flux(self, u):
        """Entropy flux ``int_0^u xi f'(xi) dxi`` paired with ``eta = u^2 / 2``."""
        u = np.asarray(u, dtype=float)
        return u * self.f(u) - self.antiderivative(u)

    @property
    def breakpoints(self):
        return ()


def _gauss_integral(fun, a, b):
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return half * np.sum(_GL_W * fun(nodes), axis=-1)


@dataclass(frozen=True)
class LinearAdvection(FluxFunction):
    c: float = 1.0
    name = "advection"
    degree = 1
    convex = False

    def f(self, u):
        return self.c * np.asarray(u, dtype=float)

    def df(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.c)

    def d2f(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def antiderivative(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * self.c * u * u

    def derivative_roots(self, s):
        s = np.asarray(s, dtype=float)
        return np.full(s.shape + (0,), np.nan)


@dataclass(frozen=True)
class Burgers(FluxFunction):
    name = "burgers"
    degree = 2
    convex = True

    def f(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u * u

    def df(self, u):
        return np.asarray(u, dtype=float).copy()

    def d2f(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    def antiderivative(self, u):
        u = np.asarray(u, dtype=float)
        return u * u * u / 6.0

    def derivative_roots(self, s):
        return np.asarray(s, dtype=float)[..., None].copy()


@dataclass(frozen=True)
class BuckleyLeverett(FluxFunction):
    """``f(u) = u^2 / (u^2 + m (1 - u)^2)`` (nonconvex)."""

    m: float = 0.5
    name = "buckley"
    degree = None
    convex = False

    def _den(self, u):
        return u * u + self.m * (1.0 - u) ** 2

    def f(self, u):
        u = np.asarray(u, dtype=float)
        return u * u / self._den(u)

    def df(self, u):
        u = np.asarray(u, dtype=float)
        return 2.0 * self.m * u * (1.0 - u) / self._den(u) ** 2

    def d2f(self, u):
        u = np.asarray(u, dtype=float)
        d = self._den(u)
        dd = 2.0 * u - 2.0 * self.m * (1.0 - u)
        num = 2.0 * self.m * (1.0 - 2.0 * u)
        return num / d ** 2 - 4.0 * self.m * u * (1.0 - u) * dd / d ** 3

    def inflection_points(self):
        # numerator of f'': N' D - 2 N D' with N = 2 m u (1 - u), D = u^2 + m (1 - u)^2
        m = self.m
        P = np.polynomial.Polynomial
        N, D = P([0.0, 2.0 * m, -2.0 * m]), P([m, -2.0 * m, 1.0 + m])
        r = (N.deriv() * D - 2.0 * N * D.deriv()).roots()
        return np.sort(np.real(r[np.abs(np.imag(r)) < 1e-10]))

    def derivative_roots(self, s):
        # 2 m u (1 - u) = s (u^2 + m (1-u)^2)^2 is a quartic in u; its real
        # roots come from batched companion-matrix eigenvalues
        s = np.asarray(s, dtype=float)
        m = self.m
        out = np.full(s.shape + (4,), np.nan)
        den = np.polynomial.Polynomial([m, -2.0 * m, 1.0 + m])
        den2 = (den * den).coef
        lhs = np.array([0.0, 2.0 * m, -2.0 * m, 0.0, 0.0])
        # s = 0: the quartic drops to 2 m u (1 - u); non-finite s: g is linear
        zero = s == 0.0
        out[zero, 0], out[zero, 1] = 0.0, 1.0
        quartic = np.isfinite(s) & ~zero
        if np.any(quartic):
            sq = s[quartic]
            coef = lhs - sq[:, None] * den2
            comp = np.zeros((sq.size, 4, 4))
            comp[:, 1:, :-1] = np.eye(3)
            comp[:, :, -1] = -coef[:, :4] / coef[:, 4:]
            r = np.linalg.eigvals(comp)
            real = np.abs(r.imag) < 1e-10
            roots = np.where(real, r.real, np.nan)
            # move real roots to the front as in the scalar path
            order = np.argsort(~real, axis=-1, kind="stable")
            out[quartic] = np.take_along_axis(roots, order, axis=-1)
        return out


@dataclass(frozen=True)
class ClampedFlux(FluxFunction):
    """``base`` continued linearly (C^1) outside ``[lo, hi]``.

    Keeps ``f'`` globally bounded while agreeing with ``base`` on ``[lo, hi]``.
    """

    base: FluxFunction
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("clamp interval must satisfy lo < hi")

    @property
    def name(self):
        return f"clamped-{self.base.name}"

    @property
    def degree(self):
        return None

    @property
    def convex(self):
        return self.base.convex

    @property
    def breakpoints(self):
        return (self.lo, self.hi)

    def f(self, u):
        u = np.asarray(u, dtype=float)
        uc = np.clip(u, self.lo, self.hi)
        return self.base.f(uc) + self.base.df(uc) * (u - uc)

    def df(self, u):
        return self.base.df(np.clip(np.asarray(u, dtype=float), self.lo, self.hi))

    def d2f(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u >= self.lo) & (u <= self.hi)
        return np.where(inside, self.base.d2f(np.clip(u, self.lo, self.hi)), 0.0)

    def antiderivative(self, u):
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        # piecewise-smooth integrand: split at zero and the clamp points
        cuts = sorted({0.0, self.lo, self.hi})
        lo_pts = [-np.inf] + cuts
        hi_pts = cuts + [np.inf]
        for lo, hi in zip(lo_pts, hi_pts):
            a = np.clip(0.0, lo, hi)
            b = np.clip(u, lo, hi)
            total = total + _gauss_integral(self.f, np.full_like(u, a), b)
        return total

    def inflection_points(self):
        # f' is constant outside [lo, hi], so the clamp points join the candidates
        r = np.asarray(self.base.inflection_points())
        return np.sort(np.concatenate([r[(r > self.lo) & (r < self.hi)], [self.lo, self.hi]]))

    def derivative_roots(self, s):
        r = self.base.derivative_roots(s)
        return np.where((r >= self.lo) & (r <= self.hi), r, np.nan)


def default_clamp_interval(u_min, u_max):
    osc = u_max - u_min
    if osc <= 0.0:
        osc = max(1.0, abs(u_max))
    return u_min - 0.1 * osc, u_max + 0.1 * osc


@dataclass(frozen=True)
class SpaceTimeFlux:
    """``f~(u) = (u, f(u))``."""

    flux: FluxFunction

    def dot(self, u, nt, nx):
        return np.asarray(u, dtype=float) * nt + self.flux.f(u) * nx

    def ddot(self, u, nt, nx):
        return nt + self.flux.df(u) * nx

    def norm_derivative(self, u):
        return np.sqrt(1.0 + self.flux.df(u) ** 2)

    def integral_dot(self, a, b, nt, nx):
        """``int_a^b f~(xi) . nu dxi`` in closed form via the antiderivative."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return 0.5 * nt * (b * b - a * a) \
            + nx * (self.flux.antiderivative(b) - self.flux.antiderivative(a))


def spacetime_flux_dot_normal(flux: FluxFunction, u, normal):
    normal = np.asarray(normal, dtype=float)
    return SpaceTimeFlux(flux).dot(u, normal[..., 0], normal[..., 1])


class FluxKind(str, enum.Enum):
    GODUNOV = "godunov"
    ENGQUIST_OSHER = "eo"
    LOCAL_LAX_FRIEDRICHS = "llf"
    TEMPORAL_UPWIND = "upwind"
    CENTRAL = "central"


class NumericalFlux:
    """Two-point interface flux ``h(a, b; nu)``; ``a`` is the owner trace."""

    kind: FluxKind

    def __init__(self, flux: FluxFunction):
        self.flux = flux
        self.st = SpaceTimeFlux(flux)

    def __call__(self, a, b, nt, nx):
        return self.evaluate(a, b, nt, nx)[0]

    def evaluate(self, a, b, nt, nx):
        raise NotImplementedError


class Godunov(NumericalFlux):
    """``min_[a,b] g`` if ``a <= b`` else ``max_[b,a] g`` with ``g = f~ . nu``.

    Candidates are the two traces plus the critical points of ``g`` inside
    the interval.  Derivatives are taken on the active branch; on the
    ``a == b`` seam the upwind derivative is used.
    """

    kind = FluxKind.GODUNOV

    def evaluate(self, a, b, nt, nx):
        a, b, nt, nx = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                             for v in (a, b, nt, nx)))
        g = self.st.dot
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = np.where(nx != 0.0, -nt / nx, np.nan)
        crit = self.flux.derivative_roots(s)
        crit = np.where((crit > lo[..., None]) & (crit < hi[..., None]), crit, np.nan)
        cand = np.concatenate([a[..., None], b[..., None], crit], axis=-1)
        vals = g(cand, nt[..., None], nx[..., None])
        minimize = a <= b
        big = np.where(np.isnan(vals), np.inf, vals)
        small = np.where(np.isnan(vals), -np.inf, vals)
        idx = np.where(minimize, np.argmin(big, axis=-1), np.argmax(small, axis=-1))
        h = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0]
        ga = self.st.ddot(a, nt, nx)
        gb = self.st.ddot(b, nt, nx)
        dha = np.where(idx == 0, ga, 0.0)
        dhb = np.where(idx == 1, gb, 0.0)
        # near-ties between the two traces pick an arbitrary branch in argmin,
        # so the upwind derivative is used on a thin band around the seam
        seam = np.abs(a - b) <= 1e-12 * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        dha = np.where(seam, np.maximum(ga, 0.0), dha)
        dhb = np.where(seam, np.minimum(gb, 0.0), dhb)
        return h, dha, dhb


class EngquistOsher(NumericalFlux):
    """Flux-splitting ``g(xi*) + int_xi*^a g'^+ + int_xi*^b g'^-`` (convex ``f``)."""

    kind = FluxKind.ENGQUIST_OSHER

    def __init__(self, flux):
        if not (flux.convex or isinstance(flux, LinearAdvection)):
            raise ValueError("Engquist-Osher flux is implemented for convex or "
                             "linear fluxes only; use godunov")
        super().__init__(flux)

    def evaluate(self, a, b, nt, nx):
        a, b, nt, nx = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                             for v in (a, b, nt, nx)))
        g, dg = self.st.dot, self.st.ddot
        ga, gb = dg(a, nt, nx), dg(b, nt, nx)
        if not self.flux.convex:
            up = ga >= 0.0
            h = np.where(up, g(a, nt, nx), g(b, nt, nx))
            return h, np.where(up, ga, 0.0), np.where(up, 0.0, gb)
        degenerate = np.abs(nx) < 1e-14
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            sonic = self.flux.derivative_roots(np.where(degenerate, 0.0, -nt / nx))[..., 0]
        convex_g = nx > 0.0
        # which traces sit on the outflow side of the sonic point
        a_out = np.where(convex_g, a > sonic, a < sonic)
        b_in = np.where(convex_g, b < sonic, b > sonic)
        # spelled out per case so g(sonic) is only formed when both branches are active;
        # it is huge and cancels when |nu_x| is small
        h = np.select([a_out & b_in, a_out, b_in],
                      [g(a, nt, nx) + g(b, nt, nx) - g(sonic, nt, nx), g(a, nt, nx),
                       g(b, nt, nx)], g(sonic, nt, nx))
        dha = np.where(convex_g, np.where(a > sonic, ga, 0.0), np.where(a < sonic, ga, 0.0))
        dhb = np.where(convex_g, np.where(b < sonic, gb, 0.0), np.where(b > sonic, gb, 0.0))
        # nu_x == 0: g is linear with slope nu_t, so the flux is pure upwinding
        up = nt >= 0.0
        h = np.where(degenerate, np.where(up, a, b) * nt, h)
        dha = np.where(degenerate, np.where(up, nt, 0.0), dha)
        dhb = np.where(degenerate, np.where(up, 0.0, nt), dhb)
        return h, dha, dhb


class LocalLaxFriedrichs(NumericalFlux):
    """``(g(a) + g(b)) / 2 - lam / 2 (b - a)``, ``lam = max_[a,b] |g'|``.

    ``g' = nu_t + nu_x f'`` is extremal at the traces or at inflection points
    of ``f``, so ``lam`` is exact.
    """

    kind = FluxKind.LOCAL_LAX_FRIEDRICHS

    def _lambda(self, a, b, nt, nx):
        dg = self.st.ddot
        ga, gb = np.abs(dg(a, nt, nx)), np.abs(dg(b, nt, nx))
        lam = np.maximum(ga, gb)
        sign_a = np.sign(dg(a, nt, nx))
        sign_b = np.sign(dg(b, nt, nx))
        dlam_a = np.where(ga >= gb, sign_a * self.flux.d2f(a) * nx, 0.0)
        dlam_b = np.where(ga >= gb, 0.0, sign_b * self.flux.d2f(b) * nx)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        for xi in self.flux.inflection_points():
            inner = np.where((xi > lo) & (xi < hi), np.abs(dg(np.full_like(a, xi), nt, nx)), 0.0)
            # an interior maximum does not move with the traces
            interior = inner > lam
            lam = np.maximum(lam, inner)
            dlam_a = np.where(interior, 0.0, dlam_a)
            dlam_b = np.where(interior, 0.0, dlam_b)
        return lam, dlam_a, dlam_b

    def evaluate(self, a, b, nt, nx):
        a, b, nt, nx = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                             for v in (a, b, nt, nx)))
        g, dg = self.st.dot, self.st.ddot
        lam, la, lb = self._lambda(a, b, nt, nx)
        jump = b - a
        h = 0.5 * (g(a, nt, nx) + g(b, nt, nx)) - 0.5 * lam * jump
        dha = 0.5 * dg(a, nt, nx) + 0.5 * lam - 0.5 * la * jump
        dhb = 0.5 * dg(b, nt, nx) - 0.5 * lam - 0.5 * lb * jump
        return h, dha, dhb


class TemporalUpwind(NumericalFlux):
    """Pure upwinding in time on facets with ``nu = (+-1, 0)``.

    The upwind state is the trace from the earlier slab: the owner trace on a
    slab top (``nu_t = +1``), the neighbor trace on a slab bottom.
    """

    kind = FluxKind.TEMPORAL_UPWIND

    def evaluate(self, a, b, nt, nx):
        a, b, nt, nx = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                             for v in (a, b, nt, nx)))
        if np.any(np.abs(nx) > 1e-12) or np.any(np.abs(np.abs(nt) - 1.0) > 1e-12):
            raise ValueError("temporal upwinding requires a normal (+-1, 0)")
        top = nt > 0.0
        h = np.where(top, a, b) * nt
        return h, np.where(top, nt, 0.0), np.where(top, 0.0, nt)


class Central(NumericalFlux):
    """Arithmetic mean; not monotone, kept only as a negative control."""

    kind = FluxKind.CENTRAL

    def evaluate(self, a, b, nt, nx):
        g, dg = self.st.dot, self.st.ddot
        return (0.5 * (g(a, nt, nx) + g(b, nt, nx)),
                0.5 * dg(a, nt, nx), 0.5 * dg(b, nt, nx))


_FLUXES = {
    FluxKind.GODUNOV: Godunov,
    FluxKind.ENGQUIST_OSHER: EngquistOsher,
    FluxKind.LOCAL_LAX_FRIEDRICHS: LocalLaxFriedrichs,
    FluxKind.TEMPORAL_UPWIND: TemporalUpwind,
    FluxKind.CENTRAL: Central,
}


def make_numerical_flux(kind, flux: FluxFunction) -> NumericalFlux:
    return _FLUXES[FluxKind(kind)](flux)


def make_flux(pde, c=1.0, m=0.5) -> FluxFunction:
    if pde == "advection":
        return LinearAdvection(c)
    if pde == "burgers":
        return Burgers()
    if pde == "buckley":
        return BuckleyLeverett(m)
    raise ValueError(f"unknown pde {pde!r}")


def numerical_flux(nflux: NumericalFlux, a, b, normal):
    normal = np.asarray(normal, dtype=float)
    return nflux(a, b, normal[..., 0], normal[..., 1])


@dataclass
class MonotoneReport:
    passed: bool
    n_checked: int
    n_violations: int
    worst_da: float
    worst_db: float


DEFAULT_NORMALS = np.array([[0.0, 1.0], [0.0, -1.0],
                            [np.sqrt(0.5), np.sqrt(0.5)], [-np.sqrt(0.5), np.sqrt(0.5)],
                            [0.6, -0.8], [-0.8, -0.6]])


def check_monotone(nflux: NumericalFlux, sample_box=(-2.0, 2.0), n_samples=41,
                   normals=None, step=1e-6, tol=1e-10) -> MonotoneReport:
    """Finite-difference sign check: ``dh/da >= -tol`` and ``dh/db <= tol``."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    normals = DEFAULT_NORMALS if normals is None else np.atleast_2d(normals)
    s = np.linspace(sample_box[0], sample_box[1], n_samples)
    A, B = np.meshgrid(s, s, indexing="ij")
    worst_a, worst_b, bad, total = np.inf, -np.inf, 0, 0
    for nt, nx in normals:
        da = (nflux(A + step, B, nt, nx) - nflux(A - step, B, nt, nx)) / (2 * step)
        db = (nflux(A, B + step, nt, nx) - nflux(A, B - step, nt, nx)) / (2 * step)
        worst_a = min(worst_a, float(da.min()))
        worst_b = max(worst_b, float(db.max()))
        bad += int(np.count_nonzero((da < -tol) | (db > tol)))
        total += A.size
    return MonotoneReport(bad == 0, total, bad, worst_a, worst_b)
