"""Cached runs shared by several test modules (refinement ladders are costly)."""

from functools import lru_cache

import numpy as np

from stdg import RunState, Scheme, ViscosityParams, advance, make_flux, parse_initial_data
from stdg.fluxes import FluxKind

LADDER = (16, 32, 64, 128)
BATTERY = [(q, n) for q in (1, 2) for n in (16, 32, 64)]


@lru_cache(maxsize=None)
def run(pde="burgers", u0="riemann(1, 0, 0)", q=1, n_x=16, T=0.5, beta=1.0, c_eps=1.0,
        flux="godunov", x_left=-1.0, x_right=1.0, boundary="farfield", adv_c=1.0):
    scheme = Scheme(make_flux(pde, c=adv_c), q, FluxKind(flux), ViscosityParams(beta, c_eps),
                    boundary=boundary)
    state = RunState(parse_initial_data(u0), scheme, x_left, x_right, n_x)
    return advance(state, T)


def ladder(levels=LADDER, **kw):
    return [run(n_x=n, **kw) for n in levels]


def random_state(rng, disc, scale=1.0, mean=0.0):
    U = scale * rng.uniform(-1.0, 1.0, size=(disc.K, disc.N))
    U[:, 0] += mean * np.sqrt(2.0)
    return U


def fd_jacobian(disc, U, eps, u_minus, u_ext, step=1e-7):
    """Central-difference Jacobian of the slab residual, dense."""
    n = U.size
    J = np.empty((n, n))
    flat = U.ravel()
    for j in range(n):
        up, dn = flat.copy(), flat.copy()
        up[j] += step
        dn[j] -= step
        Rp = disc.residual(up.reshape(U.shape), eps, u_minus, u_ext).ravel()
        Rm = disc.residual(dn.reshape(U.shape), eps, u_minus, u_ext).ravel()
        J[:, j] = (Rp - Rm) / (2 * step)
    return J
