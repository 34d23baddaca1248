"""Element-wise artificial viscosity and the shock-capturing diffusion form.

Both functions operate on a :class:`stdg.solver.SlabDiscretization`, which
holds the quadrature data of one slab.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ViscosityParams:
    beta: float = 1.0
    c_eps: float = 1.0
    #: use ``h_k`` instead of the global mesh size
    local_h: bool = False
    #: include jumps against the previous slab on the slab-bottom faces
    temporal_jumps: bool = True

    def __post_init__(self):
        if not 0.5 < self.beta < 2.0:
            raise ValueError(f"viscosity.beta must lie in (0.5, 2), got {self.beta}")
        if not self.c_eps > 0.0:
            raise ValueError(f"viscosity.c_eps must be positive, got {self.c_eps}")


def viscosity_indicator(disc, U, u_minus, temporal_jumps=True, u_ext=None):
    """``int_k |div f~(u)| + int_dk |u^(k) - u^(ke)|`` for every element."""
    u, grad = disc.volume_values(U)
    div = disc.divergence(u, grad)
    total = np.einsum("kq,kq->k", disc.vol_w, np.abs(div))

    a, b = disc.internal_traces(U)
    jump = np.einsum("fq,fq->f", disc.fi_w, np.abs(a - b))
    np.add.at(total, disc.fi_own, jump)
    np.add.at(total, disc.fi_nbr, jump)

    if temporal_jumps:
        up = disc.bottom_trace(U)
        np.add.at(total, disc.fb_elem,
                  np.einsum("fq,fq->f", disc.fb_w, np.abs(up - u_minus)))
    if u_ext is not None:
        a = disc.boundary_trace(U)
        np.add.at(total, disc.fs_elem,
                  np.einsum("fq,fq->f", disc.fs_w, np.abs(a - u_ext)))
    # u_ext is None: transmissive boundary, exterior trace equals interior
    return total


def element_viscosity(disc, U, u_minus, params: ViscosityParams, u_ext=None):
    """``eps_k = h^beta C_eps [ int_k |div f~| + int_dk |jump| ] / |k|``."""
    indicator = viscosity_indicator(disc, U, u_minus, params.temporal_jumps, u_ext)
    mesh = disc.mesh
    h = mesh.diameter if params.local_h else disc.h_global
    return np.asarray(h, dtype=float) ** params.beta * params.c_eps * indicator / mesh.area


def apply_shock_capturing(disc, U, eps):
    """Residual contribution ``int_k eps_k grad u . grad phi_i``, shape ``(K, N)``."""
    _, grad = disc.volume_values(U)
    return eps[:, None] * np.einsum("kq,kqd,kqnd->kn", disc.vol_w, grad, disc.vol_grad)


def shock_capturing_energy(disc, U, eps):
    """``sum_k eps_k int_k |grad u|^2`` (the diagonal of the diffusion form)."""
    _, grad = disc.volume_values(U)
    return float(np.einsum("k,kq,kqd,kqd->", eps, disc.vol_w, grad, grad))
