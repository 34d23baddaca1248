"""Initial data specifications and their reference solutions.

Specs are written as ``riemann(a, b, x0)``, ``bump(center, width, height)``,
``sine(amp, period)``, ``box(left, right, height)`` or ``constant(c)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .fluxes import Burgers, LinearAdvection
from .oracle import (FVGrid, RiemannProblem, burgers_riemann_breakpoints,
                     exact_burgers_riemann, fv_reference, fv_solve)

_SPEC = re.compile(r"^\s*(\w+)\s*\(([^()]*)\)\s*$")


@dataclass(frozen=True)
class InitialData:
    kind: str
    params: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "riemann":
            return np.where(x < p[2], p[0], p[1]).astype(float)
        if self.kind == "bump":
            s = (x - p[0]) / p[1]
            out = np.zeros_like(s)
            inside = np.abs(s) < 1.0
            out[inside] = p[2] * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
            return out
        if self.kind == "sine":
            return p[0] * np.sin(2.0 * np.pi * x / p[1])
        if self.kind == "box":
            return np.where((x >= p[0]) & (x < p[1]), p[2], 0.0)
        return np.full_like(x, p[0])

    @property
    def sup(self):
        p = self.params
        if self.kind == "riemann":
            return max(abs(p[0]), abs(p[1]))
        if self.kind in ("bump", "box"):
            return abs(p[-1])
        return abs(p[0])

    @property
    def range(self):
        p = self.params
        if self.kind == "riemann":
            return min(p[0], p[1]), max(p[0], p[1])
        if self.kind in ("bump", "box"):
            return min(0.0, p[-1]), max(0.0, p[-1])
        if self.kind == "sine":
            return -abs(p[0]), abs(p[0])
        return p[0], p[0]


_ARITY = {"riemann": 3, "bump": 3, "sine": 2, "box": 3, "constant": 1}


def parse_initial_data(text: str) -> InitialData:
    m = _SPEC.match(text)
    if not m:
        raise ValueError(f"cannot parse initial data {text!r}")
    kind = m.group(1).lower()
    if kind not in _ARITY:
        raise ValueError(f"unknown initial data kind {kind!r}")
    args = [a for a in (s.strip() for s in m.group(2).split(",")) if a]
    if kind == "riemann" and len(args) == 2:
        args.append("0")
    if len(args) != _ARITY[kind]:
        raise ValueError(f"{kind} takes {_ARITY[kind]} arguments, got {len(args)}")
    try:
        params = tuple(float(a) for a in args)
    except ValueError as exc:
        raise ValueError(f"non-numeric argument in {text!r}") from exc
    if not all(np.isfinite(params)):
        raise ValueError(f"non-finite argument in {text!r}")
    if kind == "bump" and params[1] <= 0:
        raise ValueError("bump width must be positive")
    if kind == "sine" and params[1] <= 0:
        raise ValueError("sine period must be positive")
    if kind == "box" and params[0] >= params[1]:
        raise ValueError("box needs left < right")
    return InitialData(kind, params)


@dataclass
class Reference:
    """A reference solution at the final time plus how it was obtained."""

    fun: object
    breakpoints: tuple
    source: str


def reference_solution(flux, u0: InitialData, T, x_left, x_right, finest_n_x):
    """Exact solution when one is available, otherwise a fine-grid FV solution.

    The finite-volume grid is 16 times finer than ``finest_n_x``.
    """
    if isinstance(flux, LinearAdvection):
        bps = ()
        if u0.kind == "riemann":
            bps = (u0.params[2] + flux.c * T,)
        elif u0.kind == "box":
            bps = (u0.params[0] + flux.c * T, u0.params[1] + flux.c * T)
        return Reference(lambda x: u0(np.asarray(x) - flux.c * T), bps, "exact")
    if isinstance(flux, Burgers) and u0.kind in ("riemann", "constant"):
        p = u0.params
        rp = RiemannProblem(p[0], p[1], p[2]) if u0.kind == "riemann" else RiemannProblem(p[0], p[0])
        return Reference(lambda x: exact_burgers_riemann(rp, T, x),
                         burgers_riemann_breakpoints(rp, T), "exact")
    grid = FVGrid(16 * finest_n_x, x_left, x_right)
    fv_solve(flux, u0, grid, T)
    edges = tuple(grid.x_left + grid.dx * np.arange(grid.n_cells + 1))
    return Reference(fv_reference(grid), edges, "finite-volume")
