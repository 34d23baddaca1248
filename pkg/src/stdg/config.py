"""Flat ``key = value`` run configuration with dotted keys.

Blank lines and ``#`` comments are ignored.  Every error names the file
and line it came from.  See the README for the full key list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .fluxes import ClampedFlux, FluxKind, default_clamp_interval, make_flux
from .mesh import Pattern
from .problems import InitialData, parse_initial_data
from .shock_capturing import ViscosityParams
from .solver import NewtonSettings, Scheme


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# key -> (parser, default)
_SCHEMA = {
    "pde": (str, "burgers"),
    "advection.c": (float, 1.0),
    "buckley.m": (float, 0.5),
    "flux": (str, "godunov"),
    "flux.clamp": (_bool, False),
    "q": (int, 1),
    "viscosity.beta": (float, 1.0),
    "viscosity.c_eps": (float, 1.0),
    "viscosity.local_h": (_bool, False),
    "viscosity.temporal_jumps": (_bool, True),
    "domain.x_left": (float, -1.0),
    "domain.x_right": (float, 1.0),
    "n_x": (int, 32),
    "T": (float, 0.5),
    "slabs": (int, 0),
    "pattern": (str, "crisscross"),
    "boundary": (str, "farfield"),
    "u0": (str, "riemann(1, 0, 0)"),
    "newton.tol": (float, 1e-10),
    "newton.max_iter": (int, 50),
    "newton.linear_solver": (str, "direct"),
    "picard.sweeps": (int, 3),
    "diagnostics.k": (_floats, (0.25, 0.5, 0.75)),
    "diagnostics.delta": (float, 1e-3),
    "diagnostics.phi": (_floats, ()),
    "diagnostics.p": (_floats, (4.0, 6.0)),
    "diagnostics.trials": (int, 200),
    "diagnostics.probe": (_bool, False),
    "output.dir": (str, "out"),
    "seed": (int, 42),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def __getitem__(self, key):
        return self.values[key]

    @property
    def u0(self) -> InitialData:
        return parse_initial_data(self.values["u0"])

    def flux(self):
        f = make_flux(self["pde"], c=self["advection.c"], m=self["buckley.m"])
        if self["flux.clamp"]:
            lo, hi = self.u0.range
            f = ClampedFlux(f, *default_clamp_interval(lo, hi))
        return f

    def scheme(self):
        vp = ViscosityParams(self["viscosity.beta"], self["viscosity.c_eps"],
                             self["viscosity.local_h"], self["viscosity.temporal_jumps"])
        return Scheme(self.flux(), self["q"], FluxKind(self["flux"]), vp,
                      boundary=self["boundary"])

    def newton(self):
        return NewtonSettings(abs_tol=self["newton.tol"], max_iter=self["newton.max_iter"],
                              picard_sweeps=self["picard.sweeps"],
                              linear_solver=self["newton.linear_solver"])

    def dt(self, n_x, refinement=1):
        """Slab height: ``T / slabs`` if a slab count is given, else the cell width.

        ``refinement`` multiplies the slab count on refined ladder levels.
        """
        if self["slabs"] > 0:
            return self["T"] / (self["slabs"] * refinement)
        return (self["domain.x_right"] - self["domain.x_left"]) / n_x

    @property
    def pattern(self):
        return Pattern(self["pattern"])


def _validate(values, where, source):
    def fail(key, msg):
        line = where.get(key)
        loc = f"{source}:{line}" if line else source
        raise ConfigError(f"{loc}: {key}: {msg}")

    if values["pde"] not in ("advection", "burgers", "buckley"):
        fail("pde", f"must be advection|burgers|buckley, got {values['pde']!r}")
    if values["flux"] not in ("godunov", "eo", "llf"):
        fail("flux", f"must be godunov|eo|llf, got {values['flux']!r}")
    if values["flux"] == "eo" and values["pde"] == "buckley":
        fail("flux", "Engquist-Osher needs a convex flux; use godunov for buckley")
    if not 1 <= values["q"] <= 4:
        fail("q", f"must lie in [1, 4], got {values['q']}")
    if not 0.5 < values["viscosity.beta"] < 2.0:
        fail("viscosity.beta", f"must lie in (0.5, 2), got {values['viscosity.beta']}")
    if not values["viscosity.c_eps"] > 0:
        fail("viscosity.c_eps", "must be positive")
    if not values["domain.x_left"] < values["domain.x_right"]:
        fail("domain.x_right", "must exceed domain.x_left")
    if values["n_x"] < 2:
        fail("n_x", f"must be at least 2, got {values['n_x']}")
    if not values["T"] > 0:
        fail("T", "must be positive")
    if values["slabs"] < 0:
        fail("slabs", "must be nonnegative (0 selects the cell width)")
    if values["pattern"] not in ("crisscross", "diagonal"):
        fail("pattern", "must be crisscross|diagonal")
    if values["boundary"] not in ("farfield", "transmissive"):
        fail("boundary", "must be farfield|transmissive")
    if not values["newton.tol"] > 0:
        fail("newton.tol", "must be positive")
    if values["newton.max_iter"] < 1:
        fail("newton.max_iter", "must be at least 1")
    if values["newton.linear_solver"] not in ("direct", "gmres"):
        fail("newton.linear_solver", "must be direct|gmres")
    if values["picard.sweeps"] < 1:
        fail("picard.sweeps", "must be at least 1")
    if not values["diagnostics.delta"] > 0:
        fail("diagnostics.delta", "must be positive")
    if values["diagnostics.phi"] and len(values["diagnostics.phi"]) != 4:
        fail("diagnostics.phi", "expects t_c, x_c, r_t, r_x")
    try:
        parse_initial_data(values["u0"])
    except ValueError as exc:
        fail("u0", str(exc))


def parse_config(text: str, source="<string>") -> RunConfig:
    values = {k: v[1] for k, v in _SCHEMA.items()}
    where = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in where:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} "
                              f"(first set on line {where[key]})")
        try:
            values[key] = _SCHEMA[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
        where[key] = lineno
    _validate(values, where, source)
    return RunConfig(values, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
