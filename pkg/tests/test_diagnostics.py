import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from helpers import ladder, run
from stdg.diagnostics import (BumpFunction, DiagnosticsReport, MollifiedKruzkov,
                              QuadraticEntropy, ScalingFit, entropy_residual,
                              flux_divergence_energy, jump_bound_estimate, kruzkov_flux,
                              l2_balance_check, l2_balance_terms, linf_check, mass_balance,
                              residual_scaling, sc_coercivity_probe, sup_norm,
                              viscosity_integral, viscosity_scaling)
from stdg.fluxes import BuckleyLeverett, Burgers, LinearAdvection, SpaceTimeFlux

FLUXES = [Burgers(), LinearAdvection(1.7), LinearAdvection(-0.4), BuckleyLeverett(0.5)]


# -- entropy pairs ----------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FLUXES), st.floats(-1, 1), st.floats(1e-4, 0.5), st.floats(-2, 2))
def test_kruzkov_flux_against_mpmath(flux, k, delta, u):
    def integrand(x):
        x = float(x)
        return (x - k) / math.hypot(x - k, delta) * float(flux.df(np.array(x)))

    # geometric breakpoints resolve the delta-wide transition at k
    steps = [delta * 4.0 ** j for j in range(12) if delta * 4.0 ** j < abs(u - k)]
    pts = [k] + [k + math.copysign(s, u - k) for s in steps] + [u]
    expect = float(mpmath.quad(integrand, pts))
    for method in ("auto", "quadrature"):
        assert float(kruzkov_flux(flux, k, delta, u, method)) == pytest.approx(
            expect, abs=1e-11)


def test_kruzkov_flux_examples():
    f = Burgers()
    assert kruzkov_flux(f, 0.3, 1e-3, 0.3) == 0.0
    c = 2.5
    u = np.linspace(-1, 1, 9)
    pair = MollifiedKruzkov(LinearAdvection(c), 0.2, 1e-2)
    np.testing.assert_allclose(pair.q(u), c * (pair.eta(u) - pair.eta(0.2)), atol=1e-15)
    # delta -> 0 with u > k: q -> (u^2 - k^2) / 2
    for delta in (1e-3, 1e-5, 1e-7):
        got = kruzkov_flux(f, 0.25, delta, 0.9)
        assert got == pytest.approx((0.9 ** 2 - 0.25 ** 2) / 2, abs=2 * delta)
    with pytest.raises(ValueError):
        kruzkov_flux(f, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        kruzkov_flux(f, 0.0, 1e-3, 1.0, method="exact")


@pytest.mark.parametrize("pair", [QuadraticEntropy(Burgers()), QuadraticEntropy(BuckleyLeverett()),
                                  MollifiedKruzkov(Burgers(), 0.5, 1e-2),
                                  MollifiedKruzkov(BuckleyLeverett(), 0.4, 5e-2)])
def test_entropy_flux_compatibility(pair):
    """``q' = f' eta'`` and ``eta'' >= 0``."""
    u = np.linspace(-0.5, 1.5, 41)
    h = 1e-5
    dq = (pair.q(u + h) - pair.q(u - h)) / (2 * h)
    np.testing.assert_allclose(dq, pair.flux.df(u) * pair.deta(u), atol=1e-6)
    deta = (pair.eta(u + h) - pair.eta(u - h)) / (2 * h)
    np.testing.assert_allclose(deta, pair.deta(u), atol=1e-6)
    assert np.all(pair.d2eta(u) >= 0)


@pytest.mark.parametrize("delta", [1e-1, 1e-2, 1e-3])
def test_mollified_kruzkov_invariants(delta):
    pair = MollifiedKruzkov(Burgers(), 0.3, delta)
    u = np.linspace(-3, 3, 6001)
    assert np.max(np.abs(pair.eta(u) - np.abs(u - 0.3))) <= delta
    assert np.all(np.abs(pair.deta(u)) <= 1.0)
    assert np.all(pair.d2eta(u) >= -1e-12)


def test_quadratic_entropy_flux_by_mpmath():
    f = BuckleyLeverett(0.5)
    pair = QuadraticEntropy(f)
    for u in (-0.4, 0.3, 1.2):
        expect = float(mpmath.quad(lambda x: float(x) * float(f.df(np.array(float(x)))), [0, u]))
        assert float(pair.q(np.array(u))) == pytest.approx(expect, abs=1e-10)


# -- test functions -----------------------------------------------------------------

def test_bump_function():
    phi = BumpFunction(0.5, 0.0, 0.2, 0.3)
    assert phi(0.5, 0.0) == pytest.approx(math.exp(-2.0))
    assert phi(0.71, 0.0) == 0.0 and phi(0.5, -0.31) == 0.0
    t, x, h = 0.55, 0.1, 1e-6
    gt, gx = phi.grad(t, x)
    assert gt == pytest.approx((phi(t + h, x) - phi(t - h, x)) / (2 * h), rel=1e-6)
    assert gx == pytest.approx((phi(t, x + h) - phi(t, x - h)) / (2 * h), rel=1e-6)
    phi.check_support(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        phi.check_support(0.6, -1.0, 1.0)
    with pytest.raises(ValueError):
        BumpFunction(0.5, 0.0, 0.0, 0.3)


# -- balance identities ---------------------------------------------------------------

def test_balance_zero_data():
    r = run(u0="constant(0)", n_x=8)
    assert l2_balance_check(r) == 0.0


@pytest.mark.parametrize("pde", ["burgers", "advection"])
def test_balance_constant_data(pde):
    c = 0.8
    r = run(pde=pde, u0=f"constant({c})", n_x=8, q=2)
    terms = l2_balance_terms(r)
    for v in (terms.shock_capturing, terms.interface, terms.boundary_dissipation,
              terms.temporal_jumps):
        assert abs(v) <= 1e-12
    assert terms.residual <= 1e-12 * c * c * 2.0


@pytest.mark.parametrize("boundary", ["farfield", "transmissive"])
def test_balance_burgers_shock(boundary):
    r = run(u0="riemann(1, 0, 0)", n_x=32, boundary=boundary, T=0.25)
    terms = l2_balance_terms(r)
    assert terms.residual <= 1e-8 * 2 * terms.initial_energy
    assert terms.min_interface_term >= -1e-12
    assert terms.min_temporal_jump_term >= 0
    assert terms.min_shock_capturing_term >= 0
    assert len(terms.per_slab) == len(r.slabs)


def test_balance_smooth_advection_and_buckley():
    for kw in (dict(pde="advection", u0="sine(0.5, 2)"),
               dict(pde="buckley", u0="riemann(0.9, 0.1, -0.5)", T=0.3)):
        r = run(n_x=16, **kw)
        terms = l2_balance_terms(r)
        assert terms.residual <= 1e-10 * max(1.0, 2 * terms.initial_energy)


def test_mass_balance_with_boundary_inflow():
    r = run(u0="riemann(1, 0, 0)", n_x=32)
    m = mass_balance(r)
    # inflow of u = 1 at speed 1/2 through the left boundary over [0, 0.5]
    assert m.boundary_outflow == pytest.approx(-0.25, abs=1e-10)
    assert m.defect <= 1e-12
    assert m.drift == pytest.approx(0.25, abs=1e-10)


# -- jump bound --------------------------------------------------------------------------

def test_jump_bound_shock_positive():
    jb = jump_bound_estimate(run(u0="riemann(1, 0, 0)", n_x=32))
    assert not jb.vacuous and jb.constant > 0


def test_jump_bound_constant_is_vacuous():
    jb = jump_bound_estimate(run(u0="constant(0.3)", n_x=8))
    assert jb.vacuous and jb.constant == math.inf


def facet_speeds(r, c):
    lam = []
    for n in range(len(r.slabs)):
        d = r.discretization(n)
        lam.append(np.abs(d.fi_nt[:, 0] + c * d.fi_nx[:, 0]))
    return np.concatenate(lam)


@pytest.mark.parametrize("c", [0.5, -0.7])
@pytest.mark.parametrize("flux", ["godunov", "llf"])
def test_jump_bound_linear_flux_is_half_min_speed(c, flux):
    """For linear ``g`` both fluxes are upwind, dissipating ``|g'| / 2 (b - a)^2`` exactly."""
    r = run(pde="advection", u0=f"sine(0.5, 2)", n_x=16, flux=flux, adv_c=c)
    jb = jump_bound_estimate(r)
    lam_min = facet_speeds(r, c).min()
    assert lam_min > 0
    assert jb.constant >= lam_min / 2 * (1 - 1e-6)
    assert jb.constant == pytest.approx(lam_min / 2, rel=1e-6)


def test_jump_bound_characteristic_facets_give_zero():
    # c = 1 on slabs with dt = dx: the diagonals are characteristics and an
    # upwind flux dissipates nothing across them
    r = run(pde="advection", u0="sine(0.5, 2)", n_x=16)
    assert facet_speeds(r, 1.0).min() < 1e-12
    assert jump_bound_estimate(r).constant == pytest.approx(0.0, abs=1e-10)


def test_llf_facet_dissipation_by_brute_force():
    c = 0.5
    r = run(pde="advection", u0="riemann(1, 0, 0)", n_x=16, flux="llf", adv_c=c)
    disc = r.discretization(0)
    a, b = disc.internal_traces(r.slabs[0].coeffs)
    f, i = np.unravel_index(np.argmax(np.abs(a - b)), a.shape)
    a, b = a[f, i], b[f, i]
    nt, nx = disc.fi_nt[f, 0], disc.fi_nx[f, 0]
    g = SpaceTimeFlux(LinearAdvection(c))
    brute = quad(lambda x: float(g.dot(x, nt, nx)), a, b)[0] - disc.nflux(a, b, nt, nx) * (b - a)
    assert brute == pytest.approx(0.5 * abs(nt + c * nx) * (b - a) ** 2, rel=1e-10)


# -- scaling fits --------------------------------------------------------------------------

def test_scaling_fit_recovers_power_law():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    fit = ScalingFit.fit(h, 3.0 * h ** 1.7)
    assert fit.order == pytest.approx(1.7) and fit.r_squared == pytest.approx(1.0)
    assert fit.passes(1.5) and not fit.passes(1.8)


def test_scaling_fit_edge_cases():
    h = np.array([0.4, 0.2, 0.1])
    assert ScalingFit.fit(h, np.zeros(3)).skipped
    with pytest.raises(ValueError):
        ScalingFit.fit(h[:2], [1.0, 2.0])
    with pytest.raises(ValueError):
        ScalingFit.fit(h[::-1], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ScalingFit.fit(h, [1.0, -1.0, 2.0])


def test_constant_solution_scalings_skip():
    runs = ladder((8, 16, 32), u0="constant(0.5)")
    assert residual_scaling(runs).skipped
    assert viscosity_scaling(runs).skipped
    rep = linf_check(runs, 0.5)
    np.testing.assert_allclose(rep.sups, 0.5, atol=1e-13)
    assert rep.passed


def test_smooth_advection_scalings():
    runs = ladder((16, 32, 64), pde="advection", u0="bump(-0.3, 0.4, 1)")
    assert residual_scaling(runs).order >= 4.0 / 3.0
    assert viscosity_scaling(runs).order >= 0.25
    assert linf_check(runs, 1.0).passed


def test_scaling_needs_three_runs():
    with pytest.raises(ValueError):
        residual_scaling([run(n_x=16), run(n_x=32)])


def test_flux_divergence_and_viscosity_are_nonnegative():
    r = run(n_x=16)
    assert flux_divergence_energy(r) > 0
    assert viscosity_integral(r) > 0
    assert 1.0 <= sup_norm(r) <= 2.0


# -- entropy residual ----------------------------------------------------------------------

def test_entropy_residual_constant_is_zero():
    r = run(u0="constant(0.4)", n_x=16)
    phi = BumpFunction(0.25, 0.0, 0.2, 0.5)
    pair = MollifiedKruzkov(Burgers(), 0.5, 1e-3)
    assert abs(entropy_residual(r, pair, phi)) <= 1e-12


def test_entropy_residual_rejects_bad_support():
    with pytest.raises(ValueError):
        entropy_residual(run(n_x=16), QuadraticEntropy(Burgers()),
                         BumpFunction(0.1, 0.0, 0.2, 0.3))


def test_entropy_residual_k_outside_range_is_weak_residual():
    """``k`` below every value: ``eta' = 1`` up to O(delta^2), so E_h tracks the weak residual."""
    r = run(u0="riemann(1, 0, 0)", n_x=64)
    phi = BumpFunction(0.25, 0.125, 0.2, 0.3)
    e = entropy_residual(r, MollifiedKruzkov(Burgers(), -1.0, 1e-3), phi)
    assert abs(e) < 1e-3


# -- coercivity probe ------------------------------------------------------------------------

def test_probe_p2_is_identity():
    pr = sc_coercivity_probe(1, 2, 100)
    np.testing.assert_allclose(pr.ratios, 1.0, atol=1e-12)


def test_probe_rejects_odd_p():
    for p in (3, 0):
        with pytest.raises(ValueError):
            sc_coercivity_probe(1, p, 10)


def test_probe_is_reproducible():
    a = sc_coercivity_probe(1, 4, 50, seed=7)
    b = sc_coercivity_probe(1, 4, 50, seed=7)
    np.testing.assert_array_equal(a.ratios, b.ratios)
    assert a.min_denominator >= -1e-12 and np.isfinite(a.max_ratio)


def test_probe_skips_constants():
    from stdg.diagnostics import _probe_ratio, _lattice
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    v = np.zeros(3)
    v[0] = 1.0
    num, den = _probe_ratio(v, tri, 1, 4, _lattice(10))
    assert abs(num) < 1e-14 and abs(den) < 1e-14


# -- report -----------------------------------------------------------------------------------

def test_report_csv(tmp_path):
    rep = DiagnosticsReport()
    rep.add("a", 1.0 / 3.0, 0.5, True)
    rep.add("b", math.nan, 0.0, False)
    rep.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "name,value,threshold,status,note"
    assert lines[1].startswith("a,0.33333333333333331,0.5,PASS")
    assert "non-finite" in lines[2]
    assert not rep.passed
    assert "FAIL" in rep.summary()
