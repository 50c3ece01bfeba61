import math

import numpy as np
import pytest

from fixtures import classical_fixtures
from unimodality.biane import DensityProfile, free_density, free_density_profile
from unimodality.kernels import ConvolvedDensity, ProcessKind, density
from unimodality.measures import (AtomicMeasure, GriddedDensityMeasure, bernoulli, point_mass, semicircle,
                                  triangle, uniform)
from unimodality import modality
from unimodality.modality import (BracketError, DegenerateProfileError, WindowTooSmallError,
                                  count_modes_derivative, count_modes_free, count_modes_profile, critical_time,
                                  level_crossings, mode_location_bound_check)
from unimodality.thresholds import classical_bound

G, C, L, F = (ProcessKind.CLASSICAL_GAUSSIAN, ProcessKind.CAUCHY, ProcessKind.LEVY_HALF,
              ProcessKind.FREE_SEMICIRCLE)
B = bernoulli(1.0)


def check_report(rep):
    assert rep.unimodal == (rep.mode_count == 1 and rep.support_components == 1)
    assert rep.mode_locations == sorted(rep.mode_locations)
    assert len(rep.mode_locations) == rep.mode_count


# -- derivative scans ----------------------------------------------------------

def test_bernoulli_gaussian_quarter():
    rep = count_modes_derivative(ConvolvedDensity(B, G, 0.25))
    check_report(rep)
    assert rep.mode_count == 2 and not rep.unimodal
    # mpmath findroot of the mixture derivative; the dense-scan oracle agrees to 1e-9
    np.testing.assert_allclose(rep.mode_locations, [-0.99932567301510824, 0.99932567301510824], atol=1e-9)


def test_dense_scan_oracle_agrees():
    import oracles
    modes = oracles.mixture_derivative_scan([-1, 1], [0.5, 0.5], 0.25, -3, 3)
    np.testing.assert_allclose(modes, [-0.99932567301510824, 0.99932567301510824], atol=1e-9)


def test_bernoulli_gaussian_four():
    rep = count_modes_derivative(ConvolvedDensity(B, G, 4.0))
    check_report(rep)
    assert rep.mode_count == 1 and rep.mode_locations[0] == pytest.approx(0.0, abs=1e-9)


def test_levy_point_mass_mode():
    rep = count_modes_derivative(ConvolvedDensity(point_mass(0), L, 1.0))
    assert rep.unimodal and rep.mode_locations[0] == pytest.approx(1 / 3, abs=1e-9)


def test_derivative_scan_preconditions():
    with pytest.raises(ValueError):
        count_modes_derivative(ConvolvedDensity(B, G, 1.0), grid_size=100)
    with pytest.raises(WindowTooSmallError):
        count_modes_derivative(ConvolvedDensity(B, G, 1.0), window=(-3.0, -0.5))


@pytest.mark.parametrize("mu,kind,t,count", [
    (B, C, 1.0, 2), (B, C, 3.0, 1), (uniform(-1, 1), G, 0.01, 1), (AtomicMeasure([0, 5], [0.9, 0.1]), C, 0.5, 2),
    (AtomicMeasure([0, 1, 4], [0.2, 0.5, 0.3]), L, 0.5, 3), (triangle(-1, 1, 2), L, 1.0, 1),
])
def test_golden_counts(mu, kind, t, count):
    rep = count_modes_derivative(ConvolvedDensity(mu, kind, t))
    check_report(rep)
    assert rep.mode_count == count


# -- free scans ----------------------------------------------------------------

@pytest.mark.parametrize("t,modes,comps", [(0.25, 2, 2), (1.0, 2, 2), (2.0, 2, 1), (3.9, 2, 1), (4.1, 1, 1), (7.0, 1, 1)])
def test_free_bernoulli(t, modes, comps):
    rep = count_modes_free(B, t)
    check_report(rep)
    assert (rep.mode_count, rep.support_components) == (modes, comps)


def test_free_mode_locations_match_closed_form():
    # v_2 peaks at u = +-sqrt(3)/2 (closed form), mode = psi_2(u)
    from unimodality.biane import psi
    rep = count_modes_free(B, 2.0)
    u = math.sqrt(3) / 2
    np.testing.assert_allclose(rep.mode_locations, [-psi(B, 2.0, u), psi(B, 2.0, u)], atol=1e-8)


# -- profiles ------------------------------------------------------------------

def test_profile_examples():
    assert count_modes_profile(free_density_profile(B, 7.0)).unimodal
    rep = count_modes_profile(free_density_profile(B, 0.25))
    assert rep.support_components == 2 and not rep.unimodal
    rep = count_modes_profile(free_density_profile(B, 2.0))
    assert rep.support_components == 1 and rep.mode_count == 2 and not rep.unimodal


def test_profile_plateau_and_errors():
    x = np.arange(7.0)
    rep = count_modes_profile(DensityProfile(x, np.array([0, 1, 2, 2, 2, 1, 0.0]), "test", 1.0))
    assert rep.mode_count == 1 and rep.mode_locations == [3.0]
    with pytest.raises(DegenerateProfileError):
        count_modes_profile(DensityProfile(x, np.zeros(7), "test", 1.0))
    with pytest.raises(ValueError):
        count_modes_profile(DensityProfile(x[::-1], np.ones(7), "test", 1.0))


def test_profile_ignores_ripples():
    x = np.linspace(-1, 1, 101)
    p = 1 - x * x
    p[60] += 1e-13 * p[60]
    assert count_modes_profile(DensityProfile(x, p, "test", 1.0)).mode_count == 1


# -- level sets ----------------------------------------------------------------

def test_level_crossings_examples():
    assert level_crossings(B, F, 4.0, math.sqrt(3) / (8 * math.pi)) == 2
    peak = math.sqrt(1.25) / (2 * math.pi)  # max of v_2 from the closed form, over pi t
    assert level_crossings(B, F, 2.0, 0.999 * peak) == 4
    assert level_crossings(point_mass(0), F, 1.0, 1 / math.pi) == 1
    assert level_crossings(point_mass(0), F, 1.0, 1.01 / math.pi) == 0


def test_level_crossings_classical():
    f = ConvolvedDensity(B, G, 0.25)
    peak = density(f, 0.99932567301510824)
    assert level_crossings(B, G, 0.25, 0.5 * peak) == 4
    assert level_crossings(B, G, 4.0, 0.05) == 2
    with pytest.raises(ValueError):
        level_crossings(B, G, 1.0, 0.0)


def _density_fn(mu, kind, t):
    if kind is F:
        return lambda x: free_density(mu, t, x)
    cd = ConvolvedDensity(mu, kind, t)
    return lambda x: density(cd, x)


LEMMA_FIXTURES = [(B, F, 2.0), (B, F, 5.0), (B, G, 0.5), (B, G, 2.0), (B, C, 1.0), (B, C, 2.0),
                  (AtomicMeasure([0, 1, 4], [0.2, 0.5, 0.3]), L, 0.5), (uniform(-1, 1), F, 0.3),
                  (AtomicMeasure([-1, 0.5, 2], [0.3, 0.3, 0.4]), F, 0.8)]


@pytest.mark.parametrize("mu,kind,t", LEMMA_FIXTURES, ids=repr)
def test_level_set_criterion(mu, kind, t):
    rep = modality.classify(mu, kind, t)
    f = _density_fn(mu, kind, t)
    heights = np.atleast_1d(f(np.array(rep.mode_locations)))
    if rep.unimodal:
        levels = np.linspace(0.05, 0.95, 10) * heights.max()
        assert all(level_crossings(mu, kind, t, a) <= 2 for a in levels)
    else:
        # levels between the lowest valley and the lower of its neighbouring peaks
        i = int(np.argmin(heights))
        j = i + 1 if i + 1 < len(heights) else i - 1
        lo, hi = sorted((rep.mode_locations[i], rep.mode_locations[j]))
        valley = float(np.min(f(np.linspace(lo, hi, 401)))) if rep.support_components == 1 else 0.0
        levels = valley + np.linspace(0.05, 0.95, 10) * (heights[i] - valley)
        assert max(level_crossings(mu, kind, t, a) for a in levels) >= 3


# -- critical times ------------------------------------------------------------

@pytest.mark.parametrize("kind,bracket,expected", [(F, (0.5, 16), 4.0), (G, (0.1, 4), 1.0),
                                                   (C, (0.5, 4), math.sqrt(3))])
def test_critical_time_bernoulli(kind, bracket, expected):
    res = critical_time(B, kind, bracket, tol=1e-3)
    lo, hi = res.bracket
    assert lo < res.t_star <= hi and hi - lo <= 1e-3
    assert abs(res.t_star - expected) <= 1e-3
    assert res.monotone_verified
    assert len(res.scan_grid) == 32


def test_critical_time_bracket_errors():
    with pytest.raises(BracketError):
        critical_time(B, G, (2.0, 4.0))
    with pytest.raises(BracketError):
        critical_time(B, G, (0.1, 0.5))


def test_critical_time_non_monotone(monkeypatch):
    # a predicate that is true on [1, 2) and on [3, inf): the last transition (t = 3) is bracketed
    monkeypatch.setattr(modality, "is_unimodal", lambda mu, kind, t, **kw: 1 <= t < 2 or t >= 3)
    res = critical_time(B, G, (0.5, 8.0), tol=1e-4)
    assert not res.monotone_verified and res.warnings
    assert res.t_star == pytest.approx(3.0, abs=1e-4)


# -- mode location -------------------------------------------------------------

def test_mode_location_bound_examples():
    eps, alpha = 1.0, math.e
    assert mode_location_bound_check(B, classical_bound(eps, alpha))
    assert mode_location_bound_check(point_mass(0), 1.0)
    mu = AtomicMeasure([-0.5, 0.5, 0.6], [0.4, 0.3, 0.3])
    from unimodality.measures import gaussian_tail_functional
    t = classical_bound(1.0, gaussian_tail_functional(mu, 1.0))
    assert mode_location_bound_check(mu, t)


def test_mode_location_bound_false_when_far():
    assert not mode_location_bound_check(point_mass(3.0), 1.0)
    assert not mode_location_bound_check(B, 0.25)


# -- invariants ----------------------------------------------------------------

@pytest.mark.parametrize("mu,kind,t", classical_fixtures(30, seed=5), ids=lambda v: repr(v)[:40])
def test_derivative_and_profile_agree(mu, kind, t):
    cd = ConvolvedDensity(mu, kind, t)
    rep = count_modes_derivative(cd)
    x = modality.scan_grid(cd, grid_size=8192)
    x = np.unique(np.concatenate([x, rep.mode_locations]))
    prof = DensityProfile(x, density(cd, x), kind.value, t)
    assert count_modes_profile(prof).mode_count == rep.mode_count


SYMMETRIC_UNIMODAL = [uniform(-1, 1), triangle(-1, 0, 1), semicircle(1.0),
                      GriddedDensityMeasure([-2, -1, 0, 1, 2], [0.1, 0.3, 1.0, 0.3, 0.1])]


@pytest.mark.parametrize("mu", SYMMETRIC_UNIMODAL, ids=repr)
def test_symmetric_unimodal_preserved(mu):
    for t in np.geomspace(0.01, 100, 20):
        rep = count_modes_free(mu, t)
        assert rep.unimodal, t
        assert rep.mode_locations[0] == pytest.approx(0.0, abs=1e-6)


def test_symmetric_three_atoms_is_outside_the_hypothesis():
    # a purely atomic law is not unimodal itself; at small t the free law has three pieces
    mu = AtomicMeasure([-1, 0, 1], [0.2, 0.6, 0.2])
    assert count_modes_free(mu, 0.01).support_components == 3
    assert count_modes_free(mu, 10.0).unimodal


GOLDEN = [(B, G, 0.25), (B, G, 0.9), (B, C, 1.5), (B, L, 0.5), (AtomicMeasure([0, 1, 4], [0.2, 0.5, 0.3]), L, 0.5),
          (uniform(-1, 1), C, 0.2), (triangle(-2, 0, 3), G, 0.3)]


@pytest.mark.parametrize("mu,kind,t", GOLDEN, ids=repr)
def test_refinement_stability_classical(mu, kind, t):
    cd = ConvolvedDensity(mu, kind, t)
    assert count_modes_derivative(cd, grid_size=4096).mode_count == count_modes_derivative(cd, grid_size=8192).mode_count


@pytest.mark.parametrize("mu,t", [(B, 0.5), (B, 2.0), (B, 3.9), (B, 4.1), (uniform(-1, 1), 0.1),
                                  (AtomicMeasure([-1, 0.5, 2], [0.3, 0.3, 0.4]), 0.8)], ids=repr)
def test_refinement_stability_free(mu, t):
    assert count_modes_free(mu, t, 2048).mode_count == count_modes_free(mu, t, 4096).mode_count
