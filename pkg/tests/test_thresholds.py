import math

import numpy as np
import pytest

from fixtures import random_atomic_unit
from unimodality.kernels import ProcessKind
from unimodality.measures import AtomicMeasure, bernoulli, point_mass, uniform
from unimodality.modality import critical_time
from unimodality.thresholds import (LEVY_CONST, HypothesisError, Theorem, ThresholdReport, cauchy_bound,
                                    classical_bound, constant_gap_probe, free_bound, levy_bound, random_atomic,
                                    theorem_bound, verification_times, verify_threshold)

B = bernoulli(1.0)


# -- bounds --------------------------------------------------------------------

def test_free_bound():
    assert free_bound(2) == 16 and free_bound(0) == 0 and free_bound(0.5) == 1


def test_classical_bound():
    assert classical_bound(1, math.e) == pytest.approx(60.953298500158034, rel=1e-14)
    assert classical_bound(1, 1) == pytest.approx(24.95329850015803, rel=1e-14)
    assert classical_bound(2, math.e ** 2) == pytest.approx(48.47664925007902, rel=1e-14)
    with pytest.raises(ValueError):
        classical_bound(1, 0.5)
    with pytest.raises(ValueError):
        classical_bound(0, 2)


def test_cauchy_bound():
    assert cauchy_bound(1) == 20 and cauchy_bound(0) == 0
    assert cauchy_bound(8) == pytest.approx(40, rel=1e-15)


def test_levy_bound():
    # 22.5 ** 0.25 * sqrt(D) evaluated in 30-digit arithmetic
    assert levy_bound(2) == pytest.approx(3.0800702882410227, rel=1e-14)
    assert levy_bound(1) == pytest.approx(2.177938587346431, rel=1e-14)
    assert levy_bound(0) == 0
    # the same number written through the proof's t^2 >= (3 sqrt 10 / 2) D
    assert levy_bound(2) ** 2 == pytest.approx(1.5 * math.sqrt(10) * 2, rel=1e-14)
    assert LEVY_CONST ** 4 == pytest.approx(22.5)


@pytest.mark.parametrize("fn", [free_bound, cauchy_bound, levy_bound])
def test_bounds_reject_negative(fn):
    with pytest.raises(ValueError):
        fn(-1.0)


@pytest.mark.parametrize("fn,grid", [(free_bound, np.linspace(0, 5, 10)), (cauchy_bound, np.linspace(0, 30, 10)),
                                     (levy_bound, np.linspace(0, 5, 10)),
                                     (lambda a: classical_bound(1.0, a), np.linspace(1, 50, 10))])
def test_bounds_monotone(fn, grid):
    vals = [fn(x) for x in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_theorem_processes():
    assert Theorem("free_4D2").process is ProcessKind.FREE_SEMICIRCLE
    assert Theorem.LEVY.process is ProcessKind.LEVY_HALF


def test_theorem_bound_inputs():
    bound, inputs = theorem_bound(B, Theorem.CLASSICAL)
    assert inputs == {"eps": 1.0, "alpha": pytest.approx(math.e, rel=1e-12)}
    assert bound == pytest.approx(60.953298500158034, rel=1e-12)
    assert theorem_bound(B, Theorem.CAUCHY) == (pytest.approx(20.0), {"beta": pytest.approx(1.0)})


# -- verification --------------------------------------------------------------

def test_verification_times():
    assert verification_times(16, 4) == [16, 24, 32, 64]
    assert verification_times(0, 2) == [1, 1.5]
    assert verification_times(1, 8)[-2:] == [32, 64]
    with pytest.raises(ValueError):
        verification_times(1, 0)


@pytest.mark.parametrize("mu,theorem,bound", [(B, Theorem.FREE, 16.0), (B, Theorem.CAUCHY, 20.0),
                                              (uniform(0, 1), Theorem.LEVY, 2.177938587346431)], ids=repr)
def test_verify_threshold_examples(mu, theorem, bound):
    rep = verify_threshold(mu, theorem, n_times=4)
    assert rep.bound == pytest.approx(bound, rel=1e-12)
    assert len(rep.verified_at) == 4
    assert all(ok for _, ok in rep.verified_at)
    assert not rep.falsified
    assert [t for t, _ in rep.verified_at] == sorted(t for t, _ in rep.verified_at)
    assert rep.as_dict()["falsified"] is False


def test_falsification_flag():
    rep = ThresholdReport(Theorem.FREE, {"D": 2.0}, 16.0, [(16.0, True), (32.0, False)])
    assert rep.falsified
    # a failure below the bound is not a falsification
    assert not ThresholdReport(Theorem.FREE, {"D": 2.0}, 16.0, [(1.0, False), (16.0, True)]).falsified


def test_point_mass_is_verified_from_one():
    rep = verify_threshold(point_mass(0.3), Theorem.FREE, n_times=2)
    assert rep.bound == 0 and [t for t, _ in rep.verified_at] == [1.0, 1.5]
    assert all(ok for _, ok in rep.verified_at)


def test_infinite_functional_is_a_hypothesis_error(monkeypatch):
    from unimodality import thresholds as th
    monkeypatch.setattr(th, "diameter", lambda mu: math.inf)
    with pytest.raises(HypothesisError):
        verify_threshold(B, Theorem.FREE)


def test_random_atomic_generator(rng):
    for _ in range(20):
        mu = random_atomic(rng)
        assert 3 <= mu.atoms.size <= 6
        assert np.all((mu.atoms >= 0) & (mu.atoms <= 1))
        assert mu.weights.sum() == pytest.approx(1.0, abs=1e-15)


# -- constant probe ------------------------------------------------------------

def test_gap_probe_bernoulli():
    probe = constant_gap_probe([B])
    assert probe.max_ratio == pytest.approx(1.0, abs=1e-3)
    assert probe.window == (2.0, 4.0)


def test_gap_probe_pair_is_scale_invariant():
    probe = constant_gap_probe([AtomicMeasure([0, 1], [0.5, 0.5])])
    assert probe.ratios[0] == pytest.approx(1.0, abs=1e-3)


def test_gap_probe_random_family():
    rng = np.random.default_rng(2024)
    family = []
    for _ in range(20):
        mu = random_atomic_unit(rng, 3, 3)
        lo, hi = mu.atoms[0], mu.atoms[-1]
        family.append(AtomicMeasure((mu.atoms - lo) / (hi - lo), mu.weights))
    probe = constant_gap_probe(family)
    assert 0 < probe.max_ratio <= 4
    assert all(0 < r <= 4 for r in probe.ratios)


def test_gap_probe_rejects_point_mass():
    with pytest.raises(HypothesisError):
        constant_gap_probe([point_mass(0)])


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_scaling_equivariance(c):
    base = critical_time(B, ProcessKind.FREE_SEMICIRCLE, (0.5, 16)).t_star
    scaled = critical_time(bernoulli(c), ProcessKind.FREE_SEMICIRCLE, (0.5 * c * c, 16 * c * c), tol=1e-3 * c * c)
    assert scaled.t_star == pytest.approx(c * c * base, rel=1e-2)
