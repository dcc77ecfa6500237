import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unruhqfi import unruh
from unruhqfi.estimation import (
    EstimationError,
    EstimationRun,
    classical_fisher,
    golden_section_max,
    optimal_povm,
    outcome_probabilities,
    simulate_crb,
    trial_generator,
)
from unruhqfi.qfi import qfi_spectral


def small_run(**kw):
    base = dict(field=unruh.DIRAC, theta=math.pi / 4, phi=0.0, r=math.pi / 6, target="phi",
                samples=2000, trials=50, seed=7)
    base.update(kw)
    return EstimationRun(**base)


def test_golden_section():
    assert golden_section_max(lambda x: -(x - 0.3) ** 2, -1.0, 2.0) == pytest.approx(0.3, abs=1e-8)
    assert golden_section_max(lambda x: x, 0.0, 1.0) == pytest.approx(1.0, abs=1e-8)


def test_classical_fisher_skips_empty_outcomes():
    assert classical_fisher([0.5, 0.5, 0.0], [1.0, -1.0, 0.0]) == pytest.approx(4.0)


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(0.05, math.pi / 2 - 0.05), phi=st.floats(0, 2 * math.pi),
       r=st.floats(0, math.pi / 4 - 0.01), param=st.sampled_from(unruh.PARAMS))
def test_povm_is_complete_and_optimal(theta, phi, r, param):
    rho, d = unruh.channel_pair(unruh.DIRAC, theta, phi, r, param)
    proj = optimal_povm(rho, d)
    assert np.allclose(sum(proj), np.eye(4), atol=1e-12)
    for e in proj:
        assert np.allclose(e @ e, e, atol=1e-12)
    cfi = classical_fisher(outcome_probabilities(proj, rho), outcome_probabilities(proj, d))
    assert cfi == pytest.approx(qfi_spectral(rho, d), abs=1e-8)


def test_povm_merges_degenerate_eigenvalues():
    rho, d = unruh.channel_pair(unruh.DIRAC, math.pi / 4, 0.0, math.pi / 6, "phi")
    proj = optimal_povm(rho, d)
    # SLD for a phase has eigenvalues +x, -x and a doubly degenerate 0
    assert len(proj) == 3
    assert sorted(round(np.trace(e).real) for e in proj) == [1, 1, 2]


def test_scalar_povm_saturates():
    rho, d = unruh.channel_pair(unruh.SCALAR, 0.9, 0.3, 0.6, "theta")
    dense = rho.dense()
    proj = optimal_povm(rho, d)
    cfi = classical_fisher(outcome_probabilities(proj, dense), outcome_probabilities(proj, d))
    assert cfi == pytest.approx(qfi_spectral(rho, d), abs=1e-8)


def test_trial_streams_are_counter_based():
    a = trial_generator(11, 3).random(4)
    b = trial_generator(11, 3).random(4)
    c = trial_generator(11, 4).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_reproducible_and_prefix_stable():
    r1 = simulate_crb(small_run())
    r2 = simulate_crb(small_run())
    assert np.array_equal(r1.estimates, r2.estimates)
    longer = simulate_crb(small_run(trials=60))
    assert np.array_equal(longer.estimates[:50], r1.estimates)
    other = simulate_crb(small_run(seed=8))
    assert not np.array_equal(other.estimates, r1.estimates)
    assert r1.seed == 7


@pytest.mark.parametrize("target", unruh.PARAMS)
def test_dirac_crb_ratio_near_one(target):
    rep = simulate_crb(small_run(target=target, samples=5000, trials=80))
    assert 0.6 <= rep.crb_ratio <= 1.5
    assert abs(rep.mean - rep.true_value) < 5 * math.sqrt(rep.variance)


def test_inertial_point():
    rep = simulate_crb(small_run(r=0.0, samples=5000, trials=80))
    assert rep.qfi == pytest.approx(1.0)
    assert 0.6 <= rep.crb_ratio <= 1.5


def test_scalar_run():
    rep = simulate_crb(small_run(field=unruh.SCALAR, r=0.4, theta=0.9, target="theta", trials=50))
    assert rep.qfi == pytest.approx(4.0, abs=1e-9)
    assert 0.6 <= rep.crb_ratio <= 1.5


def test_validation():
    with pytest.raises(ValueError):
        small_run(samples=10)
    with pytest.raises(ValueError):
        small_run(trials=5)
    with pytest.raises(ValueError):
        small_run(seed=-1)
    with pytest.raises(ValueError):
        small_run(r=1.0)
    with pytest.raises(ValueError):
        small_run(target="r")


def test_no_information_raises():
    with pytest.raises(EstimationError):
        simulate_crb(small_run(theta=0.0))
