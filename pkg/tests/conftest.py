"""Shared fixtures: the synthetic 2-3-level reference dataset.

The dataset mirrors the measured device: alpha=2 charge noise with a
1 Hz amplitude of 2.7e-5 e^2/Hz driving the 2-3 transition
(eps_max = 1.3 MHz) probed at a 750 kHz Ramsey detuning with
T2* = 4.3 us, 50 curves of 101 points and 256 shots per point.
"""

import numpy as np
import pytest

import ramsey_beats as rb

LEVEL23 = rb.LevelParams(f_bar=3.6287e9, eps_max=1.3e6, t2_star=4.3e-6, omega_r=750e3)
LEVEL12 = rb.LevelParams(f_bar=3.8830e9, eps_max=62e3, t2_star=14.5e-6, omega_r=500e3)

FIXTURE_AMPLITUDE = 2.7e-5  # e^2/Hz at 1 Hz
FIXTURE_SEED = 2024


def make_23_schedule(shots_per_point=256, tr_max=15e-6):
    return rb.MeasurementSchedule(
        levels=("23",),
        n_curves=50,
        n_tr=101,
        shots_per_point=shots_per_point,
        tr_max=tr_max,
    )


def simulate_23_set(seed, schedule=None):
    """One realization of the reference dataset; returns (set, a, c2)."""
    schedule = schedule or make_23_schedule()
    n = schedule.required_samples("23", schedule.shot_rate)
    c2 = rb.compute_c_alpha(2.0, n, schedule.shot_rate, 20)
    a = rb.amplitude_to_scaling(FIXTURE_AMPLITUDE, c2)
    trace = rb.generate_colored_noise(
        rb.NoiseSpec(2.0, n, schedule.shot_rate, seed=seed)
    )
    return rb.simulate_ramsey_set(schedule, trace, a, LEVEL23, "23"), a, c2


@pytest.fixture(scope="session")
def reference_23():
    schedule = make_23_schedule()
    curve_set, a, c2 = simulate_23_set(FIXTURE_SEED, schedule)
    return {"schedule": schedule, "curves": curve_set, "a": a, "c2": c2}
