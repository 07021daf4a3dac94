"""Closed-form parity-band and Ramsey population model.

Frequencies are ordinary frequencies in Hz throughout; the 2*pi lives
inside the trig calls.  Offset charge n_g is in units of 2e, so the
dispersion is periodic in n_g with period 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import UsageError


class Parity(IntEnum):
    """Quasiparticle charge-parity state; a flip mirrors the dispersion."""

    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class LevelParams:
    """Physics of one transition (j, j+1).

    f_bar : mean transition frequency, Hz
    eps_max : maximum charge dispersion, Hz
    t2_star : Ramsey decay constant, s (np.inf allowed)
    omega_r : Ramsey detuning of the drive from f_bar, Hz
    """

    f_bar: float
    eps_max: float
    t2_star: float
    omega_r: float

    def __post_init__(self):
        if self.eps_max < 0:
            raise UsageError(f"eps_max must be >= 0, got {self.eps_max}")
        if not self.t2_star > 0:
            raise UsageError(f"t2_star must be > 0, got {self.t2_star}")


def dispersion(eps_max, n_g):
    """Instantaneous dispersion eps_max * cos(2*pi*n_g), Hz."""
    return eps_max * np.cos(2.0 * np.pi * np.asarray(n_g, dtype=float))


def qubit_frequency(f_bar, eps_max, n_g, parity):
    """Transition frequency f_bar + eps_max*cos(2*pi*n_g + p*pi), Hz.

    Odd parity mirrors the dispersion term about the mean frequency.
    """
    phase = 2.0 * np.pi * np.asarray(n_g, dtype=float) + int(parity) * np.pi
    return f_bar + eps_max * np.cos(phase)


def parity_band_population(omega_r, eps, t_r):
    """Equal-weight average of the two charge-parity bands.

    0.5*[cos(2*pi*(omega_r + eps)*t_r) + cos(2*pi*(omega_r - eps)*t_r)],
    in [-1, 1]; equals cos(2*pi*omega_r*t_r)*cos(2*pi*eps*t_r).
    """
    t = np.asarray(t_r, dtype=float)
    return 0.5 * (
        np.cos(2.0 * np.pi * (omega_r + eps) * t)
        + np.cos(2.0 * np.pi * (omega_r - eps) * t)
    )


def ramsey_population(params: LevelParams, eps, t_r):
    """Excited-state probability of a detuned Ramsey measurement.

    0.5*[1 + exp(-t_r/T2*) * cos(2*pi*omega_r*t_r) * cos(2*pi*eps*t_r)].
    The cos(eps*t_r) factor carries the slow charge-noise dependence;
    averaging it over realizations is what produces beat patterns and
    the apparent shortening of T2*.
    """
    t = np.asarray(t_r, dtype=float)
    envelope = np.exp(-t / params.t2_star)
    return 0.5 * (
        1.0
        + envelope
        * np.cos(2.0 * np.pi * params.omega_r * t)
        * np.cos(2.0 * np.pi * np.asarray(eps, dtype=float) * t)
    )
