"""Wall-clock measurement schedule and phenomenological curve simulation.

A run interleaves Ramsey curves across transitions: curve 0 on the
first level in ``levels``, curve 1 on the second, and so on, cycling
until ``n_curves`` curves exist per level.  Within a curve, all
``shots_per_point`` single shots of one free-evolution time are taken
(and averaged) before moving to the next, and consecutive shots are
spaced by exactly 1/shot_rate.  Each single shot samples the charge
noise once; the sampled n_g is held frozen for that shot's free
evolution, since the charge drift of interest is far slower than the
shot rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TraceTooShortError, UsageError
from .model import LevelParams, dispersion, ramsey_population
from .noise import NoiseTrace

DEFAULT_LEVELS = ("01", "12", "23")


@dataclass(frozen=True)
class MeasurementSchedule:
    """Shot-by-shot plan of a multi-curve, multi-level Ramsey run."""

    shot_rate: float = 1000.0
    n_tr: int = 101
    shots_per_point: int = 256
    n_curves: int = 50
    tr_max: float = 15e-6
    levels: tuple = DEFAULT_LEVELS

    def __post_init__(self):
        if self.shot_rate <= 0:
            raise UsageError(f"shot_rate must be > 0, got {self.shot_rate}")
        if self.tr_max <= 0:
            raise UsageError(f"tr_max must be > 0, got {self.tr_max}")
        for name in ("n_tr", "shots_per_point", "n_curves"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be >= 1, got {getattr(self, name)}")
        if len(self.levels) < 1:
            raise UsageError("levels must name at least one transition")
        object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def shots_per_curve(self) -> int:
        return self.n_tr * self.shots_per_point

    @property
    def curve_duration(self) -> float:
        """Wall-clock seconds per curve (shot budget only, no dead time)."""
        return self.shots_per_curve / self.shot_rate

    @property
    def total_shots(self) -> int:
        return self.shots_per_curve * self.n_curves * len(self.levels)

    @property
    def tr_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tr_max, self.n_tr)

    def level_index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise UsageError(
                f"level {level!r} not in schedule levels {self.levels}"
            ) from None

    def shot_indices(self, level: str) -> np.ndarray:
        """Global shot indices, shape (n_curves, n_tr, shots_per_point).

        The k-th curve of a level starts after (n_levels*k + level_index)
        full curve durations.
        """
        li = self.level_index(level)
        spc = self.shots_per_curve
        curve_start = (np.arange(self.n_curves) * len(self.levels) + li) * spc
        within = (
            np.arange(self.n_tr)[:, None] * self.shots_per_point
            + np.arange(self.shots_per_point)[None, :]
        )
        return curve_start[:, None, None] + within[None, :, :]

    def required_samples(self, level: str, sample_rate: float) -> int:
        """Noise samples needed to cover this level's last shot."""
        last = int(self.shot_indices(level)[-1, -1, -1])
        t_last = last / self.shot_rate
        return int(np.rint(t_last * sample_rate)) + 1


@dataclass
class CurveSet:
    """A stack of Ramsey curves sharing one free-evolution grid."""

    t_r: np.ndarray
    curves: np.ndarray  # (n_curves, n_tr), populations in [0, 1]
    level: str = ""
    omega_r: float = 0.0

    def __post_init__(self):
        self.t_r = np.asarray(self.t_r, dtype=float)
        self.curves = np.atleast_2d(np.asarray(self.curves, dtype=float))
        if self.curves.shape[1] != self.t_r.size:
            raise UsageError(
                f"curves have {self.curves.shape[1]} points but grid has {self.t_r.size}"
            )

    @property
    def n_curves(self) -> int:
        return self.curves.shape[0]


def shot_times(schedule: MeasurementSchedule) -> np.ndarray:
    """Wall-clock time of every shot, (n_levels, n_curves, n_tr, shots)."""
    per_level = [
        schedule.shot_indices(level) / schedule.shot_rate
        for level in schedule.levels
    ]
    return np.stack(per_level, axis=0)


def per_shot_noise(schedule, noise: NoiseTrace, level: str) -> np.ndarray:
    """Per-shot noise samples for one level, (n_curves, n_tr, shots)."""
    idx = schedule.shot_indices(level)
    if noise.sample_rate == schedule.shot_rate:
        sample_idx = idx
    else:
        t = idx / schedule.shot_rate
        sample_idx = np.rint(t * noise.sample_rate).astype(np.int64)
    needed = int(sample_idx.max()) + 1
    if needed > noise.samples.size:
        raise TraceTooShortError(
            f"noise trace has {noise.samples.size} samples, "
            f"level {level!r} needs {needed}",
            required_samples=needed,
        )
    return noise.samples[sample_idx]


def simulate_ramsey_set(
    schedule: MeasurementSchedule,
    noise: NoiseTrace,
    a: float,
    params: LevelParams,
    level: str,
    projection_rng: np.random.Generator | None = None,
) -> CurveSet:
    """Simulate one level's Ramsey curves from a shared noise trace.

    Every shot evaluates the closed-form Ramsey population with the
    instantaneous dispersion eps_max*cos(2*pi*a*n_g(t_shot)); the
    ``shots_per_point`` shots of each free-evolution time are averaged
    into one curve point.  With ``projection_rng`` set, each shot is
    additionally drawn as a Bernoulli outcome (projective readout)
    before averaging.
    """
    n_g = a * per_shot_noise(schedule, noise, level)
    eps = dispersion(params.eps_max, n_g)
    t_r = schedule.tr_grid
    pops = ramsey_population(params, eps, t_r[None, :, None])
    if projection_rng is not None:
        pops = (projection_rng.random(size=pops.shape) < pops).astype(float)
    curves = pops.mean(axis=2)
    return CurveSet(t_r=t_r, curves=curves, level=level, omega_r=params.omega_r)


def average_curves(curve_set: CurveSet) -> np.ndarray:
    """Pointwise mean across curves (the canonical averaged trace)."""
    return curve_set.curves.mean(axis=0)
