"""1/f^alpha charge-noise synthesis and spectral estimation.

Traces model the offset charge n_g(t) across a Josephson junction in
units of 2e.  They are generated in the frequency domain (Timmer &
Koenig, Astron. Astrophys. 300, 707 (1995)), normalized to zero mean
and unit variance, and later multiplied by a dimensionless scaling
amplitude ``a``.  The 1 Hz spectral amplitude of the scaled trace is
A = c_alpha * a**2, with ``c_alpha`` the 1 Hz power density of the
unit-variance ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from .errors import (
    FrequencyRangeError,
    InsufficientDataError,
    NoiseSpecError,
)


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of one synthesized noise trace.

    alpha : spectral exponent of S(f) ~ 1/f**alpha (>= 0)
    n_samples : trace length (>= 2)
    sample_rate : Hz
    seed : RNG seed; identical specs give bit-identical traces
    """

    alpha: float
    n_samples: int
    sample_rate: float
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise NoiseSpecError(f"alpha must be >= 0, got {self.alpha}")
        if self.n_samples < 2:
            raise NoiseSpecError(f"n_samples must be >= 2, got {self.n_samples}")
        if self.sample_rate <= 0:
            raise NoiseSpecError(f"sample_rate must be > 0, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class NoiseTrace:
    """Zero-mean, unit-variance offset-charge timeseries (units of 2e)."""

    samples: np.ndarray
    sample_rate: float

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density estimate.

    ``power`` integrates to the signal variance (sum(power) * df).
    ``method`` is "periodogram" or "segment-averaged".
    """

    frequencies: np.ndarray
    power: np.ndarray
    method: str = "periodogram"


def generate_colored_noise(spec: NoiseSpec) -> NoiseTrace:
    """Synthesize a 1/f^alpha trace in the frequency domain.

    Each positive-frequency Fourier coefficient is an independent
    complex Gaussian with standard deviation proportional to
    f**(-alpha/2); the DC bin is zeroed (zero mean by construction)
    and the Nyquist bin of even-length traces is drawn real.  The
    inverse transform is rescaled to exactly zero mean and unit
    variance, so the absolute spectral level is set separately via
    ``compute_c_alpha``/``scale_amplitude``.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_samples
    freqs = np.fft.rfftfreq(n, d=1.0 / spec.sample_rate)

    scale = np.zeros_like(freqs)
    scale[1:] = freqs[1:] ** (-spec.alpha / 2.0)

    re = rng.standard_normal(freqs.size)
    im = rng.standard_normal(freqs.size)
    im[0] = 0.0
    if n % 2 == 0:
        im[-1] = 0.0  # Nyquist coefficient of a real signal is real
    spectrum = (re + 1j * im) * scale

    x = np.fft.irfft(spectrum, n=n)
    x -= x.mean()
    x /= x.std()
    return NoiseTrace(samples=x, sample_rate=spec.sample_rate)


def periodogram(trace: NoiseTrace) -> PsdEstimate:
    """One-sided periodogram with Parseval-consistent normalization."""
    if trace.samples.size == 0:
        raise InsufficientDataError("empty trace")
    f, pxx = signal.periodogram(
        trace.samples,
        fs=trace.sample_rate,
        window="boxcar",
        detrend=False,
    )
    return PsdEstimate(frequencies=f, power=pxx, method="periodogram")


def segment_averaged_psd(trace: NoiseTrace, n_segments: int = 8) -> PsdEstimate:
    """Welch estimate from ``n_segments`` non-overlapping boxcar segments."""
    if trace.samples.size == 0:
        raise InsufficientDataError("empty trace")
    nperseg = trace.samples.size // n_segments
    if nperseg < 2:
        raise InsufficientDataError(
            f"{trace.samples.size} samples cannot form {n_segments} segments"
        )
    f, pxx = signal.welch(
        trace.samples,
        fs=trace.sample_rate,
        window="boxcar",
        nperseg=nperseg,
        noverlap=0,
        detrend=False,
    )
    return PsdEstimate(frequencies=f, power=pxx, method="segment-averaged")


def interpolate_power(psd: PsdEstimate, f0: float) -> float:
    """PSD value at ``f0``, log-log interpolated between bins."""
    return _interp_power_at(psd.frequencies, psd.power, f0)


def _interp_power_at(psd_freqs, psd_power, f0):
    """Log-log interpolate a PSD at frequency ``f0`` between its bins."""
    mask = psd_freqs > 0
    f = psd_freqs[mask]
    p = psd_power[mask]
    if f0 < f[0] or f0 > f[-1]:
        raise FrequencyRangeError(
            f"{f0} Hz outside resolvable band [{f[0]:.3g}, {f[-1]:.3g}] Hz"
        )
    k = int(np.searchsorted(f, f0))
    if f[k] == f0:
        return float(p[k])
    lo, hi = k - 1, k
    w = (np.log(f0) - np.log(f[lo])) / (np.log(f[hi]) - np.log(f[lo]))
    return float(np.exp((1 - w) * np.log(p[lo]) + w * np.log(p[hi])))


@lru_cache(maxsize=128)
def compute_c_alpha(
    alpha: float,
    n: int,
    sample_rate: float,
    n_seeds: int = 20,
    base_seed: int = 0,
) -> float:
    """1 Hz power density of the unit-variance ensemble, in 1/Hz.

    Averages the periodograms of ``n_seeds`` traces (seeds
    ``base_seed .. base_seed + n_seeds - 1``) and log-interpolates the
    averaged spectrum at 1 Hz.  For alpha > 0 the value depends on the
    trace length (the infrared cutoff is 1/duration), so call it with
    the same ``n`` and ``sample_rate`` as the traces being scaled.
    """
    if n_seeds < 1:
        raise NoiseSpecError(f"n_seeds must be >= 1, got {n_seeds}")
    if n / sample_rate < 1.0 or sample_rate / 2.0 < 1.0:
        raise FrequencyRangeError(
            "1 Hz unresolvable: trace must be at least 1 s long with Nyquist >= 1 Hz"
        )
    accum = None
    freqs = None
    for i in range(n_seeds):
        spec = NoiseSpec(alpha=alpha, n_samples=n, sample_rate=sample_rate,
                         seed=base_seed + i)
        est = periodogram(generate_colored_noise(spec))
        if accum is None:
            accum = est.power.copy()
            freqs = est.frequencies
        else:
            accum += est.power
    accum /= n_seeds
    return _interp_power_at(freqs, accum, 1.0)


def scale_amplitude(a: float, c_alpha: float) -> float:
    """Physical 1 Hz amplitude A = c_alpha * a**2, in e^2/Hz."""
    if a <= 0:
        raise NoiseSpecError(f"scaling amplitude must be > 0, got {a}")
    return c_alpha * a * a


def amplitude_to_scaling(amplitude: float, c_alpha: float) -> float:
    """Inverse of ``scale_amplitude``: a = sqrt(A / c_alpha)."""
    if amplitude <= 0:
        raise NoiseSpecError(f"amplitude must be > 0, got {amplitude}")
    return float(np.sqrt(amplitude / c_alpha))


def fit_psd_slope(psd: PsdEstimate, f_min: float, f_max: float) -> float:
    """Spectral exponent from a log-log straight-line fit.

    Returns the negated least-squares slope of log(power) versus
    log(frequency) over ``f_min <= f <= f_max``; at least 8 bins with
    positive power must fall in the band.
    """
    mask = (psd.frequencies >= f_min) & (psd.frequencies <= f_max)
    mask &= (psd.frequencies > 0) & (psd.power > 0)
    if int(mask.sum()) < 8:
        raise InsufficientDataError(
            f"only {int(mask.sum())} usable bins in [{f_min}, {f_max}] Hz, need >= 8"
        )
    slope, _ = np.polyfit(np.log(psd.frequencies[mask]), np.log(psd.power[mask]), 1)
    return float(-slope)
