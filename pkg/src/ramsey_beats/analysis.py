"""Curve-set analysis: envelopes, T2* fits, and noise-PSD inference.

Two dephasing-time estimates are produced.  The canonical one fits a
decaying sinusoid to the average of many curves and is biased short
whenever slow charge noise makes the curves beat against each other.
The corrected one fits a bare exponential to the width of the
overlay envelope, which excludes the interference factor and tracks
the true decay.

The grid search inverts the observed beat structure: it simulates
curve sets over a grid of noise exponents and scaling amplitudes and
scores each cell with the log of an equal-weighted sum of three
mean-squared metrics (sorted per-curve FFT magnitudes, overlay
envelopes, curve averages).
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize

from .errors import (
    FitFailureError,
    GridMismatchError,
    InsufficientCurvesError,
    InsufficientDataError,
    UsageError,
)
from .model import LevelParams
from .noise import NoiseSpec, compute_c_alpha, generate_colored_noise
from .schedule import CurveSet, MeasurementSchedule, average_curves, simulate_ramsey_set

# Stand-in for log10(0) when two curve sets agree exactly.
LOG_ERROR_FLOOR = float(np.finfo(float).min)


@dataclass
class Envelope:
    """Upper/lower bounds of a curve overlay on its t_R grid."""

    t_r: np.ndarray
    upper: np.ndarray
    lower: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass
class FitResult:
    """Parameters of a decay fit; frequency/phase only for the
    decaying-sinusoid (canonical) form."""

    t2: float
    amplitude: float
    offset: float = 0.0
    frequency: float | None = None
    phase: float | None = None
    residual_rms: float = 0.0
    at_bound: bool = False


@dataclass
class GridSearchResult:
    """(alpha, a) error surface with its argmin and level-set widths."""

    alpha_grid: np.ndarray
    a_grid: np.ndarray
    log_error: np.ndarray  # (n_alpha, n_a)
    c_alpha: np.ndarray  # 1 Hz density of the unit-variance ensemble per alpha
    best_alpha: float
    best_a: float
    best_amplitude: float  # A* = c_alpha * a*^2, e^2/Hz
    alpha_halfwidth: float
    a_halfwidth_decades: float
    failures: list = field(default_factory=list)


def _default_window(curve_set: CurveSet) -> int:
    """Odd window covering one detuning period of the t_R grid."""
    if curve_set.omega_r <= 0 or curve_set.t_r.size < 2:
        return 1
    dt = curve_set.t_r[1] - curve_set.t_r[0]
    w = int(np.ceil(1.0 / (curve_set.omega_r * dt)))
    return max(1, w | 1)


def extract_envelope(curve_set: CurveSet, smooth_window: int | None = None) -> Envelope:
    """Pointwise max/min across curves, peak-held along t_R.

    ``smooth_window`` is a centered moving-maximum (minimum) width in
    grid points; it bridges the zeros of the detuning oscillation so
    the envelope width tracks the decay only.  Defaults to one
    detuning period; 1 disables smoothing.
    """
    if curve_set.n_curves < 2:
        raise InsufficientCurvesError("envelope extraction needs >= 2 curves")
    if smooth_window is None:
        smooth_window = _default_window(curve_set)
    upper = curve_set.curves.max(axis=0)
    lower = curve_set.curves.min(axis=0)
    if smooth_window > 1:
        upper = ndimage.maximum_filter1d(upper, size=smooth_window, mode="nearest")
        lower = ndimage.minimum_filter1d(lower, size=smooth_window, mode="nearest")
    return Envelope(t_r=curve_set.t_r, upper=upper, lower=lower)


def fit_envelope_t2(env: Envelope, noise_floor: float = 0.02) -> FitResult:
    """Corrected T2*: exponential fit to the envelope width.

    Points with width below ``noise_floor`` (the fully decayed tail)
    are excluded; at least 8 must remain.
    """
    width = env.width
    mask = width > noise_floor
    if int(mask.sum()) < 8:
        raise InsufficientDataError(
            f"only {int(mask.sum())} envelope points above {noise_floor}, need >= 8"
        )
    t = env.t_r[mask]
    y = width[mask]
    span = float(env.t_r[-1] - env.t_r[0]) or 1.0

    slope, intercept = np.polyfit(t, np.log(y), 1)
    t2_0 = -1.0 / slope if slope < 0 else span
    p0 = (float(np.exp(intercept)), float(np.clip(t2_0, span * 1e-3, span * 10)))

    def expdecay(tt, amp, t2):
        return amp * np.exp(-tt / t2)

    try:
        popt, _ = optimize.curve_fit(expdecay, t, y, p0=p0, maxfev=10000)
    except RuntimeError as exc:
        raise FitFailureError(f"envelope fit did not converge: {exc}") from exc
    amp, t2 = float(popt[0]), float(popt[1])
    if t2 <= 0 or t2 > 100.0 * span:
        raise FitFailureError(f"envelope not decaying: fitted T2*={t2:g} s")
    resid = y - expdecay(t, *popt)
    return FitResult(
        t2=t2, amplitude=amp, residual_rms=float(np.sqrt(np.mean(resid**2)))
    )


def curve_ffts(curve_set: CurveSet):
    """Magnitude spectra of the mean-subtracted curves along t_R.

    Returns (frequencies in Hz, magnitudes of shape (n_curves, n_f)).
    """
    t = curve_set.t_r
    if t.size > 1:
        steps = np.diff(t)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise GridMismatchError("curve FFTs need a uniform t_R grid")
        dt = float(steps[0])
    else:
        dt = 1.0
    demeaned = curve_set.curves - curve_set.curves.mean(axis=1, keepdims=True)
    mags = np.abs(np.fft.rfft(demeaned, axis=1))
    freqs = np.fft.rfftfreq(t.size, d=dt)
    return freqs, mags


def fit_canonical_t2(t_r, curve, omega_r_hint: float | None = None) -> FitResult:
    """Canonical T2~*: decaying sinusoid fit to an averaged curve.

    y = c + A*exp(-t/T2)*cos(2*pi*f*t + phi), initialized from the FFT
    peak (and the hint frequency, if given); several starting phases
    are tried and the best residual kept.  A fitted T2 pinned at the
    upper bound (no measurable decay) is flagged via ``at_bound``.
    """
    t = np.asarray(t_r, dtype=float)
    y = np.asarray(curve, dtype=float)
    if t.size < 16:
        raise InsufficientDataError(f"need >= 16 points, got {t.size}")
    span = float(t[-1] - t[0])
    dt = float(np.mean(np.diff(t)))

    demeaned = y - y.mean()
    mags = np.abs(np.fft.rfft(demeaned))
    freqs = np.fft.rfftfreq(t.size, d=dt)
    f_fft = float(freqs[1 + int(np.argmax(mags[1:]))]) if mags.size > 1 else 0.0

    c0 = float(y.mean())
    a0 = float(0.5 * (y.max() - y.min())) or 0.5
    t2_hi = 100.0 * span
    bounds = (
        [-np.inf, 0.0, span * 1e-4, 0.0, -2.0 * np.pi],
        [np.inf, np.inf, t2_hi, 0.75 / dt, 2.0 * np.pi],
    )

    def model(tt, c, a, t2, f, phi):
        return c + a * np.exp(-tt / t2) * np.cos(2.0 * np.pi * f * tt + phi)

    f_starts = [f_fft] if omega_r_hint is None else [f_fft, float(omega_r_hint)]
    best = None
    last_err = None
    for f0 in f_starts:
        for phi0 in (0.0, 0.5 * np.pi, np.pi, -0.5 * np.pi):
            p0 = (c0, a0, span / 3.0, min(f0, bounds[1][3] * 0.99), phi0)
            try:
                popt, _ = optimize.curve_fit(
                    model, t, y, p0=p0, bounds=bounds, maxfev=20000
                )
            except RuntimeError as exc:
                last_err = exc
                continue
            resid = float(np.sqrt(np.mean((y - model(t, *popt)) ** 2)))
            if best is None or resid < best[1]:
                best = (popt, resid)
    if best is None:
        raise FitFailureError(
            f"decaying-sinusoid fit did not converge "
            f"(tried {len(f_starts) * 4} starts, last error: {last_err})"
        )
    popt, resid = best
    c, a, t2, f, phi = (float(v) for v in popt)
    return FitResult(
        t2=t2,
        amplitude=a,
        offset=c,
        frequency=f,
        phase=phi,
        residual_rms=resid,
        at_bound=bool(t2 >= 0.99 * t2_hi),
    )


def _check_compatible(x: CurveSet, y: CurveSet):
    if x.t_r.size != y.t_r.size or not np.allclose(x.t_r, y.t_r, rtol=1e-9, atol=0.0):
        raise GridMismatchError("curve sets have different t_R grids")
    if x.n_curves != y.n_curves:
        raise GridMismatchError(
            f"curve counts differ: {x.n_curves} vs {y.n_curves}"
        )


def fit_error(experimental: CurveSet, simulated: CurveSet) -> float:
    """log10 of the equal-weighted sum of the three comparison metrics.

    Per-curve FFT magnitudes are sorted per frequency bin across
    curves before differencing (individual realizations cannot be
    paired one-to-one); each mean-squared term is normalized by its
    element count.  Exact agreement returns ``LOG_ERROR_FLOOR``.
    """
    _check_compatible(experimental, simulated)
    _, mx = curve_ffts(experimental)
    _, my = curve_ffts(simulated)
    fft_term = float(np.mean((np.sort(mx, axis=0) - np.sort(my, axis=0)) ** 2))

    ex = extract_envelope(experimental, smooth_window=1)
    ey = extract_envelope(simulated, smooth_window=1)
    env_x = np.concatenate([ex.upper, ex.lower])
    env_y = np.concatenate([ey.upper, ey.lower])
    env_term = float(np.mean((env_x - env_y) ** 2))

    avg_term = float(np.mean((average_curves(experimental) - average_curves(simulated)) ** 2))

    total = fft_term + env_term + avg_term
    if total <= 0.0:
        return LOG_ERROR_FLOOR
    return float(np.log10(total))


def _cell_error(
    experimental, schedule, params, level, alpha, a, seeds, cell_index, n_samples
):
    """Mean linear metric over the seed list for one grid cell."""
    totals = []
    for seed in seeds:
        spec = NoiseSpec(
            alpha=alpha,
            n_samples=n_samples,
            sample_rate=schedule.shot_rate,
            seed=int(seed) ^ cell_index,
        )
        trace = generate_colored_noise(spec)
        sim = simulate_ramsey_set(schedule, trace, a, params, level)
        log_err = fit_error(experimental, sim)
        totals.append(0.0 if log_err == LOG_ERROR_FLOOR else 10.0**log_err)
    mean_total = float(np.mean(totals))
    return LOG_ERROR_FLOOR if mean_total <= 0 else float(np.log10(mean_total))


def grid_search(
    experimental: CurveSet,
    alpha_grid,
    a_grid,
    schedule: MeasurementSchedule,
    params: LevelParams,
    seeds=(0,),
    level: str | None = None,
    n_seeds_c_alpha: int = 20,
    uncertainty_level: float = 0.05,
    threads: int = 1,
) -> GridSearchResult:
    """Locate the (alpha, a) cell whose simulations best match the data.

    Every cell generates its own noise (per-cell seed = seed XOR cell
    index), simulates a full curve set and scores it with
    ``fit_error``; failed cells are recorded and skipped.  The best
    amplitude is converted to physical units via A* = c_alpha * a*^2
    with c_alpha computed at the same trace length and rate as the
    simulations.  Uncertainty half-widths come from the level set
    ``log_error <= min + uncertainty_level``.
    """
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    a_grid = np.asarray(a_grid, dtype=float)
    if alpha_grid.size == 0 or a_grid.size == 0:
        raise UsageError("alpha and a grids must be non-empty")
    if not seeds:
        raise UsageError("need at least one seed")
    level = level or experimental.level or schedule.levels[0]
    n_samples = schedule.required_samples(level, schedule.shot_rate)

    surface = np.full((alpha_grid.size, a_grid.size), np.nan)
    failures = []

    def run_cell(ij):
        i, j = ij
        cell_index = i * a_grid.size + j
        try:
            value = _cell_error(
                experimental, schedule, params, level,
                float(alpha_grid[i]), float(a_grid[j]), seeds, cell_index, n_samples,
            )
            return value, None
        except Exception as exc:  # record, keep sweeping
            return np.nan, str(exc)

    cells = [(i, j) for i in range(alpha_grid.size) for j in range(a_grid.size)]
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(ij) for ij in cells]
    for (i, j), (value, err) in zip(cells, results):
        surface[i, j] = value
        if err is not None:
            failures.append((i, j, err))

    if np.all(np.isnan(surface)):
        raise FitFailureError("every grid cell failed; see failures")
    best_flat = int(np.nanargmin(surface))
    bi, bj = np.unravel_index(best_flat, surface.shape)
    best_alpha = float(alpha_grid[bi])
    best_a = float(a_grid[bj])

    c_alphas = np.array([
        compute_c_alpha(float(al), n_samples, schedule.shot_rate, n_seeds_c_alpha)
        for al in alpha_grid
    ])
    best_amplitude = float(c_alphas[bi] * best_a**2)

    level_mask = surface <= (surface[bi, bj] + uncertainty_level)
    alphas_in = alpha_grid[np.any(level_mask, axis=1)]
    as_in = a_grid[np.any(level_mask, axis=0)]
    alpha_hw = float(0.5 * (alphas_in.max() - alphas_in.min()))
    a_hw = float(0.5 * (np.log10(as_in.max()) - np.log10(as_in.min())))

    return GridSearchResult(
        alpha_grid=alpha_grid,
        a_grid=a_grid,
        log_error=surface,
        c_alpha=c_alphas,
        best_alpha=best_alpha,
        best_a=best_a,
        best_amplitude=best_amplitude,
        alpha_halfwidth=alpha_hw,
        a_halfwidth_decades=a_hw,
        failures=failures,
    )
