"""Multi-level Ramsey beat simulation and charge-noise spectroscopy.

Simulates Ramsey curve sets on the higher levels of a transmon under
1/f^alpha charge noise and parity flips, extracts corrected dephasing
times from overlay envelopes, and infers the noise PSD (exponent and
1 Hz amplitude) from the beat structure.  A 4-level Lindblad solver
provides an independent cross-check of the closed-form model.
"""

__version__ = "0.1.0"

from .analysis import (
    Envelope,
    FitResult,
    GridSearchResult,
    curve_ffts,
    extract_envelope,
    fit_canonical_t2,
    fit_envelope_t2,
    fit_error,
    grid_search,
)
from .lindblad import (
    FrameSpec,
    InvariantLog,
    QuditParams,
    apply_pulse,
    build_h0,
    collapse_ops,
    default_qudit_params,
    evolve,
    lindblad_rhs,
    modulated_frequency,
    simulate_lindblad_ramsey,
)
from .model import (
    LevelParams,
    Parity,
    dispersion,
    parity_band_population,
    qubit_frequency,
    ramsey_population,
)
from .noise import (
    NoiseSpec,
    NoiseTrace,
    PsdEstimate,
    amplitude_to_scaling,
    compute_c_alpha,
    fit_psd_slope,
    generate_colored_noise,
    interpolate_power,
    periodogram,
    scale_amplitude,
    segment_averaged_psd,
)
from .schedule import (
    CurveSet,
    MeasurementSchedule,
    average_curves,
    per_shot_noise,
    shot_times,
    simulate_ramsey_set,
)

__all__ = [
    "Envelope",
    "FitResult",
    "GridSearchResult",
    "curve_ffts",
    "extract_envelope",
    "fit_canonical_t2",
    "fit_envelope_t2",
    "fit_error",
    "grid_search",
    "FrameSpec",
    "InvariantLog",
    "QuditParams",
    "apply_pulse",
    "build_h0",
    "collapse_ops",
    "default_qudit_params",
    "evolve",
    "lindblad_rhs",
    "modulated_frequency",
    "simulate_lindblad_ramsey",
    "LevelParams",
    "Parity",
    "dispersion",
    "parity_band_population",
    "qubit_frequency",
    "ramsey_population",
    "NoiseSpec",
    "NoiseTrace",
    "PsdEstimate",
    "amplitude_to_scaling",
    "compute_c_alpha",
    "fit_psd_slope",
    "generate_colored_noise",
    "interpolate_power",
    "periodogram",
    "scale_amplitude",
    "segment_averaged_psd",
    "CurveSet",
    "MeasurementSchedule",
    "average_curves",
    "per_shot_noise",
    "shot_times",
    "simulate_ramsey_set",
]
