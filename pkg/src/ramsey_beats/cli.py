"""Command-line surface tying the pipeline together.

Commands
--------
noise-gen    synthesize a charge-noise trace and its PSD (CSV)
simulate     simulate a multi-curve Ramsey set (phenom or lindblad)
fit-t2       corrected + canonical T2* fits of a curve-set CSV
fit-psd      (alpha, a) grid search against a curve-set CSV
export-figs  canned overlay/average/envelope and PSD-example datasets

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import __version__, io
from .analysis import (
    extract_envelope,
    fit_canonical_t2,
    fit_envelope_t2,
    grid_search,
)
from .config import (
    build_level_params,
    build_qudit_params,
    build_schedule,
    config_hash,
    load_config,
)
from .errors import NumericsError, UsageError
from .lindblad import simulate_lindblad_ramsey
from .noise import (
    NoiseSpec,
    amplitude_to_scaling,
    compute_c_alpha,
    generate_colored_noise,
    periodogram,
)
from .schedule import average_curves, simulate_ramsey_set


def _provenance(cfg: dict, command: str, seed: int) -> dict:
    return {
        "tool": f"ramsey-beats {__version__}",
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": seed,
    }


def _resolve_scaling(cfg: dict, n_samples: int, sample_rate: float) -> float:
    """Scaling amplitude a, from noise.a or from the physical amplitude."""
    noise_cfg = cfg["noise"]
    if noise_cfg["a"] is not None:
        return float(noise_cfg["a"])
    c = compute_c_alpha(
        float(noise_cfg["alpha"]), n_samples, sample_rate,
        int(cfg["fit"]["n_seeds_c_alpha"]),
    )
    return amplitude_to_scaling(float(noise_cfg["amplitude"]), c)


def _out_path(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def cmd_noise_gen(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg["noise"]["seed"])
    spec = NoiseSpec(
        alpha=float(cfg["noise"]["alpha"]),
        n_samples=int(cfg["noise"]["n_samples"]),
        sample_rate=float(cfg["noise"]["sample_rate"]),
        seed=seed,
    )
    trace = generate_colored_noise(spec)
    prov = _provenance(cfg, "noise-gen", seed)
    prov["alpha"] = spec.alpha
    io.write_noise_csv(_out_path(args.out, "noise.csv"), trace, prov)
    io.write_psd_csv(_out_path(args.out, "noise_psd.csv"), periodogram(trace), prov)
    print(f"wrote noise.csv and noise_psd.csv to {args.out}")
    return 0


def _simulate_curves(cfg, model, level, seed, dt=None):
    schedule = build_schedule(cfg)
    params = build_level_params(cfg, level)
    n_samples = schedule.required_samples(level, schedule.shot_rate)
    a = _resolve_scaling(cfg, n_samples, schedule.shot_rate)
    spec = NoiseSpec(
        alpha=float(cfg["noise"]["alpha"]),
        n_samples=n_samples,
        sample_rate=schedule.shot_rate,
        seed=seed,
    )
    trace = generate_colored_noise(spec)
    if model == "phenom":
        curves = simulate_ramsey_set(schedule, trace, a, params, level)
    else:
        qparams = build_qudit_params(cfg)
        curves = simulate_lindblad_ramsey(
            schedule, trace, a, qparams, level, params.omega_r,
            dt=dt if dt is not None else cfg["lindblad"]["dt"],
        )
    return curves, a


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg["noise"]["seed"])
    curves, a = _simulate_curves(cfg, args.model, args.level, seed)
    prov = _provenance(cfg, f"simulate --model {args.model}", seed)
    prov["scaling_a"] = a
    io.write_curves_csv(_out_path(args.out, f"curves_{args.level}.csv"), curves, prov)
    io.write_average_csv(
        _out_path(args.out, f"average_{args.level}.csv"),
        curves.t_r, average_curves(curves), prov,
    )
    env = extract_envelope(curves, cfg["fit"]["smooth_window"])
    io.write_envelope_csv(_out_path(args.out, f"envelope_{args.level}.csv"), env, prov)
    print(
        f"simulated {curves.n_curves} curves on level {args.level} "
        f"({args.model}); wrote curves/average/envelope CSVs to {args.out}"
    )
    return 0


def cmd_fit_t2(args) -> int:
    cfg = load_config(args.config)
    curve_set = io.read_curves_csv(args.curves)
    env = extract_envelope(curve_set, cfg["fit"]["smooth_window"])
    corrected = fit_envelope_t2(env, noise_floor=float(cfg["fit"]["noise_floor"]))
    canonical = fit_canonical_t2(
        curve_set.t_r,
        average_curves(curve_set),
        omega_r_hint=curve_set.omega_r or None,
    )
    doc = {
        "corrected": io.fit_result_to_dict(corrected),
        "canonical": io.fit_result_to_dict(canonical),
        "provenance": _provenance(cfg, "fit-t2", int(cfg["noise"]["seed"])),
    }
    out = _out_path(args.out, "fit_t2.json")
    io.write_json(out, doc)
    print(
        f"corrected T2* = {corrected.t2 * 1e6:.2f} us, "
        f"canonical T2~* = {canonical.t2 * 1e6:.2f} us -> {out}"
    )
    return 0


def cmd_fit_psd(args) -> int:
    cfg = load_config(args.config)
    curve_set = io.read_curves_csv(args.curves)
    level = args.level or curve_set.level
    if not level:
        raise UsageError("curve file has no level metadata; pass --level")

    # Schedule geometry follows the data; shot bookkeeping follows config.
    base = build_schedule(cfg)
    schedule = dataclasses.replace(
        base,
        n_tr=curve_set.t_r.size,
        tr_max=float(curve_set.t_r[-1]),
        n_curves=curve_set.n_curves,
    )
    params = build_level_params(cfg, level)
    if curve_set.omega_r:
        params = dataclasses.replace(params, omega_r=curve_set.omega_r)
    env = extract_envelope(curve_set, cfg["fit"]["smooth_window"])
    corrected = fit_envelope_t2(env, noise_floor=float(cfg["fit"]["noise_floor"]))
    params = dataclasses.replace(params, t2_star=corrected.t2)

    fit = cfg["fit"]
    alpha_grid = np.arange(
        fit["alpha_min"], fit["alpha_max"] + 0.5 * fit["alpha_step"], fit["alpha_step"]
    )
    a_grid = np.logspace(np.log10(fit["a_min"]), np.log10(fit["a_max"]), int(fit["n_a"]))
    result = grid_search(
        curve_set, alpha_grid, a_grid, schedule, params,
        seeds=tuple(int(s) for s in fit["seeds"]),
        level=level,
        n_seeds_c_alpha=int(fit["n_seeds_c_alpha"]),
        uncertainty_level=float(fit["uncertainty_level"]),
        threads=args.threads,
    )
    prov = _provenance(cfg, "fit-psd", int(fit["seeds"][0]))
    io.write_surface_csv(_out_path(args.out, "error_surface.csv"), result, prov)
    io.write_json(_out_path(args.out, "fit_psd.json"), {
        "best_alpha": result.best_alpha,
        "best_a": result.best_a,
        "best_amplitude": result.best_amplitude,
        "alpha_halfwidth": result.alpha_halfwidth,
        "a_halfwidth_decades": result.a_halfwidth_decades,
        "corrected_t2_star": corrected.t2,
        "provenance": prov,
    })
    print(
        f"best fit: alpha = {result.best_alpha:.2f} +/- {result.alpha_halfwidth:.2f}, "
        f"A = {result.best_amplitude:.3g} e^2/Hz"
    )
    return 0


def cmd_export_figs(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg["noise"]["seed"])
    prov = _provenance(cfg, "export-figs", seed)

    for level in cfg["schedule"]["levels"]:
        curves, _ = _simulate_curves(cfg, "phenom", level, seed)
        io.write_curves_csv(_out_path(args.out, f"overlay_{level}.csv"), curves, prov)
        io.write_average_csv(
            _out_path(args.out, f"average_{level}.csv"),
            curves.t_r, average_curves(curves), prov,
        )
        env = extract_envelope(curves, cfg["fit"]["smooth_window"])
        io.write_envelope_csv(_out_path(args.out, f"envelope_{level}.csv"), env, prov)

    # PSD examples, one per exponent, matched to ~1e-6 e^2/Hz at 1 Hz
    n = int(cfg["noise"]["n_samples"])
    rate = float(cfg["noise"]["sample_rate"])
    for alpha in (0.0, 1.0, 2.0, 3.0):
        c = compute_c_alpha(alpha, n, rate, int(cfg["fit"]["n_seeds_c_alpha"]))
        a = amplitude_to_scaling(1e-6, c)
        trace = generate_colored_noise(
            NoiseSpec(alpha=alpha, n_samples=n, sample_rate=rate, seed=seed)
        )
        psd = periodogram(trace)
        scaled = dataclasses.replace(psd, power=psd.power * a * a)
        io.write_psd_csv(_out_path(args.out, f"psd_alpha{alpha:g}.csv"), scaled, prov)
    print(f"wrote figure datasets to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramsey-beats",
        description="Multi-level Ramsey beat simulation and charge-noise spectroscopy",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration", default=None)
        p.add_argument("--seed", type=int, default=None, help="noise seed override")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("noise-gen", help="generate a noise trace + PSD")
    common(p)
    p.set_defaults(func=cmd_noise_gen)

    p = sub.add_parser("simulate", help="simulate a Ramsey curve set")
    common(p)
    p.add_argument("--model", choices=("phenom", "lindblad"), default="phenom")
    p.add_argument("--level", choices=("01", "12", "23"), default="23")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit-t2", help="fit corrected and canonical T2*")
    common(p)
    p.add_argument("--curves", required=True, help="curve-set CSV")
    p.set_defaults(func=cmd_fit_t2)

    p = sub.add_parser("fit-psd", help="grid-search the noise PSD")
    common(p)
    p.add_argument("--curves", required=True, help="curve-set CSV")
    p.add_argument("--level", choices=("01", "12", "23"), default=None)
    p.set_defaults(func=cmd_fit_psd)

    p = sub.add_parser("export-figs", help="emit figure-style datasets")
    common(p)
    p.set_defaults(func=cmd_export_figs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
