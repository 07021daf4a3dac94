"""File formats: CSV/JSON with provenance comment headers.

All CSVs are comma-separated with ``.`` decimals; lines starting with
``#`` carry provenance and metadata as ``key=value`` pairs.  Floats
are written with ``repr`` so every file reparses to the exact
in-memory values (time columns stored in microseconds round-trip to
within 1 ulp).  Writes are atomic (temp file + rename).
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile

import numpy as np

from .analysis import Envelope, FitResult, GridSearchResult
from .errors import CsvParseError, UsageError
from .noise import NoiseTrace, PsdEstimate
from .schedule import CurveSet, MeasurementSchedule


def _fmt(x) -> str:
    return repr(float(x))


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _comment_lines(provenance: dict | None) -> list[str]:
    return [f"# {k}={v}" for k, v in (provenance or {}).items()]


def _write_table(path, header: str, columns, provenance=None):
    rows = zip(*columns)
    lines = _comment_lines(provenance)
    lines.append(header)
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _read_table(path, expected_header: str):
    """Return (metadata dict, list of float rows)."""
    metadata = {}
    rows = []
    header_seen = False
    n_cols = expected_header.count(",") + 1
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, _, v = body.partition("=")
                    metadata[k.strip()] = v.strip()
                continue
            if not header_seen:
                if line != expected_header:
                    raise CsvParseError(
                        f"expected header {expected_header!r}, got {line!r}", lineno
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise CsvParseError(
                    f"expected {n_cols} columns, got {len(parts)}", lineno
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise CsvParseError(str(exc), lineno) from exc
    if not header_seen:
        raise CsvParseError(f"missing header {expected_header!r}", 1)
    return metadata, rows


# -- noise traces ------------------------------------------------------

def write_noise_csv(path, trace: NoiseTrace, provenance=None):
    prov = dict(provenance or {})
    prov["sample_rate_hz"] = _fmt(trace.sample_rate)
    _write_table(path, "t_s,n_g", (trace.times, trace.samples), prov)


def read_noise_csv(path) -> NoiseTrace:
    meta, rows = _read_table(path, "t_s,n_g")
    data = np.asarray(rows)
    if "sample_rate_hz" in meta:
        rate = float(meta["sample_rate_hz"])
    elif data.shape[0] > 1:
        rate = 1.0 / (data[1, 0] - data[0, 0])
    else:
        raise CsvParseError("cannot infer sample rate from one sample", 1)
    return NoiseTrace(samples=data[:, 1], sample_rate=rate)


# -- PSD estimates -----------------------------------------------------

def write_psd_csv(path, psd: PsdEstimate, provenance=None):
    prov = dict(provenance or {})
    prov["method"] = psd.method
    _write_table(path, "f_hz,power", (psd.frequencies, psd.power), prov)


def read_psd_csv(path) -> PsdEstimate:
    meta, rows = _read_table(path, "f_hz,power")
    data = np.asarray(rows)
    return PsdEstimate(
        frequencies=data[:, 0],
        power=data[:, 1],
        method=meta.get("method", "periodogram"),
    )


# -- curve sets --------------------------------------------------------

def write_curves_csv(path, curve_set: CurveSet, provenance=None):
    prov = dict(provenance or {})
    prov["level"] = curve_set.level
    prov["omega_r_hz"] = _fmt(curve_set.omega_r)
    t_us = curve_set.t_r * 1e6
    lines = _comment_lines(prov)
    lines.append("curve,t_r_us,population")
    for ci in range(curve_set.n_curves):
        for tv, pv in zip(t_us, curve_set.curves[ci]):
            lines.append(f"{ci},{_fmt(tv)},{_fmt(pv)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_curves_csv(path) -> CurveSet:
    meta, rows = _read_table(path, "curve,t_r_us,population")
    if not rows:
        raise CsvParseError("no curve rows", 1)
    data = np.asarray(rows)
    indices = data[:, 0].astype(int)
    n_curves = indices.max() + 1
    counts = np.bincount(indices, minlength=n_curves)
    if not np.all(counts == counts[0]):
        raise CsvParseError("curves have unequal point counts", 1)
    n_tr = counts[0]
    t_r = data[:n_tr, 1] * 1e-6
    curves = np.empty((n_curves, n_tr))
    for ci in range(n_curves):
        block = data[indices == ci]
        if not np.array_equal(block[:, 1], data[:n_tr, 1]):
            raise CsvParseError(f"curve {ci} is on a different t_R grid", 1)
        curves[ci] = block[:, 2]
    return CurveSet(
        t_r=t_r,
        curves=curves,
        level=meta.get("level", ""),
        omega_r=float(meta.get("omega_r_hz", 0.0)),
    )


def write_average_csv(path, t_r, average, provenance=None):
    _write_table(path, "t_r_us,population", (np.asarray(t_r) * 1e6, average), provenance)


def read_average_csv(path):
    """Returns (t_r seconds, population)."""
    _, rows = _read_table(path, "t_r_us,population")
    data = np.asarray(rows)
    return data[:, 0] * 1e-6, data[:, 1]


def write_envelope_csv(path, env: Envelope, provenance=None):
    _write_table(
        path, "t_r_us,upper,lower", (env.t_r * 1e6, env.upper, env.lower), provenance
    )


def read_envelope_csv(path) -> Envelope:
    _, rows = _read_table(path, "t_r_us,upper,lower")
    data = np.asarray(rows)
    return Envelope(t_r=data[:, 0] * 1e-6, upper=data[:, 1], lower=data[:, 2])


# -- error surfaces ----------------------------------------------------

def write_surface_csv(path, result: GridSearchResult, provenance=None):
    prov = dict(provenance or {})
    prov.update(
        best_alpha=_fmt(result.best_alpha),
        best_a=_fmt(result.best_a),
        best_amplitude=_fmt(result.best_amplitude),
        alpha_halfwidth=_fmt(result.alpha_halfwidth),
        a_halfwidth_decades=_fmt(result.a_halfwidth_decades),
    )
    lines = _comment_lines(prov)
    lines.append("alpha,a,A,log_error")
    for i, alpha in enumerate(result.alpha_grid):
        for j, a in enumerate(result.a_grid):
            amplitude = result.c_alpha[i] * a * a
            lines.append(
                f"{_fmt(alpha)},{_fmt(a)},{_fmt(amplitude)},{_fmt(result.log_error[i, j])}"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_surface_csv(path):
    """Returns (metadata, alpha, a, A, log_error) flat row arrays."""
    meta, rows = _read_table(path, "alpha,a,A,log_error")
    data = np.asarray(rows)
    return meta, data[:, 0], data[:, 1], data[:, 2], data[:, 3]


# -- JSON documents ----------------------------------------------------

def write_json(path, obj: dict):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    with open(path) as f:
        return json.load(f)


def schedule_to_dict(schedule: MeasurementSchedule) -> dict:
    d = dataclasses.asdict(schedule)
    d["levels"] = list(d["levels"])
    return d


def schedule_from_dict(d: dict) -> MeasurementSchedule:
    try:
        return MeasurementSchedule(**d)
    except TypeError as exc:
        raise UsageError(f"bad schedule document: {exc}") from exc


def fit_result_to_dict(fit: FitResult) -> dict:
    return dataclasses.asdict(fit)
