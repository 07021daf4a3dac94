"""4-level density-matrix reference model for the Ramsey protocol.

Evolution follows the Lindblad master equation

    drho/dt = -i[H, rho] + sum_j (L_j rho L_j^+ - 1/2 {L_j^+ L_j, rho})

with a diagonal system Hamiltonian built from charge-modulated
transition frequencies

    f~_{j,j+1} = f_{j,j+1} - eps_{j,j+1} * cos(2*pi*n_g + p*pi)

and two collapse operators: L1 (upper-shift, amplitude decay with
rates gamma1) and L2 (diagonal, pure dephasing with rates gamma2).
Parity is handled deterministically by running p=0 and p=1 and
averaging the two curve sets.

Simulations run in a rotating frame where the probed transition sits
near its Ramsey detuning instead of at GHz, which leaves the measured
populations unchanged (the Hamiltonian is diagonal, so only the
probed-pair phase difference is observable) while keeping step counts
tractable.  pi/2 and pi pulses are instantaneous ideal x-rotations.
"""

from __future__ import annotations

import concurrent.futures
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import StepSizeError, UsageError
from .noise import NoiseTrace
from .schedule import CurveSet, MeasurementSchedule, per_shot_noise

TRANSITIONS = ("01", "12", "23")

# Measured device values used as defaults: transition frequencies,
# maximum charge dispersions, and per-level T1/T2 coherence times.
DEVICE_FREQUENCIES = (4.0108e9, 3.8830e9, 3.6287e9)
DEVICE_DISPERSIONS = (1.7e3, 62e3, 1.3e6)
DEVICE_T1 = (45e-6, 21e-6, 22e-6)
DEVICE_T2 = (24e-6, 14.5e-6, 4.3e-6)


def _transition_index(transition: str) -> int:
    try:
        return TRANSITIONS.index(transition)
    except ValueError:
        raise UsageError(
            f"transition must be one of {TRANSITIONS}, got {transition!r}"
        ) from None


@dataclass(frozen=True)
class QuditParams:
    """Frequencies, dispersions and dissipation rates of the 4 levels."""

    f01: float
    f12: float
    f23: float
    eps01: float
    eps12: float
    eps23: float
    gamma1: tuple  # (gamma_{1,1}, gamma_{1,2}, gamma_{1,3}), 1/s
    gamma2: tuple  # (gamma_{2,1}, gamma_{2,2}, gamma_{2,3}), 1/s

    def __post_init__(self):
        object.__setattr__(self, "gamma1", tuple(float(g) for g in self.gamma1))
        object.__setattr__(self, "gamma2", tuple(float(g) for g in self.gamma2))
        if len(self.gamma1) != 3 or len(self.gamma2) != 3:
            raise UsageError("gamma1 and gamma2 must each have 3 entries")
        if any(g < 0 for g in self.gamma1 + self.gamma2):
            raise UsageError("dissipation rates must be >= 0")
        if any(f < 0 for f in (self.f01, self.f12, self.f23)):
            raise UsageError("transition frequencies must be >= 0")
        if any(e < 0 for e in (self.eps01, self.eps12, self.eps23)):
            raise UsageError("dispersions must be >= 0")

    @property
    def frequencies(self) -> tuple:
        return (self.f01, self.f12, self.f23)

    @property
    def dispersions(self) -> tuple:
        return (self.eps01, self.eps12, self.eps23)

    @classmethod
    def from_coherence_times(cls, frequencies, dispersions, t1, t2):
        """Build rates from per-level T1 and per-transition T2 values.

        gamma_{1,j} = 1/T1_j.  The diagonal dephasing amplitudes
        d_j = sqrt(gamma_{2,j}) are chosen cumulatively (d_0 = 0,
        ascending j) so each transition's total coherence decay,
        1/2*(gamma_{1,j} + gamma_{1,j+1}) + 1/2*(d_{j+1} - d_j)^2,
        reproduces 1/T2 of that transition exactly.
        """
        g1 = tuple(1.0 / t for t in t1)
        d_prev = 0.0
        g2 = []
        for j in range(3):
            decay = (0.0 if j == 0 else g1[j - 1]) + g1[j]
            pure = 2.0 / t2[j] - decay
            if pure < 0:
                raise UsageError(
                    f"T2={t2[j]} on transition {TRANSITIONS[j]} exceeds the "
                    f"relaxation limit 2/(sum of T1 rates)"
                )
            d = d_prev + math.sqrt(pure)
            g2.append(d * d)
            d_prev = d
        return cls(*frequencies, *dispersions, gamma1=g1, gamma2=tuple(g2))


def default_qudit_params() -> QuditParams:
    """Measured-device defaults with rates mapped from T1/T2."""
    return QuditParams.from_coherence_times(
        DEVICE_FREQUENCIES, DEVICE_DISPERSIONS, DEVICE_T1, DEVICE_T2
    )


@dataclass(frozen=True)
class FrameSpec:
    """Per-transition rotating-frame reference frequencies, Hz."""

    reference: tuple

    def __post_init__(self):
        object.__setattr__(self, "reference", tuple(float(f) for f in self.reference))
        if len(self.reference) != 3:
            raise UsageError("frame needs one reference frequency per transition")

    @classmethod
    def lab(cls):
        return cls((0.0, 0.0, 0.0))

    @classmethod
    def for_drive(cls, params: QuditParams, transition: str, omega_r: float):
        """Frame rotating at the drive of the probed transition.

        The probed pair is referenced to its drive frequency
        (f_bar - omega_r); the other pairs to their bare frequencies,
        so every diagonal gap stays at detuning/dispersion scale.
        """
        j = _transition_index(transition)
        ref = list(params.frequencies)
        ref[j] = params.frequencies[j] - omega_r
        return cls(tuple(ref))


def modulated_frequency(params: QuditParams, transition: str, n_g, parity) -> float:
    """Charge-modulated transition frequency f - eps*cos(2*pi*n_g + p*pi)."""
    j = _transition_index(transition)
    phase = 2.0 * np.pi * np.asarray(n_g, dtype=float) + int(parity) * np.pi
    return params.frequencies[j] - params.dispersions[j] * np.cos(phase)


def build_h0(params: QuditParams, n_g, parity, frame: FrameSpec) -> np.ndarray:
    """Diagonal system Hamiltonian in the given frame, rad/s.

    Diagonal entries are cumulative sums of the frame-shifted
    modulated transition frequencies, scaled by 2*pi.
    """
    deltas = [
        modulated_frequency(params, tr, n_g, parity) - frame.reference[k]
        for k, tr in enumerate(TRANSITIONS)
    ]
    diag = 2.0 * np.pi * np.concatenate(([0.0], np.cumsum(deltas)))
    return np.diag(diag).astype(complex)


def collapse_ops(params: QuditParams):
    """Decay (first superdiagonal) and dephasing (diagonal) operators."""
    if any(g < 0 for g in params.gamma1 + params.gamma2):
        raise UsageError("dissipation rates must be >= 0")
    l1 = np.zeros((4, 4), dtype=complex)
    for j in range(3):
        l1[j, j + 1] = math.sqrt(params.gamma1[j])
    l2 = np.diag([0.0] + [math.sqrt(g) for g in params.gamma2]).astype(complex)
    return l1, l2


def lindblad_rhs(rho, H, L_list):
    """Right-hand side of the master equation; trace- and
    Hermiticity-preserving by construction.  Broadcasts over stacked
    density matrices (..., 4, 4)."""
    drho = -1j * (H @ rho - rho @ H)
    for L in L_list:
        Ld = L.conj().T
        LdL = Ld @ L
        drho = drho + L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)
    return drho


def _max_gap_hz(H) -> float:
    ev = np.linalg.eigvalsh(H)
    return float(ev.max() - ev.min()) / (2.0 * np.pi)


def evolve(rho, H, L_list, dt):
    """One fixed-step RK4 update, re-symmetrized.

    ``dt`` must resolve the fastest frame scale (dt <= 1/(20*max gap));
    the trace is never renormalized, so residual drift stays visible
    as an accuracy diagnostic.
    """
    gap = _max_gap_hz(H)
    if gap > 0 and dt > 1.0 / (20.0 * gap):
        raise StepSizeError(
            f"dt={dt:g} s too large for a {gap:g} Hz gap; "
            f"need dt <= {1.0 / (20.0 * gap):g} s"
        )
    k1 = lindblad_rhs(rho, H, L_list)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, H, L_list)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, H, L_list)
    k4 = lindblad_rhs(rho + dt * k3, H, L_list)
    out = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
    drift = np.abs(np.trace(out, axis1=-2, axis2=-1) - np.trace(rho, axis1=-2, axis2=-1))
    if np.max(drift) > 1e-10:
        raise StepSizeError(f"trace drifted by {np.max(drift):g} in one step")
    return out


def pulse_unitary(transition: str, angle: float) -> np.ndarray:
    """x-rotation exp(-i*angle/2*sigma_x) embedded in one level pair."""
    j = _transition_index(transition)
    u = np.eye(4, dtype=complex)
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    u[j, j] = c
    u[j + 1, j + 1] = c
    u[j, j + 1] = -1j * s
    u[j + 1, j] = -1j * s
    return u


def apply_pulse(rho, transition: str, angle: float, axis: str = "x"):
    """Ideal instantaneous rotation on one transition: U rho U^+."""
    if axis != "x":
        raise UsageError(f"only x-axis pulses are modeled, got {axis!r}")
    u = pulse_unitary(transition, angle)
    return u @ rho @ u.conj().T


def validate_density_matrix(rho, trace_atol=1e-9, herm_atol=1e-12, eig_atol=1e-9):
    """Raise if rho is not Hermitian, unit-trace and positive."""
    herm = np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))))
    if herm > herm_atol:
        raise UsageError(f"density matrix not Hermitian: deviation {herm:g}")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.max(np.abs(tr - 1.0)) > trace_atol:
        raise UsageError(f"density matrix trace off by {np.max(np.abs(tr - 1.0)):g}")
    min_eig = float(np.min(np.linalg.eigvalsh(rho)))
    if min_eig < -eig_atol:
        raise UsageError(f"density matrix not positive: min eigenvalue {min_eig:g}")


@dataclass
class InvariantLog:
    """Worst-case density-matrix diagnostics over a simulation."""

    trace_err: float = 0.0
    herm_err: float = 0.0
    min_eig: float = field(default=math.inf)
    purity_min: float = field(default=math.inf)

    def update(self, rho):
        tr = np.trace(rho, axis1=-2, axis2=-1)
        self.trace_err = max(self.trace_err, float(np.max(np.abs(tr - 1.0))))
        herm = np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))))
        self.herm_err = max(self.herm_err, float(herm))
        self.min_eig = min(self.min_eig, float(np.min(np.linalg.eigvalsh(rho))))
        purity = np.einsum("...jk,...kj->...", rho, rho).real
        self.purity_min = min(self.purity_min, float(np.min(purity)))


def _dissipator_weights(params: QuditParams):
    """Elementwise dissipator for diagonal H and the L1/L2 structure.

    For this operator set the master equation acts elementwise plus a
    single superdiagonal feed:
        drho_jk = (-i*(h_j - h_k) - W_jk) * rho_jk + S_jk * rho_{j+1,k+1}
    with W_jk = (g_j + g_k)/2 + (d_j - d_k)^2/2, S_jk = sqrt(g_{j+1}*g_{k+1}),
    g = diag(L1^+ L1), d = diag(L2).
    """
    g = np.array([0.0, *params.gamma1])
    d = np.sqrt(np.array([0.0, *params.gamma2]))
    w = 0.5 * (g[:, None] + g[None, :]) + 0.5 * (d[:, None] - d[None, :]) ** 2
    s = np.sqrt(g[1:, None] * g[None, 1:])
    return w, s


def _rk4_elementwise(rho, m, s, dt, n_steps):
    """RK4 on the elementwise form; rho is a stack (B, 4, 4).

    Identical stepping to ``evolve`` for diagonal Hamiltonians, with
    preallocated buffers (the loop is memory-bandwidth bound) and
    re-symmetrization deferred to the caller's checkpoint: the
    right-hand side preserves Hermiticity algebraically, so drift
    between checkpoints stays at accumulated round-off.
    """
    k = np.empty_like(rho)
    stage = np.empty_like(rho)
    out = np.empty_like(rho)
    feed = np.empty((rho.shape[0], 3, 3), dtype=rho.dtype)

    def rhs(src, dst):
        np.multiply(m, src, out=dst)
        np.multiply(s, src[:, 1:, 1:], out=feed)
        dst[:, :3, :3] += feed

    sixth, third, half = dt / 6.0, dt / 3.0, dt / 2.0
    for _ in range(n_steps):
        rhs(rho, k)  # k1
        np.multiply(k, sixth, out=out)
        out += rho
        np.multiply(k, half, out=stage)
        stage += rho
        rhs(stage, k)  # k2
        k *= third
        out += k
        np.multiply(k, 1.5, out=stage)  # (dt/2) * k2
        stage += rho
        rhs(stage, k)  # k3
        k *= third
        out += k
        np.multiply(k, 3.0, out=stage)  # dt * k3
        stage += rho
        rhs(stage, k)  # k4
        k *= sixth
        out += k
        rho, out = out, rho
    return rho


def step_size(schedule: MeasurementSchedule, params: QuditParams, omega_r: float) -> float:
    """Default integrator step: min(gap rule, grid spacing / 50)."""
    gap_bound = abs(omega_r) + sum(params.dispersions)
    dt = 1.0 / (20.0 * gap_bound) if gap_bound > 0 else math.inf
    if schedule.n_tr > 1:
        spacing = schedule.tr_max / (schedule.n_tr - 1)
        dt = min(dt, spacing / 50.0)
    else:
        dt = min(dt, schedule.tr_max / 50.0)
    return dt


def simulate_lindblad_ramsey(
    schedule: MeasurementSchedule,
    noise: NoiseTrace,
    a: float,
    params: QuditParams,
    transition: str,
    omega_r: float,
    dt: float | None = None,
    checks: InvariantLog | None = None,
    threads: int = 1,
) -> CurveSet:
    """Density-matrix Ramsey curves for one transition.

    Per shot: prepare the lower probed level through an ideal pi-pulse
    ladder, apply pi/2 on the probed pair, evolve for t_R with that
    shot's frozen n_g, apply the second pi/2, and read the upper-level
    population.  The full set is computed for parity 0 and parity 1
    and the two results averaged.

    Shots of one free-evolution time are integrated as a single
    batch; the stepping matches ``evolve`` (same RK4, specialized to
    the diagonal Hamiltonian, re-symmetrized at every readout
    checkpoint).  Free-evolution points are independent, so ``threads``
    may split them across a pool without changing any result.
    """
    j = _transition_index(transition)
    frame = FrameSpec.for_drive(params, transition, omega_r)
    if dt is None:
        dt = step_size(schedule, params, omega_r)

    n_g = a * per_shot_noise(schedule, noise, transition)
    n_curves, n_tr, spp = n_g.shape
    cosine = np.cos(2.0 * np.pi * n_g)

    base = np.array(params.frequencies) - np.array(frame.reference)
    eps = np.array(params.dispersions)
    w, s = _dissipator_weights(params)

    # State after preparation + first pi/2 is shot-independent.
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    for k in range(j):
        rho0 = apply_pulse(rho0, TRANSITIONS[k], math.pi)
    rho0 = apply_pulse(rho0, transition, math.pi / 2.0)
    u2 = pulse_unitary(transition, math.pi / 2.0)

    t_r = schedule.tr_grid
    checks_lock = threading.Lock()

    def run_point(i):
        # parity flips the sign of the cosine modulation
        c = cosine[:, i, :].reshape(-1)
        c = np.concatenate([c, -c])  # (2 * n_curves * spp,)
        deltas = base[None, :] - eps[None, :] * c[:, None]
        h = 2.0 * np.pi * np.concatenate(
            [np.zeros((c.size, 1)), np.cumsum(deltas, axis=1)], axis=1
        )
        m = -1j * (h[:, :, None] - h[:, None, :]) - w[None, :, :]

        rho = np.broadcast_to(rho0, (c.size, 4, 4)).copy()
        if t_r[i] > 0:
            n_steps = max(1, int(math.ceil(t_r[i] / dt)))
            rho = _rk4_elementwise(rho, m, s, t_r[i] / n_steps, n_steps)
            rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
        rho = u2 @ rho @ u2.conj().T

        drift = float(np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0)))
        if drift > 1e-9:
            raise StepSizeError(
                f"trace drifted by {drift:g} at t_R={t_r[i]:g} s; reduce dt"
            )
        if checks is not None:
            with checks_lock:
                checks.update(rho)
        return rho[:, j + 1, j + 1].real.reshape(2, n_curves, spp).mean(axis=2)

    pops = np.empty((2, n_curves, n_tr))
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for i, point in enumerate(pool.map(run_point, range(n_tr))):
                pops[:, :, i] = point
    else:
        for i in range(n_tr):
            pops[:, :, i] = run_point(i)

    curves = 0.5 * (pops[0] + pops[1])
    return CurveSet(
        t_r=t_r,
        curves=np.clip(curves, 0.0, 1.0),
        level=transition,
        omega_r=omega_r,
    )
