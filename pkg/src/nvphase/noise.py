"""Classical dephasing: OU noise, closed-form error budgets and Monte Carlo.

Noise enters as ``B0 -> B0 + deltaB f(t)`` with ``f`` a stationary
Ornstein-Uhlenbeck process (zero mean, unit variance, correlation
``exp(-t/tau_c)``). Each trajectory draws from its own PCG64 stream seeded
with ``(seed, trajectory_index)``, so results do not depend on how
trajectories are batched.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ContractError, SingularParameterError
from .frames import speed_tiers, gate_speed
from .linalg import eig_hermitian, is_hermitian
from .model import RotatingField, SpinConstants, StaticFields, to_angular

log = logging.getLogger(__name__)

PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class NoiseModel:
    deltaB: float = 0.02  # MHz
    tau_c: float = 1e4  # us
    trajectories: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.deltaB < 0 or self.tau_c <= 0 or self.trajectories < 1:
            raise ContractError("need deltaB >= 0, tau_c > 0 and trajectories >= 1")


def _stream(nm: NoiseModel, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([nm.seed, index])))


def _ou_from_normals(g: np.ndarray, dt: float, tau_c: float) -> np.ndarray:
    a = math.exp(-dt / tau_c)
    s = math.sqrt(-math.expm1(-2.0 * dt / tau_c))
    f = np.empty_like(g)
    f[..., 0] = g[..., 0]
    for k in range(1, g.shape[-1]):
        f[..., k] = a * f[..., k - 1] + s * g[..., k]
    return f


def ou_trajectory(nm: NoiseModel, dt: float, n: int, trajectory_index: int) -> np.ndarray:
    """``n`` samples of the stationary OU process spaced by ``dt`` (us)."""
    if dt <= 0:
        raise ContractError("dt must be positive")
    return _ou_from_normals(_stream(nm, trajectory_index).standard_normal(n), dt, nm.tau_c)


def ou_ensemble(nm: NoiseModel, dt: float, n: int) -> np.ndarray:
    """All ``nm.trajectories`` trajectories as a (trajectories, n) array."""
    if dt <= 0:
        raise ContractError("dt must be positive")
    g = np.stack([_stream(nm, i).standard_normal(n) for i in range(nm.trajectories)])
    return _ou_from_normals(g, dt, nm.tau_c)


def _ratio_check(s: StaticFields):
    if s.gammaB0 <= 0:
        raise SingularParameterError("gammaB0 must be positive")


def noise_amplitude_b(c: SpinConstants, s: StaticFields) -> float:
    """Nuclear noise amplitude under static fields (rad/us)."""
    _ratio_check(s)
    return to_angular(s.deltaB) * (s.dE0 / s.gammaB0) ** 2 * (c.A_par_N / s.gammaB0)


def t2star_static(c: SpinConstants, s: StaticFields) -> float:
    """Static-field nuclear T2* = 2 / b in us (``inf`` without noise)."""
    b = noise_amplitude_b(c, s)
    return math.inf if b == 0 else 2.0 / b


def effective_nuclear_noise(c: SpinConstants, s: StaticFields, omega_prime: float) -> float:
    """gamma_n deltaB_N = 3 dOmega deltaB / B0 during gating (rad/us)."""
    _ratio_check(s)
    geo = gate_speed(c, s, omega_prime).geometric_part
    return 3.0 * abs(geo) * s.deltaB / s.gammaB0


def t2star_gate(c: SpinConstants, s: StaticFields, omega_prime: float) -> float:
    """Nuclear T2* without echo while gating, in us."""
    _ratio_check(s)
    inv = (0.75 * to_angular(abs(omega_prime)) * (s.dE0 / s.gammaB0) ** 2
           * (c.A_par_N / s.gammaB0) * (s.deltaB / s.gammaB0))
    return math.inf if inv == 0 else 1.0 / inv


def epsilon_dec(s: StaticFields) -> float:
    _ratio_check(s)
    return (3.0 * math.pi / (2.0 * math.sqrt(2.0)) * s.deltaB / s.gammaB0) ** 2


def epsilon_sys(s: StaticFields) -> float:
    if s.gammaB0 <= 0 or s.dE0 <= 0:
        raise SingularParameterError("systematic error needs B0 > 0 and E0 > 0")
    return 4.0 * math.pi ** 2 * (-0.75 * s.shiftB + 0.5 * s.shiftE) ** 2


def _check_density(rho: np.ndarray, tol: float):
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ContractError("density matrix must be square")
    if not is_hermitian(rho, tol):
        raise ContractError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ContractError("density matrix does not have unit trace")
    if eig_hermitian(rho)[0][0] < -tol:
        raise ContractError("density matrix is not positive semidefinite")


def fidelity(rho, rho_prime, tol: float = 1e-10) -> float:
    """Re tr(rho rho'), clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    rho_prime = np.asarray(rho_prime, dtype=complex)
    _check_density(rho, tol)
    _check_density(rho_prime, tol)
    f = float(np.real(np.trace(rho @ rho_prime)))
    if f > 1.0 + 1e-9 or f < -1e-9:
        log.warning("fidelity %.12g outside [0, 1]; clamping", f)
    return min(1.0, max(0.0, f))


def nuclear_state(relative_phase: float) -> np.ndarray:
    """Density matrix of (|u> + exp(i phase) |d>)/sqrt(2)."""
    v = np.array([1.0, np.exp(1j * relative_phase)]) / math.sqrt(2.0)
    return np.outer(v, v.conj())


def epsilon_sys_exact(c: SpinConstants, s: StaticFields, omega_prime: float = 1000.0,
                      tier: str = "approx") -> float:
    """Systematic error from the shifted gate speed and an exact pure-state fidelity.

    The gate time is fixed by the nominal fields; shifted fields then
    accumulate ``pi * speed(shifted) / speed(nominal)`` instead of ``pi``.
    """
    shifted = replace(s, gammaB0=s.gammaB0 * (1 + s.shiftB), dE0=s.dE0 * (1 + s.shiftE))
    idx = 1 if tier == "approx" else 0
    a = to_angular(c.A_par_N)
    g0 = speed_tiers(c, s.gammaB0, s.dE0, omega_prime)[idx] - a
    g1 = speed_tiers(c, shifted.gammaB0, shifted.dE0, omega_prime)[idx] - a
    ideal = nuclear_state(math.pi)
    actual = nuclear_state(math.pi * float(g1 / g0))
    return 1.0 - fidelity(ideal, actual)


@dataclass(frozen=True)
class CoherenceCurve:
    """Ensemble ``<+|rho(t)|+>`` with a Gaussian-decay fit ``exp(-(t/T2*)^2)``."""

    times: np.ndarray
    coherence: np.ndarray
    stderr: np.ndarray
    fitted_t2star: float
    fit_r2: float


def fit_t2star(times, coherence, floor: float = 0.9) -> tuple[float, float]:
    """Fit ``-ln C = (t/T)^2`` through the origin on points with ``C >= floor``.

    Returns the fitted ``T`` and the R^2 of ``-ln C`` against ``t^2``.
    """
    t = np.asarray(times, dtype=float)
    cc = np.asarray(coherence, dtype=float)
    m = (t > 0) & (cc >= floor) & (cc < 1.0)
    if m.sum() < 2:
        raise ContractError("not enough decaying points to fit T2*")
    x, y = t[m] ** 2, -np.log(cc[m])
    slope = float(np.sum(x * y) / np.sum(x * x))
    resid = y - slope * x
    r2 = 1.0 - float(np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2))
    return 1.0 / math.sqrt(slope), r2


def coherence_curve(rate_shift: Callable[[np.ndarray], np.ndarray], nm: NoiseModel,
                    t_max: float, points: int = 40, substeps: int = 4,
                    floor: float = 0.9) -> CoherenceCurve:
    """Monte-Carlo nuclear coherence under ``H = rate_shift(f(t)) I_z``.

    ``rate_shift`` maps noise samples to the deviation of the nuclear
    precession frequency (rad/us).
    """
    n = points * substeps + 1
    dt = t_max / (n - 1)
    f = ou_ensemble(nm, dt, n)
    w = rate_shift(f)
    phase = np.concatenate([np.zeros((w.shape[0], 1)),
                            np.cumsum(0.5 * (w[:, 1:] + w[:, :-1]) * dt, axis=1)], axis=1)
    phase = phase[:, ::substeps]
    per_traj = 0.5 * (1.0 + np.cos(phase))
    coh = per_traj.mean(axis=0)
    err = per_traj.std(axis=0, ddof=1) / math.sqrt(nm.trajectories) if nm.trajectories > 1 \
        else np.zeros_like(coh)
    times = np.linspace(0.0, t_max, points + 1)
    t2, r2 = fit_t2star(times, coh, floor)
    return CoherenceCurve(times, coh, err, t2, r2)


def static_splitting(c: SpinConstants, gammaB, dE) -> np.ndarray:
    """Exact ``|1'u>`` minus ``|1'd>`` energy (rad/us), vectorized over fields."""
    b = to_angular(np.asarray(gammaB, dtype=float))
    e = to_angular(dE)
    a = to_angular(c.A_par_N)
    return np.hypot(b + a / 2, e) - np.hypot(b - a / 2, e)


def static_coherence(c: SpinConstants, s: StaticFields, nm: NoiseModel, t_max: float | None = None,
                     model: str = "eigen", **kw) -> CoherenceCurve:
    """Nuclear coherence while idling under the static preparation fields.

    ``model="eigen"`` follows the exact static eigenvalues as the field
    fluctuates; ``model="linear"`` uses the first-order ``b f(t) I_z``.
    """
    s = replace(s, deltaB=nm.deltaB)
    if t_max is None:
        t_max = 0.6 * t2star_static(c, s)
    if model == "eigen":
        base = static_splitting(c, s.gammaB0, s.dE0)
        rate = lambda f: static_splitting(c, s.gammaB0 + s.deltaB * f, s.dE0) - base
    elif model == "linear":
        b = noise_amplitude_b(c, s)
        rate = lambda f: b * f
    else:
        raise ContractError(f"unknown model {model!r}")
    return coherence_curve(rate, nm, t_max, **kw)


def _speed_function(c, s, r, speed, cfg):
    a = to_angular(c.A_par_N)
    if speed == "analytic":
        return lambda gb: speed_tiers(c, gb, s.dE0, r.omega_prime)[0] - a
    if speed == "numeric":
        from .propagate import run_gate

        h = 0.01 * s.gammaB0
        xs = np.array([s.gammaB0 - h, s.gammaB0, s.gammaB0 + h])
        ys = [run_gate(c, replace(s, gammaB0=x), r, cfg).delta_omega_rate for x in xs]
        coef = np.polyfit(xs - s.gammaB0, ys, 2)
        return lambda gb: np.polyval(coef, np.asarray(gb) - s.gammaB0)
    raise ContractError(f"unknown speed source {speed!r}")


def gate_coherence(c: SpinConstants, s: StaticFields, r: RotatingField, nm: NoiseModel,
                   t_max: float | None = None, speed: str = "analytic", cfg=None, **kw) -> CoherenceCurve:
    """Nuclear coherence under continuous gating with a noisy bias field."""
    s = replace(s, deltaB=nm.deltaB)
    g = _speed_function(c, s, r, speed, cfg)
    g0 = float(g(s.gammaB0))
    if t_max is None:
        t_max = 0.6 * t2star_gate(c, s, r.omega_prime)
    return coherence_curve(lambda f: g(s.gammaB0 + s.deltaB * f) - g0, nm, t_max, **kw)


@dataclass(frozen=True)
class GateErrorEstimate:
    """Monte-Carlo decoherence error of one pi gate.

    ``error`` follows the convention fidelity = (1 + coherence)/2, with the
    coherence being the ensemble overlap with the ideal output.
    ``trace_error`` is ``1 - tr(rho_ideal rho_avg)`` itself, which is twice
    ``error``.
    """

    error: float
    stderr: float
    trace_error: float
    trace_stderr: float
    closed_form: float
    gate_time: float
    trajectories: int


def mc_gate_error(c: SpinConstants, s: StaticFields, r: RotatingField, nm: NoiseModel,
                  cfg=None, speed: str = "analytic", steps: int = 64) -> GateErrorEstimate:
    """Ensemble of pi gates with ``B0 -> B0 + deltaB f(t)`` in the gate speed.

    ``speed="analytic"`` takes the gate speed from the hyperfine-difference
    closed form; ``speed="numeric"`` calibrates it with three ``run_gate``
    propagations around B0.
    """
    if nm.trajectories < 100:
        log.warning("fewer than 100 trajectories; stderr is unreliable")
    s = replace(s, deltaB=nm.deltaB)
    g = _speed_function(c, s, r, speed, cfg)
    g0 = float(g(s.gammaB0))
    if g0 == 0:
        raise SingularParameterError("gate speed vanishes; no pi gate is defined")
    t_gate = math.pi / abs(g0)
    dt = t_gate / steps
    f = ou_ensemble(nm, dt, steps + 1)
    w = g(s.gammaB0 + s.deltaB * f) - g0
    phase = np.sum(0.5 * (w[:, 1:] + w[:, :-1]), axis=1) * dt

    ideal = nuclear_state(math.pi)
    rho_avg = np.mean([nuclear_state(math.pi + p) for p in phase], axis=0)
    trace_fid = fidelity(ideal, 0.5 * (rho_avg + rho_avg.conj().T))
    per_traj = np.sin(0.5 * phase) ** 2
    se = float(per_traj.std(ddof=1) / math.sqrt(len(per_traj))) if len(per_traj) > 1 else 0.0
    return GateErrorEstimate(
        error=0.5 * (1.0 - trace_fid), stderr=0.5 * se,
        trace_error=1.0 - trace_fid, trace_stderr=se,
        closed_form=epsilon_dec(s), gate_time=t_gate, trajectories=nm.trajectories)
