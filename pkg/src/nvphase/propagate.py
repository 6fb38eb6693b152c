"""Brute-force time-ordered propagation and cyclic-phase extraction."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ContractError, ConvergenceError, NonCyclicError
from .frames import branch_inputs
from .hamiltonian import h_rotating
from .linalg import expm_unitary_batch, ordered_product
from .model import QuantumState, RotatingField, SpinConstants, StaticFields, to_angular

log = logging.getLogger(__name__)

HamiltonianFn = Callable[[np.ndarray], np.ndarray]

STEPS_PER_FAST_PERIOD = 40
_CHUNK = 16384


@dataclass(frozen=True)
class PropagationConfig:
    """Integrator settings.

    ``step=None`` picks ``0.05 / max|eigenvalue|`` for generic Hamiltonians;
    ``run_gate`` instead resolves the fast rotation with
    ``STEPS_PER_FAST_PERIOD`` steps. With ``check`` on, each run is repeated
    at half the step and the step is halved until successive results agree
    to ``tolerance`` (at most ``max_halvings`` times).
    """

    step: float | None = None
    method: str = "PiecewiseExpm"
    tolerance: float = 1e-6
    max_halvings: int = 3
    check: bool = True

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ContractError("step must be positive")
        if self.method not in ("PiecewiseExpm", "RK4"):
            raise ContractError(f"unknown method {self.method!r}")


def _eval(h: HamiltonianFn, ts: np.ndarray) -> np.ndarray:
    out = np.asarray(h(ts))
    if out.ndim == 3 and out.shape[0] == ts.size:
        return out
    return np.stack([np.asarray(h(float(t))) for t in ts])


def _expm_segment(h, psi, t0, t1, step):
    n = max(1, math.ceil((t1 - t0) / step - 1e-9))
    dt = (t1 - t0) / n
    for lo in range(0, n, _CHUNK):
        k = np.arange(lo, min(n, lo + _CHUNK))
        us = expm_unitary_batch(_eval(h, t0 + (k + 0.5) * dt), dt)
        psi = ordered_product(us) @ psi
    return psi


def _rk4_segment(h, psi, t0, t1, step):
    n = max(1, math.ceil((t1 - t0) / step - 1e-9))
    dt = (t1 - t0) / n
    for lo in range(0, n, _CHUNK):
        k = np.arange(lo, min(n, lo + _CHUNK))
        ta = t0 + k * dt
        ha, hm, hb = _eval(h, ta), _eval(h, ta + 0.5 * dt), _eval(h, ta + dt)
        for j in range(k.size):
            k1 = -1j * ha[j] @ psi
            k2 = -1j * hm[j] @ (psi + 0.5 * dt * k1)
            k3 = -1j * hm[j] @ (psi + 0.5 * dt * k2)
            k4 = -1j * hb[j] @ (psi + dt * k3)
            psi = psi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def _run(h, psi0, times, step, method):
    seg = _expm_segment if method == "PiecewiseExpm" else _rk4_segment
    out = [psi0]
    psi = psi0
    for t0, t1 in zip(times[:-1], times[1:]):
        psi = seg(h, psi, t0, t1, step)
        out.append(psi)
    return np.stack(out)


def default_step(h: HamiltonianFn, t0: float, t1: float) -> float:
    ts = np.linspace(t0, t1, 65)
    lam = float(np.max(np.abs(np.linalg.eigvalsh(_eval(h, ts)))))
    return 0.05 / lam if lam > 0 else max(t1 - t0, 1e-12)


def evolve(h: HamiltonianFn, psi0, times, cfg: PropagationConfig = PropagationConfig()) -> np.ndarray:
    """States at each entry of ``times`` (``times[0]`` is the start).

    ``psi0`` may be a vector or a matrix whose columns are propagated
    together. ``h`` maps an array of times to a stack of Hamiltonians
    (rad/us); scalar-only callables are evaluated pointwise.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) < 0):
        raise ContractError("times must be a non-decreasing sequence of length >= 2")
    psi0 = np.asarray(psi0, dtype=complex)
    step = cfg.step or default_step(h, times[0], times[-1])
    lam = float(np.max(np.abs(np.linalg.eigvalsh(_eval(h, times[:1])))))
    if step * lam > 0.1:
        log.warning("step %.3g us resolves eigenfrequency %.3g rad/us poorly", step, lam)

    coarse = _run(h, psi0, times, step, cfg.method)
    if not cfg.check:
        return coarse
    for _ in range(cfg.max_halvings + 1):
        step /= 2.0
        fine = _run(h, psi0, times, step, cfg.method)
        err = float(np.max(np.abs(fine - coarse)))
        if err <= cfg.tolerance:
            return fine
        coarse = fine
    raise ConvergenceError(f"step halving did not reach tolerance {cfg.tolerance} (last change {err:.3g})")


def propagate(h: HamiltonianFn, psi0, t0: float, t1: float,
              cfg: PropagationConfig = PropagationConfig()):
    """Time-ordered evolution of ``psi0`` from ``t0`` to ``t1``."""
    if t1 < t0:
        raise ContractError("t1 must not precede t0")
    vec = psi0.vector if isinstance(psi0, QuantumState) else psi0
    if t1 == t0:
        return psi0
    out = evolve(h, vec, [t0, t1], cfg)[-1]
    if isinstance(psi0, QuantumState):
        return QuantumState(out / np.linalg.norm(out), psi0.basis)
    return out


def global_phase(psi0, psiT) -> tuple[float, float]:
    """Phase ``Omega`` with ``psiT ~ exp(-i Omega) psi0`` and ``1 - |<psi0|psiT>|``."""
    a = psi0.vector if isinstance(psi0, QuantumState) else np.asarray(psi0)
    b = psiT.vector if isinstance(psiT, QuantumState) else np.asarray(psiT)
    amp = np.vdot(a, b)
    if abs(amp) < 0.5:
        raise NonCyclicError(f"overlap {abs(amp):.3f} too small for a cyclic phase")
    return float(-np.angle(amp)), float(1.0 - abs(amp))


@dataclass(frozen=True)
class PhaseResult:
    """Accumulated cyclic phases of the two nuclear branches.

    ``raw_rate`` is ``(Omega_up - Omega_down) / duration``;
    ``delta_omega_rate`` subtracts the bare hyperfine rate ``A_par``.
    """

    omega_up: float
    omega_down: float
    raw_rate: float
    delta_omega_rate: float
    cyclicity: tuple[float, float]
    duration: float
    cycles: int
    history: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def pi_time(self) -> float:
        if self.delta_omega_rate == 0:
            return math.inf
        return math.pi / abs(self.delta_omega_rate)


def gate_step(r: RotatingField) -> float:
    return 1.0 / (abs(r.omega) * STEPS_PER_FAST_PERIOD)


def branch_phases(states: np.ndarray, history: bool = False):
    """Unwrapped cumulative phases and final cyclicity per column.

    ``states`` has shape (checkpoints, dim, branches); the phase at each
    checkpoint is taken against the initial state, then unwrapped. With
    ``history`` the full (checkpoints, branches) phase table is returned
    instead of the final row.
    """
    psi0 = states[0]
    amps = np.einsum("db,kdb->kb", psi0.conj(), states)
    if np.any(np.abs(amps) < 0.5):
        raise NonCyclicError("evolution left the initial ray during gating")
    phases = np.unwrap(-np.angle(amps), axis=0)
    return (phases if history else phases[-1]), 1.0 - np.abs(amps[-1])


def run_gate(c: SpinConstants, s: StaticFields, r: RotatingField,
             cfg: PropagationConfig | None = None, bias: float = 0.0) -> PhaseResult:
    """Prepare under static fields, switch suddenly to the drive, propagate.

    Both nuclear branches start in the static eigenstate ``|1'>`` matching
    their nuclear state. Phases are sampled once per slow-rotation period
    and unwrapped.
    """
    if abs(r.duration / r.period - r.n_cycles) > 1e-6:
        log.warning("duration %.6g us is not an integer number of slow periods; using %d",
                    r.duration, r.n_cycles)
    cfg = cfg or PropagationConfig()
    if cfg.step is None:
        cfg = replace(cfg, step=gate_step(r))
    psi0 = branch_inputs(c, s)
    times = r.period * np.arange(r.n_cycles + 1)
    states = evolve(lambda t: h_rotating(c, r, t, bias=bias), psi0, times, cfg)
    table, cyc = branch_phases(states, history=True)
    omegas = table[-1]
    T = float(times[-1])
    raw = float(omegas[0] - omegas[1]) / T
    return PhaseResult(
        omega_up=float(omegas[0]), omega_down=float(omegas[1]), raw_rate=raw,
        delta_omega_rate=raw - to_angular(c.A_par_N),
        cyclicity=(float(cyc[0]), float(cyc[1])), duration=T, cycles=r.n_cycles,
        history=np.column_stack([times, table]))
