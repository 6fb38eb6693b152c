"""Physical constants, field programs and unit conventions.

Frequencies in the dataclasses are cyclic (value/2pi, MHz); everything the
physics modules compute internally is angular (rad/us) with time in us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

TWO_PI = 2.0 * math.pi


def to_angular(f):
    """MHz (cyclic) -> rad/us."""
    return TWO_PI * f


def from_angular(w):
    """rad/us -> MHz (cyclic)."""
    return w / TWO_PI


@dataclass(frozen=True)
class SpinConstants:
    """NV-15N(-13C) constants.

    ``D``, ``A_par_N``, ``A_perp_N``, ``A_par_C`` in MHz, ``d_perp`` in
    Hz cm/V, ``gamma_e`` in MHz/mT.
    """

    D: float = 2870.0
    A_par_N: float = 3.03
    A_perp_N: float = 3.65
    A_par_C: float = 14.0
    d_perp: float = 17.0
    gamma_e: float = 28.025

    def __post_init__(self):
        if self.D <= 0:
            raise ContractError("D must be positive")
        for name in ("A_par_N", "A_perp_N", "A_par_C", "d_perp", "gamma_e"):
            if getattr(self, name) < 0:
                raise ContractError(f"{name} must be non-negative")


@dataclass(frozen=True)
class StaticFields:
    """Static preparation fields and their error models (MHz unless noted)."""

    gammaB0: float = 20.0
    dE0: float = 4.0
    deltaB: float = 0.02
    shiftB: float = 0.0  # Delta B / B0
    shiftE: float = 0.0  # Delta E / E0

    def __post_init__(self):
        if self.gammaB0 < 0 or self.dE0 < 0:
            raise ContractError("gammaB0 and dE0 must be non-negative")
        if self.deltaB < 0:
            raise ContractError("deltaB must be non-negative")
        if abs(self.shiftB) >= 0.5 or abs(self.shiftE) >= 0.5:
            raise ContractError("systematic shifts must satisfy |shift| < 0.5")


@dataclass(frozen=True)
class RotatingField:
    """Drive used during gating.

    ``omega1`` defaults to ``omega_prime / 2`` so that the detuning
    ``delta = 2 (omega1 - omega_prime / 2) / omega`` vanishes. ``duration``
    defaults to ten slow-rotation periods.
    """

    omega_prime: float = 1000.0
    omega: float = 40000.0
    omega1: float | None = None
    phi0: float = 0.0
    duration: float | None = None

    def __post_init__(self):
        if self.omega1 is None:
            object.__setattr__(self, "omega1", self.omega_prime / 2.0)
        if self.omega_prime == 0:
            raise ContractError("omega_prime must be non-zero")
        if self.duration is None:
            object.__setattr__(self, "duration", 10.0 * self.period)
        if self.duration <= 0:
            raise ContractError("duration must be positive")

    @property
    def period(self) -> float:
        """Slow-rotation period 2pi/omega' in us."""
        return 1.0 / abs(self.omega_prime)

    @property
    def n_cycles(self) -> int:
        return max(1, int(round(self.duration / self.period)))

    @property
    def delta(self) -> float:
        return 2.0 * (self.omega1 - self.omega_prime / 2.0) / self.omega


def basis_labels(dim: int) -> tuple[str, ...]:
    electron = ("1", "-1")
    nuclear = ("u", "d")
    labels = [e + n for e in electron for n in nuclear]
    if dim == 4:
        return tuple(labels)
    if dim == 8:
        return tuple(l + c for l in labels for c in ("U", "D"))
    raise ContractError(f"unsupported state dimension {dim}")


@dataclass(frozen=True)
class QuantumState:
    """Normalized state over electron x 15N (x 13C).

    Labels use ``1``/``-1`` for the electron, ``u``/``d`` for 15N and
    ``U``/``D`` for 13C, e.g. ``"1u"`` or ``"-1dU"``.
    """

    vector: np.ndarray
    basis: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ContractError(f"state norm {np.linalg.norm(v)!r} differs from 1")
        object.__setattr__(self, "vector", v)
        if not self.basis:
            object.__setattr__(self, "basis", basis_labels(v.size))

    @property
    def dim(self) -> int:
        return self.vector.size


@dataclass(frozen=True)
class RegimeDiagnostic:
    name: str
    value: float
    threshold: float
    ok: bool
    message: str

    @property
    def status(self) -> str:
        return "pass" if self.ok else "warn"


def validate_regime(c: SpinConstants, s: StaticFields, r: RotatingField) -> list[RegimeDiagnostic]:
    """Check the approximations the closed forms rely on.

    Nothing here raises; out-of-regime parameters only produce ``warn``
    entries so analytic/numeric divergence can be studied.
    """

    def ratio(num, den):
        return abs(num / den) if den != 0 else math.inf

    out = []
    red = ratio(c.A_perp_N, c.D - s.gammaB0) ** 2
    out.append(RegimeDiagnostic(
        "two_level_reduction", red, 1e-4, red <= 1e-4,
        "flip-flop terms negligible" if red <= 1e-4 else "flip-flop terms not negligible"))
    amp = ratio(r.omega1, c.A_par_N) ** 2
    out.append(RegimeDiagnostic(
        "amplitude_threshold", amp, 1e-7, amp > 1e-7,
        "drive amplitude above threshold" if amp > 1e-7 else "suppressed by orthogonal field"))
    adia = ratio(r.omega_prime, r.omega)
    out.append(RegimeDiagnostic(
        "adiabaticity", adia, 0.05, adia <= 0.05,
        "slow rotation adiabatic" if adia <= 0.05 else "omega'/omega not small"))
    fast = ratio(r.omega, r.omega_prime - 2.0 * r.omega1)
    out.append(RegimeDiagnostic(
        "fast_rotation", fast, 20.0, fast >= 20.0,
        "fast rotation dominates detuning" if fast >= 20.0 else "detuning comparable to omega"))
    e_ratio = ratio(s.dE0, s.gammaB0)
    out.append(RegimeDiagnostic(
        "large_field_E", e_ratio, 0.2, e_ratio <= 0.2,
        "dE0 << gammaB0" if e_ratio <= 0.2 else "electric field not small against B0"))
    a_ratio = ratio(c.A_par_N, s.gammaB0)
    out.append(RegimeDiagnostic(
        "large_field_A", a_ratio, 0.2, a_ratio <= 0.2,
        "A_par << gammaB0" if a_ratio <= 0.2 else "hyperfine not small against B0"))
    return out


def gammaB_from_field(B_mT: float, c: SpinConstants = SpinConstants()) -> float:
    """Magnetic field in mT -> gamma_e B / 2pi in MHz."""
    return c.gamma_e * B_mT


def field_from_gammaB(gammaB: float, c: SpinConstants = SpinConstants()) -> float:
    return gammaB / c.gamma_e


def dE_from_field(E_V_cm: float, c: SpinConstants = SpinConstants()) -> float:
    """Electric field in V/cm -> d_perp E / 2pi in MHz."""
    return c.d_perp * 1e-6 * E_V_cm


def field_from_dE(dE: float, c: SpinConstants = SpinConstants()) -> float:
    return dE / (c.d_perp * 1e-6)
