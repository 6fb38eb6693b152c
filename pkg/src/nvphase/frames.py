"""Rotating-frame chain and the closed-form gate results.

The rotated Pauli frame attached to the drive plane at azimuth ``phi`` is

    sx'(phi) = sz
    sy'(phi) = cos(phi) sx + sin(phi) sy
    sz'(phi) = -sin(phi) sx + cos(phi) sy = exp(-i phi sz/2) sy exp(i phi sz/2)

so that the lab drive reads ``omega1 (cos wt sx' + sin wt sy')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, SingularParameterError
from .hamiltonian import I2, I_Z, SIGMA_X, SIGMA_Y, SIGMA_Z, SZ_IZ, h_static
from .linalg import dagger, expm_unitary, kron
from .model import QuantumState, SpinConstants, StaticFields, to_angular


def _rz(angle: float) -> np.ndarray:
    """exp(-i angle sz / 2)."""
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def _ry(angle: float) -> np.ndarray:
    """exp(-i angle sy / 2)."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotated_paulis(phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sx', sy', sz') expressed in the NV (x, y, z) frame."""
    c, s = math.cos(phi), math.sin(phi)
    return SIGMA_Z.copy(), c * SIGMA_X + s * SIGMA_Y, -s * SIGMA_X + c * SIGMA_Y


def u1(t: float, phi: float, omega: float, form: str = "product") -> np.ndarray:
    """First rotating-frame unitary, ``omega`` in rad/us.

    ``form="product"`` builds ``Rz(phi) Ry(omega t) Rz(-phi)``;
    ``form="axis"`` exponentiates ``(omega/2) sz'(phi)`` directly.
    """
    if form == "axis":
        return expm_unitary(0.5 * omega * rotated_paulis(phi)[2], t)
    if form != "product":
        raise ValueError(f"unknown form {form!r}")
    return _rz(phi) @ _ry(omega * t) @ _rz(-phi)


def h1_rotating_frame(omega1: float, omega: float, phi: float) -> np.ndarray:
    """omega1 sx'(phi) - (omega / 2) sz'(phi)."""
    sxp, _, szp = rotated_paulis(phi)
    return omega1 * sxp - 0.5 * omega * szp


def v1_perturbation(t: float, omega: float, phi: float, A_par: float) -> np.ndarray:
    """Hyperfine term seen in the first rotating frame (4x4)."""
    sxp, _, szp = rotated_paulis(phi)
    r = expm_unitary(0.5 * omega * szp, t)
    return A_par * kron(dagger(r) @ sxp @ r, I_Z)


def lab_drive(omega1: float, omega: float, phi: float, t: float, A_par: float = 0.0) -> np.ndarray:
    """Lab drive in rad/us at fixed azimuth (4x4 when ``A_par`` is included)."""
    sxp, syp, _ = rotated_paulis(phi)
    e = omega1 * (math.cos(omega * t) * sxp + math.sin(omega * t) * syp)
    return kron(e, I2) + A_par * SZ_IZ


@dataclass(frozen=True)
class H2Result:
    exact: np.ndarray
    approx: np.ndarray
    delta: float
    plus: np.ndarray
    minus: np.ndarray


def h2_effective(omega1: float, omega: float, omega_prime: float) -> H2Result:
    """Second-frame Hamiltonian, its fast-rotation limit and the near-eigenvectors."""
    delta = 2.0 * (omega1 - omega_prime / 2.0) / omega
    exact = (omega1 - omega_prime / 2.0) * SIGMA_Z - 0.5 * omega * SIGMA_Y
    approx = -0.5 * omega * SIGMA_Y
    norm = math.sqrt(2.0 * (1.0 + delta))
    plus = np.array([1j * (1.0 + delta), 1.0]) / norm
    minus = np.array([1.0, 1j * (1.0 + delta)]) / norm
    return H2Result(exact, approx, delta, plus, minus)


def u2(t: float, omega_prime: float, phi0: float = 0.0) -> np.ndarray:
    """Second-frame unitary ``exp(-i (omega' t + phi0) sz / 2)``."""
    return _rz(omega_prime * t + phi0)


def interaction_perturbation(t: float, omega1: float, omega: float, omega_prime: float,
                             A_par: float, phi0: float = 0.0) -> np.ndarray:
    """exp(i H2 t) U2^dag V1 U2 exp(-i H2 t) with ``phi = omega' t + phi0``."""
    h2 = kron(h2_effective(omega1, omega, omega_prime).exact, I2)
    w2 = kron(u2(t, omega_prime, phi0), I2)
    v1 = v1_perturbation(t, omega, omega_prime * t + phi0, A_par)
    e = expm_unitary(h2, t)
    return dagger(e) @ dagger(w2) @ v1 @ w2 @ e


def frame_chain_u(t: float, omega1: float, omega: float, omega_prime: float) -> np.ndarray:
    """U1(t) U2(t) exp(-i H2 t) on the electron, with ``phi = omega' t``."""
    h2 = h2_effective(omega1, omega, omega_prime).exact
    return u1(t, omega_prime * t, omega) @ u2(t, omega_prime) @ expm_unitary(h2, t)


def analytic_u(t: float, omega_prime: float, A_par: float) -> np.ndarray:
    """Closed-form lab evolution ``exp(-i w't sz/2) exp(-i A t sz Iz)`` (4x4, diagonal)."""
    z = np.real(np.diag(SZ_IZ))
    e = np.array([1.0, 1.0, -1.0, -1.0])
    return np.diag(np.exp(-1j * (0.5 * omega_prime * t * e + A_par * t * z)))


@dataclass(frozen=True)
class StaticEigensystem:
    """Closed-form eigenpairs of the static Hamiltonian.

    Eigenvector columns are ordered ``|1'u>, |1'd>, |-1'u>, |-1'd>`` and
    ``eigenvalues`` (rad/us) follow the same order.
    """

    theta_up: float
    theta_down: float
    c_up: float
    c_down: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def nuclear_splitting(self) -> float:
        """Energy of ``|1'u>`` minus ``|1'd>`` in rad/us."""
        return float(self.eigenvalues[0] - self.eigenvalues[1])


def static_eigensystem(c: SpinConstants, s: StaticFields) -> StaticEigensystem:
    b0 = to_angular(s.gammaB0)
    e = to_angular(s.dE0)
    half_a = 0.5 * to_angular(c.A_par_N)
    thetas, norms, radii = [], [], []
    for b in (b0 + half_a, b0 - half_a):
        r = math.hypot(b, e)
        if r == 0.0:
            raise DegenerateError("static Hamiltonian is degenerate (B0 = E0 = 0 with A_par = 0)")
        thetas.append(math.atan2(e, b))
        norms.append(math.hypot(b + r, e))
        radii.append(r)
    vecs = np.zeros((4, 4), dtype=complex)
    for k, th in enumerate(thetas):
        ch, sh = math.cos(th / 2), math.sin(th / 2)
        vecs[k, k] = ch
        vecs[2 + k, k] = sh
        vecs[k, 2 + k] = sh
        vecs[2 + k, 2 + k] = -ch
    vals = np.array([radii[0], radii[1], -radii[0], -radii[1]])
    return StaticEigensystem(thetas[0], thetas[1], norms[0], norms[1], vals, vecs)


def branch_inputs(c: SpinConstants, s: StaticFields) -> np.ndarray:
    """Columns ``|1'u>|u>`` and ``|1'd>|d>`` (4x2)."""
    return static_eigensystem(c, s).eigenvectors[:, :2].copy()


def prepare_input(c: SpinConstants, s: StaticFields) -> QuantumState:
    v = branch_inputs(c, s).sum(axis=1) / math.sqrt(2.0)
    return QuantumState(v)


def check_static_eigensystem(c: SpinConstants, s: StaticFields) -> float:
    """Largest residual of ``H v - lambda v`` for the closed-form eigenpairs."""
    es = static_eigensystem(c, s)
    h = h_static(c, s)
    return float(np.max(np.abs(h @ es.eigenvectors - es.eigenvectors * es.eigenvalues)))


@dataclass(frozen=True)
class GateSpeedReport:
    """Three closed-form tiers of the nuclear gate speed, all in rad/us.

    ``exact`` is the full hyperfine-difference expression, ``approx`` its
    large-field limit. ``geometric_part`` (= ``approx - A_par``) and
    ``geometric_exact`` (= ``exact - A_par``) remove the bare hyperfine rate,
    which drops out when the nuclear phase is read in a frame rotating at the
    static nuclear splitting.
    """

    exact: float
    approx: float
    geometric_part: float
    geometric_exact: float
    hyperfine_part: float

    @property
    def pi_gate_time(self) -> float:
        """Time (us) for a relative phase of pi from the geometric part."""
        if self.geometric_part == 0:
            return math.inf
        return math.pi / abs(self.geometric_part)


def speed_tiers(c: SpinConstants, gammaB, dE, omega_prime):
    """Vectorized (exact, approx) gate speeds in rad/us; field inputs in MHz."""
    a = to_angular(c.A_par_N)
    b = to_angular(np.asarray(gammaB, dtype=float))
    e = to_angular(np.asarray(dE, dtype=float))
    wp = to_angular(omega_prime)
    bp, bm = b + a / 2.0, b - a / 2.0
    if np.any(b == 0) or np.any(bp == 0) or np.any(bm == 0):
        raise SingularParameterError("gate speed is singular at gammaB0 = 0 or gammaB0 = +-A_par/2")
    exact = a - 0.5 * e * (e / bp - e / bm) - 0.25 * wp * ((e / bp) ** 2 - (e / bm) ** 2)
    approx = a + 0.5 * wp * (e / b) ** 2 * (a / b)
    return exact, approx


def gate_speed(c: SpinConstants, s: StaticFields, omega_prime: float) -> GateSpeedReport:
    """Gate speed for slow rotation ``omega_prime`` (MHz, cyclic)."""
    a = to_angular(c.A_par_N)
    exact, approx = (float(v) for v in speed_tiers(c, s.gammaB0, s.dE0, omega_prime))
    return GateSpeedReport(exact=exact, approx=approx, geometric_part=approx - a,
                           geometric_exact=exact - a, hyperfine_part=a)


def cos_theta_approx(c: SpinConstants, s: StaticFields) -> tuple[float, float]:
    """Large-field expansion of cos(theta) for the up and down branches."""
    out = []
    for sign in (1.0, -1.0):
        x = s.dE0 / (s.gammaB0 + sign * c.A_par_N / 2.0)
        out.append(1.0 - 0.5 * x * x)
    return out[0], out[1]
