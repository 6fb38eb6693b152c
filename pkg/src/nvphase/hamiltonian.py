"""Hamiltonians of the NV-15N pair in the fixed product basis.

Reduced (two-level electron) operators act on ``{|1>, |-1>} x {up, down}``
with ``sigma_z = diag(1, -1)`` and ``I_z = diag(1/2, -1/2)``. The full spin-1
Hamiltonian uses ``{|+1>, |0>, |-1>} x {up, down}``. All builders return
angular frequencies in rad/us; time-dependent builders broadcast over an
array of times and return a stack of matrices.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateError
from .linalg import eig_hermitian, kron, kron_batch
from .model import RotatingField, SpinConstants, StaticFields, to_angular

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I_Z = 0.5 * SIGMA_Z
I_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
I_MINUS = I_PLUS.T.copy()

_r2 = np.sqrt(2.0)
S_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _r2
S_Y = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _r2
S_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)
S_PLUS = S_X + 1j * S_Y
S_MINUS = S_X - 1j * S_Y

SZ_IZ = kron(SIGMA_Z, I_Z)


def _hermitize(h):
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def h_full(c: SpinConstants, B: float, Ex: float, Ey: float) -> np.ndarray:
    """Spin-1 ground-state Hamiltonian (6x6); ``B`` in mT, ``E`` in V/cm."""
    gB = to_angular(c.gamma_e * B)
    dx = to_angular(c.d_perp * 1e-6 * Ex)
    dy = to_angular(c.d_perp * 1e-6 * Ey)
    e = (to_angular(c.D) * S_Z @ S_Z + gB * S_Z
         + dx * (S_X @ S_X - S_Y @ S_Y) + dy * (S_X @ S_Y + S_Y @ S_X))
    h = kron(e, I2)
    h = h + to_angular(c.A_par_N) * kron(S_Z, I_Z)
    h = h + 0.5 * to_angular(c.A_perp_N) * (kron(S_PLUS, I_MINUS) + kron(S_MINUS, I_PLUS))
    return _hermitize(h)


def _electron_field(bz, bx, by) -> np.ndarray:
    bz, bx, by = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (bz, bx, by)))
    e = np.empty(bz.shape + (2, 2), dtype=complex)
    e[..., 0, 0] = bz
    e[..., 1, 1] = -bz
    e[..., 0, 1] = bx - 1j * by
    e[..., 1, 0] = bx + 1j * by
    return e


def h_reduced(c: SpinConstants, gammaB, dEx, dEy) -> np.ndarray:
    """gamma_e B sz + d Ex sx + d Ey sy + A_par sz Iz (inputs in MHz)."""
    e = _electron_field(to_angular(gammaB), to_angular(dEx), to_angular(dEy))
    return kron_batch(e, I2) + to_angular(c.A_par_N) * SZ_IZ


def h_rotating(c: SpinConstants, r: RotatingField, t, phi=None, bias: float = 0.0) -> np.ndarray:
    """Lab-frame Hamiltonian during gating.

    The field has magnitude ``omega1`` and rotates at ``omega`` in the plane
    spanned by z and the in-plane direction at azimuth ``phi``. Passing
    ``phi=None`` uses the gating schedule ``phi = omega' t + phi0``.
    ``bias`` (MHz) adds a static ``sigma_z`` term, used when a 13C spin is
    folded in as an effective field.
    """
    t = np.asarray(t, dtype=float)
    if phi is None:
        phi = to_angular(r.omega_prime) * t + r.phi0
    w1 = to_angular(r.omega1)
    wt = to_angular(r.omega) * t
    sin_wt = np.sin(wt)
    e = _electron_field(w1 * np.cos(wt) + to_angular(bias),
                        w1 * sin_wt * np.cos(phi),
                        w1 * sin_wt * np.sin(phi))
    return kron_batch(e, I2) + to_angular(c.A_par_N) * SZ_IZ


def h_static(c: SpinConstants, s: StaticFields, noise=0.0) -> np.ndarray:
    """Static preparation Hamiltonian; ``noise`` is f(t) scaling ``deltaB``."""
    gb = s.gammaB0 + s.deltaB * np.asarray(noise, dtype=float)
    return h_reduced(c, gb, s.dE0, 0.0)


def with_carbon(h4: np.ndarray, c: SpinConstants) -> np.ndarray:
    """Extend 4-dim Hamiltonian(s) with a 13C spin: ``h x 1 + A_C sz Iz_C``."""
    coupling = to_angular(c.A_par_C) * kron(kron(SIGMA_Z, I2), I_Z)
    return kron_batch(h4, I2) + coupling


def h_snapshot(omega1: float, omega0: float) -> np.ndarray:
    """Electron snapshot ``omega1 sx + (omega0 / 2) sz`` (inputs in MHz)."""
    return to_angular(omega1) * SIGMA_X + 0.5 * to_angular(omega0) * SIGMA_Z


def leakage(omega1: float, omega0: float) -> float:
    """Weight of ``|-1>`` in the upper eigenvector of the snapshot Hamiltonian."""
    if omega0 == 0:
        raise DegenerateError("leakage is undefined for omega0 = 0")
    w, v = eig_hermitian(h_snapshot(omega1, abs(omega0)))
    return float(abs(v[1, -1]) ** 2)
