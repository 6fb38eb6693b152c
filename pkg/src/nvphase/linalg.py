"""Dense complex linear algebra for matrices of dimension <= 8.

Hermitian eigenproblems are solved with a cyclic complex Jacobi sweep. The
batched exponential used by the time integrator goes through LAPACK instead,
since it runs on tens of thousands of matrices per propagation.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, ConvergenceError, DimensionError

MAX_DIM = 8
HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9
_MAX_SWEEPS = 60


def _square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    """Kronecker product, refusing results larger than ``MAX_DIM``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise DimensionError(f"kron result dimension {dim} exceeds {MAX_DIM}")
    return np.kron(a, b)


def kron_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product broadcast over leading axes of ``a`` and ``b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n, m = a.shape[-1], b.shape[-1]
    if n * m > MAX_DIM:
        raise DimensionError(f"kron result dimension {n * m} exceeds {MAX_DIM}")
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(out.shape[:-4] + (n * m, n * m))


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= 1e-14 * scale:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-18 * scale:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                sign = 1.0 if theta >= 0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                g = np.eye(n, dtype=complex)
                g[p, p] = c
                g[p, q] = s
                g[q, p] = -s * np.conj(phase)
                g[q, q] = c * np.conj(phase)
                a = dagger(g) @ a @ g
                a[p, q] = a[q, p] = 0.0
                v = v @ g
    raise ConvergenceError("Jacobi sweeps did not converge")


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns.

    Eigenvectors inside a degenerate cluster are re-orthonormalized with
    Gram-Schmidt after ordering by the index of their largest component.
    Each vector is phased so that its largest component is real positive.

    Raises
    ------
    ContractError
        If ``m`` is not Hermitian to within ``HERMITIAN_TOL``.
    """
    a = _square(m)
    if not is_hermitian(a):
        raise ContractError("eig_hermitian requires a Hermitian matrix")
    a = 0.5 * (a + dagger(a))
    w, v = _jacobi(a)

    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]

    norm = max(float(np.max(np.abs(a))), 1.0)
    clusters, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] >= DEGENERACY_TOL * norm:
            clusters.append((start, k))
            start = k
    for lo, hi in clusters:
        if hi - lo < 2:
            continue
        block = v[:, lo:hi]
        keys = np.argmax(np.abs(block), axis=0)
        block = block[:, np.argsort(keys, kind="stable")]
        for j in range(block.shape[1]):
            col = block[:, j]
            for i in range(j):
                col = col - np.vdot(block[:, i], col) * block[:, i]
            block[:, j] = col / np.linalg.norm(col)
        v[:, lo:hi] = block

    for j in range(v.shape[1]):
        k = int(np.argmax(np.abs(v[:, j])))
        v[:, j] *= np.conj(v[k, j]) / abs(v[k, j])
    return w, v


def expm_unitary(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h``."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def expm_unitary_batch(hs: np.ndarray, dt) -> np.ndarray:
    """Vectorized ``exp(-i h dt)`` over a stack of Hermitian matrices."""
    w, v = np.linalg.eigh(hs)
    phases = np.exp(-1j * w * np.asarray(dt)[..., None])
    return (v * phases[..., None, :]) @ dagger(v)


def ordered_product(us: np.ndarray) -> np.ndarray:
    """Time-ordered product ``us[n-1] @ ... @ us[0]`` by pairwise reduction."""
    us = np.asarray(us)
    if len(us) == 0:
        raise ContractError("empty product")
    while len(us) > 1:
        if len(us) % 2:
            head = us[1::2] @ us[0:-1:2]
            us = np.concatenate([head, us[-1:]], axis=0)
        else:
            us = us[1::2] @ us[0::2]
    return us[0]
