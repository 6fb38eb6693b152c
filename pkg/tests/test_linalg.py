import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvphase.errors import ContractError, DimensionError
from nvphase.hamiltonian import I2, I_Z, SIGMA_X, SIGMA_Z
from nvphase.linalg import (dagger, eig_hermitian, expm_unitary, expm_unitary_batch, kron,
                            ordered_product)

from conftest import random_hermitian


def test_kron_identity_cases():
    assert np.array_equal(kron(I2, I2), np.eye(4))
    assert np.array_equal(kron(SIGMA_Z, I2), np.diag([1, 1, -1, -1]))
    assert np.array_equal(kron(SIGMA_Z, I_Z), np.diag([0.5, -0.5, -0.5, 0.5]))


def test_kron_index_layout(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    k = kron(a, b)
    for i, j, p, q in [(0, 1, 2, 0), (1, 0, 1, 2), (1, 1, 0, 0)]:
        assert k[i * 3 + p, j * 3 + q] == a[i, j] * b[p, q]


def test_kron_overflow():
    with pytest.raises(DimensionError):
        kron(np.eye(4), np.eye(3))


def test_kron_associative(rng):
    a, b, c = (random_hermitian(rng, 2) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-14


def test_eig_paulis():
    w, _ = eig_hermitian(SIGMA_Z)
    assert np.allclose(w, [-1, 1])
    w, v = eig_hermitian(SIGMA_X)
    assert np.allclose(w, [-1, 1])
    assert np.allclose(v[:, 0], np.array([1, -1]) / math.sqrt(2))
    assert np.allclose(v[:, 1], np.array([1, 1]) / math.sqrt(2))


def test_eig_two_by_two_quadratic_oracle():
    w0 = 2.3
    h = np.array([[w0 / 2, w0 / 2], [w0 / 2, -w0 / 2]], dtype=complex)
    # Characteristic polynomial lambda^2 - (w0^2/4 + w0^2/4) = 0.
    root = math.sqrt(w0 ** 2 / 4 + w0 ** 2 / 4)
    assert np.allclose(eig_hermitian(h)[0], [-root, root], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 2 ** 31))
def test_eig_reconstructs(n, seed):
    m = random_hermitian(np.random.default_rng(seed), n, 3.0)
    w, v = eig_hermitian(m)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs((v * w) @ dagger(v) - m)) < 1e-10
    assert np.max(np.abs(dagger(v) @ v - np.eye(n))) < 1e-10
    assert np.max(np.abs(m @ v - v * w)) < 1e-10


def test_eig_degenerate_cluster_orthonormal():
    m = np.diag([1.0, 1.0, 1.0, -2.0]).astype(complex)
    u = expm_unitary(np.array([[0, 1, 0, 0], [1, 0, 1j, 0], [0, -1j, 0, 0], [0, 0, 0, 1]],
                              dtype=complex), 0.3)
    w, v = eig_hermitian(u @ m @ dagger(u))
    assert np.allclose(w, [-2, 1, 1, 1])
    assert np.max(np.abs(dagger(v) @ v - np.eye(4))) < 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(ContractError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_expm_cases(rng):
    assert np.allclose(expm_unitary(random_hermitian(rng, 4), 0.0), np.eye(4))
    u = expm_unitary(SIGMA_Z * math.pi / 2, 1.0)
    assert np.allclose(u, np.diag([np.exp(-1j * math.pi / 2), np.exp(1j * math.pi / 2)]))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 2 ** 31), t=st.floats(-5, 5))
def test_expm_unitary_and_group_property(n, seed, t):
    h = random_hermitian(np.random.default_rng(seed), n)
    u = expm_unitary(h, t)
    assert np.max(np.abs(u @ dagger(u) - np.eye(n))) < 1e-12
    assert np.max(np.abs(u @ expm_unitary(h, -t) - np.eye(n))) < 1e-12


def test_batch_matches_reference(rng):
    hs = np.stack([random_hermitian(rng, 4) for _ in range(5)])
    ub = expm_unitary_batch(hs, 0.7)
    for h, u in zip(hs, ub):
        assert np.max(np.abs(u - expm_unitary(h, 0.7))) < 1e-12


def test_ordered_product_order(rng):
    us = np.stack([expm_unitary(random_hermitian(rng, 3), 1.0) for _ in range(7)])
    ref = np.eye(3)
    for u in us:
        ref = u @ ref
    assert np.max(np.abs(ordered_product(us) - ref)) < 1e-12
