from __future__ import annotations

import itertools

import numpy as np
import pytest

from sosfact.assemble import FactoredHamiltonian, factorize_hamiltonian
from sosfact.exceptions import SizeGuardError
from sosfact.factorize import FactorSlice, Parity, diagonalize_slice
from sosfact.fock import (
    build_from_factored,
    build_from_tensor,
    compare_spectra,
    fit_loglog_slope,
    number_operator,
    one_body_operator,
    slice_operator,
    trotter_scan,
)
from sosfact.generators import (
    RingModelParams,
    momentum_operator_coefficients,
    random_valid,
    ring_planewave,
)
from sosfact.tensor import HamiltonianInstance


def dense_ladder(n):
    """Annihilation operators built by Kronecker products, an independent oracle."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ops = []
    for p in range(n):
        # mode p is bit p, i.e. the p-th factor from the right
        factors = [np.eye(2)] * (n - 1 - p) + [a] + [z] * p
        op = np.array([[1.0]])
        for f in factors:
            op = np.kron(op, f)
        ops.append(op)
    return ops


def kron_hamiltonian(f, h):
    n = f.shape[0]
    c = dense_ladder(n)
    cd = [x.T for x in c]
    H = np.zeros((1 << n, 1 << n), dtype=complex)
    for p, q in itertools.product(range(n), repeat=2):
        H += f[p, q] * cd[p] @ c[q]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if h[p, q, r, s]:
            H += 0.5 * h[p, q, r, s] * cd[p] @ cd[q] @ c[r] @ c[s]
    return H


def test_kron_ladder_anticommutes():
    c = dense_ladder(3)
    for p, q in itertools.product(range(3), repeat=2):
        anti = c[p] @ c[q].T + c[q].T @ c[p]
        np.testing.assert_array_equal(anti, np.eye(8) * (p == q))


def test_two_mode_energy(two_mode_h):
    H = build_from_tensor(HamiltonianInstance.from_two_body(two_mode_h))
    expected = np.zeros((4, 4))
    expected[3, 3] = 2.0
    np.testing.assert_allclose(H, expected, atol=1e-15)


def test_diagonal_one_body():
    eps = np.array([0.3, -1.25])
    H = build_from_tensor(HamiltonianInstance(np.diag(eps), np.zeros((2,) * 4)))
    np.testing.assert_allclose(H, np.diag([0.0, eps[0], eps[1], eps.sum()]), atol=0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_matches_kron_oracle(n):
    rng = np.random.default_rng(n)
    f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    f = f + f.conj().T
    h = random_valid(n, seed=n)
    H = build_from_tensor(HamiltonianInstance(f, h))
    np.testing.assert_allclose(H, kron_hamiltonian(f, h), atol=1e-13)


def test_hermitian_and_number_conserving():
    inst = ring_planewave(RingModelParams(5))
    H = build_from_tensor(inst)
    np.testing.assert_allclose(H, H.conj().T, atol=1e-14)
    N = number_operator(5).toarray()
    np.testing.assert_allclose(H @ N - N @ H, 0.0, atol=1e-13)
    occ = np.array([bin(i).count("1") for i in range(32)])
    mask = occ[:, None] != occ[None, :]
    assert np.max(np.abs(H[mask])) == 0.0


def test_momentum_conserved():
    params = RingModelParams(5)
    H = build_from_tensor(ring_planewave(params))
    J = one_body_operator(momentum_operator_coefficients(params), 5).toarray()
    np.testing.assert_allclose(H @ J - J @ H, 0.0, atol=1e-13)


def test_factored_two_mode(two_mode_h):
    inst = HamiltonianInstance.from_two_body(two_mode_h)
    exact = build_from_tensor(inst)
    factored = build_from_factored(factorize_hamiltonian(inst))
    assert np.max(np.abs(exact - factored)) < 1e-12


def test_factored_empty():
    fh = FactoredHamiltonian(np.zeros((3, 3)), np.zeros((3, 3)), ())
    np.testing.assert_array_equal(build_from_factored(fh), 0.0)


@pytest.mark.parametrize(
    "inst",
    [
        ring_planewave(RingModelParams(4)),
        HamiltonianInstance.from_two_body(random_valid(5, seed=3)),
    ],
    ids=["ring4", "random5"],
)
def test_factored_matches_exact(inst):
    exact = build_from_tensor(inst)
    factored = build_from_factored(factorize_hamiltonian(inst))
    assert np.max(np.abs(exact - factored)) < 1e-10


def test_antisymmetric_term_sign():
    # a single antisymmetric slice: V = -1/2 w T^2 with T Hermitian
    A = np.array([[0, 1], [-1, 0]]) / np.sqrt(2)
    fs = diagonalize_slice(FactorSlice(1.0, Parity.ANTISYMMETRIC, A))
    V = slice_operator(fs).toarray()
    c = dense_ladder(2)
    O = sum(A[p, q] * c[p].T @ c[q] for p in range(2) for q in range(2))
    np.testing.assert_allclose(V, 0.5 * O @ O, atol=1e-15)


def test_compare_spectra():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((8, 8))
    A = X + X.T
    assert compare_spectra(A, A) == 0.0
    assert compare_spectra(A, A + 0.125 * np.eye(8)) == pytest.approx(0.125, abs=1e-13)
    with pytest.raises(ValueError):
        compare_spectra(A, np.eye(4))


def test_compare_spectra_random_six():
    inst = HamiltonianInstance.from_two_body(random_valid(6, seed=1))
    err = compare_spectra(build_from_tensor(inst), build_from_factored(factorize_hamiltonian(inst)))
    assert err < 1e-9


def test_size_guard():
    with pytest.raises(SizeGuardError):
        build_from_tensor(HamiltonianInstance.from_two_body(np.zeros((13,) * 4)))


def test_trotter_commuting_case():
    S = np.diag([1.0, 0.5, -0.25])
    fs = diagonalize_slice(FactorSlice(0.7, Parity.SYMMETRIC, S / np.linalg.norm(S)))
    fh = FactoredHamiltonian(np.diag([0.1, 0.2, 0.3]), np.diag([0.0, 1.0, 2.0]), (fs,))
    res = trotter_scan(fh, [0.0, 0.1, 0.2])
    assert max(res.errors) < 1e-13
    assert res.errors[0] == 0.0


def test_trotter_quadratic_random():
    fh = factorize_hamiltonian(HamiltonianInstance.from_two_body(random_valid(4, seed=0)))
    res = trotter_scan(fh, [0.2, 0.1, 0.05, 0.025])
    ratios = np.array(res.errors[:-1]) / np.array(res.errors[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))
    assert 1.9 <= res.fitted_slope <= 2.1


def test_trotter_rejects_bad_steps(two_mode_h):
    fh = factorize_hamiltonian(HamiltonianInstance.from_two_body(two_mode_h))
    with pytest.raises(ValueError):
        trotter_scan(fh, [])
    with pytest.raises(ValueError):
        trotter_scan(fh, [-0.1])


def test_slope_fit():
    dts = np.array([0.2, 0.1, 0.05])
    assert fit_loglog_slope(dts, 3.0 * dts**2) == pytest.approx(2.0, abs=1e-12)
    assert np.isnan(fit_loglog_slope(dts, [1e-3, 1e-15, 1e-4]))
    assert fit_loglog_slope([0.0, 0.1, 0.2], [0.0, 0.01, 0.04]) == pytest.approx(2.0)
    assert np.isnan(fit_loglog_slope([0.1], [0.01]))
    res = trotter_scan(
        FactoredHamiltonian(np.zeros((2, 2)), np.zeros((2, 2)), ()), [0.1, 0.2]
    )
    assert res.as_dict()["fitted_slope"] == "nan"
