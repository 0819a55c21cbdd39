from __future__ import annotations

import numpy as np
import pytest

from sosfact.assemble import factorize_hamiltonian
from sosfact.generators import (
    RingModelParams,
    random_valid,
    real_basis_instance,
    ring_matrix_elements,
    ring_planewave,
)
from sosfact.factorize import Parity
from sosfact.tensor import HamiltonianInstance, antisymmetrize, validate_symmetries


def test_random_single_mode_is_zero():
    np.testing.assert_array_equal(random_valid(1, seed=0), 0.0)


def test_random_deterministic():
    assert random_valid(4, seed=12).tobytes() == random_valid(4, seed=12).tobytes()
    assert random_valid(4, seed=12).tobytes() != random_valid(4, seed=13).tobytes()


@pytest.mark.parametrize("seed", range(4))
def test_random_exact_symmetries_and_both_parities(seed):
    h = random_valid(5, seed)
    assert validate_symmetries(h, tol=0.0).ok
    fh = factorize_hamiltonian(HamiltonianInstance.from_two_body(h))
    assert fh.n_symmetric > 0 and fh.n_antisymmetric > 0


def test_real_basis_rank_zero():
    np.testing.assert_array_equal(real_basis_instance(3, 0, seed=1), 0.0)


def test_real_basis_valid_and_deterministic():
    h = real_basis_instance(3, 2, seed=4)
    assert validate_symmetries(h).ok
    np.testing.assert_array_equal(h, real_basis_instance(3, 2, seed=4))


@pytest.mark.parametrize("S", [[[1.0, 0.3], [0.3, -2.0]], [[0.5, 0.0], [0.0, 0.5]]])
def test_separable_two_mode_odd_weight(S):
    # exchange makes the odd-sector weight 1/2 det(S), so it vanishes only for singular S
    S = np.asarray(S)
    h = antisymmetrize(np.einsum("ps,qr->pqrs", S, S))
    fh = factorize_hamiltonian(HamiltonianInstance.from_two_body(h))
    odd = [s.weight for s in fh.slices if s.parity is Parity.ANTISYMMETRIC]
    assert odd == [pytest.approx(0.5 * np.linalg.det(S), abs=1e-14)]


def test_separable_singular_has_no_odd_slice():
    S = np.outer([1.0, 2.0], [1.0, 2.0])
    h = antisymmetrize(np.einsum("ps,qr->pqrs", S, S))
    fh = factorize_hamiltonian(HamiltonianInstance.from_two_body(h))
    assert fh.n_antisymmetric == 0


@pytest.mark.parametrize("bad", [dict(n_modes=0), dict(ring_length=0.0),
                                 dict(potential_strength=-1.0), dict(potential_width=0.0)])
def test_ring_params_validated(bad):
    kwargs = dict(n_modes=3, ring_length=10.0, potential_strength=1.0, potential_width=1.0)
    kwargs.update(bad)
    with pytest.raises(ValueError):
        RingModelParams(**kwargs)


def test_ring_momenta():
    params = RingModelParams(5, ring_length=2 * np.pi)
    np.testing.assert_array_equal(params.momentum_numbers, [-2, -1, 0, 1, 2])
    np.testing.assert_allclose(params.momenta, [-2, -1, 0, 1, 2])


def test_ring_raw_elements():
    params = RingModelParams(3, ring_length=10.0, potential_strength=2.0, potential_width=0.5)
    f, v = ring_matrix_elements(params)
    # zero momentum transfer: v = V0 / L
    assert v[0, 2, 2, 0] == pytest.approx(2.0 / 10.0)
    k = params.momenta
    assert v[0, 2, 1, 1] == pytest.approx(
        2.0 * np.exp(-0.5 * ((k[0] - k[1]) * 0.5) ** 2) / 10.0
    )
    assert v[0, 0, 1, 2] == 0.0
    np.testing.assert_allclose(np.diag(f).real, 0.5 * k**2)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ring_instance_valid(n):
    inst = ring_planewave(RingModelParams(n))
    assert validate_symmetries(inst.two_body, tol=1e-13).ok
    assert np.iscomplexobj(inst.one_body)
    np.testing.assert_array_equal(
        inst.two_body, ring_planewave(RingModelParams(n)).two_body
    )
