"""Test-instance generators with exact index symmetries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sosfact.tensor import (
    HamiltonianInstance,
    _antisym_combination,
    _mirror_symmetrize,
    antisymmetrize,
)


def random_valid(n_modes: int, seed=None) -> np.ndarray:
    """Random two-body tensor with every index symmetry satisfied exactly.

    A standard-normal rank-4 array is antisymmetrized in each index pair and
    then symmetrized under the realness mirror. Deterministic in ``seed``.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_modes,) * 4)
    return np.ascontiguousarray(_mirror_symmetrize(_antisym_combination(g)))


def real_basis_instance(n_modes: int, rank: int, seed=None) -> np.ndarray:
    """Antisymmetrized tensor with the structure induced by real orbitals.

    Raw elements are ``v[p,q,r,s] = sum_k w_k M_k[p,s] M_k[q,r]`` with random
    real symmetric ``M_k`` and real weights ``w_k``.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    if rank < 0:
        raise ValueError("rank must be non-negative")
    rng = np.random.default_rng(seed)
    v = np.zeros((n_modes,) * 4)
    for _ in range(rank):
        g = rng.standard_normal((n_modes, n_modes))
        mk = 0.5 * (g + g.T)
        v += rng.standard_normal() * np.einsum("ps,qr->pqrs", mk, mk)
    return antisymmetrize(v)


@dataclass(frozen=True)
class RingModelParams:
    """Plane waves on a ring of circumference ``ring_length`` with a Gaussian pair potential.

    Mode index ``i`` carries momentum quantum number ``j = i - (n_modes - 1) // 2``,
    i.e. ``j`` runs over ``-m..m`` for ``n_modes = 2m + 1``.
    """

    n_modes: int
    ring_length: float = 10.0
    potential_strength: float = 1.0
    potential_width: float = 1.0

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be at least 1")
        if not self.ring_length > 0:
            raise ValueError("ring_length must be positive")
        if not self.potential_width > 0:
            raise ValueError("potential_width must be positive")
        if not self.potential_strength > 0:
            raise ValueError("potential_strength must be positive")

    @property
    def momentum_numbers(self) -> np.ndarray:
        return np.arange(self.n_modes) - (self.n_modes - 1) // 2

    @property
    def momenta(self) -> np.ndarray:
        return 2.0 * np.pi * self.momentum_numbers / self.ring_length

    def potential_ft(self, k):
        """Fourier profile ``V0 * exp(-k**2 sigma**2 / 2)``."""
        return self.potential_strength * np.exp(-0.5 * (k * self.potential_width) ** 2)


def ring_matrix_elements(params: RingModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Kinetic matrix ``f`` and raw interaction elements ``v`` of the ring model.

    ``v[p,q,r,s] = V(k_p - k_s) / L`` when ``j_p + j_q == j_r + j_s`` and zero
    otherwise.
    """
    j = params.momentum_numbers
    k = params.momenta
    conserve = (
        j[:, None, None, None] + j[None, :, None, None]
        == j[None, None, :, None] + j[None, None, None, :]
    )
    transfer = k[:, None, None, None] - k[None, None, None, :]
    v = np.where(conserve, params.potential_ft(transfer) / params.ring_length, 0.0)
    f = np.diag(0.5 * k**2).astype(complex)
    return f, v


def ring_planewave(params: RingModelParams) -> HamiltonianInstance:
    """Ring-model Hamiltonian: complex plane-wave basis, real antisymmetrized tensor."""
    f, v = ring_matrix_elements(params)
    label = (
        f"ring n_modes={params.n_modes} L={params.ring_length} "
        f"V0={params.potential_strength} sigma={params.potential_width}"
    )
    return HamiltonianInstance(f, antisymmetrize(v), label)


def momentum_operator_coefficients(params: RingModelParams) -> np.ndarray:
    """Diagonal one-body matrix of the total momentum number ``sum_p j_p n_p``."""
    return np.diag(params.momentum_numbers.astype(float))
