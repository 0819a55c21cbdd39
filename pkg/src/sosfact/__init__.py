"""Pairwise sum-of-squares factorization of fermionic two-body Hamiltonians."""

from __future__ import annotations

from sosfact.assemble import (
    FactoredHamiltonian,
    factorize_hamiltonian,
    reconstruct_tensor,
    relative_error,
    truncate,
    truncation_scan,
)
from sosfact.estimator import PairwiseFactorization
from sosfact.exceptions import (
    DecompositionError,
    FormatError,
    SizeGuardError,
    SymmetryError,
)
from sosfact.factorize import FactorizationOptions, FactorSlice, Parity
from sosfact.tensor import (
    HamiltonianInstance,
    antisymmetrize,
    effective_one_body,
    group,
    ungroup,
    validate_symmetries,
)

__version__ = "0.1.0"

__all__ = [
    "DecompositionError",
    "FactorSlice",
    "FactoredHamiltonian",
    "FactorizationOptions",
    "FormatError",
    "HamiltonianInstance",
    "PairwiseFactorization",
    "Parity",
    "SizeGuardError",
    "SymmetryError",
    "antisymmetrize",
    "effective_one_body",
    "factorize_hamiltonian",
    "group",
    "reconstruct_tensor",
    "relative_error",
    "truncate",
    "truncation_scan",
    "ungroup",
    "validate_symmetries",
]
