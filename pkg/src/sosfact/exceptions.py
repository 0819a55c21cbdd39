"""Exception types raised by the factorization pipeline."""

from __future__ import annotations


class SymmetryError(ValueError):
    """A tensor violates the required index symmetries or realness."""


class DecompositionError(RuntimeError):
    """An eigendecomposition failed or produced inconsistent parity."""


class SizeGuardError(ValueError):
    """A dense Fock-space build was requested beyond the supported size."""


class FormatError(ValueError):
    """A tensor or factor file is malformed."""
