"""Factored Hamiltonian assembly, reconstruction and truncation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from sosfact import fock
from sosfact.factorize import (
    FactorizationOptions,
    FactorSlice,
    Parity,
    factorize_grouped,
)
from sosfact.tensor import HamiltonianInstance, effective_one_body, group, ungroup
from sosfact.validation import TOL_SYM


@dataclass(frozen=True)
class FactoredHamiltonian:
    """``H = F + S + sum_L V_L`` with each ``V_L`` a square of rotated number operators.

    Attributes:
        one_body: The original one-body matrix ``f``.
        correction: Real symmetric one-body term produced by reordering the
            interaction, always taken from the untruncated tensor.
        slices: Diagonalized slices, in descending ``|weight|`` order.
        options: Options the factorization was run with.
    """

    one_body: np.ndarray
    correction: np.ndarray
    slices: tuple[FactorSlice, ...]
    options: FactorizationOptions = field(default_factory=FactorizationOptions)

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))

    @property
    def n_modes(self) -> int:
        return self.correction.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.weight for s in self.slices])

    @property
    def n_symmetric(self) -> int:
        return sum(s.parity is Parity.SYMMETRIC for s in self.slices)

    @property
    def n_antisymmetric(self) -> int:
        return sum(s.parity is Parity.ANTISYMMETRIC for s in self.slices)


@dataclass(frozen=True)
class TruncationReport:
    thresholds: list[float]
    kept_slices: list[int]
    recon_error_frobenius: list[float]
    spectrum_error: list[float] | None = None

    def rows(self) -> list[dict]:
        out = []
        for i, t in enumerate(self.thresholds):
            row = {
                "threshold": t,
                "kept_slices": self.kept_slices[i],
                "recon_error_frobenius": self.recon_error_frobenius[i],
            }
            if self.spectrum_error is not None:
                row["spectrum_error"] = self.spectrum_error[i]
            out.append(row)
        return out


def factorize_hamiltonian(
    inst: HamiltonianInstance,
    opts: FactorizationOptions | None = None,
    *,
    tol: float = TOL_SYM,
    validate: bool = True,
) -> FactoredHamiltonian:
    """Factor the interaction of ``inst`` into the pairwise sum-of-squares form.

    ``tol`` and ``validate`` control the symmetry check on the input tensor.
    """
    opts = opts or FactorizationOptions()
    h = inst.two_body
    correction = effective_one_body(h)
    _, slices = factorize_grouped(group(h, tol=tol, validate=validate), opts)
    return FactoredHamiltonian(inst.one_body, correction, slices, opts)


def grouped_reconstruction(slices) -> np.ndarray | None:
    """``sum_L w_L vec(slice_L) vec(slice_L)^T``; ``None`` for an empty list."""
    slices = list(slices)
    if not slices:
        return None
    vecs = np.stack([s.slice.reshape(-1) for s in slices], axis=1)
    weights = np.array([s.weight for s in slices])
    return (vecs * weights) @ vecs.T


def reconstruct_tensor(fh: FactoredHamiltonian) -> np.ndarray:
    """Rebuild the two-body tensor from the symmetric and antisymmetric slices.

    The two parity classes are summed separately; no mixed terms are formed.
    """
    n = fh.n_modes
    total = np.zeros((n * n, n * n))
    for parity in (Parity.SYMMETRIC, Parity.ANTISYMMETRIC):
        part = grouped_reconstruction(s for s in fh.slices if s.parity is parity)
        if part is not None:
            total += part
    return ungroup(total)


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    """Relative Frobenius distance; absolute when ``exact`` is zero."""
    diff = float(np.linalg.norm(np.ravel(approx - exact)))
    ref = float(np.linalg.norm(np.ravel(exact)))
    return diff / ref if ref > 0 else diff


def truncate(fh: FactoredHamiltonian, threshold: float) -> FactoredHamiltonian:
    """Keep slices with ``|weight| > threshold``; one-body terms are untouched."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    kept = tuple(s for s in fh.slices if abs(s.weight) > threshold)
    return replace(fh, slices=kept)


def truncation_scan(
    inst: HamiltonianInstance,
    thresholds,
    *,
    spectrum: bool = False,
    k: int = 4,
    opts: FactorizationOptions | None = None,
    tol: float = TOL_SYM,
) -> TruncationReport:
    """Reconstruction (and optionally low-spectrum) error for each threshold.

    Args:
        inst: Hamiltonian to factor.
        thresholds: Ascending weight thresholds.
        spectrum: Also compare the ``k`` lowest Fock-space eigenvalues of the
            truncated factored Hamiltonian with the exact ones.
        k: Number of eigenvalues for the spectrum metric.
        opts: Factorization options.
        tol: Symmetry tolerance for the input tensor.
    """
    thresholds = [float(t) for t in thresholds]
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be sorted ascending")
    fh = factorize_hamiltonian(inst, opts, tol=tol)
    exact_fock = fock.build_from_tensor(inst) if spectrum else None
    kept, errors, spec_errors = [], [], []
    for t in thresholds:
        tr = truncate(fh, t)
        kept.append(len(tr.slices))
        errors.append(relative_error(reconstruct_tensor(tr), inst.two_body))
        if spectrum:
            spec_errors.append(
                fock.compare_spectra(exact_fock, fock.build_from_factored(tr), k)
            )
    return TruncationReport(thresholds, kept, errors, spec_errors if spectrum else None)
