"""Estimator wrapper around the factorization pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from sosfact.assemble import (
    FactoredHamiltonian,
    factorize_hamiltonian,
    reconstruct_tensor,
    truncate,
)
from sosfact.factorize import FactorizationOptions, Parity
from sosfact.tensor import HamiltonianInstance, group, ungroup, validate_symmetries
from sosfact.validation import TOL_SYM, check_one_body, check_two_body


class PairwiseFactorization(TransformerMixin, BaseEstimator):
    """Sum-of-squares factorization of a two-body interaction tensor.

    Parameters
    ----------
    degeneracy_tol : float, default=1e-9
        Relative eigenvalue gap below which eigenvectors are treated as one
        degenerate cluster.
    parity_tol : float, default=1e-9
        Largest admissible parity defect of a slice.
    weight_cutoff : float, default=0.0
        Slices with ``|weight| <= weight_cutoff`` are dropped.
    tol : float, default=1e-12
        Symmetry tolerance applied to the input tensor.

    Attributes
    ----------
    n_modes_ : int
    factored_ : FactoredHamiltonian
    weights_ : ndarray of shape (n_slices,)
    parities_ : ndarray of str, ``"S"`` or ``"A"`` per slice
    components_ : ndarray of shape (n_slices, n_modes, n_modes)
        The slice matrices.
    correction_ : ndarray of shape (n_modes, n_modes)
    symmetry_report_ : SymmetryReport

    Examples
    --------
    >>> from sosfact.generators import random_valid
    >>> est = PairwiseFactorization().fit(random_valid(4, seed=0))
    >>> est.components_.shape[1:]
    (4, 4)
    """

    def __init__(self, degeneracy_tol=1e-9, parity_tol=1e-9, weight_cutoff=0.0, tol=TOL_SYM):
        self.degeneracy_tol = degeneracy_tol
        self.parity_tol = parity_tol
        self.weight_cutoff = weight_cutoff
        self.tol = tol

    def _options(self) -> FactorizationOptions:
        return FactorizationOptions(self.degeneracy_tol, self.parity_tol, self.weight_cutoff)

    def fit(self, X, y=None, one_body=None):
        """Factor the two-body tensor ``X``.

        Parameters
        ----------
        X : array-like of shape (n, n, n, n)
            Two-body tensor with the full set of index symmetries.
        y : ignored
        one_body : array-like of shape (n, n), optional
            Hermitian one-body matrix carried into ``factored_``.

        Returns
        -------
        self
        """
        h = check_two_body(X)
        self.symmetry_report_ = validate_symmetries(h, self.tol)
        group(h, tol=self.tol)  # raises on symmetry violation
        n = h.shape[0]
        f = np.zeros((n, n)) if one_body is None else check_one_body(one_body, n)
        self.factored_ = factorize_hamiltonian(HamiltonianInstance(f, h), self._options())
        self._set_slice_attributes(self.factored_)
        self.n_modes_ = n
        return self

    def _set_slice_attributes(self, fh: FactoredHamiltonian):
        n = fh.n_modes
        self.weights_ = fh.weights
        self.parities_ = np.array([s.parity.value for s in fh.slices], dtype="<U1")
        self.components_ = (
            np.stack([s.slice for s in fh.slices]) if fh.slices else np.zeros((0, n, n))
        )
        self.correction_ = fh.correction

    def transform(self, X):
        """Weights of ``X`` along the fitted slices.

        Returns ``vec(O_L)^T M vec(O_L)`` for each fitted slice ``O_L``, where
        ``M`` is the grouped matrix of ``X``. For the fitted tensor this equals
        ``weights_``.
        """
        check_is_fitted(self, "factored_")
        h = check_two_body(X)
        if h.shape[0] != self.n_modes_:
            raise ValueError(
                f"X has {h.shape[0]} modes, the estimator was fitted on {self.n_modes_}"
            )
        M = group(h, tol=self.tol)
        V = self.components_.reshape(len(self.components_), -1)
        return np.einsum("li,ij,lj->l", V, M, V)

    def inverse_transform(self, weights=None):
        """Two-body tensor ``sum_L w_L vec(O_L) vec(O_L)^T``, ungrouped.

        ``weights`` defaults to ``weights_``, which reproduces the fitted
        (possibly truncated) tensor.
        """
        check_is_fitted(self, "factored_")
        if weights is None:
            return reconstruct_tensor(self.factored_)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != self.weights_.shape:
            raise ValueError(f"expected {self.weights_.shape[0]} weights")
        V = self.components_.reshape(len(self.components_), -1)
        n = self.n_modes_
        M = (V.T * weights) @ V if len(V) else np.zeros((n * n, n * n))
        return ungroup(M)

    def truncate(self, threshold: float) -> PairwiseFactorization:
        """Drop fitted slices with ``|weight| <= threshold`` in place."""
        check_is_fitted(self, "factored_")
        self.factored_ = truncate(self.factored_, threshold)
        self._set_slice_attributes(self.factored_)
        return self

    @property
    def n_symmetric_(self) -> int:
        check_is_fitted(self, "factored_")
        return int(np.sum(self.parities_ == Parity.SYMMETRIC.value))

    @property
    def n_antisymmetric_(self) -> int:
        check_is_fitted(self, "factored_")
        return int(np.sum(self.parities_ == Parity.ANTISYMMETRIC.value))
