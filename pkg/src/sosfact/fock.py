"""Dense Fock-space matrices for brute-force verification.

Basis state ``b`` has mode ``p`` occupied iff bit ``p`` of ``b`` is set.
Ladder operators carry the sign ``(-1)**(number of occupied modes q < p)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from sosfact.exceptions import SizeGuardError
from sosfact.factorize import FactorSlice, Parity

if TYPE_CHECKING:
    from sosfact.assemble import FactoredHamiltonian
    from sosfact.tensor import HamiltonianInstance

MAX_MODES = 12
MAX_MODES_TROTTER = 8
_CHUNK = 1 << 22
_ERR_FLOOR = 1e-12


def _check_size(n_modes: int, limit: int = MAX_MODES) -> None:
    if n_modes > limit:
        raise SizeGuardError(
            f"dense Fock matrices are limited to {limit} modes, got {n_modes}"
        )


def _ladder(states, mode, create: bool):
    """Apply ``c†_mode`` (``create``) or ``c_mode`` to integer basis states.

    Returns ``(new_states, valid, sign)``; entries where ``valid`` is false
    were annihilated.
    """
    bit = np.left_shift(1, mode)
    occupied = (states & bit) != 0
    valid = ~occupied if create else occupied
    below = np.bitwise_count(states & (bit - 1))
    sign = 1 - 2 * (below & 1).astype(np.int8)
    return states ^ bit, valid, sign


@functools.lru_cache(maxsize=16)
def _hop_table(n_modes: int):
    """``c†_p c_q`` acting on every basis state, for all ``(p, q)`` flattened."""
    dim = 1 << n_modes
    states = np.arange(dim, dtype=np.int64)[None, :]
    p, q = np.divmod(np.arange(n_modes * n_modes, dtype=np.int64), n_modes)
    mid, v1, s1 = _ladder(states, q[:, None], create=False)
    final, v2, s2 = _ladder(mid, p[:, None], create=True)
    valid = v1 & v2
    rows = final[valid]
    cols = np.broadcast_to(states, valid.shape)[valid]
    pair = np.broadcast_to(np.arange(n_modes * n_modes)[:, None], valid.shape)[valid]
    signs = (s1 * s2)[valid].astype(np.float64)
    for arr in (rows, cols, pair, signs):
        arr.setflags(write=False)
    return rows, cols, pair, signs


def one_body_operator(X, n_modes: int) -> sp.csr_matrix:
    """Sparse Fock matrix of ``sum_{p,q} X[p, q] c†_p c_q``."""
    _check_size(n_modes)
    X = np.asarray(X)
    rows, cols, pair, signs = _hop_table(n_modes)
    dim = 1 << n_modes
    data = X.reshape(-1)[pair] * signs
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def number_operator(n_modes: int) -> sp.csr_matrix:
    """Total particle number ``sum_p c†_p c_p``."""
    return one_body_operator(np.eye(n_modes), n_modes)


def _two_body_dense(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    dim = 1 << n
    quads = np.argwhere(h != 0)
    states = np.arange(dim, dtype=np.int64)[None, :]
    flat_idx, vals = [], []
    step = max(1, _CHUNK // dim)
    for start in range(0, len(quads), step):
        chunk = quads[start : start + step]
        p, q, r, s = (chunk[:, i, None].astype(np.int64) for i in range(4))
        coef = 0.5 * h[tuple(chunk.T)][:, None]
        st, valid, sign = _ladder(states, s, create=False)
        for mode, create in ((r, False), (q, True), (p, True)):
            st, v, sg = _ladder(st, mode, create)
            valid &= v
            sign = sign * sg
        init = np.broadcast_to(states, valid.shape)
        flat_idx.append((st * dim + init)[valid])
        vals.append((coef * sign)[valid])
    out = np.zeros(dim * dim)
    if flat_idx:
        out += np.bincount(
            np.concatenate(flat_idx), weights=np.concatenate(vals), minlength=dim * dim
        )
    return out.reshape(dim, dim)


def build_from_tensor(inst: HamiltonianInstance) -> np.ndarray:
    """Dense ``sum f[p,q] c†_p c_q + 1/2 sum h[p,q,r,s] c†_p c†_q c_r c_s``.

    Each term is applied literally, operator by operator, to every basis
    state; nothing from the factorization is used.
    """
    n = inst.n_modes
    _check_size(n)
    H = _two_body_dense(inst.two_body).astype(complex)
    H += one_body_operator(inst.one_body, n).toarray()
    return H


def rotated_number_operators(fs: FactorSlice) -> list[sp.csr_matrix]:
    """``n_a = b†_a b_a`` with ``b†_a = sum_p U[p, a] c†_p`` for each column ``a``."""
    U = fs.rotation
    n = U.shape[0]
    return [one_body_operator(np.outer(U[:, a], U[:, a].conj()), n) for a in range(n)]


def slice_operator(fs: FactorSlice) -> sp.csr_matrix:
    """Sparse ``V_L = 1/2 w sum_{a,b} e_a e_b n_a n_b`` for one slice.

    ``e_a`` is ``lambda_a`` for symmetric slices and ``1j * lambda_a`` for
    antisymmetric ones, so the antisymmetric coefficient is ``-lambda_a lambda_b``.
    """
    U, lam = fs.rotation, fs.lambdas
    n = U.shape[0]
    T = one_body_operator((U * lam) @ U.conj().T, n)
    sign = 1.0 if fs.parity is Parity.SYMMETRIC else -1.0
    return (0.5 * sign * fs.weight) * (T @ T)


def build_from_factored(fh: FactoredHamiltonian) -> np.ndarray:
    """Dense ``F + S + sum_L V_L`` from a factored Hamiltonian."""
    n = fh.n_modes
    _check_size(n)
    H = one_body_operator(fh.one_body + fh.correction, n)
    for fs in fh.slices:
        H = H + slice_operator(fs)
    return H.toarray().astype(complex)


def compare_spectra(A, B, k: int = 4) -> float:
    """Largest absolute difference among the ``k`` lowest eigenvalues."""
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    k = min(int(k), A.shape[0])
    ea = np.linalg.eigvalsh(A)[:k]
    eb = np.linalg.eigvalsh(B)[:k]
    return float(np.max(np.abs(ea - eb), initial=0.0))


@dataclass(frozen=True)
class TrotterScanResult:
    dts: list[float]
    errors: list[float]
    fitted_slope: float

    def as_dict(self) -> dict:
        slope = self.fitted_slope
        return {
            "dts": list(self.dts),
            "errors": list(self.errors),
            "fitted_slope": "nan" if math.isnan(slope) else slope,
        }


class _HermitianExp:
    """Caches an eigendecomposition to evaluate ``exp(1j * t * A)`` repeatedly."""

    def __init__(self, A):
        A = A.toarray() if sp.issparse(A) else np.asarray(A)
        self.vals, self.vecs = np.linalg.eigh(A)

    def __call__(self, t: float) -> np.ndarray:
        return (self.vecs * np.exp(1j * t * self.vals)) @ self.vecs.conj().T


def fit_loglog_slope(dts, errors, floor: float = _ERR_FLOOR) -> float:
    """Least-squares slope of ``log(err)`` against ``log(dt)``; NaN if degenerate."""
    pts = [(dt, e) for dt, e in zip(dts, errors) if dt > 0]
    if len(pts) < 2 or any(e <= floor for _, e in pts):
        return float("nan")
    x = np.log([dt for dt, _ in pts])
    y = np.log([e for _, e in pts])
    return float(np.polyfit(x, y, 1)[0])


def trotter_scan(fh: FactoredHamiltonian, dts, reference=None) -> TrotterScanResult:
    """Operator-norm error of one first-order Trotter step for each ``dt``.

    The step is ``exp(i dt (F + S)) * prod_L exp(i dt V_L)`` with slices in
    stored order, compared against ``exp(i dt H)``.

    Args:
        fh: Factored Hamiltonian.
        dts: Non-negative time steps.
        reference: Dense exact Hamiltonian; defaults to the untruncated sum
            of the factored terms.
    """
    _check_size(fh.n_modes, MAX_MODES_TROTTER)
    dts = [float(dt) for dt in dts]
    if not dts:
        raise ValueError("at least one time step is required")
    if any(dt < 0 for dt in dts):
        raise ValueError("time steps must be non-negative")
    H = build_from_factored(fh) if reference is None else np.asarray(reference)
    exact = _HermitianExp(H)
    parts = [_HermitianExp(one_body_operator(fh.one_body + fh.correction, fh.n_modes))]
    parts += [_HermitianExp(slice_operator(fs)) for fs in fh.slices]
    errors = []
    for dt in dts:
        if dt == 0:
            errors.append(0.0)
            continue
        step = parts[0](dt)
        for part in parts[1:]:
            step = step @ part(dt)
        errors.append(float(np.linalg.norm(exact(dt) - step, 2)))
    return TrotterScanResult(dts, errors, fit_loglog_slope(dts, errors))
