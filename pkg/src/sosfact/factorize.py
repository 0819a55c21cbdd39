"""Eigendecomposition of the grouped matrix and per-slice diagonalization.

The grouped matrix ``M`` commutes with the pair-swap permutation ``P``, so its
eigenvectors can be chosen even or odd under ``P``. Reshaped into
``n x n`` matrices, even vectors are symmetric slices and odd vectors are
antisymmetric slices. Each slice is then diagonalized by a unitary: a real
orthogonal one for symmetric slices, a complex one (eigenvalues ``i*lambda``)
for antisymmetric slices.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from sosfact.exceptions import DecompositionError
from sosfact.validation import TOL_SYM, check_grouped, check_tolerance

ZERO_WEIGHT_FLOOR = 1e-14
_SIGN_THRESHOLD = 1e-8


class Parity(str, enum.Enum):
    SYMMETRIC = "S"
    ANTISYMMETRIC = "A"


@dataclass(frozen=True)
class FactorizationOptions:
    """Tolerances of the factorization.

    Attributes:
        degeneracy_tol: Eigenvalues closer than
            ``degeneracy_tol * max(1, ||M||_F)`` form one cluster.
        parity_tol: Largest admissible parity defect of a slice.
        weight_cutoff: Slices with ``|weight| <= weight_cutoff`` are dropped.
    """

    degeneracy_tol: float = 1e-9
    parity_tol: float = 1e-9
    weight_cutoff: float = 0.0

    def __post_init__(self):
        for name in ("degeneracy_tol", "parity_tol", "weight_cutoff"):
            object.__setattr__(self, name, check_tolerance(name, getattr(self, name)))


@dataclass(frozen=True)
class SchurResult:
    """``M = vectors @ diag(weights) @ vectors.T`` in descending ``|weight|`` order."""

    weights: np.ndarray
    vectors: np.ndarray

    @property
    def n_modes(self) -> int:
        return int(round(np.sqrt(self.weights.shape[0])))

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.weights) @ self.vectors.T


@dataclass(frozen=True)
class FactorSlice:
    """One term of the pairwise expansion.

    ``slice`` is the ``n x n`` reshaped eigenvector; for a symmetric slice
    ``slice = U diag(lambdas) U†`` and for an antisymmetric slice
    ``slice = U diag(1j * lambdas) U†``, with ``U = rotation``.
    """

    weight: float
    parity: Parity
    slice: np.ndarray
    rotation: np.ndarray | None = None
    lambdas: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return self.slice.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the slice itself (imaginary for antisymmetric slices)."""
        if self.parity is Parity.SYMMETRIC:
            return self.lambdas.astype(complex)
        return 1j * self.lambdas

    def reconstruct_slice(self) -> np.ndarray:
        U = self.rotation
        return (U * self.eigenvalues) @ U.conj().T


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that the first non-negligible component is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        big = np.flatnonzero(np.abs(col) > _SIGN_THRESHOLD)
        if big.size and col[big[0]] < 0:
            out[:, j] = -col
    return out


def schur_grouped(M, *, tol: float = TOL_SYM) -> SchurResult:
    """Real symmetric eigendecomposition of the grouped matrix.

    Weights may be negative. Output is ordered by descending ``|weight|``
    (positive first on ties) with canonical eigenvector signs.

    Raises:
        ValueError: If ``M`` is not symmetric within ``tol * max(1, max|M|)``.
        DecompositionError: If the eigensolver does not converge.
    """
    M, _ = check_grouped(M)
    M = np.asarray(M, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    asym = float(np.max(np.abs(M - M.T), initial=0.0))
    if asym > tol * scale:
        raise ValueError(f"grouped matrix is not symmetric (defect {asym:.3e})")
    if not np.any(M):
        dim = M.shape[0]
        return SchurResult(np.zeros(dim), np.eye(dim))
    try:
        w, O = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((-w, -np.abs(w)))
    return SchurResult(w[order], _canonical_signs(O[:, order]))


def parity_basis(n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the pair-swap even and odd subspaces.

    Returns ``(B_even, B_odd)`` with shapes ``(n**2, n(n+1)/2)`` and
    ``(n**2, n(n-1)/2)``. ``B_even @ B_even.T == (I + P) / 2``.
    """
    n = n_modes
    n2 = n * n
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    even = np.zeros((n2, n * (n + 1) // 2))
    odd = np.zeros((n2, n * (n - 1) // 2))
    ie = io = 0
    for p in range(n):
        even[p * n + p, ie] = 1.0
        ie += 1
        for s in range(p + 1, n):
            even[p * n + s, ie] = even[s * n + p, ie] = inv_sqrt2
            odd[p * n + s, io] = inv_sqrt2
            odd[s * n + p, io] = -inv_sqrt2
            ie += 1
            io += 1
    return even, odd


def _from_parity_coords(coords: np.ndarray, n: int, even: bool) -> np.ndarray:
    # writes mirrored entries from one product so (p, s) and (s, p) agree bitwise
    vec = np.zeros(n * n)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    k = 0
    for p in range(n):
        if even:
            vec[p * n + p] = coords[k]
            k += 1
        for s in range(p + 1, n):
            val = coords[k] * inv_sqrt2
            vec[p * n + s] = val
            vec[s * n + p] = val if even else -val
            k += 1
    return vec


def _clusters(weights: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.argsort(weights, kind="stable")
    groups: list[list[int]] = [[int(order[0])]] if order.size else []
    for prev, cur in zip(order[:-1], order[1:]):
        if weights[cur] - weights[prev] <= gap:
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    return [np.array(g) for g in groups]


def _ritz(block_matrix: np.ndarray, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalize ``coords`` and diagonalize the compressed block matrix."""
    Q, _ = np.linalg.qr(coords)
    small = Q.T @ block_matrix @ Q
    vals, rot = np.linalg.eigh(0.5 * (small + small.T))
    vals, rot = vals[::-1], rot[:, ::-1]
    return vals, Q @ rot


def resolve_parity(
    res: SchurResult,
    opts: FactorizationOptions | None = None,
    M: np.ndarray | None = None,
) -> list[tuple[float, np.ndarray]]:
    """Re-express eigenvectors so each is exactly even or odd under the pair swap.

    Eigenvalues are clustered (gap ``degeneracy_tol * max(1, ||M||_F)``). The
    span of each cluster is projected onto the even and odd subspaces; each
    projected basis is orthonormalized and re-diagonalized within the
    cluster. Vectors are assembled from the parity basis, so the ``(p, s)``
    and ``(s, p)`` entries are bit-identical (up to sign for odd vectors).

    Args:
        res: Eigendecomposition of the grouped matrix.
        opts: Factorization tolerances.
        M: The grouped matrix; rebuilt from ``res`` when omitted.

    Returns:
        ``n**2`` pairs ``(weight, vector)`` ordered by descending ``|weight|``.

    Raises:
        DecompositionError: If a cluster is not spanned by its even and odd
            projections, which signals a symmetry violation of the input.
    """
    opts = opts or FactorizationOptions()
    n = res.n_modes
    if M is None:
        M = res.reconstruct()
    b_even, b_odd = parity_basis(n)
    m_even = b_even.T @ M @ b_even
    m_odd = b_odd.T @ M @ b_odd
    m_even = 0.5 * (m_even + m_even.T)
    m_odd = 0.5 * (m_odd + m_odd.T)

    norm = float(np.sqrt(np.sum(res.weights**2)))
    gap = opts.degeneracy_tol * max(1.0, norm)
    clusters = _clusters(res.weights, gap)

    records: list[tuple[float, float, int, bool, np.ndarray]] = []
    for idx in clusters:
        vecs = res.vectors[:, idx]
        k = idx.size
        c_even = b_even.T @ vecs
        c_odd = b_odd.T @ vecs
        sv_even = np.linalg.svd(c_even, compute_uv=False) if c_even.size else np.zeros(0)
        sv_odd = np.linalg.svd(c_odd, compute_uv=False) if c_odd.size else np.zeros(0)
        r_even = int(np.sum(sv_even > 0.5))
        r_odd = int(np.sum(sv_odd > 0.5))
        if r_even + r_odd != k:
            raise DecompositionError(
                f"eigenvalue cluster of size {k} near {res.weights[idx[0]]:.6g} "
                f"splits into {r_even} even + {r_odd} odd directions; "
                "the grouped matrix is not invariant under the pair swap"
            )
        mean_w = float(np.mean(res.weights[idx]))
        for basis, block, coords, rank in (
            (b_even, m_even, c_even, r_even),
            (b_odd, m_odd, c_odd, r_odd),
        ):
            if rank == 0:
                continue
            u, _, _ = np.linalg.svd(coords, full_matrices=False)
            vals, ritz = _ritz(block, u[:, :rank])
            for j in range(rank):
                even = basis is b_even
                records.append((mean_w, float(vals[j]), len(records), even, ritz[:, j]))

    # clusters stay together, ordered by descending |weight|; within a
    # cluster even vectors precede odd ones
    records.sort(key=lambda r: (-abs(r[0]), -r[0], r[2]))
    out: list[tuple[float, np.ndarray]] = []
    for _, weight, _, even, coords in records:
        vec = _from_parity_coords(coords, n, even)
        vec = vec / np.linalg.norm(vec)
        out.append((weight, _canonical_signs(vec[:, None])[:, 0]))
    return out


def _slice_parity(mat: np.ndarray, tol: float) -> Parity:
    sym = np.linalg.norm(0.5 * (mat + mat.T))
    anti = np.linalg.norm(0.5 * (mat - mat.T))
    if sym > tol and anti > tol:
        raise DecompositionError(
            f"slice has mixed parity (symmetric part {sym:.3e}, "
            f"antisymmetric part {anti:.3e})"
        )
    return Parity.SYMMETRIC if sym >= anti else Parity.ANTISYMMETRIC


def slice_and_classify(
    pairs: list[tuple[float, np.ndarray]],
    opts: FactorizationOptions | None = None,
) -> list[FactorSlice]:
    """Reshape parity-resolved eigenvectors into slices and drop negligible ones.

    A slice is dropped when ``|weight| <= max(weight_cutoff, floor)`` where
    ``floor = 1e-14 * max(1, ||M||_F)`` and ``||M||_F`` is recovered from the
    weights.
    """
    opts = opts or FactorizationOptions()
    weights = np.array([w for w, _ in pairs])
    norm = float(np.sqrt(np.sum(weights**2))) if weights.size else 0.0
    drop_at = max(opts.weight_cutoff, ZERO_WEIGHT_FLOOR * max(1.0, norm))
    slices = []
    for weight, vec in pairs:
        if abs(weight) <= drop_at:
            continue
        n = int(round(np.sqrt(vec.shape[0])))
        mat = np.ascontiguousarray(vec.reshape(n, n))
        slices.append(FactorSlice(float(weight), _slice_parity(mat, opts.parity_tol), mat))
    return slices


def _canonical_phases(U: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    out = U.astype(complex, copy=True)
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        k = int(np.flatnonzero(mags >= mags.max() * (1.0 - 1e-8))[0])
        out[:, j] = col * (np.abs(col[k]) / col[k])
    return out


def diagonalize_slice(fs: FactorSlice) -> FactorSlice:
    """Fill ``rotation`` and ``lambdas`` of a slice with definite parity.

    Symmetric slices use a real eigendecomposition. Antisymmetric slices
    diagonalize the Hermitian matrix ``1j * slice = U diag(mu) U†`` and store
    ``lambdas = -mu`` so that ``slice = U diag(1j * lambdas) U†``. Pairs are
    sorted by descending lambda.
    """
    mat = fs.slice
    if not np.any(mat):
        n = mat.shape[0]
        return replace(fs, rotation=np.eye(n, dtype=complex), lambdas=np.zeros(n))
    try:
        if fs.parity is Parity.SYMMETRIC:
            lam, U = np.linalg.eigh(mat)
        else:
            herm = 1j * mat
            mu, U = np.linalg.eigh(herm)
            lam = -mu
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"slice eigensolver failed: {exc}") from exc
    order = np.argsort(-lam, kind="stable")
    return replace(fs, rotation=_canonical_phases(U[:, order]), lambdas=lam[order])


def _n_threads() -> int | None:
    value = os.environ.get("FHT_THREADS")
    return max(1, int(value)) if value else None


def diagonalize_slices(slices: list[FactorSlice], n_jobs: int | None = None) -> list[FactorSlice]:
    """Diagonalize slices concurrently; output order matches input order."""
    n_jobs = n_jobs or _n_threads() or 1
    if n_jobs == 1 or len(slices) < 2:
        return [diagonalize_slice(s) for s in slices]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(diagonalize_slice, slices))


def factorize_grouped(
    M, opts: FactorizationOptions | None = None
) -> tuple[SchurResult, list[FactorSlice]]:
    """Run the full grouped-matrix pipeline and return the Schur result and slices."""
    opts = opts or FactorizationOptions()
    M, _ = check_grouped(M)
    res = schur_grouped(M)
    pairs = resolve_parity(res, opts, M=M)
    return res, diagonalize_slices(slice_and_classify(pairs, opts))
