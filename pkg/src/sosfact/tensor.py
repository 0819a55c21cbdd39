"""Two-body tensor data model: antisymmetrization, symmetry checks, grouping.

Indices are 0-based. A two-body tensor ``h[p, q, r, s]`` multiplies
``c†_p c†_q c_r c_s`` with prefactor 1/2. The grouped matrix pairs the
particle-1 indices ``(p, s)`` as rows and the particle-2 indices ``(q, r)`` as
columns, flattened row-major::

    M[p * n + s, q * n + r] = h[p, q, r, s]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from sosfact.exceptions import SymmetryError
from sosfact.validation import (
    TOL_INPUT,
    TOL_SYM,
    check_grouped,
    check_one_body,
    check_two_body,
)

# (name, sign, einsum subscripts) for the seven nontrivial relations h == sign * perm(h)
SYMMETRY_RELATIONS: tuple[tuple[str, float, str], ...] = (
    ("qprs", -1.0, "qprs->pqrs"),
    ("pqsr", -1.0, "pqsr->pqrs"),
    ("qpsr", 1.0, "qpsr->pqrs"),
    ("srqp", 1.0, "srqp->pqrs"),
    ("rsqp", -1.0, "rsqp->pqrs"),
    ("srpq", -1.0, "srpq->pqrs"),
    ("rspq", 1.0, "rspq->pqrs"),
)


@dataclass(frozen=True)
class HamiltonianInstance:
    """One-body matrix ``f`` and two-body tensor ``h`` of a single Hamiltonian."""

    one_body: np.ndarray
    two_body: np.ndarray
    label: str = ""

    def __post_init__(self):
        h = check_two_body(self.two_body)
        f = check_one_body(self.one_body, h.shape[0])
        object.__setattr__(self, "two_body", h)
        object.__setattr__(self, "one_body", f)

    @property
    def n_modes(self) -> int:
        return self.two_body.shape[0]

    @classmethod
    def from_two_body(cls, h, label: str = "") -> HamiltonianInstance:
        h = check_two_body(h)
        return cls(np.zeros((h.shape[0], h.shape[0])), h, label)


@dataclass(frozen=True)
class SymmetryReport:
    """Maximum absolute defect of each index relation of a two-body tensor."""

    defects: dict[str, float]
    tol: float = TOL_SYM
    ok: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "ok", all(d <= self.tol for d in self.defects.values())
        )

    @property
    def max_defect(self) -> float:
        return max(self.defects.values(), default=0.0)

    def as_dict(self) -> dict:
        return {"defects": dict(self.defects), "max_defect": self.max_defect,
                "tol": self.tol, "ok": self.ok}


class AntisymmetrizeDiagnostics(NamedTuple):
    max_imag: float
    mirror_defect: float


def mirror(h: np.ndarray) -> np.ndarray:
    """Return the realness mirror ``h[s, r, q, p]`` laid out as ``[p, q, r, s]``."""
    return np.einsum("srqp->pqrs", h)


def _antisym_combination(v: np.ndarray) -> np.ndarray:
    # pairwise grouping keeps the map exactly idempotent on antisymmetric input
    return 0.25 * (
        (v - np.einsum("qprs->pqrs", v))
        + (np.einsum("qpsr->pqrs", v) - np.einsum("pqsr->pqrs", v))
    )


def _mirror_symmetrize(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + mirror(h))


def antisymmetrize(v, *, tol: float = TOL_INPUT, return_diagnostics: bool = False):
    """Build the antisymmetrized, real two-body tensor from raw matrix elements.

    Applies the quarter-weighted exchange combination of ``v``, symmetrizes
    under the realness mirror ``h[p,q,r,s] = h[s,r,q,p]`` and drops the
    imaginary part.

    Args:
        v: Rank-4 (possibly complex) matrix elements ``v[p, q, r, s]``.
        tol: Largest imaginary part or mirror defect accepted before the
            input is rejected as outside the real-valued regime.
        return_diagnostics: Also return the pre-discard imaginary part and
            the pre-symmetrization mirror defect.

    Returns:
        The real tensor ``h``, or ``(h, AntisymmetrizeDiagnostics)``.

    Raises:
        ValueError: If ``v`` is not hypercubic rank-4.
        SymmetryError: If a diagnostic exceeds ``tol``.
    """
    v = check_two_body(v, dtype=None)
    h = _antisym_combination(v)
    mirror_defect = float(np.max(np.abs(h - mirror(h))))
    h = _mirror_symmetrize(h)
    max_imag = float(np.max(np.abs(h.imag))) if np.iscomplexobj(h) else 0.0
    diag = AntisymmetrizeDiagnostics(max_imag, mirror_defect)
    if max_imag > tol or mirror_defect > tol:
        raise SymmetryError(
            "matrix elements violate the realness assumption "
            f"(imaginary part {max_imag:.3e}, mirror defect {mirror_defect:.3e})"
        )
    h = np.ascontiguousarray(h.real, dtype=np.float64)
    return (h, diag) if return_diagnostics else h


def validate_symmetries(h, tol: float = TOL_SYM) -> SymmetryReport:
    """Report the defect of every nontrivial permutation relation of ``h``."""
    h = check_two_body(h)
    defects = {
        name: float(np.max(np.abs(h - sign * np.einsum(subscripts, h))))
        for name, sign, subscripts in SYMMETRY_RELATIONS
    }
    return SymmetryReport(defects, tol)


def pair_index(x: int, y: int, n_modes: int) -> int:
    return x * n_modes + y


def swap_permutation(n_modes: int) -> np.ndarray:
    """Permutation matrix sending pair index ``(x, y)`` to ``(y, x)``."""
    n2 = n_modes * n_modes
    perm = np.arange(n2).reshape(n_modes, n_modes).T.reshape(-1)
    P = np.zeros((n2, n2))
    P[perm, np.arange(n2)] = 1.0
    return P


def group(h, *, tol: float = TOL_SYM, validate: bool = True) -> np.ndarray:
    """Flatten ``h`` into the ``n**2 x n**2`` grouped matrix.

    Entries are copied, so a tensor with exact symmetries yields a matrix that
    is exactly symmetric and exactly invariant under the pair swap.

    Raises:
        SymmetryError: If ``validate`` and ``h`` fails the symmetry check.
    """
    h = check_two_body(h)
    if validate:
        report = validate_symmetries(h, tol)
        if not report.ok:
            raise SymmetryError(
                f"two-body tensor violates index symmetries "
                f"(max defect {report.max_defect:.3e} > {tol:.1e})"
            )
    n = h.shape[0]
    return np.ascontiguousarray(np.einsum("pqrs->psqr", h)).reshape(n * n, n * n)


def ungroup(M) -> np.ndarray:
    """Inverse of :func:`group`."""
    M, n = check_grouped(M)
    return np.ascontiguousarray(np.einsum("psqr->pqrs", M.reshape(n, n, n, n)))


def effective_one_body(h) -> np.ndarray:
    """One-body term ``S[p, r] = -1/2 sum_q h[p, q, r, q]``.

    It appears when ``c†_p c†_q c_r c_s`` is reordered to
    ``c†_p c_s c†_q c_r``.
    """
    h = check_two_body(h)
    return -0.5 * np.einsum("pqrq->pr", h)
