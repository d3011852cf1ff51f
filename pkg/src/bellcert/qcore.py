"""Dense complex linear algebra on bipartite operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Bipartite
operators use the Kronecker index convention ``(iA*dimB + iB, jA*dimB + jB)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidStateError, NotHermitianError

DEFAULT_TOL = 1e-10

# Eigenvalues closer than this (relative to the operator norm) are one cluster.
_CLUSTER_GAP = 1e-10


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def _split(m, dims) -> tuple[np.ndarray, int, int]:
    m = _as_matrix(m)
    da, db = int(dims[0]), int(dims[1])
    n = da * db
    if m.shape != (n, n):
        raise DimensionError(f"matrix of shape {m.shape} does not act on {da}x{db}")
    return m.reshape(da, db, da, db), da, db


def _side(side: str) -> str:
    s = str(side).upper()
    if s not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return s


def partial_trace(m, dims, side: str = "B") -> np.ndarray:
    """Trace out subsystem ``side``; returns the operator on the other factor."""
    t, _, _ = _split(m, dims)
    if _side(side) == "B":
        return np.einsum("ajbj->ab", t)
    return np.einsum("iaib->ab", t)


def partial_transpose(m, dims, side: str = "B") -> np.ndarray:
    """Transpose the indices of one tensor factor only."""
    t, da, db = _split(m, dims)
    if _side(side) == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        t = t.transpose(2, 1, 0, 3)
    return t.reshape(da * db, da * db)


def hermitian_violation(m) -> float:
    """Largest entry of ``|M - M^†|``."""
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix of shape {m.shape} is not square")
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def as_hermitian(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Symmetrize ``m`` to ``(M + M^†)/2``.

    Raises :class:`NotHermitianError` when ``m`` is further than ``tol`` (relative
    to its largest entry) from Hermitian.
    """
    m = _as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    viol = hermitian_violation(m)
    if viol > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (deviation {viol:.3e})")
    return (m + m.conj().T) / 2


def _canonical_subspace_basis(vecs: np.ndarray) -> np.ndarray:
    """Orthonormal basis for span(vecs) that does not depend on which basis was given.

    Projects the standard basis vectors onto the subspace in order and
    Gram-Schmidts them, so the result is a function of the subspace only.
    """
    n, m = vecs.shape
    proj = vecs @ vecs.conj().T
    out: list[np.ndarray] = []
    for k in range(n):
        u = proj[:, k].copy()
        for w in out:
            u -= (w.conj() @ u) * w
        # n * eps**2 < 1 guarantees m candidates survive this cut.
        nrm = np.linalg.norm(u)
        if nrm > 1e-3:
            u /= nrm
            for w in out:
                u -= (w.conj() @ u) * w
            out.append(u / np.linalg.norm(u))
            if len(out) == m:
                break
    return np.column_stack(out)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return v * (abs(v[idx]) / v[idx])


def hermitian_eigensystem(h, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order with eigenvectors as columns.
    Degenerate eigenspaces get a canonical orthonormal basis and every vector is
    rotated so its largest-magnitude entry is real and positive, so identical
    input always yields identical output regardless of the LAPACK driver.
    """
    h = as_hermitian(h, tol)
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    n = len(w)
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[j - 1] - w[j] < _CLUSTER_GAP * scale:
            j += 1
        if j - i > 1:
            v[:, i:j] = _canonical_subspace_basis(v[:, i:j])
        i = j
    for k in range(n):
        v[:, k] = _fix_phase(v[:, k])
    return w, v


def min_eigenvalue(h, tol: float = DEFAULT_TOL) -> float:
    return float(np.linalg.eigvalsh(as_hermitian(h, tol))[0])


def is_positive_semidefinite(h, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Return ``(min_eig >= -tol, min_eig)``."""
    lo = min_eigenvalue(h)
    return lo >= -tol, lo


def gell_mann_matrices(d: int) -> list[np.ndarray]:
    """The ``d**2 - 1`` generalized Gell-Mann matrices.

    Order: symmetric ``|j><k| + |k><j|`` for ``j < k``, antisymmetric
    ``-i|j><k| + i|k><j|`` for ``j < k`` (both lexicographic in ``(j, k)``),
    then the diagonal family. Every member satisfies ``Tr(G_a G_b) = 2 δ_ab``.
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    mats = []
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = g[k, j] = 1.0
        mats.append(g)
    for j, k in pairs:
        g = np.zeros((d, d), dtype=complex)
        g[j, k] = -1j
        g[k, j] = 1j
        mats.append(g)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(np.sqrt(2.0 / (l * (l + 1))) * diag).astype(complex))
    return mats


@dataclass(frozen=True)
class HermitianBasis:
    """Basis of the Hermitian ``dim x dim`` matrices; the last member is the identity."""

    dim: int
    operators: tuple

    def __post_init__(self):
        if len(self.operators) != self.dim**2:
            raise DimensionError("a Hermitian basis needs dim**2 operators")

    @property
    def traceless(self) -> tuple:
        return self.operators[:-1]

    def gram(self) -> np.ndarray:
        ops = np.array(self.operators)
        return np.real(np.einsum("aij,bji->ab", ops, ops))


def hermitian_basis(d: int) -> HermitianBasis:
    ops = gell_mann_matrices(d) + [np.eye(d, dtype=complex)]
    for op in ops:
        op.setflags(write=False)
    return HermitianBasis(d, tuple(ops))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^† b)``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace positive semidefinite operator on ``C^dim_a ⊗ C^dim_b``.

    The stored matrix is symmetrized on construction and made read-only.
    """

    matrix: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        n = self.dim_a * self.dim_b
        m = _as_matrix(self.matrix)
        if m.shape != (n, n):
            raise DimensionError(f"matrix of shape {m.shape} does not act on {self.dim_a}x{self.dim_b}")
        try:
            m = as_hermitian(m)
        except NotHermitianError as exc:
            raise InvalidStateError(str(exc)) from exc
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-12:
            raise InvalidStateError(f"trace is {tr!r}, expected 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -1e-10:
            raise InvalidStateError(f"matrix has negative eigenvalue {lo:.3e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @classmethod
    def from_vector(cls, psi, dim_a: int, dim_b: int) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dim_a, dim_b)

    @classmethod
    def normalized(cls, m, dim_a: int, dim_b: int) -> "DensityMatrix":
        m = as_hermitian(m)
        return cls(m / np.trace(m).real, dim_a, dim_b)

    def reduced(self, keep: str) -> np.ndarray:
        """Reduced state on ``keep`` (``'A'`` or ``'B'``)."""
        traced = "B" if _side(keep) == "A" else "A"
        return partial_trace(self.matrix, self.dims, traced)

    def expectation(self, op) -> float:
        return float(np.real(np.trace(np.asarray(op) @ self.matrix)))
