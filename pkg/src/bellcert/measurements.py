"""POVMs, measurement configurations, event vectors and tomography.

Event-vector layout (fixed, A-major): the joint block lists
``P(A:i|k, B:j|l)`` lexicographically in ``(i, k, j, l)``; then the Alice
marginals in ``(i, k)``; then the Bob marginals in ``(j, l)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, InconsistentDataError, LayoutError, POVMError
from .qcore import (
    DEFAULT_TOL,
    DensityMatrix,
    HermitianBasis,
    as_hermitian,
    hermitian_basis,
    hermitian_eigensystem,
)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class POVM:
    """Outcome operators ``E_m``, each PSD, summing to the identity."""

    elements: tuple

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)


def validate_povm(candidate, tol: float = DEFAULT_TOL) -> POVM:
    """Check positivity and completeness and return a frozen :class:`POVM`."""
    elems = [as_hermitian(e) for e in candidate]
    if not elems:
        raise POVMError("a POVM needs at least one element")
    d = elems[0].shape[0]
    if any(e.shape != (d, d) for e in elems):
        raise POVMError("POVM elements have mixed dimensions")
    for m, e in enumerate(elems):
        lo = float(np.linalg.eigvalsh(e)[0])
        if lo < -tol:
            raise POVMError(f"element {m} has negative eigenvalue {lo:.3e}")
        if np.max(np.abs(e)) <= tol:
            warnings.warn(f"POVM element {m} is zero", stacklevel=2)
    dev = float(np.max(np.abs(sum(elems) - np.eye(d))))
    if dev > tol:
        raise POVMError(f"elements do not sum to the identity (deviation {dev:.3e})")
    for e in elems:
        e.setflags(write=False)
    return POVM(tuple(elems))


def bloch_observable(a) -> np.ndarray:
    """``a · sigma`` for a real 3-vector ``a``."""
    a = np.asarray(a, dtype=float)
    return a[0] * PAULI[0] + a[1] * PAULI[1] + a[2] * PAULI[2]


def projective_from_bloch(a) -> POVM:
    """Two-outcome qubit measurement of ``a · sigma``; the ``+1`` outcome comes first."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3,) or abs(np.linalg.norm(a) - 1) > 1e-10:
        raise ValueError(f"expected a unit 3-vector, got {a}")
    obs = bloch_observable(a)
    eye = np.eye(2, dtype=complex)
    return validate_povm([(eye + obs) / 2, (eye - obs) / 2])


def projective_from_frame(u, n_outcomes: int | None = None) -> POVM:
    """Projectors onto the columns of unitary ``u``.

    With ``n_outcomes < dim`` the trailing columns are merged into the last
    outcome.
    """
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    k = d if n_outcomes is None else n_outcomes
    if not 1 <= k <= d:
        raise ValueError(f"cannot split a {d}-dim frame into {k} outcomes")
    projs = [np.outer(u[:, c], u[:, c].conj()) for c in range(d)]
    elems = projs[: k - 1] + [sum(projs[k - 1 :])]
    return validate_povm(elems)


@dataclass(frozen=True)
class Layout:
    """Outcome counts ``k(i)`` for Alice and ``l(j)`` for Bob."""

    outcomes_a: tuple
    outcomes_b: tuple

    @property
    def size_a(self) -> int:
        return sum(self.outcomes_a)

    @property
    def size_b(self) -> int:
        return sum(self.outcomes_b)

    @property
    def size_joint(self) -> int:
        return self.size_a * self.size_b

    @property
    def size(self) -> int:
        return self.size_joint + self.size_a + self.size_b

    def labels_a(self) -> list[tuple[int, int]]:
        return [(i, k) for i, n in enumerate(self.outcomes_a) for k in range(n)]

    def labels_b(self) -> list[tuple[int, int]]:
        return [(j, l) for j, n in enumerate(self.outcomes_b) for l in range(n)]

    def offset_a(self, i: int) -> int:
        return sum(self.outcomes_a[:i])

    def offset_b(self, j: int) -> int:
        return sum(self.outcomes_b[:j])

    def joint_index(self, i: int, k: int, j: int, l: int) -> int:
        return (self.offset_a(i) + k) * self.size_b + self.offset_b(j) + l

    def marg_a_index(self, i: int, k: int) -> int:
        return self.size_joint + self.offset_a(i) + k

    def marg_b_index(self, j: int, l: int) -> int:
        return self.size_joint + self.size_a + self.offset_b(j) + l

    def to_json(self) -> dict:
        return {
            "outcomes_a": list(self.outcomes_a),
            "outcomes_b": list(self.outcomes_b),
            "order": "joint(i,k,j,l) | margA(i,k) | margB(j,l)",
            "size": self.size,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Layout":
        return cls(tuple(doc["outcomes_a"]), tuple(doc["outcomes_b"]))


@dataclass(frozen=True, eq=False)
class MeasurementConfig:
    """Alice's and Bob's measurement lists."""

    alice: tuple
    bob: tuple

    def __post_init__(self):
        if not self.alice or not self.bob:
            raise ValueError("both parties need at least one measurement")
        for side in (self.alice, self.bob):
            if len({m.dim for m in side}) != 1:
                raise DimensionError("measurements of one party must share a dimension")
        object.__setattr__(self, "alice", tuple(self.alice))
        object.__setattr__(self, "bob", tuple(self.bob))

    @property
    def dim_a(self) -> int:
        return self.alice[0].dim

    @property
    def dim_b(self) -> int:
        return self.bob[0].dim

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @cached_property
    def layout(self) -> Layout:
        return Layout(
            tuple(m.n_outcomes for m in self.alice),
            tuple(m.n_outcomes for m in self.bob),
        )

    @cached_property
    def operators(self) -> np.ndarray:
        """Stack of operators ``O_r`` with ``P_r = Tr(O_r rho)``, in layout order."""
        ea = [e for m in self.alice for e in m.elements]
        eb = [e for m in self.bob for e in m.elements]
        ia, ib = np.eye(self.dim_a), np.eye(self.dim_b)
        ops = [np.kron(a, b) for a in ea for b in eb]
        ops += [np.kron(a, ib) for a in ea]
        ops += [np.kron(ia, b) for b in eb]
        out = np.array(ops)
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class EventVector:
    joint: np.ndarray
    marg_a: np.ndarray
    marg_b: np.ndarray
    layout: Layout

    def __post_init__(self):
        lay = self.layout
        if (len(self.joint), len(self.marg_a), len(self.marg_b)) != (lay.size_joint, lay.size_a, lay.size_b):
            raise LayoutError("event-vector blocks do not match the layout")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.joint, self.marg_a, self.marg_b])

    def __len__(self) -> int:
        return self.layout.size

    @classmethod
    def from_vector(cls, vec, layout: Layout) -> "EventVector":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (layout.size,):
            raise LayoutError(f"vector of length {vec.size} does not fit layout of size {layout.size}")
        nj, na = layout.size_joint, layout.size_a
        return cls(vec[:nj].copy(), vec[nj : nj + na].copy(), vec[nj + na :].copy(), layout)

    def scaled(self, factor: float) -> "EventVector":
        return EventVector.from_vector(factor * self.vector, self.layout)


def product_event_vector(p_a, p_b, layout: Layout) -> EventVector:
    """``(p_a ⊗ p_b, p_a, p_b)`` in the given layout."""
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    if p_a.shape != (layout.size_a,) or p_b.shape != (layout.size_b,):
        raise LayoutError("marginal blocks do not match the layout")
    return EventVector(np.outer(p_a, p_b).ravel(), p_a.copy(), p_b.copy(), layout)


def event_vector(rho: DensityMatrix, config: MeasurementConfig) -> EventVector:
    """Outcome probabilities of ``config`` on ``rho``."""
    if rho.dims != config.dims:
        raise DimensionError(f"state dims {rho.dims} do not match config dims {config.dims}")
    vals = np.einsum("rij,ji->r", config.operators, rho.matrix)
    return EventVector.from_vector(vals.real, config.layout)


def complete_config(dim_a: int, dim_b: int) -> MeasurementConfig:
    """One von Neumann measurement per traceless basis operator on each side.

    Outcome projectors are onto the eigenvectors of the Gell-Mann matrices, in
    descending eigenvalue order; the eigenvectors come from the deterministic
    eigensolver so the configuration is identical on every run.
    """
    def side(d):
        out = []
        for g in hermitian_basis(d).traceless:
            _, vecs = hermitian_eigensystem(g)
            out.append(projective_from_frame(vecs))
        return tuple(out)

    return MeasurementConfig(side(dim_a), side(dim_b))


def _real_coordinates(ops: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Matrix ``M[r, m] = Tr(ops[r] basis[m])`` (real for Hermitian inputs)."""
    b = np.array(basis)
    return np.real(np.einsum("rij,mji->rm", ops, b))


def _product_basis(dim_a: int, dim_b: int) -> list[np.ndarray]:
    ba, bb = hermitian_basis(dim_a), hermitian_basis(dim_b)
    return [np.kron(s, t) for s in ba.operators for t in bb.operators]


RECONSTRUCTION_RESIDUAL = 1e-8


def reconstruct_state(p: EventVector, config: MeasurementConfig) -> DensityMatrix:
    """Linear-inversion tomography.

    Solves ``Tr(O_r rho) = P_r`` for Hermitian ``rho`` by least squares over a
    Hermitian operator basis. Raises :class:`InconsistentDataError` when the
    system residual exceeds ``1e-8`` or the solution has an eigenvalue below
    ``-1e-8``; the result is never silently projected onto the PSD cone.
    """
    if p.layout != config.layout:
        raise LayoutError("event vector layout does not match the configuration")
    basis = _product_basis(config.dim_a, config.dim_b)
    a = _real_coordinates(config.operators, basis)
    x, _, rank, _ = np.linalg.lstsq(a, p.vector, rcond=None)
    if rank < len(basis):
        raise InconsistentDataError(
            f"configuration is not tomographically complete (rank {rank} < {len(basis)})"
        )
    resid = float(np.max(np.abs(a @ x - p.vector)))
    if resid > RECONSTRUCTION_RESIDUAL:
        raise InconsistentDataError(f"no operator reproduces the data (residual {resid:.3e})")
    m = as_hermitian(sum(c * op for c, op in zip(x, basis)))
    lo = float(np.linalg.eigvalsh(m)[0])
    if lo < -RECONSTRUCTION_RESIDUAL:
        raise InconsistentDataError(f"reconstruction is not positive (min eigenvalue {lo:.3e})")
    tr = np.trace(m).real
    if tr <= 0:
        raise InconsistentDataError("reconstruction has non-positive trace")
    return DensityMatrix(m / tr, config.dim_a, config.dim_b)


@dataclass(frozen=True, eq=False)
class BasisExpansion:
    """``H = Σ μ_ij σ_i⊗τ_j + Σ μ^A_i σ_i⊗1 + Σ μ^B_j 1⊗τ_j + c 1⊗1``."""

    joint: np.ndarray
    alice: np.ndarray
    bob: np.ndarray
    constant: float
    basis_a: HermitianBasis
    basis_b: HermitianBasis

    def operator(self) -> np.ndarray:
        sa, ia = self.basis_a.traceless, self.basis_a.operators[-1]
        tb, ib = self.basis_b.traceless, self.basis_b.operators[-1]
        h = self.constant * np.kron(ia, ib)
        for i, s in enumerate(sa):
            h = h + self.alice[i] * np.kron(s, ib)
            for j, t in enumerate(tb):
                h = h + self.joint[i, j] * np.kron(s, t)
        for j, t in enumerate(tb):
            h = h + self.bob[j] * np.kron(ia, t)
        return h


def expand_in_basis(h, basis_a: HermitianBasis, basis_b: HermitianBasis) -> BasisExpansion:
    """Coefficients of ``h`` against the product of two Hermitian bases.

    Coefficients multiply the basis operators as given (no renormalization), so
    ``σ_z ⊗ σ_z`` expands to a single joint coefficient of 1.
    """
    h = as_hermitian(h)
    da, db = basis_a.dim, basis_b.dim
    if h.shape != (da * db, da * db):
        raise DimensionError("operator does not match the basis dimensions")
    ops = [np.kron(s, t) for s in basis_a.operators for t in basis_b.operators]
    stack = np.array(ops)
    gram = np.real(np.einsum("aij,bji->ab", stack, stack))
    rhs = np.real(np.einsum("aij,ji->a", stack, h))
    coef = np.linalg.solve(gram, rhs).reshape(da * da, db * db)
    return BasisExpansion(
        joint=coef[:-1, :-1].copy(),
        alice=coef[:-1, -1].copy(),
        bob=coef[-1, :-1].copy(),
        constant=float(coef[-1, -1]),
        basis_a=basis_a,
        basis_b=basis_b,
    )
