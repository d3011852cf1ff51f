"""Reference states and separability primitives.

Random samplers use ``numpy.random.default_rng(seed)`` (PCG64). Stream layout
for :func:`random_separable`: the Dirichlet weights are drawn first, then for
each term the A vector and then the B vector, each as a block of real parts
followed by a block of imaginary parts of standard normals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import DensityMatrix, min_eigenvalue, partial_transpose

PPT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SeparableEnsemble:
    """Weights ``p_i`` and pure product factors ``(|a_i>, |b_i>)`` of a separable state."""

    weights: np.ndarray
    factors: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("ensemble weights must be nonnegative and sum to 1")
        for a, b in self.factors:
            if abs(np.linalg.norm(a) - 1) > 1e-12 or abs(np.linalg.norm(b) - 1) > 1e-12:
                raise ValueError("ensemble factors must be unit vectors")
        object.__setattr__(self, "weights", w)

    def density_matrix(self) -> DensityMatrix:
        a0, b0 = self.factors[0]
        rho = sum(
            p * np.kron(np.outer(a, a.conj()), np.outer(b, b.conj()))
            for p, (a, b) in zip(self.weights, self.factors)
        )
        return DensityMatrix.normalized(rho, len(a0), len(b0))


def bell_vector(name: str = "psi-") -> np.ndarray:
    """Two-qubit Bell vector: ``'phi+'``, ``'phi-'``, ``'psi+'`` or ``'psi-'``."""
    s = 1 / np.sqrt(2)
    vecs = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    return np.array(vecs[name], dtype=complex)


def singlet() -> DensityMatrix:
    """Projector onto ``(|01> - |10>)/sqrt(2)``."""
    return DensityMatrix.from_vector(bell_vector("psi-"), 2, 2)


def maximally_mixed(dim_a: int, dim_b: int) -> DensityMatrix:
    n = dim_a * dim_b
    return DensityMatrix(np.eye(n, dtype=complex) / n, dim_a, dim_b)


def werner(p: float) -> DensityMatrix:
    """Two-qubit Werner state ``p * singlet + (1 - p) * I/4``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {p}")
    m = p * singlet().matrix + (1 - p) * np.eye(4) / 4
    return DensityMatrix(m, 2, 2)


def _haar_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    re = rng.standard_normal(d)
    im = rng.standard_normal(d)
    v = re + 1j * im
    return v / np.linalg.norm(v)


def random_separable(dim_a: int, dim_b: int, terms: int, seed) -> tuple[DensityMatrix, SeparableEnsemble]:
    """Mixture of ``terms`` Haar-random pure product states with Dirichlet(1) weights."""
    if terms < 1:
        raise ValueError("need at least one term")
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(terms)) if terms > 1 else np.ones(1)
    factors = []
    for _ in range(terms):
        a = _haar_vector(rng, dim_a)
        b = _haar_vector(rng, dim_b)
        factors.append((a, b))
    ens = SeparableEnsemble(weights / weights.sum(), tuple(factors))
    return ens.density_matrix(), ens


def random_density(dim_a: int, dim_b: int, seed) -> DensityMatrix:
    """``G G^† / Tr(G G^†)`` with ``G`` complex Gaussian (Hilbert-Schmidt measure)."""
    if dim_a < 2 or dim_b < 2:
        raise ValueError("dimensions must be at least 2")
    rng = np.random.default_rng(seed)
    n = dim_a * dim_b
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return DensityMatrix.normalized(g @ g.conj().T, dim_a, dim_b)


def random_pure(dim_a: int, dim_b: int, seed) -> DensityMatrix:
    rng = np.random.default_rng(seed)
    return DensityMatrix.from_vector(_haar_vector(rng, dim_a * dim_b), dim_a, dim_b)


def tiles_upb_vectors() -> list[np.ndarray]:
    """The five members of the 3x3 Tiles unextendible product basis."""
    e = np.eye(3, dtype=complex)
    s = 1 / np.sqrt(2)
    pairs = [
        (e[0], s * (e[0] - e[1])),
        (s * (e[0] - e[1]), e[2]),
        (e[2], s * (e[1] - e[2])),
        (s * (e[1] - e[2]), e[0]),
        ((e[0] + e[1] + e[2]) / np.sqrt(3), (e[0] + e[1] + e[2]) / np.sqrt(3)),
    ]
    return [np.kron(a, b) for a, b in pairs]


def tiles_upb_state() -> DensityMatrix:
    """Normalized projector onto the complement of the Tiles UPB (PPT, entangled)."""
    proj = sum(np.outer(v, v.conj()) for v in tiles_upb_vectors())
    return DensityMatrix((np.eye(9) - proj) / 4, 3, 3)


def ppt_test(rho: DensityMatrix, tol: float = PPT_TOL) -> tuple[bool, float]:
    """Positive-partial-transpose check.

    Returns ``(is_ppt, min_eigenvalue)`` of the partial transpose on B. For
    2x2 and 2x3 systems ``is_ppt`` is an exact separability verdict; in higher
    dimensions PPT states can still be entangled (``tiles_upb_state``).
    """
    lo = min_eigenvalue(partial_transpose(rho.matrix, rho.dims, "B"))
    return lo >= -tol, lo
