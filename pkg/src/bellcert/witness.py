"""Entanglement witnesses built from, and decomposed into, Farkas vectors.

Given a Farkas vector ``F`` over a measurement configuration, the operator

    H = Σ F_joint E^A ⊗ E^B + Σ F_A E^A ⊗ 1 + Σ F_B 1 ⊗ E^B

satisfies ``Tr(H rho) = F · P(rho)`` for every state, so the Bell inequality
``F · B_λ >= 0`` makes ``H`` nonnegative on all separable states. The reverse
map expands an arbitrary witness over a tomographically complete
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, LayoutError
from .measurements import (
    Layout,
    MeasurementConfig,
    bloch_observable,
    projective_from_bloch,
)
from .qcore import DensityMatrix, as_hermitian, hermitian_eigensystem, partial_transpose

SQRT2 = np.sqrt(2.0)

# Singlet-optimal CHSH settings: Tr(B rho_singlet) = 2*sqrt(2).
CANONICAL_ANGLES = (
    -np.array([1.0, 0.0, 1.0]) / SQRT2,  # a
    np.array([1.0, 0.0, -1.0]) / SQRT2,  # a'
    np.array([1.0, 0.0, 0.0]),  # b
    np.array([0.0, 0.0, 1.0]),  # b'
)

CHSH_LAYOUT = Layout((2, 2), (2, 2))


@dataclass(frozen=True, eq=False)
class Witness:
    """Hermitian operator on ``C^dim_a ⊗ C^dim_b`` with a record of its origin.

    ``offset`` is the identity coefficient ``c`` split off by
    :func:`witness_to_farkas`; it is informational and already included in ``H``.
    """

    H: np.ndarray
    dim_a: int
    dim_b: int
    provenance: dict = field(default_factory=lambda: {"kind": "external"})
    offset: float = 0.0

    def __post_init__(self):
        h = as_hermitian(self.H)
        n = self.dim_a * self.dim_b
        if h.shape != (n, n):
            raise DimensionError(f"operator of shape {h.shape} does not act on {self.dim_a}x{self.dim_b}")
        h.setflags(write=False)
        object.__setattr__(self, "H", h)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)


def _farkas_vector(f) -> np.ndarray:
    return np.asarray(getattr(f, "F", f), dtype=float)


def witness_from_farkas(f, config: MeasurementConfig) -> Witness:
    """Operator whose expectation on any state equals ``F · P``."""
    fv = _farkas_vector(f)
    if fv.shape != (config.layout.size,):
        raise LayoutError(f"Farkas vector of length {fv.size} does not match layout of size {config.layout.size}")
    h = np.tensordot(fv, config.operators, axes=1)
    return Witness(h, config.dim_a, config.dim_b, {"kind": "farkas", "F": fv.copy(), "config": config})


def witness_value(w: Witness, rho: DensityMatrix) -> float:
    if w.dims != rho.dims:
        raise DimensionError(f"witness dims {w.dims} do not match state dims {rho.dims}")
    val = np.trace(w.H @ rho.matrix)
    assert abs(val.imag) <= 1e-12 * max(1.0, abs(val.real)), "non-real expectation of a Hermitian operator"
    return float(val.real)


def chsh_farkas_vector() -> np.ndarray:
    """``p_a - p_ab + p_b' - p_a'b' + p_a'b - p_ab' >= 0`` on the (+,+) outcomes.

    Layout is :data:`CHSH_LAYOUT`: Alice measures ``a, a'``, Bob ``b, b'``,
    outcome 0 is ``+1``.
    """
    lay = CHSH_LAYOUT
    f = np.zeros(lay.size)
    f[lay.joint_index(0, 0, 0, 0)] = -1.0  # ab
    f[lay.joint_index(1, 0, 1, 0)] = -1.0  # a'b'
    f[lay.joint_index(1, 0, 0, 0)] = 1.0  # a'b
    f[lay.joint_index(0, 0, 1, 0)] = -1.0  # ab'
    f[lay.marg_a_index(0, 0)] = 1.0  # a
    f[lay.marg_b_index(1, 0)] = 1.0  # b'
    return f


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-10:
        raise ValueError(f"expected a unit 3-vector, got {v}")
    return v


def chsh_config(a, a2, b, b2) -> MeasurementConfig:
    return MeasurementConfig(
        (projective_from_bloch(a), projective_from_bloch(a2)),
        (projective_from_bloch(b), projective_from_bloch(b2)),
    )


def canonical_chsh_config() -> MeasurementConfig:
    return chsh_config(*CANONICAL_ANGLES)


def chsh_bell_operator(a, a2, b, b2) -> np.ndarray:
    """``a·σ ⊗ (b + b')·σ + a'·σ ⊗ (b' - b)·σ``."""
    a, a2, b, b2 = (_unit(v) for v in (a, a2, b, b2))
    return (np.kron(bloch_observable(a), bloch_observable(b + b2))
            + np.kron(bloch_observable(a2), bloch_observable(b2 - b)))


def chsh_witness(a, a2, b, b2) -> Witness:
    """``(2·1 - B) / 4`` for the Bell operator of the given settings."""
    h = (2 * np.eye(4) - chsh_bell_operator(a, a2, b, b2)) / 4
    prov = {"kind": "chsh", "angles": [np.asarray(v, dtype=float).tolist() for v in (a, a2, b, b2)]}
    return Witness(h, 2, 2, prov)


def ppt_witness(rho: DensityMatrix) -> Witness:
    """``(1 ⊗ T)(|ψ><ψ|)`` with ``ψ`` the lowest eigenvector of ``rho^{T_B}``.

    ``Tr(H rho)`` equals the smallest eigenvalue of the partial transpose, so
    this detects every NPT state.
    """
    vals, vecs = hermitian_eigensystem(partial_transpose(rho.matrix, rho.dims, "B"))
    psi = vecs[:, -1]
    h = partial_transpose(np.outer(psi, psi.conj()), rho.dims, "B")
    return Witness(h, rho.dim_a, rho.dim_b, {"kind": "ppt"})


# --- minimization over product states ------------------------------------------


@dataclass(frozen=True, eq=False)
class ProductMinimum:
    """Upper bound on ``min Tr(H σ)`` over product states and where it was attained."""

    value: float
    state_a: np.ndarray
    state_b: np.ndarray
    grid_value: float | None = None

    @property
    def level(self) -> str:
        return "see-saw+grid" if self.grid_value is not None else "see-saw"

    @property
    def lowest(self) -> float:
        return self.value if self.grid_value is None else min(self.value, self.grid_value)


def _lowest(h: np.ndarray) -> tuple[float, np.ndarray]:
    w, v = np.linalg.eigh(h)
    return float(w[0]), v[:, 0]


def _seesaw(ht: np.ndarray, b: np.ndarray, tol: float, max_iter: int):
    prev = np.inf
    for _ in range(max_iter):
        ha = np.einsum("k,ikjl,l->ij", b.conj(), ht, b)
        _, a = _lowest(ha)
        hb = np.einsum("i,ikjl,j->kl", a.conj(), ht, a)
        val, b = _lowest(hb)
        if prev - val <= tol:
            break
        prev = val
    return val, a, b


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors."""
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (1 + np.sqrt(5)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _qubit_kets(bloch: np.ndarray) -> np.ndarray:
    theta = np.arccos(np.clip(bloch[:, 2], -1, 1))
    phi = np.arctan2(bloch[:, 1], bloch[:, 0])
    return np.column_stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _grid_minimum(ht: np.ndarray, points: int) -> float:
    """Grid one qubit's Bloch sphere and minimize the other exactly; both ways."""
    kets = _qubit_kets(fibonacci_sphere(points))
    best = np.inf
    for spec in ("ni,ikjl,nj->nkl", "nk,ikjl,nl->nij"):
        h = np.einsum(spec, kets.conj(), ht, kets)
        tr = np.real(h[:, 0, 0] + h[:, 1, 1])
        gap = np.sqrt(np.real(h[:, 0, 0] - h[:, 1, 1]) ** 2 + 4 * np.abs(h[:, 0, 1]) ** 2)
        best = min(best, float(np.min((tr - gap) / 2)))
    return best


def min_over_products(w: Witness, restarts: int = 16, seed: int = 0, tol: float = 1e-12,
                      max_iter: int = 2000, grid_points: int = 10_000) -> ProductMinimum:
    """See-saw minimization of ``<a,b|H|a,b>``.

    Alternates exact eigen-minimization over one factor with the other held
    fixed, from ``restarts`` random starts; the returned value is attained by
    an explicit product state and therefore an upper bound on the true
    minimum. For two qubits a Bloch-sphere grid (``grid_points`` per side,
    with the other side minimized exactly) is evaluated as a cross-check.
    """
    da, db = w.dims
    ht = w.H.reshape(da, db, da, db)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        b0 = rng.standard_normal(db) + 1j * rng.standard_normal(db)
        val, a, b = _seesaw(ht, b0 / np.linalg.norm(b0), tol, max_iter)
        if best is None or val < best[0]:
            best = (val, a, b)
    grid = _grid_minimum(ht, grid_points) if (da, db) == (2, 2) else None
    return ProductMinimum(best[0], best[1], best[2], grid)


# --- decomposition over a complete configuration -------------------------------


def _hermitian_to_real(ops: np.ndarray) -> np.ndarray:
    flat = ops.reshape(ops.shape[0], -1)
    return np.hstack([flat.real, flat.imag]).T


def witness_to_farkas(w: Witness, complete: MeasurementConfig, tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Expand ``H`` over the outcome projectors of a complete configuration.

    Returns ``(F, c)`` with ``c = Tr(H) / (dA dB)`` and ``F`` the minimum-norm
    coefficients reproducing ``H - c·1``; hence ``F · P(rho) = Tr((H - c) rho)``.
    """
    if w.dims != complete.dims:
        raise DimensionError(f"witness dims {w.dims} do not match config dims {complete.dims}")
    n = w.dim_a * w.dim_b
    c = float(np.trace(w.H).real) / n
    target = w.H - c * np.eye(n)
    a = _hermitian_to_real(complete.operators)
    rhs = np.concatenate([target.ravel().real, target.ravel().imag])
    f, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    resid = float(np.max(np.abs(a @ f - rhs), initial=0.0))
    if resid > tol * max(1.0, float(np.max(np.abs(w.H)))):
        raise np.linalg.LinAlgError(f"projector system cannot reproduce the witness (residual {resid:.3e})")
    return f, c


@dataclass(frozen=True, eq=False)
class WitnessReport:
    value: float
    product_minimum: ProductMinimum
    passed: bool

    @property
    def reasons(self) -> list[str]:
        out = []
        if self.value >= -1e-9:
            out.append("state is not detected (Tr(H rho) >= -1e-9)")
        if self.product_minimum.lowest < -1e-6:
            out.append("operator is negative on a product state")
        return out


def verify_witness(w: Witness, rho: DensityMatrix, samples: int = 10_000, restarts: int = 16,
                   seed: int = 0) -> WitnessReport:
    """Pass iff ``Tr(H rho) < -1e-9`` and the product-state minimum is ``>= -1e-6``."""
    value = witness_value(w, rho)
    pm = min_over_products(w, restarts=restarts, seed=seed, grid_points=samples)
    passed = value < -1e-9 and pm.lowest >= -1e-6
    return WitnessReport(value, pm, passed)
