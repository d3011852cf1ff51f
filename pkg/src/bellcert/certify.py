"""Cone membership, Farkas certificates and numerical violation search.

Membership of an event vector ``P`` in the LHV cone is the linear feasibility
problem ``G q = P, q >= 0``. It is decided by minimizing the total slack
``Σ (s+ + s-)`` of ``G q + s+ - s- = P``. A positive optimum is certified by
a Farkas vector ``F`` minimizing ``F·P`` subject to ``F·B_λ >= 0`` for
every generator and ``F·u = 1`` for an interior point ``u`` of the cone. That
optimum is an extreme ray of the dual cone, i.e. a single facet-defining Bell
inequality, which is then rescaled to ``max|F| = 1``. Both outcomes are
re-checked by direct multiplication before a verdict is returned.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import LayoutError
from .lhvcone import MAX_MATRIX_BITS, ConeGenerators, build_generators, deterministic_generators
from .measurements import (
    EventVector,
    Layout,
    MeasurementConfig,
    POVM,
    bloch_observable,
    event_vector,
    projective_from_bloch,
    projective_from_frame,
)
from .qcore import DensityMatrix

log = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
MARGINAL = "numerically-marginal"

DEFAULT_TOL = 1e-9
CERT_MARGIN = 1e-9
# HiGHS defaults (1e-7) are looser than the verdict thresholds
LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class FarkasCertificate:
    """Separating vector ``F`` with ``F·P < 0 <= min_λ F·B_λ`` and ``max|F| = 1``."""

    F: np.ndarray
    layout: Layout
    violation: float
    min_generator_value: float
    config: MeasurementConfig | None = None


@dataclass(frozen=True, eq=False)
class MembershipResult:
    status: str
    residual: float
    weights: np.ndarray | None = None
    certificate: FarkasCertificate | None = None
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.status == INFEASIBLE


class CertificateCheck(NamedTuple):
    ok: bool
    violation: float
    min_generator_value: float


def _check_layout(p: EventVector, gens: ConeGenerators) -> None:
    if p.layout != gens.layout:
        raise LayoutError("event vector and generators use different layouts")


def verify_certificate(cert, gens: ConeGenerators, p: EventVector) -> CertificateCheck:
    """Recompute ``F·P`` and ``min_λ F·B_λ`` from scratch.

    ``cert`` may be a :class:`FarkasCertificate` or a raw vector. Passes iff
    ``F·P < -1e-9`` and ``min_λ F·B_λ >= -1e-9``.
    """
    _check_layout(p, gens)
    f = np.asarray(cert.F if isinstance(cert, FarkasCertificate) else cert, dtype=float)
    if f.shape != (gens.layout.size,):
        raise LayoutError("certificate does not match the generator layout")
    violation = float(f @ p.vector)
    lo = float(np.min(gens.values(f)))
    return CertificateCheck(violation < -CERT_MARGIN and lo >= -CERT_MARGIN, violation, lo)


def normalize_farkas(f) -> np.ndarray:
    """Scale ``f`` to unit max-norm; sign is preserved."""
    f = np.asarray(f, dtype=float)
    peak = float(np.max(np.abs(f)))
    if peak == 0.0:
        return f.copy()
    f = f / peak
    # snap LP round-off so that exact Bell coefficients come out exact
    snapped = np.round(f, 9)
    return np.where(np.abs(f - snapped) < 1e-11, snapped, f) + 0.0


def _min_slack(pv: np.ndarray, g: np.ndarray):
    r, n = g.shape
    eye = np.eye(r)
    a_eq = np.hstack([g, eye, -eye])
    c = np.concatenate([np.zeros(n), np.ones(2 * r)])
    return linprog(c, A_eq=a_eq, b_eq=pv, bounds=(0, None), method="highs-ds",
                   options=LP_OPTIONS)


def _separating_vector(pv: np.ndarray, g: np.ndarray):
    # The barycenter of the generators is interior to the (full-dimensional)
    # cone, so {F : G^T F >= 0, F·u = 1} is a polytope whose vertices are the
    # extreme rays of the dual cone: the optimum is a single facet inequality.
    u = g.mean(axis=1)
    return linprog(pv, A_ub=-g.T, b_ub=np.zeros(g.shape[1]), A_eq=u[None, :], b_eq=[1.0],
                   bounds=(None, None), method="highs-ds", options=LP_OPTIONS)


def cone_membership(p: EventVector, gens: ConeGenerators, tol: float = DEFAULT_TOL,
                    config: MeasurementConfig | None = None) -> MembershipResult:
    """Decide whether ``p`` lies in the cone spanned by ``gens``.

    Feasible when the optimal slack is at most ``tol * ||P||_1`` and the
    recovered weights reproduce ``P`` to that accuracy; infeasible when the
    slack exceeds ten times that threshold and the extracted certificate passes
    :func:`verify_certificate`. Everything in between, solver failures and
    failed re-checks are reported as numerically marginal.
    """
    _check_layout(p, gens)
    pv = p.vector
    g = gens.matrix.astype(float)
    thresh = tol * max(float(np.sum(np.abs(pv))), 1.0)

    res = _min_slack(pv, g)
    if res.status != 0:
        return MembershipResult(MARGINAL, float("nan"), message=f"LP failed: {res.message}")
    slack = float(res.fun)

    if slack <= thresh:
        q = np.clip(res.x[: gens.count], 0.0, None)
        resid = float(np.max(np.abs(g @ q - pv), initial=0.0))
        if resid <= thresh:
            return MembershipResult(FEASIBLE, resid, weights=q)
        return MembershipResult(MARGINAL, resid, message="weights failed re-verification")
    if slack <= 10 * thresh:
        return MembershipResult(MARGINAL, slack, message="slack inside the marginal band")

    dual = _separating_vector(pv, g)
    if dual.status != 0:
        return MembershipResult(MARGINAL, slack, message=f"dual LP failed: {dual.message}")
    f = normalize_farkas(dual.x)
    check = verify_certificate(f, gens, p)
    if not check.ok:
        return MembershipResult(MARGINAL, slack, message="certificate failed re-verification")
    cert = FarkasCertificate(f, gens.layout, check.violation, check.min_generator_value, config)
    return MembershipResult(INFEASIBLE, slack, certificate=cert)


def membership_for_state(rho: DensityMatrix, config: MeasurementConfig,
                         tol: float = DEFAULT_TOL) -> MembershipResult:
    return cone_membership(event_vector(rho, config), build_generators(config), tol, config)


# --- violation search -------------------------------------------------------

VISIBILITY_CAP = 10.0


def critical_visibility(p: np.ndarray, p_noise: np.ndarray, g: np.ndarray) -> float:
    """Largest ``v <= 10`` with ``p_noise + v (p - p_noise)`` inside the cone.

    ``p_noise`` must itself lie in the cone. A value below 1 means ``p`` is
    outside. Unlike the slack, this stays informative inside the cone.
    """
    r, n = g.shape
    a_eq = np.hstack([g, -(p - p_noise)[:, None]])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(0, None)] * n + [(0, VISIBILITY_CAP)]
    res = linprog(c, A_eq=a_eq, b_eq=p_noise, bounds=bounds, method="highs-ds")
    if res.status != 0:
        return VISIBILITY_CAP
    return float(res.x[-1])


def _givens_frame(d: int, params: np.ndarray) -> np.ndarray:
    u = np.eye(d, dtype=complex)
    it = iter(params)
    for a in range(d):
        for b in range(a + 1, d):
            th, ph = next(it), next(it)
            g = np.eye(d, dtype=complex)
            g[a, a] = np.cos(th)
            g[b, b] = np.cos(th)
            g[a, b] = -np.exp(-1j * ph) * np.sin(th)
            g[b, a] = np.exp(1j * ph) * np.sin(th)
            u = u @ g
    return u


def _bloch(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _n_params(d: int, k: int) -> int:
    return 2 if (d == 2 and k == 2) else d * (d - 1)


def _measurement_elements(d: int, k: int, params: np.ndarray) -> list[np.ndarray]:
    if d == 2 and k == 2:
        obs = bloch_observable(_bloch(*params))
        return [(np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2]
    u = _givens_frame(d, params)
    projs = [np.outer(u[:, c], u[:, c].conj()) for c in range(d)]
    return projs[: k - 1] + [sum(projs[k - 1 :])]


def _side_povms(d: int, n: int, k: int, params: np.ndarray) -> list[POVM]:
    step = _n_params(d, k)
    out = []
    for m in range(n):
        chunk = params[m * step : (m + 1) * step]
        if d == 2 and k == 2:
            out.append(projective_from_bloch(_bloch(*chunk)))
        else:
            out.append(projective_from_frame(_givens_frame(d, chunk), k))
    return out


@dataclass(frozen=True)
class SearchShape:
    n_a: int
    k_a: int
    n_b: int
    k_b: int

    @classmethod
    def parse(cls, text: str) -> "SearchShape":
        """Parse ``"2x2,2x2"`` (measurements x outcomes, per party)."""
        try:
            a, b = text.split(",")
            n_a, k_a = (int(t) for t in a.lower().split("x"))
            n_b, k_b = (int(t) for t in b.lower().split("x"))
        except ValueError as exc:
            raise ValueError(f"cannot parse shape {text!r}; expected e.g. '2x2,2x2'") from exc
        return cls(n_a, k_a, n_b, k_b)

    def __str__(self) -> str:
        return f"{self.n_a}x{self.k_a},{self.n_b}x{self.k_b}"


@dataclass(frozen=True, eq=False)
class SearchResult:
    found: bool
    best_visibility: float
    best_restart: int
    certificate: FarkasCertificate | None = None
    config: MeasurementConfig | None = None
    membership: MembershipResult | None = None
    visibilities: list = field(default_factory=list)


def _validate_shape(rho: DensityMatrix, shape: SearchShape) -> None:
    for n, k, d in ((shape.n_a, shape.k_a, rho.dim_a), (shape.n_b, shape.k_b, rho.dim_b)):
        if d not in (2, 3):
            raise ValueError("violation search supports qubit and qutrit subsystems only")
        if n < 1 or not 1 <= k <= d:
            raise ValueError(f"invalid shape {shape} for local dimension {d}")
    if shape.n_a * shape.k_a + shape.n_b * shape.k_b > MAX_MATRIX_BITS:
        raise ValueError(f"shape {shape} exceeds the enumeration guard")


def violation_search(rho: DensityMatrix, shape: SearchShape | str, restarts: int = 32,
                     max_evals: int = 400, seed: int = 0, tol: float = DEFAULT_TOL,
                     threads: int = 1) -> SearchResult:
    """Multi-start Nelder-Mead over local projective measurements.

    Each restart draws uniform random angles from its own generator seeded by
    ``(seed, restart)`` and minimizes the critical visibility of the event
    vector against white noise. The best configuration (lowest visibility,
    ties to the earlier restart) is passed to :func:`cone_membership`; only a
    re-verified certificate counts as found. ``found=False`` is a best-effort
    report, not a proof that a local model exists.
    """
    if isinstance(shape, str):
        shape = SearchShape.parse(shape)
    _validate_shape(rho, shape)
    da, db = rho.dims
    pa, pb = _n_params(da, shape.k_a), _n_params(db, shape.k_b)
    n_a_params = shape.n_a * pa
    lay = Layout((shape.k_a,) * shape.n_a, (shape.k_b,) * shape.n_b)
    # normalized strategies give the same visibility at a fraction of the LP size
    g = deterministic_generators(lay).astype(float)

    rho_t = rho.matrix.reshape(da, db, da, db)
    rho_a, rho_b = rho.reduced("A"), rho.reduced("B")
    eye_a, eye_b = np.eye(da) / da, np.eye(db) / db

    def blocks(x):
        ea = np.array([e for m in range(shape.n_a)
                       for e in _measurement_elements(da, shape.k_a, x[m * pa:(m + 1) * pa])])
        eb = np.array([e for m in range(shape.n_b)
                       for e in _measurement_elements(db, shape.k_b, x[n_a_params + m * pb:n_a_params + (m + 1) * pb])])
        return ea, eb

    def vectors(x):
        ea, eb = blocks(x)
        joint = np.real(np.einsum("xij,ykl,jlik->xy", ea, eb, rho_t)).ravel()
        ma = np.real(np.einsum("xij,ji->x", ea, rho_a))
        mb = np.real(np.einsum("xij,ji->x", eb, rho_b))
        na = np.real(np.einsum("xii->x", ea)) / da
        nb = np.real(np.einsum("xii->x", eb)) / db
        noise = np.concatenate([np.outer(na, nb).ravel(), na, nb])
        return np.concatenate([joint, ma, mb]), noise

    def objective(x):
        p, noise = vectors(x)
        return critical_visibility(p, noise, g)

    n_params = n_a_params + shape.n_b * pb

    def run(r):
        rng = np.random.default_rng([seed, r])
        x0 = rng.uniform(0.0, 2 * np.pi, n_params)
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxfev": max_evals, "xatol": 1e-4, "fatol": 1e-8})
        return float(res.fun), res.x

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(run, range(restarts)))
    else:
        runs = [run(r) for r in range(restarts)]

    vis = [v for v, _ in runs]
    best = int(np.argmin(vis))
    best_v, best_x = runs[best]
    log.debug("violation search: best visibility %.6f at restart %d", best_v, best)

    x = best_x
    cfg = MeasurementConfig(
        tuple(_side_povms(da, shape.n_a, shape.k_a, x[:n_a_params])),
        tuple(_side_povms(db, shape.n_b, shape.k_b, x[n_a_params:])),
    )
    result = cone_membership(event_vector(rho, cfg), build_generators(cfg), tol, cfg)
    if result.infeasible:
        return SearchResult(True, best_v, best, result.certificate, cfg, result, vis)
    return SearchResult(False, best_v, best, None, cfg, result, vis)
