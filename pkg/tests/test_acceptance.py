"""Acceptance gate: one test per criterion, each reporting PASS/FAIL with its runtime."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from bellcert.certify import cone_membership, membership_for_state, verify_certificate, violation_search
from bellcert.lhvcone import build_generators
from bellcert.measurements import complete_config, event_vector, product_event_vector, reconstruct_state
from bellcert.qcore import min_eigenvalue, partial_transpose
from bellcert.states import (
    random_density,
    random_pure,
    random_separable,
    singlet,
    tiles_upb_state,
    tiles_upb_vectors,
    werner,
)
from bellcert.witness import (
    CANONICAL_ANGLES,
    Witness,
    chsh_config,
    chsh_farkas_vector,
    chsh_witness,
    min_over_products,
    witness_from_farkas,
    witness_to_farkas,
    witness_value,
)

from conftest import ACCEPTANCE_RESULTS, random_hermitian, random_unit3

SQRT2 = np.sqrt(2)


@contextmanager
def criterion(label, budget_s=None):
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - start
        if budget_s is not None:
            assert elapsed < budget_s, f"runtime {elapsed:.2f}s exceeds {budget_s}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_RESULTS.append(f"FAIL  {label}  ({elapsed:.2f}s)  {exc}")
        print(ACCEPTANCE_RESULTS[-1])
        raise
    extra = "  " + ", ".join(f"{k}={v}" for k, v in detail.items()) if detail else ""
    ACCEPTANCE_RESULTS.append(f"PASS  {label}  ({elapsed:.2f}s){extra}")
    print(ACCEPTANCE_RESULTS[-1])


def _sound(res, gens, p, rho, cfg):
    cert = res.certificate
    f = np.asarray(cert.F)
    assert f @ p.vector < -1e-9
    # exact arithmetic on 0/1 generator entries: F is compared against integer columns
    assert float(np.min(f @ gens.matrix.astype(float))) >= -1e-9
    w = witness_from_farkas(cert, cfg)
    assert abs(witness_value(w, rho) - cert.violation) <= 1e-10
    pm = min_over_products(w, restarts=8)
    assert pm.lowest >= -1e-6
    return pm.lowest


def test_1_chsh_pipeline():
    rng = np.random.default_rng(1)
    with criterion("1 CHSH pipeline", budget_s=1.0) as d:
        worst = 0.0
        for _ in range(20):
            angles = [random_unit3(rng) for _ in range(4)]
            w = witness_from_farkas(chsh_farkas_vector(), chsh_config(*angles))
            worst = max(worst, float(np.max(np.abs(w.H - chsh_witness(*angles).H))))
        assert worst <= 1e-12
        val = witness_value(witness_from_farkas(chsh_farkas_vector(), chsh_config(*CANONICAL_ANGLES)), singlet())
        assert abs(val - (1 - SQRT2) / 2) <= 1e-9
        d["max_dev"] = f"{worst:.1e}"
        d["singlet"] = f"{val:.12f}"


def test_2_lhv_cone():
    with criterion("2 LHV cone", budget_s=1.0) as d:
        gens = build_generators(chsh_config(*CANONICAL_ANGLES))
        assert gens.count == 256
        f = chsh_farkas_vector().astype(np.int64)
        assert np.array_equal(f, chsh_farkas_vector())
        vals = f @ gens.matrix.astype(np.int64)
        assert vals.min() >= 0
        d["generators"] = gens.count
        d["min_F.B"] = int(vals.min())


def test_3_membership_soundness():
    rng = np.random.default_rng(3)
    with criterion("3 membership soundness", budget_s=60.0) as d:
        worst = 0.0
        for seed in range(100):
            rho, _ = random_separable(2, 2, 1 + seed % 4, seed=seed)
            for _ in range(5):
                cfg = chsh_config(*(random_unit3(rng) for _ in range(4)))
                res = membership_for_state(rho, cfg)
                assert res.feasible, f"separable seed {seed}: {res.status}"
                assert res.residual <= 1e-9
                worst = max(worst, res.residual)
        d["max_residual"] = f"{worst:.1e}"


def test_4_certificate_soundness():
    rng = np.random.default_rng(4)
    with criterion("4 certificate soundness") as d:
        cases = [(singlet(), chsh_config(*CANONICAL_ANGLES))]
        cases += [(werner(p), chsh_config(*CANONICAL_ANGLES)) for p in (0.72, 0.8, 0.9, 1.0)]
        cases += [(random_pure(2, 2, seed=s), chsh_config(*(random_unit3(rng) for _ in range(4)))) for s in range(60)]
        n_infeasible = 0
        lowest = np.inf
        for rho, cfg in cases:
            p = event_vector(rho, cfg)
            gens = build_generators(cfg)
            res = cone_membership(p, gens, config=cfg)
            if res.infeasible:
                n_infeasible += 1
                lowest = min(lowest, _sound(res, gens, p, rho, cfg))
        assert n_infeasible >= 5
        d["infeasible_verdicts"] = n_infeasible
        d["min_product"] = f"{lowest:.3e}"


def test_5_werner_thresholds():
    cfg = chsh_config(*CANONICAL_ANGLES)
    with criterion("5 Werner thresholds", budget_s=60.0) as d:
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-9:
            mid = (lo + hi) / 2
            if min_eigenvalue(partial_transpose(werner(mid).matrix, (2, 2))) < 0:
                hi = mid
            else:
                lo = mid
        ppt_flip = (lo + hi) / 2
        assert abs(ppt_flip - 1 / 3) <= 1e-6
        lo, hi = 0.5, 1.0
        while hi - lo > 1e-4:
            mid = (lo + hi) / 2
            if membership_for_state(werner(mid), cfg).infeasible:
                hi = mid
            else:
                lo = mid
        lp_flip = (lo + hi) / 2
        assert abs(lp_flip - 1 / SQRT2) <= 0.005
        d["ppt_flip"] = f"{ppt_flip:.9f}"
        d["lp_flip"] = f"{lp_flip:.5f}"


def test_6_tomography():
    with criterion("6 tomography roundtrip") as d:
        worst = 0.0
        for dims in ((2, 2), (2, 3)):
            cfg = complete_config(*dims)
            for seed in range(100):
                rho = random_density(*dims, seed=seed)
                p = event_vector(rho, cfg)
                worst = max(worst, float(np.max(np.abs(reconstruct_state(p, cfg).matrix - rho.matrix))))
                prod = reconstruct_state(product_event_vector(p.marg_a, p.marg_b, cfg.layout), cfg)
                expected = np.kron(rho.reduced("A"), rho.reduced("B"))
                worst = max(worst, float(np.max(np.abs(prod.matrix - expected))))
        assert worst <= 1e-10
        d["max_dev"] = f"{worst:.1e}"


def test_7_decomposition_bridge():
    rng = np.random.default_rng(7)
    with criterion("7 witness decomposition bridge") as d:
        worst = 0.0
        for dims in ((2, 2), (2, 3), (3, 3)):
            cfg = complete_config(*dims)
            n = dims[0] * dims[1]
            w = Witness(random_hermitian(rng, n), *dims)
            f, c = witness_to_farkas(w, cfg)
            rebuilt = witness_from_farkas(f, cfg).H
            worst = max(worst, float(np.max(np.abs(rebuilt - (w.H - c * np.eye(n))))))
            h_shift = w.H - c * np.eye(n)
            for seed in range(50):
                rho = random_density(*dims, seed=seed)
                lhs = f @ event_vector(rho, cfg).vector
                worst = max(worst, abs(lhs - float(np.real(np.trace(h_shift @ rho.matrix)))))
        assert worst <= 1e-10
        d["max_dev"] = f"{worst:.1e}"


@pytest.mark.slow
def test_8_search_efficacy():
    with criterion("8 search efficacy", budget_s=120.0) as d:
        rho = singlet()
        res = violation_search(rho, "2x2,2x2", restarts=32, seed=0)
        assert res.found
        gens = build_generators(res.config)
        p = event_vector(rho, res.config)
        assert verify_certificate(res.certificate, gens, p).ok
        assert res.certificate.violation <= -0.20
        _sound(res.membership, gens, p, rho, res.config)
        none = violation_search(werner(0.2), "2x2,2x2", restarts=32, seed=0)
        assert not none.found
        d["singlet_violation"] = f"{res.certificate.violation:.10f}"
        d["werner0.2_visibility"] = f"{none.best_visibility:.4f}"


def test_9_fixtures():
    with criterion("9 fixture sanity") as d:
        rho = tiles_upb_state()
        pt_min = min_eigenvalue(partial_transpose(rho.matrix, rho.dims))
        assert pt_min >= -1e-12
        resid = max(float(np.linalg.norm(rho.matrix @ v)) for v in tiles_upb_vectors())
        assert resid <= 1e-12
        d["min_pt_eig"] = f"{pt_min:.1e}"
        d["annihilation"] = f"{resid:.1e}"
