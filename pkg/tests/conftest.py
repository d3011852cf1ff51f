import numpy as np
import pytest

from bellcert.states import singlet
from bellcert.witness import canonical_chsh_config


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def random_unit3(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def chsh_config():
    return canonical_chsh_config()


@pytest.fixture(scope="session")
def rho_singlet():
    return singlet()


def assert_sound_certificate(result, gens, p, rho=None, config=None):
    """Independent re-check of an infeasible verdict and of its witness."""
    from bellcert.certify import verify_certificate
    from bellcert.witness import min_over_products, witness_from_farkas, witness_value

    cert = result.certificate
    assert cert is not None
    f = np.asarray(cert.F, dtype=float)
    assert float(f @ p.vector) < -1e-9
    assert float(np.min(f @ gens.matrix.astype(float))) >= -1e-9
    assert verify_certificate(cert, gens, p).ok
    cfg = config if config is not None else cert.config
    if rho is not None and cfg is not None:
        w = witness_from_farkas(cert, cfg)
        assert abs(witness_value(w, rho) - cert.violation) <= 1e-10
        assert min_over_products(w, restarts=8).value >= -1e-6


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
