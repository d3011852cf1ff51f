import json

import numpy as np
import pytest

from bellcert.certify import membership_for_state
from bellcert.lhvcone import build_generators
from bellcert.measurements import Layout, event_vector
from bellcert.registry import parse_config, parse_state, trine_povm
from bellcert.serialize import (
    certificate_from_json,
    certificate_to_json,
    config_from_json,
    config_to_json,
    density_from_json,
    density_to_json,
    dumps,
    event_vector_from_json,
    event_vector_to_json,
    generators_to_json,
    matrix_from_json,
    matrix_to_json,
    witness_from_json,
    witness_to_json,
)
from bellcert.states import random_density, singlet
from bellcert.witness import Witness, chsh_farkas_vector, witness_from_farkas


def _through_text(doc):
    return json.loads(dumps(doc))


def test_matrix_format():
    doc = matrix_to_json(np.array([[1, 2j], [-2j, -0.0]]))
    assert doc == [[[1.0, 0.0], [0.0, 2.0]], [[0.0, -2.0], [0.0, 0.0]]]


def test_matrix_bit_exact(rng):
    m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert np.array_equal(matrix_from_json(_through_text(matrix_to_json(m))), m)


def test_matrix_rejects_bad_shape():
    with pytest.raises(ValueError):
        matrix_from_json([[1.0, 2.0]])


def test_density_roundtrip():
    rho = random_density(2, 3, seed=4)
    back = density_from_json(_through_text(density_to_json(rho)))
    assert back.dims == (2, 3) and np.array_equal(back.matrix, rho.matrix)


def test_config_roundtrip():
    cfg = parse_config("z-x-trine")
    back = config_from_json(_through_text(config_to_json(cfg)))
    assert back.layout == cfg.layout
    assert np.array_equal(back.operators, cfg.operators)


def test_event_vector_roundtrip(chsh_config):
    p = event_vector(singlet(), chsh_config)
    back = event_vector_from_json(_through_text(event_vector_to_json(p)))
    assert np.array_equal(back.vector, p.vector) and back.layout == p.layout


def test_certificate_roundtrip(chsh_config):
    cert = membership_for_state(singlet(), chsh_config).certificate
    back = certificate_from_json(_through_text(certificate_to_json(cert)))
    assert np.array_equal(back.F, cert.F) and back.violation == cert.violation
    assert back.config.layout == chsh_config.layout


def test_witness_roundtrip(chsh_config):
    w = witness_from_farkas(chsh_farkas_vector(), chsh_config)
    back = witness_from_json(_through_text(witness_to_json(w)))
    assert np.array_equal(back.H, w.H)
    assert np.array_equal(back.provenance["F"], chsh_farkas_vector())
    external = witness_from_json(_through_text(witness_to_json(Witness(np.eye(4), 2, 2, offset=1.0))))
    assert external.offset == 1.0 and external.provenance == {"kind": "external"}


def test_generators_export():
    doc = _through_text(generators_to_json(build_generators(Layout((1,), (1,)))))
    m = np.real(matrix_from_json(doc["matrix"]))
    assert m.shape == (3, 4)
    assert np.array_equal(m, [[0, 0, 0, 1], [0, 0, 1, 1], [0, 1, 0, 1]])


def test_layout_json():
    lay = Layout((2, 3), (4,))
    assert Layout.from_json(_through_text(lay.to_json())) == lay


class TestRegistry:
    @pytest.mark.parametrize("name,dims", [
        ("singlet", (2, 2)), ("tiles", (3, 3)), ("werner:p=0.3", (2, 2)),
        ("maxmixed:2,3", (2, 3)), ("random:3,2", (3, 2)), ("separable:2,3:terms=2:seed=1", (2, 3)),
    ])
    def test_states(self, name, dims):
        assert parse_state(name).dims == dims

    def test_random_seed_option(self):
        assert np.array_equal(parse_state("random:2,2:seed=5").matrix, parse_state("random:2,2", seed=5).matrix)
        assert not np.array_equal(parse_state("random:2,2", seed=1).matrix, parse_state("random:2,2", seed=2).matrix)

    @pytest.mark.parametrize("bad", ["nope", "werner", "werner:p=2", "random:2,2:seed"])
    def test_bad_state(self, bad):
        with pytest.raises((ValueError, KeyError)):
            parse_state(bad)

    def test_state_file(self, tmp_path):
        path = tmp_path / "rho.json"
        path.write_text(dumps(density_to_json(singlet())))
        assert np.array_equal(parse_state(str(path)).matrix, singlet().matrix)

    def test_configs(self):
        assert parse_config("chsh-canonical").layout == Layout((2, 2), (2, 2))
        assert parse_config("complete:3,2").layout == Layout((3,) * 8, (2,) * 3)
        with pytest.raises(ValueError):
            parse_config("bogus")

    def test_trine(self):
        t = trine_povm()
        assert t.n_outcomes == 3
        assert np.allclose(sum(t.elements), np.eye(2))
        assert all(np.isclose(np.trace(e).real, 2 / 3) for e in t.elements)
