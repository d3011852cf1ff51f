import itertools

import numpy as np
import pytest

from bellcert.certify import critical_visibility
from bellcert.errors import LayoutError, ScenarioTooLargeError
from bellcert.lhvcone import (
    BooleanAssignment,
    build_generators,
    deterministic_generators,
    enumerate_assignments,
    generator_vector,
)
from bellcert.measurements import Layout, MeasurementConfig, event_vector, projective_from_bloch
from bellcert.qcore import DensityMatrix
from bellcert.registry import parse_config
from bellcert.states import maximally_mixed, random_density

from conftest import random_unit3

CHSH = Layout((2, 2), (2, 2))


def test_three_qubit_measurements_give_64_patterns():
    lay = Layout((2, 2, 2), (1,))
    patterns = {a.bits_a for a in enumerate_assignments(lay)}
    assert len(patterns) == 64


def test_chsh_count():
    items = list(enumerate_assignments(CHSH))
    assert len(items) == 256
    assert [a.lambda_index for a in items] == list(range(256))


def test_single_outcome_count():
    assert len(list(enumerate_assignments(Layout((1,), (1,))))) == 4


def test_index_decoding_a_major():
    a = BooleanAssignment.from_index(0b1001_010, 4, 3)
    assert a.bits_a == (1, 0, 0, 1) and a.bits_b == (0, 1, 0)
    with pytest.raises(ValueError):
        BooleanAssignment.from_index(128, 4, 3)


def test_worked_example_vector():
    lay = Layout((2, 2), (3,))
    a = BooleanAssignment(0b1001_010, (1, 0, 0, 1), (0, 1, 0))
    v = generator_vector(a, lay)
    assert np.array_equal(v.joint, np.outer([1, 0, 0, 1], [0, 1, 0]).ravel())
    assert np.array_equal(v.marg_a, [1, 0, 0, 1]) and np.array_equal(v.marg_b, [0, 1, 0])
    assert np.array_equal(build_generators(lay).column(a.lambda_index), v.vector)


def test_all_zero_and_all_one():
    gens = build_generators(CHSH)
    assert not gens.column(0).any()
    assert np.all(gens.column(255) == 1)


def test_shape_mismatch():
    with pytest.raises(LayoutError):
        generator_vector(BooleanAssignment(0, (0, 0), (0,)), CHSH)


def test_chsh_matrix_shape_and_entries():
    m = build_generators(CHSH).matrix
    assert m.shape == (24, 256)
    assert set(np.unique(m)) <= {0, 1}


def test_columns_distinct():
    m = build_generators(parse_config("z-x-trine")).matrix
    assert len({col.tobytes() for col in m.T}) == m.shape[1] == 2**7


def test_matrix_matches_generator_vector():
    lay = Layout((2, 3), (2,))
    gens = build_generators(lay)
    for a in enumerate_assignments(lay):
        assert np.array_equal(gens.column(a.lambda_index), generator_vector(a, lay).vector)


def test_joint_block_factors():
    gens = build_generators(CHSH)
    for col in gens.matrix.T:
        joint, ma, mb = col[:16], col[16:20], col[20:]
        assert np.array_equal(joint, np.outer(ma, mb).ravel())


def test_unphysical_pattern_present():
    # x and z outcomes "+" and "1" at once: no qubit state reproduces this
    gens = build_generators(Layout((2, 2), (2, 2)))
    cols = {tuple(gens.assignment(i).bits_a) for i in range(gens.count)}
    assert (1, 0, 0, 1) in cols
    assert (1, 1, 0, 0) in cols  # both outcomes of one measurement


def test_deterministic_product_vectors_are_columns(rng):
    gens = build_generators(CHSH)
    cols = {tuple(c) for c in gens.matrix.T}
    for _ in range(30):
        a = random_unit3(rng)
        b = random_unit3(rng)
        sign_a = rng.choice([-1, 1], size=2)
        sign_b = rng.choice([-1, 1], size=2)
        # each party's state is an eigenstate of both of its measurements
        cfg = MeasurementConfig(
            (projective_from_bloch(sign_a[0] * a), projective_from_bloch(sign_a[1] * a)),
            (projective_from_bloch(sign_b[0] * b), projective_from_bloch(sign_b[1] * b)),
        )
        ka = projective_from_bloch(a).elements[0]
        kb = projective_from_bloch(b).elements[0]
        p = event_vector(DensityMatrix(np.kron(ka, kb), 2, 2), cfg).vector
        rounded = np.round(p)
        assert np.max(np.abs(p - rounded)) < 1e-12
        assert tuple(rounded.astype(np.int8)) in cols


def test_guards():
    with pytest.raises(ScenarioTooLargeError):
        build_generators(Layout((2,) * 12, (2,)))
    with pytest.raises(ScenarioTooLargeError):
        next(enumerate_assignments(Layout((2,) * 16, (1,))))


def test_deterministic_generators_counts():
    assert deterministic_generators(CHSH).shape == (24, 16)
    assert deterministic_generators(Layout((3, 2), (3,))).shape == (5 * 3 + 5 + 3, 18)


def test_deterministic_columns_are_cone_columns():
    lay = Layout((2, 3), (2, 2))
    full = {c.tobytes() for c in build_generators(lay).matrix.T}
    for c in deterministic_generators(lay).T:
        assert c.tobytes() in full


@pytest.mark.parametrize("dims,outcomes", [
    ((2, 2), ((2, 2), (2, 2))),
    ((3, 2), ((3, 3), (2, 2))),
    ((3, 3), ((3, 2), (3,))),
])
def test_normalized_and_unnormalized_cones_agree(dims, outcomes, rng):
    # the search objective uses the normalized formulation; it must give the
    # same critical visibility as the full cone
    from bellcert.certify import _givens_frame
    from bellcert.measurements import projective_from_frame

    def side(d, ks):
        return tuple(projective_from_frame(_givens_frame(d, rng.uniform(0, 2 * np.pi, d * (d - 1))), k) for k in ks)

    lay = Layout(*outcomes)
    full = build_generators(lay).matrix.astype(float)
    det = deterministic_generators(lay).astype(float)
    for seed in range(5):
        cfg = MeasurementConfig(side(dims[0], outcomes[0]), side(dims[1], outcomes[1]))
        rho = random_density(*dims, seed=seed)
        p = event_vector(rho, cfg).vector
        p0 = event_vector(maximally_mixed(*dims), cfg).vector
        assert critical_visibility(p, p0, full) == pytest.approx(critical_visibility(p, p0, det), abs=1e-7)
