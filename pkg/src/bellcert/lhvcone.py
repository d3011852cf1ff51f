"""Extremal rays of the local-hidden-variable cone.

Each hidden-variable value ``λ`` assigns 0 or 1 to every outcome of every
measurement, independently on both sides. The generator is the event vector
``(b_A ⊗ b_B, b_A, b_B)``. Outcome assignments are *not* required to be
normalized per measurement.

``lambda_index`` encodes the concatenated bits ``b_A + b_B`` as a binary
number, most significant bit first, so Alice's bits vary slowest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import LayoutError, ScenarioTooLargeError
from .measurements import EventVector, Layout, MeasurementConfig, product_event_vector

MAX_ENUMERATION_BITS = 30
# Dense generator matrices beyond this many bits do not fit in memory.
MAX_MATRIX_BITS = 22


@dataclass(frozen=True)
class BooleanAssignment:
    lambda_index: int
    bits_a: tuple
    bits_b: tuple

    @classmethod
    def from_index(cls, index: int, n_a: int, n_b: int) -> "BooleanAssignment":
        if not 0 <= index < 2 ** (n_a + n_b):
            raise ValueError(f"lambda index {index} out of range for {n_a}+{n_b} bits")
        bits = [(index >> (n_a + n_b - 1 - p)) & 1 for p in range(n_a + n_b)]
        return cls(index, tuple(bits[:n_a]), tuple(bits[n_a:]))


def _layout(config_or_layout) -> Layout:
    if isinstance(config_or_layout, Layout):
        return config_or_layout
    return config_or_layout.layout


def _guard(layout: Layout, limit: int) -> int:
    nbits = layout.size_a + layout.size_b
    if nbits > limit:
        raise ScenarioTooLargeError(f"{nbits} outcome bits exceeds the limit of {limit}")
    return nbits


def enumerate_assignments(config: MeasurementConfig | Layout) -> Iterator[BooleanAssignment]:
    """All ``2**(Σk + Σl)`` Boolean assignments in increasing ``lambda_index``."""
    lay = _layout(config)
    nbits = _guard(lay, MAX_ENUMERATION_BITS)
    for idx in range(2**nbits):
        yield BooleanAssignment.from_index(idx, lay.size_a, lay.size_b)


def generator_vector(a: BooleanAssignment, config: MeasurementConfig | Layout) -> EventVector:
    lay = _layout(config)
    if len(a.bits_a) != lay.size_a or len(a.bits_b) != lay.size_b:
        raise LayoutError("assignment does not match the configuration shape")
    return product_event_vector(a.bits_a, a.bits_b, lay)


def _bit_table(n: int) -> np.ndarray:
    """Rows are all n-bit patterns in binary counting order (MSB first)."""
    idx = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)


@dataclass(frozen=True, eq=False)
class ConeGenerators:
    """Generator matrix whose column ``λ`` is ``B_λ`` in event-vector layout."""

    layout: Layout
    matrix: np.ndarray

    @property
    def count(self) -> int:
        return self.matrix.shape[1]

    def column(self, lambda_index: int) -> np.ndarray:
        return self.matrix[:, lambda_index]

    def assignment(self, lambda_index: int) -> BooleanAssignment:
        return BooleanAssignment.from_index(lambda_index, self.layout.size_a, self.layout.size_b)

    def values(self, f) -> np.ndarray:
        """``F · B_λ`` for every generator."""
        f = np.asarray(f, dtype=float)
        if f.shape != (self.layout.size,):
            raise LayoutError("vector does not match the generator layout")
        return f @ self.matrix


def build_generators(config: MeasurementConfig | Layout) -> ConeGenerators:
    """Dense 0/1 generator matrix, one column per ``lambda_index``.

    Built from the two one-sided bit tables, so column ``λ = iA * 2**nB + iB``
    is ``(bitsA[iA] ⊗ bitsB[iB], bitsA[iA], bitsB[iB])``.
    """
    lay = _layout(config)
    _guard(lay, MAX_MATRIX_BITS)
    na, nb = lay.size_a, lay.size_b
    ta, tb = _bit_table(na), _bit_table(nb)
    ca, cb = ta.shape[0], tb.shape[0]
    # rows (a, b) of the joint block: bitA[a] * bitB[b], columns (iA, iB)
    joint = (ta.T[:, None, :, None] * tb.T[None, :, None, :]).reshape(na * nb, ca * cb)
    marg_a = np.repeat(ta.T, cb, axis=1)
    marg_b = np.tile(tb.T, (1, ca))
    mat = np.vstack([joint, marg_a, marg_b]).astype(np.int8)
    mat.setflags(write=False)
    return ConeGenerators(lay, mat)


def deterministic_generators(config: MeasurementConfig | Layout) -> np.ndarray:
    """Columns for the normalized formulation: exactly one outcome per measurement.

    ``Π k(i) · Π l(j)`` columns in the event-vector layout, Alice-major. For
    per-measurement normalized event vectors this spans the same set as the
    full unnormalized cone, with far fewer columns.
    """
    lay = _layout(config)

    def side(outcomes):
        rows = []
        for choice in itertools.product(*(range(k) for k in outcomes)):
            rows.append(np.concatenate([np.eye(k, dtype=np.int8)[c] for k, c in zip(outcomes, choice)]))
        return np.array(rows, dtype=np.int8)

    da, db = side(lay.outcomes_a), side(lay.outcomes_b)
    ca, cb = len(da), len(db)
    joint = (da.T[:, None, :, None] * db.T[None, :, None, :]).reshape(lay.size_joint, ca * cb)
    return np.vstack([joint, np.repeat(da.T, cb, axis=1), np.tile(db.T, (1, ca))]).astype(np.int8)
