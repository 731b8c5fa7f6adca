from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from services.space_service import (
    build_space,
    conditional,
    event_from_members,
    event_probability,
    refine,
    to_event,
    uniform,
    weighted,
)
from utils.bitmask import (
    bits_to_mask,
    complement,
    mask_to_bits,
    membership_matrix,
    popcounts,
    submasks,
)
from utils.exceptions import (
    ConfigError,
    ForeignEvent,
    NegativeWeight,
    NullConditioningEvent,
    SpaceError,
    TooManyAtoms,
    ZeroTotal,
)


def test_uniform_weights_are_exact(u4):
    assert u4.weights == (Fraction(1, 4),) * 4
    assert u4.is_uniform
    assert u4.probability.exact


def test_weighted_two_point(two_point):
    assert two_point.weights == (Fraction(2, 3), Fraction(1, 3))
    assert not two_point.is_uniform


def test_weights_must_sum_to_one():
    with pytest.raises(SpaceError):
        weighted(['1/2', '1/3'])


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        weighted(['3/2', '-1/2'])


def test_zero_total_rejected():
    with pytest.raises(ZeroTotal):
        weighted(['0', '0'])


def test_atom_cap():
    with pytest.raises(TooManyAtoms):
        uniform(25)
    assert uniform(25, enforce_cap=False).n == 25


def test_unknown_space_type():
    with pytest.raises(ConfigError):
        build_space({'type': 'gaussian', 'n': 3})


def test_event_probability(u4):
    event = event_from_members(u4, [0, 2])
    assert event_probability(u4, event) == Fraction(1, 2)
    assert event.complement().members == [1, 3]


def test_foreign_events():
    space = uniform(3)
    with pytest.raises(ForeignEvent):
        to_event(space, 8)
    with pytest.raises(ForeignEvent):
        event_from_members(space, [3])


def test_conditional_probability(u4):
    conditioned = conditional(u4.probability, bits_to_mask([0, 1]))
    assert conditioned.values == (
        Fraction(1, 2),
        Fraction(1, 2),
        Fraction(0),
        Fraction(0),
    )


def test_conditioning_on_null_event():
    space = weighted(['1', '0'])
    with pytest.raises(NullConditioningEvent):
        conditional(space.probability, 0b10)


def test_class_index_groups_by_probability():
    keys, inverse = uniform(3).probability.class_index()
    assert keys == [Fraction(k, 3) for k in range(4)]
    assert list(inverse[:4]) == [0, 1, 1, 2]


@given(st.integers(min_value=0, max_value=7), st.integers(1, 3))
def test_refine_preserves_probability(mask, factor):
    space = weighted(['1/6', '1/3', '1/2'])
    refined, lift = refine(space, factor)
    assert refined.n == 3 * factor
    lifted = lift(mask)
    assert event_probability(refined, lifted) == event_probability(
        space, mask
    )


def test_refine_cap():
    with pytest.raises(TooManyAtoms):
        refine(uniform(8), 4)


@given(st.integers(min_value=0, max_value=(1 << 10) - 1))
def test_bitmask_helpers(mask):
    assert bits_to_mask(mask_to_bits(mask)) == mask
    assert complement(complement(mask, 10), 10) == mask
    subs = list(submasks(mask))
    assert len(subs) == 2 ** mask.bit_count()
    assert all(s & ~mask == 0 for s in subs)


def test_popcounts_and_membership_matrix():
    assert list(popcounts(3)) == [0, 1, 1, 2, 1, 2, 2, 3]
    matrix = membership_matrix(3)
    assert matrix.shape == (8, 3)
    assert list(matrix[5]) == [1.0, 0.0, 1.0]
