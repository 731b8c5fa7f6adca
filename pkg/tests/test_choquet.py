from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from models.variable import SimpleRandomVariable
from services.choquet_service import (
    SerializingOracle,
    choquet_integral,
    choquet_oracle,
    comonotonic_additivity_test,
    coordinate_oracle,
    entropic_risk,
    expectation_oracle,
    expected_shortfall,
    functional_invariance_test,
    riskmetric_oracle,
    table_oracle,
    value_at_risk,
)
from services.game_service import build_family, game_from_table
from services.space_service import uniform, weighted
from services.support_service import build_dictionary
from utils.exceptions import (
    ConfigError,
    DomainError,
    EmptyDictionary,
    ParameterOutOfRange,
    SpaceMismatch,
    TooManyAtoms,
)

values4 = st.lists(
    st.integers(min_value=-10, max_value=10), min_size=4, max_size=4
)


@given(values4)
def test_choquet_of_additive_game_is_expectation(xs):
    space = uniform(4)
    v = build_family('identity', space.probability)
    X = SimpleRandomVariable(space, np.array(xs, dtype=float))
    assert choquet_integral(v, X) == pytest.approx(np.mean(xs))


def test_choquet_es_matches_closed_form(es_game, u8):
    X = SimpleRandomVariable(u8, np.arange(1.0, 9.0))
    assert choquet_integral(es_game, X) == pytest.approx(7.5)
    assert expected_shortfall(u8.probability, X, '3/4') == pytest.approx(7.5)


def test_choquet_var_matches_left_quantile(u4):
    v = build_family('var', u4.probability, gamma='1/2')
    X = SimpleRandomVariable(u4, np.array([1.0, 2.0, 3.0, 4.0]))
    assert choquet_integral(v, X) == 2.0
    assert value_at_risk(u4.probability, X, '1/2') == 2.0


@given(values4)
def test_choquet_es_oracle_agrees_with_closed_form(xs):
    space = uniform(4)
    v = build_family('es', space.probability, beta='1/2')
    X = SimpleRandomVariable(space, np.array(xs, dtype=float))
    assert choquet_oracle(v)(X) == pytest.approx(
        expected_shortfall(space.probability, X, '1/2')
    )


def test_weighted_quantile(two_point):
    X = SimpleRandomVariable(two_point, np.array([0.0, 1.0]))
    assert value_at_risk(two_point.probability, X, '1/2') == 0.0
    assert value_at_risk(two_point.probability, X, '3/4') == 1.0
    assert expected_shortfall(two_point.probability, X, 0) == pytest.approx(
        1 / 3
    )


def test_entropic_is_cash_additive(u4):
    X = SimpleRandomVariable(u4, np.array([0.0, 1.0, 2.0, 3.0]))
    base = entropic_risk(u4.probability, X, 1.0)
    assert entropic_risk(u4.probability, X.shift(5.0), 1.0) == pytest.approx(
        base + 5.0
    )
    constant = SimpleRandomVariable.constant(u4, 2.0)
    assert entropic_risk(u4.probability, constant, 1.0) == pytest.approx(2.0)


def test_riskmetric_parameter_errors(u4):
    X = SimpleRandomVariable.constant(u4, 1.0)
    with pytest.raises(ParameterOutOfRange):
        value_at_risk(u4.probability, X, 1)
    with pytest.raises(ParameterOutOfRange):
        expected_shortfall(u4.probability, X, 1)
    with pytest.raises(ParameterOutOfRange):
        entropic_risk(u4.probability, X, 0.0)


def test_riskmetric_oracle_config_errors(u4):
    with pytest.raises(ConfigError):
        riskmetric_oracle('var', u4.probability)
    with pytest.raises(ConfigError):
        riskmetric_oracle('median', u4.probability)


def test_choquet_space_mismatch(u4, u8):
    v = build_family('es', u4.probability, beta='1/2')
    with pytest.raises(SpaceMismatch):
        choquet_integral(v, SimpleRandomVariable.constant(u8, 1.0))


@pytest.mark.parametrize(
    'factory',
    [
        lambda P: riskmetric_oracle('es', P, beta='3/4'),
        lambda P: riskmetric_oracle('var', P, gamma='1/2'),
        expectation_oracle,
    ],
)
def test_comonotonic_additivity_holds(u8, factory):
    result = comonotonic_additivity_test(factory(u8.probability), u8, seed=1)
    assert result.passes
    assert result.checked == 100
    assert result.witness is None


def test_entropic_is_not_comonotonic_additive(u8):
    phi = riskmetric_oracle('entropic', u8.probability, alpha=1.0)
    result = comonotonic_additivity_test(phi, u8, seed=1)
    assert not result.passes
    X, Y = result.witness
    assert len(X) == len(Y) == 8
    assert result.max_gap > 1e-7


def test_comonotonic_test_requires_trials(u4):
    with pytest.raises(ValueError):
        comonotonic_additivity_test(expectation_oracle(u4.probability), u4, 0)


def test_invariance_of_law_based_functional(u4):
    phi = riskmetric_oracle('es', u4.probability, beta='1/2')
    dictionary = build_dictionary(u4, 'indicators')
    result = functional_invariance_test(phi, u4.probability, dictionary)
    assert result.passes
    assert result.checked > 0


def test_coordinate_functional_is_not_invariant(u4):
    dictionary = build_dictionary(u4, 'indicators')
    result = functional_invariance_test(
        coordinate_oracle(0), u4.probability, dictionary
    )
    assert not result.passes
    X, Y = result.witness
    assert X[0] != Y[0]
    assert sorted(X) == sorted(Y)


def test_invariance_on_weighted_space(two_point):
    dictionary = build_dictionary(two_point, 'indicators')
    phi = coordinate_oracle(0)
    # sem eventos equiprováveis distintos: nada a comparar além de X
    result = functional_invariance_test(
        phi, two_point.probability, dictionary
    )
    assert result.passes


def test_table_oracle(u4):
    pairs = [([1.0, 0.0, 0.0, 0.0], 0.25), ([0.0, 1.0, 0.0, 0.0], 0.5)]
    phi, dictionary = table_oracle(u4, pairs)
    assert len(dictionary) == 2
    assert phi(dictionary.variables[1]) == 0.5
    with pytest.raises(DomainError):
        phi(SimpleRandomVariable.constant(u4, 1.0))
    with pytest.raises(EmptyDictionary):
        table_oracle(u4, [])


def test_serializing_oracle(u4):
    inner = coordinate_oracle(2)
    wrapped = SerializingOracle(inner)
    X = SimpleRandomVariable(u4, np.array([1.0, 2.0, 3.0, 4.0]))
    assert wrapped(X) == 3.0
    assert wrapped.describe() == {
        'tag': 'coordinate',
        'index': 2,
        'serialized': True,
    }


def random_table(rng, n):
    table = rng.normal(size=1 << n)
    table[0] = 0.0
    return table


def belief_table(rng, n):
    """Jogo monótono normalizado a partir de massas não negativas"""
    masses = rng.exponential(size=1 << n)
    masses[0] = 0.0
    masses /= masses.sum()
    table = np.zeros(1 << n)
    for mask in range(1 << n):
        sub = mask
        while sub:
            table[mask] += masses[sub]
            sub = (sub - 1) & mask
    return table


@pytest.mark.parametrize('n', [1, 3, 6, 10])
def test_choquet_of_indicator_is_game_value(n):
    rng = np.random.default_rng(n)
    space = uniform(n)
    v = game_from_table(space, random_table(rng, n))
    for mask in range(1 << n):
        X = SimpleRandomVariable.indicator(space, mask)
        assert choquet_integral(v, X) == pytest.approx(
            v.value(mask), abs=1e-12
        )


@given(
    xs=st.lists(st.floats(-5, 5), min_size=5, max_size=5),
    t=st.floats(0.01, 10),
    c=st.floats(-10, 10),
    seed=st.integers(0, 2**16),
)
def test_choquet_homogeneity_and_translation(xs, t, c, seed):
    space = uniform(5)
    v = game_from_table(space, belief_table(np.random.default_rng(seed), 5))
    X = SimpleRandomVariable(space, np.array(xs))
    base = choquet_integral(v, X)
    assert choquet_integral(v, X * t) == pytest.approx(t * base, abs=1e-9)
    assert choquet_integral(v, X.shift(c)) == pytest.approx(
        base + c * v.value(31), abs=1e-9
    )


@pytest.mark.parametrize('n', [4, 8])
@pytest.mark.parametrize('gamma', ['1/8', '1/4', '1/2', '3/4'])
def test_var_rvar_indicator_duality(n, gamma):
    space = uniform(n)
    level = Fraction(gamma)
    var = build_family('var', space.probability, gamma=level)
    rvar = build_family('rvar', space.probability, gamma=1 - level)
    full = (1 << n) - 1
    for mask in range(1 << n):
        indicator = SimpleRandomVariable.indicator(space, mask)
        complement = SimpleRandomVariable.indicator(space, full ^ mask)
        assert choquet_integral(rvar, indicator) == (
            1 - choquet_integral(var, complement)
        )


def test_weighted_variants_respect_permutation_cap():
    space = weighted(['1/4', '1/4'] + ['1/12'] * 6)
    dictionary = build_dictionary(space, 'indicators')
    with pytest.raises(TooManyAtoms):
        functional_invariance_test(
            expectation_oracle(space.probability),
            space.probability,
            dictionary,
        )


def test_weighted_variants_below_cap():
    space = weighted(['1/4', '1/4', '1/2'])
    dictionary = build_dictionary(space, 'indicators')
    result = functional_invariance_test(
        expectation_oracle(space.probability), space.probability, dictionary
    )
    assert result.passes
    assert result.checked > len(dictionary)
