import numpy as np
import pytest

from interfaces.oracle_interfaces import ExtremumStatus
from models.support import Normalization, Side, SupportSpec
from models.variable import Dictionary, SimpleRandomVariable
from services.choquet_service import expectation_oracle
from services.game_service import (
    build_family,
    floor_distortion,
    game_from_table,
)
from services.space_service import uniform, weighted
from services.support_service import (
    anticore_witness,
    build_dictionary,
    diagnose_existence,
    dictionary_extremum,
    is_diverging,
    loose_extremum,
    membership,
    sandwich_constants,
    singleton_core_certificate,
    strict_extremum,
    var_core_witness,
)
from utils.exceptions import (
    DomainError,
    EmptyDictionary,
    ParameterOutOfRange,
    SupportError,
    TooManyAtoms,
)

# ============== JOGOS ==============


@pytest.mark.parametrize('side', [Side.ANTICORE_SUP, Side.CORE_INF])
def test_es_loose_extrema_with_cross_check(es_game, side):
    report = loose_extremum(es_game, side, cross_check=True)
    assert report.exists
    assert report.method == 'closed_form'
    assert report.cross_check is True
    assert report.per_atom_values == [0.5] * 8
    assert report.certificates[3] == [1 << 3]


def test_es_strict_core_is_empty(es_game):
    report = strict_extremum(es_game, Side.CORE_INF)
    assert report.status == ExtremumStatus.EMPTY
    assert report.extremum is None
    assert report.certificates


def test_es_strict_anticore_sup(es_game):
    report = strict_extremum(es_game, Side.ANTICORE_SUP)
    assert report.exists
    assert np.allclose(report.per_atom_values, 0.5)


def test_strict_extremum_cap():
    v = build_family('es', uniform(11).probability, beta='1/2')
    with pytest.raises(TooManyAtoms):
        strict_extremum(v, Side.CORE_INF)


def test_invalid_game_side(es_game):
    with pytest.raises(SupportError):
        loose_extremum(es_game, Side.LOWER_SUP)


def test_singleton_core_certificate():
    P = uniform(16).probability
    assert singleton_core_certificate(build_family('entropic', P, alpha=1.0))
    assert not singleton_core_certificate(build_family('power', P, p=2))


def test_var_loose_extrema_are_zero(var_half):
    for side in (Side.ANTICORE_SUP, Side.CORE_INF):
        assert loose_extremum(var_half, side).per_atom_values == [0.0] * 8


def test_sandwich_constants(es_game):
    constants = sandwich_constants(es_game, es_game.probability)
    assert constants.a_star == pytest.approx(1.0)
    assert constants.b_star == pytest.approx(4.0)


def test_sandwich_skips_constant_with_negative_null_event():
    space = weighted(['1', '0'])
    v = game_from_table(space, [0.0, 1.0, -1.0, 1.0])
    constants = sandwich_constants(v, space.probability)
    assert constants.a_star is None
    assert constants.b_star == pytest.approx(1.0)


# ============== DICIONÁRIOS ==============


@pytest.mark.parametrize(
    'strategy, size',
    [
        ('indicators', 7),
        ('signed_indicators', 14),
        ('indicators_plus_constants', 8),
    ],
)
def test_dictionary_sizes(strategy, size):
    assert len(build_dictionary(uniform(3), strategy)) == size


def test_random_dictionary_is_deterministic(u4):
    first = build_dictionary(u4, 'random_simple', k=5, seed=3)
    second = build_dictionary(u4, 'random_simple', k=5, seed=3)
    assert len(first) == 7
    assert np.array_equal(first.matrix(), second.matrix())


def test_random_dictionary_accept_filter(u4):
    dictionary = build_dictionary(
        u4,
        'random_simple',
        k=5,
        seed=3,
        accept=lambda X: X.values.mean() <= 0,
    )
    assert all(X.values.mean() <= 0 for X in dictionary.variables[2:])


def test_unknown_strategy(u4):
    with pytest.raises(SupportError):
        build_dictionary(u4, 'sobol')


def test_expectation_lower_sup_recovers_probability():
    space = weighted(['1/4', '3/4'])
    dictionary = build_dictionary(space, 'indicators_plus_constants')
    report = dictionary_extremum(
        expectation_oracle(space.probability), dictionary, Side.LOWER_SUP
    )
    assert report.exists
    assert np.allclose(report.per_atom_values, [0.25, 0.75])


def test_constant_only_dictionary_is_unbounded(two_point):
    dictionary = Dictionary(
        two_point, [SimpleRandomVariable.constant(two_point, 1.0)]
    )
    report = dictionary_extremum(
        expectation_oracle(two_point.probability),
        dictionary,
        Side.LOWER_SUP,
    )
    assert report.status == ExtremumStatus.UNBOUNDED
    assert report.unbounded_atoms == [0, 1]
    assert report.notes


def test_dictionary_extremum_errors(u4):
    phi = expectation_oracle(u4.probability)
    with pytest.raises(EmptyDictionary):
        dictionary_extremum(phi, Dictionary(u4), Side.LOWER_SUP)
    with pytest.raises(SupportError):
        dictionary_extremum(
            phi, build_dictionary(u4, 'indicators'), Side.CORE_INF
        )


def test_pin_requires_constant_in_dictionary(u4):
    phi = expectation_oracle(u4.probability)
    dictionary = build_dictionary(u4, 'indicators')
    with pytest.raises(SupportError):
        SupportSpec(
            (phi, dictionary),
            'lower',
            Normalization.PIN,
            SimpleRandomVariable.constant(u4, 2.0),
        )
    with pytest.raises(SupportError):
        SupportSpec((phi, dictionary), 'sideways')


def test_pinned_upper_inf(u4):
    phi = expectation_oracle(u4.probability)
    dictionary = build_dictionary(u4, 'indicators_plus_constants')
    pin = SimpleRandomVariable.constant(u4, 1.0)
    report = dictionary_extremum(
        phi, dictionary, Side.UPPER_INF, Normalization.PIN, pin
    )
    assert report.exists
    assert np.allclose(report.per_atom_values, 0.25)


# ============== PERTINÊNCIA E TESTEMUNHAS ==============


def test_probability_is_in_es_loose_anticore(es_game, u8):
    P = u8.probability.as_charge()
    assert membership(P, SupportSpec(es_game, 'lower', Normalization.TOTAL))
    assert not membership(P, SupportSpec(es_game, 'upper'))


def test_anticore_witness_is_member(es_game):
    witness = anticore_witness(es_game, 0b11)
    assert witness.member
    assert witness.kind == 'anticore'
    assert witness.charge.to_list()[:3] == [0.5, 0.5, 0.0]
    assert witness.charge.total == pytest.approx(1.0)


def test_var_core_witness_is_member(var_half):
    witness = var_core_witness(var_half, 0b1, 0.25)
    assert witness.member
    assert witness.params['x_s'] == pytest.approx(2.75)
    assert witness.charge.values[0] == pytest.approx(0.25)


def test_witness_errors(var_half, es_game):
    with pytest.raises(ParameterOutOfRange):
        var_core_witness(var_half, 0b1, 0.6)
    with pytest.raises(ParameterOutOfRange):
        var_core_witness(var_half, 0b1111, 0.25)
    with pytest.raises(DomainError):
        var_core_witness(es_game, 0b1, 0.25)
    with pytest.raises(DomainError):
        anticore_witness(es_game, 0)
    table = game_from_table(uniform(2), [0.0, 0.5, 0.5, 1.0])
    with pytest.raises(DomainError):
        anticore_witness(table, 0b1)


# ============== EXISTÊNCIA ==============


def test_floor_distortion_has_empty_cores_and_diverges():
    diagnostic = diagnose_existence(
        floor_distortion(0.1), [11, 20, 50, 100, 200]
    )
    assert all(row.core_status == 'empty' for row in diagnostic.rows)
    assert all(row.core_method == 'singleton_bound' for row in diagnostic.rows)
    assert diagnostic.rows[0].singleton_total == pytest.approx(1.1)
    assert diagnostic.diverging
    assert diagnostic.slope == pytest.approx(0.1)


def test_entropic_existence_small_n():
    h = build_family('entropic', uniform(2).probability).distortion
    diagnostic = diagnose_existence(h, [2, 4, 8])
    assert [row.core_method for row in diagnostic.rows] == ['lp'] * 3
    assert all(row.core_status == 'empty' for row in diagnostic.rows)
    assert all(row.anticore_condition for row in diagnostic.rows)
    assert not diagnostic.diverging


def test_existence_requires_increasing_refinement():
    with pytest.raises(DomainError):
        diagnose_existence(floor_distortion(0.1), [20, 11])


def test_is_diverging():
    xs = np.arange(1.0, 11.0)
    assert is_diverging(xs, 0.5 * xs)
    assert not is_diverging(xs, np.ones(10))
    assert not is_diverging(xs, 2 - 1 / xs)


# ============== FORMA FECHADA, LP E INCLUSÕES ==============

GAMES = [
    ('es', {'beta': '1/2'}),
    ('entropic', {'alpha': 2.0}),
    ('power', {'p': 2.0}),
    ('power', {'p': 0.5}),
    ('var', {'gamma': '1/4'}),
    ('var', {'gamma': '3/4'}),
    ('rvar', {'gamma': '1/2'}),
]


@pytest.mark.parametrize('family, params', GAMES)
@pytest.mark.parametrize('side', [Side.ANTICORE_SUP, Side.CORE_INF])
def test_loose_closed_form_matches_lp(family, params, side):
    space = weighted(['1/4', '1/8', '1/8', '1/3', '1/6'])
    v = build_family(family, space.probability, **params)
    report = loose_extremum(v, side, cross_check=True)
    assert report.cross_check is True
    assert report.per_atom_values == pytest.approx(
        list(v.singleton_profile())
    )


def test_loose_closed_form_matches_lp_on_random_tables():
    rng = np.random.default_rng(53)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        table = rng.normal(size=1 << n)
        table[0] = 0.0
        v = game_from_table(uniform(n), table)
        for side in (Side.ANTICORE_SUP, Side.CORE_INF):
            assert loose_extremum(v, side, cross_check=True).cross_check


@pytest.mark.parametrize('n', [3, 5, 8])
@pytest.mark.parametrize('family, params', GAMES)
def test_loose_extrema_proportional_for_invariant_games(n, family, params):
    P = uniform(n).probability
    v = build_family(family, P, **params)
    scale = n * v.value(1)
    for side in (Side.ANTICORE_SUP, Side.CORE_INF):
        values = loose_extremum(v, side).per_atom_values
        assert np.allclose(values, scale * P.real_values())


def test_loose_extrema_proportional_for_cardinality_tables():
    rng = np.random.default_rng(59)
    n = 5
    by_size = np.concatenate([[0.0], rng.normal(size=n)])
    table = [by_size[bin(mask).count('1')] for mask in range(1 << n)]
    v = game_from_table(uniform(n), table)
    report = loose_extremum(v, Side.ANTICORE_SUP)
    assert np.allclose(report.per_atom_values, by_size[1])


@pytest.mark.parametrize('family, params', GAMES)
def test_strict_sets_sit_inside_loose_sets(family, params):
    v = build_family(family, uniform(5).probability, **params)
    tol = 1e-9
    loose_sup = loose_extremum(v, Side.ANTICORE_SUP).per_atom_values
    strict_sup = strict_extremum(v, Side.ANTICORE_SUP)
    if strict_sup.exists:
        assert np.all(
            np.array(strict_sup.per_atom_values) <= np.array(loose_sup) + tol
        )
    loose_inf = loose_extremum(v, Side.CORE_INF).per_atom_values
    strict_inf = strict_extremum(v, Side.CORE_INF)
    if strict_inf.exists:
        assert np.all(
            np.array(strict_inf.per_atom_values) >= np.array(loose_inf) - tol
        )
