import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interfaces.oracle_interfaces import ExtremumStatus
from models.charge import SignedCharge
from models.elicitation import Branch, CandidateStatus, GammaBracket
from models.support import ExtremumReport, Side
from services.elicitation_service import (
    build_layers,
    candidate_from_extremum,
    convergence_study,
    derived_game,
    elicit_var,
    family_limit,
    recover_parameter,
    threshold_readoff,
    var_branch_classifier,
    var_layer,
)
from services.game_service import build_family, game_from_table
from services.space_service import uniform, weighted
from services.support_service import loose_extremum
from utils.exceptions import (
    AllZero,
    BranchContradiction,
    DomainError,
    InconsistentLayers,
    NoExtremum,
    NotACapacity,
    OutOfRange,
    ParameterOutOfRange,
    ResolutionExceeded,
    TooManyAtoms,
)


def var_capacity(n, gamma):
    return build_family('var', uniform(n).probability, gamma=gamma)


def report_with(space, values, status=ExtremumStatus.EXISTS):
    extremum = SignedCharge(space, np.array(values, dtype=float))
    return ExtremumReport(status, Side.ANTICORE_SUP, 'test', extremum)


# ============== CANDIDATO ==============


def test_candidate_from_es_extremum(es_game, u8):
    extremum = loose_extremum(es_game, Side.ANTICORE_SUP)
    candidate = candidate_from_extremum(extremum, u8.probability)
    assert candidate.ok
    assert candidate.scale == pytest.approx(4.0)
    assert candidate.candidate.values == (Fraction(1, 8),) * 8
    assert candidate.proportional_to_reference
    assert recover_parameter('es', candidate.scale) == Fraction(3, 4)


def test_candidate_statuses(u4):
    zero = candidate_from_extremum(report_with(u4, [0, 0, 0, 0]))
    assert zero.status == CandidateStatus.ZERO_EXTREMUM
    signed = candidate_from_extremum(report_with(u4, [1, -1, 0, 0]))
    assert signed.status == CandidateStatus.SIGNED
    skewed = candidate_from_extremum(
        report_with(u4, [0.5, 0.25, 0.25, 0]), u4.probability
    )
    assert skewed.status == CandidateStatus.NOT_PROPORTIONAL
    assert skewed.candidate.values[0] == Fraction(1, 2)
    assert skewed.residual > 0


def test_candidate_requires_extremum(u4):
    report = ExtremumReport(
        ExtremumStatus.UNBOUNDED, Side.LOWER_SUP, 'lp'
    )
    with pytest.raises(NoExtremum):
        candidate_from_extremum(report)


# ============== PARÂMETROS ==============


def test_recover_es_parameter():
    assert recover_parameter('es', Fraction(4)) == Fraction(3, 4)
    assert recover_parameter('es', 2.0) == Fraction(1, 2)
    assert recover_parameter('es', 1.0) == 0
    with pytest.raises(OutOfRange):
        recover_parameter('es', 0.5)


def test_recover_entropic_parameter():
    alpha = recover_parameter('entropic', math.e - 1)
    assert alpha == pytest.approx(1.0, abs=1e-8)
    assert recover_parameter('entropic', math.expm1(3.0) / 3.0) == (
        pytest.approx(3.0, abs=1e-8)
    )
    with pytest.raises(OutOfRange):
        recover_parameter('entropic', 1.0)
    with pytest.raises(OutOfRange):
        recover_parameter('entropic', 1e30)


def test_recover_unknown_family():
    with pytest.raises(DomainError):
        recover_parameter('var', 2.0)


# ============== CAPACIDADES VaR ==============


def test_branch_classifier():
    assert var_branch_classifier(var_capacity(8, '1/2')) == Branch.SMALL
    assert var_branch_classifier(var_capacity(16, '3/4')) == Branch.LARGE
    assert var_branch_classifier(var_capacity(12, '3/10')) == Branch.SMALL


@pytest.mark.parametrize(
    'values',
    [
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
        [0.0, 0.5, 0.5, 1.0],
    ],
)
def test_not_a_capacity(values):
    with pytest.raises(NotACapacity):
        threshold_readoff(game_from_table(uniform(2), values))


def test_es_game_is_not_a_var_capacity(es_game):
    with pytest.raises(NotACapacity):
        elicit_var(es_game)


def test_all_zero_capacity():
    v = game_from_table(uniform(2), [0.0, 0.0, 0.0, 0.0])
    with pytest.raises(AllZero):
        threshold_readoff(v)
    with pytest.raises(AllZero):
        elicit_var(v)


def test_threshold_readoff():
    assert threshold_readoff(var_capacity(8, '1/2')) == GammaBracket(
        Fraction(3, 8), Fraction(1, 2)
    )
    assert threshold_readoff(var_capacity(16, '0.6')) == GammaBracket(
        Fraction(9, 16), Fraction(5, 8)
    )


def test_brute_layers_match_closed_form(var_half):
    brute = build_layers(var_half, Branch.SMALL, 2, mode='brute')
    closed = build_layers(var_half, Branch.SMALL, 2, mode='closed_form')
    assert [layer.values for layer in brute] == [
        layer.values for layer in closed
    ]
    assert brute[-1].method == 'brute'
    assert brute[-1].threshold() == Fraction(1, 8)
    assert all(layer.is_monotone() for layer in brute)


def test_large_branch_brute_layer():
    v = var_capacity(8, '3/4')
    brute = var_layer(v, Branch.LARGE, 1, mode='brute')
    closed = var_layer(v, Branch.LARGE, 1)
    assert brute.values == closed.values


def test_layer_errors(var_half):
    with pytest.raises(ResolutionExceeded):
        build_layers(var_half, Branch.SMALL, 3, mode='brute')
    with pytest.raises(DomainError):
        build_layers(var_half, Branch.SMALL, 1, mode='magic')
    with pytest.raises(ParameterOutOfRange):
        build_layers(var_half, Branch.SMALL, -1)
    with pytest.raises(TooManyAtoms):
        build_layers(var_capacity(16, '3/4'), Branch.LARGE, 1, mode='brute')


def test_derived_game(var_half):
    layers = build_layers(var_half, Branch.SMALL, 3)
    game = derived_game(Branch.SMALL, layers, var_half.probability)
    assert game.value(1) == 0.25
    assert game.value(0) == 0.0


def test_derived_game_rejects_inconsistent_layers(var_half):
    P = var_half.probability
    layers = build_layers(var_half, Branch.SMALL, 2)
    with pytest.raises(InconsistentLayers):
        derived_game(Branch.SMALL, [], P)
    with pytest.raises(InconsistentLayers):
        derived_game(Branch.SMALL, [layers[0], layers[2]], P)
    with pytest.raises(InconsistentLayers):
        derived_game(Branch.LARGE, layers, P)


def test_bracket_rejects_empty_interval():
    with pytest.raises(BranchContradiction):
        GammaBracket(Fraction(1, 2), Fraction(1, 4))
    bracket = GammaBracket(Fraction(1, 4), Fraction(1, 2))
    assert not bracket.contains(Fraction(1, 4))
    assert bracket.contains(Fraction(1, 2))
    with pytest.raises(BranchContradiction):
        bracket.intersect(GammaBracket(Fraction(1, 2), Fraction(1)))


def test_point_bracket():
    point = GammaBracket.point(Fraction(1, 2))
    assert point.collapsed
    assert point.width == 0
    assert point.contains(Fraction(1, 2))
    assert not point.contains(Fraction(3, 8))
    bracket = GammaBracket(Fraction(3, 8), Fraction(1, 2))
    assert bracket.intersect(point) == point
    assert point.intersect(bracket) == point
    with pytest.raises(BranchContradiction):
        GammaBracket(Fraction(1, 2), Fraction(3, 4)).intersect(point)


# ============== PIPELINE ==============


def test_elicit_small_branch_exact():
    result = elicit_var(var_capacity(8, '1/2'), depth=3, level_on_grid=True)
    assert result.branch == Branch.SMALL
    assert result.status == 'exact'
    assert result.gamma_exact == Fraction(1, 2)
    assert result.scale == 2
    assert result.bracket == GammaBracket.point(Fraction(1, 2))
    assert result.readoff_bracket == GammaBracket(
        Fraction(3, 8), Fraction(1, 2)
    )
    assert result.dyadic_bracket == GammaBracket(
        Fraction(1, 4), Fraction(1, 2)
    )
    assert result.t_max == 2
    assert result.handoff_t == 3
    assert result.candidate.candidate.values == (Fraction(1, 8),) * 8


def test_elicit_large_branch_bracket():
    result = elicit_var(var_capacity(16, '3/4'), depth=4)
    assert result.branch == Branch.LARGE
    assert result.status == 'bracket'
    assert result.gamma_exact is None
    assert result.scale == 2
    assert result.dyadic_bracket == GammaBracket(
        Fraction(1, 2), Fraction(3, 4)
    )
    assert result.bracket == GammaBracket(Fraction(11, 16), Fraction(3, 4))
    assert result.t_max == 2
    assert result.handoff_t == 1
    assert result.candidate.candidate.values == (Fraction(1, 16),) * 16


@pytest.mark.parametrize(
    'gamma, dyadic, readoff',
    [
        ('0.6', (Fraction(1, 2), Fraction(3, 4)), (9, 10)),
        ('0.9', (Fraction(7, 8), Fraction(15, 16)), (14, 15)),
    ],
)
def test_large_branch_brackets(gamma, dyadic, readoff):
    result = elicit_var(var_capacity(16, gamma), depth=4)
    assert result.branch == Branch.LARGE
    assert (result.dyadic_bracket.lo, result.dyadic_bracket.hi) == dyadic
    assert result.readoff_bracket == GammaBracket(
        Fraction(readoff[0], 16), Fraction(readoff[1], 16)
    )
    assert result.dyadic_bracket.width == (1 - result.dyadic_bracket.lo) / 2
    assert result.bracket.contains(Fraction(gamma))


def test_elicit_without_grid_level_is_bracket():
    result = elicit_var(var_capacity(8, '1/2'), depth=3)
    assert result.status == 'bracket'
    assert result.gamma_exact is None
    assert result.bracket == GammaBracket(Fraction(3, 8), Fraction(1, 2))
    assert any('level_on_grid' in note for note in result.diagnostics)


@pytest.mark.parametrize(
    'n, gamma, bracket',
    [
        (4, '3/10', (Fraction(1, 4), Fraction(1, 2))),
        (4, '1/8', (Fraction(0), Fraction(1, 4))),
        (12, '3/10', (Fraction(1, 4), Fraction(1, 3))),
        (12, '1/8', (Fraction(1, 12), Fraction(1, 6))),
    ],
)
def test_off_grid_level_stays_a_bracket(n, gamma, bracket):
    result = elicit_var(var_capacity(n, gamma))
    assert result.status == 'bracket'
    assert result.gamma_exact is None
    assert result.bracket == GammaBracket(*bracket)
    assert result.bracket.contains(Fraction(gamma))


def test_grid_level_collapses_bracket():
    result = elicit_var(var_capacity(12, '1/3'), level_on_grid=True)
    assert result.status == 'exact'
    assert result.gamma_exact == Fraction(1, 3)
    assert result.scale == 3
    assert result.bracket == GammaBracket.point(Fraction(1, 3))


def test_grid_level_not_dyadic_stays_a_bracket():
    # 1/(n·γ) = 1/3: o total ĉ = 2 não devolve γ
    result = elicit_var(var_capacity(8, '3/8'), level_on_grid=True)
    assert result.status == 'bracket'
    assert result.bracket == GammaBracket(Fraction(1, 4), Fraction(3, 8))


def test_elicit_quarter_level():
    result = elicit_var(var_capacity(8, '1/4'), depth=3, level_on_grid=True)
    assert result.gamma_exact == Fraction(1, 4)
    assert result.bracket == GammaBracket.point(Fraction(1, 4))
    assert result.t_max == 1


def test_zero_depth_is_insufficient():
    result = elicit_var(var_capacity(8, '1/2'), depth=0)
    assert result.status == 'insufficient_depth'
    assert result.bracket == GammaBracket(Fraction(3, 8), Fraction(1, 2))
    with pytest.raises(ParameterOutOfRange):
        elicit_var(var_capacity(8, '1/2'), depth=-1)


def test_degenerate_full_event_capacity():
    values = [0.0] * 15 + [1.0]
    capacity = game_from_table(uniform(4), values)
    result = elicit_var(capacity, depth=3)
    assert result.branch == Branch.SMALL
    assert result.bracket == GammaBracket(Fraction(0), Fraction(1, 4))
    assert any('degenerada' in note for note in result.diagnostics)
    on_grid = elicit_var(capacity, depth=3, level_on_grid=True)
    assert on_grid.gamma_exact == Fraction(1, 4)
    assert on_grid.bracket == GammaBracket.point(Fraction(1, 4))


def test_report_serializes_fractions():
    payload = elicit_var(
        var_capacity(8, '1/2'), depth=3, level_on_grid=True
    ).to_dict()
    assert payload['gamma_exact'] == Fraction(1, 2)
    assert payload['bracket']['width'] == 0
    assert payload['readoff_bracket']['width'] == Fraction(1, 8)
    assert len(payload['layers']) == 4


# ============== PROPRIEDADES DO PIPELINE ==============


def _check_report(result, gamma):
    if result.status == 'exact':
        assert result.bracket.collapsed
        assert result.bracket.hi == result.gamma_exact
    else:
        assert result.gamma_exact is None
        assert result.bracket.contains(gamma)
    assert result.readoff_bracket.contains(gamma)


@given(
    n=st.integers(2, 8),
    gamma=st.fractions(
        min_value=Fraction(1, 50),
        max_value=Fraction(49, 50),
        max_denominator=50,
    ),
    depth=st.integers(1, 6),
)
def test_exact_implies_collapsed_bracket(n, gamma, depth):
    v = var_capacity(n, gamma)
    _check_report(elicit_var(v, depth=depth), gamma)
    on_grid = elicit_var(v, depth=depth, level_on_grid=True)
    if on_grid.status == 'exact':
        assert on_grid.bracket.collapsed
        assert on_grid.bracket.hi == on_grid.gamma_exact
        assert on_grid.gamma_exact == on_grid.readoff_bracket.hi


@pytest.mark.parametrize('n', [8, 12, 16])
@pytest.mark.parametrize('gamma', ['0.3', '0.5', '0.6', '0.75', '0.9'])
@pytest.mark.parametrize('depth', [2, 4, 8])
def test_bracket_contains_level(n, gamma, depth):
    level = Fraction(gamma)
    result = elicit_var(var_capacity(n, gamma), depth=depth)
    assert result.status != 'exact'
    _check_report(result, level)
    assert result.dyadic_bracket.contains(level)


@given(
    weights=st.lists(st.integers(1, 9), min_size=2, max_size=6),
    gamma=st.fractions(
        min_value=Fraction(1, 20),
        max_value=Fraction(19, 20),
        max_denominator=20,
    ),
    depth=st.sampled_from([2, 5]),
)
def test_weighted_bracket_contains_level(weights, gamma, depth):
    total = sum(weights)
    space = weighted([Fraction(w, total) for w in weights])
    v = build_family('var', space.probability, gamma=gamma)
    result = elicit_var(v, depth=depth)
    _check_report(result, gamma)
    if not space.is_uniform:
        assert result.dyadic_bracket is None
        assert result.bracket == result.readoff_bracket


@pytest.mark.parametrize(
    'weights, gamma, depth',
    [
        (['4/5', '1/5'], '3/5', 2),
        (['2/11', '2/11', '5/22', '3/22', '1/22', '5/22'], '1/20', 5),
    ],
)
def test_weighted_readoff_bracket(weights, gamma, depth):
    space = weighted(weights)
    v = build_family('var', space.probability, gamma=gamma)
    result = elicit_var(v, depth=depth)
    assert result.bracket.contains(Fraction(gamma))
    assert any('não uniforme' in note for note in result.diagnostics)


def test_weighted_readoff_two_point():
    space = weighted(['4/5', '1/5'])
    v = build_family('var', space.probability, gamma='3/5')
    assert threshold_readoff(v) == GammaBracket(Fraction(1, 5), Fraction(4, 5))


@pytest.mark.parametrize('n', range(2, 17, 2))
def test_branch_classifier_sweep(n):
    for m in range(1, 6):
        for j in range(1, 2**m, 2):
            gamma = Fraction(j, 2**m)
            if n * min(gamma, 1 - gamma) < 1:
                continue
            branch = var_branch_classifier(var_capacity(n, gamma))
            assert (branch == Branch.SMALL) == (gamma <= Fraction(1, 2))


@pytest.mark.parametrize(
    'gamma, branch', [('1/4', 'small'), ('1/2', 'small'), ('3/4', 'large')]
)
@pytest.mark.parametrize('mode', ['brute', 'closed_form'])
def test_layers_vanish_on_empty_event(gamma, branch, mode):
    v = var_capacity(8, gamma)
    depth = elicit_var(v, depth=1).t_max if mode == 'brute' else 6
    for layer in build_layers(v, branch, depth, mode=mode):
        assert layer.value(Fraction(0)) == 0
        assert layer.value(Fraction(1)) == 1
        assert layer.is_monotone()


# ============== CONVERGÊNCIA ==============


def test_family_limits():
    assert family_limit('entropic', alpha=1.0) == pytest.approx(math.e - 1)
    assert family_limit('es', beta='1/2') == pytest.approx(2.0)
    assert family_limit('var', gamma='1/2') == 0.0
    assert family_limit('floor') is None
    assert family_limit('es', 'atom', beta='1/2') == 0.0


def test_es_convergence_is_exact():
    series = convergence_study('es', [4, 16, 64], beta='1/2')
    assert [row['statistic'] for row in series.rows] == [2.0, 2.0, 2.0]
    assert all(row['abs_error'] == 0 for row in series.rows)
    assert not series.diverging


def test_entropic_convergence():
    series = convergence_study(
        'entropic', [4, 16, 64, 256, 1024, 4096], alpha=1.0
    )
    errors = [row['abs_error'] for row in series.rows]
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] <= 1e-3
    assert not series.diverging


def test_floor_convergence_diverges():
    series = convergence_study('floor', [16, 32, 64, 128], floor=0.1)
    assert series.diverging
    assert series.limit is None
    assert series.rows[-1]['abs_error'] is None


def test_convergence_frame_columns():
    frame = convergence_study('es', [4, 8], beta='1/2').to_frame()
    assert list(frame.columns) == [
        'n',
        'statistic',
        'limit',
        'abs_error',
        'diverging',
    ]
    assert len(frame) == 2


def test_convergence_errors():
    with pytest.raises(DomainError):
        convergence_study('es', [4, 8], 'median', beta='1/2')
    with pytest.raises(DomainError):
        convergence_study('es', [8, 4], beta='1/2')
