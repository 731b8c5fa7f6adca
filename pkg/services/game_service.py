"""
Serviço de jogos: distorções h∘P, famílias (entropic, ES, VaR, rVaR),
propriedades estruturais, invariância, conjugados e envelopes
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.charge import SignedCharge
from models.game import DistortionFunction, Game, PropertyReport
from models.space import FiniteSpace, ProbabilityCharge
from services.lattice_service import charge_table
from utils.bitmask import ensure_enumerable, full_mask, mask_to_bits
from utils.config import get_settings
from utils.exceptions import (
    ConfigError,
    DomainError,
    EmptyList,
    ParameterOutOfRange,
    SpaceMismatch,
)
from utils.serialization import parse_rational

logger = logging.getLogger(__name__)

FAMILIES = ('entropic', 'es', 'var', 'rvar', 'power', 'floor', 'identity')


@dataclass
class InvarianceResult:
    invariant: bool
    witness: Optional[Tuple[List[int], List[int]]] = None

    def to_dict(self) -> dict:
        return {
            'invariant': self.invariant,
            'witness': list(self.witness) if self.witness else None,
        }


# ============== DISTORÇÕES ==============


def _fraction(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p)


def entropic_distortion(alpha: float) -> DistortionFunction:
    """h_α(x) = log((e^α − 1)x + 1)/α"""
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterOutOfRange(f'entropic exige α > 0, recebido {alpha}')
    slope = math.expm1(alpha)
    return DistortionFunction(
        'entropic',
        lambda p: math.log1p(slope * float(p)) / alpha,
        (('alpha', alpha),),
    )


def es_distortion(beta) -> DistortionFunction:
    """h_β(x) = min{x/(1−β), 1}"""
    beta = parse_rational(beta)
    if not 0 <= beta < 1:
        raise ParameterOutOfRange(f'es exige β ∈ [0,1), recebido {beta}')

    def h(p):
        if isinstance(p, float):
            return min(p / float(1 - beta), 1.0)
        return float(min(_fraction(p) / (1 - beta), Fraction(1)))

    return DistortionFunction('es', h, (('beta', beta),))


def _check_level(family: str, gamma) -> Fraction:
    gamma = parse_rational(gamma)
    if not 0 < gamma < 1:
        raise ParameterOutOfRange(
            f'{family} exige γ ∈ (0,1), recebido {gamma}'
        )
    return gamma


def var_distortion(gamma) -> DistortionFunction:
    """VaR_γ em indicadores: 1 sse P(A) > 1 − γ (estrito)"""
    gamma = _check_level('var', gamma)
    threshold = 1 - gamma
    return DistortionFunction(
        'var', lambda p: 1.0 if p > threshold else 0.0, (('gamma', gamma),)
    )


def rvar_distortion(gamma) -> DistortionFunction:
    """rVaR_γ em indicadores: 1 sse P(A) ≥ 1 − γ"""
    gamma = _check_level('rvar', gamma)
    threshold = 1 - gamma
    return DistortionFunction(
        'rvar', lambda p: 1.0 if p >= threshold else 0.0, (('gamma', gamma),)
    )


def power_distortion(exponent: float) -> DistortionFunction:
    """h(x) = x^p; convexa (superaditiva) para p ≥ 1"""
    exponent = float(exponent)
    if not exponent > 0:
        raise ParameterOutOfRange(f'power exige p > 0, recebido {exponent}')
    return DistortionFunction(
        'power', lambda p: float(p) ** exponent, (('p', exponent),)
    )


def floor_distortion(floor: float = 0.1) -> DistortionFunction:
    """h(x) = max(x, c)·1{x>0}: inf_{x>0} h(x) > 0, sem suporte no limite"""
    floor = float(floor)
    if not 0 < floor <= 1:
        raise ParameterOutOfRange(f'floor exige c ∈ (0,1], recebido {floor}')
    return DistortionFunction(
        'floor',
        lambda p: max(float(p), floor) if p > 0 else 0.0,
        (('floor', floor),),
    )


def family_distortion(family: str, **params) -> DistortionFunction:
    """Distorção de uma família nomeada a partir dos parâmetros do config"""
    try:
        if family == 'entropic':
            return entropic_distortion(params.get('alpha', 1.0))
        if family == 'es':
            return es_distortion(params['beta'])
        if family == 'var':
            return var_distortion(params['gamma'])
        if family == 'rvar':
            return rvar_distortion(params['gamma'])
        if family == 'power':
            return power_distortion(params.get('p', 2.0))
        if family == 'floor':
            return floor_distortion(params.get('floor', 0.1))
        if family == 'identity':
            return power_distortion(1.0)
    except KeyError as exc:
        raise ConfigError(f'Parâmetro ausente para {family}: {exc}') from exc
    raise ConfigError(f'Família desconhecida: {family!r}')


def conjugate_distortion(h: DistortionFunction) -> DistortionFunction:
    """h̄(x) = h(1) − h(1 − x)"""
    top = h(Fraction(1))
    return DistortionFunction(
        f'conjugate({h.tag})',
        lambda p: top - h(1 - p),
        h.params,
    )


# ============== CONSTRUTORES ==============


def build_distortion(
    h: DistortionFunction, P: ProbabilityCharge, label: Optional[str] = None
) -> Game:
    """
    v(A) = h(P(A)) para todo evento
    Até materialize_atoms, h é avaliada uma vez por classe de probabilidade.
    """
    label = label or h.tag
    settings = get_settings()

    def evaluate(p) -> float:
        try:
            value = h(p)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f'h indefinida em {p}: {exc}') from exc
        if not math.isfinite(value):
            raise DomainError(f'h({p}) = {value} não é finito')
        return value

    if P.space.n <= settings.materialize_atoms:
        keys, inverse = P.class_index()
        values = np.array([evaluate(k) for k in keys])
        return Game(
            P.space,
            table=values[inverse],
            probability=P,
            distortion=h,
            label=label,
        )

    logger.info('Jogo %s avaliado sob demanda (n=%d)', label, P.space.n)
    return Game(
        P.space,
        func=lambda mask: evaluate(P.probability(mask)),
        probability=P,
        distortion=h,
        label=label,
    )


def build_family(family: str, P: ProbabilityCharge, **params) -> Game:
    """Capacidade exata da família: entropic(α), es(β), var(γ), rvar(γ), ..."""
    return build_distortion(family_distortion(family, **params), P, family)


def game_from_table(
    space: FiniteSpace,
    values: Sequence[float],
    probability: Optional[ProbabilityCharge] = None,
    label: str = 'custom_table',
) -> Game:
    """Jogo de uma tabela com 2^n entradas (índice = bitmask do evento)"""
    ensure_enumerable(space.n, what='tabela de jogo')
    return Game(
        space,
        table=np.asarray(values, dtype=float),
        probability=probability or space.probability,
        label=label,
    )


def game_from_charge(mu: SignedCharge, label: str = 'additive') -> Game:
    """Jogo aditivo A ↦ μ(A)"""
    if mu.space.n <= get_settings().materialize_atoms:
        return Game(mu.space, table=charge_table(mu), label=label)
    return Game(mu.space, func=mu.value, label=label)


def game_from_config(block: Dict[str, Any], P: ProbabilityCharge) -> Game:
    """
    Bloco {"family": "es", "beta": 0.75} ou
    {"family": "custom_table", "values": [...]}
    """
    block = dict(block)
    family = block.pop('family', None)
    if family == 'custom_table':
        if 'values' not in block:
            raise ConfigError('custom_table exige a lista "values"')
        values = block['values']
        if len(values) != 1 << P.space.n:
            raise ConfigError(
                f'custom_table com {len(values)} valores; '
                f'esperado 2^{P.space.n}'
            )
        return game_from_table(P.space, values, P)
    if family is None:
        raise ConfigError('Bloco de jogo sem "family"')
    return build_family(family, P, **block)


# ============== PROPRIEDADES ==============


def classify_properties(
    v: Game, P: Optional[ProbabilityCharge] = None
) -> PropertyReport:
    """
    Varredura exaustiva: monotonia, super/subaditividade em pares disjuntos
    e submodularidade em todos os pares (n ≤ 12)
    """
    settings = get_settings()
    n = v.n
    ensure_enumerable(n, settings.pair_scan_atoms, 'varredura de pares')
    tol = settings.value_tol
    table = v.table
    masks = np.arange(1 << n)
    report = PropertyReport()

    # monotonia: basta A ⊆ A ∪ {i}
    for i in range(n):
        without = masks[((masks >> i) & 1) == 0]
        bad = np.nonzero(table[without] > table[without | (1 << i)] + tol)[0]
        if bad.size and report.monotone:
            a = int(without[bad[0]])
            report.monotone = False
            report.witnesses['monotone'] = (a, a | (1 << i))

    for a in range(1 << n):
        va = table[a]
        union = table[masks | a]
        inter = table[masks & a]
        disjoint = (masks & a) == 0

        if report.superadditive:
            bad = np.nonzero(disjoint & (union < va + table - tol))[0]
            if bad.size:
                report.superadditive = False
                report.witnesses['superadditive'] = (a, int(bad[0]))
        if report.subadditive:
            bad = np.nonzero(disjoint & (union > va + table + tol))[0]
            if bad.size:
                report.subadditive = False
                report.witnesses['subadditive'] = (a, int(bad[0]))
        if report.submodular:
            bad = np.nonzero(va + table < inter + union - tol)[0]
            if bad.size:
                report.submodular = False
                report.witnesses['submodular'] = (a, int(bad[0]))
        if not (
            report.superadditive or report.subadditive or report.submodular
        ):
            break

    P = P or v.probability
    if P is not None:
        report.invariant_wrt_P = check_invariance(v, P).invariant
    return report


def check_invariance(v: Game, P: ProbabilityCharge) -> InvarianceResult:
    """v constante (tolerância 1e-9) em cada classe de P-probabilidade"""
    if v.space != P.space:
        raise SpaceMismatch('Jogo e probabilidade em espaços diferentes')
    ensure_enumerable(v.n, what='teste de invariância')
    keys, inverse = P.class_index()
    table = v.table
    high = np.full(len(keys), -np.inf)
    low = np.full(len(keys), np.inf)
    np.maximum.at(high, inverse, table)
    np.minimum.at(low, inverse, table)
    spread = high - low
    bad = np.nonzero(spread > get_settings().value_tol)[0]
    if not bad.size:
        return InvarianceResult(True)
    cls = bad[0]
    members = np.nonzero(inverse == cls)[0]
    a = int(members[np.argmin(table[members])])
    b = int(members[np.argmax(table[members])])
    return InvarianceResult(False, (mask_to_bits(a), mask_to_bits(b)))


def conjugate_game(v: Game) -> Game:
    """v̄(A) = v(Ω) − v(A^c); involução"""
    total = v.total
    full = full_mask(v.n)
    distortion = (
        conjugate_distortion(v.distortion) if v.distortion else None
    )
    label = f'conjugate({v.label})'
    if v.is_materialized:
        # a complementar de m é full - m: tabela invertida
        return Game(
            v.space,
            table=total - v.table[::-1],
            probability=v.probability,
            distortion=distortion,
            label=label,
        )
    return Game(
        v.space,
        func=lambda mask: total - v.value(full & ~mask),
        probability=v.probability,
        distortion=distortion,
        label=label,
    )


def envelope(mode: str, charges: List[SignedCharge]) -> Game:
    """Envelope inferior (ínfimo) ou superior (supremo) evento a evento"""
    if not charges:
        raise EmptyList('Envelope de lista vazia')
    if mode not in ('lower', 'upper'):
        raise ValueError(f'Modo de envelope desconhecido: {mode}')
    space = charges[0].space
    for mu in charges[1:]:
        charges[0].check_space(mu)
    reduce_op: Callable = np.min if mode == 'lower' else np.max
    label = f'{mode}_envelope'

    if space.n <= get_settings().materialize_atoms:
        stacked = np.vstack([charge_table(mu) for mu in charges])
        return Game(space, table=reduce_op(stacked, axis=0), label=label)
    return Game(
        space,
        func=lambda mask: float(reduce_op([mu.value(mask) for mu in charges])),
        label=label,
    )
