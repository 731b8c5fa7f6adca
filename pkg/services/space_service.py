"""
Serviço de espaços finitos: construção, probabilidade de eventos,
condicionamento e refinamento
"""
import logging
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Tuple, Union

from models.space import Event, FiniteSpace, ProbabilityCharge
from utils.bitmask import bits_to_mask, full_mask, mask_to_bits
from utils.config import get_settings
from utils.exceptions import (
    ConfigError,
    ForeignEvent,
    NegativeWeight,
    NullConditioningEvent,
    SpaceError,
    TooManyAtoms,
    ZeroTotal,
)
from utils.serialization import parse_rational

logger = logging.getLogger(__name__)

EventLike = Union[Event, int]


def uniform(n: int, enforce_cap: bool = True) -> FiniteSpace:
    return build_space({'type': 'uniform', 'n': n}, enforce_cap=enforce_cap)


def weighted(weights: Iterable, enforce_cap: bool = True) -> FiniteSpace:
    return build_space(
        {'type': 'weighted', 'weights': list(weights)},
        enforce_cap=enforce_cap,
    )


def build_space(kind: Dict[str, Any], enforce_cap: bool = True) -> FiniteSpace:
    """
    Constrói um FiniteSpace validado a partir do bloco de config
    {'type': 'uniform', 'n': 8} ou
    {'type': 'weighted', 'weights': ['2/3', '1/3']}
    enforce_cap=False libera n acima do teto para estudos que não enumeram
    """
    space_type = kind.get('type')
    if space_type == 'uniform':
        n = int(kind.get('n', 0))
        if n < 1:
            raise SpaceError(f'uniform(n) exige n >= 1, recebido {n}')
        weights = tuple(Fraction(1, n) for _ in range(n))
    elif space_type == 'weighted':
        raw = kind.get('weights') or []
        if not raw:
            raise SpaceError('Lista de pesos vazia')
        weights = tuple(parse_rational(w) for w in raw)
    else:
        raise ConfigError(f'Tipo de espaço desconhecido: {space_type!r}')

    if any(w < 0 for w in weights):
        raise NegativeWeight(f'Pesos negativos: {[str(w) for w in weights]}')
    total = sum(weights, Fraction(0))
    if total == 0:
        raise ZeroTotal('Pesos somam zero')
    if total != 1:
        raise SpaceError(f'Pesos somam {total}, esperado exatamente 1')

    settings = get_settings()
    if enforce_cap and len(weights) > settings.max_atoms:
        raise TooManyAtoms(
            f'{len(weights)} átomos excede o limite {settings.max_atoms}'
        )
    if len(weights) > settings.warn_atoms:
        logger.warning('Espaço com %d átomos', len(weights))
    return FiniteSpace(weights)


def to_event(space: FiniteSpace, event: EventLike) -> Event:
    """Valida que o evento pertence ao espaço"""
    if isinstance(event, Event):
        if event.n != space.n or event.mask >> space.n:
            raise ForeignEvent(
                f'Evento {event.members} não pertence a um espaço com '
                f'{space.n} átomos'
            )
        return event
    mask = int(event)
    if mask < 0 or mask >> space.n:
        raise ForeignEvent(f'Máscara {mask} fora de 2^{space.n}')
    return Event(mask, space.n)


def event_from_members(space: FiniteSpace, members: Iterable[int]) -> Event:
    members = list(members)
    if any(i < 0 or i >= space.n for i in members):
        raise ForeignEvent(f'Índices {members} fora de 0..{space.n - 1}')
    return Event(bits_to_mask(members), space.n)


def event_probability(space: FiniteSpace, event: EventLike) -> Fraction:
    """P(A) exato: soma dos pesos dos membros"""
    event = to_event(space, event)
    return sum(
        (space.weights[i] for i in mask_to_bits(event.mask)), Fraction(0)
    )


def conditional(P: ProbabilityCharge, event: EventLike) -> ProbabilityCharge:
    """P^A(B) = P(A ∩ B) / P(A); átomos fora de A recebem peso 0"""
    event = to_event(P.space, event)
    p_a = P.probability(event.mask)
    if p_a == 0:
        raise NullConditioningEvent(
            f'P(A) = 0 para A = {event.members}; condicionamento indefinido'
        )
    values = tuple(
        (v / p_a) if (event.mask >> i) & 1 else v * 0
        for i, v in enumerate(P.values)
    )
    return ProbabilityCharge(P.space, values)


def refine(
    space: FiniteSpace, factor: int, enforce_cap: bool = True
) -> Tuple[FiniteSpace, Callable[[EventLike], Event]]:
    """
    Divide cada átomo em `factor` filhos de mesmo peso
    Átomo i vira os filhos i*k .. i*k+k-1; o mapa levanta eventos
    preservando a probabilidade exatamente.
    """
    if factor < 1:
        raise SpaceError(f'Fator de refinamento inválido: {factor}')
    settings = get_settings()
    if enforce_cap and space.n * factor > settings.max_atoms:
        raise TooManyAtoms(
            f'Refinamento n*k = {space.n * factor} excede {settings.max_atoms}'
        )
    weights = tuple(w / factor for w in space.weights for _ in range(factor))
    refined = FiniteSpace(weights)
    block = full_mask(factor)

    def lift(event: EventLike) -> Event:
        event = to_event(space, event)
        mask = 0
        for i in mask_to_bits(event.mask):
            mask |= block << (i * factor)
        return Event(mask, refined.n)

    return refined, lift
