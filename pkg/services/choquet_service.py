"""
Serviço de integração de Choquet, avaliadores fechados (VaR, ES, entropic)
e testes em nível de funcional (aditividade comonotônica, invariância)
"""
import itertools
import logging
import threading
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from interfaces.oracle_interfaces import IFunctionalOracle
from models.game import Game
from models.space import FiniteSpace, ProbabilityCharge
from models.variable import Dictionary, FunctionalOracle, SimpleRandomVariable
from services.lattice_service import equidistributed_variants
from utils.bitmask import full_mask
from utils.config import get_settings
from utils.exceptions import (
    ConfigError,
    DomainError,
    EmptyDictionary,
    ParameterOutOfRange,
    SpaceMismatch,
    TooManyAtoms,
)
from utils.serialization import parse_rational

logger = logging.getLogger(__name__)

Witness = Optional[Tuple[List[float], List[float]]]


@dataclass
class FunctionalTestResult:
    """Resultado de um teste randomizado/enumerado sobre φ"""

    passes: bool
    witness: Witness = None
    checked: int = 0
    max_gap: float = 0.0

    def to_dict(self) -> dict:
        return {
            'passes': self.passes,
            'witness': list(self.witness) if self.witness else None,
            'checked': self.checked,
            'max_gap': self.max_gap,
        }


# ============== CHOQUET ==============


def choquet_integral(v: Game, X: SimpleRandomVariable) -> float:
    """
    ∫X dv = x_m·v(Ω) + Σ_{i<m} (x_i − x_{i+1})·v({X ≥ x_i})
    com x_1 > … > x_m os valores distintos de X
    Equivale a ∫₀^∞ v(X>t)dt + ∫_{−∞}^0 [v(X>t) − v(Ω)]dt.
    """
    if v.space != X.space:
        raise SpaceMismatch('Jogo e variável em espaços diferentes')
    levels = np.unique(X.values)[::-1]
    total = float(levels[-1]) * v.value(full_mask(v.n))
    mask = 0
    for i in range(len(levels) - 1):
        for atom in np.nonzero(X.values == levels[i])[0]:
            mask |= 1 << int(atom)
        total += float(levels[i] - levels[i + 1]) * v.value(mask)
    return total


# ============== MEDIDAS DE RISCO ==============


def _distribution(
    P: ProbabilityCharge, X: SimpleRandomVariable
) -> List[Tuple[float, Any]]:
    """Valores distintos de X em ordem crescente com P(X = x)"""
    if P.space != X.space:
        raise SpaceMismatch('Probabilidade e variável em espaços diferentes')
    law: Dict[float, Any] = {}
    for value, weight in zip(X.values, P.values):
        law[float(value)] = law.get(float(value), 0) + weight
    return sorted(law.items())


def value_at_risk(
    P: ProbabilityCharge, X: SimpleRandomVariable, gamma
) -> float:
    """Quantil à esquerda: inf{x : P(X ≤ x) ≥ γ}"""
    gamma = parse_rational(gamma)
    if not 0 < gamma < 1:
        raise ParameterOutOfRange(f'VaR exige γ ∈ (0,1), recebido {gamma}')
    level = gamma if P.exact else float(gamma)
    cumulative = 0
    for value, weight in _distribution(P, X):
        cumulative += weight
        if weight > 0 and cumulative >= level:
            return value
    # arredondamento em cargas reais
    return _distribution(P, X)[-1][0]


def expected_shortfall(
    P: ProbabilityCharge, X: SimpleRandomVariable, beta
) -> float:
    """ES_β = (1/(1−β))·Σ x_j·|(F_{j−1}, F_j] ∩ (β, 1]|"""
    beta = parse_rational(beta)
    if not 0 <= beta < 1:
        raise ParameterOutOfRange(f'ES exige β ∈ [0,1), recebido {beta}')
    level = beta if P.exact else float(beta)
    lower = 0
    total = 0.0
    for value, weight in _distribution(P, X):
        upper = lower + weight
        overlap = upper - max(lower, level)
        if overlap > 0:
            total += value * float(overlap)
        lower = upper
    return total / float(1 - beta)


def entropic_risk(
    P: ProbabilityCharge, X: SimpleRandomVariable, alpha: float
) -> float:
    """(1/α)·log E_P[e^{αX}], com deslocamento pelo máximo"""
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterOutOfRange(f'entropic exige α > 0, recebido {alpha}')
    weights = P.real_values()
    support = weights > 0
    top = float(X.values[support].max())
    shifted = np.exp(alpha * (X.values[support] - top))
    return top + float(np.log(np.dot(weights[support], shifted))) / alpha


def evaluate_riskmetric(
    family: str, P: ProbabilityCharge, X: SimpleRandomVariable, **params
) -> float:
    """Avaliadores fechados: var(γ), es(β), entropic(α)"""
    try:
        if family == 'var':
            return value_at_risk(P, X, params['gamma'])
        if family == 'es':
            return expected_shortfall(P, X, params['beta'])
        if family == 'entropic':
            return entropic_risk(P, X, params.get('alpha', 1.0))
    except KeyError as exc:
        raise ConfigError(f'Parâmetro ausente para {family}: {exc}') from exc
    raise ConfigError(f'Medida de risco desconhecida: {family!r}')


# ============== ORÁCULOS ==============


def riskmetric_oracle(
    family: str, P: ProbabilityCharge, **params
) -> FunctionalOracle:
    # valida família e parâmetros já na construção
    evaluate_riskmetric(
        family, P, SimpleRandomVariable.constant(P.space, 0), **params
    )
    return FunctionalOracle(
        lambda X: evaluate_riskmetric(family, P, X, **params),
        tag=family,
        metadata={'params': {k: str(v) for k, v in params.items()}},
    )


def expectation_oracle(P: ProbabilityCharge) -> FunctionalOracle:
    weights = P.real_values()
    return FunctionalOracle(
        lambda X: float(np.dot(weights, X.values)), tag='expectation'
    )


def choquet_oracle(v: Game) -> FunctionalOracle:
    return FunctionalOracle(
        lambda X: choquet_integral(v, X),
        tag='choquet',
        metadata={'game': v.label},
    )


def coordinate_oracle(index: int) -> FunctionalOracle:
    """φ(X) = X(index): funcional linear que não depende da lei"""
    return FunctionalOracle(
        lambda X: float(X.values[index]),
        tag='coordinate',
        metadata={'index': index},
    )


def table_oracle(
    space: FiniteSpace, pairs: Iterable[Tuple[Sequence[float], float]]
) -> Tuple[FunctionalOracle, Dictionary]:
    """Oráculo tabelado: lista de (valores da variável, φ) e seu dicionário"""
    lookup: Dict[tuple, float] = {}
    variables = []
    for values, phi in pairs:
        variable = SimpleRandomVariable(space, values)
        lookup[variable.key()] = float(phi)
        variables.append(variable)
    if not variables:
        raise EmptyDictionary('Tabela de funcional vazia')

    def evaluate(X: SimpleRandomVariable) -> float:
        try:
            return lookup[X.key()]
        except KeyError as exc:
            raise DomainError(
                f'φ desconhecido fora da tabela: {X.to_list()}'
            ) from exc

    oracle = FunctionalOracle(evaluate, tag='table')
    return oracle, Dictionary(space, variables, strategy='table')


class SerializingOracle(IFunctionalOracle):
    """Adaptador que serializa chamadas a um oráculo não thread-safe"""

    def __init__(self, oracle: IFunctionalOracle):
        self._oracle = oracle
        self._lock = threading.Lock()

    def evaluate(self, variable: SimpleRandomVariable) -> float:
        with self._lock:
            return self._oracle.evaluate(variable)

    def describe(self) -> Dict[str, Any]:
        return {**self._oracle.describe(), 'serialized': True}


# ============== TESTES DE FUNCIONAL ==============


def _monotone_steps(rng: np.random.Generator, n: int) -> np.ndarray:
    """Função degrau não decrescente avaliada nos postos 0..n-1"""
    jumps = rng.exponential(size=n) * (rng.random(n) < 0.6)
    return rng.normal() + np.cumsum(jumps)


def comonotonic_additivity_test(
    phi: IFunctionalOracle,
    space: FiniteSpace,
    trials: int = 100,
    seed: Optional[int] = None,
) -> FunctionalTestResult:
    """
    Amostra pares comonotônicos (f∘Z, g∘Z) e verifica
    |φ(X+Y) − φ(X) − φ(Y)| ≤ 1e-7
    """
    settings = get_settings()
    if trials < 1:
        raise ValueError('trials deve ser >= 1')
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    n = space.n
    result = FunctionalTestResult(passes=True)
    for _ in range(trials):
        ranks = np.argsort(np.argsort(rng.normal(size=n)))
        X = SimpleRandomVariable(space, _monotone_steps(rng, n)[ranks])
        Y = SimpleRandomVariable(space, _monotone_steps(rng, n)[ranks])
        gap = abs(phi(X + Y) - phi(X) - phi(Y))
        result.checked += 1
        result.max_gap = max(result.max_gap, gap)
        if gap > settings.comonotone_tol:
            result.passes = False
            result.witness = (X.to_list(), Y.to_list())
            break
    return result


def _is_uniform(P: ProbabilityCharge) -> bool:
    return all(v == P.values[0] for v in P.values) and P.values[0] != 0


def _variants(
    P: ProbabilityCharge, X: SimpleRandomVariable, rng: np.random.Generator
) -> Iterable[np.ndarray]:
    settings = get_settings()
    n = P.space.n
    if not _is_uniform(P):
        if n > settings.permutation_atoms:
            raise TooManyAtoms(
                f'Variantes P-equidistribuídas limitadas a n ≤ '
                f'{settings.permutation_atoms} fora do caso uniforme'
            )
        return equidistributed_variants(P, X)
    if n <= settings.permutation_atoms:
        return (X.values[list(p)] for p in itertools.permutations(range(n)))
    # acima do teto: permutações amostradas
    return (X.values[rng.permutation(n)] for _ in range(200))


def functional_invariance_test(
    phi: IFunctionalOracle,
    P: ProbabilityCharge,
    dictionary: Dictionary,
    seed: Optional[int] = None,
) -> FunctionalTestResult:
    """
    Para cada X do dicionário compara φ(X) com φ(Y) nas variantes
    P-equidistribuídas; o primeiro contraexemplo vira testemunha
    """
    if not len(dictionary):
        raise EmptyDictionary('Dicionário vazio')
    settings = get_settings()
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    result = FunctionalTestResult(passes=True)
    for X in dictionary:
        base = phi(X)
        for values in _variants(P, X, rng):
            Y = SimpleRandomVariable(P.space, values)
            gap = abs(phi(Y) - base)
            result.checked += 1
            result.max_gap = max(result.max_gap, gap)
            if gap > settings.value_tol:
                result.passes = False
                result.witness = (X.to_list(), Y.to_list())
                return result
    return result
