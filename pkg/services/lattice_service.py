"""
Serviço do reticulado de cargas: operações de ordem, variação total,
decomposição de Lebesgue e funcionais de rearranjo (s_μ, ι_μ, ρ_μ)
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Optional

import numpy as np

from models.charge import RearrangementStats, SignedCharge
from models.space import ProbabilityCharge
from models.variable import SimpleRandomVariable
from utils.bitmask import ensure_enumerable, submasks
from utils.config import get_settings
from utils.exceptions import (
    ChargeError,
    NotAbsolutelyContinuous,
    SpaceMismatch,
    TooManyAtoms,
)

logger = logging.getLogger(__name__)

MODES = ('join', 'meet', 'abs', 'positive_part', 'negative_part')


@dataclass
class ChargeRelations:
    """μ = contínua + singular relativamente a P (nulos de P)"""

    absolutely_continuous: bool
    continuous_part: SignedCharge
    singular_part: SignedCharge

    def to_dict(self) -> dict:
        return {
            'absolutely_continuous': self.absolutely_continuous,
            'continuous_part': self.continuous_part.to_list(),
            'singular_part': self.singular_part.to_list(),
        }


def _check_same_space(mu: SignedCharge, P) -> None:
    if mu.space != P.space:
        raise SpaceMismatch('Carga e probabilidade em espaços diferentes')


def charge_table(mu: SignedCharge) -> np.ndarray:
    """μ(A) para todas as máscaras, por somas de subconjuntos"""
    ensure_enumerable(mu.space.n, what='tabela de carga')
    table = np.zeros(1 << mu.space.n)
    for i, value in enumerate(mu.values):
        block = 1 << i
        table[block : 2 * block] = table[:block] + value
    return table


def lattice_combine(
    mode: str,
    mu: SignedCharge,
    nu: Optional[SignedCharge] = None,
    verify: bool = False,
) -> SignedCharge:
    """
    Operações do reticulado: join, meet, abs, positive_part, negative_part
    Com verify=True o join é conferido pela fórmula de partição
    (μ∨ν)(A) = sup{μ(B) + ν(A∖B) : B ⊆ A}.
    """
    if mode not in MODES:
        raise ValueError(f'Modo desconhecido: {mode}')
    if mode in ('join', 'meet'):
        if nu is None:
            raise ValueError(f'{mode} exige duas cargas')
        mu.check_space(nu)
        op = np.maximum if mode == 'join' else np.minimum
        result = SignedCharge(mu.space, op(mu.values, nu.values))
        if verify and mode == 'join':
            verify_join(mu, nu, result)
        return result
    if mode == 'abs':
        return SignedCharge(mu.space, np.abs(mu.values))
    if mode == 'positive_part':
        return SignedCharge(mu.space, np.maximum(mu.values, 0.0))
    return SignedCharge(mu.space, np.maximum(-mu.values, 0.0))


def partition_join_value(
    mu: SignedCharge, nu: SignedCharge, mask: int
) -> float:
    """sup{μ(B) + ν(A∖B) : B ⊆ A} por enumeração"""
    mu.check_space(nu)
    return max(mu.value(b) + nu.value(mask & ~b) for b in submasks(mask))


def verify_join(
    mu: SignedCharge, nu: SignedCharge, joined: SignedCharge
) -> None:
    """Confere o join átomo a átomo contra a fórmula de partição (n ≤ 12)"""
    settings = get_settings()
    ensure_enumerable(
        mu.space.n, settings.pair_scan_atoms, 'verificação do join'
    )
    mu_table, nu_table = charge_table(mu), charge_table(nu)
    joined_table = charge_table(joined)
    for mask in range(1 << mu.space.n):
        best = max(mu_table[b] + nu_table[mask & ~b] for b in submasks(mask))
        if abs(best - joined_table[mask]) > settings.value_tol:
            raise ChargeError(
                f'Fórmula de partição diverge em A={mask}: '
                f'{best} != {joined_table[mask]}'
            )


def total_variation(mu: SignedCharge) -> float:
    """TV(μ) = |μ|(Ω)"""
    return float(np.abs(mu.values).sum())


def relations(mu: SignedCharge, P: ProbabilityCharge) -> ChargeRelations:
    """
    Decomposição de Lebesgue trivial: parte contínua nos átomos P-positivos,
    singular nos átomos P-nulos. Em espaços finitos ≪ e ≪≪ coincidem.
    """
    _check_same_space(mu, P)
    null = np.array([float(v) == 0.0 for v in P.values])
    singular = np.where(null, mu.values, 0.0)
    continuous = np.where(null, 0.0, mu.values)
    return ChargeRelations(
        absolutely_continuous=bool(np.all(singular == 0.0)),
        continuous_part=SignedCharge(mu.space, continuous),
        singular_part=SignedCharge(mu.space, singular),
    )


def rearrangement_stats(
    mu: SignedCharge, P: ProbabilityCharge
) -> RearrangementStats:
    """
    s_μ(p) = max{μ(B) : P(B) = p}, ι_μ(p) = min{μ(B) : P(B) = p}
    Espaços uniformes: soma dos k maiores/menores átomos
    """
    _check_same_space(mu, P)
    n = mu.space.n
    stats = RearrangementStats(total=mu.total)

    if P.exact and mu.space.is_uniform and P.values == mu.space.weights:
        ordered = np.sort(mu.values)
        prefix_low = np.concatenate(([0.0], np.cumsum(ordered)))
        prefix_high = np.concatenate(([0.0], np.cumsum(ordered[::-1])))
        for k in range(n + 1):
            key = Fraction(k, n)
            stats.s_values[key] = float(prefix_high[k])
            stats.iota_values[key] = float(prefix_low[k])
            stats.class_sizes[key] = comb(n, k)
        return stats

    ensure_enumerable(n, what='estatísticas de rearranjo')
    keys, inverse = P.class_index()
    table = charge_table(mu)
    high = np.full(len(keys), -np.inf)
    low = np.full(len(keys), np.inf)
    np.maximum.at(high, inverse, table)
    np.minimum.at(low, inverse, table)
    sizes = np.bincount(inverse, minlength=len(keys))
    for idx, key in enumerate(keys):
        stats.s_values[key] = float(high[idx])
        stats.iota_values[key] = float(low[idx])
        stats.class_sizes[key] = int(sizes[idx])
    return stats


def _require_ac(mu: SignedCharge, P: ProbabilityCharge) -> None:
    if not relations(mu, P).absolutely_continuous:
        raise NotAbsolutelyContinuous(
            'ρ_μ exige μ ≪ P (μ deve anular os átomos P-nulos)'
        )


def equidistributed_variants(
    P: ProbabilityCharge, X: SimpleRandomVariable
) -> Iterator[np.ndarray]:
    """
    Enumera Y com a mesma P-distribuição de X
    Átomos P-nulos mantêm os valores de X (irrelevantes para μ ≪ P).
    """
    n = P.space.n
    positive = [i for i in range(n) if float(P.values[i]) > 0]
    positive_mask = sum(1 << i for i in positive)
    levels = sorted({float(X.values[i]) for i in positive})
    targets = [
        P.probability(
            sum(1 << i for i in positive if float(X.values[i]) == x)
        )
        for x in levels
    ]
    current = np.array(X.values, dtype=float)

    def matches(mask: int, target) -> bool:
        p = P.probability(mask)
        if P.exact:
            return p == target
        return abs(p - target) <= 1e-12

    def assign(j: int, remaining: int) -> Iterator[np.ndarray]:
        if j == len(levels) - 1:
            for i in range(n):
                if (remaining >> i) & 1:
                    current[i] = levels[j]
            yield current.copy()
            return
        for sub in submasks(remaining):
            if matches(sub, targets[j]):
                for i in range(n):
                    if (sub >> i) & 1:
                        current[i] = levels[j]
                yield from assign(j + 1, remaining & ~sub)

    if not levels:
        yield current.copy()
        return
    yield from assign(0, positive_mask)


def rho(
    mu: SignedCharge, P: ProbabilityCharge, X: SimpleRandomVariable
) -> float:
    """
    ρ_μ(X) = sup{E_μ[Y] : Y ~_P X}
    Espaço uniforme: desigualdade de rearranjo (ordena μ e X juntos)
    """
    _check_same_space(mu, P)
    _require_ac(mu, P)
    if P.exact and mu.space.is_uniform and P.values == mu.space.weights:
        return float(np.dot(np.sort(mu.values), np.sort(X.values)))
    ensure_enumerable(
        mu.space.n, get_settings().pair_scan_atoms, 'rearranjos de ρ_μ'
    )
    return max(
        float(np.dot(mu.values, y)) for y in equidistributed_variants(P, X)
    )


def rho_bruteforce(
    mu: SignedCharge, P: ProbabilityCharge, X: SimpleRandomVariable
) -> float:
    """Oráculo de força bruta: máximo sobre permutações (n ≤ 7)"""
    _check_same_space(mu, P)
    _require_ac(mu, P)
    n = mu.space.n
    limit = get_settings().permutation_atoms
    if n > limit:
        raise TooManyAtoms(f'Oráculo de permutações limitado a n ≤ {limit}')
    best = -np.inf
    for order in itertools.permutations(range(n)):
        candidate = X.values[list(order)]
        # só permutações que preservam a distribuição
        if not _same_law(P, X.values, candidate):
            continue
        best = max(best, float(np.dot(mu.values, candidate)))
    return best


def _same_law(P: ProbabilityCharge, x: np.ndarray, y: np.ndarray) -> bool:
    law_x, law_y = {}, {}
    for i, w in enumerate(P.values):
        if float(w) > 0:
            law_x[float(x[i])] = law_x.get(float(x[i]), 0) + w
            law_y[float(y[i])] = law_y.get(float(y[i]), 0) + w
    return law_x == law_y
