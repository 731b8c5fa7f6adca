"""
Serviço de elicitação: candidato P̂ a partir de extremos, inversão de
parâmetros (ES, entropic), pipeline VaR em dois ramos e estudos de
convergência sob refinamento
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from models.elicitation import (
    Branch,
    CandidateReport,
    CandidateStatus,
    ConvergenceSeries,
    ElicitationReport,
    GammaBracket,
    RecursionLayer,
)
from models.game import Game
from models.space import FiniteSpace, ProbabilityCharge
from models.support import ExtremumReport, Side
from services.game_service import build_distortion, family_distortion
from services.space_service import uniform
from services.support_service import is_diverging, loose_extremum
from utils.bitmask import all_masks, ensure_enumerable, full_mask
from utils.config import get_settings
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
    SpaceMismatch,
    TooManyAtoms,
)

logger = logging.getLogger(__name__)

MODES = ('brute', 'closed_form')
STATISTICS = ('total', 'atom')


# ============== CANDIDATO ==============


def _as_fraction(value: float) -> Optional[Fraction]:
    """Racional de denominador ≤ 10^6 quando reproduz o real a 1e-12"""
    approx = Fraction(value).limit_denominator(10**6)
    if abs(float(approx) - value) <= 1e-12:
        return approx
    return None


def candidate_from_extremum(
    report: ExtremumReport, P: Optional[ProbabilityCharge] = None
) -> CandidateReport:
    """
    Normaliza o extremo pelo total: P̂ = extremo / c
    Com P declarada, mede o desvio de c·P e marca not_proportional.
    """
    if not report.exists:
        raise NoExtremum(f'Extremo com status {report.status.value}')
    settings = get_settings()
    tol = settings.value_tol
    values = np.asarray(report.extremum.values, dtype=float)
    if np.all(np.abs(values) <= tol):
        return CandidateReport(CandidateStatus.ZERO_EXTREMUM)
    if np.any(values < -tol):
        return CandidateReport(CandidateStatus.SIGNED)

    space = report.extremum.space
    fractions = [_as_fraction(float(x)) for x in values]
    if all(f is not None for f in fractions):
        total = sum(fractions, Fraction(0))
        candidate = ProbabilityCharge(
            space, tuple(f / total for f in fractions)
        )
    else:
        total = float(values.sum())
        candidate = ProbabilityCharge(
            space, tuple(float(x) / total for x in values)
        )
    scale = float(total)
    residual = float(
        np.max(np.abs(values - scale * candidate.real_values()))
    ) / abs(scale)
    result = CandidateReport(
        CandidateStatus.OK, candidate, scale=scale, residual=residual
    )

    if P is not None:
        if P.space != space:
            raise SpaceMismatch('Extremo e P em espaços diferentes')
        deviation = values - scale * P.real_values()
        result.residual = float(np.max(np.abs(deviation))) / abs(scale)
        result.proportional_to_reference = (
            result.residual <= settings.candidate_tol
        )
        if not result.proportional_to_reference:
            result.status = CandidateStatus.NOT_PROPORTIONAL
            logger.warning(
                'Extremo não é múltiplo de P (resíduo %.3g)',
                result.residual,
            )
    return result


# ============== PARÂMETROS ==============


def _entropic_scale(alpha: float) -> float:
    return math.expm1(alpha) / alpha


def recover_parameter(family: str, scale):
    """
    es: β = 1 − 1/c (exato para c racional)
    entropic: α com (e^α − 1)/α = c por bissecção em [1e-8, 50]
    """
    if family == 'es':
        if isinstance(scale, Fraction):
            c = scale
        else:
            c = _as_fraction(float(scale)) or float(scale)
        if c < 1:
            raise OutOfRange(f'es exige c ≥ 1, recebido {c}')
        return 1 - 1 / c

    if family == 'entropic':
        c = float(scale)
        lo, hi = 1e-8, 50.0
        if c <= 1:
            raise OutOfRange(
                f'entropic exige c > 1 (c = 1 é a fronteira α → 0), '
                f'recebido {c}'
            )
        if c > _entropic_scale(hi):
            raise OutOfRange(f'c = {c} exige α acima de {hi}')
        tol = get_settings().bisection_tol
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _entropic_scale(mid) < c:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    raise DomainError(f'Sem inversão de parâmetro para {family!r}')


# ============== CAPACIDADE VaR ==============


@dataclass
class _CapacityClasses:
    """Valores 0/1 de uma capacidade por classe de probabilidade"""

    probability: ProbabilityCharge
    keys: list
    inverse: np.ndarray
    values: Dict[Fraction, int]

    def base(self, branch: Branch) -> Dict[Fraction, int]:
        """g₀ = 1 − v(A^c) no ramo small; h₀ = v no ramo large"""
        if branch == Branch.LARGE:
            return dict(self.values)
        total = self.probability.probability(full_mask(self.probability.n))
        return {k: 1 - self.values[total - k] for k in self.keys}

    def representatives(self) -> np.ndarray:
        """Um evento por classe, na ordem de keys"""
        _, first = np.unique(self.inverse, return_index=True)
        return first


def _capacity_classes(
    capacity: Game, space: Optional[FiniteSpace] = None
) -> _CapacityClasses:
    """Valida 0/1, invariância e monotonia por classe"""
    space = space or capacity.space
    if capacity.space != space:
        raise SpaceMismatch('Capacidade e espaço diferentes')
    ensure_enumerable(space.n, what='capacidade VaR')
    tol = get_settings().value_tol
    P = space.probability
    table = capacity.table
    binary = np.rint(table)
    if np.any(np.abs(table - binary) > tol) or np.any(
        (binary != 0) & (binary != 1)
    ):
        raise NotACapacity(f'{capacity.label} não é 0/1')

    keys, inverse = P.class_index()
    lows = np.full(len(keys), np.inf)
    highs = np.full(len(keys), -np.inf)
    np.minimum.at(lows, inverse, binary)
    np.maximum.at(highs, inverse, binary)
    split = np.nonzero(lows != highs)[0]
    if split.size:
        raise NotACapacity(
            f'{capacity.label} não é invariante: classe '
            f'P = {keys[split[0]]} tem valores 0 e 1'
        )
    ordered = lows.astype(int)
    drops = np.nonzero(np.diff(ordered) < 0)[0]
    if drops.size:
        raise NotACapacity(
            f'{capacity.label} não é monótona: cai após P = '
            f'{keys[drops[0]]}'
        )
    values = {k: int(x) for k, x in zip(keys, ordered)}
    return _CapacityClasses(P, keys, inverse, values)


def var_branch_classifier(
    capacity: Game, space: Optional[FiniteSpace] = None
) -> Branch:
    """small sse existe A com VaR(𝟏_A) = VaR(𝟏_{A^c}) = 0"""
    _capacity_classes(capacity, space)
    table = capacity.table
    # complemento da máscara m é 2^n − 1 − m: tabela invertida
    both_zero = (np.rint(table) == 0) & (np.rint(table[::-1]) == 0)
    return Branch.SMALL if both_zero.any() else Branch.LARGE


def _anchor(classes: _CapacityClasses, branch: Branch) -> Fraction:
    """Menor classe com g₀ = 1 (small) ou maior classe com h₀ = 0 (large)"""
    base = classes.base(branch)
    if branch == Branch.SMALL:
        return min(k for k, x in base.items() if x == 1)
    return max(k for k, x in base.items() if x == 0)


def _min_weight(P: ProbabilityCharge):
    return min(w for w in P.values if w > 0)


def _resolution_limit(anchor, w_min) -> int:
    """Maior t com 2^{-t}·âncora ≥ menor peso atômico (−1 se nenhum)"""
    t = -1
    while anchor / 2 ** (t + 1) >= w_min:
        t += 1
    return t


def _closed_layer(
    branch: Branch, t: int, keys: list, anchor
) -> RecursionLayer:
    threshold = anchor / 2**t
    if branch == Branch.SMALL:
        values = {k: int(k >= threshold) for k in keys}
    else:
        values = {k: int(k > threshold) for k in keys}
    return RecursionLayer(branch, t, values, 'closed_form')


def _brute_layer(
    branch: Branch,
    t: int,
    previous: RecursionLayer,
    classes: _CapacityClasses,
) -> RecursionLayer:
    """
    f_t(A) = min(1, sup_B inf_{C ⊆ A^c} f(A∪B) + f(A∪C) − f(B∪C))
    avaliado num representante por classe
    """
    n = classes.probability.n
    masks = all_masks(n)
    lookup = np.array([previous.values[k] for k in classes.keys], np.int8)
    prev = lookup[classes.inverse].astype(np.int64)

    def evaluate(rep: int) -> int:
        C = masks[(masks & rep) == 0]
        union_bc = np.bitwise_or.outer(masks, C)
        terms = prev[rep | masks][:, None] + prev[rep | C][None, :]
        terms = terms - prev[union_bc]
        return int(min(1, terms.min(axis=1).max()))

    reps = classes.representatives()
    workers = max(1, get_settings().lp_workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(evaluate, (int(r) for r in reps)))
    values = dict(zip(classes.keys, results))
    return RecursionLayer(branch, t, values, 'brute')


def build_layers(
    capacity: Game,
    branch: Branch,
    depth: int,
    mode: str = 'closed_form',
    space: Optional[FiniteSpace] = None,
) -> List[RecursionLayer]:
    """Camadas t = 0..depth de g_t (small) ou h_t (large)"""
    if mode not in MODES:
        raise DomainError(f'Modo desconhecido: {mode!r}')
    if depth < 0:
        raise ParameterOutOfRange(f'Profundidade negativa: {depth}')
    branch = Branch(branch)
    classes = _capacity_classes(capacity, space)
    anchor = _anchor(classes, branch)
    layers = [RecursionLayer(branch, 0, classes.base(branch), mode)]
    if mode == 'closed_form':
        layers += [
            _closed_layer(branch, t, classes.keys, anchor)
            for t in range(1, depth + 1)
        ]
        return layers

    settings = get_settings()
    n = classes.probability.n
    if n > settings.brute_recursion_atoms:
        raise TooManyAtoms(
            f'Recursão bruta limitada a n ≤ {settings.brute_recursion_atoms}'
        )
    t_max = _resolution_limit(anchor, _min_weight(classes.probability))
    if depth > max(t_max, 0):
        raise ResolutionExceeded(
            f't = {depth} além da resolução da grade (t_max = {t_max})'
        )
    for t in range(1, depth + 1):
        layers.append(_brute_layer(branch, t, layers[-1], classes))
    return layers


def var_layer(
    capacity: Game,
    branch: Branch,
    t: int,
    mode: str = 'closed_form',
    space: Optional[FiniteSpace] = None,
) -> RecursionLayer:
    """Camada t da recursão, por força bruta ou pela regra de limiar"""
    return build_layers(capacity, branch, t, mode, space)[-1]


def _derived_values(
    branch: Branch, layers: Sequence[RecursionLayer]
) -> Dict[Fraction, Fraction]:
    if not layers:
        raise InconsistentLayers('Lista de camadas vazia')
    keys = set(layers[0].values)
    for expected, layer in enumerate(layers):
        if layer.t != expected:
            raise InconsistentLayers(
                f'Camada na posição {expected} tem t = {layer.t}'
            )
        if layer.branch != branch:
            raise InconsistentLayers(
                f'Camada t = {layer.t} do ramo {layer.branch.value}'
            )
        if set(layer.values) != keys:
            raise InconsistentLayers(f'Classes diferentes na camada {layer.t}')
    derived = {}
    for key in keys:
        hits = [layer.t for layer in layers if layer.values[key] == 1]
        derived[key] = Fraction(1, 2 ** min(hits)) if hits else Fraction(0)
    return derived


def derived_game(
    branch: Branch,
    layers: Sequence[RecursionLayer],
    P: ProbabilityCharge,
) -> Game:
    """v(A) = sup{2^{-t} : f_t(A) = 1}, 0 quando nunca vale 1"""
    branch = Branch(branch)
    derived = _derived_values(branch, layers)
    keys, inverse = P.class_index()
    if set(keys) - set(derived):
        raise InconsistentLayers('Camadas não cobrem as classes de P')
    values = np.array([float(derived[k]) for k in keys])
    return Game(
        P.space,
        table=values[inverse],
        probability=P,
        label=f'{branch.value}_derived',
    )


# ============== PIPELINE VaR ==============


def threshold_readoff(
    capacity: Game, space: Optional[FiniteSpace] = None
) -> GammaBracket:
    """
    VaR(𝟏_A) = 1 sse P(A) > 1 − γ: com p₁ a menor classe de valor 1 e p₀ a
    maior classe de valor 0 abaixo dela, γ ∈ (1 − p₁, 1 − p₀]

    O intervalo contém γ em qualquer espaço finito. A largura de um passo
    de grade (1/n) só vale em espaço uniforme; com pesos gerais a largura
    é a distância entre classes de probabilidade vizinhas.
    """
    classes = _capacity_classes(capacity, space)
    ones = [k for k, x in classes.values.items() if x == 1]
    if not ones:
        raise AllZero(f'{capacity.label} nunca vale 1')
    p1 = min(ones)
    zeros = [k for k, x in classes.values.items() if x == 0 and k < p1]
    if not zeros:
        raise NotACapacity(f'{capacity.label} vale 1 no evento vazio')
    return GammaBracket(Fraction(1 - p1), Fraction(1 - max(zeros)))


def _dyadic_bracket(
    branch: Branch,
    P: ProbabilityCharge,
    atom_values: Sequence[Fraction],
    depth: int,
) -> GammaBracket:
    """
    Interseção por átomo das restrições que w(ω) = 2^{-s} impõe a γ
    Só vale em espaço uniforme, onde a âncora é múltiplo do peso atômico.
    """
    bracket = GammaBracket(Fraction(0), Fraction(1))
    for p, value in zip(P.values, atom_values):
        if p == 0:
            continue
        p = Fraction(p)
        if value == 0:
            scaled = 2**depth * p
            if branch == Branch.SMALL:
                atom = GammaBracket(min(scaled, Fraction(1)), Fraction(2))
            else:
                atom = GammaBracket(Fraction(-1), 1 - scaled)
        else:
            s = value.denominator.bit_length() - 1
            if branch == Branch.SMALL:
                lo = 2 ** (s - 1) * p if s else Fraction(0)
                atom = GammaBracket(lo, 2**s * p)
            else:
                hi = 1 - 2 ** (s - 1) * p if s else Fraction(1)
                atom = GammaBracket(1 - 2**s * p, hi)
        bracket = bracket.intersect(atom)
    return bracket


def elicit_var(
    capacity: Game,
    space: Optional[FiniteSpace] = None,
    depth: int = 8,
    level_on_grid: bool = False,
) -> ElicitationReport:
    """
    Classifica o ramo, constrói g_t/h_t (força bruta até t_max quando n
    permite, forma fechada depois), forma o jogo derivado e toma o inf do
    núcleo solto (small) ou o sup do antinúcleo solto (large)

    A capacidade só determina γ até a classe (1 − p₁, 1 − p₀]: níveis na
    mesma classe induzem a mesma capacidade. Sem hipótese adicional o
    resultado é sempre um intervalo. Com level_on_grid (γ = 1 − P(A) para
    algum evento A) o único nível admissível é 1 − p₀, e o ramo small
    reporta γ̂ exato, com intervalo colapsado, quando 1/ĉ coincide com ele.
    """
    if depth < 0:
        raise ParameterOutOfRange(f'Profundidade negativa: {depth}')
    space = space or capacity.space
    classes = _capacity_classes(capacity, space)
    P = classes.probability
    if not any(classes.values.values()):
        raise AllZero(f'{capacity.label} nunca vale 1')
    settings = get_settings()
    diagnostics: List[str] = []

    branch = var_branch_classifier(capacity, space)
    anchor = _anchor(classes, branch)
    w_min = _min_weight(P)
    t_max = _resolution_limit(anchor, w_min)
    logger.info(
        'Ramo %s, âncora %s, t_max = %d', branch.value, anchor, t_max
    )
    if branch == Branch.SMALL and anchor <= w_min:
        diagnostics.append(
            'capacidade degenerada: γ na resolução da grade ou abaixo'
        )
    if branch == Branch.LARGE and anchor == 0:
        diagnostics.append(
            'capacidade degenerada: vale 1 em todo evento não nulo '
            '(γ acima de 1 − menor peso)'
        )
    for note in diagnostics:
        logger.warning(note)

    brute_allowed = P.n <= settings.brute_recursion_atoms
    layers = [RecursionLayer(branch, 0, classes.base(branch), 'base')]
    handoff_t = None
    for t in range(1, depth + 1):
        closed = _closed_layer(branch, t, classes.keys, anchor)
        if brute_allowed and t <= t_max:
            brute = _brute_layer(branch, t, layers[-1], classes)
            if brute.values != closed.values:
                diagnostics.append(
                    f'recursão bruta diverge da forma fechada em t = {t}'
                )
                logger.warning(diagnostics[-1])
            else:
                layers.append(brute)
                continue
        if handoff_t is None:
            handoff_t = t
        layers.append(closed)
    if handoff_t is not None and brute_allowed:
        logger.warning(
            'Recursão passa à forma fechada em t = %d (t_max = %d)',
            handoff_t,
            t_max,
        )

    game = derived_game(branch, layers, P)
    side = Side.CORE_INF if branch == Branch.SMALL else Side.ANTICORE_SUP
    extremum = loose_extremum(game, side)
    candidate = candidate_from_extremum(extremum, P)

    derived = _derived_values(branch, layers)
    atom_values = [P.class_key(1 << i) for i in range(P.n)]
    atom_values = [derived[key] for key in atom_values]
    scale = sum(atom_values, Fraction(0))

    readoff = threshold_readoff(capacity, space)
    dyadic = None
    bracket = readoff
    if space.is_uniform:
        dyadic = _dyadic_bracket(branch, P, atom_values, depth)
        try:
            bracket = dyadic.intersect(readoff)
        except BranchContradiction as exc:
            raise BranchContradiction(
                f'Intervalo diádico {dyadic.to_dict()} e leitura de limiar '
                f'{readoff.to_dict()} são disjuntos'
            ) from exc
        diagnostics.append(
            f'quantização diádica: γ ∈ ({dyadic.lo}, {dyadic.hi}]'
        )
    else:
        diagnostics.append(
            'espaço não uniforme: intervalo dado só pela leitura de limiar'
        )

    report = ElicitationReport(
        branch=branch,
        candidate=candidate,
        status='bracket',
        bracket=bracket,
        dyadic_bracket=dyadic,
        readoff_bracket=readoff,
        scale=scale,
        depth=depth,
        t_max=t_max,
        handoff_t=handoff_t,
        layers=layers,
        diagnostics=diagnostics,
    )
    if candidate.status == CandidateStatus.ZERO_EXTREMUM:
        report.status = 'insufficient_depth'
        diagnostics.append('extremo nulo: aumente a profundidade T')
        return report

    if branch != Branch.SMALL or scale <= 1:
        return report
    exact_candidate = candidate.candidate is not None and (
        candidate.candidate.exact
        and tuple(candidate.candidate.values) == tuple(P.values)
    )
    gamma = 1 / scale
    if not (exact_candidate and gamma == readoff.hi):
        return report
    if not level_on_grid:
        diagnostics.append(
            f'γ̂ = {gamma} se o nível estiver na grade de P (level_on_grid)'
        )
        return report
    report.gamma_exact = gamma
    report.bracket = bracket.intersect(GammaBracket.point(gamma))
    report.status = 'exact'
    return report


# ============== CONVERGÊNCIA ==============


def family_limit(family: str, statistic: str = 'total', **params):
    """Limite analítico de n·h(1/n) (ou de h(1/n)) quando n → ∞"""
    if statistic == 'atom':
        return None if family == 'floor' else 0.0
    h = family_distortion(family, **params)
    if family == 'entropic':
        return _entropic_scale(h.parameters['alpha'])
    if family == 'es':
        return float(1 / (1 - h.parameters['beta']))
    if family in ('var', 'rvar'):
        return 0.0
    if family == 'identity':
        return 1.0
    if family == 'power':
        exponent = h.parameters['p']
        if exponent > 1:
            return 0.0
        return 1.0 if exponent == 1 else None
    return None


def convergence_study(
    family: str,
    n_sequence: Sequence[int],
    statistic: str = 'total',
    **params,
) -> ConvergenceSeries:
    """
    Para cada n constrói h∘P em uniform(n) e registra o total dos
    singletons (n·v({ω}) por invariância) ou o valor por átomo
    """
    if statistic not in STATISTICS:
        raise DomainError(f'Estatística desconhecida: {statistic!r}')
    ns = [int(n) for n in n_sequence]
    if not ns or ns[0] < 1 or any(a >= b for a, b in zip(ns, ns[1:])):
        raise DomainError(
            'n_sequence deve ser estritamente crescente com n ≥ 1'
        )
    h = family_distortion(family, **params)
    limit = family_limit(family, statistic, **params)
    series = ConvergenceSeries(family, statistic, limit)
    for n in ns:
        P = uniform(n, enforce_cap=False).probability
        atom = build_distortion(h, P, family).value(1)
        value = n * atom if statistic == 'total' else atom
        series.rows.append(
            {
                'n': n,
                'statistic': value,
                'limit': limit,
                'abs_error': abs(value - limit) if limit is not None else None,
            }
        )

    tail = series.rows[-max(3, len(series.rows) // 2) :]
    xs = np.array([row['n'] for row in tail], dtype=float)
    ys = np.array([row['statistic'] for row in tail])
    series.diverging = is_diverging(xs, ys)
    if series.diverging:
        logger.warning(
            '%s: estatística cresce linearmente em n, sem limite', family
        )
    return series
