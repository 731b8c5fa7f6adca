"""
Serviço de conjuntos suporte: extremos de núcleos, antinúcleos, suas
variantes soltas e conjuntos suporte de funcionais sobre um dicionário
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from interfaces.oracle_interfaces import (
    ExtremumStatus,
    IFunctionalOracle,
    LPStatus,
)
from models.charge import SignedCharge
from models.game import DistortionFunction, Game
from models.lp import LPProblem, LPResult, Relation, Sense
from models.space import FiniteSpace, ProbabilityCharge
from models.support import (
    ChargeWitness,
    ExistenceDiagnostic,
    ExistenceRow,
    ExtremumReport,
    Normalization,
    SandwichConstants,
    Side,
    SupportSpec,
)
from models.variable import Dictionary, SimpleRandomVariable
from services import simplex_solver
from services.game_service import build_distortion
from services.lattice_service import charge_table
from services.space_service import conditional, uniform
from utils.bitmask import (
    complement,
    ensure_enumerable,
    full_mask,
    membership_matrix,
)
from utils.config import get_settings
from utils.exceptions import (
    DomainError,
    EmptyDictionary,
    ParameterOutOfRange,
    SpaceMismatch,
    SupportError,
    TooManyAtoms,
)

logger = logging.getLogger(__name__)

STRATEGIES = (
    'indicators',
    'signed_indicators',
    'indicators_plus_constants',
    'random_simple',
)


# ============== LP POR ÁTOMO ==============


def _per_atom(
    n: int, build: Callable[[int], LPProblem]
) -> List[LPResult]:
    """LPs independentes por átomo num pool de threads; barreira no fim"""
    workers = max(1, get_settings().lp_workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(
            executor.map(lambda i: simplex_solver.solve(build(i)), range(n))
        )


def _assemble(
    space: FiniteSpace,
    side: Side,
    method: str,
    results: List[LPResult],
    row_labels: List[int],
) -> ExtremumReport:
    """Junta os ótimos por átomo num relatório com status"""
    report = ExtremumReport(ExtremumStatus.EXISTS, side, method)
    for atom, result in enumerate(results):
        if result.status == LPStatus.INFEASIBLE:
            report.status = ExtremumStatus.EMPTY
            report.certificates = {
                atom: [row_labels[k] for k in result.certificate]
            }
            report.per_atom_values = []
            return report
        if result.status == LPStatus.UNBOUNDED:
            report.status = ExtremumStatus.UNBOUNDED
            report.unbounded_atoms.append(atom)
            report.per_atom_values.append(None)
            continue
        report.per_atom_values.append(float(result.x[atom]))
        report.certificates[atom] = sorted(
            {row_labels[k] for k in result.binding}
        )
    if report.exists:
        report.extremum = SignedCharge(space, np.array(report.per_atom_values))
    return report


def _game_rows(v: Game) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """Linhas μ(A) para todo A ≠ ∅, com rótulo = máscara do evento"""
    n = v.n
    ensure_enumerable(n, what='restrições do jogo')
    rows = membership_matrix(n)[1:]
    return rows, v.table[1:], list(range(1, 1 << n))


def _game_lp(v: Game, side: Side, strict: bool) -> ExtremumReport:
    rows, bounds, labels = _game_rows(v)
    relation = Relation.LE if side.is_lower else Relation.GE
    sense = Sense.MAXIMIZE if side.is_lower else Sense.MINIMIZE
    n = v.n
    if strict:
        labels = labels + [full_mask(n)]

    def build(atom: int) -> LPProblem:
        objective = np.zeros(n)
        objective[atom] = 1.0
        problem = LPProblem(objective, sense)
        for row, bound in zip(rows, bounds):
            problem.add(row, relation, float(bound))
        if strict:
            problem.add(np.ones(n), Relation.EQ, v.total)
        return problem

    return _assemble(v.space, side, 'lp', _per_atom(n, build), labels)


# ============== EXTREMOS DE JOGOS ==============


def loose_extremum(
    v: Game, side: Side, cross_check: bool = False
) -> ExtremumReport:
    """
    sup ℒ𝒜_v e inf ℒ𝒞_v em espaços finitos: o perfil v({ω})
    Com cross_check=True recalcula cada coordenada por LP.
    """
    side = Side(side)
    if side not in (Side.ANTICORE_SUP, Side.CORE_INF):
        raise SupportError(f'Lado inválido para jogos: {side.value}')
    profile = v.singleton_profile()
    report = ExtremumReport(
        ExtremumStatus.EXISTS,
        side,
        'closed_form',
        extremum=SignedCharge(v.space, profile),
        per_atom_values=[float(x) for x in profile],
        certificates={i: [1 << i] for i in range(v.n)},
    )
    if cross_check:
        ensure_enumerable(
            v.n, get_settings().strict_lp_atoms, 'verificação por LP'
        )
        lp_report = _game_lp(v, side, strict=False)
        tol = get_settings().value_tol
        agree = lp_report.exists and lp_report.extremum.allclose(
            report.extremum, tol
        )
        if not agree:
            raise SupportError(
                f'Forma fechada diverge do LP: {report.per_atom_values} vs '
                f'{lp_report.per_atom_values}'
            )
        report.cross_check = True
    return report


def strict_extremum(v: Game, side: Side) -> ExtremumReport:
    """sup 𝒜_v / inf 𝒞_v: LP por átomo com 2^n restrições e μ(Ω) = v(Ω)"""
    side = Side(side)
    if side not in (Side.ANTICORE_SUP, Side.CORE_INF):
        raise SupportError(f'Lado inválido para jogos: {side.value}')
    limit = get_settings().strict_lp_atoms
    if v.n > limit:
        raise TooManyAtoms(f'Núcleo estrito por LP limitado a n ≤ {limit}')
    report = _game_lp(v, side, strict=True)
    if report.status == ExtremumStatus.EMPTY:
        logger.info('%s de %s é vazio', side.value, v.label)
    return report


def singleton_core_certificate(v: Game) -> bool:
    """Σ_ω v({ω}) > v(Ω) certifica núcleo vazio sem enumerar eventos"""
    tol = get_settings().value_tol
    return float(v.singleton_profile().sum()) > v.total + tol


# ============== DICIONÁRIOS ==============


def build_dictionary(
    space: FiniteSpace,
    strategy: str = 'indicators',
    k: int = 32,
    seed: Optional[int] = None,
    accept: Optional[Callable[[SimpleRandomVariable], bool]] = None,
) -> Dictionary:
    """
    Estratégias: indicators, signed_indicators (±𝟏_A),
    indicators_plus_constants, random_simple(k, seed)
    accept filtra as variáveis amostradas (ex.: E_Q[X] ≤ 0).
    """
    n = space.n
    variables: List[SimpleRandomVariable] = []
    seen = set()

    def push(variable: SimpleRandomVariable) -> None:
        if variable.key() not in seen:
            seen.add(variable.key())
            variables.append(variable)

    if strategy in STRATEGIES[:3]:
        ensure_enumerable(n, get_settings().materialize_atoms, 'dicionário')
        for mask in range(1, 1 << n):
            indicator = SimpleRandomVariable.indicator(space, mask)
            push(indicator)
            if strategy == 'signed_indicators':
                push(indicator * -1.0)
        if strategy == 'indicators_plus_constants':
            push(SimpleRandomVariable.constant(space, 1.0))
            push(SimpleRandomVariable.constant(space, -1.0))
    elif strategy == 'random_simple':
        rng = np.random.default_rng(
            get_settings().seed if seed is None else seed
        )
        push(SimpleRandomVariable.constant(space, 1.0))
        push(SimpleRandomVariable.constant(space, -1.0))
        attempts = 0
        while len(variables) < k + 2 and attempts < 100 * k:
            attempts += 1
            candidate = SimpleRandomVariable(
                space, np.round(rng.uniform(-1.0, 1.0, size=n), 3)
            )
            if accept is None or accept(candidate):
                push(candidate)
    else:
        raise SupportError(
            f'Estratégia de dicionário desconhecida: {strategy}'
        )
    return Dictionary(space, variables, strategy)


def dictionary_extremum(
    phi: IFunctionalOracle,
    dictionary: Dictionary,
    side: Side,
    normalization: Normalization = Normalization.NONE,
    pin: Optional[SimpleRandomVariable] = None,
) -> ExtremumReport:
    """
    Por átomo: otimiza μ(ω) sujeito a ⟨μ, X⟩ ≤ φ(X) ∀X ∈ 𝒟 (lower_sup;
    ≥ em upper_inf) e ao pin ⟨μ, c⟩ = φ(c) quando pedido
    """
    side = Side(side)
    if side not in (Side.LOWER_SUP, Side.UPPER_INF):
        raise SupportError(f'Lado inválido para funcionais: {side.value}')
    if not len(dictionary):
        raise EmptyDictionary('Dicionário vazio')
    space = dictionary.space
    n = space.n
    settings = get_settings()
    if n > settings.max_atoms:
        raise TooManyAtoms(f'n={n} excede o limite {settings.max_atoms}')
    spec = SupportSpec(
        (phi, dictionary),
        'lower' if side.is_lower else 'upper',
        Normalization(normalization),
        pin,
    )

    rows = dictionary.matrix()
    values = np.array([phi(X) for X in dictionary])
    relation = Relation.LE if side.is_lower else Relation.GE
    sense = Sense.MAXIMIZE if side.is_lower else Sense.MINIMIZE
    labels = list(range(len(dictionary)))
    pin_value = None
    if spec.normalization == Normalization.PIN:
        pin_value = phi(pin)
        labels.append(-1)

    def build(atom: int) -> LPProblem:
        objective = np.zeros(n)
        objective[atom] = 1.0
        problem = LPProblem(objective, sense)
        for row, bound in zip(rows, values):
            problem.add(row, relation, float(bound))
        if pin_value is not None:
            problem.add(pin.values, Relation.EQ, pin_value)
        return problem

    report = _assemble(space, side, 'lp', _per_atom(n, build), labels)
    if report.status == ExtremumStatus.UNBOUNDED:
        report.notes.append(
            f'Coordenadas ilimitadas nos átomos {report.unbounded_atoms}: '
            'o extremo não existe'
        )
    return report


# ============== CONSTANTES SANDUÍCHE ==============


def sandwich_constants(v: Game, P: ProbabilityCharge) -> SandwichConstants:
    """
    a⋆ = min v(A)/P(A) sobre P(A) > 0, se v ≥ 0 nos eventos P-nulos
    b⋆ = max v(A)/P(A) sobre P(A) > 0, se v ≤ 0 nos eventos P-nulos
    """
    if v.space != P.space:
        raise SpaceMismatch('Jogo e probabilidade em espaços diferentes')
    ensure_enumerable(v.n, what='constantes sanduíche')
    tol = get_settings().value_tol
    table = v.table
    probs = P.mask_probabilities()
    positive = probs > 0
    ratios = table[positive] / probs[positive]
    null_values = table[~positive]
    constants = SandwichConstants()
    if np.all(null_values >= -tol):
        constants.a_star = float(ratios.min())
    if np.all(null_values <= tol):
        constants.b_star = float(ratios.max())
    return constants


# ============== PERTINÊNCIA ==============


def membership(mu: SignedCharge, spec: SupportSpec) -> bool:
    """Verifica todas as (des)igualdades do conjunto com tolerância 1e-9"""
    tol = get_settings().value_tol
    lower = spec.side == 'lower'
    if spec.is_game:
        v = spec.target
        if v.space != mu.space:
            raise SpaceMismatch('Carga e jogo em espaços diferentes')
        diff = charge_table(mu) - v.table
        ok = np.all(diff <= tol) if lower else np.all(diff >= -tol)
        if spec.normalization == Normalization.TOTAL:
            ok = ok and abs(mu.total - v.total) <= tol
        return bool(ok)

    phi, dictionary = spec.target
    if dictionary.space != mu.space:
        raise SpaceMismatch('Carga e dicionário em espaços diferentes')
    diff = dictionary.matrix() @ mu.values - np.array(
        [phi(X) for X in dictionary]
    )
    ok = np.all(diff <= tol) if lower else np.all(diff >= -tol)
    if spec.normalization == Normalization.PIN:
        pinned = float(mu.values @ spec.pin.values)
        ok = ok and abs(pinned - phi(spec.pin)) <= tol
    return bool(ok)


# ============== TESTEMUNHAS EXPLÍCITAS ==============


def _interior_event(P: ProbabilityCharge, mask: int) -> Fraction:
    p = P.probability(mask)
    if not 0 < p < 1:
        raise DomainError(f'P(D) = {p} deve estar em (0,1)')
    return p


def anticore_witness(v: Game, mask: int) -> ChargeWitness:
    """
    μ_D = h(P(D))·P^D + (h(1) − h(P(D)))·P^{D^c} para v = h∘P concava
    Para ES com P(D) < 1−β coincide com P(D)/(1−β)·P^D + ...
    """
    if v.distortion is None or v.probability is None:
        raise DomainError('Testemunha de antinúcleo exige v = h∘P')
    P, h = v.probability, v.distortion
    p = _interior_event(P, mask)
    inside = conditional(P, mask).real_values()
    outside = conditional(P, complement(mask, v.n)).real_values()
    top, at_d = h(Fraction(1)), h(p)
    mu = SignedCharge(v.space, at_d * inside + (top - at_d) * outside)
    spec = SupportSpec(v, 'lower', Normalization.TOTAL)
    return ChargeWitness(
        mu, membership(mu, spec), 'anticore', {'mask': mask, 'P(D)': p}
    )


def var_core_witness(v: Game, mask: int, s: float) -> ChargeWitness:
    """
    μ_{D,s} = s·P^D + x_s·P^{D^c} ∈ ℒ𝒞_v para a capacidade VaR_γ
    x_s = max{(1−s)(1−δ)/(1−γ−δ), (1−δ)s/δ + 1}, δ = P(D) < 1−γ
    """
    if v.distortion is None or v.distortion.tag != 'var':
        raise DomainError('Testemunha de núcleo solto exige capacidade VaR')
    gamma = v.distortion.parameters['gamma']
    P = v.probability
    delta = _interior_event(P, mask)
    if not delta < 1 - gamma:
        raise ParameterOutOfRange(f'δ = {delta} deve ser < 1 − γ')
    if not 0 < s < 0.5:
        raise ParameterOutOfRange(f's = {s} deve estar em (0, 1/2)')
    d, g = float(delta), float(gamma)
    x_s = max((1 - s) * (1 - d) / (1 - g - d), (1 - d) * s / d + 1)
    inside = conditional(P, mask).real_values()
    outside = conditional(P, complement(mask, v.n)).real_values()
    mu = SignedCharge(v.space, s * inside + x_s * outside)
    spec = SupportSpec(v, 'upper', Normalization.NONE)
    return ChargeWitness(
        mu,
        membership(mu, spec),
        'loose_core',
        {'mask': mask, 'P(D)': delta, 's': s, 'x_s': x_s},
    )


# ============== EXISTÊNCIA ==============


def _linear_fit(xs: np.ndarray, ys: np.ndarray) -> Tuple[float, float]:
    if len(xs) < 2:
        return 0.0, 1.0
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = ys - (slope * xs + intercept)
    spread = float(((ys - ys.mean()) ** 2).sum())
    if spread == 0:
        return float(slope), 1.0
    r_squared = 1.0 - float((residual**2).sum()) / spread
    return float(slope), r_squared


def diagnose_existence(
    h: DistortionFunction, refinement: Iterable[int]
) -> ExistenceDiagnostic:
    """
    Para cada n: Σ_ω v({ω}) = n·h(1/n) no espaço uniforme, status do núcleo
    (LP até strict_lp_atoms, certificado dos singletons acima) e a condição
    dual sup_{0≤x<1} h(x) < h(1) na grade k/n
    """
    ns = list(refinement)
    if ns != sorted(ns) or not ns or ns[0] < 1:
        raise DomainError('Refinamento deve ser crescente com n >= 1')
    if abs(h(Fraction(0))) > get_settings().value_tol:
        raise DomainError('h(0) deve ser 0')
    settings = get_settings()
    diagnostic = ExistenceDiagnostic(distortion=h.tag)
    for n in ns:
        P = uniform(n, enforce_cap=False).probability
        v = build_distortion(h, P)
        top = h(Fraction(1))
        grid_sup = max(h(Fraction(k, n)) for k in range(n))
        row = ExistenceRow(
            n=n,
            singleton_total=float(v.singleton_profile().sum()),
            total=top,
            core_status='unknown',
            core_method='singleton_bound',
            anticore_condition=grid_sup < top - settings.value_tol,
        )
        if n <= settings.strict_lp_atoms:
            row.core_status = strict_extremum(v, Side.CORE_INF).status.value
            row.anticore_status = strict_extremum(
                v, Side.ANTICORE_SUP
            ).status.value
            row.core_method = 'lp'
        elif singleton_core_certificate(v):
            row.core_status = ExtremumStatus.EMPTY.value
        diagnostic.rows.append(row)

    xs = np.array([r.n for r in diagnostic.rows], dtype=float)
    ys = np.array([r.singleton_total for r in diagnostic.rows])
    diagnostic.slope, diagnostic.r_squared = _linear_fit(xs, ys)
    diagnostic.diverging = is_diverging(xs, ys)
    if diagnostic.diverging:
        logger.warning(
            'Totais dos singletons divergem (inclinação %.4g): sup ℒ𝒜 '
            'não existe no limite',
            diagnostic.slope,
        )
    return diagnostic


def is_diverging(xs: np.ndarray, ys: np.ndarray) -> bool:
    """Crescimento linear (R² > 0.999) de mais de uma unidade na série"""
    slope, r_squared = _linear_fit(np.asarray(xs), np.asarray(ys))
    growth = slope * (float(xs[-1]) - float(xs[0])) if len(xs) else 0.0
    return bool(slope > 0 and r_squared > 0.999 and growth > 1.0)
