"""
Catálogo de cenários de demonstração em escala de mesa
Cada demo tem uma configuração, um complemento opcional e a projeção
comparada com o arquivo golden.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from models.support import Side
from models.variable import FunctionalOracle
from services.choquet_service import riskmetric_oracle
from services.space_service import uniform, weighted
from services.support_service import build_dictionary, dictionary_extremum
from utils.exceptions import UnknownDemo
from utils.serialization import to_jsonable

logger = logging.getLogger(__name__)

GOLDEN_DIGITS = 6

Projection = Callable[[Dict[str, Any]], Dict[str, Any]]


@dataclass(frozen=True)
class DemoScenario:
    name: str
    description: str
    project: Projection
    config: Optional[Dict[str, Any]] = None
    runner: Optional[Callable[[], Dict[str, Any]]] = None


def round_floats(value: Any, digits: int = GOLDEN_DIGITS) -> Any:
    """Arredonda recursivamente os reais de uma projeção"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return round(value, digits) + 0.0
    if isinstance(value, dict):
        return {k: round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, list):
        return [round_floats(v, digits) for v in value]
    return value


def _atoms(report: Dict[str, Any], section: str, key: str) -> List[float]:
    return report[section][key]['per_atom_values']


# ============== ex1: funcional coordenada ==============


def _project_ex1(report: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'lower_sup': _atoms(report, 'extrema', 'lower_sup'),
        'upper_inf': _atoms(report, 'extrema', 'upper_inf'),
        'candidate_status': report['candidate']['status'],
        'verdict': report['verdict'],
    }


# ============== ex2: domínio Q-invariante ==============

EX2_P = ['1/4', '1/4', '1/4', '1/4']
EX2_Q = ['1/10', '1/5', '3/10', '2/5']


def _run_ex2() -> Dict[str, Any]:
    """
    φ(X) = max{E_P[X], 0} em 𝒟 = {X : E_Q[X] ≤ 0} ∪ constantes
    O sup de ℒ é comparado com P∨Q sem afirmar igualdade.
    """
    P = uniform(4).probability
    Q = weighted(EX2_Q).probability
    p, q = P.real_values(), Q.real_values()
    phi = FunctionalOracle(
        lambda X: max(float(np.dot(p, X.values)), 0.0), tag='ex2'
    )
    dictionary = build_dictionary(
        P.space,
        'random_simple',
        k=48,
        accept=lambda X: float(np.dot(q, X.values)) <= 0.0,
    )
    report = dictionary_extremum(phi, dictionary, Side.LOWER_SUP)
    return to_jsonable(
        {
            'P': EX2_P,
            'Q': EX2_Q,
            'join': np.maximum(p, q),
            'dictionary_size': len(dictionary),
            'lower_sup': report.to_dict(),
            'note': 'sup ℒ = P∨Q exige espaço sem átomos; comparação apenas',
        }
    )


def _project_ex2(report: Dict[str, Any]) -> Dict[str, Any]:
    demo = report['demo']
    return {'P': demo['P'], 'Q': demo['Q'], 'join': demo['join']}


# ============== entropic ==============


def _run_entropic() -> Dict[str, Any]:
    """Sup do suporte inferior com indicadores com sinal, ao lado de P"""
    P = uniform(4).probability
    phi = riskmetric_oracle('entropic', P, alpha=1.0)
    dictionary = build_dictionary(P.space, 'signed_indicators')
    report = dictionary_extremum(phi, dictionary, Side.LOWER_SUP)
    return to_jsonable(
        {
            'P': P.real_values(),
            'lower_sup': report.to_dict(),
            'limit_total': math.e - 1,
        }
    )


def _project_entropic(report: Dict[str, Any]) -> Dict[str, Any]:
    profile = _atoms(report, 'extrema', 'loose_anticore_sup')
    return {
        'loose_anticore_sup': profile,
        'loose_core_inf': _atoms(report, 'extrema', 'loose_core_inf'),
        'total': sum(profile),
        'limit_total': report['demo']['limit_total'],
    }


# ============== es ==============


def _project_es(report: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'loose_anticore_sup': _atoms(report, 'extrema', 'loose_anticore_sup'),
        'loose_core_inf': _atoms(report, 'extrema', 'loose_core_inf'),
        'anticore_sup': _atoms(report, 'extrema', 'anticore_sup'),
        'core_inf_status': report['extrema']['core_inf']['status'],
        'candidate': report['candidate']['candidate'],
        'beta': report['parameters']['beta'],
        'verdict': report['verdict'],
    }


# ============== VaR ==============


def _project_var(report: Dict[str, Any]) -> Dict[str, Any]:
    elicitation = report['elicitation']
    return {
        'branch': elicitation['branch'],
        'status': elicitation['status'],
        'gamma_exact': elicitation['gamma_exact'],
        'bracket': elicitation['bracket'],
        'dyadic_bracket': elicitation['dyadic_bracket'],
        'readoff_bracket': elicitation['readoff_bracket'],
        'scale': elicitation['scale'],
        'candidate': elicitation['candidate']['candidate'],
    }


DEMOS: Dict[str, DemoScenario] = {
    'ex1': DemoScenario(
        'ex1',
        'φ(X) = X(1) em weighted(2/3, 1/3): extremo não proporcional a P',
        _project_ex1,
        config={
            'task': 'analyze',
            'space': {'type': 'weighted', 'weights': ['2/3', '1/3']},
            'target': {
                'kind': 'functional',
                'family': 'coordinate',
                'params': {'index': 1},
            },
            'options': {'strategy': 'signed_indicators'},
        },
    ),
    'ex2': DemoScenario(
        'ex2',
        'φ = max{E_P, 0} num domínio Q-invariante amostrado',
        _project_ex2,
        runner=_run_ex2,
    ),
    'entropic': DemoScenario(
        'entropic',
        'Jogo entropic(1) em uniform(4) e seu suporte funcional',
        _project_entropic,
        config={
            'task': 'analyze',
            'space': {'type': 'uniform', 'n': 4},
            'target': {'family': 'entropic', 'params': {'alpha': 1.0}},
        },
        runner=_run_entropic,
    ),
    'es': DemoScenario(
        'es',
        'ES(3/4) em uniform(8): extremos iguais a P/(1−β)',
        _project_es,
        config={
            'task': 'analyze',
            'space': {'type': 'uniform', 'n': 8},
            'target': {'family': 'es', 'params': {'beta': '3/4'}},
        },
    ),
    'var_small': DemoScenario(
        'var_small',
        'VaR(1/2) em uniform(8), T = 3: recuperação exata',
        _project_var,
        config={
            'task': 'elicit_var',
            'space': {'type': 'uniform', 'n': 8},
            'target': {'family': 'var', 'params': {'gamma': '1/2'}},
            'options': {'depth': 3, 'level_on_grid': True},
        },
    ),
    'var_large': DemoScenario(
        'var_large',
        'VaR(3/4) em uniform(16), T = 4: intervalo para γ',
        _project_var,
        config={
            'task': 'elicit_var',
            'space': {'type': 'uniform', 'n': 16},
            'target': {'family': 'var', 'params': {'gamma': '3/4'}},
            'options': {'depth': 4},
        },
    ),
}


def get_demo(name: str) -> DemoScenario:
    try:
        return DEMOS[name]
    except KeyError as exc:
        raise UnknownDemo(
            f'Demo desconhecido: {name!r} (disponíveis: {sorted(DEMOS)})'
        ) from exc
