"""
Modelos Pydantic para configuração de execução e relatórios
O esquema publicado é RunReport.model_json_schema()
"""

from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

Scalar = Union[str, float, int]


class TaskType(str, Enum):
    ANALYZE = 'analyze'
    ELICIT_VAR = 'elicit_var'
    CONVERGE = 'converge'
    DEMO = 'demo'


class Verdict(str, Enum):
    """Caminhos de conclusão a partir do extremo μ⋆"""

    NO_CONCLUSION = 'no_conclusion'
    NOT_LAW_INVARIANT = 'not_law_invariant'
    CANDIDATE = 'candidate'
    NOT_INVARIANT_WRT_CANDIDATE = 'not_invariant_wrt_candidate'
    NO_EXTREMUM = 'no_extremum'
    SIGNED = 'signed'


# ================================
# MODELOS DE CONFIGURAÇÃO
# ================================


class SpaceConfig(BaseModel):
    """Bloco do espaço finito"""

    type: Literal['uniform', 'weighted'] = Field(
        ..., description='uniform(n) ou weighted(pesos)'
    )
    n: Optional[int] = Field(None, ge=1, description='Número de átomos')
    weights: Optional[List[Scalar]] = Field(
        None, description='Pesos racionais ("p/q") ou decimais'
    )

    @model_validator(mode='after')
    def check_shape(self):
        if self.type == 'uniform' and self.n is None:
            raise ValueError('uniform exige n')
        if self.type == 'weighted' and not self.weights:
            raise ValueError('weighted exige a lista weights')
        return self


class FunctionalEntry(BaseModel):
    """Linha de um funcional tabelado: valores de X e φ(X)"""

    variable: List[float]
    value: float


class TargetConfig(BaseModel):
    """Alvo da análise: jogo (família ou tabela) ou funcional"""

    kind: Literal['game', 'functional'] = Field(
        'game', description='Jogo de conjuntos ou funcional em variáveis'
    )
    family: str = Field(
        ...,
        description=(
            'Jogo: entropic, es, var, rvar, power, floor, identity, '
            'custom_table. Funcional: var, es, entropic, expectation, '
            'coordinate, table'
        ),
    )
    params: Dict[str, Scalar] = Field(
        default_factory=dict, description='Parâmetros da família'
    )
    values: Optional[List[float]] = Field(
        None, description='Tabela 2^n do jogo custom_table'
    )
    table: Optional[List[FunctionalEntry]] = Field(
        None, description='Entradas do funcional tabelado'
    )

    @model_validator(mode='before')
    @classmethod
    def collect_params(cls, data):
        # aceita {"family": "es", "beta": 0.75} sem o bloco params
        if isinstance(data, dict):
            known = set(cls.model_fields)
            extra = {k: v for k, v in data.items() if k not in known}
            if extra:
                data = {k: v for k, v in data.items() if k in known}
                data['params'] = {**extra, **data.get('params', {})}
        return data

    @model_validator(mode='after')
    def check_payload(self):
        if self.family == 'custom_table' and self.values is None:
            raise ValueError('custom_table exige values')
        if self.kind == 'functional' and self.family == 'table':
            if not self.table:
                raise ValueError('Funcional tabelado exige table')
        return self


class OptionsConfig(BaseModel):
    strategy: str = Field('indicators', description='Estratégia de 𝒟')
    k: int = Field(32, ge=1, description='Variáveis em random_simple')
    seed: Optional[int] = Field(None, description='Semente (padrão global)')
    depth: int = Field(8, ge=0, description='Profundidade T da recursão')
    level_on_grid: bool = Field(
        False, description='Supõe γ = 1 − P(A) para algum evento A'
    )
    n_sequence: Optional[List[int]] = Field(
        None, description='Sequência de refinamento do converge'
    )
    statistic: Literal['total', 'atom'] = 'total'
    cross_check: bool = Field(
        False, description='Recalcula extremos soltos por LP'
    )

    @field_validator('n_sequence')
    @classmethod
    def ascending(cls, v):
        if v is not None:
            if not v or any(a >= b for a, b in zip(v, v[1:])) or v[0] < 1:
                raise ValueError('n_sequence deve ser crescente com n >= 1')
        return v


class RunConfig(BaseModel):
    """Configuração de uma execução: exatamente uma tarefa"""

    task: TaskType
    space: Optional[SpaceConfig] = None
    target: Optional[TargetConfig] = None
    options: OptionsConfig = Field(default_factory=OptionsConfig)
    demo: Optional[str] = Field(None, description='Nome do demo')

    @model_validator(mode='before')
    @classmethod
    def game_alias(cls, data):
        if isinstance(data, dict) and 'game' in data:
            data = dict(data)
            game = data.pop('game')
            data.setdefault('target', {'kind': 'game', **game})
        return data

    @model_validator(mode='after')
    def check_task(self):
        if self.task in (TaskType.ANALYZE, TaskType.ELICIT_VAR):
            if self.space is None or self.target is None:
                raise ValueError(f'{self.task.value} exige space e target')
        if self.task == TaskType.ELICIT_VAR and self.target.kind != 'game':
            raise ValueError('elicit_var exige uma capacidade (kind=game)')
        if self.task == TaskType.CONVERGE:
            if self.target is None or self.options.n_sequence is None:
                raise ValueError('converge exige target e n_sequence')
        if self.task == TaskType.DEMO and not self.demo:
            raise ValueError('demo exige o nome do demo')
        return self


# ================================
# MODELOS DE RELATÓRIO
# ================================


class GoldenComparison(BaseModel):
    name: str
    path: str
    matches: bool
    updated: bool = False
    mismatches: List[str] = Field(default_factory=list)


class RunReport(BaseModel):
    """Relatório estruturado de uma execução"""

    schema_version: str = Field(..., description='Versão do esquema')
    task: TaskType
    status: Literal['ok', 'not_ok'] = Field(
        'ok', description='not_ok: status numérico reportado (exit 3)'
    )
    config: Dict[str, Any] = Field(
        default_factory=dict, description='Eco da configuração'
    )
    space: Optional[Dict[str, Any]] = None
    properties: Optional[Dict[str, Any]] = None
    extrema: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    sandwich: Optional[Dict[str, Any]] = None
    candidate: Optional[Dict[str, Any]] = None
    parameters: Dict[str, Any] = Field(
        default_factory=dict, description='Parâmetros recuperados'
    )
    invariance: Optional[Dict[str, Any]] = None
    comonotonic_additivity: Optional[Dict[str, Any]] = None
    verdict: Optional[Verdict] = None
    elicitation: Optional[Dict[str, Any]] = None
    convergence: Optional[Dict[str, Any]] = None
    demo: Optional[Dict[str, Any]] = None
    golden: Optional[GoldenComparison] = None
    notes: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(
        default_factory=dict, description='Segundos por etapa'
    )
