import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

from interfaces.oracle_interfaces import ISetFunction
from models.space import FiniteSpace, ProbabilityCharge
from utils.bitmask import ensure_enumerable
from utils.config import get_settings
from utils.exceptions import DomainError

Number = Union[Fraction, float]


@dataclass(frozen=True)
class DistortionFunction:
    """
    Distorção h: [0,1] -> R com descritor da família
    tag: entropic | es | var | rvar | power | custom
    """

    tag: str
    evaluator: Callable[[Number], float] = field(compare=False)
    params: Tuple[Tuple[str, Any], ...] = ()

    def __call__(self, p: Number) -> float:
        return float(self.evaluator(p))

    @property
    def parameters(self) -> Dict[str, Any]:
        return dict(self.params)

    def to_dict(self) -> dict:
        return {
            'tag': self.tag,
            'params': {k: str(v) for k, v in self.params},
        }


class Game(ISetFunction):
    """
    Jogo cooperativo v: eventos -> R com v(∅) = 0
    Tabela completa para n pequeno; função com memo (protegida por lock)
    acima do limite de materialização.
    """

    def __init__(
        self,
        space: FiniteSpace,
        table: Optional[np.ndarray] = None,
        func: Optional[Callable[[int], float]] = None,
        probability: Optional[ProbabilityCharge] = None,
        distortion: Optional[DistortionFunction] = None,
        label: str = 'custom',
    ):
        if table is None and func is None:
            raise DomainError('Jogo precisa de tabela ou função')
        self.space = space
        self.probability = probability
        self.distortion = distortion
        self.label = label
        self._func = func
        self._memo: Dict[int, float] = {}
        self._lock = threading.RLock()
        self._table = None

        if table is not None:
            self._set_table(np.asarray(table, dtype=float))
        elif space.n <= get_settings().materialize_atoms:
            self.materialize()
        if abs(self.value(0)) > get_settings().value_tol:
            raise DomainError(f'v(∅) = {self.value(0)} deve ser 0')

    def _set_table(self, table: np.ndarray) -> None:
        if table.shape != (1 << self.space.n,):
            raise DomainError(
                f'Tabela com {table.size} entradas; esperado 2^{self.space.n}'
            )
        if not np.all(np.isfinite(table)):
            raise DomainError('Tabela com valores não finitos')
        table = table.copy()
        table.setflags(write=False)
        self._table = table

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def is_materialized(self) -> bool:
        return self._table is not None

    def materialize(self) -> np.ndarray:
        """Calcula e congela a tabela completa (2^n valores)"""
        if self._table is None:
            ensure_enumerable(self.n, what=f'materializar {self.label}')
            values = np.array(
                [self._func(mask) for mask in range(1 << self.n)], dtype=float
            )
            self._set_table(values)
        return self._table

    @property
    def table(self) -> np.ndarray:
        return self.materialize()

    def value(self, mask: int) -> float:
        if self._table is not None:
            return float(self._table[mask])
        with self._lock:
            if mask not in self._memo:
                self._memo[mask] = float(self._func(mask))
            return self._memo[mask]

    @property
    def total(self) -> float:
        return self.value((1 << self.n) - 1)

    def singleton_profile(self) -> np.ndarray:
        """Vetor (v({ω}))_ω"""
        return np.array([self.value(1 << i) for i in range(self.n)])

    def describe(self) -> dict:
        return {
            'label': self.label,
            'atom_count': self.n,
            'materialized': self.is_materialized,
            'distortion': self.distortion.to_dict()
            if self.distortion
            else None,
        }


@dataclass
class PropertyReport:
    """
    Propriedades estruturais de um jogo, com eventos testemunha
    Continuidade em ∅ é trivial em espaços finitos (sempre True).
    """

    monotone: bool = True
    superadditive: bool = True
    subadditive: bool = True
    submodular: bool = True
    invariant_wrt_P: Optional[bool] = None
    continuous_at_empty: bool = True
    witnesses: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'monotone': self.monotone,
            'superadditive': self.superadditive,
            'subadditive': self.subadditive,
            'submodular': self.submodular,
            'invariant_wrt_P': self.invariant_wrt_P,
            'continuous_at_empty': self.continuous_at_empty,
            'witnesses': {k: list(v) for k, v in self.witnesses.items()},
        }
