from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from interfaces.oracle_interfaces import IFunctionalOracle
from models.space import FiniteSpace
from utils.exceptions import SpaceMismatch


@dataclass(frozen=True, eq=False)
class SimpleRandomVariable:
    """Variável aleatória simples: um valor real por átomo"""

    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size != self.space.n:
            raise SpaceMismatch(
                f'Variável com {values.size} valores num espaço com '
                f'{self.space.n} átomos'
            )
        if not np.all(np.isfinite(values)):
            raise ValueError('Variável com valores não finitos')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def indicator(
        cls, space: FiniteSpace, mask: int
    ) -> 'SimpleRandomVariable':
        values = [(mask >> i) & 1 for i in range(space.n)]
        return cls(space, np.array(values, dtype=float))

    @classmethod
    def constant(cls, space: FiniteSpace, c: float) -> 'SimpleRandomVariable':
        return cls(space, np.full(space.n, float(c)))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __add__(self, other: 'SimpleRandomVariable') -> 'SimpleRandomVariable':
        return SimpleRandomVariable(self.space, self.values + other.values)

    def __mul__(self, t: float) -> 'SimpleRandomVariable':
        return SimpleRandomVariable(self.space, float(t) * self.values)

    __rmul__ = __mul__

    def shift(self, c: float) -> 'SimpleRandomVariable':
        return SimpleRandomVariable(self.space, self.values + float(c))

    def key(self) -> tuple:
        return tuple(float(v) for v in self.values)

    def to_list(self) -> List[float]:
        return [float(v) for v in self.values]


class FunctionalOracle(IFunctionalOracle):
    """Funcional caixa-preta φ com etiqueta de metadados"""

    def __init__(
        self,
        evaluator: Callable[[SimpleRandomVariable], float],
        tag: str = 'custom',
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self._evaluator = evaluator
        self.tag = tag
        self.metadata = metadata or {}

    def evaluate(self, variable: SimpleRandomVariable) -> float:
        return float(self._evaluator(variable))

    def describe(self) -> Dict[str, Any]:
        return {'tag': self.tag, **self.metadata}


@dataclass
class Dictionary:
    """Conjunto de teste 𝒟 onde o funcional é conhecido"""

    space: FiniteSpace
    variables: List[SimpleRandomVariable] = field(default_factory=list)
    strategy: str = 'custom'

    def __len__(self) -> int:
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def contains(
        self, variable: SimpleRandomVariable, tol: float = 0.0
    ) -> bool:
        return any(
            np.allclose(x.values, variable.values, rtol=0, atol=tol)
            for x in self.variables
        )

    def matrix(self) -> np.ndarray:
        """Linhas = variáveis do dicionário"""
        return np.vstack([x.values for x in self.variables])
