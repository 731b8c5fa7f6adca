from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from interfaces.oracle_interfaces import LPStatus


class Sense(str, Enum):
    MAXIMIZE = 'maximize'
    MINIMIZE = 'minimize'


class Relation(str, Enum):
    LE = '<='
    EQ = '='
    GE = '>='


@dataclass
class Constraint:
    row: np.ndarray
    relation: Relation
    bound: float


@dataclass
class LPProblem:
    """Programa linear denso com variáveis livres"""

    objective: np.ndarray
    sense: Sense = Sense.MAXIMIZE
    constraints: List[Constraint] = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(np.asarray(self.objective).size)

    def add(self, row, relation: Relation, bound: float) -> 'LPProblem':
        self.constraints.append(
            Constraint(np.asarray(row, dtype=float), Relation(relation), bound)
        )
        return self


@dataclass
class LPResult:
    """
    Resultado: optimal(x*, valor) | unbounded(direção) |
    infeasible(linhas do certificado)
    """

    status: LPStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    direction: Optional[np.ndarray] = None
    certificate: List[int] = field(default_factory=list)
    binding: List[int] = field(default_factory=list)
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL
