"""
Interfaces para funções de conjunto, oráculos e resolvedores
Seguindo princípio da Inversão de Dependência (SOLID)
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict


class LPStatus(Enum):
    """Status de um programa linear"""

    OPTIMAL = 'optimal'
    UNBOUNDED = 'unbounded'
    INFEASIBLE = 'infeasible'


class ExtremumStatus(Enum):
    """Status do extremo de um conjunto suporte"""

    EXISTS = 'exists'
    UNBOUNDED = 'unbounded'
    EMPTY = 'empty'


class ISetFunction(ABC):
    """Interface para funções de conjunto (jogos e cargas)"""

    @abstractmethod
    def value(self, mask: int) -> float:
        """Valor no evento codificado por mask"""
        pass

    def __call__(self, event) -> float:
        return self.value(getattr(event, 'mask', event))


class IFunctionalOracle(ABC):
    """Interface para funcionais caixa-preta φ sobre variáveis simples"""

    @abstractmethod
    def evaluate(self, variable) -> float:
        """Avalia φ(X)"""
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Metadados do oráculo"""
        pass

    def __call__(self, variable) -> float:
        return self.evaluate(variable)


class ILinearSolver(ABC):
    """Interface para resolvedores de programas lineares"""

    @abstractmethod
    def solve(self, problem):
        """Resolve o problema e retorna um LPResult"""
        pass
