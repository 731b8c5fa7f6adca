from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import pandas as pd

from models.space import ProbabilityCharge
from utils.exceptions import BranchContradiction


class CandidateStatus(str, Enum):
    OK = 'ok'
    ZERO_EXTREMUM = 'zero_extremum'
    NOT_PROPORTIONAL = 'not_proportional'
    SIGNED = 'signed'


class Branch(str, Enum):
    SMALL = 'small'
    LARGE = 'large'


@dataclass
class CandidateReport:
    """
    Candidato P̂ = extremo / c; residual mede o desvio de c·P quando uma
    probabilidade de referência é declarada
    """

    status: CandidateStatus
    candidate: Optional[ProbabilityCharge] = None
    scale: Optional[float] = None
    residual: Optional[float] = None
    proportional_to_reference: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return self.status == CandidateStatus.OK

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': self.status.value,
            'candidate': self.candidate.to_dict()['values']
            if self.candidate
            else None,
            'scale': self.scale,
            'residual': self.residual,
            'proportional_to_reference': self.proportional_to_reference,
        }


@dataclass
class RecursionLayer:
    """g_t (ramo small) ou h_t (ramo large) por classe de probabilidade"""

    branch: Branch
    t: int
    values: Dict[Fraction, int]
    method: str

    def value(self, key: Fraction) -> int:
        return self.values[key]

    def is_monotone(self) -> bool:
        ordered = [self.values[k] for k in sorted(self.values)]
        return all(a <= b for a, b in zip(ordered, ordered[1:]))

    def threshold(self) -> Optional[Fraction]:
        """Menor classe com valor 1"""
        ones = [k for k, v in self.values.items() if v == 1]
        return min(ones) if ones else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'branch': self.branch.value,
            't': self.t,
            'method': self.method,
            'threshold': self.threshold(),
            'values': {str(k): v for k, v in sorted(self.values.items())},
        }


@dataclass(frozen=True)
class GammaBracket:
    """
    Intervalo semiaberto (lo, hi] para γ; lo == hi denota o intervalo
    colapsado [γ̂, γ̂] de uma recuperação exata
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise BranchContradiction(
                f'Intervalo vazio para γ: ({self.lo}, {self.hi}]'
            )

    @classmethod
    def point(cls, gamma) -> 'GammaBracket':
        return cls(Fraction(gamma), Fraction(gamma))

    @property
    def collapsed(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, gamma) -> bool:
        if self.collapsed:
            return gamma == self.hi
        return self.lo < gamma <= self.hi

    def intersect(self, other: 'GammaBracket') -> 'GammaBracket':
        if self.collapsed or other.collapsed:
            point, rest = (self, other) if self.collapsed else (other, self)
            if not rest.contains(point.hi):
                raise BranchContradiction(
                    f'γ = {point.hi} fora de ({rest.lo}, {rest.hi}]'
                )
            return point
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if not lo < hi:
            raise BranchContradiction(f'Intervalo vazio para γ: ({lo}, {hi}]')
        return GammaBracket(lo, hi)

    def to_dict(self) -> Dict[str, Any]:
        return {'lo': self.lo, 'hi': self.hi, 'width': self.width}


@dataclass
class ElicitationReport:
    """Resultado do pipeline VaR: ramo, P̂, γ̂ exato ou intervalo"""

    branch: Branch
    candidate: CandidateReport
    status: str
    bracket: GammaBracket
    dyadic_bracket: Optional[GammaBracket] = None
    readoff_bracket: Optional[GammaBracket] = None
    gamma_exact: Optional[Fraction] = None
    scale: Optional[Fraction] = None
    depth: int = 0
    t_max: int = 0
    handoff_t: Optional[int] = None
    layers: List[RecursionLayer] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.gamma_exact is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'branch': self.branch.value,
            'status': self.status,
            'candidate': self.candidate.to_dict(),
            'gamma_exact': self.gamma_exact,
            'bracket': self.bracket.to_dict(),
            'dyadic_bracket': self.dyadic_bracket.to_dict()
            if self.dyadic_bracket
            else None,
            'readoff_bracket': self.readoff_bracket.to_dict()
            if self.readoff_bracket
            else None,
            'scale': self.scale,
            'depth': self.depth,
            't_max': self.t_max,
            'handoff_t': self.handoff_t,
            'layers': [layer.to_dict() for layer in self.layers],
            'diagnostics': self.diagnostics,
        }


@dataclass
class ConvergenceSeries:
    """Série (n, estatística, limite, erro) de um estudo de refinamento"""

    family: str
    statistic: str
    limit: Optional[float]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    diverging: bool = False

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            self.rows, columns=['n', 'statistic', 'limit', 'abs_error']
        )
        frame['diverging'] = self.diverging
        return frame

    def to_dict(self) -> Dict[str, Any]:
        return {
            'family': self.family,
            'statistic': self.statistic,
            'limit': self.limit,
            'diverging': self.diverging,
            'rows': self.rows,
        }
