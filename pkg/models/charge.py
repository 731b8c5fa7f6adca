from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from interfaces.oracle_interfaces import ISetFunction
from models.space import FiniteSpace
from utils.bitmask import mask_to_bits
from utils.exceptions import ChargeError, SpaceMismatch


@dataclass(frozen=True, eq=False)
class SignedCharge(ISetFunction):
    """
    Carga com sinal num espaço finito: vetor de valores por átomo
    Em espaços finitos ba = ca; a ordem setwise coincide com a ordem
    átomo a átomo (μ ≤ ν em todo evento sse μ(ω) ≤ ν(ω) em todo átomo).
    """

    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size != self.space.n:
            raise SpaceMismatch(
                f'Carga com {values.size} átomos num espaço com {self.space.n}'
            )
        if not np.all(np.isfinite(values)):
            raise ChargeError('Carga com valores não finitos')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def zero(cls, space: FiniteSpace) -> 'SignedCharge':
        return cls(space, np.zeros(space.n))

    def value(self, mask: int) -> float:
        return float(sum(self.values[i] for i in mask_to_bits(mask)))

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def check_space(self, other: 'SignedCharge') -> None:
        if self.space != other.space:
            raise SpaceMismatch('Cargas em espaços diferentes')

    def __add__(self, other: 'SignedCharge') -> 'SignedCharge':
        self.check_space(other)
        return SignedCharge(self.space, self.values + other.values)

    def __sub__(self, other: 'SignedCharge') -> 'SignedCharge':
        self.check_space(other)
        return SignedCharge(self.space, self.values - other.values)

    def __neg__(self) -> 'SignedCharge':
        return SignedCharge(self.space, -self.values)

    def __mul__(self, scalar: float) -> 'SignedCharge':
        return SignedCharge(self.space, float(scalar) * self.values)

    __rmul__ = __mul__

    def leq(self, other: 'SignedCharge', tol: float = 0.0) -> bool:
        """μ ≤ ν (átomo a átomo, equivalente à ordem setwise)"""
        self.check_space(other)
        return bool(np.all(self.values <= other.values + tol))

    def allclose(self, other: 'SignedCharge', tol: float = 1e-9) -> bool:
        self.check_space(other)
        return bool(np.allclose(self.values, other.values, rtol=0, atol=tol))

    def to_list(self) -> List[float]:
        return [float(v) for v in self.values]


@dataclass
class RearrangementStats:
    """
    s_μ(p) = max μ(B) e ι_μ(p) = min μ(B) sobre eventos com P(B) = p
    class_sizes informa quantos eventos cada classe contém
    """

    s_values: Dict = field(default_factory=dict)
    iota_values: Dict = field(default_factory=dict)
    class_sizes: Dict = field(default_factory=dict)
    total: float = 0.0
    argmax: Optional[Dict] = None

    def s(self, p) -> float:
        return self.s_values[p]

    def iota(self, p) -> float:
        return self.iota_values[p]

    def to_dict(self) -> dict:
        return {
            'classes': [
                {
                    'probability': p,
                    's': self.s_values[p],
                    'iota': self.iota_values[p],
                    'size': self.class_sizes.get(p),
                }
                for p in sorted(self.s_values)
            ],
            'total': self.total,
        }
