from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from utils.bitmask import bits_to_mask, complement, full_mask, mask_to_bits

Number = Union[Fraction, float]


@dataclass(frozen=True)
class FiniteSpace:
    """Espaço finito discretizado: átomos com pesos racionais exatos"""

    weights: Tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    @property
    def is_uniform(self) -> bool:
        return all(w == self.weights[0] for w in self.weights)

    @property
    def full(self) -> 'Event':
        return Event(full_mask(self.n), self.n)

    @property
    def empty(self) -> 'Event':
        return Event(0, self.n)

    @cached_property
    def probability(self) -> 'ProbabilityCharge':
        """Probabilidade de referência P do espaço"""
        return ProbabilityCharge(self, tuple(self.weights))

    def event(self, members: Iterable[int]) -> 'Event':
        return Event(bits_to_mask(members), self.n)

    def to_dict(self) -> dict:
        return {
            'atom_count': self.n,
            'weights': [str(w) for w in self.weights],
            'uniform': self.is_uniform,
        }


@dataclass(frozen=True)
class Event:
    """Evento como bitmask sobre os átomos de um espaço com n átomos"""

    mask: int
    n: int

    @property
    def members(self) -> List[int]:
        return mask_to_bits(self.mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def complement(self) -> 'Event':
        return Event(complement(self.mask, self.n), self.n)

    def __or__(self, other: 'Event') -> 'Event':
        return Event(self.mask | other.mask, self.n)

    def __and__(self, other: 'Event') -> 'Event':
        return Event(self.mask & other.mask, self.n)

    def __sub__(self, other: 'Event') -> 'Event':
        return Event(self.mask & ~other.mask, self.n)

    def to_dict(self) -> dict:
        return {'mask': self.mask, 'members': self.members}


@dataclass(frozen=True, eq=False)
class ProbabilityCharge:
    """
    Carga de probabilidade sobre os átomos (P, Q, P^A)
    Valores racionais quando construída de racionais; reais caso contrário
    """

    space: FiniteSpace
    values: Tuple[Number, ...]
    _grid: Dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self.values)

    def probability(self, mask: int) -> Number:
        """P(A) exato (Fraction) ou real, somando os átomos de A"""
        if self.exact:
            return sum(
                (self.values[i] for i in mask_to_bits(mask)), Fraction(0)
            )
        return float(sum(self.values[i] for i in mask_to_bits(mask)))

    def class_key(self, mask: int):
        """Chave da classe de equiprobabilidade do evento"""
        p = self.probability(mask)
        return p if self.exact else round(p, 12)

    def real_values(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def as_charge(self):
        from models.charge import SignedCharge

        return SignedCharge(self.space, self.real_values())

    @property
    def denominator(self) -> int:
        """Denominador comum dos pesos (apenas cargas exatas)"""
        if 'denominator' not in self._grid:
            self._grid['denominator'] = lcm(
                *(Fraction(v).denominator for v in self.values)
            )
        return self._grid['denominator']

    @property
    def numerators(self) -> Tuple[int, ...]:
        d = self.denominator
        return tuple(int(Fraction(v) * d) for v in self.values)

    def mask_numerators(self) -> np.ndarray:
        """P(A)*denominador para todas as máscaras 0..2^n-1 (exato, inteiro)"""
        if 'mask_numerators' not in self._grid:
            nums = self.numerators
            dtype = np.int64 if self.denominator < 2**40 else object
            table = np.zeros(1 << self.n, dtype=dtype)
            for i, num in enumerate(nums):
                block = 1 << i
                table[block : 2 * block] = table[:block] + num
            self._grid['mask_numerators'] = table
        return self._grid['mask_numerators']

    def mask_probabilities(self) -> np.ndarray:
        """P(A) real para todas as máscaras"""
        if self.exact:
            return self.mask_numerators().astype(float) / self.denominator
        table = np.zeros(1 << self.n)
        for i, value in enumerate(self.real_values()):
            block = 1 << i
            table[block : 2 * block] = table[:block] + value
        return table

    def class_index(self) -> Tuple[list, np.ndarray]:
        """
        Agrupa todas as máscaras por probabilidade exata
        Retorna (chaves ordenadas, índice da classe por máscara)
        """
        if 'class_index' not in self._grid:
            if self.exact:
                nums = self.mask_numerators()
                uniq, inverse = np.unique(nums, return_inverse=True)
                keys = [Fraction(int(u), self.denominator) for u in uniq]
            else:
                probs = np.round(self.mask_probabilities(), 12)
                uniq, inverse = np.unique(probs, return_inverse=True)
                keys = [float(u) for u in uniq]
            self._grid['class_index'] = (keys, inverse)
        return self._grid['class_index']

    def to_dict(self) -> dict:
        return {
            'exact': self.exact,
            'values': [
                str(v) if self.exact else float(v) for v in self.values
            ],
        }
