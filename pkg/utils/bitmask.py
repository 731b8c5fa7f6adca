"""
Utilitários de bitmask para eventos (bit i = átomo i)
"""
import logging
from functools import reduce
from typing import Iterable, Iterator, List

import numpy as np

from utils.config import get_settings
from utils.exceptions import TooManyAtoms

logger = logging.getLogger(__name__)


def bits_to_mask(bits: Iterable[int]) -> int:
    return reduce(lambda x, y: x | y, (1 << b for b in bits), 0)


def mask_to_bits(mask: int) -> List[int]:
    bits = []
    i = 0
    while mask >> i:
        if (mask >> i) & 1:
            bits.append(i)
        i += 1
    return bits


def full_mask(n: int) -> int:
    return (1 << n) - 1


def complement(mask: int, n: int) -> int:
    return full_mask(n) & ~mask


def submasks(mask: int) -> Iterator[int]:
    """Todos os subconjuntos de mask, incluindo o vazio"""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def all_masks(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def popcounts(n: int) -> np.ndarray:
    """Cardinalidade de cada máscara 0..2^n-1"""
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        counts[1 << i : 1 << (i + 1)] = counts[: 1 << i] + 1
    return counts


def membership_matrix(n: int) -> np.ndarray:
    """Matriz (2^n, n) de indicadores: linha = evento, coluna = átomo"""
    masks = all_masks(n)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(float)


def ensure_enumerable(n: int, limit: int = None, what: str = 'enumeração'):
    """Valida o teto de átomos para operações que percorrem 2^n eventos"""
    settings = get_settings()
    limit = settings.max_atoms if limit is None else limit
    if n > limit:
        raise TooManyAtoms(f'{what}: n={n} excede o limite {limit}')
    if n > settings.warn_atoms:
        logger.warning('%s com n=%d átomos (2^%d eventos)', what, n, n)
