"""
Serialização de racionais, reais e relatórios JSON
"""
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

import ujson

from utils.config import get_settings
from utils.exceptions import ConfigError

Rational = Union[Fraction, int, str, float]


def parse_rational(value: Rational) -> Fraction:
    """Converte 'p/q', inteiro, decimal em texto ou float para Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigError(f'Valor racional inválido: {value!r}')
    try:
        if isinstance(value, float):
            # floats de config representam decimais curtos (0.75, 0.1)
            return Fraction(repr(value))
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f'Valor racional inválido: {value!r}') from exc


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f'{value.numerator}/{value.denominator}'


def format_real(value: float, digits: int = None) -> float:
    """Arredonda para dígitos significativos; normaliza -0.0"""
    digits = digits or get_settings().real_digits
    rounded = float(f'{float(value):.{digits}g}')
    return rounded + 0.0


def to_jsonable(value: Any) -> Any:
    """Converte recursivamente Fractions, floats e numpy para JSON"""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, 'tolist'):
        return to_jsonable(value.tolist())
    return str(value)


def dumps(payload: Any) -> str:
    return ujson.dumps(
        to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False
    )


def load_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'Arquivo não encontrado: {path}')
    try:
        return ujson.loads(path.read_text(encoding='utf-8'))
    except ValueError as exc:
        raise ConfigError(f'JSON inválido em {path}: {exc}') from exc


def write_json(path: Union[str, Path], payload: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload) + '\n', encoding='utf-8')
