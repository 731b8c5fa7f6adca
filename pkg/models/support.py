from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from interfaces.oracle_interfaces import ExtremumStatus, IFunctionalOracle
from models.charge import SignedCharge
from models.game import Game
from models.variable import Dictionary, SimpleRandomVariable
from utils.exceptions import SupportError


class Side(str, Enum):
    """Extremo pedido: sup do lado inferior ou inf do lado superior"""

    ANTICORE_SUP = 'anticore_sup'
    CORE_INF = 'core_inf'
    LOWER_SUP = 'lower_sup'
    UPPER_INF = 'upper_inf'

    @property
    def is_lower(self) -> bool:
        return self in (Side.ANTICORE_SUP, Side.LOWER_SUP)


class Normalization(str, Enum):
    NONE = 'none'
    TOTAL = 'total'
    PIN = 'pin'


@dataclass
class SupportSpec:
    """
    Conjunto definido por um alvo (jogo ou (φ, 𝒟)), um lado e uma normalização
    lower: μ ≤ v (ou ⟨μ,X⟩ ≤ φ(X)); upper: μ ≥ v (ou ≥ φ)
    total: μ(Ω) = v(Ω) (núcleo/antinúcleo estrito); pin: ⟨μ,c⟩ = φ(c)
    """

    target: Union[Game, Tuple[IFunctionalOracle, Dictionary]]
    side: str = 'lower'
    normalization: Normalization = Normalization.NONE
    pin: Optional[SimpleRandomVariable] = None

    def __post_init__(self):
        if self.side not in ('lower', 'upper'):
            raise SupportError(f'Lado inválido: {self.side}')
        self.normalization = Normalization(self.normalization)
        if self.normalization == Normalization.PIN:
            if self.is_game:
                raise SupportError('pin(c) só vale para alvos funcionais')
            _, dictionary = self.target
            if self.pin is None or not self.pin.is_constant:
                raise SupportError('pin(c) exige uma variável constante c')
            if not dictionary.contains(self.pin):
                raise SupportError('A variável de pin deve pertencer a 𝒟')

    @property
    def is_game(self) -> bool:
        return isinstance(self.target, Game)


@dataclass
class ExtremumReport:
    """Extremo coordenada a coordenada de um conjunto suporte"""

    status: ExtremumStatus
    side: Side
    method: str
    extremum: Optional[SignedCharge] = None
    per_atom_values: List[Optional[float]] = field(default_factory=list)
    certificates: Dict[int, List[int]] = field(default_factory=dict)
    unbounded_atoms: List[int] = field(default_factory=list)
    cross_check: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    @property
    def exists(self) -> bool:
        return self.status == ExtremumStatus.EXISTS

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': self.status.value,
            'side': self.side.value,
            'method': self.method,
            'extremum': self.extremum.to_list() if self.extremum else None,
            'per_atom_values': self.per_atom_values,
            'certificates': {
                str(k): v for k, v in sorted(self.certificates.items())
            },
            'unbounded_atoms': self.unbounded_atoms,
            'cross_check': self.cross_check,
            'notes': self.notes,
        }


@dataclass
class SandwichConstants:
    """a⋆ = sup{a : aP ≤ v} e b⋆ = inf{b : bP ≥ v}, quando definidos"""

    a_star: Optional[float] = None
    b_star: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'a_star': self.a_star, 'b_star': self.b_star}


@dataclass
class ExistenceRow:
    n: int
    singleton_total: float
    total: float
    core_status: str
    core_method: str
    anticore_condition: bool
    anticore_status: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'singleton_total': self.singleton_total,
            'total': self.total,
            'core_status': self.core_status,
            'core_method': self.core_method,
            'anticore_condition': self.anticore_condition,
            'anticore_status': self.anticore_status,
        }


@dataclass
class ExistenceDiagnostic:
    """Série de crescimento n·h(1/n) com ajuste linear"""

    distortion: str
    rows: List[ExistenceRow] = field(default_factory=list)
    slope: float = 0.0
    r_squared: float = 0.0
    diverging: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'distortion': self.distortion,
            'rows': [row.to_dict() for row in self.rows],
            'slope': self.slope,
            'r_squared': self.r_squared,
            'diverging': self.diverging,
        }


@dataclass
class ChargeWitness:
    """Membro explícito de um (anti)núcleo com a verificação de pertinência"""

    charge: SignedCharge
    member: bool
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'charge': self.charge.to_list(),
            'member': self.member,
            'kind': self.kind,
            'params': {k: str(v) for k, v in self.params.items()},
        }
