"""
Hierarquia de erros do refmeasure
Resultados numéricos (ilimitado, vazio, não proporcional) são status nos
relatórios; exceções ficam para entradas inválidas.
"""


class RefMeasureError(Exception):
    """Erro base da aplicação"""


# ============== ESPAÇOS ==============


class SpaceError(RefMeasureError):
    """Erros de espaços finitos e eventos"""


class ZeroTotal(SpaceError):
    pass


class NegativeWeight(SpaceError):
    pass


class TooManyAtoms(SpaceError):
    pass


class ForeignEvent(SpaceError):
    pass


class NullConditioningEvent(SpaceError):
    pass


class SpaceMismatch(SpaceError):
    pass


# ============== CARGAS ==============


class ChargeError(RefMeasureError):
    """Erros de cargas com sinal"""


class NotAbsolutelyContinuous(ChargeError):
    pass


# ============== JOGOS ==============


class GameError(RefMeasureError):
    """Erros de jogos, distorções e capacidades"""


class DomainError(GameError):
    pass


class ParameterOutOfRange(GameError):
    pass


class EmptyList(GameError):
    pass


class InconsistentLayers(GameError):
    pass


class NotACapacity(GameError):
    pass


class ResolutionExceeded(GameError):
    pass


class AllZero(GameError):
    pass


class BranchContradiction(GameError):
    pass


# ============== LP / SUPORTES ==============


class LPError(RefMeasureError):
    """Erros do resolvedor linear"""


class MalformedProblem(LPError):
    pass


class SupportError(RefMeasureError):
    """Erros de conjuntos suporte"""


class EmptyDictionary(SupportError):
    pass


class NoExtremum(SupportError):
    pass


class ElicitationError(RefMeasureError):
    """Erros de recuperação de parâmetros"""


class OutOfRange(ElicitationError):
    pass


# ============== CLI ==============


class ConfigError(RefMeasureError):
    pass


class UnknownDemo(ConfigError):
    pass
