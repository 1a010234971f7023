"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Jerarquía de Errores del Dominio (GameErrors.py)
DESCRIPCIÓN: Excepciones compartidas por el motor del juego, las densidades a priori,
             el cálculo de clases superiores y la carga de configuración.
"""

from typing import Optional


class GameError(ValueError):
    """Base de todos los errores del dominio."""


class IllegalMoveError(GameError):
    """Movimiento de Reality fuera del espacio permitido por la variante."""


class IllegalStakeError(GameError):
    """Capital inicial, proporción o apuesta de Skeptic inválidos."""


class PriorDomainError(GameError):
    """
    Fallo de dominio en la torre de logaritmos iterados.
    Guarda la profundidad en la que el valor intermedio dejó de ser válido.
    """

    def __init__(self, message: str, depth: Optional[int] = None):
        self.depth = depth
        if depth is not None:
            message = f"{message} (profundidad {depth})"
        super().__init__(message)


class FunctionalDomainError(GameError):
    """Función de clase superior o densidad fuera del dominio de F / G."""


class InvariantViolationError(GameError):
    """Un invariante interno que la teoría garantiza no se cumplió."""


class ConfigError(GameError):
    """Error de configuración asociado a un campo con ruta punteada."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
