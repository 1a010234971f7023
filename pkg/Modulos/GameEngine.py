"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Motor del Protocolo (GameEngine.py)
DESCRIPCIÓN: Máquina de estados determinista del juego de pronóstico no acotado de
             un lado (OUFG) y del juego acotado (BFG): legalidad de movimientos,
             contabilidad del capital, deber de garantía y registro de rondas.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Tuple

from Herramientas.GameErrors import IllegalMoveError, IllegalStakeError

logger = logging.getLogger(__name__)

COLLATERAL_VIOLATION = "collateral_violation"


class GameVariant(Enum):
    OUFG = "OUFG"
    BFG = "BFG"

    @property
    def move_range(self) -> Tuple[float, float]:
        return (-1.0, math.inf) if self is GameVariant.OUFG else (-1.0, 1.0)

    @property
    def proportion_range(self) -> Tuple[float, float]:
        return (0.0, 1.0) if self is GameVariant.OUFG else (-1.0, 1.0)

    def is_legal_move(self, x: float) -> bool:
        lo, hi = self.move_range
        return not math.isnan(x) and lo <= x <= hi and math.isfinite(x)

    def is_legal_proportion(self, eps: float) -> bool:
        lo, hi = self.proportion_range
        return lo <= eps <= hi

    @classmethod
    def parse(cls, text: str) -> "GameVariant":
        try:
            return cls(str(text).strip().upper())
        except ValueError as e:
            raise IllegalMoveError(f"Variante de juego desconocida '{text}'.") from e


@dataclass(frozen=True)
class GameState:
    """Valor inmutable con las sumas acumuladas del juego."""
    variant: GameVariant
    n: int
    S: float
    A: float
    K: float
    K0: float
    verdict: Optional[str] = None

    @property
    def terminated(self) -> bool:
        return self.verdict is not None


@dataclass(frozen=True)
class RoundRecord:
    n: int
    M: float
    eps: Optional[float]
    x: float
    S: float
    A: float
    K_after: float
    proportion_legal: bool = True


@dataclass(frozen=True)
class SelfNormalizedStats:
    """Cocientes auto-normalizados; None cuando el normalizador no está definido."""
    slln: Optional[float]
    sqrtlog: Optional[float]
    lil: Optional[float]


def new_game(variant: GameVariant, initial_capital: float) -> GameState:
    if not (initial_capital > 0.0 and math.isfinite(initial_capital)):
        raise IllegalStakeError(f"El capital inicial debe ser positivo (recibido {initial_capital!r}).")
    K0 = float(initial_capital)
    return GameState(variant=variant, n=0, S=0.0, A=0.0, K=K0, K0=K0)


def play_round(state: GameState, M: float, x: float) -> Tuple[GameState, RoundRecord]:
    """
    Aplica una ronda: S += x, A += x², K += M·x.

    Si K + M·x < 0 el juego termina con veredicto de violación del deber de garantía.
    Una proporción fuera de rango que no lleva a la quiebra solo se marca.
    """
    if state.terminated:
        raise IllegalMoveError(f"El juego ya terminó con veredicto '{state.verdict}'.")
    x = float(x)
    M = float(M)
    if not state.variant.is_legal_move(x):
        raise IllegalMoveError(f"Movimiento x={x!r} ilegal en {state.variant.value}.")
    if not math.isfinite(M):
        raise IllegalStakeError(f"Apuesta M={M!r} no finita.")

    eps = M / state.K if state.K > 0.0 else None
    proportion_legal = eps is None or state.variant.is_legal_proportion(eps)

    S = state.S + x
    A = state.A + x * x
    K = state.K + M * x
    n = state.n + 1

    verdict = None
    if K < 0.0:
        verdict = COLLATERAL_VIOLATION
        logger.warning(f"Ronda {n}: violacion del deber de garantia (K={K!r}).")
    elif not proportion_legal:
        logger.warning(f"Ronda {n}: proporcion {eps!r} fuera de rango en {state.variant.value}.")

    new_state = replace(state, n=n, S=S, A=A, K=K, verdict=verdict)
    record = RoundRecord(n=n, M=M, eps=eps, x=x, S=S, A=A, K_after=K, proportion_legal=proportion_legal)
    return new_state, record


def replay(variant: GameVariant, initial_capital: float, records: Iterable[RoundRecord]) -> GameState:
    """Reconstruye el estado final a partir de la traza, en el mismo orden de evaluación."""
    state = new_game(variant, initial_capital)
    for record in records:
        state, _ = play_round(state, record.M, record.x)
    return state


def self_normalized_stats(state: GameState) -> SelfNormalizedStats:
    S, A = state.S, state.A
    if not A > 0.0:
        return SelfNormalizedStats(None, None, None)
    slln = S / A
    log_A = math.log(A)
    sqrtlog = S / math.sqrt(A * log_A) if log_A > 0.0 else None
    lil = S / math.sqrt(2.0 * A * math.log(log_A)) if log_A > 1.0 else None
    return SelfNormalizedStats(slln, sqrtlog, lil)
