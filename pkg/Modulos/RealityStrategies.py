"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Estrategias de Reality (RealityStrategies.py)
DESCRIPCIÓN: Caminos guionados, muestreadores i.i.d. con semilla explícita, caminos
             deterministas que siguen una deriva objetivo y la lectura de una serie
             de precios como movimientos del juego (x_n = p_n / p_{n-1} - 1).
"""

import csv
import logging
import math
from abc import ABC, abstractmethod
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from Herramientas.GameErrors import ConfigError, IllegalMoveError
from .GameEngine import GameState, GameVariant

logger = logging.getLogger(__name__)

SAMPLER_BLOCK = 4096


class RealityStrategy(ABC):
    """
    next_move recibe el estado y la apuesta M_n ya anunciada por Skeptic.
    Devuelve None cuando el camino se agota.
    """

    name = "reality"

    def __init__(self, variant: GameVariant = GameVariant.OUFG):
        self.variant = variant

    @abstractmethod
    def next_move(self, state: GameState, M: float) -> Optional[float]:
        ...

    def diagnostics(self) -> Dict[str, object]:
        return {"reality": self.name}


class ScriptedPath(RealityStrategy):
    name = "script"

    def __init__(self, xs: Sequence[float], variant: GameVariant = GameVariant.OUFG):
        super().__init__(variant)
        self.xs = [float(x) for x in xs]
        for i, x in enumerate(self.xs, start=1):
            if not variant.is_legal_move(x):
                raise IllegalMoveError(f"Entrada {i} del guion ilegal en {variant.value}: {x!r}.")
        self._cursor = 0

    def __len__(self) -> int:
        return len(self.xs)

    def next_move(self, state: GameState, M: float) -> Optional[float]:
        if self._cursor >= len(self.xs):
            return None
        x = self.xs[self._cursor]
        self._cursor += 1
        return x


def load_script(path: str, variant: GameVariant = GameVariant.OUFG) -> ScriptedPath:
    """CSV de una columna (o primera columna) con los movimientos."""
    xs = _read_column(path, "reality.script")
    logger.info(f"Guion de Reality cargado desde {path} ({len(xs)} movimientos).")
    return ScriptedPath(xs, variant)


def _read_column(path: str, field: str) -> List[float]:
    values = []
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            for row in csv.reader(handle):
                if not row or not row[0].strip():
                    continue
                try:
                    values.append(float(row[0]))
                except ValueError:
                    continue    # cabecera
    except OSError as e:
        raise ConfigError(field, f"no se pudo leer '{path}': {e}") from e
    return values


# ==========================================================================
# MUESTREADORES I.I.D.
# ==========================================================================

class Distribution(Enum):
    RADEMACHER = "rademacher"
    SHIFTED_RADEMACHER = "shifted"
    UNIFORM = "uniform"


class IIDSampler(RealityStrategy):
    """
    Flujo determinista a partir de la semilla. Se sortea por bloques fijos para que
    el camino no dependa del horizonte de la simulación.
    """

    name = "iid"

    def __init__(self, dist: Distribution, seed: int, variant: GameVariant = GameVariant.OUFG,
                 delta: float = 0.0, upper: float = 1.0):
        super().__init__(variant)
        self.dist = dist
        self.seed = int(seed)
        self.delta = float(delta)
        self.upper = float(upper)

        if dist is Distribution.SHIFTED_RADEMACHER and self.delta < 0.0:
            raise IllegalMoveError(f"El corrimiento debe ser >= 0 para soportar x >= -1 (delta={delta!r}).")
        if dist is Distribution.UNIFORM and not self.upper > -1.0:
            raise IllegalMoveError(f"Uniforme en [-1, u] requiere u > -1 (u={upper!r}).")
        lo, hi = self._support()
        if not (variant.is_legal_move(lo) and variant.is_legal_move(hi)):
            raise IllegalMoveError(f"Soporte [{lo}, {hi}] fuera del espacio de {variant.value}.")

        self.rng = np.random.default_rng(self.seed)
        self._block = np.empty(0)
        self._cursor = 0

    def _support(self):
        if self.dist is Distribution.SHIFTED_RADEMACHER:
            return -1.0 + self.delta, 1.0 + self.delta
        if self.dist is Distribution.UNIFORM:
            return -1.0, self.upper
        return -1.0, 1.0

    def _draw_block(self) -> np.ndarray:
        if self.dist is Distribution.UNIFORM:
            return self.rng.uniform(-1.0, self.upper, size=SAMPLER_BLOCK)
        signs = 2.0 * self.rng.integers(0, 2, size=SAMPLER_BLOCK) - 1.0
        if self.dist is Distribution.SHIFTED_RADEMACHER:
            return signs + self.delta
        return signs

    def draw(self) -> float:
        if self._cursor >= self._block.size:
            self._block = self._draw_block()
            self._cursor = 0
        x = float(self._block[self._cursor])
        self._cursor += 1
        return x

    def sample(self, count: int) -> np.ndarray:
        return np.array([self.draw() for _ in range(count)])

    def next_move(self, state: GameState, M: float) -> Optional[float]:
        return self.draw()

    def diagnostics(self) -> Dict[str, object]:
        return {"reality": self.name, "dist": self.dist.value, "seed": self.seed, "delta": self.delta}


# ==========================================================================
# CAMINOS CON DERIVA OBJETIVO
# ==========================================================================

class TargetTracking(RealityStrategy):
    """
    Movimientos ±1 deterministas que mantienen S_n cerca de f(A_n):
    linear  -> f(A) = δ·A
    lil     -> f(A) = √(c·A·ln A)   (0 mientras A <= 1)
    """

    name = "target"

    def __init__(self, target: str, coef: float, variant: GameVariant = GameVariant.OUFG):
        super().__init__(variant)
        if target not in ("linear", "lil"):
            raise ConfigError("reality.target", f"objetivo desconocido '{target}'")
        if not coef > 0.0:
            raise ConfigError("reality.coef", "debe ser positivo")
        self.target = target
        self.coef = float(coef)

    def level(self, A: float) -> float:
        if self.target == "linear":
            return self.coef * A
        return math.sqrt(self.coef * A * math.log(A)) if A > 1.0 else 0.0

    def next_move(self, state: GameState, M: float) -> Optional[float]:
        return 1.0 if state.S < self.level(state.A + 1.0) else -1.0

    def diagnostics(self) -> Dict[str, object]:
        return {"reality": self.name, "target": self.target, "coef": self.coef}


# ==========================================================================
# SERIE DE PRECIOS
# ==========================================================================

def price_moves(prices: Sequence[float]) -> List[float]:
    """x_n = p_n / p_{n-1} - 1; siempre >= -1 para precios no negativos."""
    p = np.asarray(prices, dtype=float)
    if p.size < 2:
        raise ConfigError("reality.prices", "se necesitan al menos dos precios")
    if np.any(p[:-1] <= 0.0) or np.any(p < 0.0):
        raise ConfigError("reality.prices", "los precios deben ser positivos")
    return (p[1:] / p[:-1] - 1.0).tolist()


class PricePath(ScriptedPath):
    """Lectura de cartera del juego: el activo riesgoso rinde x_n por ronda."""

    name = "prices"

    def __init__(self, prices: Sequence[float]):
        super().__init__(price_moves(prices), GameVariant.OUFG)
        self.prices = [float(p) for p in prices]


def load_prices(path: str) -> PricePath:
    prices = _read_column(path, "reality.prices")
    logger.info(f"Serie de precios cargada desde {path} ({len(prices)} precios).")
    return PricePath(prices)
