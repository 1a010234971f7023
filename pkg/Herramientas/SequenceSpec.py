"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Sucesiones Normalizadoras (SequenceSpec.py)
DESCRIPCIÓN: Interpreta las sucesiones b_n usadas por la estrategia de Kronecker y
             por el adversario complaciente: "n", "n^p", "n*log(n)^2" y "table:<csv>".
"""

import csv
import logging
import math
import re
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import zeta

from .GameErrors import ConfigError

logger = logging.getLogger(__name__)

_POWER_RE = re.compile(r"^n\s*(?:(?:\^|\*\*)\s*([0-9]*\.?[0-9]+))?$")
_NLOG_RE = re.compile(r"^n\s*\*\s*log\(n\)\s*(?:\^|\*\*)\s*([0-9]*\.?[0-9]+)$")


@dataclass(frozen=True)
class SequenceSpec:
    """
    Sucesión positiva y no decreciente b_n, n >= 1.

    kind = "power": b_n = n^p
    kind = "nlog":  b_n = n (1 + ln n)^q  (desplazada para que b_1 > 0)
    kind = "table": valores leídos de un CSV
    """
    kind: str
    exponent: float = 1.0
    table: Optional[Tuple[float, ...]] = None
    source: str = ""

    def value(self, n: int) -> float:
        if n < 1:
            raise ValueError("b_n está definida para n >= 1.")
        if self.kind == "power":
            return float(n) ** self.exponent
        if self.kind == "nlog":
            return float(n) * (1.0 + math.log(n)) ** self.exponent
        if self.table is None or n > len(self.table):
            raise ValueError(f"La tabla de b_n solo cubre {len(self.table or ())} rondas.")
        return self.table[n - 1]

    def values(self, horizon: int) -> np.ndarray:
        n = np.arange(1, horizon + 1, dtype=float)
        if self.kind == "power":
            return n ** self.exponent
        if self.kind == "nlog":
            return n * (1.0 + np.log(n)) ** self.exponent
        if self.table is None or horizon > len(self.table):
            raise ValueError(f"La tabla de b_n solo cubre {len(self.table or ())} rondas.")
        return np.asarray(self.table[:horizon], dtype=float)

    @property
    def summable(self) -> Optional[bool]:
        """Si Σ 1/b_n converge; None cuando no se puede decidir (tablas)."""
        if self.kind == "power":
            return self.exponent > 1.0
        if self.kind == "nlog":
            return self.exponent > 1.0
        return None

    def reciprocal_sum(self, horizon: int) -> Tuple[float, bool]:
        """
        Z = Σ 1/b_n. Devuelve (Z, exacto). Cuando la serie diverge o no tiene forma
        cerrada se usa la suma parcial hasta el horizonte (más una cota de cola
        integral si la serie converge).
        """
        if self.kind == "power" and self.exponent > 1.0:
            return float(zeta(self.exponent, 1)), True
        partial = float(np.sum(1.0 / self.values(horizon)))
        if self.kind == "nlog" and self.exponent > 1.0:
            q = self.exponent
            tail = (1.0 + math.log(horizon)) ** (1.0 - q) / (q - 1.0)
            return partial + tail, False
        return partial, False


def parse_sequence(text: str, field: str = "b") -> SequenceSpec:
    """Convierte la notación de configuración en un SequenceSpec validado."""
    spec = text.strip().replace(" ", "")

    if spec.startswith("table:"):
        path = spec[len("table:"):]
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                values = tuple(float(row[0]) for row in csv.reader(handle) if row and row[0].strip())
        except (OSError, ValueError) as e:
            raise ConfigError(field, f"no se pudo leer la tabla '{path}': {e}") from e
        if not values or any(v <= 0.0 for v in values):
            raise ConfigError(field, "la tabla debe contener valores positivos")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ConfigError(field, "la tabla debe ser no decreciente")
        logger.info(f"Sucesion b_n cargada desde {path} ({len(values)} valores).")
        return SequenceSpec(kind="table", table=values, source=text)

    match = _NLOG_RE.match(spec)
    if match:
        return SequenceSpec(kind="nlog", exponent=float(match.group(1)), source=text)

    match = _POWER_RE.match(spec)
    if match:
        exponent = float(match.group(1)) if match.group(1) else 1.0
        if exponent <= 0.0:
            raise ConfigError(field, "el exponente de n^p debe ser positivo")
        return SequenceSpec(kind="power", exponent=exponent, source=text)

    raise ConfigError(field, f"sucesion no reconocida '{text}'")
