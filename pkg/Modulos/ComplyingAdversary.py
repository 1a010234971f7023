"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Adversario Complaciente (ComplyingAdversary.py)
DESCRIPCIÓN: Estrategia determinista de Reality que mantiene acotado el potencial
             L_n = K_n + Π c_k eligiendo en cada ronda x_n ∈ {-1, 2 b_n}. Cuando
             Σ 1/b_n diverge, fuerza S_n / b_n >= 1 en alguna ronda sin que el
             capital de Skeptic supere K_0 + 1.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from Config.Config import Config
from Herramientas.GameErrors import ConfigError, InvariantViolationError
from Herramientas.SequenceSpec import SequenceSpec
from .GameEngine import GameState, GameVariant
from .RealityStrategies import RealityStrategy

logger = logging.getLogger(__name__)

SCHEMES = ("growth", "balanced")


def payoff_factors(b_n: float, scheme: str = Config.ADVERSARY_SCHEME) -> Tuple[float, float]:
    """
    (c(-1), c(2 b_n)), ambos justos bajo p_n = 1/(1 + 2 b_n):
    (1 - p) c(-1) + p c(2 b) = 1.
    """
    p = 1.0 / (1.0 + 2.0 * b_n)
    if scheme == "balanced":
        return 1.0 / (2.0 * (1.0 - p)), 1.0 / (2.0 * p)
    if scheme == "growth":
        return 1.0 + p, p
    raise ConfigError("adversary.scheme", f"esquema desconocido '{scheme}' (use {', '.join(SCHEMES)})")


@dataclass
class AdversaryState:
    round: int = 0
    b: float = math.nan
    p: float = math.nan
    log_cprod: float = 0.0
    L: float = math.nan
    L0: float = math.nan
    sup_K: float = 0.0
    sup_cprod: float = 1.0
    monotone_violations: int = 0
    witness_round: Optional[int] = None
    switched_at: Optional[int] = None
    bankruptcy_round: Optional[int] = None

    @property
    def cprod(self) -> float:
        return math.exp(self.log_cprod)


class ComplyingAdversary(RealityStrategy):
    """
    Regla de selección: entre los candidatos con L_n <= L_{n-1}(1 + tol) se juega el de
    menor L_n; en empate exacto se juega -1. Si Skeptic apuesta M_n < 0 se juega un
    movimiento que lo lleva a capital negativo.
    """

    name = "adversary"

    def __init__(self, b: SequenceSpec, initial_capital: float, scheme: str = Config.ADVERSARY_SCHEME,
                 window: int = Config.ADVERSARY_WINDOW, tol: float = Config.ADVERSARY_TOL):
        super().__init__(GameVariant.OUFG)
        if scheme not in SCHEMES:
            raise ConfigError("adversary.scheme", f"esquema desconocido '{scheme}'")
        if window < 2:
            raise ConfigError("adversary.window", "debe ser al menos 2")
        self.b = b
        self.scheme = scheme
        self.tol = float(tol)
        self.window = int(window)
        self._small_b = deque(maxlen=self.window)

        L0 = float(initial_capital) + 1.0
        self.state = AdversaryState(L=L0, L0=L0, sup_K=float(initial_capital))

    @property
    def switched(self) -> bool:
        return self.state.switched_at is not None

    def _check_window(self, n: int, b_n: float) -> None:
        """Aproximación finita de 'b_n < n - 1 infinitas veces'."""
        self._small_b.append(b_n < n - 1)
        if self.switched or len(self._small_b) < self.window:
            return
        if sum(self._small_b) >= self.window / 2:
            self.state.switched_at = n
            logger.warning(f"Adversario: b_n < n-1 en {sum(self._small_b)} de las ultimas {self.window} "
                           f"rondas; se juega x = -1 de forma permanente desde n={n}.")

    def next_move(self, state: GameState, M: float) -> Optional[float]:
        st = self.state
        n = state.n + 1
        b_n = self.b.value(n)
        st.round, st.b, st.p = n, b_n, 1.0 / (1.0 + 2.0 * b_n)
        self._check_window(n, b_n)

        if M < 0.0:
            x = max(2.0 * b_n, 2.0 * state.K / abs(M) + 1.0)
            st.bankruptcy_round = n
            logger.warning(f"Adversario: apuesta negativa M={M!r} en n={n}; se juega x={x!r}.")
            return x

        if self.switched:
            return -1.0

        c_minus, c_plus = payoff_factors(b_n, self.scheme)
        K_minus = state.K - M
        K_plus = state.K + 2.0 * b_n * M
        L_minus = K_minus + math.exp(st.log_cprod + math.log(c_minus))
        L_plus = K_plus + math.exp(st.log_cprod + math.log(c_plus))

        limit = st.L * (1.0 + self.tol)
        candidates = [(L, x, c, K) for L, x, c, K in ((L_minus, -1.0, c_minus, K_minus),
                                                      (L_plus, 2.0 * b_n, c_plus, K_plus)) if L <= limit]
        if not candidates:
            message = (f"Ningun candidato cumple L_n <= L_(n-1) en n={n}: "
                       f"L(-1)={L_minus!r}, L(2b)={L_plus!r}, L_prev={st.L!r}")
            logger.error(message)
            raise InvariantViolationError(message)

        L_new, x, c, K_new = min(candidates, key=lambda item: (item[0], item[1]))
        if L_new > st.L:
            st.monotone_violations += 1
        st.log_cprod += math.log(c)
        st.L = L_new
        st.sup_K = max(st.sup_K, K_new)
        st.sup_cprod = max(st.sup_cprod, st.cprod)
        if x > 0.0 and st.witness_round is None and (state.S + x) / b_n >= 1.0:
            st.witness_round = n
            logger.info(f"Adversario: testigo S_n/b_n >= 1 en n={n}.")
        logger.debug(f"Adversario n={n}: x={x!r}, L={L_new!r}, prod c={st.cprod!r}.")
        return x

    def diagnostics(self) -> Dict[str, object]:
        st = self.state
        return {
            "reality": self.name,
            "scheme": self.scheme,
            "b": self.b.source,
            "rounds": st.round,
            "L0": st.L0,
            "L": st.L,
            "sup_K": st.sup_K,
            "sup_cprod": st.sup_cprod,
            "monotone_violations": st.monotone_violations,
            "witness_round": st.witness_round,
            "switched_at": st.switched_at,
            "bankruptcy_round": st.bankruptcy_round,
        }
