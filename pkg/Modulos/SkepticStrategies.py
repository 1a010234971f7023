"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Estrategias de Skeptic (SkepticStrategies.py)
DESCRIPCIÓN: Estrategia de proporción constante, mezclas discretas (canónica de un lado
             y de dos lados), mezcla bayesiana continua sobre nodos de cuadratura y la
             estrategia de Kronecker M_n = 1/b_n. Las mezclas llevan los productos por
             nodo en dominio logarítmico y suman con log-sum-exp.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from Config.Config import Config
from Herramientas.GameErrors import IllegalStakeError
from Herramientas.SequenceSpec import SequenceSpec
from .GameEngine import GameState, GameVariant
from .MixtureQuadrature import QuadratureNodes, QuadratureSpec, build_node_pair
from .PriorDensity import Prior

logger = logging.getLogger(__name__)


# ==========================================================================
# ESTADO DE LA MEZCLA
# ==========================================================================

class MixtureState:
    """
    Productos L_j = Σ_i ln(1 + ε_j x_i) por átomo. -inf es absorbente.
    """

    def __init__(self, eps: np.ndarray, log_base: np.ndarray):
        self.eps = np.asarray(eps, dtype=float)
        self.log_base = np.asarray(log_base, dtype=float)
        if self.eps.shape != self.log_base.shape:
            raise ValueError("eps y log_base deben tener la misma forma.")
        self.logprod = np.zeros_like(self.eps)
        self.round = 0

    @property
    def size(self) -> int:
        return int(self.eps.size)

    def _log_posterior(self) -> np.ndarray:
        return self.logprod + self.log_base

    def log_capital(self) -> float:
        """ln Σ_j exp(L_j + ln peso_j)."""
        terms = self._log_posterior()
        if not np.any(np.isfinite(terms)):
            return -math.inf
        return float(logsumexp(terms))

    @property
    def ruined(self) -> bool:
        return self.log_capital() == -math.inf

    def proportion(self) -> float:
        """Media posterior Σ_j p_j ε_j (con signo para átomos negativos)."""
        terms = self._log_posterior()
        if not np.any(np.isfinite(terms)):
            return 0.0
        log_num, sign = logsumexp(terms, b=self.eps, return_sign=True)
        log_den = logsumexp(terms)
        if sign == 0:
            return 0.0
        return float(sign * math.exp(log_num - log_den))

    def update(self, x: float) -> None:
        with np.errstate(divide="ignore", invalid="ignore"):
            self.logprod += np.log1p(self.eps * float(x))
        self.round += 1

    def node_products(self) -> np.ndarray:
        return np.exp(self.logprod)


# ==========================================================================
# INTERFAZ DE ESTRATEGIA
# ==========================================================================

class SkepticStrategy(ABC):
    """
    Estrategia secuencial: stake() se consulta antes de conocer x_n y observe(x_n)
    se llama después de la actualización del juego.
    """

    name = "skeptic"

    def __init__(self, variant: GameVariant = GameVariant.OUFG):
        self.variant = variant

    @property
    @abstractmethod
    def initial_capital(self) -> float:
        ...

    @abstractmethod
    def stake(self, state: GameState) -> float:
        ...

    def observe(self, x: float) -> None:
        pass

    def proportion(self) -> Optional[float]:
        return None

    def log_integral_capital(self) -> Optional[float]:
        """ln K_n evaluado como mezcla; None si la estrategia no es una mezcla."""
        return None

    def diagnostics(self) -> Dict[str, object]:
        return {"strategy": self.name}


class ConstantProportion(SkepticStrategy):
    name = "const"

    def __init__(self, eps: float, variant: GameVariant = GameVariant.OUFG,
                 initial_capital: float = Config.DEFAULT_INITIAL_CAPITAL):
        super().__init__(variant)
        if not variant.is_legal_proportion(eps):
            raise IllegalStakeError(f"Proporción {eps!r} fuera del rango de {variant.value}.")
        self.eps = float(eps)
        self._initial_capital = float(initial_capital)

    @property
    def initial_capital(self) -> float:
        return self._initial_capital

    def stake(self, state: GameState) -> float:
        return self.eps * state.K if state.K > 0.0 else 0.0

    def proportion(self) -> Optional[float]:
        return self.eps

    def diagnostics(self) -> Dict[str, object]:
        return {"strategy": self.name, "eps": self.eps}


# ==========================================================================
# MEZCLAS
# ==========================================================================

class DiscreteMixture(SkepticStrategy):
    """
    K_n = Σ_j peso_j Π_i (1 + ε_j x_i). Los pesos se guardan en logaritmo.
    """

    name = "discrete"

    def __init__(self, atoms: Sequence[Tuple[float, float]], variant: GameVariant = GameVariant.OUFG):
        super().__init__(variant)
        if not atoms:
            raise IllegalStakeError("La mezcla discreta necesita al menos un átomo.")
        eps = np.array([a[0] for a in atoms], dtype=float)
        weights = np.array([a[1] for a in atoms], dtype=float)
        if np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
            raise IllegalStakeError("Los pesos de la mezcla deben ser positivos y finitos.")
        self._check_atoms(eps)
        self.state = MixtureState(eps, np.log(weights))
        self._initial = math.exp(self.state.log_capital())

    @classmethod
    def from_log_weights(cls, eps: np.ndarray, log_weights: np.ndarray,
                         variant: GameVariant = GameVariant.OUFG) -> "DiscreteMixture":
        """Átomos con pesos ya en logaritmo (p. ej. nodos de cuadratura)."""
        mixture = cls.__new__(cls)
        SkepticStrategy.__init__(mixture, variant)
        mixture._check_atoms(np.asarray(eps, dtype=float))
        mixture.state = MixtureState(eps, log_weights)
        mixture._initial = math.exp(mixture.state.log_capital())
        return mixture

    @classmethod
    def from_nodes(cls, nodes: QuadratureNodes) -> "DiscreteMixture":
        return cls.from_log_weights(nodes.eps, nodes.log_base)

    def _check_atoms(self, eps: np.ndarray) -> None:
        lo, hi = self.variant.proportion_range
        if np.any(eps < lo) or np.any(eps > hi):
            raise IllegalStakeError(
                f"Átomos fuera del rango de proporciones de {self.variant.value}: [{lo}, {hi}].")

    @property
    def atoms(self) -> Iterable[Tuple[float, float]]:
        return list(zip(self.state.eps.tolist(), np.exp(self.state.log_base).tolist()))

    @property
    def initial_capital(self) -> float:
        return self._initial

    def stake(self, state: GameState) -> float:
        return self.proportion() * state.K if state.K > 0.0 else 0.0

    def observe(self, x: float) -> None:
        self.state.update(x)

    def proportion(self) -> float:
        return self.state.proportion()

    def log_integral_capital(self) -> float:
        return self.state.log_capital()

    def diagnostics(self) -> Dict[str, object]:
        return {"strategy": self.name, "atoms": self.state.size}


def canonical_one_sided(max_j: int = Config.DISCRETE_MAX_J) -> DiscreteMixture:
    """Σ_j 2^{-j-1} Π(1 + 2^{-j} x_i), truncada en j = max_j."""
    atoms = [(2.0 ** -j, 2.0 ** (-j - 1)) for j in range(1, max_j + 1)]
    return DiscreteMixture(atoms, GameVariant.OUFG)


def canonical_two_sided(max_j: int = Config.DISCRETE_MAX_J,
                        variant: GameVariant = GameVariant.BFG) -> DiscreteMixture:
    """Versión simétrica con átomos en ±2^{-j}; solo tiene sentido en BFG."""
    if variant is not GameVariant.BFG:
        raise IllegalStakeError("La mezcla de dos lados requiere proporciones negativas (solo BFG).")
    atoms = []
    for j in range(1, max_j + 1):
        atoms.append((2.0 ** -j, 2.0 ** (-j - 1)))
        atoms.append((-(2.0 ** -j), 2.0 ** (-j - 1)))
    return DiscreteMixture(atoms, variant)


class BayesMixture(SkepticStrategy):
    """
    Mezcla bayesiana continua ∫ π(ε) Π(1 + ε x_i) dε sobre una regla de cuadratura
    fija. La regla gruesa embebida se actualiza en paralelo como diagnóstico.
    """

    name = "bayes"

    def __init__(self, prior: Prior, quad: Optional[QuadratureSpec] = None):
        super().__init__(GameVariant.OUFG)
        self.prior = prior
        self.quad = (quad or QuadratureSpec()).validate()
        self.nodes, self.coarse_nodes = build_node_pair(prior, self.quad)
        self.state = MixtureState(self.nodes.eps, self.nodes.log_base)
        self.coarse = MixtureState(self.coarse_nodes.eps, self.coarse_nodes.log_base)
        self._initial = math.exp(self.state.log_capital())
        logger.info(f"Mezcla bayesiana ({prior.family.value}) con {self.nodes.size} nodos; "
                    f"K0 = {self._initial!r}.")

    @property
    def initial_capital(self) -> float:
        return self._initial

    @property
    def ruined(self) -> bool:
        return self.state.ruined

    def stake(self, state: GameState) -> float:
        if state.K <= 0.0 or self.state.ruined:
            return 0.0
        return self.proportion() * state.K

    def observe(self, x: float) -> None:
        self.state.update(x)
        self.coarse.update(x)
        if self.state.ruined:
            logger.warning(f"Mezcla bayesiana arruinada en la ronda {self.state.round}.")

    def proportion(self) -> float:
        return self.state.proportion()

    def log_integral_capital(self) -> float:
        return self.state.log_capital()

    def quadrature_error(self) -> float:
        """|ln K_fina - ln K_gruesa| con un piso relativo de redondeo."""
        fine = self.state.log_capital()
        coarse = self.coarse.log_capital()
        if not (math.isfinite(fine) and math.isfinite(coarse)):
            return 0.0 if fine == coarse else math.inf
        return max(abs(fine - coarse), Config.QUAD_ERROR_FLOOR * (1.0 + abs(fine)))

    def as_discrete(self) -> DiscreteMixture:
        """Los mismos nodos vistos como mezcla discreta."""
        return DiscreteMixture.from_nodes(self.nodes)

    def diagnostics(self) -> Dict[str, object]:
        return {
            "strategy": self.name,
            "prior": self.prior.family.value,
            "nodes": self.nodes.size,
            "quadrature_error": self.quadrature_error(),
        }


# ==========================================================================
# KRONECKER
# ==========================================================================

class Kronecker(SkepticStrategy):
    """
    M_n = 1/b_n sin importar el capital. El capital inicial es Z = Σ 1/b_n (o la
    suma parcial hasta el horizonte), de modo que K_n coincide con el proceso
    auxiliar Y_n = Z + Σ_{i<=n} x_i / b_i.
    """

    name = "kronecker"

    def __init__(self, b: SequenceSpec, horizon: int, surrogate_z: Optional[float] = None):
        super().__init__(GameVariant.OUFG)
        if horizon < 1:
            raise IllegalStakeError("El horizonte debe ser al menos 1.")
        self.b = b
        self.b_values = b.values(horizon)
        if np.any(self.b_values <= 0.0) or np.any(np.diff(self.b_values) < 0.0):
            raise IllegalStakeError("b_n debe ser positiva y no decreciente.")
        if surrogate_z is not None:
            self.Z, self.z_exact = float(surrogate_z), False
        else:
            self.Z, self.z_exact = b.reciprocal_sum(horizon)
        if not self.z_exact:
            logger.info(f"Kronecker: Z = {self.Z!r} es una suma parcial o cota; Y_n es diagnóstico.")
        self.Y = self.Z
        self.n = 0

    @property
    def initial_capital(self) -> float:
        return self.Z

    def stake(self, state: GameState) -> float:
        return 1.0 / self.b_values[state.n]

    def observe(self, x: float) -> None:
        self.Y += x / self.b_values[self.n]
        self.n += 1

    def diagnostics(self) -> Dict[str, object]:
        return {"strategy": self.name, "b": self.b.source, "Z": self.Z, "Z_exact": self.z_exact, "Y": self.Y}
