"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Cuadratura de la Mezcla (MixtureQuadrature.py)
DESCRIPCIÓN: Nodos y pesos de Gauss-Legendre compuesto en t = ln(1/ε) sobre paneles
             de ancho geométrico creciente, con los quiebres de la densidad como
             bordes de panel, regla gruesa embebida para estimar el error y un
             átomo de cola que lleva la masa de π por debajo de e^{-T_max}.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from Config.Config import Config
from Herramientas.GameErrors import ConfigError
from .PriorDensity import Prior

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureSpec:
    tmax: float = Config.QUAD_TMAX
    panels: int = Config.QUAD_PANELS
    points: int = Config.QUAD_POINTS
    growth: float = Config.QUAD_PANEL_GROWTH
    coarse_points: int = Config.QUAD_COARSE_POINTS
    tail_atom: bool = True

    def validate(self) -> "QuadratureSpec":
        if not self.tmax > 0.0:
            raise ConfigError("quad.tmax", "debe ser positivo")
        if self.panels < 1:
            raise ConfigError("quad.panels", "debe ser al menos 1")
        if self.points < 2:
            raise ConfigError("quad.points", "debe ser al menos 2")
        if self.panels * self.points < Config.QUAD_MIN_NODES:
            raise ConfigError("quad.panels", f"se requieren al menos {Config.QUAD_MIN_NODES} nodos "
                                             f"(panels * points = {self.panels * self.points})")
        if not self.growth >= 1.0:
            raise ConfigError("quad.growth", "debe ser >= 1")
        if not 1 <= self.coarse_points < self.points:
            raise ConfigError("quad.coarse_points", "debe estar entre 1 y points - 1")
        return self

    def refined(self) -> "QuadratureSpec":
        """La misma partición con el doble de puntos por panel."""
        return QuadratureSpec(self.tmax, self.panels, 2 * self.points, self.growth,
                              self.coarse_points, self.tail_atom)


@dataclass(frozen=True)
class QuadratureNodes:
    """
    Nodos ε_j = e^{-t_j} con ln π(ε_j) y ln(w_j ε_j), de modo que
    Σ_j π(ε_j) w_j ε_j f(ε_j) ≈ ∫₀¹ π(ε) f(ε) dε.
    """
    t: np.ndarray
    eps: np.ndarray
    log_prior: np.ndarray
    log_weight: np.ndarray

    @property
    def size(self) -> int:
        return int(self.t.size)

    @property
    def log_base(self) -> np.ndarray:
        return self.log_prior + self.log_weight


@lru_cache(maxsize=16)
def _rule(points: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(points)
    return x, w


def panel_edges(spec: QuadratureSpec, breakpoints: Tuple[float, ...] = ()) -> np.ndarray:
    """Bordes [0, ..., T_max] con anchos w0·g^k y los quiebres interiores insertados."""
    if spec.growth == 1.0:
        widths = np.full(spec.panels, spec.tmax / spec.panels)
    else:
        w0 = spec.tmax * (spec.growth - 1.0) / (spec.growth ** spec.panels - 1.0)
        widths = w0 * spec.growth ** np.arange(spec.panels)
    edges = np.concatenate(([0.0], np.cumsum(widths)))
    edges[-1] = spec.tmax
    inner = [b for b in breakpoints if 0.0 < b < spec.tmax]
    if inner:
        edges = np.union1d(edges, inner)
    return edges


def _panel_nodes(edges: np.ndarray, points: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = _rule(points)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    t = (lo + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return t, weights


def build_nodes(prior: Prior, spec: QuadratureSpec, points: Optional[int] = None) -> QuadratureNodes:
    """
    Construye los nodos de la regla (fina por defecto, o con `points` por panel).
    """
    spec.validate()
    edges = panel_edges(spec, prior.breakpoints)
    t, weights = _panel_nodes(edges, points or spec.points)

    log_prior = np.asarray(prior.log_density_t(t), dtype=float)
    log_weight = np.log(weights) - t

    if spec.tail_atom:
        log_tail = prior.log_mass_below_t(spec.tmax)
        if math.isfinite(log_tail):
            log_prior_tail = float(prior.log_density_t(spec.tmax))
            t = np.append(t, spec.tmax)
            log_prior = np.append(log_prior, log_prior_tail)
            log_weight = np.append(log_weight, log_tail - log_prior_tail)

    if not np.all(np.isfinite(log_prior)):
        raise ConfigError("prior", "la densidad no es finita en algún nodo de cuadratura")

    logger.debug(f"Cuadratura {prior.family.value}: {t.size} nodos, {edges.size - 1} paneles.")
    return QuadratureNodes(t=t, eps=np.exp(-t), log_prior=log_prior, log_weight=log_weight)


def build_node_pair(prior: Prior, spec: QuadratureSpec) -> Tuple[QuadratureNodes, QuadratureNodes]:
    """Regla fina y regla gruesa embebida sobre los mismos paneles."""
    return build_nodes(prior, spec), build_nodes(prior, spec, points=spec.coarse_points)
