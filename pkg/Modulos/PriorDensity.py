"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Densidades a Priori (PriorDensity.py)
DESCRIPCIÓN: Familias de densidades no normalizadas π sobre (0,1] (uniforme, potencia,
             LIL, EFKP, inclinada por escalera y tabulada) representadas en la
             coordenada logarítmica t = ln(1/ε), su masa acumulada y la construcción
             de la escalera c(ε).
"""

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import logsumexp

from Config.Config import Config
from Herramientas.GameErrors import ConfigError, PriorDomainError
from Herramientas.IteratedLog import exp_tower, log_tower, log_tower_array

logger = logging.getLogger(__name__)

ArrayLike = np.ndarray


class PriorFamily(Enum):
    UNIFORM = "uniform"
    POWER = "power"
    LIL = "lil"
    EFKP = "efkp"
    TILTED = "tilted"
    CUSTOM = "custom"
    FUNCTIONAL = "functional"


def _out(values: np.ndarray, like) -> object:
    """Devuelve float si la entrada era escalar."""
    return float(values) if np.ndim(like) == 0 else values


# Mayor r = ln t con t = e^r representable en float64.
_LOG_T_MAX = math.log(np.finfo(float).max) - 1.0
_TAIL_SLOPE_STEP = 0.01


def _log_quad(log_f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    """ln ∫_lo^hi exp(log_f), con intervalo finito y muestras concentradas cerca de lo."""
    samples = lo + (hi - lo) * np.linspace(0.0, 1.0, 65) ** 2
    sampled = log_f(samples)
    sampled = sampled[np.isfinite(sampled)]
    if sampled.size == 0:
        return -math.inf
    shift = float(np.max(sampled))

    def integrand(v):
        with np.errstate(over="ignore", invalid="ignore"):
            value = float(np.exp(log_f(v) - shift))
        return value if math.isfinite(value) else 0.0

    value, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-15, epsrel=1e-12,
                              points=list(samples[1:-1:4]))
    if value <= 0.0:
        return -math.inf
    return math.log(value) + shift


# ==========================================================================
# ESCALERA c(ε)
# ==========================================================================

@dataclass(frozen=True)
class StaircaseTilt:
    """
    Función escalonada c(ε) = k en [ε_{k+1}, ε_k), c = 1 en [ε_1, 1].
    Los puntos de quiebre se guardan como t_k = ln(1/ε_k), crecientes.
    """
    breakpoints_t: Tuple[float, ...]

    @property
    def depth(self) -> int:
        return len(self.breakpoints_t)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.exp(-np.asarray(self.breakpoints_t))

    def value_t(self, t):
        t_arr = np.asarray(t, dtype=float)
        k = np.searchsorted(np.asarray(self.breakpoints_t), t_arr, side="left")
        return _out(np.maximum(k, 1).astype(float), t)

    def log_value_t(self, t):
        return _out(np.log(np.asarray(self.value_t(t), dtype=float)), t)

    def value(self, eps):
        eps_arr = np.asarray(eps, dtype=float)
        with np.errstate(divide="ignore"):
            return _out(np.asarray(self.value_t(-np.log(eps_arr))), eps)


# ==========================================================================
# DENSIDAD
# ==========================================================================

@dataclass(frozen=True, eq=False)
class Prior:
    """
    Densidad no normalizada π sobre (0,1].

    En t >= t0 la densidad sigue la fórmula de la familia: ln(ε π(ε)) = shape(t) + offset.
    En t < t0 (ε > eps0) se extiende como la constante π(eps0).
    """
    family: PriorFamily
    params: Dict[str, float]
    t_pi: float
    log_delta_pi: float
    t0: float
    shape: Callable[[np.ndarray], np.ndarray]
    offset: float = 0.0
    tilt: Optional[StaircaseTilt] = None
    base: Optional["Prior"] = None
    breakpoints: Tuple[float, ...] = ()
    mass_below: Optional[Callable[[float], float]] = field(default=None, repr=False)

    # --- Metadatos de regularidad ---

    @property
    def eps_pi(self) -> float:
        return math.exp(-self.t_pi)

    @property
    def delta_pi(self) -> float:
        return math.exp(self.log_delta_pi) if self.log_delta_pi < 709.0 else math.inf

    @property
    def eps0(self) -> float:
        return math.exp(-self.t0)

    @cached_property
    def _shape_t0(self) -> float:
        return float(self.shape(np.asarray(self.t0)))

    @cached_property
    def base_log(self) -> float:
        """ln π(eps0), valor de la extensión constante."""
        return self.t0 + self._shape_t0 + self.offset

    def _formula_shape(self, t: np.ndarray) -> np.ndarray:
        tt = np.maximum(t, self.t0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.shape(tt), dtype=float)

    def _log_tilt(self, t: np.ndarray) -> np.ndarray:
        if self.tilt is None:
            return np.zeros_like(t)
        return np.asarray(self.tilt.log_value_t(t), dtype=float)

    # --- Evaluación en t = ln(1/ε) ---

    def log_density_t(self, t):
        t_arr = np.asarray(t, dtype=float)
        formula = (t_arr - self.t0) + (self._formula_shape(t_arr) - self._shape_t0)
        values = np.where(t_arr >= self.t0, formula, 0.0) + self.base_log + self._log_tilt(t_arr)
        return _out(values, t)

    def log_eps_density_t(self, t):
        """ln(ε π(ε)) en t."""
        t_arr = np.asarray(t, dtype=float)
        formula = self._formula_shape(t_arr) + self.offset
        values = np.where(t_arr >= self.t0, formula, self.base_log - t_arr) + self._log_tilt(t_arr)
        return _out(values, t)

    def log_eps_shape_t(self, t):
        """
        ln(ε π(ε)) sin la constante offset. Permite comparar diferencias de densidades
        cuyo factor de escala es astronómico (EFKP) sin cancelación catastrófica.
        """
        t_arr = np.asarray(t, dtype=float)
        const_region = (self.t0 + self._shape_t0) - t_arr
        values = np.where(t_arr >= self.t0, self._formula_shape(t_arr), const_region) + self._log_tilt(t_arr)
        return _out(values, t)

    def log_density(self, eps):
        eps_arr = np.asarray(eps, dtype=float)
        if np.any(eps_arr <= 0.0) or np.any(eps_arr > 1.0):
            raise PriorDomainError("La densidad solo está definida en (0, 1].")
        return _out(np.asarray(self.log_density_t(-np.log(eps_arr))), eps)

    def density(self, eps):
        return _out(np.exp(np.asarray(self.log_density(eps))), eps)

    # --- Masa ---

    def log_mass_below_t(self, t: float) -> float:
        """ln ∫₀^{e^{-t}} π(ε) dε."""
        if self.mass_below is not None:
            return float(self.mass_below(float(t)))
        return self.quadrature_log_mass(float(t), math.inf)

    def log_total_mass(self) -> float:
        return self.log_mass_below_t(0.0)

    def quadrature_log_mass(self, t_lo: float, t_hi: float = math.inf) -> float:
        """
        ln ∫ π(ε) dε para ε ∈ [e^{-t_hi}, e^{-t_lo}] por cuadratura adaptativa.

        Se integra exp(ln(επ)(s)) ds; por encima de s = 1 se usa r = ln s para
        capturar colas lentas como 1/(s ln² s). Más allá del mayor s representable
        la cola en r se completa en forma cerrada con una ley de potencia.
        """
        cuts = {t_lo, t_hi, 1.0, self.t0, *self.breakpoints}
        cuts = sorted(c for c in cuts if t_lo <= c <= t_hi)
        pieces = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, b in zip(cuts, cuts[1:]):
                if b <= a:
                    continue
                piece = self._log_piece(a, b)
                if piece == math.inf:
                    return math.inf
                if piece > -math.inf:
                    pieces.append(piece)
        if not pieces:
            return -math.inf
        return float(logsumexp(pieces))

    def _log_piece(self, a: float, b: float) -> float:
        if b <= 1.0:
            def log_f(s):
                return np.asarray(self.log_eps_density_t(s), dtype=float)

            return _log_quad(log_f, a, b)

        lo = math.log(a)
        hi = math.log(b) if math.isfinite(b) else math.inf
        top = min(hi, _LOG_T_MAX)
        pieces = []
        if top > lo:
            pieces.append(_log_quad(self._log_f_r, lo, top))
        if hi > top:
            pieces.append(self._log_power_tail(max(lo, top), hi))
        if any(p == math.inf for p in pieces):
            return math.inf
        pieces = [p for p in pieces if p > -math.inf]
        return float(logsumexp(pieces)) if pieces else -math.inf

    def _log_f_r(self, r):
        """ln del integrando en r = ln t: ln(ε π) + r."""
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            return np.asarray(self.log_eps_density_t(np.exp(r)), dtype=float) + r

    def _log_power_tail(self, r0: float, r_hi: float) -> float:
        """
        Cola ∫_{r0}^{r_hi} en r = ln t más allá del mayor t representable.
        El integrando se extrapola como potencia g(r0)·(r/r0)^k con k estimado en r0.
        """
        g0 = float(self._log_f_r(r0))
        if not math.isfinite(g0):
            return -math.inf
        g1 = float(self._log_f_r(r0 * math.exp(-_TAIL_SLOPE_STEP)))
        if not math.isfinite(g1):
            return -math.inf
        k1 = (g0 - g1) / _TAIL_SLOPE_STEP + 1.0
        span = math.log(r_hi / r0) if math.isfinite(r_hi) else math.inf
        if k1 == 0.0:
            return g0 + math.log(r0) + math.log(span)
        x = k1 * span
        if x == math.inf:
            logger.warning(f"⚠️ Cola no integrable para {self.family.value} (pendiente {k1 - 1.0:.4g}).")
            return math.inf
        ratio = math.expm1(x) / k1
        return g0 + math.log(r0) + math.log(ratio)

    # --- Transformaciones ---

    def rescaled(self, factor: float) -> "Prior":
        """κ·π, equivalente a π en la relación ~0."""
        if not factor > 0.0:
            raise PriorDomainError("El factor de escala debe ser positivo.")
        log_factor = math.log(factor)
        mass = None
        if self.mass_below is not None:
            base_mass = self.mass_below

            def mass(t, _base=base_mass):
                return _base(t) + log_factor
        params = dict(self.params)
        params["scale"] = params.get("scale", 1.0) * factor
        return replace(self, params=params, offset=self.offset + log_factor,
                       log_delta_pi=self.log_delta_pi + log_factor, mass_below=mass)

    def describe(self) -> Dict[str, object]:
        return {
            "family": self.family.value,
            "params": {k: v for k, v in self.params.items()},
            "t_pi": self.t_pi,
            "log_delta_pi": self.log_delta_pi,
            "t0": self.t0,
            "tilt_depth": self.tilt.depth if self.tilt else 0,
        }


# ==========================================================================
# FÁBRICAS
# ==========================================================================

def certified_log_delta(log_density_t: Callable, t_pi: float,
                        points: int = Config.DELTA_GRID_POINTS) -> float:
    """
    Ínfimo de ln π sobre (0, ε_π) estimado en una malla geométrica en ε hasta
    ε = 1e-30 (o una malla en t hasta 10·t_π si ε_π no es representable).
    """
    if t_pi < Config.DELTA_GRID_TMAX:
        grid = np.linspace(t_pi, Config.DELTA_GRID_TMAX, points)
    else:
        grid = np.geomspace(t_pi, Config.VALIDATION_DEEP_FACTOR * t_pi, points)
    return float(np.min(log_density_t(grid)))


def make_uniform() -> Prior:
    return Prior(
        family=PriorFamily.UNIFORM,
        params={},
        t_pi=0.0,
        log_delta_pi=0.0,
        t0=0.0,
        shape=lambda t: -np.asarray(t, dtype=float),
        mass_below=lambda t: -t,
    )


def make_power(a: float) -> Prior:
    if not 0.0 < a < 1.0:
        raise PriorDomainError(f"El exponente de la densidad potencia debe estar en (0,1), recibido {a!r}.")
    one_minus_a = 1.0 - a
    log_norm = math.log(one_minus_a)
    return Prior(
        family=PriorFamily.POWER,
        params={"a": float(a)},
        t_pi=0.0,
        log_delta_pi=0.0,
        t0=0.0,
        shape=lambda t: -one_minus_a * np.asarray(t, dtype=float),
        mass_below=lambda t: -one_minus_a * t - log_norm,
    )


def make_lil(eps0: Optional[float] = None) -> Prior:
    """π(ε) = 1 / (ε ln(1/ε) (ln ln(1/ε))²) en (0, eps0), constante en [eps0, 1]."""
    if eps0 is None:
        eps0 = math.exp(-math.e * Config.LIL_EPS0_FACTOR)
    if not 0.0 < eps0 < math.exp(-math.e):
        raise PriorDomainError(f"eps0 debe estar en (0, e^-e) para la densidad LIL, recibido {eps0!r}.")
    t0 = -math.log(eps0)

    def shape(t):
        t = np.asarray(t, dtype=float)
        return -np.log(t) - 2.0 * np.log(np.log(t))

    base_log = t0 - math.log(t0) - 2.0 * math.log(math.log(t0))
    log_formula_mass_t0 = -math.log(math.log(t0))

    def mass(t):
        if t >= t0:
            return -math.log(math.log(t))
        log_const = base_log - t + math.log(-math.expm1(-(t0 - t)))
        return float(np.logaddexp(log_const, log_formula_mass_t0))

    prior = Prior(
        family=PriorFamily.LIL,
        params={"eps0": float(eps0)},
        t_pi=t0,
        log_delta_pi=0.0,
        t0=t0,
        shape=shape,
        breakpoints=(t0,),
        mass_below=mass,
    )
    return replace(prior, log_delta_pi=certified_log_delta(prior.log_density_t, t0))


def make_efkp(b: int, gamma: float, eps0: Optional[float] = None,
              log_inv_eps0: Optional[float] = None) -> Prior:
    """
    π(ε) = 1 / (ε L1 L2 ... L_{b-1} L_b^{1+γ}), L_k = ln_k(1/ε), en (0, eps0).

    Para b >= 4 la región de la fórmula empieza en t ~ 1e38, así que la densidad se
    guarda dividida por π(eps0): vale 1 en todo ε representable y el factor queda en
    params["log_scale"].
    """
    if int(b) != b or b < 4:
        raise PriorDomainError(f"b debe ser un entero >= 4, recibido {b!r}.")
    if not gamma > 0.0:
        raise PriorDomainError(f"gamma debe ser positivo, recibido {gamma!r}.")
    b = int(b)

    if log_inv_eps0 is not None:
        t0 = float(log_inv_eps0)
    elif eps0 is not None:
        if not 0.0 < eps0 < 1.0:
            raise PriorDomainError(f"eps0 fuera de (0,1): {eps0!r}.")
        t0 = -math.log(eps0)
    else:
        t0 = exp_tower(Config.EFKP_LEVEL_AT_EPS0, b - 1)
        if not math.isfinite(t0):
            raise PriorDomainError(f"ln(1/eps0) no es representable para b={b}", depth=b)

    levels = log_tower(t0, b + 1, strict=True)

    def shape(t):
        lv = log_tower_array(t, b + 1)
        return -sum(lv[1:b]) - (1.0 + gamma) * lv[b]

    logger.debug(f"Torre EFKP en eps0: {levels}.")
    log_scale = t0 + float(shape(np.asarray(t0)))
    offset = -log_scale

    def mass(t):
        def formula(s):
            level_b = log_tower(s, b, strict=False)[-1]
            return -gamma * math.log(level_b) - math.log(gamma) + offset
        if t >= t0:
            return formula(t)
        log_const = -t + math.log(-math.expm1(-(t0 - t)))
        return float(np.logaddexp(log_const, formula(t0)))

    return Prior(
        family=PriorFamily.EFKP,
        params={"b": float(b), "gamma": float(gamma), "log_inv_eps0": t0, "log_scale": log_scale},
        t_pi=t0,
        log_delta_pi=0.0,
        t0=t0,
        shape=shape,
        offset=offset,
        mass_below=mass,
    )


def make_custom(eps_values: Sequence[float], density_values: Sequence[float],
                eps_pi: float, delta_pi: float) -> Prior:
    """Densidad tabulada, interpolada linealmente en (ln ε, ln π) y constante fuera de la tabla."""
    eps_arr = np.asarray(eps_values, dtype=float)
    dens_arr = np.asarray(density_values, dtype=float)
    if eps_arr.shape != dens_arr.shape or eps_arr.size < 2:
        raise PriorDomainError("La tabla necesita al menos dos pares (ε, π(ε)).")
    if np.any(eps_arr <= 0.0) or np.any(eps_arr > 1.0) or np.any(dens_arr <= 0.0):
        raise PriorDomainError("La tabla requiere ε en (0,1] y π(ε) > 0.")
    if not (0.0 < eps_pi <= 1.0 and delta_pi > 0.0):
        raise PriorDomainError("eps_pi y delta_pi declarados fuera de rango.")

    order = np.argsort(-np.log(eps_arr))
    table_t = -np.log(eps_arr)[order]
    table_log = np.log(dens_arr)[order]

    def shape(t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, table_t, table_log) - t

    return Prior(
        family=PriorFamily.CUSTOM,
        params={"points": float(eps_arr.size)},
        t_pi=-math.log(eps_pi),
        log_delta_pi=math.log(delta_pi),
        t0=0.0,
        shape=shape,
        breakpoints=tuple(float(v) for v in table_t if v > 0.0),
    )


def load_custom_table(path: str, eps_pi: float, delta_pi: float) -> Prior:
    """Lee un CSV con columnas epsilon,pi (cabecera opcional)."""
    eps_values, dens_values = [], []
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            for row in csv.reader(handle):
                if len(row) < 2:
                    continue
                try:
                    eps_values.append(float(row[0]))
                    dens_values.append(float(row[1]))
                except ValueError:
                    continue
    except OSError as e:
        raise ConfigError("prior.table", f"no se pudo leer '{path}': {e}") from e
    logger.info(f"Densidad tabulada cargada desde {path} ({len(eps_values)} filas).")
    return make_custom(eps_values, dens_values, eps_pi, delta_pi)


def _tilted_mass_below(base: Prior, tilt: StaircaseTilt) -> Optional[Callable[[float], float]]:
    """
    Masa exacta de c·π por escalones: Σ_k c_k·(M(t_k) − M(t_{k+1})), con M la masa
    acumulada de la base y M(∞) = 0.
    """
    if base.mass_below is None:
        return None
    steps = tuple(tilt.breakpoints_t)

    def mass_below(t: float) -> float:
        lo_edges = [t] + [b for b in steps if b > t]
        hi_edges = lo_edges[1:] + [math.inf]
        terms = []
        for lo, hi in zip(lo_edges, hi_edges):
            log_lo = base.log_mass_below_t(lo)
            log_hi = base.log_mass_below_t(hi) if math.isfinite(hi) else -math.inf
            if not log_lo > log_hi:
                continue
            segment = log_lo + math.log(-math.expm1(log_hi - log_lo))
            inner = lo + 1.0 if not math.isfinite(hi) else 0.5 * (lo + hi)
            terms.append(float(tilt.log_value_t(inner)) + segment)
        return float(logsumexp(terms)) if terms else -math.inf

    return mass_below


def make_tilted(base: Prior, tilt: StaircaseTilt) -> Prior:
    """c(ε)·π(ε). ε·c·π puede dejar de ser creciente; el validador lo exime."""
    return Prior(
        family=PriorFamily.TILTED,
        params=dict(base.params, base_family=base.family.value),
        t_pi=base.t_pi,
        log_delta_pi=base.log_delta_pi,
        t0=base.t0,
        shape=base.shape,
        offset=base.offset,
        tilt=tilt,
        base=base,
        breakpoints=tuple(sorted(set(base.breakpoints) | set(tilt.breakpoints_t))),
        mass_below=_tilted_mass_below(base, tilt),
    )


def build_staircase_tilt(prior: Prior, k_max: int = Config.STAIRCASE_KMAX) -> StaircaseTilt:
    """
    ε_k tal que ∫₀^{ε_k} π = 2^{-k} ∫₀¹ π, resuelto con brentq sobre la masa acumulada.

    Se trunca antes de k_max cuando ε_k deja de ser representable en la coordenada t.
    """
    log_total = prior.log_total_mass()
    if not math.isfinite(log_total):
        raise PriorDomainError("La masa total de la densidad no es finita.")

    breakpoints = []
    t_prev = 0.0
    for k in range(1, k_max + 1):
        target = log_total - k * math.log(2.0)

        def gap(t, _target=target):
            return prior.log_mass_below_t(t) - _target

        if not gap(t_prev) > 0.0:
            raise PriorDomainError(
                f"La masa acumulada no es estrictamente creciente cerca de t={t_prev!r} (k={k}).")

        hi = max(2.0 * t_prev, 1.0)
        while gap(hi) > 0.0:
            hi *= 2.0
            if hi > 1e300:
                break
        if gap(hi) > 0.0:
            logger.warning(f"Escalera truncada en k={k - 1}: ε_k no representable.")
            break

        t_k = brentq(gap, t_prev, hi, xtol=1e-14, rtol=4.0 * np.finfo(float).eps, maxiter=500)
        breakpoints.append(float(t_k))
        t_prev = t_k

    logger.debug(f"Escalera construida para {prior.family.value}: {len(breakpoints)} escalones.")
    return StaircaseTilt(breakpoints_t=tuple(breakpoints))


def make_prior(family: str, **params) -> Prior:
    """Fábrica usada por la configuración: prior = power, prior.a = 0.5, etc."""
    name = family.strip().lower()
    if name == PriorFamily.UNIFORM.value:
        return make_uniform()
    if name == PriorFamily.POWER.value:
        return make_power(float(params.get("a", 0.5)))
    if name == PriorFamily.LIL.value:
        eps0 = params.get("eps0")
        return make_lil(float(eps0) if eps0 is not None else None)
    if name == PriorFamily.EFKP.value:
        return make_efkp(int(params.get("b", 4)), float(params.get("gamma", 0.5)),
                         eps0=params.get("eps0"), log_inv_eps0=params.get("log_inv_eps0"))
    if name == PriorFamily.CUSTOM.value:
        if "table" not in params:
            raise ConfigError("prior.table", "la densidad custom requiere una tabla CSV")
        return load_custom_table(str(params["table"]), float(params.get("eps_pi", 0.5)),
                                 float(params.get("delta", 1.0)))
    raise ConfigError("prior", f"familia desconocida '{family}'")
