"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Cálculo de Clases Superiores (UpperClassCalculus.py)
DESCRIPCIÓN: Funciones de clase superior ψ en la coordenada u = ln λ, la prueba integral
             I(ψ) = ∫ ψ e^{-ψ²/2} dλ/λ con veredicto de tres vías, los funcionales
             F (ψ -> densidad) y G (densidad -> ψ), sus composiciones con chequeo
             cruzado de formas cerradas y las relaciones de equivalencia ~0 / ~∞.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from Config.Config import Config
from Herramientas.GameErrors import FunctionalDomainError, InvariantViolationError, PriorDomainError
from Herramientas.IteratedLog import exp_tower, iterated_log, log_tower_array, tower
from .PriorDensity import Prior, PriorFamily

logger = logging.getLogger(__name__)

_MACHINE_EPS = float(np.finfo(float).eps)


class UpperClassFamily(Enum):
    EFKP = "efkp"
    SQRT_LOGLOG = "sqrt_loglog"
    REFERENCE = "reference"
    CONSTANT = "constant"
    SHIFTED = "shifted"
    MINIMUM = "minimum"
    COMPOSED = "composed"
    CUSTOM = "custom"


def _out(values: np.ndarray, like) -> object:
    return float(values) if np.ndim(like) == 0 else values


# ==========================================================================
# FUNCIÓN DE CLASE SUPERIOR
# ==========================================================================

@dataclass(frozen=True, eq=False)
class UpperClassFunction:
    """
    ψ(λ) con λ = e^u. half_sq(u) - log_offset = ψ²/2; separar la constante evita
    perder precisión cuando ψ² es astronómico (ψ derivada de densidades EFKP).
    """
    family: UpperClassFamily
    params: Dict[str, object]
    psi_fn: Callable[[np.ndarray], np.ndarray]
    half_sq_fn: Callable[[np.ndarray], np.ndarray]
    u_min: float
    log_delta_psi: float = -math.inf
    log_offset: float = 0.0
    log_weighted_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    @property
    def M_psi(self) -> float:
        return math.exp(self.u_min) if self.u_min < 709.0 else math.inf

    @property
    def delta_psi(self) -> float:
        return math.exp(self.log_delta_psi) if self.log_delta_psi < 709.0 else math.inf

    def _clip(self, u) -> np.ndarray:
        return np.maximum(np.asarray(u, dtype=float), self.u_min)

    def psi_u(self, u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.asarray(self.psi_fn(self._clip(u)), dtype=float), u)

    def psi(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        if np.any(lam_arr <= 0.0):
            raise FunctionalDomainError("ψ solo está definida para λ > 0.")
        return _out(np.asarray(self.psi_u(np.log(lam_arr))), lam)

    def half_sq_u(self, u):
        """ψ²/2 + log_offset."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.asarray(self.half_sq_fn(self._clip(u)), dtype=float), u)

    def rel_u(self, u):
        """ln ψ - ψ²/2 sin la constante log_offset."""
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.log(np.asarray(self.psi_u(u))) - np.asarray(self.half_sq_u(u))
        return _out(values, u)

    def log_integrand_u(self, u):
        """ln(ψ e^{-ψ²/2}), el integrando de I(ψ) en la variable u."""
        return _out(np.asarray(self.rel_u(u)) + self.log_offset, u)

    def log_weighted_u(self, u):
        """ln(λ ψ e^{-ψ²/2}), la cantidad acotada por δ_ψ."""
        if self.log_weighted_fn is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                return _out(np.asarray(self.log_weighted_fn(self._clip(u)), dtype=float), u)
        u_arr = self._clip(u)
        return _out(u_arr + np.asarray(self.rel_u(u_arr)) + self.log_offset, u)

    # --- Construcciones derivadas ---

    def shifted(self, kappa: float) -> "UpperClassFunction":
        """√(ψ² + 2 ln κ): exp(ψ̃²/2) = κ exp(ψ²/2)."""
        return make_shifted(self, kappa)

    def minimum(self, other: "UpperClassFunction") -> "UpperClassFunction":
        return make_minimum(self, other)

    def describe(self) -> Dict[str, object]:
        return {"family": self.family.value, "params": dict(self.params),
                "u_min": self.u_min, "log_delta_psi": self.log_delta_psi}


def upper_grid_u(u_min: float, points: int = Config.GRID_POINTS) -> np.ndarray:
    """Malla en u: tramo lineal desde u_min y tramo geométrico hasta 1e300."""
    shallow = np.linspace(u_min, u_min + 64.0, points)
    deep = np.geomspace(max(u_min, 1.0), Config.INTEGRAL_TEST_U_HI, points)
    return np.unique(np.concatenate((shallow, deep)))


def certified_log_delta_psi(psi: UpperClassFunction, points: int = Config.DELTA_GRID_POINTS) -> float:
    # Incluye la malla de validación para que el mínimo certificado nunca la supere
    grid = np.union1d(upper_grid_u(psi.u_min, points), upper_grid_u(psi.u_min, Config.GRID_POINTS))
    values = np.asarray(psi.log_weighted_u(grid), dtype=float)
    return float(np.min(values))


def _finish(psi: UpperClassFunction) -> UpperClassFunction:
    """Completa δ_ψ con el mínimo certificado sobre la malla."""
    if math.isfinite(psi.log_delta_psi):
        return psi
    return _replace(psi, log_delta_psi=certified_log_delta_psi(psi))


def _replace(psi: UpperClassFunction, **changes) -> UpperClassFunction:
    from dataclasses import replace
    return replace(psi, **changes)


# ==========================================================================
# FAMILIAS
# ==========================================================================

def make_sqrt_loglog(c: float = 2.0) -> UpperClassFunction:
    """ψ(λ) = √(c ln₂ λ), definida para λ > e^e (ln₂ λ > 1)."""
    if not c > 0.0:
        raise FunctionalDomainError(f"c debe ser positivo, recibido {c!r}.")

    def half_sq(u):
        return 0.5 * c * np.log(u)

    return _finish(UpperClassFunction(
        family=UpperClassFamily.SQRT_LOGLOG,
        params={"c": float(c)},
        psi_fn=lambda u: np.sqrt(2.0 * half_sq(u)),
        half_sq_fn=half_sq,
        u_min=math.e,
    ))


def make_reference() -> UpperClassFunction:
    """ψ(λ) = √(2 ln₂ λ + 4 ln₃ λ)."""

    def half_sq(u):
        l2 = np.log(u)
        return l2 + 2.0 * np.log(l2)

    return _finish(UpperClassFunction(
        family=UpperClassFamily.REFERENCE,
        params={},
        psi_fn=lambda u: np.sqrt(2.0 * half_sq(u)),
        half_sq_fn=half_sq,
        u_min=math.e,
    ))


def make_efkp_psi(b: int = 4, gamma: float = 0.5) -> UpperClassFunction:
    """
    ψ(λ) = √(2 ln₂ + 3 ln₃ + 2 ln₄ + ... + 2 ln_b + 2(1+2γ) ln_{b+1}) en u = ln λ.
    Solo b = 4 tiene dominio representable en u (ln λ > e^{e^e}).
    """
    if int(b) != b or b < 4:
        raise PriorDomainError(f"b debe ser un entero >= 4, recibido {b!r}.")
    if not gamma > 0.0:
        raise FunctionalDomainError(f"gamma debe ser positivo, recibido {gamma!r}.")
    b = int(b)
    u_min = tower(b - 1)
    if not math.isfinite(u_min):
        raise PriorDomainError(f"el dominio de ψ EFKP no es representable en u para b={b}", depth=b + 1)
    coefs = np.array([2.0, 3.0] + [2.0] * (b - 3) + [2.0 * (1.0 + 2.0 * gamma)])

    def half_sq(u):
        levels = log_tower_array(u, b + 1)[1:]
        return 0.5 * sum(c * level for c, level in zip(coefs, levels))

    return _finish(UpperClassFunction(
        family=UpperClassFamily.EFKP,
        params={"b": b, "gamma": float(gamma)},
        psi_fn=lambda u: np.sqrt(2.0 * half_sq(u)),
        half_sq_fn=half_sq,
        u_min=u_min,
    ))


def make_constant(c: float) -> UpperClassFunction:
    if not c > 0.0:
        raise FunctionalDomainError(f"la constante debe ser positiva, recibido {c!r}.")
    return _finish(UpperClassFunction(
        family=UpperClassFamily.CONSTANT,
        params={"c": float(c)},
        psi_fn=lambda u: np.full_like(np.asarray(u, dtype=float), c),
        half_sq_fn=lambda u: np.full_like(np.asarray(u, dtype=float), 0.5 * c * c),
        u_min=0.0,
    ))


def make_custom_psi(fn: Callable[[np.ndarray], np.ndarray], u_min: float) -> UpperClassFunction:
    """ψ arbitraria dada como función vectorizada de u = ln λ."""
    return _finish(UpperClassFunction(
        family=UpperClassFamily.CUSTOM,
        params={},
        psi_fn=fn,
        half_sq_fn=lambda u: 0.5 * np.asarray(fn(u), dtype=float) ** 2,
        u_min=float(u_min),
    ))


def make_shifted(psi: UpperClassFunction, kappa: float) -> UpperClassFunction:
    if not kappa > 0.0:
        raise FunctionalDomainError(f"κ debe ser positivo, recibido {kappa!r}.")
    log_kappa = math.log(kappa)
    if float(psi.half_sq_u(psi.u_min)) - psi.log_offset + log_kappa <= 0.0:
        raise FunctionalDomainError(f"ψ² + 2 ln κ no es positivo en el dominio (κ={kappa!r}).")

    def half_sq(u):
        return np.asarray(psi.half_sq_u(u)) + log_kappa

    def psi_fn(u):
        return np.sqrt(2.0 * (half_sq(u) - psi.log_offset))

    return _finish(UpperClassFunction(
        family=UpperClassFamily.SHIFTED,
        params={"kappa": float(kappa), "base": psi.family.value},
        psi_fn=psi_fn,
        half_sq_fn=half_sq,
        u_min=psi.u_min,
        log_offset=psi.log_offset,
    ))


def make_minimum(first: UpperClassFunction, second: UpperClassFunction) -> UpperClassFunction:
    """min{ψ1, ψ2} punto a punto en el dominio común."""

    def true_half_sq(u):
        h1 = np.asarray(first.half_sq_u(u)) - first.log_offset
        h2 = np.asarray(second.half_sq_u(u)) - second.log_offset
        return np.minimum(h1, h2)

    return _finish(UpperClassFunction(
        family=UpperClassFamily.MINIMUM,
        params={"first": first.family.value, "second": second.family.value},
        psi_fn=lambda u: np.sqrt(2.0 * true_half_sq(u)),
        half_sq_fn=true_half_sq,
        u_min=max(first.u_min, second.u_min),
    ))


# ==========================================================================
# PRUEBA INTEGRAL
# ==========================================================================

class IntegralVerdict(Enum):
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


@dataclass
class IntegralTestResult:
    verdict: IntegralVerdict
    depth: Optional[int]
    exponent: Optional[float]
    log_integral: float
    log_integral_grown: float
    log_increment: float
    exponents: List[Tuple[int, float]] = field(default_factory=list)

    @property
    def value(self) -> float:
        return math.exp(self.log_integral) if self.log_integral < 709.0 else math.inf

    @property
    def err(self) -> float:
        return math.exp(self.log_increment) if self.log_increment < 709.0 else math.inf

    def to_dict(self) -> Dict[str, object]:
        return {
            "verdict": self.verdict.value,
            "depth": self.depth,
            "exponent": self.exponent,
            "log_integral": self.log_integral,
            "log_integral_grown": self.log_integral_grown,
            "log_increment": self.log_increment,
            "exponents": [list(item) for item in self.exponents],
        }


def _log_quad_pieces(log_f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                     pieces: int) -> List[float]:
    """ln ∫ exp(log_f) por tramos, cada uno desplazado por su propio máximo."""
    out = []
    edges = np.linspace(lo, hi, pieces + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        samples = np.asarray(log_f(np.linspace(a, b, 17)), dtype=float)
        samples = samples[np.isfinite(samples)]
        if samples.size == 0:
            continue
        shift = float(np.max(samples))

        def integrand(v, _shift=shift):
            with np.errstate(over="ignore", invalid="ignore"):
                value = float(np.exp(log_f(np.asarray(v)) - _shift))
            return value if math.isfinite(value) else 0.0

        value, _ = integrate.quad(integrand, a, b, limit=200, epsabs=0.0, epsrel=1e-10)
        if value > 0.0:
            out.append(math.log(value) + shift)
    return out


def log_partial_integral(psi: UpperClassFunction, u_hi: float, pieces: int = 64) -> float:
    """ln ∫_{u_min}^{u_hi} ψ e^{-ψ²/2} du; por encima de u = 1 se integra en v = ln u."""
    if not u_hi > psi.u_min:
        raise FunctionalDomainError(f"u_hi={u_hi!r} debe superar u_min={psi.u_min!r}.")
    logs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if psi.u_min < 1.0:
            logs += _log_quad_pieces(lambda u: np.asarray(psi.rel_u(u)), psi.u_min, min(1.0, u_hi), 8)
        v_lo = math.log(max(psi.u_min, 1.0))
        v_hi = math.log(u_hi)
        if v_hi > v_lo:
            logs += _log_quad_pieces(lambda v: np.asarray(psi.rel_u(np.exp(v))) + v, v_lo, v_hi, pieces)
    if not logs:
        return -math.inf
    return float(logsumexp(logs)) + psi.log_offset


def _depth_exponent(psi: UpperClassFunction, depth: int, u_hi: float) -> Tuple[float, float]:
    """
    Exponente e = p + 1 del integrando en la variable v = ln_{depth-1} u, estimado por
    secante en ln v. Devuelve (e, ln v en u_hi).
    """
    u_lo = max(psi.u_min, exp_tower(1.0, depth - 1) * (1.0 + 1e-9))
    lv_b = iterated_log(u_hi, depth)
    lv_lo = iterated_log(u_lo, depth)
    delta = min(0.25 * lv_b, 0.5 * (lv_b - lv_lo))
    if not delta > 0.0:
        raise FunctionalDomainError(f"u_hi demasiado cerca del dominio en profundidad {depth}.")
    u_a = exp_tower(math.exp(lv_b - delta), depth - 1)

    def g_k(u: float) -> float:
        jacobian = sum(iterated_log(u, j - 1) for j in range(2, depth + 1))
        return float(psi.rel_u(u)) + jacobian

    p = (g_k(u_hi) - g_k(u_a)) / delta
    return p + 1.0, lv_b


def integral_test(psi: UpperClassFunction, u_hi: float = Config.INTEGRAL_TEST_U_HI,
                  growth: float = Config.INTEGRAL_TEST_GROWTH) -> IntegralTestResult:
    """
    Clasifica I(ψ) con Λ = e^{u_hi}. El exponente de la cola se ajusta en las variables
    ln_k λ para k = 1..3; las integrales parciales en Λ y Λ^growth se reportan siempre.
    """
    if not u_hi > psi.u_min:
        raise FunctionalDomainError(f"Λ debe superar M_ψ (u_hi={u_hi!r}, u_min={psi.u_min!r}).")
    if not growth > 1.0:
        raise FunctionalDomainError(f"growth debe ser > 1, recibido {growth!r}.")

    log_hi = log_partial_integral(psi, u_hi)
    log_grown = log_partial_integral(psi, u_hi * growth)
    if log_grown > log_hi:
        log_increment = log_grown + math.log(-math.expm1(log_hi - log_grown))
    else:
        log_increment = -math.inf

    exponents = []
    verdict, depth_found, exponent_found = IntegralVerdict.INCONCLUSIVE, None, None
    max_depth = Config.INTEGRAL_TEST_MAX_DEPTH
    for depth in range(1, max_depth + 1):
        try:
            exponent, log_v = _depth_exponent(psi, depth, u_hi)
        except (FunctionalDomainError, PriorDomainError, ValueError) as e:
            logger.debug(f"Prueba integral: profundidad {depth} omitida ({e}).")
            continue
        exponents.append((depth, exponent))
        decisive = abs(exponent) > Config.INTEGRAL_TEST_MARGIN
        confident = depth == max_depth or abs(exponent) * log_v > Config.INTEGRAL_TEST_LOG_CORRECTION
        if decisive and confident:
            verdict = IntegralVerdict.CONVERGENT if exponent < 0.0 else IntegralVerdict.DIVERGENT
            depth_found, exponent_found = depth, exponent
            break

    logger.debug(f"Prueba integral {psi.family.value}: {verdict.value} (profundidad {depth_found}, "
                 f"exponentes {exponents}).")
    return IntegralTestResult(verdict, depth_found, exponent_found, log_hi, log_grown,
                              log_increment, exponents)


# ==========================================================================
# SUPUESTO 2
# ==========================================================================

@dataclass
class Assumption2Report:
    family: str
    monotone_ok: bool = False
    lower_bound_ok: bool = False
    unbounded_ok: bool = False
    integral: Optional[IntegralTestResult] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        convergent = self.integral is not None and self.integral.verdict is IntegralVerdict.CONVERGENT
        return self.monotone_ok and self.lower_bound_ok and self.unbounded_ok and convergent

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "monotone_ok": self.monotone_ok,
            "lower_bound_ok": self.lower_bound_ok,
            "unbounded_ok": self.unbounded_ok,
            "integral": self.integral.to_dict() if self.integral else None,
            "warnings": list(self.warnings),
            "passed": self.passed,
        }


def validate_assumption2(psi: UpperClassFunction, grid_points: int = Config.GRID_POINTS) -> Assumption2Report:
    report = Assumption2Report(family=psi.family.value)
    grid = upper_grid_u(psi.u_min, grid_points)

    half_sq = np.asarray(psi.half_sq_u(grid), dtype=float)
    drops = np.diff(half_sq) < -Config.VALIDATION_MONOTONE_TOL * np.maximum(1.0, np.abs(half_sq[1:]))
    report.monotone_ok = not bool(np.any(drops))
    if not report.monotone_ok:
        report.warnings.append(f"⚠️ ψ decrece en {int(np.sum(drops))} puntos de la malla.")

    weighted = np.asarray(psi.log_weighted_u(grid), dtype=float)
    tol = 1e-12 * max(1.0, abs(psi.log_delta_psi))
    report.lower_bound_ok = bool(np.all(weighted >= psi.log_delta_psi - tol))
    if not report.lower_bound_ok:
        report.warnings.append("⚠️ λψ(λ)e^{-ψ²/2} cae por debajo de δ_ψ en la malla.")

    report.unbounded_ok = bool(half_sq[-1] > half_sq[0] + 1.0)
    if not report.unbounded_ok:
        report.warnings.append("⚠️ ψ no muestra crecimiento hacia infinito.")

    report.integral = integral_test(psi)
    if report.integral.verdict is not IntegralVerdict.CONVERGENT:
        report.warnings.append(f"⚠️ Prueba integral: {report.integral.verdict.value}.")

    if not report.passed:
        logger.warning(f"ψ {psi.family.value} no cumple las condiciones de clase superior: {report.warnings}.")
    return report


# ==========================================================================
# FUNCIONALES F Y G
# ==========================================================================

def apply_F(psi: UpperClassFunction, check: bool = True) -> Prior:
    """
    F[ψ](ε) = ψ(1/ε)/ε · exp(-ψ(1/ε)²/2); en t = ln(1/ε): ln(ε F) = ln ψ - ψ²/2.
    Se extiende como constante para ε > 1/M_ψ.
    """
    if check:
        report = validate_assumption2(psi)
        if not report.passed:
            raise FunctionalDomainError(
                f"ψ {psi.family.value} no pertenece a la clase superior: {'; '.join(report.warnings)}")

    t0 = psi.u_min
    t_pi = max(t0, -math.log(Config.FUNCTIONAL_EPS_PI_CAP))

    def shape(t):
        return np.asarray(psi.rel_u(t), dtype=float)

    return Prior(
        family=PriorFamily.FUNCTIONAL,
        params={"psi_family": psi.family.value, "u_min": t0},
        t_pi=t_pi,
        log_delta_pi=psi.log_delta_psi,
        t0=t0,
        shape=shape,
        offset=psi.log_offset,
        breakpoints=(t0,) if t0 > 0.0 else (),
    )


def beta_t(prior: Prior, t):
    """(β, recortado) con β = max(-2 ln(ε π(ε)), 1) en t = ln(1/ε)."""
    raw = -2.0 * np.asarray(prior.log_eps_density_t(t), dtype=float)
    return _out(np.maximum(raw, 1.0), t), _out(raw < 1.0, t)


def _first_unclamped(prior: Prior) -> float:
    grid = np.linspace(prior.t_pi, prior.t_pi + 100.0, 10_001)
    raw = -2.0 * np.asarray(prior.log_eps_density_t(grid), dtype=float)
    hits = np.nonzero(raw >= 1.0)[0]
    if hits.size == 0:
        raise FunctionalDomainError(f"β nunca supera 1 en la malla de {prior.family.value}.")
    return float(grid[hits[0]])


def apply_G(prior: Prior) -> UpperClassFunction:
    """
    G[π](λ) = √(β(1/λ) + ln β(1/λ)). M_ψ es el primer punto de la malla con β sin
    recortar; δ_ψ = δ_π.
    """
    def beta(u):
        return np.maximum(-2.0 * np.asarray(prior.log_eps_density_t(u), dtype=float), 1.0)

    def psi_fn(u):
        b = beta(u)
        return np.sqrt(b + np.log(b))

    def half_sq(u):
        b = beta(u)
        raw = -np.asarray(prior.log_eps_shape_t(u), dtype=float) + 0.5 * np.log(b)
        return np.where(b > 1.0, raw, 0.5 + prior.offset)

    def log_weighted(u):
        b = beta(u)
        return 0.5 * np.log1p(np.log(b) / b) + np.asarray(prior.log_density_t(u), dtype=float)

    return UpperClassFunction(
        family=UpperClassFamily.COMPOSED,
        params={"prior": prior.family.value},
        psi_fn=psi_fn,
        half_sq_fn=half_sq,
        u_min=max(prior.t_pi, _first_unclamped(prior)),
        log_delta_psi=prior.log_delta_pi,
        log_offset=prior.offset,
        log_weighted_fn=log_weighted,
    )


def g_identity_gap(prior: Prior, u, psi: Optional[UpperClassFunction] = None):
    """
    ln[G e^{-G²/2}] - ln[√(1 + ln β/β) (1/λ) π(1/λ)], evaluado con ψ directa.
    """
    psi = psi or apply_G(prior)
    u_arr = np.asarray(u, dtype=float)
    g = np.asarray(psi.psi_u(u_arr), dtype=float)
    lhs = np.log(g) - 0.5 * g * g
    b, _ = beta_t(prior, u_arr)
    rhs = 0.5 * np.log1p(np.log(b) / b) + np.asarray(prior.log_eps_density_t(u_arr), dtype=float)
    return _out(lhs - rhs, u)


# ==========================================================================
# COMPOSICIONES
# ==========================================================================

@dataclass(frozen=True)
class CompositionResult:
    log_closed: float
    log_direct: float
    log_ratio: float
    beta: float
    clamped: bool

    @property
    def value(self) -> float:
        return math.exp(self.log_closed) if self.log_closed < 709.0 else math.inf

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio)


def _consistency_tol(scale: float) -> float:
    return Config.COMPOSITION_REL_TOL + 8.0 * _MACHINE_EPS * abs(scale)


def compose_FG_t(prior: Prior, t: float, psi: Optional[UpperClassFunction] = None) -> CompositionResult:
    """
    F[G[π]] en t = ln(1/ε): forma cerrada π·√((β + ln β)/β) contra la composición directa.
    """
    psi = psi or apply_G(prior)
    b, clamped = beta_t(prior, t)
    log_pi = float(prior.log_density_t(t))
    log_factor = 0.5 * math.log1p(math.log(b) / b)
    log_closed = log_pi + log_factor

    g = float(psi.psi_fn(np.asarray(t)))
    log_direct = math.log(g) - 0.5 * g * g + t

    if not clamped:
        gap = abs(log_direct - log_closed)
        if gap > _consistency_tol(abs(t) + b):
            message = f"F[G[π]] directa y cerrada difieren en t={t!r}: {log_direct!r} vs {log_closed!r}"
            logger.error(message)
            raise InvariantViolationError(message)
    return CompositionResult(log_closed, log_direct, log_factor, b, bool(clamped))


def compose_FG(prior: Prior, eps: float, psi: Optional[UpperClassFunction] = None) -> CompositionResult:
    if not 0.0 < eps <= 1.0:
        raise PriorDomainError(f"ε fuera de (0,1]: {eps!r}.")
    return compose_FG_t(prior, -math.log(eps), psi)


def compose_GF_u(psi: UpperClassFunction, u: float) -> CompositionResult:
    """
    G[F[ψ]] en u = ln λ: √(ψ² - 2 ln ψ + ln(ψ² - 2 ln ψ)). La composición directa pasa
    por ln(ε F[ψ](ε)) = ln ψ - ψ²/2.
    """
    g = float(psi.psi_u(u))
    s = g * g - 2.0 * math.log(g)
    closed = math.sqrt(s + math.log(s))

    b = max(-2.0 * float(psi.log_integrand_u(u)), 1.0)
    direct = math.sqrt(b + math.log(b))

    log_closed, log_direct = math.log(closed), math.log(direct)
    if abs(log_direct - log_closed) > _consistency_tol(b):
        message = f"G[F[ψ]] directa y cerrada difieren en u={u!r}: {direct!r} vs {closed!r}"
        logger.error(message)
        raise InvariantViolationError(message)
    if g > 1.0 and not closed < g:
        message = f"G[F[ψ]] = {closed!r} no es menor que ψ = {g!r} en u={u!r}"
        logger.error(message)
        raise InvariantViolationError(message)
    return CompositionResult(log_closed, log_direct, log_closed - math.log(g), s, s <= 1.0)


def compose_GF(psi: UpperClassFunction, lam: float) -> CompositionResult:
    if not lam > 0.0:
        raise FunctionalDomainError(f"λ debe ser positivo, recibido {lam!r}.")
    return compose_GF_u(psi, math.log(lam))


# ==========================================================================
# EQUIVALENCIAS
# ==========================================================================

@dataclass
class EquivalenceReport:
    equivalent: bool
    log_ratio_min: float
    log_ratio_max: float
    slope: float
    drift: bool
    reason: str = ""

    @property
    def ratio_min(self) -> float:
        return math.exp(max(self.log_ratio_min, -745.0))

    @property
    def ratio_max(self) -> float:
        return math.exp(self.log_ratio_max) if self.log_ratio_max < 709.0 else math.inf

    def to_dict(self) -> Dict[str, object]:
        return {
            "equivalent": self.equivalent,
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "log_ratio_min": self.log_ratio_min,
            "log_ratio_max": self.log_ratio_max,
            "slope": self.slope,
            "drift": self.drift,
            "reason": self.reason,
        }


def default_grid_t(points: int = Config.GRID_POINTS) -> np.ndarray:
    """t = ln(1/ε) para ε geométrico en [GRID_EPS_MIN, GRID_EPS_MAX]."""
    return np.linspace(-math.log(Config.GRID_EPS_MAX), -math.log(Config.GRID_EPS_MIN), points)


def _judge(log_ratio: np.ndarray, grid: np.ndarray) -> EquivalenceReport:
    log_bound = math.log(Config.EQUIV_RATIO)
    finite = np.isfinite(log_ratio)
    if not np.all(finite):
        return EquivalenceReport(False, float(np.nanmin(log_ratio)), float(np.nanmax(log_ratio)),
                                 math.nan, True, "cociente no finito en la malla")

    tail = slice(len(grid) // 2, None)
    slope = float(np.polyfit(np.log(grid[tail]), log_ratio[tail], 1)[0])
    magnitude = np.abs(log_ratio[tail])
    drift = abs(slope) > Config.EQUIV_SLOPE_TOL and magnitude[-1] > magnitude[0]

    lo, hi = float(np.min(log_ratio)), float(np.max(log_ratio))
    bounded = -log_bound <= lo and hi <= log_bound
    reason = ""
    if not bounded:
        reason = f"cociente fuera de [1/R, R] con R={Config.EQUIV_RATIO:g}"
    elif drift:
        reason = f"deriva monótona en la cola (pendiente {slope:.3g} en ln t)"
    return EquivalenceReport(bounded and not drift, lo, hi, slope, bool(drift), reason)


def equivalent_priors(p1: Prior, p2: Prior, grid_t: Optional[np.ndarray] = None) -> EquivalenceReport:
    """π₁ ~0 π₂: ln(π₂/π₁) acotado y sin deriva en la malla de ε hacia 0."""
    grid = default_grid_t() if grid_t is None else np.asarray(grid_t, dtype=float)
    log_ratio = np.asarray(p2.log_density_t(grid), dtype=float) - np.asarray(p1.log_density_t(grid), dtype=float)
    return _judge(log_ratio, grid)


def default_grid_u(psi1: UpperClassFunction, psi2: UpperClassFunction,
                   points: int = Config.GRID_POINTS) -> np.ndarray:
    """λ = 1/ε sobre la malla estándar, o una malla geométrica si el dominio empieza más lejos."""
    u_lo = max(psi1.u_min, psi2.u_min)
    grid = default_grid_t(points)
    if u_lo <= grid[0]:
        return grid
    return np.geomspace(u_lo, max(1e3 * u_lo, Config.INTEGRAL_TEST_U_HI ** 0.1), points)


def equivalent_psis(psi1: UpperClassFunction, psi2: UpperClassFunction,
                    grid_u: Optional[np.ndarray] = None) -> EquivalenceReport:
    """ψ₁ ~∞ ψ₂ comparando (ψ₂² - ψ₁²)/2, nunca las exponenciales."""
    grid = default_grid_u(psi1, psi2) if grid_u is None else np.asarray(grid_u, dtype=float)
    diff = ((np.asarray(psi2.half_sq_u(grid), dtype=float) - np.asarray(psi1.half_sq_u(grid), dtype=float))
            - (psi2.log_offset - psi1.log_offset))
    return _judge(diff, grid)


@dataclass
class PreservationReport:
    functional: str
    input_report: EquivalenceReport
    output_report: Optional[EquivalenceReport]

    @property
    def passed(self) -> bool:
        return self.input_report.equivalent and bool(self.output_report and self.output_report.equivalent)

    @property
    def skipped(self) -> bool:
        return self.output_report is None

    def to_dict(self) -> Dict[str, object]:
        return {
            "functional": self.functional,
            "input": self.input_report.to_dict(),
            "output": self.output_report.to_dict() if self.output_report else None,
            "skipped": self.skipped,
            "passed": self.passed,
        }


def preserve_equivalence_check(pair: Tuple[object, object], functional: str) -> PreservationReport:
    """
    functional = "G": par de densidades equivalentes -> par de ψ equivalentes.
    functional = "F": par de ψ equivalentes -> par de densidades equivalentes.
    """
    first, second = pair
    name = functional.strip().upper()
    if name == "G":
        source = equivalent_priors(first, second)
        if not source.equivalent:
            logger.warning(f"Par de densidades no equivalente ({source.reason}); se omite la conclusión.")
            return PreservationReport("G", source, None)
        return PreservationReport("G", source, equivalent_psis(apply_G(first), apply_G(second)))
    if name == "F":
        source = equivalent_psis(first, second)
        if not source.equivalent:
            logger.warning(f"Par de ψ no equivalente ({source.reason}); se omite la conclusión.")
            return PreservationReport("F", source, None)
        return PreservationReport("F", source, equivalent_priors(apply_F(first), apply_F(second)))
    raise FunctionalDomainError(f"funcional desconocido '{functional}' (use F o G)")
