"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Cotas Inferiores del Capital (CapitalBounds.py)
DESCRIPCIÓN: Oráculos cerrados para verificar el capital de la mezcla bayesiana:
             desigualdad logarítmica, cotas con constante √C/6 y 1/(6e), cota con
             escalera c(u_n), cota de la prueba de la ley fuerte auto-normalizada y
             la función ψ de la ley del logaritmo iterado refinada. Todo en dominio
             logarítmico; "no aplicable" es un resultado, no un error.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

from Config.Config import Config
from Herramientas.GameErrors import PriorDomainError
from Herramientas.IteratedLog import log_tower
from .PriorDensity import Prior, StaircaseTilt

logger = logging.getLogger(__name__)

THM41 = "thm41"
THM43 = "thm43"
REMARK41 = "remark41"
PROP31 = "prop31"
THEOREMS = (THM41, THM43, REMARK41, PROP31)


@dataclass(frozen=True)
class BoundQuery:
    S: float
    A: float
    prior: Prior
    C: Optional[float] = None
    n: int = 0


@dataclass(frozen=True)
class BoundResult:
    theorem: str
    applicable: bool
    log_value: float = -math.inf
    reason: str = ""

    @property
    def value(self) -> float:
        if not self.applicable:
            return math.nan
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf

    def log_slack(self, log_capital: float) -> float:
        """ln(K / cota); positivo cuando la cota se cumple con holgura."""
        return log_capital - self.log_value

    def holds(self, log_capital: float, slack: float = Config.BOUND_SLACK) -> bool:
        """K >= cota·(1 - slack), comparado entre logaritmos."""
        if not self.applicable:
            return True
        return log_capital >= self.log_value + math.log1p(-slack)


def _not_applicable(theorem: str, reason: str) -> BoundResult:
    return BoundResult(theorem=theorem, applicable=False, reason=reason)


@dataclass(frozen=True)
class LogGap:
    value: float
    guaranteed: bool


def log_inequality_gap(t: float, C: float) -> LogGap:
    """
    g(t) = ln(1+t) - t + (1+C)/2 t². Es >= 0 en t >= -C/(1+C); fuera de esa región
    se devuelve el valor marcado como no garantizado.
    """
    if not t > -1.0:
        raise ValueError(f"ln(1+t) indefinido para t={t!r}.")
    if not C > 0.0:
        raise ValueError(f"C debe ser positivo, recibido {C!r}.")
    value = (math.log1p(t) - t) + 0.5 * (1.0 + C) * t * t
    return LogGap(value=value, guaranteed=t >= -C / (1.0 + C))


# ==========================================================================
# COTAS DE CAPITAL
# ==========================================================================

def thm41_bound(q: BoundQuery, sharp: bool = False, inflation: float = 1.0) -> BoundResult:
    """
    (√C/6)(S/A) π(S/A) exp((1-2C) S²/(2A)) para C ∈ (0, min(ε_π, 1/2)) y 0 < S/A < C/2.

    sharp=True usa la constante ((1-√C)/(1+√C))√C con exponente (1-C)S²/(2(1+C)A).
    inflation multiplica la cota (solo para probar el arnés de verificación).
    """
    C = q.C
    if C is None:
        return _not_applicable(THM41, "C no especificado")
    if not q.A > 0.0:
        return _not_applicable(THM41, "A_n = 0")
    if not 0.0 < C < min(q.prior.eps_pi, 0.5):
        return _not_applicable(THM41, f"C={C!r} fuera de (0, min(eps_pi, 1/2))")
    ratio = q.S / q.A
    if not ratio > 0.0:
        return _not_applicable(THM41, "S_n/A_n <= 0")
    if not ratio < C / 2.0:
        return _not_applicable(THM41, f"S_n/A_n = {ratio!r} >= C/2")

    log_pi = float(q.prior.log_density(ratio))
    square = q.S * q.S / q.A
    if sharp:
        root = math.sqrt(C)
        log_const = math.log((1.0 - root) / (1.0 + root)) + 0.5 * math.log(C)
        exponent = (1.0 - C) * square / (2.0 * (1.0 + C))
    else:
        log_const = 0.5 * math.log(C) - math.log(6.0)
        exponent = (1.0 - 2.0 * C) * square / 2.0
    log_value = log_const + math.log(ratio) + log_pi + exponent + math.log(inflation)
    return BoundResult(THM41, True, log_value)


def _thm43_preconditions(q: BoundQuery) -> Optional[str]:
    if not q.A > 0.0:
        return "A_n = 0"
    if not q.S > 0.0:
        return "S_n <= 0"
    square = q.S * q.S / q.A
    threshold = max(2.0, 1.0 / q.prior.eps_pi) if q.prior.eps_pi > 0.0 else math.inf
    if not square > threshold:
        return f"S_n²/A_n = {square!r} <= max(2, 1/eps_pi)"
    cube = q.S ** 3 / (q.A * q.A)
    if not cube < 0.5:
        return f"S_n³/A_n² = {cube!r} >= 1/2"
    return None


def _thm43_log_value(q: BoundQuery) -> float:
    ratio = q.S / q.A
    log_pi = float(q.prior.log_density(ratio))
    return -math.log(6.0) - 1.0 - 0.5 * math.log(q.A) + log_pi + q.S * q.S / (2.0 * q.A)


def thm43_bound(q: BoundQuery, inflation: float = 1.0) -> BoundResult:
    """(1/(6e)) (1/√A) π(S/A) exp(S²/(2A)) bajo sus tres condiciones."""
    reason = _thm43_preconditions(q)
    if reason:
        return _not_applicable(THM43, reason)
    return BoundResult(THM43, True, _thm43_log_value(q) + math.log(inflation))


def remark41_point(S: float, A: float) -> float:
    """u_n = ((1 + √A/S) / (1 + A/S²)) · S/A."""
    return (1.0 + math.sqrt(A) / S) / (1.0 + A / (S * S)) * (S / A)


def remark41_bound(q: BoundQuery, tilt: StaircaseTilt, inflation: float = 1.0) -> BoundResult:
    """
    c(u_n)·(cota de thm43 con la densidad base). q.prior es la base, sin inclinar;
    la cota aplica al capital de la mezcla con c·π.
    """
    reason = _thm43_preconditions(q)
    if reason:
        return _not_applicable(REMARK41, reason)
    u_n = remark41_point(q.S, q.A)
    log_c = float(tilt.log_value_t(-math.log(u_n)))
    return BoundResult(REMARK41, True, log_c + _thm43_log_value(q) + math.log(inflation))


def prop31_bound(q: BoundQuery, delta: float, inflation: float = 1.0) -> BoundResult:
    """½ π(δ/3) (δ/3) exp(A δ²/9), válida cuando S_n > δ A_n y δ < min(ε_π, 1/2)."""
    if not 0.0 < delta < min(q.prior.eps_pi, 0.5):
        return _not_applicable(PROP31, f"delta={delta!r} fuera de (0, min(eps_pi, 1/2))")
    if not q.A > 0.0:
        return _not_applicable(PROP31, "A_n = 0")
    if not q.S > delta * q.A:
        return _not_applicable(PROP31, "S_n <= delta·A_n")
    third = delta / 3.0
    log_value = (-math.log(2.0) + float(q.prior.log_density(third)) + math.log(third)
                 + q.A * delta * delta / 9.0 + math.log(inflation))
    return BoundResult(PROP31, True, log_value)


# ==========================================================================
# ψ DE LA LEY DEL LOGARITMO ITERADO REFINADA
# ==========================================================================

def _efkp_coefficients(b: int, gamma: float):
    coefs = [2.0, 3.0] + [2.0] * (b - 3) + [2.0 * (1.0 + 2.0 * gamma)]
    return coefs    # ln_2 ... ln_{b+1}


def efkp_psi_levels(log_log_A: float, b: int, gamma: float) -> float:
    """
    ψ a partir de ln_2 A: √(2 ln_2 + 3 ln_3 + 2 ln_4 + ... + 2 ln_b + 2(1+2γ) ln_{b+1}).
    Permite evaluar A fuera del rango de los doubles.
    """
    if int(b) != b or b < 4:
        raise PriorDomainError(f"b debe ser un entero >= 4, recibido {b!r}.")
    if not gamma > 0.0:
        raise PriorDomainError(f"gamma debe ser positivo, recibido {gamma!r}.")
    try:
        levels = log_tower(log_log_A, int(b), strict=True)
    except PriorDomainError as e:
        raise PriorDomainError("psi EFKP fuera de dominio", depth=(e.depth or 0) + 1) from e
    return math.sqrt(sum(c * level for c, level in zip(_efkp_coefficients(int(b), gamma), levels)))


def efkp_psi(A: float, b: int, gamma: float) -> float:
    """ψ(A) para A representable; exige ln_{b+1} A > 0."""
    if not A > 1.0:
        raise PriorDomainError(f"A = {A!r} debe ser > 1", depth=1)
    levels = log_tower(math.log(A), int(b) + 1, strict=True)
    return efkp_psi_levels(levels[1], b, gamma)
