"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Validador de Regularidad de Densidades (PriorValidator.py)
DESCRIPCIÓN: Audita las condiciones de regularidad de una densidad a priori antes de usarla en la
             mezcla: cota inferior δ_π cerca de 0, monotonía de ε·π(ε) e
             integrabilidad con evidencia de convergencia de la cola.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from Config.Config import Config
from .PriorDensity import Prior, PriorFamily

logger = logging.getLogger(__name__)


@dataclass
class ValidationReport:
    family: str
    lower_bound_ok: bool = False
    monotone_ok: bool = False
    monotone_exempt: bool = False
    integrable_ok: bool = False
    min_log_density: float = math.nan
    monotone_violations: int = 0
    log_total_mass: float = math.nan
    log_partial_masses: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        monotone = self.monotone_ok or self.monotone_exempt
        return self.lower_bound_ok and monotone and self.integrable_ok

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "lower_bound_ok": self.lower_bound_ok,
            "monotone_ok": self.monotone_ok,
            "monotone_exempt": self.monotone_exempt,
            "integrable_ok": self.integrable_ok,
            "min_log_density": self.min_log_density,
            "monotone_violations": self.monotone_violations,
            "log_total_mass": self.log_total_mass,
            "log_partial_masses": dict(self.log_partial_masses),
            "warnings": list(self.warnings),
            "passed": self.passed,
        }


def validation_grid(prior: Prior, grid_points: int) -> np.ndarray:
    """
    Malla en t = ln(1/ε) sobre (ε_min, ε_π): geométrica en ε (lineal en t) hasta
    ε = 1e-30, o geométrica en t hasta 10·t_π cuando ε_π ya no es representable.
    """
    t_start = prior.t_pi
    if t_start < Config.DELTA_GRID_TMAX:
        return np.linspace(t_start, Config.DELTA_GRID_TMAX, grid_points)[1:]
    return np.geomspace(t_start, Config.VALIDATION_DEEP_FACTOR * t_start, grid_points)[1:]


def _log_diff(log_a: float, log_b: float) -> float:
    """ln(e^a - e^b) para a >= b."""
    if log_b == -math.inf:
        return log_a
    if log_b >= log_a:
        return -math.inf
    return log_a + math.log(-math.expm1(log_b - log_a))


def validate_assumption1(prior: Prior, grid_points: int = 200) -> ValidationReport:
    """
    Analiza una densidad y devuelve el reporte con sus advertencias.
    """
    if grid_points < 10:
        raise ValueError("Se requieren al menos 10 puntos de malla.")

    report = ValidationReport(family=prior.family.value)
    grid = validation_grid(prior, grid_points)

    # 1. Cota inferior δ_π en (0, ε_π)
    log_density = np.asarray(prior.log_density_t(grid), dtype=float)
    report.min_log_density = float(np.min(log_density))
    report.lower_bound_ok = bool(report.min_log_density >= prior.log_delta_pi - 1e-12 * max(1.0, abs(prior.log_delta_pi)))
    if not report.lower_bound_ok:
        report.warnings.append(
            f"⚠️ π cae por debajo de δ_π: min ln π = {report.min_log_density:.4g} < ln δ_π = {prior.log_delta_pi:.4g}")

    # 2. Monotonía de ε·π(ε)
    if prior.family is PriorFamily.TILTED:
        report.monotone_exempt = True
        report.warnings.append("ℹ️ Densidad inclinada: ε·c(ε)·π(ε) puede no ser creciente; chequeo de monotonía eximido.")
    else:
        # Se compara la forma sin constante para evitar cancelación en densidades reescaladas
        shape = np.asarray(prior.log_eps_shape_t(grid), dtype=float)
        increases = np.diff(shape)   # t creciente = ε decreciente; ε·π no debe crecer
        tol = Config.VALIDATION_MONOTONE_TOL * np.maximum(1.0, np.abs(shape[1:]))
        report.monotone_violations = int(np.sum(increases > tol))
        report.monotone_ok = report.monotone_violations == 0
        if not report.monotone_ok:
            report.warnings.append(
                f"⚠️ ε·π(ε) no es creciente cerca de 0: {report.monotone_violations} violaciones en la malla.")

    # 3. Integrabilidad con cortes inferiores decrecientes
    try:
        log_total = prior.quadrature_log_mass(0.0)
        report.log_total_mass = log_total
        below = []
        for cutoff in Config.VALIDATION_CUTOFFS:
            t_cut = -math.log(cutoff)
            log_below = prior.quadrature_log_mass(t_cut)
            report.log_partial_masses[f"{cutoff:g}"] = _log_diff(log_total, log_below)
            below.append(log_below)

        increments = [_log_diff(below[i], below[i + 1]) for i in range(len(below) - 1)]
        finite = math.isfinite(log_total)
        shrinking = all(b <= a + 1e-9 for a, b in zip(increments, increments[1:]))
        tail_shrinking = all(b <= a + 1e-12 for a, b in zip(below, below[1:]))
        report.integrable_ok = bool(finite and shrinking and tail_shrinking)
        if not report.integrable_ok:
            report.warnings.append("⚠️ La cuadratura de ∫π no muestra convergencia al bajar el corte inferior.")
    except (ValueError, OverflowError) as e:
        report.integrable_ok = False
        report.warnings.append(f"⚠️ Error evaluando ∫π: {e}")
        logger.error(f"Error integrando la densidad {prior.family.value}: {e}.", exc_info=True)

    if report.passed:
        logger.debug(f"Densidad {prior.family.value} cumple las condiciones de regularidad.")
    else:
        logger.warning(f"Densidad {prior.family.value} no cumple las condiciones de regularidad: {report.warnings}.")
    return report


def require_valid(prior: Prior, grid_points: int = 200) -> Optional[ValidationReport]:
    """Valida y lanza ValueError con las advertencias si algún chequeo falla."""
    report = validate_assumption1(prior, grid_points)
    if not report.passed:
        raise ValueError("; ".join(report.warnings))
    return report
