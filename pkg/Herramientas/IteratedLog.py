"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Logaritmos Iterados (IteratedLog.py)
DESCRIPCIÓN: Torre ln_k con guardas de dominio por profundidad. Todas las funciones
             aceptan el primer nivel ya logaritmizado para poder trabajar con
             argumentos que no caben en un double (por ejemplo 1/ε con ε = e^{-10^38}).
"""

import math
from typing import List

import numpy as np

from .GameErrors import PriorDomainError


def iterated_log(x: float, depth: int) -> float:
    """
    ln_depth(x) = ln ln ... ln x. Rechaza cualquier valor intermedio no positivo.
    """
    if depth < 1:
        raise ValueError("La profundidad debe ser >= 1.")
    value = float(x)
    for k in range(1, depth + 1):
        if not value > 0.0:
            raise PriorDomainError(f"ln_{k} indefinido para argumento {value!r}", depth=k)
        value = math.log(value)
    return value


def log_tower(log_x: float, depth: int, strict: bool = True) -> List[float]:
    """
    Devuelve [ln_1 x, ..., ln_depth x] a partir de ln x.

    Con strict=True exige que todos los niveles sean positivos (la condición de las
    densidades iteradas) y reporta la primera profundidad que falla.
    """
    levels = [float(log_x)]
    if strict and not levels[0] > 0.0:
        raise PriorDomainError(f"ln_1 = {levels[0]!r} no es positivo", depth=1)
    for k in range(2, depth + 1):
        prev = levels[-1]
        if not prev > 0.0:
            raise PriorDomainError(f"ln_{k} indefinido para ln_{k - 1} = {prev!r}", depth=k)
        value = math.log(prev)
        if strict and not value > 0.0:
            raise PriorDomainError(f"ln_{k} = {value!r} no es positivo", depth=k)
        levels.append(value)
    return levels


def log_tower_array(log_x: np.ndarray, depth: int) -> List[np.ndarray]:
    """Versión vectorizada de log_tower sin guardas (el llamador valida el dominio)."""
    levels = [np.asarray(log_x, dtype=float)]
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(2, depth + 1):
            levels.append(np.log(levels[-1]))
    return levels


def exp_tower(value: float, height: int) -> float:
    """Inversa de la torre: exp aplicado height veces (puede devolver inf)."""
    result = float(value)
    for _ in range(height):
        if result > 709.78:
            return math.inf
        result = math.exp(result)
    return result


def tower(height: int) -> float:
    """e^e^...^e con height exponenciales; tower(0) = 1."""
    return exp_tower(1.0, height)
