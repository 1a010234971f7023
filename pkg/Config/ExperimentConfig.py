"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Configuración de Experimentos (ExperimentConfig.py)
DESCRIPCIÓN: Lee archivos de experimento en texto plano (clave = valor, claves con
             puntos, comentarios con #), aplica las sobreescrituras --set de la línea
             de comandos, valida cada campo y construye las estrategias de Skeptic y
             de Reality que el experimento describe.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from Config.Config import Config
from Herramientas.GameErrors import ConfigError, GameError
from Herramientas.SequenceSpec import SequenceSpec, parse_sequence
from Modulos.CapitalBounds import THEOREMS
from Modulos.ComplyingAdversary import SCHEMES, ComplyingAdversary
from Modulos.GameEngine import GameVariant
from Modulos.MixtureQuadrature import QuadratureSpec
from Modulos.PriorDensity import Prior, build_staircase_tilt, make_prior, make_tilted
from Modulos.RealityStrategies import (
    Distribution,
    IIDSampler,
    RealityStrategy,
    TargetTracking,
    load_prices,
    load_script,
)
from Modulos.SkepticStrategies import (
    BayesMixture,
    ConstantProportion,
    Kronecker,
    SkepticStrategy,
    canonical_one_sided,
    canonical_two_sided,
)

logger = logging.getLogger(__name__)

STRATEGIES = ("bayes", "const", "kronecker", "discrete", "discrete2")
REALITY_KINDS = ("script", "prices", "iid", "adversary", "target")

# Claves aceptadas en el archivo y en --set
KNOWN_KEYS = (
    "name", "variant", "strategy", "eps", "initial_capital", "b",
    "prior", "prior.a", "prior.b", "prior.gamma", "prior.eps0", "prior.table",
    "prior.eps_pi", "prior.delta", "prior.tilt",
    "quad.tmax", "quad.panels", "quad.points", "quad.growth", "quad.coarse_points", "quad.tail_atom",
    "reality", "horizon", "seeds", "checkpoints", "theorems",
    "bounds.C", "bounds.delta", "bounds.inflation", "bounds.sharp",
    "adversary.scheme", "adversary.window", "adversary.tol",
    "rates.a", "rates.efkp_b", "rates.efkp_gamma",
    "functional.psi", "functional.c", "functional.scale",
    "output.dir", "output.jsonl", "workers",
)


# ==========================================================================
# LECTURA DEL TEXTO
# ==========================================================================

def parse_config_text(text: str, source: str = "<texto>") -> Dict[str, str]:
    """Pares clave = valor; la última aparición de una clave gana."""
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}", f"se esperaba 'clave = valor', recibido '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{number}", "clave vacía")
        values[key] = value
    return values


def parse_overrides(items: Sequence[str]) -> Dict[str, str]:
    """Sobreescrituras --set clave=valor."""
    values: Dict[str, str] = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError("--set", f"se esperaba clave=valor, recibido '{item}'")
        key, value = (part.strip() for part in item.split("=", 1))
        values[key] = value
    return values


def _as_float(values: Mapping[str, str], key: str, default: float) -> float:
    if key not in values:
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(key, f"se esperaba un número, recibido '{values[key]}'") from None


def _as_int(values: Mapping[str, str], key: str, default: int) -> int:
    if key not in values:
        return default
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(key, f"se esperaba un entero, recibido '{values[key]}'") from None


def _as_bool(values: Mapping[str, str], key: str, default: bool) -> bool:
    if key not in values:
        return default
    text = values[key].strip().lower()
    if text in ("1", "true", "yes", "si", "sí", "on", "staircase"):
        return True
    if text in ("0", "false", "no", "off", "none"):
        return False
    raise ConfigError(key, f"se esperaba un booleano, recibido '{values[key]}'")


def _as_float_list(values: Mapping[str, str], key: str, default: Tuple[float, ...]) -> Tuple[float, ...]:
    if key not in values:
        return default
    try:
        return tuple(float(item) for item in values[key].split(",") if item.strip())
    except ValueError:
        raise ConfigError(key, f"lista de números inválida '{values[key]}'") from None


def parse_seeds(text: str) -> Tuple[int, ...]:
    """"1,2,3" o rangos inclusivos "0..199"."""
    seeds: List[int] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if ".." in item:
                lo, hi = (int(part) for part in item.split("..", 1))
                if hi < lo:
                    raise ConfigError("seeds", f"rango vacío '{item}'")
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(item))
        except ValueError:
            raise ConfigError("seeds", f"semilla inválida '{item}'") from None
    if not seeds:
        raise ConfigError("seeds", "se necesita al menos una semilla")
    if any(seed < 0 for seed in seeds):
        raise ConfigError("seeds", "las semillas deben ser no negativas")
    return tuple(seeds)


def auto_checkpoints(horizon: int, per_decade: int = 4) -> Tuple[int, ...]:
    """Rondas espaciadas geométricamente (más el horizonte)."""
    rounds = {horizon}
    k = 0
    while True:
        n = int(round(10.0 ** (k / per_decade)))
        if n > horizon:
            break
        rounds.add(max(n, 1))
        k += 1
    return tuple(sorted(rounds))


# ==========================================================================
# ESPECIFICACIÓN DE REALITY
# ==========================================================================

@dataclass(frozen=True)
class RealitySpec:
    """
    script:<csv> | prices:<csv> | iid:<dist>[,delta=..][,upper=..][,seed=..]
    | adversary[,b=<sucesión>] | target:<linear|lil>,coef=..
    """
    kind: str
    arg: str = ""
    options: Tuple[Tuple[str, str], ...] = ()
    text: str = ""

    def option(self, name: str, default: Optional[str] = None) -> Optional[str]:
        return dict(self.options).get(name, default)


def parse_reality(text: str) -> RealitySpec:
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if not parts:
        raise ConfigError("reality", "vacío")
    head = parts[0]
    kind, _, arg = head.partition(":")
    kind = kind.strip().lower()
    if kind not in REALITY_KINDS:
        raise ConfigError("reality", f"tipo desconocido '{kind}' (use {', '.join(REALITY_KINDS)})")
    options = []
    for part in parts[1:]:
        if "=" not in part:
            raise ConfigError("reality", f"opción sin valor '{part}'")
        name, value = (piece.strip() for piece in part.split("=", 1))
        options.append((name, value))
    if kind in ("script", "prices") and not arg:
        raise ConfigError("reality", f"'{kind}' requiere la ruta de un CSV")
    if kind == "iid":
        arg = arg or Distribution.RADEMACHER.value
        if arg not in {d.value for d in Distribution}:
            raise ConfigError("reality", f"distribución desconocida '{arg}'")
    if kind == "target":
        arg = arg or "linear"
        if arg not in ("linear", "lil"):
            raise ConfigError("reality", f"objetivo desconocido '{arg}'")
    return RealitySpec(kind=kind, arg=arg.strip(), options=tuple(options), text=text)


# ==========================================================================
# EXPERIMENTO
# ==========================================================================

@dataclass
class ExperimentConfig:
    """
    Un experimento por archivo. (configuración, semilla) determina cada número emitido.
    """
    name: str = "experimento"
    variant: GameVariant = GameVariant.OUFG
    strategy: str = "bayes"
    eps: float = 0.5
    initial_capital: float = Config.DEFAULT_INITIAL_CAPITAL
    b: SequenceSpec = field(default_factory=lambda: parse_sequence("n^2"))

    prior: str = "uniform"
    prior_params: Dict[str, object] = field(default_factory=dict)
    prior_tilt: bool = False
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    reality: RealitySpec = field(default_factory=lambda: parse_reality("iid:rademacher"))
    horizon: int = 1000
    seeds: Tuple[int, ...] = (0,)
    checkpoints: Tuple[int, ...] = ()
    theorems: Tuple[str, ...] = THEOREMS

    bound_C: Tuple[float, ...] = Config.THM41_C_GRID
    bound_delta: Tuple[float, ...] = Config.PROP31_DELTA_GRID
    inflation: float = 1.0
    sharp: bool = False

    adversary_scheme: str = Config.ADVERSARY_SCHEME
    adversary_window: int = Config.ADVERSARY_WINDOW
    adversary_tol: float = Config.ADVERSARY_TOL

    rates_a: float = 0.5
    rates_efkp_b: int = 4
    rates_efkp_gamma: float = 0.5

    functional_psi: str = "reference"
    functional_c: float = 2.0
    functional_scale: float = 2.0

    output_dir: Optional[str] = None
    jsonl: bool = False
    workers: int = 1
    source: str = ""

    # --- Carga ---

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], source: str = "") -> "ExperimentConfig":
        unknown = sorted(set(values) - set(KNOWN_KEYS))
        if unknown:
            raise ConfigError(unknown[0], "clave desconocida")

        cfg = cls(source=source)
        cfg.name = values.get("name", cfg.name).strip() or cfg.name
        if "variant" in values:
            try:
                cfg.variant = GameVariant.parse(values["variant"])
            except GameError as e:
                raise ConfigError("variant", str(e)) from e

        cfg.strategy = values.get("strategy", cfg.strategy).strip().lower()
        cfg.eps = _as_float(values, "eps", cfg.eps)
        cfg.initial_capital = _as_float(values, "initial_capital", cfg.initial_capital)
        if "b" in values:
            cfg.b = parse_sequence(values["b"], field="b")

        cfg.prior = values.get("prior", cfg.prior).strip().lower()
        params: Dict[str, object] = {}
        for key in ("a", "gamma", "eps0", "eps_pi", "delta"):
            if f"prior.{key}" in values:
                params[key] = _as_float(values, f"prior.{key}", 0.0)
        if "prior.b" in values:
            params["b"] = _as_int(values, "prior.b", 4)
        if "prior.table" in values:
            params["table"] = values["prior.table"]
        cfg.prior_params = params
        cfg.prior_tilt = _as_bool(values, "prior.tilt", cfg.prior_tilt)

        cfg.quad = QuadratureSpec(
            tmax=_as_float(values, "quad.tmax", Config.QUAD_TMAX),
            panels=_as_int(values, "quad.panels", Config.QUAD_PANELS),
            points=_as_int(values, "quad.points", Config.QUAD_POINTS),
            growth=_as_float(values, "quad.growth", Config.QUAD_PANEL_GROWTH),
            coarse_points=_as_int(values, "quad.coarse_points", Config.QUAD_COARSE_POINTS),
            tail_atom=_as_bool(values, "quad.tail_atom", True),
        )

        if "reality" in values:
            cfg.reality = parse_reality(values["reality"])
        cfg.horizon = _as_int(values, "horizon", cfg.horizon)
        if "seeds" in values:
            cfg.seeds = parse_seeds(values["seeds"])
        elif cfg.reality.option("seed") is not None:
            cfg.seeds = parse_seeds(cfg.reality.option("seed"))
        if "checkpoints" in values and values["checkpoints"].strip().lower() != "auto":
            try:
                cfg.checkpoints = tuple(sorted({int(item) for item in values["checkpoints"].split(",")
                                                if item.strip()}))
            except ValueError:
                raise ConfigError("checkpoints", f"lista inválida '{values['checkpoints']}'") from None
        if "theorems" in values:
            cfg.theorems = parse_theorems(values["theorems"])

        cfg.bound_C = _as_float_list(values, "bounds.C", cfg.bound_C)
        cfg.bound_delta = _as_float_list(values, "bounds.delta", cfg.bound_delta)
        cfg.inflation = _as_float(values, "bounds.inflation", cfg.inflation)
        cfg.sharp = _as_bool(values, "bounds.sharp", cfg.sharp)

        cfg.adversary_scheme = values.get("adversary.scheme", cfg.adversary_scheme).strip().lower()
        cfg.adversary_window = _as_int(values, "adversary.window", cfg.adversary_window)
        cfg.adversary_tol = _as_float(values, "adversary.tol", cfg.adversary_tol)
        if cfg.reality.kind == "adversary" and cfg.reality.option("b"):
            cfg.b = parse_sequence(cfg.reality.option("b"), field="reality.b")

        cfg.rates_a = _as_float(values, "rates.a", cfg.rates_a)
        cfg.rates_efkp_b = _as_int(values, "rates.efkp_b", cfg.rates_efkp_b)
        cfg.rates_efkp_gamma = _as_float(values, "rates.efkp_gamma", cfg.rates_efkp_gamma)

        cfg.functional_psi = values.get("functional.psi", cfg.functional_psi).strip().lower()
        cfg.functional_c = _as_float(values, "functional.c", cfg.functional_c)
        cfg.functional_scale = _as_float(values, "functional.scale", cfg.functional_scale)

        cfg.output_dir = values.get("output.dir") or os.getenv("SKEPTICLAB_OUT_DIR") or None
        cfg.jsonl = _as_bool(values, "output.jsonl", cfg.jsonl)
        cfg.workers = _as_int(values, "workers", cfg.workers)
        return cfg.validate()

    @classmethod
    def load(cls, path: Optional[str], overrides: Sequence[str] = ()) -> "ExperimentConfig":
        values: Dict[str, str] = {}
        source = path or "<defecto>"
        if path:
            try:
                with open(path, encoding="utf-8") as handle:
                    values = parse_config_text(handle.read(), source=path)
            except OSError as e:
                raise ConfigError("config", f"no se pudo leer '{path}': {e}") from e
        values.update(parse_overrides(overrides))
        cfg = cls.from_mapping(values, source=source)
        logger.info(f"Experimento '{cfg.name}' cargado desde {source} "
                    f"({len(values)} claves, {len(cfg.seeds)} semillas).")
        return cfg

    # --- Validación ---

    def validate(self) -> "ExperimentConfig":
        if self.strategy not in STRATEGIES:
            raise ConfigError("strategy", f"estrategia desconocida '{self.strategy}' (use {', '.join(STRATEGIES)})")
        if not self.variant.is_legal_proportion(self.eps):
            raise ConfigError("eps", f"proporción {self.eps!r} fuera de rango en {self.variant.value}")
        if not self.initial_capital > 0.0:
            raise ConfigError("initial_capital", "debe ser positivo")
        if self.strategy in ("bayes", "discrete") and self.variant is not GameVariant.OUFG:
            raise ConfigError("variant", f"la estrategia '{self.strategy}' se define sobre OUFG")
        if self.strategy == "discrete2" and self.variant is not GameVariant.BFG:
            raise ConfigError("variant", "la mezcla de dos lados requiere BFG")
        if self.horizon < 1:
            raise ConfigError("horizon", "debe ser al menos 1")
        if any(n < 1 or n > self.horizon for n in self.checkpoints):
            raise ConfigError("checkpoints", f"las rondas deben estar en [1, {self.horizon}]")
        if any(not 0.0 < c < 0.5 for c in self.bound_C):
            raise ConfigError("bounds.C", "cada C debe estar en (0, 1/2)")
        if any(not 0.0 < d < 0.5 for d in self.bound_delta):
            raise ConfigError("bounds.delta", "cada delta debe estar en (0, 1/2)")
        if not self.inflation > 0.0:
            raise ConfigError("bounds.inflation", "debe ser positivo")
        if self.adversary_scheme not in SCHEMES:
            raise ConfigError("adversary.scheme", f"esquema desconocido '{self.adversary_scheme}'")
        if self.adversary_window < 2:
            raise ConfigError("adversary.window", "debe ser al menos 2")
        if not self.adversary_tol >= 0.0:
            raise ConfigError("adversary.tol", "debe ser no negativo")
        if not 0.0 <= self.rates_a < 1.0:
            raise ConfigError("rates.a", "debe estar en [0, 1)")
        if self.rates_efkp_b < 4:
            raise ConfigError("rates.efkp_b", "debe ser al menos 4")
        if not self.rates_efkp_gamma > 0.0:
            raise ConfigError("rates.efkp_gamma", "debe ser positivo")
        if not self.functional_scale > 0.0:
            raise ConfigError("functional.scale", "debe ser positivo")
        if self.workers < 1:
            raise ConfigError("workers", "debe ser al menos 1")
        if self.reality.kind == "iid":
            for name in ("delta", "upper"):
                value = self.reality.option(name)
                if value is not None:
                    try:
                        float(value)
                    except ValueError:
                        raise ConfigError(f"reality.{name}", f"se esperaba un número, recibido '{value}'") from None
        if self.reality.kind == "target" and self.reality.option("coef") is not None:
            try:
                float(self.reality.option("coef"))
            except ValueError:
                raise ConfigError("reality.coef", "se esperaba un número") from None
        self.quad.validate()
        return self

    @property
    def report_checkpoints(self) -> Tuple[int, ...]:
        return self.checkpoints or auto_checkpoints(self.horizon)

    # --- Construcción ---

    def build_prior(self) -> Prior:
        """Densidad del experimento, inclinada por la escalera si prior.tilt está activo."""
        try:
            prior = make_prior(self.prior, **self.prior_params)
            if self.prior_tilt:
                prior = make_tilted(prior, build_staircase_tilt(prior))
        except ConfigError:
            raise
        except GameError as e:
            raise ConfigError("prior", str(e)) from e
        return prior

    def build_strategy(self) -> SkepticStrategy:
        if self.strategy == "bayes":
            return BayesMixture(self.build_prior(), self.quad)
        if self.strategy == "const":
            return ConstantProportion(self.eps, self.variant, self.initial_capital)
        if self.strategy == "kronecker":
            return Kronecker(self.b, self.horizon)
        if self.strategy == "discrete":
            return canonical_one_sided()
        return canonical_two_sided()

    def build_reality(self, seed: int, initial_capital: float = Config.DEFAULT_INITIAL_CAPITAL) -> RealityStrategy:
        spec = self.reality
        try:
            if spec.kind == "script":
                return load_script(spec.arg, self.variant)
            if spec.kind == "prices":
                return load_prices(spec.arg)
            if spec.kind == "iid":
                return IIDSampler(Distribution(spec.arg), seed, self.variant,
                                  delta=float(spec.option("delta", "0.05")),
                                  upper=float(spec.option("upper", "1.0")))
            if spec.kind == "target":
                default = "0.1" if spec.arg == "linear" else "1.2"
                return TargetTracking(spec.arg, float(spec.option("coef", default)), self.variant)
            return ComplyingAdversary(self.b, initial_capital, self.adversary_scheme,
                                      self.adversary_window, self.adversary_tol)
        except ConfigError:
            raise
        except GameError as e:
            raise ConfigError("reality", str(e)) from e

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "source": self.source,
            "variant": self.variant.value,
            "strategy": self.strategy,
            "prior": self.prior,
            "prior_params": dict(self.prior_params),
            "prior_tilt": self.prior_tilt,
            "reality": self.reality.text,
            "horizon": self.horizon,
            "seeds": len(self.seeds),
            "b": self.b.source,
        }


def parse_theorems(text: str) -> Tuple[str, ...]:
    names = tuple(item.strip().lower() for item in text.split(",") if item.strip())
    if not names:
        raise ConfigError("theorems", "se necesita al menos un teorema")
    for name in names:
        if name not in THEOREMS:
            raise ConfigError("theorems", f"teorema desconocido '{name}' (use {', '.join(THEOREMS)})")
    return names
