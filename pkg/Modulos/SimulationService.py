"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Servicio de Simulación (SimulationService.py)
DESCRIPCIÓN: Orquestador de los comandos del laboratorio. Coordina:
             1. La partida Skeptic contra Reality ronda a ronda (simulate).
             2. Las campañas de verificación de cotas sobre muchas semillas.
             3. La demostración del adversario complaciente.
             4. Las curvas de tasas auto-normalizadas.
             5. Las tablas del cálculo funcional F / G.
             Cada comando escribe sus artefactos y devuelve un código de salida
             (0 correcto, 1 violación, 2 error de configuración).
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from BasedeDatos.TraceRepository import (
    PRIOR_FUNCTIONAL_COLUMNS,
    PSI_FUNCTIONAL_COLUMNS,
    TraceRepository,
    TraceWriter,
)
from Config.Config import Config
from Config.ExperimentConfig import ExperimentConfig, auto_checkpoints
from Herramientas.GameErrors import (
    ConfigError,
    FunctionalDomainError,
    GameError,
    InvariantViolationError,
    PriorDomainError,
)
from .CapitalBounds import (
    PROP31,
    REMARK41,
    THM41,
    THM43,
    BoundQuery,
    BoundResult,
    efkp_psi,
    prop31_bound,
    remark41_bound,
    thm41_bound,
    thm43_bound,
)
from .ComplyingAdversary import ComplyingAdversary
from .GameEngine import COLLATERAL_VIOLATION, GameState, RoundRecord, new_game, play_round, self_normalized_stats
from .PriorDensity import Prior, PriorFamily, StaircaseTilt, build_staircase_tilt, make_tilted
from .RealityStrategies import RealityStrategy
from .SkepticStrategies import BayesMixture, Kronecker, SkepticStrategy
from .UpperClassCalculus import (
    UpperClassFunction,
    apply_F,
    apply_G,
    compose_FG_t,
    compose_GF_u,
    default_grid_t,
    default_grid_u,
    equivalent_priors,
    equivalent_psis,
    integral_test,
    make_constant,
    make_efkp_psi,
    make_reference,
    make_sqrt_loglog,
    preserve_equivalence_check,
    validate_assumption2,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

FUNCTIONAL_OPS = ("F", "G", "FG", "GF", "equiv", "integral-test")

# Profundidades en t = ln(1/ε) para la banda asintótica de F[G[π]] / π
BAND_DEPTH_T = 1e3
BAND_DEPTH_T_LIL = 1e300
BAND_LIMITS = (0.99, 1.01)

MAX_OFFENDING_PER_KEY = 5


@dataclass
class ServiceResult:
    command: str
    exit_code: int
    report: Dict[str, object]
    report_path: Optional[str] = None
    artifacts: List[str] = field(default_factory=list)


def _log(value: float) -> float:
    return math.log(value) if value > 0.0 else -math.inf


# ==========================================================================
# BUCLE DEL JUEGO
# ==========================================================================

def play_game(strategy: SkepticStrategy, reality: RealityStrategy, state: GameState,
              horizon: int) -> Iterator[Tuple[GameState, RoundRecord]]:
    """
    Protocolo: Skeptic anuncia M_n, Reality responde x_n, el juego actualiza y la
    estrategia observa x_n. Termina en el horizonte, al agotarse el camino o con veredicto.
    """
    for _ in range(horizon):
        M = strategy.stake(state)
        x = reality.next_move(state, M)
        if x is None:
            logger.info(f"Camino de Reality agotado en la ronda {state.n}.")
            return
        state, record = play_round(state, M, x)
        strategy.observe(x)
        yield state, record
        if state.terminated:
            return


def capital_identity_gap(strategy: SkepticStrategy, state: GameState) -> Optional[float]:
    """
    Distancia relativa entre el capital recursivo del juego y la representación
    integral de la estrategia (mezcla o Y_n de Kronecker).
    """
    if isinstance(strategy, Kronecker):
        return abs(state.K - strategy.Y) / max(1.0, abs(strategy.Y))
    log_integral = strategy.log_integral_capital()
    if log_integral is None:
        return None
    if state.K > 0.0 and math.isfinite(log_integral):
        return abs(math.expm1(log_integral - math.log(state.K)))
    return 0.0 if (state.K <= 0.0 and log_integral == -math.inf) else math.inf


# ==========================================================================
# EVALUACIÓN DE COTAS
# ==========================================================================

@dataclass(frozen=True)
class BoundCheck:
    key: str
    theorem: str
    result: BoundResult
    log_capital: float

    @property
    def holds(self) -> bool:
        return self.result.holds(self.log_capital)

    def to_dict(self) -> Dict[str, object]:
        applicable = self.result.applicable
        return {
            "key": self.key,
            "applicable": applicable,
            "log_bound": self.result.log_value if applicable else None,
            "log_slack": self.result.log_slack(self.log_capital) if applicable else None,
            "holds": self.holds,
            "reason": self.result.reason,
        }


def check_bounds(S: float, A: float, n: int, prior: Prior, log_capital: float, theorems: Sequence[str],
                 cfg: ExperimentConfig, tilt: Optional[StaircaseTilt] = None,
                 log_capital_tilted: Optional[float] = None) -> List[BoundCheck]:
    """
    Evalúa las cotas activas en (S_n, A_n). prior es la densidad base; la cota con
    escalera se compara con el capital de la mezcla inclinada.
    """
    checks = []
    if THM41 in theorems:
        for C in cfg.bound_C:
            result = thm41_bound(BoundQuery(S, A, prior, C, n), sharp=cfg.sharp, inflation=cfg.inflation)
            checks.append(BoundCheck(f"{THM41}[C={C:g}]", THM41, result, log_capital))
    if THM43 in theorems:
        result = thm43_bound(BoundQuery(S, A, prior, None, n), inflation=cfg.inflation)
        checks.append(BoundCheck(THM43, THM43, result, log_capital))
    if REMARK41 in theorems:
        if tilt is None or log_capital_tilted is None:
            result = BoundResult(REMARK41, False, reason="densidad sin escalera")
            checks.append(BoundCheck(REMARK41, REMARK41, result, log_capital))
        else:
            result = remark41_bound(BoundQuery(S, A, prior, None, n), tilt, inflation=cfg.inflation)
            checks.append(BoundCheck(REMARK41, REMARK41, result, log_capital_tilted))
    if PROP31 in theorems:
        for delta in cfg.bound_delta:
            result = prop31_bound(BoundQuery(S, A, prior, None, n), delta, inflation=cfg.inflation)
            checks.append(BoundCheck(f"{PROP31}[delta={delta:g}]", PROP31, result, log_capital))
    return checks


def _base_and_tilt(prior: Prior) -> Tuple[Prior, Optional[StaircaseTilt]]:
    if prior.family is PriorFamily.TILTED and prior.base is not None:
        return prior.base, prior.tilt
    return prior, None


# ==========================================================================
# SIMULATE
# ==========================================================================

def simulate_seed(cfg: ExperimentConfig, seed: int, repo: Optional[TraceRepository] = None) -> Dict[str, object]:
    """Una partida completa con traza, puntos de control y auditorías."""
    strategy = cfg.build_strategy()
    K0 = strategy.initial_capital
    state = new_game(cfg.variant, K0)
    reality = cfg.build_reality(seed, K0)

    prior = strategy.prior if isinstance(strategy, BayesMixture) else None
    base, tilt = _base_and_tilt(prior) if prior is not None else (None, None)
    checkpoints = set(cfg.report_checkpoints)
    rich_level = K0 * Config.RICH_THRESHOLD_FACTOR

    entries: List[Dict[str, object]] = []
    max_ratios = {"slln": 0.0, "sqrtlog": 0.0, "lil": 0.0}
    K_max, K_min = K0, K0
    rich_round = None
    identity_violations, identity_max = 0, 0.0
    bound_violations: List[Dict[str, object]] = []
    tail_start = max(1, cfg.horizon - cfg.horizon // 10)
    s_over_b_tail = 0.0

    writer: Optional[TraceWriter] = repo.open_trace(cfg.name, seed, jsonl=cfg.jsonl) if repo else None
    try:
        for state, record in play_game(strategy, reality, state, cfg.horizon):
            if writer:
                writer.write(record)
            n = state.n
            K_max, K_min = max(K_max, state.K), min(K_min, state.K)
            if rich_round is None and state.K >= rich_level:
                rich_round = n
                logger.info(f"Semilla {seed}: K supera {Config.RICH_THRESHOLD_FACTOR:g}·K0 en n={n}.")

            gap = capital_identity_gap(strategy, state)
            if gap is not None:
                identity_max = max(identity_max, gap)
                if gap > Config.CAPITAL_IDENTITY_TOL:
                    identity_violations += 1
                    if identity_violations == 1:
                        logger.error(f"Semilla {seed}: identidad de capital rota en n={n} (gap={gap!r}).")

            stats = self_normalized_stats(state)
            for name in max_ratios:
                value = getattr(stats, name)
                if value is not None:
                    max_ratios[name] = max(max_ratios[name], abs(value))
            if isinstance(strategy, Kronecker) and n >= tail_start:
                s_over_b_tail = max(s_over_b_tail, abs(state.S) / strategy.b_values[n - 1])

            if n in checkpoints:
                entry = {
                    "n": n, "S": state.S, "A": state.A, "K": state.K,
                    "eps": strategy.proportion(),
                    "slln": stats.slln, "sqrtlog": stats.sqrtlog, "lil": stats.lil,
                }
                if isinstance(strategy, Kronecker):
                    entry["Y"] = strategy.Y
                    entry["S_over_b"] = state.S / strategy.b_values[n - 1]
                if base is not None:
                    checks = check_bounds(state.S, state.A, n, base, _log(state.K), cfg.theorems, cfg,
                                          tilt, _log(state.K) if tilt else None)
                    entry["bounds"] = [c.to_dict() for c in checks]
                    for c in checks:
                        if c.result.applicable and not c.holds:
                            bound_violations.append({"seed": seed, "round": n, "key": c.key})
                entries.append(entry)
                logger.info(f"Semilla {seed}, n={n}: S={state.S:.6g}, A={state.A:.6g}, K={state.K:.6g}.")
    finally:
        if writer:
            writer.close()

    ruined = state.K <= 0.0 or bool(getattr(strategy, "ruined", False))
    summary = {
        "seed": seed,
        "rounds": state.n,
        "K0": K0,
        "K_final": state.K,
        "K_max": K_max,
        "K_min": K_min,
        "ruined": ruined,
        "rich_round": rich_round,
        "verdict": state.verdict or "ok",
        "max_ratios": max_ratios,
        "identity_max_gap": identity_max,
        "identity_violations": identity_violations,
        "bound_violations": len(bound_violations),
        "strategy": strategy.diagnostics(),
        "reality": reality.diagnostics(),
    }
    if isinstance(strategy, Kronecker):
        summary["S_over_b_tail_max"] = s_over_b_tail
    if ruined:
        logger.warning(f"Semilla {seed}: Skeptic arruinado (K={state.K!r}).")
    return {
        "summary": summary,
        "checkpoints": entries,
        "violations": bound_violations,
        "trace": writer.csv_path if writer else None,
    }


def run_simulate(cfg: ExperimentConfig, repo: Optional[TraceRepository] = None) -> ServiceResult:
    repo = repo or TraceRepository(cfg.output_dir)
    runs = [simulate_seed(cfg, seed, repo) for seed in cfg.seeds]

    violated = any(run["summary"]["identity_violations"] or run["summary"]["bound_violations"]
                   or run["summary"]["verdict"] == COLLATERAL_VIOLATION for run in runs)
    report = {
        "command": "simulate",
        "config": cfg.describe(),
        "runs": runs,
        "status": "violation" if violated else "ok",
    }
    path = repo.save_report(f"simulate_{cfg.name}", report)
    artifacts = [run["trace"] for run in runs if run["trace"]] + [path]
    return ServiceResult("simulate", EXIT_VIOLATION if violated else EXIT_OK, report, path, artifacts)


# ==========================================================================
# VERIFY-BOUNDS
# ==========================================================================

def verify_seed(cfg: ExperimentConfig, seed: int, theorems: Tuple[str, ...]) -> Dict[str, object]:
    """
    Campaña de una semilla. La mezcla base juega; si remark41 está activo, una mezcla
    con la densidad inclinada observa el mismo camino.
    """
    base, tilt = _base_and_tilt(cfg.build_prior())
    strategy = BayesMixture(base, cfg.quad)
    shadow = None
    if REMARK41 in theorems:
        tilt = tilt or build_staircase_tilt(base)
        shadow = BayesMixture(make_tilted(base, tilt), cfg.quad)

    K0 = strategy.initial_capital
    state = new_game(cfg.variant, K0)
    reality = cfg.build_reality(seed, K0)

    stats: Dict[str, Dict[str, object]] = {}
    offending: List[Dict[str, object]] = []
    for state, record in play_game(strategy, reality, state, cfg.horizon):
        log_shadow = None
        if shadow is not None:
            shadow.observe(record.x)
            log_shadow = shadow.log_integral_capital()
        for check in check_bounds(state.S, state.A, state.n, base, _log(state.K), theorems, cfg,
                                  tilt, log_shadow):
            entry = stats.setdefault(check.key, {
                "theorem": check.theorem, "applicable_rounds": 0, "violations": 0,
                "min_log_slack": math.inf, "max_log_slack": -math.inf,
            })
            if not check.result.applicable:
                continue
            slack = check.result.log_slack(check.log_capital)
            entry["applicable_rounds"] += 1
            entry["min_log_slack"] = min(entry["min_log_slack"], slack)
            entry["max_log_slack"] = max(entry["max_log_slack"], slack)
            if not check.holds:
                entry["violations"] += 1
                if entry["violations"] <= MAX_OFFENDING_PER_KEY:
                    offending.append({"seed": seed, "round": state.n, "key": check.key,
                                      "log_K": check.log_capital, "log_bound": check.result.log_value})
    return {"seed": seed, "rounds": state.n, "stats": stats, "offending": offending}


def _verify_job(job: Tuple[ExperimentConfig, int, Tuple[str, ...]]) -> Dict[str, object]:
    cfg, seed, theorems = job
    return verify_seed(cfg, seed, theorems)


def reduce_verification(results: Sequence[Dict[str, object]], theorems: Sequence[str]) -> Dict[str, object]:
    """Reducción ordenada por semilla: mismas entradas, mismo reporte."""
    keys: Dict[str, Dict[str, object]] = {}
    offending: List[Dict[str, object]] = []
    for result in sorted(results, key=lambda r: r["seed"]):
        offending.extend(result["offending"])
        for key, entry in result["stats"].items():
            total = keys.setdefault(key, {
                "theorem": entry["theorem"], "applicable_rounds": 0, "violations": 0,
                "min_log_slack": math.inf, "max_log_slack": -math.inf,
            })
            total["applicable_rounds"] += entry["applicable_rounds"]
            total["violations"] += entry["violations"]
            total["min_log_slack"] = min(total["min_log_slack"], entry["min_log_slack"])
            total["max_log_slack"] = max(total["max_log_slack"], entry["max_log_slack"])

    verdicts: Dict[str, Dict[str, object]] = {}
    for theorem in theorems:
        members = [entry for entry in keys.values() if entry["theorem"] == theorem]
        applicable = sum(e["applicable_rounds"] for e in members)
        violations = sum(e["violations"] for e in members)
        if violations:
            verdict = "violated"
        elif applicable < Config.MIN_APPLICABLE_ROUNDS:
            verdict = "inconclusive"
            logger.warning(f"{theorem}: solo {applicable} rondas aplicables "
                           f"(< {Config.MIN_APPLICABLE_ROUNDS}); veredicto inconcluso.")
        else:
            verdict = "sound"
        verdicts[theorem] = {"verdict": verdict, "applicable_rounds": applicable, "violations": violations}
    return {"keys": keys, "theorems": verdicts, "offending": offending}


def run_verify_bounds(cfg: ExperimentConfig, theorems: Optional[Sequence[str]] = None,
                      repo: Optional[TraceRepository] = None) -> ServiceResult:
    if cfg.strategy != "bayes":
        raise ConfigError("strategy", "verify-bounds requiere strategy = bayes")
    theorems = tuple(theorems or cfg.theorems)
    repo = repo or TraceRepository(cfg.output_dir)
    if cfg.inflation != 1.0:
        logger.warning(f"Cotas infladas por {cfg.inflation:g} (modo de prueba del arnés).")

    jobs = [(cfg, seed, theorems) for seed in cfg.seeds]
    logger.info(f"Verificación de {', '.join(theorems)} sobre {len(jobs)} semillas "
                f"({cfg.workers} procesos).")
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_verify_job, jobs))
    else:
        results = [_verify_job(job) for job in jobs]

    reduced = reduce_verification(results, theorems)
    violated = any(v["verdict"] == "violated" for v in reduced["theorems"].values())
    if violated:
        first = reduced["offending"][0]
        logger.error(f"Violación de cota {first['key']} en semilla {first['seed']}, ronda {first['round']}.")
    reduced["reproduce"] = [
        {"seed": o["seed"], "round": o["round"], "key": o["key"],
         "command": f"simulate --set seeds={o['seed']} --set horizon={o['round']}"}
        for o in reduced["offending"]
    ]
    report = {
        "command": "verify-bounds",
        "config": cfg.describe(),
        "inflation": cfg.inflation,
        "sharp": cfg.sharp,
        "seeds": list(cfg.seeds),
        "results": reduced,
        "status": "violation" if violated else "ok",
    }
    path = repo.save_report(f"verify_{cfg.name}", report)
    return ServiceResult("verify-bounds", EXIT_VIOLATION if violated else EXIT_OK, report, path, [path])


# ==========================================================================
# ADVERSARY
# ==========================================================================

def run_adversary_demo(cfg: ExperimentConfig, strategy: Optional[SkepticStrategy] = None,
                       repo: Optional[TraceRepository] = None) -> ServiceResult:
    """
    El adversario complaciente contra la estrategia del experimento. Cuando Σ 1/b_n
    converge el reporte no afirma nada sobre el testigo S_n / b_n >= 1.
    """
    repo = repo or TraceRepository(cfg.output_dir)
    strategy = strategy or cfg.build_strategy()
    K0 = strategy.initial_capital
    adversary = ComplyingAdversary(cfg.b, K0, cfg.adversary_scheme, cfg.adversary_window, cfg.adversary_tol)
    state = new_game(cfg.variant, K0)

    summable = cfg.b.summable
    claim = "witness_guaranteed" if summable is False else ("no_claim" if summable else "unknown")
    if claim != "witness_guaranteed":
        logger.info(f"b = {cfg.b.source}: sin garantía de testigo (claim={claim}).")

    fault = None
    sup_K = K0
    with repo.open_trace(f"adversary_{cfg.name}", jsonl=cfg.jsonl) as writer:
        try:
            for state, record in play_game(strategy, adversary, state, cfg.horizon):
                writer.write(record)
                sup_K = max(sup_K, state.K)
        except InvariantViolationError as e:
            fault = str(e)

    st = adversary.state
    sup_ok = sup_K <= st.L0 * (1.0 + cfg.adversary_tol)
    monotone_ok = st.monotone_violations == 0
    collateral = state.verdict == COLLATERAL_VIOLATION
    if claim == "witness_guaranteed" and st.witness_round is None and not collateral and fault is None:
        logger.warning(f"Sin testigo S_n/b_n >= 1 dentro del horizonte N={cfg.horizon}.")

    violated = fault is not None or (not collateral and not (sup_ok and monotone_ok))
    report = {
        "command": "adversary",
        "config": cfg.describe(),
        "claim": claim,
        "summable": summable,
        "witness_round": st.witness_round,
        "sup_K": sup_K,
        "sup_K_bound_ok": sup_ok,
        "sup_cprod": st.sup_cprod,
        "L0": st.L0,
        "L_final": st.L,
        "L_monotone": monotone_ok,
        "monotone_violations": st.monotone_violations,
        "switched_at": st.switched_at,
        "bankruptcy_round": st.bankruptcy_round,
        "verdict": state.verdict or "ok",
        "rounds": state.n,
        "fault": fault,
        "adversary": adversary.diagnostics(),
        "strategy": strategy.diagnostics(),
        "status": "violation" if violated else "ok",
    }
    path = repo.save_report(f"adversary_{cfg.name}", report)
    return ServiceResult("adversary", EXIT_VIOLATION if violated else EXIT_OK, report, path,
                         [writer.csv_path, path])


# ==========================================================================
# RATES
# ==========================================================================

def rate_row(n: int, S: float, A: float, power_a: float, efkp_b: int, efkp_gamma: float) -> Tuple:
    """n, A, S y los cuatro cocientes; None donde el normalizador no está definido."""
    log_A = math.log(A) if A > 0.0 else -math.inf
    sqrtlog = S / math.sqrt(A * log_A) if log_A > 0.0 else None
    power = S / math.sqrt((1.0 - power_a) * A * log_A) if log_A > 0.0 else None
    lil = S / math.sqrt(2.0 * A * math.log(log_A)) if log_A > 1.0 else None
    try:
        efkp_gap = S - math.sqrt(A) * efkp_psi(A, efkp_b, efkp_gamma)
    except PriorDomainError:
        efkp_gap = None
    return n, A, S, sqrtlog, power, lil, efkp_gap


def run_rates(cfg: ExperimentConfig, repo: Optional[TraceRepository] = None) -> ServiceResult:
    if cfg.horizon < 1000:
        raise ConfigError("horizon", "rates requiere horizon >= 1000")
    repo = repo or TraceRepository(cfg.output_dir)
    checkpoints = set(cfg.checkpoints or auto_checkpoints(cfg.horizon, per_decade=20))

    runs, artifacts = [], []
    for seed in cfg.seeds:
        strategy = cfg.build_strategy()
        state = new_game(cfg.variant, strategy.initial_capital)
        reality = cfg.build_reality(seed, strategy.initial_capital)
        rows = []
        for state, _ in play_game(strategy, reality, state, cfg.horizon):
            if state.n in checkpoints:
                rows.append(rate_row(state.n, state.S, state.A, cfg.rates_a, cfg.rates_efkp_b,
                                     cfg.rates_efkp_gamma))
        path = repo.save_rates(f"rates_{cfg.name}_seed{seed}", rows)
        artifacts.append(path)

        maxima = {}
        for column, index in (("sqrtlog", 3), ("power", 4), ("lil", 5), ("efkp_gap", 6)):
            values = [row[index] for row in rows if row[index] is not None]
            maxima[column] = max(values) if values else None
        runs.append({"seed": seed, "rows": len(rows), "rounds": state.n, "max": maxima, "csv": path})

    report = {"command": "rates", "config": cfg.describe(), "power_a": cfg.rates_a, "runs": runs,
              "status": "ok"}
    path = repo.save_report(f"rates_{cfg.name}", report)
    return ServiceResult("rates", EXIT_OK, report, path, artifacts + [path])


# ==========================================================================
# FUNCTIONAL
# ==========================================================================

def build_psi(cfg: ExperimentConfig) -> UpperClassFunction:
    name = cfg.functional_psi
    try:
        if name == "reference":
            return make_reference()
        if name == "sqrt_loglog":
            return make_sqrt_loglog(cfg.functional_c)
        if name == "constant":
            return make_constant(cfg.functional_c)
        if name == "efkp":
            return make_efkp_psi(int(cfg.prior_params.get("b", 4)), float(cfg.prior_params.get("gamma", 0.5)))
        if name == "g":
            return apply_G(cfg.build_prior())
    except ConfigError:
        raise
    except GameError as e:
        raise ConfigError("functional.psi", str(e)) from e
    raise ConfigError("functional.psi", f"función desconocida '{name}' "
                                        f"(use reference, sqrt_loglog, constant, efkp, g)")


def _exp(log_value: float) -> float:
    return math.exp(log_value) if log_value < 709.0 else math.inf


def prior_table(prior: Prior, grid_t: np.ndarray) -> Tuple[List[Tuple], int]:
    """Filas epsilon, pi, FGpi, ratio; devuelve también las filas sin composición."""
    psi = apply_G(prior)
    rows, missing = [], 0
    for t in grid_t:
        log_pi = float(prior.log_density_t(t))
        try:
            comp = compose_FG_t(prior, float(t), psi)
            rows.append((math.exp(-t), _exp(log_pi), _exp(comp.log_closed), comp.ratio))
        except (PriorDomainError, FunctionalDomainError) as e:
            logger.debug(f"F[G[π]] sin valor en t={t!r}: {e}")
            rows.append((math.exp(-t), _exp(log_pi), None, None))
            missing += 1
    return rows, missing


def psi_table(psi: UpperClassFunction, grid_u: np.ndarray) -> Tuple[List[Tuple], int]:
    """Filas lambda, psi, GFpsi, diff; cuenta los puntos donde G[F[ψ]] >= ψ con ψ > 1."""
    rows, not_below = [], 0
    for u in grid_u:
        g = float(psi.psi_u(u))
        comp = compose_GF_u(psi, float(u))
        gf = comp.value
        if g > 1.0 and not gf < g:
            not_below += 1
        rows.append((_exp(u), g, gf, gf - g))
    return rows, not_below


def asymptotic_band(prior: Prior) -> Dict[str, object]:
    """F[G[π]] / π en una profundidad t donde el cociente ya entra en la banda."""
    t = BAND_DEPTH_T_LIL if prior.family is PriorFamily.LIL else BAND_DEPTH_T
    comp = compose_FG_t(prior, t)
    lo, hi = BAND_LIMITS
    return {"t": t, "ratio": comp.ratio, "beta": comp.beta, "inside": lo <= comp.ratio <= hi}


def run_functional(cfg: ExperimentConfig, op: str, repo: Optional[TraceRepository] = None) -> ServiceResult:
    if op not in FUNCTIONAL_OPS:
        raise ConfigError("--op", f"operación desconocida '{op}' (use {', '.join(FUNCTIONAL_OPS)})")
    repo = repo or TraceRepository(cfg.output_dir)
    report: Dict[str, object] = {"command": "functional", "op": op, "config": cfg.describe()}
    artifacts: List[str] = []
    violated = False

    try:
        if op in ("F", "FG"):
            if op == "F":
                psi = build_psi(cfg)
                prior = apply_F(psi)
                report["psi"] = psi.describe()
            else:
                prior = cfg.build_prior()
            rows, missing = prior_table(prior, default_grid_t())
            artifacts.append(repo.save_functional(f"functional_{op}_{cfg.name}", PRIOR_FUNCTIONAL_COLUMNS, rows))
            report.update({"prior": prior.describe(), "rows": len(rows), "missing": missing})
            if op == "FG":
                band = asymptotic_band(prior)
                report["band"] = band
                violated = not band["inside"]

        elif op in ("G", "GF"):
            psi = apply_G(cfg.build_prior()) if op == "G" else build_psi(cfg)
            grid = default_grid_u(psi, psi)
            rows, not_below = psi_table(psi, grid)
            artifacts.append(repo.save_functional(f"functional_{op}_{cfg.name}", PSI_FUNCTIONAL_COLUMNS, rows))
            report.update({"psi": psi.describe(), "rows": len(rows), "gf_not_below_psi": not_below})
            violated = not_below > 0

        elif op == "equiv":
            prior = cfg.build_prior()
            psi = build_psi(cfg)
            scale = cfg.functional_scale
            report["priors"] = equivalent_priors(prior, prior.rescaled(scale)).to_dict()
            report["psis"] = equivalent_psis(psi, psi.shifted(scale)).to_dict()
            report["preserve_G"] = preserve_equivalence_check((prior, prior.rescaled(scale)), "G").to_dict()
            report["preserve_F"] = preserve_equivalence_check((psi, psi.shifted(scale)), "F").to_dict()
            violated = not (report["preserve_G"]["passed"] and report["preserve_F"]["passed"])

        else:
            psi = build_psi(cfg)
            result = integral_test(psi)
            report.update({"psi": psi.describe(), "integral_test": result.to_dict(),
                           "assumption2": validate_assumption2(psi).to_dict()})

    except InvariantViolationError as e:
        logger.error(f"Cálculo funcional '{op}' inconsistente: {e}", exc_info=True)
        report["fault"] = str(e)
        violated = True

    report["status"] = "violation" if violated else "ok"
    path = repo.save_report(f"functional_{op}_{cfg.name}", report)
    artifacts.append(path)
    return ServiceResult("functional", EXIT_VIOLATION if violated else EXIT_OK, report, path, artifacts)


# ==========================================================================
# DESPACHO
# ==========================================================================

def run_command(command: str, cfg: ExperimentConfig, **options) -> ServiceResult:
    """Punto único que traduce las excepciones del dominio a códigos de salida."""
    handlers = {
        "simulate": lambda: run_simulate(cfg),
        "verify-bounds": lambda: run_verify_bounds(cfg, options.get("theorems")),
        "adversary": lambda: run_adversary_demo(cfg),
        "rates": lambda: run_rates(cfg),
        "functional": lambda: run_functional(cfg, options.get("op", "FG")),
    }
    if command not in handlers:
        raise ConfigError("command", f"comando desconocido '{command}'")
    try:
        result = handlers[command]()
    except ConfigError as e:
        logger.error(f"Error de configuración en '{command}': {e}")
        return ServiceResult(command, EXIT_CONFIG, {"error": str(e), "field": e.field})
    except InvariantViolationError as e:
        logger.error(f"Invariante violado en '{command}': {e}", exc_info=True)
        return ServiceResult(command, EXIT_VIOLATION, {"error": str(e)})
    except GameError as e:
        logger.error(f"Entrada fuera de dominio en '{command}': {e}")
        return ServiceResult(command, EXIT_CONFIG, {"error": str(e)})
    logger.info(f"Comando '{command}' terminado con código {result.exit_code}.")
    return result
