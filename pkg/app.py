"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Punto de Entrada Principal (app.py)
DESCRIPCIÓN: Inicializa el entorno, lee el experimento y despacha los subcomandos
             simulate, verify-bounds, adversary, rates y functional.
"""

import argparse
import logging
import sys
from typing import List, Optional

from Config.Config import Config
from Config.ExperimentConfig import ExperimentConfig, parse_theorems
from Herramientas.GameErrors import ConfigError
from Modulos.SimulationService import EXIT_CONFIG, FUNCTIONAL_OPS, run_command

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skepticlab",
        description="Motor de probabilidad teórica de juegos: mezclas bayesianas, cotas y cálculo F/G.",
    )
    parser.add_argument("--debug", action="store_true", help="Registro a nivel DEBUG.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("config", nargs=None if config_required else "?", help="Archivo de experimento.")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="CLAVE=VALOR",
                       help="Sobrescribe una clave del archivo (repetible).")

    add_common(sub.add_parser("simulate", help="Una partida completa con traza y reporte."))

    verify = sub.add_parser("verify-bounds", help="Campaña de verificación de cotas sobre semillas.")
    add_common(verify)
    verify.add_argument("--theorems", default=None, help="Lista separada por comas (thm41,thm43,remark41,prop31).")
    verify.add_argument("--inflate", type=float, default=None, metavar="FACTOR",
                        help="Multiplica cada cota por FACTOR (solo para probar el arnés).")

    add_common(sub.add_parser("adversary", help="Adversario complaciente contra la estrategia."))
    add_common(sub.add_parser("rates", help="Curvas de tasas auto-normalizadas."))

    functional = sub.add_parser("functional", help="Tablas y reportes del cálculo funcional F / G.")
    add_common(functional, config_required=False)
    functional.add_argument("--op", required=True, choices=FUNCTIONAL_OPS)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Lee el experimento, aplica las sobreescrituras y devuelve el código de salida
    del comando (0 correcto, 1 violación, 2 configuración).
    """
    args = build_parser().parse_args(argv)
    if args.debug:
        Config.DEBUG_MODE = True

    try:
        overrides = list(args.overrides)
        if getattr(args, "inflate", None) is not None:
            overrides.append(f"bounds.inflation={args.inflate!r}")
        cfg = ExperimentConfig.load(args.config, overrides)
        if cfg.output_dir:
            Config.set_output_dir(cfg.output_dir)
        Config.initialize()

        options = {}
        if args.command == "verify-bounds" and args.theorems:
            options["theorems"] = parse_theorems(args.theorems)
        if args.command == "functional":
            options["op"] = args.op
    except ConfigError as e:
        logger.error(f"Configuración inválida: {e}")
        print(f"Error de configuración: {e}", file=sys.stderr)
        return EXIT_CONFIG

    result = run_command(args.command, cfg, **options)
    if result.report_path:
        print(result.report_path)
    elif "error" in result.report:
        print(f"Error: {result.report['error']}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
