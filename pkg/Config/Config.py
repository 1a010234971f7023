"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Configuración Centralizada (Config.py)
DESCRIPCIÓN: Define las constantes globales del motor: cuadratura, tolerancias de
             verificación, mallas del cálculo funcional, directorios de salida y
             la inicialización del registro de eventos.
"""

import os
import logging


class Config:
    """
    Configuración centralizada del motor de estrategias bayesianas.
    """

    # ==========================================================================
    # JUEGO
    # ==========================================================================

    DEFAULT_VARIANT = "OUFG"
    DEFAULT_INITIAL_CAPITAL = 1.0

    # Skeptic "se hace infinitamente rico" al superar este múltiplo de K0
    RICH_THRESHOLD_FACTOR = 1e9

    # ==========================================================================
    # CUADRATURA DE LA MEZCLA BAYESIANA (ε = e^{-t})
    # ==========================================================================

    QUAD_TMAX = 60.0
    QUAD_PANELS = 40
    QUAD_POINTS = 16
    QUAD_PANEL_GROWTH = 1.1
    QUAD_COARSE_POINTS = 8          # Regla embebida para estimar el error
    QUAD_MIN_NODES = 64
    QUAD_ERROR_FLOOR = 1e-12        # Piso relativo de la estimación de error

    # Tolerancia entre capital recursivo e integral
    CAPITAL_IDENTITY_TOL = 1e-6

    # ==========================================================================
    # DENSIDADES A PRIORI
    # ==========================================================================

    LIL_EPS0_FACTOR = 1.01          # eps0 = e^{-e * 1.01}
    EFKP_LEVEL_AT_EPS0 = 1.5        # ln_b(1/eps0) = 1.5
    STAIRCASE_KMAX = 60
    DELTA_GRID_POINTS = 10_000
    DELTA_GRID_TMAX = 69.077552789821368    # ln(1e30)

    # Validación de regularidad de las densidades
    VALIDATION_MONOTONE_TOL = 1e-12
    VALIDATION_CUTOFFS = (1e-4, 1e-8, 1e-16)
    VALIDATION_DEEP_FACTOR = 10.0   # Malla en t hasta 10·t_π cuando ε_π no es representable

    # ==========================================================================
    # DISCRETAS
    # ==========================================================================

    DISCRETE_MAX_J = 60

    # ==========================================================================
    # COTAS Y VERIFICACIÓN
    # ==========================================================================

    BOUND_SLACK = 1e-6
    MIN_APPLICABLE_ROUNDS = 100
    THM41_C_GRID = (0.1, 0.2, 0.4)
    PROP31_DELTA_GRID = (0.01, 0.02, 0.03)

    # ==========================================================================
    # ADVERSARIO COMPLACIENTE
    # ==========================================================================

    ADVERSARY_TOL = 1e-9
    ADVERSARY_WINDOW = 1000
    ADVERSARY_SCHEME = "growth"

    # ==========================================================================
    # CÁLCULO FUNCIONAL (F, G)
    # ==========================================================================

    GRID_EPS_MIN = 1e-30
    GRID_EPS_MAX = 1e-2
    GRID_POINTS = 200
    EQUIV_RATIO = 1e3
    EQUIV_SLOPE_TOL = 0.1
    COMPOSITION_REL_TOL = 1e-10

    # Prueba integral de clase superior
    INTEGRAL_TEST_U_HI = 1e300
    INTEGRAL_TEST_GROWTH = 10.0
    INTEGRAL_TEST_MARGIN = 0.05
    INTEGRAL_TEST_LOG_CORRECTION = 2.0
    INTEGRAL_TEST_MAX_DEPTH = 3

    # Tope de ε_π para densidades construidas con F
    FUNCTIONAL_EPS_PI_CAP = 0.5

    # ==========================================================================
    # RUTAS Y DIRECTORIOS
    # ==========================================================================

    BASE_DIR = os.path.abspath(os.getcwd())

    OUT_DIR = os.getenv("SKEPTICLAB_OUT_DIR") or os.path.join(BASE_DIR, "Resultados")
    LOG_DIR = os.path.join(BASE_DIR, "Eventos")
    LOG_FILE = os.path.join(LOG_DIR, "app.log")

    TRACES_DIR = os.path.join(OUT_DIR, "Trazas")
    REPORTS_DIR = os.path.join(OUT_DIR, "Reportes")
    CSV_DIR = os.path.join(OUT_DIR, "CSV")

    DIRS_TO_CREATE = (
        OUT_DIR,
        LOG_DIR,
        TRACES_DIR,
        REPORTS_DIR,
        CSV_DIR,
    )

    REPORT_SCHEMA_VERSION = 1

    # ==========================================================================
    # MODO DEBUG
    # ==========================================================================

    DEBUG_MODE = False

    # ==========================================================================
    # INICIALIZACIÓN DEL SISTEMA
    # ==========================================================================

    @classmethod
    def set_output_dir(cls, out_dir: str):
        """
        Redirige el árbol de resultados (variable de entorno o --set output.dir).
        """
        cls.OUT_DIR = os.path.abspath(out_dir)
        cls.TRACES_DIR = os.path.join(cls.OUT_DIR, "Trazas")
        cls.REPORTS_DIR = os.path.join(cls.OUT_DIR, "Reportes")
        cls.CSV_DIR = os.path.join(cls.OUT_DIR, "CSV")
        cls.DIRS_TO_CREATE = (cls.OUT_DIR, cls.LOG_DIR, cls.TRACES_DIR, cls.REPORTS_DIR, cls.CSV_DIR)

    @classmethod
    def initialize(cls):
        """
        Inicializa la configuración del sistema.
        """
        for path in cls.DIRS_TO_CREATE:
            os.makedirs(path, exist_ok=True)

        logging.basicConfig(
            filename=cls.LOG_FILE,
            level=logging.DEBUG if cls.DEBUG_MODE else logging.INFO,
            format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
            filemode="a"
        )

        cls.logger = logging.getLogger(__name__)

        cls.logger.info("=" * 70)
        cls.logger.info("SkepticLab - Motor de Probabilidad Teorica de Juegos - Inicializado")
        cls.logger.info("=" * 70)
        cls.logger.info(f"Directorio de resultados: {cls.OUT_DIR}.")
