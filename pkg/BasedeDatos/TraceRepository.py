"""
PROYECTO: SkepticLab - Probabilidad Teórica de Juegos
MÓDULO: Gestión de Resultados (TraceRepository.py)
DESCRIPCIÓN: Escribe las trazas ronda a ronda (CSV y JSON-lines), las curvas de tasas,
             las tablas del cálculo funcional y los reportes JSON versionados. Los
             reales se escriben con repr para que una repetición sea idéntica byte a byte.
"""

import csv
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from Config.Config import Config
from Modulos.GameEngine import RoundRecord

logger = logging.getLogger(__name__)

# ============================================================================
# ESQUEMA DE ARCHIVOS Y DEFINICIÓN DE COLUMNAS
# ============================================================================
TRACE_COLUMNS = ('n', 'M', 'eps', 'x', 'S', 'A', 'K')

RATE_COLUMNS = ('n', 'A', 'S', 'sqrtlog', 'power', 'lil', 'efkp_gap')

PRIOR_FUNCTIONAL_COLUMNS = ('epsilon', 'pi', 'FGpi', 'ratio')
PSI_FUNCTIONAL_COLUMNS = ('lambda', 'psi', 'GFpsi', 'diff')


def format_cell(value: Any) -> str:
    """None -> celda vacía; reales con repr (ida y vuelta exacta)."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _parse_cell(text: str) -> Optional[float]:
    return float(text) if text != "" else None


def _json_ready(value: Any) -> Any:
    """Convierte tipos de numpy y reales no finitos a valores JSON estándar."""
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


# ============================================================================
# TRAZAS
# ============================================================================

class TraceWriter:
    """
    Escritor incremental de la traza n,M,eps,x,S,A,K. Con jsonl_path escribe
    además una línea JSON por ronda.
    """

    def __init__(self, csv_path: str, jsonl_path: Optional[str] = None):
        self.csv_path = csv_path
        self.jsonl_path = jsonl_path
        self.rows = 0
        os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
        self._csv_handle = open(csv_path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._csv_handle, lineterminator="\n")
        self._writer.writerow(TRACE_COLUMNS)
        self._jsonl_handle = open(jsonl_path, "w", encoding="utf-8") if jsonl_path else None

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def write(self, record: RoundRecord) -> None:
        values = (record.n, record.M, record.eps, record.x, record.S, record.A, record.K_after)
        self._writer.writerow([format_cell(v) for v in values])
        if self._jsonl_handle is not None:
            payload = dict(zip(TRACE_COLUMNS, _json_ready(list(values))))
            self._jsonl_handle.write(json.dumps(payload, sort_keys=True) + "\n")
        self.rows += 1

    def close(self) -> None:
        if self._csv_handle and not self._csv_handle.closed:
            self._csv_handle.close()
        if self._jsonl_handle and not self._jsonl_handle.closed:
            self._jsonl_handle.close()
        logger.debug(f"Traza cerrada: {self.csv_path} ({self.rows} rondas).")


def read_trace(path: str) -> List[RoundRecord]:
    """Lee una traza escrita por TraceWriter para reproducirla con GameEngine.replay."""
    records = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ValueError(f"Cabecera de traza inesperada en {path}: {reader.fieldnames}.")
        for row in reader:
            records.append(RoundRecord(
                n=int(row['n']),
                M=float(row['M']),
                eps=_parse_cell(row['eps']),
                x=float(row['x']),
                S=float(row['S']),
                A=float(row['A']),
                K_after=float(row['K']),
            ))
    return records


# ============================================================================
# TABLAS Y REPORTES
# ============================================================================

def write_table(path: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV de cabecera fija; None se escribe como celda vacía."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"Fila con {len(row)} celdas para {len(columns)} columnas.")
            writer.writerow([format_cell(v) for v in row])
            count += 1
    logger.info(f"Tabla escrita: {path} ({count} filas).")
    return path


def write_report(path: str, payload: Dict[str, Any]) -> str:
    """JSON con claves ordenadas y schema_version."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    document = dict(_json_ready(payload))
    document["schema_version"] = Config.REPORT_SCHEMA_VERSION
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, sort_keys=True, indent=2, allow_nan=False)
        handle.write("\n")
    logger.info(f"Reporte escrito: {path}.")
    return path


def read_report(path: str) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


class TraceRepository:
    """
    Resuelve las rutas de salida bajo el árbol de Config (Trazas/, Reportes/, CSV/).
    """

    def __init__(self, out_dir: Optional[str] = None):
        if out_dir is None:
            self.traces_dir = Config.TRACES_DIR
            self.reports_dir = Config.REPORTS_DIR
            self.csv_dir = Config.CSV_DIR
        else:
            self.traces_dir = os.path.join(out_dir, "Trazas")
            self.reports_dir = os.path.join(out_dir, "Reportes")
            self.csv_dir = os.path.join(out_dir, "CSV")
        for folder in (self.traces_dir, self.reports_dir, self.csv_dir):
            os.makedirs(folder, exist_ok=True)

    def trace_path(self, name: str, seed: Optional[int] = None, suffix: str = "csv") -> str:
        stem = name if seed is None else f"{name}_seed{seed}"
        return os.path.join(self.traces_dir, f"{stem}.{suffix}")

    def open_trace(self, name: str, seed: Optional[int] = None, jsonl: bool = False) -> TraceWriter:
        jsonl_path = self.trace_path(name, seed, "jsonl") if jsonl else None
        return TraceWriter(self.trace_path(name, seed), jsonl_path)

    def save_report(self, name: str, payload: Dict[str, Any]) -> str:
        return write_report(os.path.join(self.reports_dir, f"{name}.json"), payload)

    def save_rates(self, name: str, rows: Iterable[Sequence[Any]]) -> str:
        return write_table(os.path.join(self.csv_dir, f"{name}.csv"), RATE_COLUMNS, rows)

    def save_functional(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        return write_table(os.path.join(self.csv_dir, f"{name}.csv"), columns, rows)
