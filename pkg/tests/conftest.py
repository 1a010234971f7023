"""
Configuración compartida de pytest: raíz del proyecto en sys.path y salidas
redirigidas a un directorio temporal por prueba.
"""

import os
import sys

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from Config.Config import Config  # noqa: E402
from BasedeDatos.TraceRepository import TraceRepository  # noqa: E402


@pytest.fixture(autouse=True)
def output_dirs(tmp_path, monkeypatch):
    """Ninguna prueba escribe en Resultados/ ni en Eventos/ del proyecto."""
    out_dir = tmp_path / "Resultados"
    log_dir = tmp_path / "Eventos"
    monkeypatch.setattr(Config, "OUT_DIR", str(out_dir))
    monkeypatch.setattr(Config, "LOG_DIR", str(log_dir))
    monkeypatch.setattr(Config, "LOG_FILE", str(log_dir / "app.log"))
    monkeypatch.setattr(Config, "TRACES_DIR", str(out_dir / "Trazas"))
    monkeypatch.setattr(Config, "REPORTS_DIR", str(out_dir / "Reportes"))
    monkeypatch.setattr(Config, "CSV_DIR", str(out_dir / "CSV"))
    monkeypatch.setattr(Config, "DIRS_TO_CREATE", (str(out_dir), str(log_dir), str(out_dir / "Trazas"),
                                                   str(out_dir / "Reportes"), str(out_dir / "CSV")))
    monkeypatch.setattr(Config, "DEBUG_MODE", False)
    monkeypatch.delenv("SKEPTICLAB_OUT_DIR", raising=False)
    return out_dir


@pytest.fixture
def repo(tmp_path):
    return TraceRepository(str(tmp_path / "salida"))


@pytest.fixture
def write_csv(tmp_path):
    """Escribe una columna (o filas) en un CSV temporal y devuelve la ruta."""
    def _write(name, rows):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as handle:
            for row in rows:
                if isinstance(row, (list, tuple)):
                    handle.write(",".join(str(v) for v in row) + "\n")
                else:
                    handle.write(f"{row}\n")
        return str(path)
    return _write
