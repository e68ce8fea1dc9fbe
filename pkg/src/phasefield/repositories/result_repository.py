"""
Repository de Resultados
========================

Persistencia de artefactos de una ejecución: snapshots binarios, CSV de
canales y reportes JSON. Cada archivo lo escribe un único escritor, primero en
un temporal y luego con ``os.replace``.

Formato de snapshot (little-endian)::

    b"PFGSNAP1"                    magic, 8 bytes
    uint32                         longitud del header en bytes
    header                         JSON UTF-8 con claves ordenadas
    por estado: t, w[n], v[n], u[n]  float64

El header incluye ``mode_indices`` (multi-índice de cada coeficiente),
``eigenvalues``, ``n_states`` y ``n_coefficients``.
"""
import csv
import io
import json
import os
import struct
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..core.exceptions import PhaseFieldError, TrajectoryError
from ..core.logging_config import LoggerMixin
from ..schemas.reports import MonitorReport, RateReport
from ..services.galerkin_solver import Trajectory
from ..services.problem import ProblemData
from ..services.spectral_basis import SpectralBasis

SNAPSHOT_MAGIC = b"PFGSNAP1"
SNAPSHOT_VERSION = 1
PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """Notación científica con 17 cifras significativas (ida y vuelta exacta)"""
    return f"{float(value):.16e}"


class ResultRepository(LoggerMixin):
    """Escritura y lectura de artefactos en disco"""

    def _write_bytes(self, path: PathLike, payload: bytes) -> Path:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(tmp, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
            self.logger.info(f"Artefacto escrito: {path} ({len(payload)} bytes)")
            return path
        except OSError as e:
            self.logger.error(f"Error escribiendo {path}: {e}")
            raise

    # ------------------------------------------------------------------
    # Snapshots
    # ------------------------------------------------------------------
    def snapshot_header(self, traj: Trajectory, basis: SpectralBasis, pd: ProblemData) -> Dict[str, Any]:
        params = pd.params
        return {
            "format": "phasefield-snapshot",
            "version": SNAPSHOT_VERSION,
            "domain": {"lengths": list(basis.domain.lengths)},
            "n_modes": list(basis.n_modes),
            "mode_indices": basis.mode_indices.tolist(),
            "eigenvalues": basis.eigenvalues.tolist(),
            "dt": traj.dt,
            "n_states": len(traj),
            "n_coefficients": traj.n_coefficients,
            "params": {
                "alpha": params.alpha,
                "beta": params.beta,
                "eps": params.eps,
                "t_final": params.t_final,
                "regularize": params.regularize,
            },
            "metadata": traj.metadata,
            "layout": ["t", "w", "v", "u"],
        }

    def write_snapshot(self, path: PathLike, traj: Trajectory, basis: SpectralBasis, pd: ProblemData) -> Path:
        header = json.dumps(self.snapshot_header(traj, basis, pd), sort_keys=True).encode("utf-8")
        body = np.column_stack([traj.times, traj.w, traj.v, traj.u]).astype("<f8", copy=False)
        payload = SNAPSHOT_MAGIC + struct.pack("<I", len(header)) + header + body.tobytes(order="C")
        return self._write_bytes(path, payload)

    def read_snapshot(self, path: PathLike) -> Tuple[Dict[str, Any], Trajectory]:
        raw = Path(path).read_bytes()
        if raw[:8] != SNAPSHOT_MAGIC:
            raise TrajectoryError(f"{path} is not a snapshot file")
        (length,) = struct.unpack("<I", raw[8:12])
        header = json.loads(raw[12:12 + length].decode("utf-8"))
        n, size = header["n_states"], header["n_coefficients"]
        body = np.frombuffer(raw[12 + length:], dtype="<f8")
        if body.size != n * (1 + 3 * size):
            raise TrajectoryError(f"snapshot body has {body.size} values, expected {n * (1 + 3 * size)}")
        table = body.reshape(n, 1 + 3 * size)
        traj = Trajectory(
            times=table[:, 0],
            w=table[:, 1:1 + size],
            v=table[:, 1 + size:1 + 2 * size],
            u=table[:, 1 + 2 * size:],
            dt=header["dt"],
            metadata=header.get("metadata", {}),
        )
        return header, traj

    # ------------------------------------------------------------------
    # CSV
    # ------------------------------------------------------------------
    def _csv_bytes(self, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bytes:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return buffer.getvalue().encode("utf-8")

    def write_monitor_csv(self, path: PathLike, report: MonitorReport) -> Path:
        """Una fila por canal"""
        return self._write_bytes(path, self._csv_bytes(["channel", "value"], report.rows()))

    def write_levels_csv(self, path: PathLike, report: RateReport) -> Path:
        """Una fila por nivel, una columna por canal"""
        channels: List[str] = []
        for level in report.levels:
            for name in list(level.channels) + list(level.monitor):
                if name not in channels:
                    channels.append(name)
        header = ["index", report.parameter, "status"] + channels
        rows = []
        for level in report.levels:
            values = {**level.monitor, **level.channels}
            rows.append(
                [level.index, float(level.value), level.status]
                + [float(values.get(name, float("nan"))) for name in channels]
            )
        return self._write_bytes(path, self._csv_bytes(header, rows))

    # ------------------------------------------------------------------
    # JSON
    # ------------------------------------------------------------------
    def write_json(self, path: PathLike, payload: Union[BaseModel, Dict[str, Any]]) -> Path:
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2, sort_keys=True, default=str)
        return self._write_bytes(path, (text + "\n").encode("utf-8"))

    def write_error(self, directory: PathLike, payload: Dict[str, Any]) -> Path:
        try:
            return self.write_json(Path(directory) / "error.json", payload)
        except OSError as e:
            raise PhaseFieldError(f"cannot write error report: {e}") from e
