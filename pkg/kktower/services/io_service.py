"""
CSV and JSON artifacts

Every CSV starts with a `# ` line holding the JSON metadata needed to re-run,
then the header row. Floats are written with 17 significant digits and LF
line endings so that identical runs give identical files.
"""

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from kktower import __version__
from kktower.core.config import Settings
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import EnergyBreakdown, VerificationReport
from kktower.schemas.scenario import Scenario
from kktower.schemas.towers import BraneSpectrum, BraneTower, ContinuousTower

logger = logging.getLogger(__name__)

Tower = Union[ContinuousTower, BraneTower]
PathLike = Union[str, Path]


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, allow_nan=False)


def params_metadata(params: ModelParams) -> Dict[str, Any]:
    return params.model_dump(mode="json")


def grid_metadata(z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None) -> Dict[str, Any]:
    meta: Dict[str, Any] = {"z_grid": z_grid.metadata()}
    if r_grid is not None:
        meta["r_grid"] = r_grid.metadata()
    return meta


def tower_metadata(tower: Tower) -> Dict[str, Any]:
    meta: Dict[str, Any] = {
        "params": params_metadata(tower.params),
        "transverse": tower.transverse,
        "k_count": int(tower.k_grid.size),
        "tail": float(tower.tail),
    }
    if tower.radial_extent is not None:
        meta["radial_extent"] = float(tower.radial_extent)
    if isinstance(tower, BraneTower):
        meta.update({"geometry": "brane", "mode_count": tower.spectrum.count})
    else:
        meta.update(
            {
                "geometry": "halfline",
                "m_max": float(tower.m_grid[-1]),
                "m_count": int(tower.m_grid.size),
                "z_extent": float(tower.z_extent),
            }
        )
    return meta


def write_csv(path: PathLike, metadata: Dict[str, Any], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write("# " + _dumps(metadata) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: PathLike) -> Tuple[Dict[str, Any], List[str], List[List[str]]]:
    """Metadata, header and raw rows of a file written by write_csv"""
    with Path(path).open("r", newline="", encoding="utf-8") as handle:
        first = handle.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path} has no metadata line")
        metadata = json.loads(first[2:])
        reader = csv.reader(handle)
        header = next(reader)
        return metadata, header, [row for row in reader]


def write_tower(path: PathLike, tower: Tower) -> Path:
    """One row per (transverse mode, z mode) with the Cauchy coefficients"""
    weights = tower.mass_weights
    masses = tower.masses

    def rows():
        for i, k in enumerate(tower.k_grid):
            for j, m in enumerate(masses):
                a, b = complex(tower.a[i, j]), complex(tower.b[i, j])
                yield [i, j, float(k), float(m), float(weights[j]), a.real, a.imag, b.real, b.imag]

    header = ["k_index", "m_index", "k", "m", "m_weight", "re_a", "im_a", "re_b", "im_b"]
    return write_csv(path, tower_metadata(tower), header, rows())


def write_snapshot(path: PathLike, state: FieldState, metadata: Optional[Dict[str, Any]] = None) -> Path:
    """Field values at every grid node; r is 0 for x-independent fields"""
    meta = dict(metadata or {})
    meta.update(grid_metadata(state.z_grid, state.r_grid))
    meta.update({"t": state.t, "transverse_k": state.transverse_k})
    phi = np.atleast_2d(state.phi)
    dphi = np.atleast_2d(state.dphi_dt)
    r_nodes = state.r_grid.nodes if state.is_radial else np.zeros(1)

    def rows():
        for i, r in enumerate(r_nodes):
            for j, z in enumerate(state.z_grid.nodes):
                p, d = complex(phi[i, j]), complex(dphi[i, j])
                yield [state.t, float(r), float(z), p.real, p.imag, d.real, d.imag]

    header = ["t", "r", "z", "re_phi", "im_phi", "re_dphi", "im_dphi"]
    return write_csv(path, meta, header, rows())


def write_energy_series(
    path: PathLike,
    series: Sequence[Tuple[float, EnergyBreakdown]],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    header = ["t", "kinetic", "potential_transverse", "potential_z", "boundary", "total"]
    rows = (
        [t, e.kinetic, e.potential_transverse, e.potential_z, e.boundary, e.total] for t, e in series
    )
    return write_csv(path, dict(metadata or {}), header, rows)


def write_spectrum(path: PathLike, spectrum: BraneSpectrum) -> Path:
    meta = {"geometry": "brane", "params": params_metadata(spectrum.params), "count": spectrum.count}
    rows = (
        [n, float(lam), float(c), float(res)]
        for n, (lam, c, res) in enumerate(
            zip(spectrum.eigenvalues, spectrum.norm_constants, spectrum.robin_residuals)
        )
    )
    return write_csv(path, meta, ["n", "lambda_n", "C_n", "robin_residual"], rows)


def write_mass_grid(path: PathLike, params: ModelParams, m_grid: QuadratureGrid) -> Path:
    """Half-line counterpart of the spectrum file: the quadrature in m"""
    meta = {"geometry": "halfline", "params": params_metadata(params), "m_grid": m_grid.metadata()}
    rows = ([i, float(m), float(w)] for i, (m, w) in enumerate(zip(m_grid.nodes, m_grid.weights)))
    return write_csv(path, meta, ["index", "m", "weight"], rows)


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def write_reports(path: PathLike, reports: Sequence[VerificationReport]) -> Path:
    payload = {
        "all_ok": all(r.outcome_ok for r in reports),
        "reports": [dict(r.model_dump(mode="json"), outcome_ok=r.outcome_ok) for r in reports],
    }
    return write_json(path, payload)


def write_run_metadata(out_dir: PathLike, scenario: Scenario, settings: Settings, command: str) -> Path:
    """The only artifact carrying wall-clock time"""
    payload = {
        "command": command,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "scenario": scenario.model_dump(mode="json"),
        "settings": settings.model_dump(mode="json"),
        "version": __version__,
    }
    return write_json(Path(out_dir) / "run_metadata.json", payload)
