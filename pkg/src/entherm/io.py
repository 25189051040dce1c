"""Run configuration, CSV/JSON persistence and config hashing."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

from .eigensolver import DEFAULT_DEGENERACY_TOL, DEFAULT_MAX_ITER, DEFAULT_TOL
from .lattice import ClusterSpec

SWEEP_HEADER = (
    "lambda", "s_a", "s_a_per_site", "e_a", "e_a_per_site", "e_b", "b_a", "t_a",
    "fidelity_per_site", "rel_entropy", "degenerate_flag", "error",
)
COMPARE_HEADER = (
    "lambda", "s_a", "s_can", "e_a", "e_can", "b_a", "t_a", "b_b", "t_b",
    "fidelity_per_site", "rel_entropy", "rel_entropy_reverse", "schmidt_tv",
    "energy", "residual", "gap", "degenerate_flag", "error",
)
CANONICAL_HEADER = ("beta", "t", "s", "s_per_site", "e", "e_per_site", "log_z")
ANALYTIC_HEADER = ("theta", "lambda", "beta_star", "t_star", "s", "e")

# fields that change the numbers; output location and threading do not
_PHYSICS_FIELDS = (
    "geometry", "j_a", "j_b", "lambda_min", "lambda_max", "delta_lambda", "probes",
    "t_min", "t_max", "n_betas", "tol", "max_iter", "degeneracy_tol", "seed", "force",
)
_FLOAT_FIELDS = {"j_a", "j_b", "lambda_min", "lambda_max", "delta_lambda", "t_min", "t_max", "tol", "degeneracy_tol"}
_INT_FIELDS = {"n_betas", "max_iter", "seed"}


@dataclass(frozen=True)
class RunConfig:
    geometry: ClusterSpec
    j_a: float = 1.0
    j_b: float = 1.0
    lambda_min: float = 0.0
    lambda_max: float = 6.0
    delta_lambda: float = 0.02
    probes: tuple[float, ...] = (10.0, 100.0, 1000.0)
    t_min: float = 0.01
    t_max: float = 100.0
    n_betas: int = 400
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
    seed: int = 0
    force: bool = False
    out: str = "results"

    def __post_init__(self):
        for name in ("tol", "degeneracy_tol", "delta_lambda", "j_a", "j_b", "t_min", "t_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.lambda_min < 0 or self.lambda_max < self.lambda_min:
            raise ValueError("need 0 <= lambda_min <= lambda_max")
        if self.max_iter < 1 or self.n_betas < 1:
            raise ValueError("max_iter and n_betas must be positive")
        span = (self.lambda_max - self.lambda_min) / self.delta_lambda
        if abs(span - round(span)) > 1e-6:
            raise ValueError("lambda range is not a whole number of delta_lambda steps")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["geometry"] = self.geometry.to_dict()
        d["probes"] = list(self.probes)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        geo = d.pop("geometry")
        if not isinstance(geo, ClusterSpec):
            geo = ClusterSpec.from_dict(geo)
        if "probes" in d:
            d["probes"] = tuple(float(x) for x in d["probes"])
        # YAML 1.1 reads "1e-10" (no dot) as a string
        for k in _FLOAT_FIELDS & set(d):
            d[k] = float(d[k])
        for k in _INT_FIELDS & set(d):
            d[k] = int(d[k])
        return cls(geometry=geo, **d)

    def config_hash(self) -> str:
        full = self.to_dict()
        physics = {k: full[k] for k in _PHYSICS_FIELDS}
        blob = json.dumps(physics, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path: str | Path) -> RunConfig:
    """YAML or JSON (JSON is a YAML subset)."""
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    return RunConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# CSV

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def _parse(cell: str):
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path: str | Path) -> tuple[list[str], list[dict[str, Any]]]:
    """Header and rows; numeric cells become floats, empty cells None."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        try:
            header = next(r)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        rows = []
        for lineno, raw in enumerate(r, start=2):
            if len(raw) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(raw)}")
            rows.append({k: _parse(v) for k, v in zip(header, raw)})
    return header, rows


def sweep_rows(records) -> list[tuple]:
    return [
        (r.lam, r.s_a, r.s_a_per_site, r.e_a, r.e_a_per_site, r.e_b, r.b_a, r.t_a,
         r.fidelity_per_site, r.rel_entropy, r.degenerate, r.error)
        for r in records
    ]


def compare_rows(records) -> list[tuple]:
    return [
        (r.lam, r.s_a, r.s_can, r.e_a, r.e_can, r.b_a, r.t_a, r.b_b, r.t_b,
         r.fidelity_per_site, r.rel_entropy, r.rel_entropy_reverse, r.schmidt_tv,
         r.energy, r.residual, r.gap, r.degenerate, r.error)
        for r in records
    ]


def canonical_rows(curve, n_a: int) -> list[tuple]:
    t = curve.temperatures
    return [
        (b, tt, s, s / n_a, e, e / n_a, lz)
        for b, tt, s, e, lz in zip(curve.betas, t, curve.entropies, curve.energies, curve.log_z)
    ]


def correlation_rows(tables: dict) -> tuple[tuple[str, ...], list[tuple]]:
    header = ("lambda", "i", "j", "distance", "c_red", "c_can", "delta_c")
    rows = []
    for lam in sorted(tables):
        t = tables[lam]
        for k in range(len(t.c_red)):
            d = int(t.distances[k]) if t.distances is not None else None
            rows.append((lam, int(t.pairs[k, 0]), int(t.pairs[k, 1]), d, t.c_red[k], t.c_can[k], t.delta_c[k]))
    return header, rows


# ---------------------------------------------------------------------------
# result bundle

def _versions() -> dict[str, str]:
    import numba
    import scipy

    from . import __version__

    return {
        "entherm": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (np.floating,)):
        return _jsonable(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class ResultBundle:
    config: RunConfig
    command: str
    records: list = field(default_factory=list)
    curve: Any = None
    correlations: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def metadata(self) -> dict[str, Any]:
        from ._kernels import get_backend

        meta = {
            "command": self.command,
            "config_hash": self.config.config_hash(),
            "config": self.config.to_dict(),
            "versions": _versions(),
            "backend": get_backend(),
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "argv": sys.argv,
            "degenerate_lambdas": [r.lam for r in self.records if r.degenerate],
            "failed_lambdas": [r.lam for r in self.records if r.error],
        }
        meta.update(self.extra)
        return _jsonable(meta)


def write_metadata(out_dir: str | Path, name: str, bundle: ResultBundle) -> Path:
    """JSON sidecar.  Timestamps live here so the CSVs stay byte-identical across reruns."""
    path = Path(out_dir) / f"{name}.json"
    path.write_text(json.dumps(bundle.metadata(), indent=2, sort_keys=True) + "\n")
    return path


def read_metadata(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())
