"""Field sweeps over several clusters: VQE, exact reference, CSV/JSON output."""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from ._backend import BACKEND
from .circuit import build_plgc, to_qasm
from .ed import ground_state
from .lattice import (LatticeError, Tripartition, build_lattice, default_tripartition,
                      load_tripartition, parse_cluster)
from .observables import observable_report
from .operators import hamiltonian_tcm
from .vqe import EnergyObjective, RestartOutcome, SpsaConfig, collect_restarts, run_restart

log = logging.getLogger(__name__)

CSV_COLUMNS = ("lx", "ly", "n_qubits", "x", "energy_vqe", "energy_ed", "mz_vqe", "mz_ed",
               "stopo_vqe", "stopo_ed", "best_restart", "n_restarts", "spsa_iterations", "seed")
PAPER_CLUSTERS = ((3, 3), (4, 3), (4, 4))


class ConfigError(ValueError):
    pass


def default_x_grid() -> list[float]:
    return [round(0.1 * k, 10) for k in range(11)]


def parse_x_grid(text: str) -> list[float]:
    """``"0:1:0.1"`` (inclusive range) or ``"0,0.25,1"``."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ConfigError("x-grid step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(n)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse x grid {text!r}: {exc}") from None


@dataclass
class SweepConfig:
    clusters: list[tuple[int, int]] = field(default_factory=lambda: list(PAPER_CLUSTERS))
    x_values: list[float] = field(default_factory=default_x_grid)
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    n_restarts: int = 10
    tripartition_override: str | None = None
    output_path: str = "results.csv"
    run_ed: bool = True
    workers: int = 1
    export_qasm: str | None = None

    def validate(self) -> None:
        if not self.clusters:
            raise ConfigError("no clusters given")
        for lx, ly in self.clusters:
            if lx < 2 or ly < 2:
                raise ConfigError(f"cluster {lx}x{ly} is below the 2x2 minimum")
        if not self.x_values:
            raise ConfigError("x_values is empty")
        if any(not 0.0 <= x <= 1.0 for x in self.x_values):
            raise ConfigError("x_values must lie in [0, 1]")
        if list(self.x_values) != sorted(self.x_values):
            raise ConfigError("x_values must be sorted ascending")
        if self.n_restarts < 1:
            raise ConfigError("n_restarts must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepConfig":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "clusters" in data:
            data["clusters"] = [parse_cluster(c) if isinstance(c, str) else tuple(c)
                                for c in data["clusters"]]
        if isinstance(data.get("x_values"), str):
            data["x_values"] = parse_x_grid(data["x_values"])
        if "spsa" in data:
            data["spsa"] = SpsaConfig(**data["spsa"])
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "SweepConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "clusters": [f"{lx}x{ly}" for lx, ly in self.clusters],
            "x_values": list(self.x_values),
            "spsa": self.spsa.to_dict(),
            "n_restarts": self.n_restarts,
            "tripartition_override": self.tripartition_override,
            "output_path": self.output_path,
            "run_ed": self.run_ed,
            "workers": self.workers,
            "export_qasm": self.export_qasm,
        }


def extrapolate_delta_e(points) -> float:
    """Intercept ``a`` of the least-squares fit ``a + b/N + c/N**2``."""
    pts = [(float(n), float(d)) for n, d in points]
    if len({n for n, _ in pts}) < 3:
        raise ValueError("extrapolation needs at least three distinct system sizes")
    inv_n = np.array([1.0 / n for n, _ in pts])
    de = np.array([d for _, d in pts])
    coef = np.polynomial.polynomial.polyfit(inv_n, de, 2)
    return float(coef[0])


@lru_cache(maxsize=2)
def _objective(lx: int, ly: int, x: float) -> EnergyObjective:
    return EnergyObjective(build_lattice(lx, ly), x)


def _restart_task(lx: int, ly: int, x: float, spsa: SpsaConfig, restart: int) -> RestartOutcome:
    geom = build_lattice(lx, ly)
    return run_restart(geom, x, spsa, restart, _objective(lx, ly, x))


class _InlineExecutor(Executor):
    def submit(self, fn, *args, **kwargs):
        fut: Future = Future()
        try:
            fut.set_result(fn(*args, **kwargs))
        except BaseException as exc:
            fut.set_exception(exc)
        return fut


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _tripartition_for(geom, override: Tripartition | None) -> Tripartition | None:
    if override is not None:
        override.validate_for(geom)
        return override
    try:
        return default_tripartition(geom)
    except LatticeError:
        log.warning("no tripartition for %dx%d; S_topo left empty", geom.lx, geom.ly)
        return None


def run_sweep(cfg: SweepConfig) -> list[dict[str, Any]]:
    """Run every (cluster, x) point and write the CSV plus its JSON sidecar.

    Rows are written and flushed in (cluster, x) order as soon as each one
    is complete, whatever order the restarts finish in.
    """
    cfg.validate()
    override = load_tripartition(cfg.tripartition_override) if cfg.tripartition_override else None
    out_path = Path(cfg.output_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    sidecar_path = out_path.with_suffix(".json")
    qasm_dir = Path(cfg.export_qasm) if cfg.export_qasm else None
    if qasm_dir:
        qasm_dir.mkdir(parents=True, exist_ok=True)

    units = [(lx, ly, float(x)) for lx, ly in cfg.clusters for x in cfg.x_values]
    executor = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else _InlineExecutor()
    rows: list[dict[str, Any]] = []
    details: list[dict[str, Any]] = []
    with executor, out_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        fh.flush()
        if cfg.workers > 1:
            futures = {u: [executor.submit(_restart_task, *u, cfg.spsa, r)
                           for r in range(cfg.n_restarts)] for u in units}
        for unit in units:
            lx, ly, x = unit
            if cfg.workers > 1:
                outcomes = [f.result() for f in futures.pop(unit)]
            else:
                outcomes = [_restart_task(lx, ly, x, cfg.spsa, r) for r in range(cfg.n_restarts)]
            row, detail = _finish_point(cfg, lx, ly, x, outcomes, override, qasm_dir)
            writer.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})
            fh.flush()
            rows.append(row)
            details.append(detail)
            _write_sidecar(sidecar_path, cfg, details, rows)
    return rows


def _finish_point(cfg, lx, ly, x, outcomes, override, qasm_dir):
    geom = build_lattice(lx, ly)
    ham = hamiltonian_tcm(geom, x)
    tri = _tripartition_for(geom, override)
    result = collect_restarts(geom, x, outcomes)
    state = _objective(lx, ly, x).state(result.best_thetas)
    vqe_obs = _observables(state, geom, ham, tri)
    row = {
        "lx": lx, "ly": ly, "n_qubits": geom.n_qubits, "x": x,
        "energy_vqe": result.best_energy, "energy_ed": None,
        "mz_vqe": vqe_obs["m_z"], "mz_ed": None,
        "stopo_vqe": vqe_obs["s_topo"], "stopo_ed": None,
        "best_restart": result.best_restart, "n_restarts": cfg.n_restarts,
        "spsa_iterations": cfg.spsa.max_iterations, "seed": cfg.spsa.seed,
    }
    del state
    if cfg.run_ed:
        ed = ground_state(geom, x)
        ed_obs = _observables(ed.ground_vector, geom, ham, tri)
        row.update(energy_ed=ed.energy, mz_ed=ed_obs["m_z"], stopo_ed=ed_obs["s_topo"])
    log.info("%dx%d x=%.3f  E_vqe=%.8f  E_ed=%s", lx, ly, x, result.best_energy,
             "-" if row["energy_ed"] is None else f"{row['energy_ed']:.8f}")
    if qasm_dir:
        circ = build_plgc(geom, result.best_thetas)
        (qasm_dir / f"plgc_{lx}x{ly}_x{x:.3f}.qasm").write_text(to_qasm(circ))
    detail = {
        "lx": lx, "ly": ly, "x": x,
        "best_thetas": result.best_thetas.tolist(),
        "restart_energies": result.restart_energies.tolist(),
        "restart_fidelities": result.restart_fidelities.tolist(),
        "tripartition": tri.to_json() if tri else None,
    }
    return row, detail


def _observables(state, geom, ham, tri):
    if tri is None:
        from .observables import magnetization
        return {"m_z": magnetization(state, geom), "s_topo": None}
    rep = observable_report(state, geom, ham, tri)
    return {"m_z": rep.m_z, "s_topo": rep.s_topo}


def extrapolations(rows: list[dict[str, Any]]) -> list[dict[str, float]]:
    """N -> infinity intercept of the per-qubit energy error, per x with >= 3 sizes."""
    by_x: dict[float, list[tuple[int, float]]] = {}
    for r in rows:
        if r["energy_ed"] is None:
            continue
        by_x.setdefault(r["x"], []).append(
            (r["n_qubits"], (r["energy_vqe"] - r["energy_ed"]) / r["n_qubits"]))
    out = []
    for x, pts in sorted(by_x.items()):
        if len({n for n, _ in pts}) >= 3:
            out.append({"x": x, "delta_e_inf": extrapolate_delta_e(pts)})
    return out


def _write_sidecar(path: Path, cfg: SweepConfig, details, rows) -> None:
    payload = {
        "version": __version__,
        "kernel_backend": BACKEND,
        "numpy_version": np.__version__,
        "python_version": sys.version.split()[0],
        "config": cfg.to_dict(),
        "points": details,
        "extrapolation": extrapolations(rows),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")


def read_results(path: str | Path) -> list[dict[str, Any]]:
    """Load a results CSV back into typed rows (empty fields become ``None``)."""
    ints = {"lx", "ly", "n_qubits", "best_restart", "n_restarts", "spsa_iterations", "seed"}
    rows = []
    with Path(path).open() as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                row[k] = None if v == "" else (int(v) if k in ints else float(v))
            rows.append(row)
    return rows


def with_overrides(cfg: SweepConfig, **kwargs) -> SweepConfig:
    """Return ``cfg`` with the non-``None`` keyword values replaced."""
    spsa_keys = {"max_iterations", "seed"}
    spsa_kw = {k: kwargs.pop(k) for k in list(kwargs) if k in spsa_keys and kwargs[k] is not None}
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    if spsa_kw:
        kwargs["spsa"] = replace(cfg.spsa, **spsa_kw)
    return replace(cfg, **kwargs)
