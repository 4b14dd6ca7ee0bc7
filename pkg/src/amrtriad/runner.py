"""Execute a scenario: every (panel, sweep value, engine) cell, then CSV, SVG and a JSON report."""

from __future__ import annotations

import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, svg
from .analysis import classify_outcome, stationary_histogram
from .config import ScenarioConfig, config_to_dict
from .fde import solve_caputo
from .grid import Trajectory
from .model import ModelError, ModelParams, compute_thresholds
from .ode import integrate_ode
from .sde import NoisePlan, simulate_ensemble, simulate_path

TRAJECTORY_HEADER = ("t", "R", "path_id", "engine", "seed")
HISTOGRAM_HEADER = ("bin_left", "bin_right", "mass")
THRESHOLD_HEADER = (
    "panel", "gamma", "sigma", "alpha", "k0_d", "k0_s", "k0_f", "xi_d", "xi_s",
    "regime_d", "regime_s", "regime_f",
)
_SYMBOL = {"gamma": "γ", "sigma": "σ", "alpha": "α"}


class ScenarioError(ModelError):
    """A cell failed; ``cell`` holds its coordinates."""

    def __init__(self, cell: dict, cause: Exception):
        coords = ", ".join(f"{k}={v}" for k, v in cell.items())
        super().__init__(f"cell [{coords}] failed: {cause}")
        self.cell = cell
        self.cause = cause


@dataclass
class _Cell:
    index: int
    panel: str
    value: float | None
    engine: str
    params: ModelParams
    R0: float
    grid: object
    result: object = None
    runtime: float = 0.0

    def coords(self, cfg: ScenarioConfig) -> dict:
        out = {"panel": self.panel, "engine": self.engine}
        if cfg.sweep:
            out[cfg.sweep.parameter] = self.value
        return out

    def stem(self, cfg: ScenarioConfig) -> str:
        parts = [cfg.name, self.panel]
        if cfg.sweep:
            parts.append(f"{cfg.sweep.parameter}{self.value:g}")
        parts.append(self.engine)
        return "_".join(parts)


def _num(x) -> str:
    return "" if x is None else f"{float(x):.17g}"


class _Writer:
    """Atomic file writes; remembers what it wrote so a failed run can be undone."""

    def __init__(self, root: Path):
        self.root = root
        self.written: list[Path] = []

    def text(self, rel: str, content: str) -> str:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(content)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.written.append(path)
        return str(path.relative_to(self.root))

    def csv(self, rel: str, header, schema, rows) -> str:
        if tuple(header) != tuple(schema):
            raise ModelError(f"{rel}: header {header} does not match schema {schema}")
        lines = [",".join(header)]
        for row in rows:
            if len(row) != len(schema):
                raise ModelError(f"{rel}: row has {len(row)} fields, schema has {len(schema)}")
            lines.append(",".join(row))
        return self.text(rel, "\n".join(lines) + "\n")

    def rollback(self) -> None:
        for path in self.written:
            try:
                path.unlink()
            except FileNotFoundError:
                pass
        self.written.clear()


def trajectory_rows(traj: Trajectory, path_id: int = 0, stride: int = 1):
    seed = "" if traj.seed is None else str(int(traj.seed))
    engine = traj.engine.value
    idx = np.arange(0, len(traj), stride)
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    for t, r in zip(traj.times[idx], traj.values[idx]):
        yield (_num(t), _num(r), str(path_id), engine, seed)


# {{{ per-engine work

def _annotations(cell: _Cell) -> list[str]:
    p = cell.params
    th = compute_thresholds(p)
    notes = []
    if cell.engine == "sde" and p.sigma > 0:
        if th.regime_d.value == "Extinction" and p.sigma**2 * p.N > p.beta:
            notes.append("outside theorem hypothesis: sigma^2 N > beta")
        if th.regime_d.value == "Persistence" and th.k0_s < 1:
            notes.append("outside theorem hypothesis: k0_s < 1 in a persistence scenario")
    if cell.engine == "fde" and not 0 < cell.R0 < th.k0_f:
        notes.append("R0 outside the stated invariance interval (0, k0_f)")
    return notes


def _compute(cfg: ScenarioConfig, cell: _Cell, threads: int) -> None:
    start = time.perf_counter()
    p, R0, grid = cell.params, cell.R0, cell.grid
    if cell.engine == "ode":
        cell.result = integrate_ode(p, R0, grid)
    elif cell.engine == "fde":
        cell.result = solve_caputo(p, R0, grid)
    elif cfg.ensemble is None:
        noise = NoisePlan(cfg.noise.seed, increment_rule=cfg.noise.increment_rule)
        cell.result = simulate_path(p, R0, grid, noise)
    else:
        e = cfg.ensemble
        cell.result = simulate_ensemble(
            p, R0, grid, e.n_paths, e.base_seed,
            increment_rule=cfg.noise.increment_rule, threads=threads,
        )
    cell.runtime = time.perf_counter() - start


def _reference(cfg: ScenarioConfig, cell: _Cell):
    """Deterministic curve drawn under the noisy paths of a panel.

    Uses the panel's first cell; only noise-intensity sweeps leave it unchanged.
    """
    return integrate_ode(cell.params.with_(sigma=0.0), cell.R0, cell.grid)

# }}}


def _label(cfg: ScenarioConfig, cell: _Cell) -> str:
    if not cfg.sweep:
        return cell.engine
    return f"{_SYMBOL[cfg.sweep.parameter]}={cell.value:g}"


def _thresholds_task(cfg: ScenarioConfig, writer: _Writer, report: dict) -> None:
    rows, entries = [], []
    for panel, value, p, _R0, _grid in cfg.cells():
        th = compute_thresholds(p)
        d = th.to_dict()
        entries.append({"panel": panel, "sweep_value": value, "thresholds": d})
        rows.append((
            panel, _num(p.gamma), _num(p.sigma), _num(p.alpha),
            _num(th.k0_d), _num(th.k0_s), _num(th.k0_f), _num(th.xi_d), _num(th.xi_s),
            th.regime_d.value, th.regime_s.value, th.regime_f.value,
        ))
    rel = f"{cfg.outputs.csv_path}/{cfg.name}_thresholds.csv"
    report["csv"] = [writer.csv(rel, THRESHOLD_HEADER, THRESHOLD_HEADER, rows)]
    report["cells"] = entries


def _cell_record(cfg: ScenarioConfig, cell: _Cell, writer: _Writer) -> dict:
    o = cfg.outputs
    stem = cell.stem(cfg)
    res = cell.result
    record = {
        **cell.coords(cfg),
        "R0": cell.R0,
        "grid": {"t0": cell.grid.t0, "t_end": cell.grid.t_end, "dt": cell.grid.dt},
        "thresholds": compute_thresholds(cell.params).to_dict(),
        "runtime_s": cell.runtime,
        "annotations": _annotations(cell),
    }
    if isinstance(res, Trajectory):
        record["outcome"] = classify_outcome(res, cell.params).to_dict()
        record["clamp_events"] = res.clamp_events
        record["seed"] = res.seed
        if cell.engine == "fde":
            record["fractional"] = {
                "R0_in_stated_invariance_interval": res.meta["R0_in_stated_invariance_interval"],
                "persistence_condition": res.meta["persistence_condition"],
            }
        record["csv"] = writer.csv(
            f"{o.csv_path}/{stem}.csv", TRAJECTORY_HEADER, TRAJECTORY_HEADER,
            trajectory_rows(res, 0, o.stride),
        )
        return record

    # ensemble
    ens = res
    e = cfg.ensemble
    kinds = {}
    for i in range(ens.n_paths):
        k = classify_outcome(ens.path(i), cell.params).kind.value
        kinds[k] = kinds.get(k, 0) + 1
    rows = []
    for i in range(min(o.max_paths, ens.n_paths)):
        rows.extend(trajectory_rows(ens.path(i), i, o.stride))
    record["csv"] = writer.csv(
        f"{o.csv_path}/{stem}.csv", TRAJECTORY_HEADER, TRAJECTORY_HEADER, rows
    )
    hist = stationary_histogram(ens, e.burn_in, e.n_bins)
    record["csv_histogram"] = writer.csv(
        f"{o.csv_path}/{stem}_histogram.csv", HISTOGRAM_HEADER, HISTOGRAM_HEADER,
        ((_num(a), _num(b), _num(m))
         for a, b, m in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.bin_mass)),
    )
    xi_s = record["thresholds"]["xi_s"]
    marker = None if xi_s is None else ("ξs", xi_s)
    record["svg_histogram"] = writer.text(
        f"{o.svg_path}/{stem}_histogram.svg",
        svg.bar_chart(hist.bin_edges, hist.bin_mass,
                      title=f"{cfg.name} {_label(cfg, cell)}: stationary histogram",
                      marker=marker),
    )
    record["ensemble"] = {
        "n_paths": ens.n_paths,
        "base_seed": ens.base_seed,
        "path_outcomes": kinds,
        "clamp_fraction": ens.clamp_fraction,
        "histogram_mean": hist.mean(),
        "sample_mean": hist.sample_mean,
        "n_samples": hist.n_samples,
        "terminal_mean": float(ens.per_time_mean[-1]),
        "terminal_variance": float(ens.per_time_variance[-1]),
    }
    record["clamp_events"] = int(ens.clamp_events.sum())
    return record


def _series_for(cell: _Cell, cfg: ScenarioConfig):
    res = cell.result
    traj = res if isinstance(res, Trajectory) else res.path(0)
    return (_label(cfg, cell), traj.times, traj.values)


def run_scenario(cfg: ScenarioConfig, out_dir, threads: int = 1) -> dict:
    """Run every cell of ``cfg`` and write outputs below ``out_dir``.

    Returns the report (also written as JSON). On any failure the files
    written so far are removed and :class:`ScenarioError` names the cell.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    writer = _Writer(root)
    started = time.perf_counter()
    report = {
        "name": cfg.name,
        "task": cfg.task,
        "package_version": __version__,
        "config": config_to_dict(cfg),
        "notes": list(cfg.notes),
        "thresholds": compute_thresholds(cfg.params).to_dict(),
    }
    threads = max(1, int(threads))
    try:
        if cfg.task == "thresholds":
            _thresholds_task(cfg, writer, report)
        else:
            _simulate_task(cfg, writer, report, threads)
        report["runtime_s"] = time.perf_counter() - started
        report["status"] = "ok"
        report["report"] = writer.text(
            cfg.outputs.report_path, json.dumps(report, indent=2, default=_json_default) + "\n"
        )
    except BaseException:
        writer.rollback()
        raise
    return report


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _simulate_task(cfg: ScenarioConfig, writer: _Writer, report: dict, threads: int) -> None:
    cells = []
    for panel, value, p, R0, grid in cfg.cells():
        for engine in cfg.engine.engines:
            cells.append(_Cell(len(cells), panel, value, engine, p, R0, grid))

    def compute(cell, inner_threads=1):
        try:
            _compute(cfg, cell, inner_threads)
        except Exception as exc:
            raise ScenarioError(cell.coords(cfg), exc) from exc
        return cell

    records = []
    panel_series: dict[tuple[str, str], list] = {}
    if cfg.ensemble is not None:
        # one ensemble at a time keeps memory bounded; threads go to the paths
        for cell in cells:
            compute(cell, threads)
            records.append(_cell_record(cfg, cell, writer))
            panel_series.setdefault((cell.panel, cell.engine), []).append(_series_for(cell, cfg))
            cell.result = None
    else:
        if threads > 1 and len(cells) > 1:
            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(compute, cells))
        else:
            for cell in cells:
                compute(cell)
        for cell in cells:
            records.append(_cell_record(cfg, cell, writer))
            panel_series.setdefault((cell.panel, cell.engine), []).append(_series_for(cell, cfg))

    svgs = []
    first_cell = {}
    for cell in cells:
        first_cell.setdefault((cell.panel, cell.engine), cell)
    for (panel, engine), series in panel_series.items():
        if cfg.reference_ode and engine == "sde":
            ref = _reference(cfg, first_cell[(panel, engine)])
            series = series + [("deterministic", ref.times, ref.values, "dashed")]
        title = f"{cfg.name} {panel}: {engine.upper()}"
        svgs.append(writer.text(
            f"{cfg.outputs.svg_path}/{cfg.name}_{panel}_{engine}.svg",
            svg.line_chart(series, title=title),
        ))
    report["cells"] = records
    report["svg"] = svgs
