"""Scenario configuration: a flat ``key = value`` document with dotted keys.

Grammar (one entry per line)::

    # comment
    engine = all                 # ode | sde | fde | all
    model.gamma = 0.2            # numbers: any Python int/float literal
    sweep.values = [1, 1.25, 2]  # lists use brackets
    name = "figure1"             # strings may be quoted or bare words
    plot.reference_ode = true    # booleans: true / false

Unknown keys, duplicate keys and type mismatches are rejected with the key
in the message. Environment variables ``AMRTRIAD_<SECTION>__<KEY>`` override
document keys (``AMRTRIAD_MODEL__GAMMA=0.3`` sets ``model.gamma``).
"""

from __future__ import annotations

import ast
import enum
import json
import math
import os
from dataclasses import dataclass, field, fields, replace

from .grid import TimeGrid
from .model import ModelError, ModelParams
from .sde import IncrementRule, NoisePlan

ENV_PREFIX = "AMRTRIAD_"
SWEEPABLE = ("gamma", "sigma", "alpha")
PANEL_KEYS = ("R0", "t_end", "N", "mu", "beta", "gamma", "epsilon", "sigma", "alpha")


class ConfigError(ModelError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class EngineChoice(str, enum.Enum):
    ODE = "ode"
    SDE = "sde"
    FDE = "fde"
    ALL = "all"

    @property
    def engines(self) -> tuple[str, ...]:
        return ("ode", "sde", "fde") if self is EngineChoice.ALL else (self.value,)


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class EnsembleSpec:
    n_paths: int = 200
    base_seed: int = 0
    burn_in: float = 0.5
    n_bins: int = 60


@dataclass(frozen=True)
class Panel:
    label: str
    overrides: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class Outputs:
    csv_path: str = "csv"
    svg_path: str = "svg"
    report_path: str = "report.json"
    stride: int = 1
    max_paths: int = 5


@dataclass(frozen=True)
class ScenarioConfig:
    engine: EngineChoice
    R0: float
    params: ModelParams = field(default_factory=ModelParams)
    grid: TimeGrid = field(default_factory=TimeGrid)
    name: str = "scenario"
    task: str = "simulate"
    noise: NoisePlan = field(default_factory=NoisePlan)
    sweep: Sweep | None = None
    ensemble: EnsembleSpec | None = None
    panels: tuple[Panel, ...] = ()
    reference_ode: bool = False
    outputs: Outputs = field(default_factory=Outputs)
    notes: tuple[str, ...] = ()

    def cells(self):
        """Yield ``(panel_label, sweep_value, params, R0, grid)`` for every run."""
        panels = self.panels or (Panel("main"),)
        values = self.sweep.values if self.sweep else (None,)
        for panel in panels:
            ov = dict(panel.overrides)
            R0 = ov.pop("R0", self.R0)
            t_end = ov.pop("t_end", self.grid.t_end)
            grid = replace(self.grid, t_end=t_end)
            base = self.params.with_(**ov)
            for v in values:
                p = base if v is None else base.with_(**{self.sweep.parameter: v})
                yield panel.label, v, p, R0, grid

    @property
    def n_cells(self) -> int:
        return sum(1 for _ in self.cells()) * len(self.engine.engines)


# {{{ parsing

def _parse_value(raw: str, key: str):
    raw = raw.strip()
    if raw == "":
        raise ConfigError(key, "empty value")
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        if raw.isidentifier() or raw.replace("_", "").replace("-", "").isalnum():
            return raw
        raise ConfigError(key, f"cannot parse value {raw!r}") from None


def parse_document(text: str) -> dict:
    doc = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(line).strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key in doc:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        doc[key] = _parse_value(raw, key)
    return doc


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if ch in "\"'":
            quote = None if quote == ch else (quote or ch)
        elif ch == "#" and quote is None:
            return line[:i]
    return line


def env_overrides(environ=None) -> dict:
    """Document keys set through ``AMRTRIAD_SECTION__KEY`` variables."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX):].split("__")
        key = ".".join(part.lower() for part in parts)
        if len(parts) == 1 and key not in TOP_LEVEL_KEYS:
            continue  # AMRTRIAD_OUT, AMRTRIAD_SEED, ... belong to the CLI
        out[_canonical_key(key)] = _parse_value(raw, name)
    return out


def _canonical_key(key: str) -> str:
    lowered = {k.lower(): k for k in KNOWN_KEYS}
    return lowered.get(key.lower(), key)


def _number(doc, key, default=None, *, integer=False, required=False):
    if key not in doc:
        if required:
            raise ConfigError(key, "missing required key")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(key, f"expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    return float(v)


def _string(doc, key, default=None):
    if key not in doc:
        return default
    v = doc[key]
    if not isinstance(v, str):
        raise ConfigError(key, f"expected a string, got {v!r}")
    return v


def _bool(doc, key, default=False):
    if key not in doc:
        return default
    v = doc[key]
    if not isinstance(v, bool):
        raise ConfigError(key, f"expected true/false, got {v!r}")
    return v


def _list(doc, key, kind=float):
    v = doc[key]
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(key, f"expected a non-empty list, got {v!r}")
    out = []
    for item in v:
        if kind is str:
            if not isinstance(item, str):
                raise ConfigError(key, f"expected strings, got {item!r}")
            out.append(item)
        else:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(key, f"expected numbers, got {item!r}")
            out.append(float(item))
    return tuple(out)


TOP_LEVEL_KEYS = ("name", "task", "engine")
MODEL_KEYS = tuple(f"model.{f.name}" for f in fields(ModelParams))
KNOWN_KEYS = (
    "name", "task", "engine", "initial.R0",
    *MODEL_KEYS,
    "grid.t0", "grid.t_end", "grid.dt",
    "noise.seed", "noise.rule",
    "sweep.parameter", "sweep.values",
    "ensemble.n_paths", "ensemble.base_seed", "ensemble.burn_in", "ensemble.n_bins",
    "panels.labels", *(f"panels.{k}" for k in PANEL_KEYS),
    "plot.reference_ode",
    "output.csv", "output.svg", "output.report", "output.stride", "output.max_paths",
    "notes",
)


def config_from_dict(doc: dict) -> ScenarioConfig:
    unknown = sorted(set(doc) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    raw_engine = _string(doc, "engine")
    if raw_engine is None:
        raise ConfigError("engine", "missing required key")
    try:
        engine = EngineChoice(raw_engine.lower())
    except ValueError:
        raise ConfigError("engine", f"expected one of ode/sde/fde/all, got {raw_engine!r}") from None

    task = _string(doc, "task", "simulate")
    if task not in ("simulate", "thresholds"):
        raise ConfigError("task", f"expected simulate or thresholds, got {task!r}")

    defaults = ModelParams()
    model_kw = {
        f.name: _number(doc, f"model.{f.name}", getattr(defaults, f.name))
        for f in fields(ModelParams)
    }
    try:
        params = ModelParams(**model_kw)
    except ModelError as exc:
        raise ConfigError("model", str(exc)) from None

    R0 = _number(doc, "initial.R0", required=True)
    if not 0 < R0 < params.N:
        raise ConfigError("initial.R0", f"must lie in (0, N={params.N:g})")

    try:
        grid = TimeGrid(
            _number(doc, "grid.t0", 0.0),
            _number(doc, "grid.t_end", 50.0),
            _number(doc, "grid.dt", 0.01),
        )
    except ModelError as exc:
        raise ConfigError("grid", str(exc)) from None

    seed = _number(doc, "noise.seed", 0, integer=True)
    rule = _string(doc, "noise.rule", IncrementRule.INVERSE_CDF.value)
    try:
        noise = NoisePlan(seed, increment_rule=IncrementRule(rule))
    except ValueError as exc:
        raise ConfigError("noise", str(exc)) from None

    sweep = None
    if "sweep.parameter" in doc or "sweep.values" in doc:
        param = _string(doc, "sweep.parameter")
        if param is None:
            raise ConfigError("sweep.parameter", "missing required key")
        if param not in SWEEPABLE:
            raise ConfigError("sweep.parameter", f"must be one of {SWEEPABLE}, got {param!r}")
        if "sweep.values" not in doc:
            raise ConfigError("sweep.values", "missing required key")
        sweep = Sweep(param, _list(doc, "sweep.values"))
        for v in sweep.values:
            try:
                params.with_(**{param: v})
            except ModelError as exc:
                raise ConfigError("sweep.values", str(exc)) from None

    ensemble = None
    ens_keys = [k for k in doc if k.startswith("ensemble.")]
    if ens_keys:
        if engine is not EngineChoice.SDE:
            raise ConfigError(ens_keys[0], "ensemble is only valid with engine = sde")
        d = EnsembleSpec()
        ensemble = EnsembleSpec(
            _number(doc, "ensemble.n_paths", d.n_paths, integer=True),
            _number(doc, "ensemble.base_seed", d.base_seed, integer=True),
            _number(doc, "ensemble.burn_in", d.burn_in),
            _number(doc, "ensemble.n_bins", d.n_bins, integer=True),
        )
        if ensemble.n_paths < 1:
            raise ConfigError("ensemble.n_paths", "must be >= 1")
        if not 0 <= ensemble.burn_in < 1:
            raise ConfigError("ensemble.burn_in", "must lie in [0, 1)")
        if ensemble.n_bins < 2:
            raise ConfigError("ensemble.n_bins", "must be >= 2")
        if ensemble.base_seed < 0 or ensemble.base_seed + ensemble.n_paths > 2**64:
            raise ConfigError("ensemble.base_seed", "derived seeds must fit in 64 bits")

    panels = _panels(doc, params, sweep)

    d = Outputs()
    outputs = Outputs(
        _string(doc, "output.csv", d.csv_path),
        _string(doc, "output.svg", d.svg_path),
        _string(doc, "output.report", d.report_path),
        _number(doc, "output.stride", d.stride, integer=True),
        _number(doc, "output.max_paths", d.max_paths, integer=True),
    )
    if outputs.stride < 1:
        raise ConfigError("output.stride", "must be >= 1")

    notes = _list(doc, "notes", str) if "notes" in doc else ()

    return ScenarioConfig(
        engine=engine,
        R0=R0,
        params=params,
        grid=grid,
        name=_string(doc, "name", "scenario"),
        task=task,
        noise=noise,
        sweep=sweep,
        ensemble=ensemble,
        panels=panels,
        reference_ode=_bool(doc, "plot.reference_ode"),
        outputs=outputs,
        notes=notes,
    )


def _panels(doc, params, sweep) -> tuple[Panel, ...]:
    keys = [k for k in doc if k.startswith("panels.")]
    if not keys:
        return ()
    if "panels.labels" not in doc:
        raise ConfigError("panels.labels", "missing required key")
    labels = _list(doc, "panels.labels", str)
    columns = {}
    for k in keys:
        if k == "panels.labels":
            continue
        name = k.split(".", 1)[1]
        if sweep is not None and name == sweep.parameter:
            raise ConfigError(k, "cannot both sweep and panel the same parameter")
        values = _list(doc, k)
        if len(values) != len(labels):
            raise ConfigError(k, f"expected {len(labels)} values (one per panel)")
        columns[name] = values
    panels = []
    for i, label in enumerate(labels):
        ov = tuple((name, columns[name][i]) for name in PANEL_KEYS if name in columns)
        model_ov = {k: v for k, v in ov if k not in ("R0", "t_end")}
        try:
            p = params.with_(**model_ov)
        except ModelError as exc:
            raise ConfigError(f"panels[{label}]", str(exc)) from None
        R0 = dict(ov).get("R0")
        if R0 is not None and not 0 < R0 < p.N:
            raise ConfigError("panels.R0", f"panel {label!r}: R0 must lie in (0, N)")
        panels.append(Panel(label, ov))
    return tuple(panels)


def parse_config(text: str, environ=None) -> ScenarioConfig:
    """Parse and validate a scenario document (plus any env overrides)."""
    doc = parse_document(text)
    doc.update(env_overrides(environ if environ is not None else {}))
    return config_from_dict(doc)


def load_config(path, environ=None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), environ)

# }}}


# {{{ serialisation

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        bare = v.isidentifier() and _parse_value(v, "") == v
        return v if bare else json.dumps(v)
    if isinstance(v, (list, tuple)):
        # bare words are not literals inside a list
        return "[" + ", ".join(json.dumps(x) if isinstance(x, str) else _fmt(x) for x in v) + "]"
    return repr(v)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Every key with its effective value (defaults included)."""
    doc = {
        "name": cfg.name,
        "task": cfg.task,
        "engine": cfg.engine.value,
        "initial.R0": cfg.R0,
    }
    for f in fields(ModelParams):
        doc[f"model.{f.name}"] = getattr(cfg.params, f.name)
    doc.update({
        "grid.t0": cfg.grid.t0,
        "grid.t_end": cfg.grid.t_end,
        "grid.dt": cfg.grid.dt,
        "noise.seed": int(cfg.noise.seed),
        "noise.rule": cfg.noise.increment_rule.value,
    })
    if cfg.sweep:
        doc["sweep.parameter"] = cfg.sweep.parameter
        doc["sweep.values"] = list(cfg.sweep.values)
    if cfg.ensemble:
        e = cfg.ensemble
        doc.update({
            "ensemble.n_paths": e.n_paths,
            "ensemble.base_seed": e.base_seed,
            "ensemble.burn_in": e.burn_in,
            "ensemble.n_bins": e.n_bins,
        })
    if cfg.panels:
        doc["panels.labels"] = [p.label for p in cfg.panels]
        names = [k for k in PANEL_KEYS if k in dict(cfg.panels[0].overrides)]
        for name in names:
            doc[f"panels.{name}"] = [dict(p.overrides)[name] for p in cfg.panels]
    doc["plot.reference_ode"] = cfg.reference_ode
    o = cfg.outputs
    doc.update({
        "output.csv": o.csv_path,
        "output.svg": o.svg_path,
        "output.report": o.report_path,
        "output.stride": o.stride,
        "output.max_paths": o.max_paths,
    })
    if cfg.notes:
        doc["notes"] = list(cfg.notes)
    return doc


def serialize_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in config_to_dict(cfg).items())

# }}}
