"""Experiment configuration: YAML parsing and validation.

Every problem found in a document is collected and reported together in a
single ``ConfigError``; nothing is computed from an invalid config.

Example::

    experiment: fidelity-trace
    seed: 7
    model: {kind: goe, dim: 64, scale: 1.0}
    kick: {strength: 0.1, basis: rotated}
    initial_state: {kind: random-vector, samples: 16}
    fidelity:
      period: 0.02
      times: {start: 0.0, stop: 20.0, num: 1001}
"""
from __future__ import annotations

import copy
import hashlib
import json
from typing import Any

import numpy as np
import yaml

from .interferometry import SCENARIO_KINDS
from .models import INITIAL_KINDS, KICK_BASES, MODEL_KINDS

EXPERIMENTS = ("fidelity-trace", "visibility-scan", "wl-loop", "wl-ensemble")

SWEEPABLE = {
    "seed": int,
    "model.dim": int,
    "model.scale": float,
    "model.seed": int,
    "kick.strength": float,
    "kick.seed": int,
    "fidelity.period": float,
    "visibility.delay": float,
    "visibility.duration": float,
    "loop.n_scatterers": int,
    "loop.duration": float,
    "ensemble.n_scatterers": int,
    "ensemble.duration": float,
    "ensemble.n_samples": int,
}

# section -> key -> default (None means required or derived)
DEFAULTS: dict[str, Any] = {
    "experiment": None,
    "seed": 0,
    "model": {"kind": "goe", "dim": 32, "scale": 1.0, "seed": None},
    "kick": {"strength": 0.5, "basis": "rotated", "seed": None, "rotation_seed": None},
    "initial_state": {"kind": "ground-state", "index": 0, "seed": None, "samples": 1},
    "fidelity": {
        "period": 1.0,
        "times": {"start": 0.0, "stop": 100.0, "num": 101},
        "fit_window": [0.1, 0.9],
    },
    "visibility": {
        "scenarios": list(SCENARIO_KINDS),
        "duration": 1.0,
        "kick_times": [0.5],
        "delay": 0.5,
        "screen": {"path_difference": 0.0, "cm_velocity": 1.0, "wavenumber": 1.0, "samples": 64},
    },
    "loop": {"duration": 1.0, "n_scatterers": 2, "scatterer_times": None},
    "ensemble": {"n_samples": 200, "n_scatterers": 2, "duration": 1.0, "bins": 20},
    "sweep": None,
    "output": {"dir": "."},
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


class _DuplicateCheckingLoader(yaml.SafeLoader):
    duplicate_errors: list


def _construct_mapping(loader, node, deep=False):
    seen: dict = {}
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        line = key_node.start_mark.line + 1
        if key in seen:
            loader.duplicate_errors.append(
                f"duplicate key {key!r} at line {seen[key]} and line {line}"
            )
        else:
            seen[key] = line
    return loader.construct_mapping(node, deep=deep)


_DuplicateCheckingLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


def _load_yaml(text: str) -> Any:
    loader = _DuplicateCheckingLoader(text)
    loader.duplicate_errors = []
    try:
        data = loader.get_single_data()
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError([f"syntax error{where}: {exc.problem}"]) from None
    except yaml.YAMLError as exc:
        raise ConfigError([f"syntax error: {exc}"]) from None
    finally:
        loader.dispose()
    if loader.duplicate_errors:
        raise ConfigError(loader.duplicate_errors)
    return data


class _Validator:
    def __init__(self):
        self.errors: list[str] = []

    def err(self, msg: str) -> None:
        self.errors.append(msg)

    def merge(self, path: str, given: Any, defaults: dict) -> dict:
        if given is None:
            given = {}
        if not isinstance(given, dict):
            self.err(f"{path}: expected a mapping, got {type(given).__name__}")
            return copy.deepcopy(defaults)
        for key in given:
            if key not in defaults:
                self.err(f"{path}.{key}: unknown key")
        out = {}
        for key, default in defaults.items():
            val = given.get(key, copy.deepcopy(default))
            if isinstance(default, dict) and key in given and key != "times":
                val = self.merge(f"{path}.{key}", val, default)
            out[key] = val
        return out

    def number(self, path, value, *, integer=False, minimum=None, exclusive=False):
        ok_type = isinstance(value, int) if integer else isinstance(value, (int, float))
        if isinstance(value, bool) or not ok_type:
            kind = "an integer" if integer else "a number"
            self.err(f"{path}: expected {kind}, got {value!r}")
            return None
        if not integer and not np.isfinite(value):
            self.err(f"{path}: must be finite, got {value!r}")
            return None
        if minimum is not None:
            if (exclusive and value <= minimum) or (not exclusive and value < minimum):
                op = ">" if exclusive else ">="
                self.err(f"{path}: must be {op} {minimum}, got {value!r}")
                return None
        return int(value) if integer else float(value)

    def choice(self, path, value, options):
        if value not in options:
            self.err(f"{path}: must be one of {list(options)}, got {value!r}")
            return None
        return value


def _times(v: _Validator, raw) -> list[float] | None:
    path = "fidelity.times"
    if isinstance(raw, dict):
        unknown = set(raw) - {"start", "stop", "num"}
        for k in sorted(unknown):
            v.err(f"{path}.{k}: unknown key")
        start = v.number(f"{path}.start", raw.get("start", 0.0), minimum=0)
        stop = v.number(f"{path}.stop", raw.get("stop"), minimum=0)
        num = v.number(f"{path}.num", raw.get("num", 101), integer=True, minimum=2)
        if None in (start, stop, num):
            return None
        if stop <= start:
            v.err(f"{path}: stop must exceed start")
            return None
        return np.linspace(start, stop, num).tolist()
    if isinstance(raw, list):
        vals = [v.number(f"{path}[{i}]", x, minimum=0) for i, x in enumerate(raw)]
        if None in vals:
            return None
        if len(vals) < 2:
            v.err(f"{path}: need at least two times")
            return None
        if any(b < a for a, b in zip(vals, vals[1:])):
            v.err(f"{path}: times must be ascending")
            return None
        return vals
    v.err(f"{path}: expected a list or a {{start, stop, num}} mapping")
    return None


def _validate(data: Any, experiment_override: str | None, seed_override: int | None) -> dict:
    v = _Validator()
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError([f"top level: expected a mapping, got {type(data).__name__}"])
    cfg = v.merge("config", data, DEFAULTS)

    if experiment_override is not None:
        cfg["experiment"] = experiment_override
    if cfg["experiment"] is None:
        v.err("experiment: required (one of " + ", ".join(EXPERIMENTS) + ")")
    else:
        v.choice("experiment", cfg["experiment"], EXPERIMENTS)

    if seed_override is not None:
        cfg["seed"] = seed_override
    seed = v.number("seed", cfg["seed"], integer=True, minimum=0)
    if seed is not None and seed >= 2**64:
        v.err("seed: must fit in an unsigned 64-bit integer")
    seed = seed or 0

    m = cfg["model"]
    v.choice("model.kind", m["kind"], MODEL_KINDS)
    v.number("model.dim", m["dim"], integer=True, minimum=2)
    v.number("model.scale", m["scale"], minimum=0, exclusive=True)
    if m["seed"] is None:
        m["seed"] = seed
    v.number("model.seed", m["seed"], integer=True, minimum=0)

    k = cfg["kick"]
    v.number("kick.strength", k["strength"], minimum=0)
    v.choice("kick.basis", k["basis"], KICK_BASES)
    if k["seed"] is None:
        k["seed"] = seed + 1
    v.number("kick.seed", k["seed"], integer=True, minimum=0)
    if k["rotation_seed"] is not None:
        v.number("kick.rotation_seed", k["rotation_seed"], integer=True, minimum=0)

    ini = cfg["initial_state"]
    v.choice("initial_state.kind", ini["kind"], INITIAL_KINDS + ("eigenbasis-ensemble",))
    idx = v.number("initial_state.index", ini["index"], integer=True, minimum=0)
    if idx is not None and isinstance(m["dim"], int) and idx >= m["dim"]:
        v.err(f"initial_state.index: {idx} out of range for model.dim {m['dim']}")
    if ini["seed"] is None:
        ini["seed"] = seed + 2
    v.number("initial_state.seed", ini["seed"], integer=True, minimum=0)
    samples = v.number("initial_state.samples", ini["samples"], integer=True, minimum=1)
    if samples and samples > 1 and ini["kind"] != "random-vector":
        v.err("initial_state.samples: averaging over several states needs kind random-vector")

    exp = cfg["experiment"]
    averaged = ini["kind"] == "eigenbasis-ensemble" or (samples or 1) > 1
    if averaged and exp not in (None, "fidelity-trace"):
        v.err("initial_state: state ensembles are only supported for fidelity-trace")
    f = cfg["fidelity"]
    v.number("fidelity.period", f["period"], minimum=0, exclusive=True)
    if exp == "fidelity-trace" or "times" in (data.get("fidelity") or {}):
        f["times"] = _times(v, f["times"])
    win = f["fit_window"]
    if not (isinstance(win, list) and len(win) == 2):
        v.err("fidelity.fit_window: expected [low, high]")
    else:
        lo = v.number("fidelity.fit_window[0]", win[0], minimum=0, exclusive=True)
        hi = v.number("fidelity.fit_window[1]", win[1], minimum=0)
        if lo is not None and hi is not None and not lo < hi <= 1:
            v.err("fidelity.fit_window: need 0 < low < high <= 1")

    vis = cfg["visibility"]
    scen = vis["scenarios"]
    if not isinstance(scen, list) or not scen:
        v.err("visibility.scenarios: expected a non-empty list")
    else:
        for i, s in enumerate(scen):
            v.choice(f"visibility.scenarios[{i}]", s, SCENARIO_KINDS)
    dur = v.number("visibility.duration", vis["duration"], minimum=0, exclusive=True)
    v.number("visibility.delay", vis["delay"], minimum=0)
    kt = vis["kick_times"]
    if not isinstance(kt, list):
        v.err("visibility.kick_times: expected a list")
    else:
        times = [
            v.number(f"visibility.kick_times[{i}]", t, minimum=0, exclusive=True)
            for i, t in enumerate(kt)
        ]
        if dur is not None and None not in times:
            if any(t >= dur for t in times):
                v.err("visibility.kick_times: every kick must lie inside (0, visibility.duration)")
            if any(b <= a for a, b in zip(times, times[1:])):
                v.err("visibility.kick_times: must be strictly increasing")
    scr = vis["screen"]
    v.number("visibility.screen.path_difference", scr["path_difference"])
    v.number("visibility.screen.cm_velocity", scr["cm_velocity"], minimum=0, exclusive=True)
    v.number("visibility.screen.wavenumber", scr["wavenumber"])
    n_screen = v.number("visibility.screen.samples", scr["samples"], integer=True, minimum=2)
    if n_screen and n_screen % 2:
        v.err("visibility.screen.samples: must be even so both fringe extrema are sampled")

    lp = cfg["loop"]
    ldur = v.number("loop.duration", lp["duration"], minimum=0, exclusive=True)
    if lp["scatterer_times"] is not None:
        st = lp["scatterer_times"]
        if not isinstance(st, list):
            v.err("loop.scatterer_times: expected a list")
        else:
            times = [
                v.number(f"loop.scatterer_times[{i}]", t, minimum=0, exclusive=True)
                for i, t in enumerate(st)
            ]
            if ldur is not None and None not in times:
                if any(t >= ldur for t in times):
                    v.err("loop.scatterer_times: every time must lie inside (0, loop.duration)")
                if any(b <= a for a, b in zip(times, times[1:])):
                    v.err("loop.scatterer_times: must be strictly increasing")
            if "n_scatterers" in (data.get("loop") or {}) and lp["n_scatterers"] != len(st):
                v.err("loop: n_scatterers disagrees with the length of scatterer_times")
            lp["n_scatterers"] = len(st)
    else:
        v.number("loop.n_scatterers", lp["n_scatterers"], integer=True, minimum=0)

    ens = cfg["ensemble"]
    v.number("ensemble.n_samples", ens["n_samples"], integer=True, minimum=1)
    v.number("ensemble.n_scatterers", ens["n_scatterers"], integer=True, minimum=0)
    v.number("ensemble.duration", ens["duration"], minimum=0, exclusive=True)
    v.number("ensemble.bins", ens["bins"], integer=True, minimum=1)

    sw = cfg["sweep"]
    if sw is not None:
        if not isinstance(sw, dict):
            v.err("sweep: expected a mapping with parameter and values")
        else:
            for key in sw:
                if key not in ("parameter", "values"):
                    v.err(f"sweep.{key}: unknown key")
            param = sw.get("parameter")
            values = sw.get("values")
            if param not in SWEEPABLE:
                v.err(f"sweep.parameter: {param!r} is not sweepable; choose from {sorted(SWEEPABLE)}")
            if not isinstance(values, list) or not values:
                v.err("sweep.values: expected a non-empty list")
            elif param in SWEEPABLE:
                integer = SWEEPABLE[param] is int
                for i, x in enumerate(values):
                    v.number(f"sweep.values[{i}]", x, integer=integer)
                if len(set(values)) != len(values):
                    v.err("sweep.values: duplicate axis values")

    out = cfg["output"]
    if not isinstance(out.get("dir"), str):
        v.err("output.dir: expected a path string")

    if v.errors:
        raise ConfigError(v.errors)
    return cfg


def parse_config(text: str, experiment: str | None = None, seed: int | None = None) -> dict:
    """Parse and validate a YAML experiment document.

    ``experiment`` and ``seed`` override the document's values. Returns a
    plain dict with every default filled in.
    """
    return _validate(_load_yaml(text), experiment, seed)


def set_parameter(cfg: dict, dotted: str, value) -> dict:
    """Copy of ``cfg`` with one sweepable parameter replaced and re-validated."""
    out = copy.deepcopy(cfg)
    head, _, tail = dotted.partition(".")
    if tail:
        out[head][tail] = value
        if dotted == "loop.n_scatterers":
            out["loop"]["scatterer_times"] = None
    else:
        out[head] = value
    out["sweep"] = None
    return _validate(out, None, None)


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form, ignoring output location."""
    body = {k: val for k, val in cfg.items() if k != "output"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
