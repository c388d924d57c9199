"""Execute validated experiment configs and write tabular results."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .config import config_hash, set_parameter
from .hilbert import Spectrum, StateVector, eigendecompose
from .interferometry import ScreenConfig, build_scenario, fringe_contrast, screen_pattern, visibility
from .models import (
    InitialStateSpec,
    KickSpec,
    ModelSpec,
    build_hamiltonian,
    build_kick,
    eigenbasis_ensemble,
    initial_state,
)
from .propagation import fidelity_trace, fit_decay_rate
from .weak_localization import (
    EnsembleParams,
    LoopSpec,
    ensemble_overlap,
    evenly_spaced_loop,
    loop_overlap,
    worker_count,
)


class ComputationError(RuntimeError):
    """A numerical failure, annotated with the experiment that raised it."""


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row width does not match the column count")
            for x in row:
                if isinstance(x, float) and not math.isfinite(x):
                    raise ComputationError(f"non-finite value in results: {row}")

    def to_csv(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.metadata.items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(_cell(x) for x in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


@dataclass
class RunResult:
    experiment: str
    table: ResultTable
    summary: dict[str, Any]


def _model(cfg) -> tuple[ModelSpec, Spectrum]:
    m = cfg["model"]
    spec = ModelSpec(m["kind"], m["dim"], m["scale"], m["seed"])
    return spec, eigendecompose(build_hamiltonian(spec))


def _kick_spec(cfg, offset: int = 0) -> KickSpec:
    k = cfg["kick"]
    return KickSpec(k["strength"], k["basis"], k["seed"], k["rotation_seed"]).with_seed_offset(offset)


def _initial_states(cfg, s: Spectrum) -> list[StateVector]:
    ini = cfg["initial_state"]
    if ini["kind"] == "eigenbasis-ensemble":
        return eigenbasis_ensemble(s)
    return [
        initial_state(InitialStateSpec(ini["kind"], ini["index"], ini["seed"] + j), s)
        for j in range(ini["samples"])
    ]


def _run_fidelity(cfg) -> tuple[ResultTable, dict]:
    _, s = _model(cfg)
    f = cfg["fidelity"]
    kick = build_kick(_kick_spec(cfg), s)
    trace = fidelity_trace(_initial_states(cfg, s), s, kick, f["times"], period=f["period"])
    lo, hi = f["fit_window"]
    fit = fit_decay_rate(trace.times, trace.moduli, lo, hi)
    rows = [
        [float(t), float(v.real), float(v.imag), float(m)]
        for t, v, m in zip(trace.times, trace.values, trace.moduli)
    ]
    table = ResultTable(["t", "echo_re", "echo_im", "modulus"], rows)
    summary = {
        "decay_rate": fit["rate"],
        "fit_window_start": fit["window_start"],
        "fit_window_end": fit["window_end"],
        "fit_points": fit["points"],
        "fit_modulus_range": [lo, hi],
        "final_modulus": float(trace.moduli[-1]),
    }
    return table, summary


def _run_visibility(cfg) -> tuple[ResultTable, dict]:
    _, s = _model(cfg)
    vis = cfg["visibility"]
    chi0 = _initial_states(cfg, s)[0]
    kicks = [(t, build_kick(_kick_spec(cfg, n), s)) for n, t in enumerate(vis["kick_times"])]
    scr = vis["screen"]
    grid = np.linspace(0.0, 2 * np.pi, scr["samples"], endpoint=False)
    rows = []
    summary: dict[str, Any] = {"visibility": {}}
    for kind in vis["scenarios"]:
        res = visibility(chi0, s, build_scenario(kind, kicks, vis["duration"], vis["delay"]))
        o = res.overlap_value
        # start the screen grid on a fringe maximum so both extrema are sampled
        shift = np.angle(o) + scr["wavenumber"] * scr["path_difference"]
        screen = ScreenConfig(scr["path_difference"], scr["cm_velocity"], scr["wavenumber"], grid - shift)
        contrast = fringe_contrast(screen_pattern(res, screen))
        rows.append([kind, o.real, o.imag, res.visibility, contrast])
        summary["visibility"][kind] = res.visibility
    summary["final_visibility"] = rows[-1][3]
    table = ResultTable(["scenario", "overlap_re", "overlap_im", "visibility", "fringe_contrast"], rows)
    return table, summary


def _loop_spec(cfg, s: Spectrum) -> LoopSpec:
    lp = cfg["loop"]
    n = lp["n_scatterers"]
    gens = [build_kick(_kick_spec(cfg, j), s) for j in range(n)]
    if lp["scatterer_times"] is None:
        return evenly_spaced_loop(lp["duration"], gens)
    return LoopSpec(lp["duration"], tuple(lp["scatterer_times"]), tuple(gens))


def _run_loop(cfg) -> tuple[ResultTable, dict]:
    _, s = _model(cfg)
    spec = _loop_spec(cfg, s)
    res = loop_overlap(_initial_states(cfg, s)[0], s, spec)
    o = res.overlap
    table = ResultTable(
        ["n_scatterers", "overlap_re", "overlap_im", "overlap_modulus", "wl_weight_proxy"],
        [[spec.n_scatterers, o.real, o.imag, abs(o), res.wl_weight]],
    )
    summary = {
        "overlap_re": o.real,
        "overlap_im": o.imag,
        "overlap_modulus": abs(o),
        "wl_weight_proxy": res.wl_weight,
        "scatterer_times": list(spec.scatterer_times),
    }
    return table, summary


def _run_ensemble(cfg, workers: Optional[int]) -> tuple[ResultTable, dict]:
    m = cfg["model"]
    ens = cfg["ensemble"]
    ini = cfg["initial_state"]
    params = EnsembleParams(
        ModelSpec(m["kind"], m["dim"], m["scale"], m["seed"]),
        ens["n_scatterers"],
        cfg["kick"]["strength"],
        cfg["kick"]["basis"],
        ens["duration"],
        InitialStateSpec(ini["kind"], ini["index"], ini["seed"]),
        ens["bins"],
    )
    stats = ensemble_overlap(params, ens["n_samples"], cfg["seed"], workers=workers)
    rows = [[i, o.real, o.imag, o.real] for i, o in enumerate(stats.overlaps)]
    table = ResultTable(["sample", "overlap_re", "overlap_im", "wl_weight_proxy"], rows)
    counts, edges = stats.histogram
    summary = {
        "mean_wl_weight_proxy": stats.mean,
        "std_wl_weight_proxy": stats.std,
        "n_samples": stats.n_samples,
        "histogram": {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]},
    }
    return table, summary


HEADLINES = {
    "fidelity-trace": ("decay_rate", "final_modulus"),
    "wl-loop": ("overlap_re", "overlap_im", "wl_weight_proxy"),
    "wl-ensemble": ("mean_wl_weight_proxy", "std_wl_weight_proxy"),
}


def _dispatch(cfg, workers: Optional[int]) -> tuple[ResultTable, dict]:
    exp = cfg["experiment"]
    try:
        if exp == "fidelity-trace":
            return _run_fidelity(cfg)
        if exp == "visibility-scan":
            return _run_visibility(cfg)
        if exp == "wl-loop":
            return _run_loop(cfg)
        return _run_ensemble(cfg, workers)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise ComputationError(f"{exp} failed: {exc}") from exc


def _metadata(cfg) -> dict:
    return {
        "tool": f"iddecoherence {__version__}",
        "experiment": cfg["experiment"],
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
    }


def run_experiment(cfg: dict, workers: Optional[int] = None) -> RunResult:
    table, summary = _dispatch(cfg, workers)
    table.metadata = _metadata(cfg)
    summary = {**table.metadata, **summary}
    return RunResult(cfg["experiment"], table, summary)


def _headline(cfg, summary) -> list[tuple[str, float]]:
    if cfg["experiment"] == "visibility-scan":
        return [(f"visibility_{k}", v) for k, v in summary["visibility"].items()]
    return [(k, summary[k]) for k in HEADLINES[cfg["experiment"]]]


def sweep(
    cfg: dict, parameter: Optional[str] = None, values=None, workers: Optional[int] = None
) -> RunResult:
    """One row of headline scalars per axis value, ordered by axis value."""
    sw = cfg.get("sweep") or {}
    parameter = parameter or sw.get("parameter")
    values = sw.get("values") if values is None else values
    if not parameter or not values:
        raise ValueError("sweep needs a parameter and at least one value")
    values = sorted(values)
    points = [set_parameter(cfg, parameter, v) for v in values]
    workers = worker_count() if workers is None else workers

    # ensembles inside a sweep run serially; the sweep rows carry the parallelism
    def one(point):
        return _dispatch(point, 1)[1]

    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(one, points))
    else:
        summaries = [one(p) for p in points]
    heads = [_headline(p, s) for p, s in zip(points, summaries)]
    columns = [parameter] + [name for name, _ in heads[0]]
    rows = [[v] + [x for _, x in h] for v, h in zip(values, heads)]
    meta = _metadata(cfg)
    meta["sweep_parameter"] = parameter
    table = ResultTable(columns, rows, meta)
    summary = {**meta, "values": values, "rows": [dict(zip(columns, r)) for r in rows]}
    return RunResult(f"{cfg['experiment']}-sweep", table, summary)


def write_outputs(result: RunResult, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{result.experiment}.csv"
    json_path = out / f"{result.experiment}.summary.json"
    csv_path.write_text(result.table.to_csv())
    json_path.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
