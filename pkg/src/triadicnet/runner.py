"""Experiment dispatch: turn a validated configuration into data files.

Every experiment writes CSV/text artifacts plus a ``summary.json`` holding
the canonical configuration and derived quantities (equilibrium densities,
regime, peak locations, exit times).  All numeric output uses round-trip
decimal formatting, so a rerun with the same configuration is byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import chain as chain_mod
from . import graph as graph_mod
from . import ode as ode_mod
from . import sde as sde_mod
from .config import ExperimentConfig, canonicalize
from .errors import ConfigError
from .model import ModelParams, Regime, equilibrium_densities
from .records import Observable
from .rng import path_stream


@dataclass
class RunResult:
    out_dir: Path
    files: list[str]
    summary: dict


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(cell) for cell in row) + "\n")


def _write_lines(path: Path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _params(cfg: ExperimentConfig) -> ModelParams:
    return ModelParams(cfg.get_int("n"), cfg.get_float("c1"), cfg.get_float("c2"),
                       cfg.get_float("c3"))


def _rate_params(cfg: ExperimentConfig, n: int) -> ModelParams:
    return ModelParams(n, cfg.get_float("c1"), cfg.get_float("c2"), cfg.get_float("c3"))


def _roots_summary(params: ModelParams) -> dict:
    roots = equilibrium_densities(params)
    return {
        "equilibrium_densities": [float(r) for r in roots.roots],
        "regime": roots.regime.value,
    }


def _initial_graph(cfg: ExperimentConfig, params: ModelParams, gen) -> graph_mod.GraphState:
    spec = _initial_spec(cfg, params)
    return graph_mod.GraphState.from_initial_condition(params.n, spec, gen)


def _initial_spec(cfg: ExperimentConfig, params: ModelParams):
    kind, _, arg = cfg.get_str("init").partition(":")
    if kind == "er":
        return graph_mod.ErdosRenyi(float(arg))
    if kind == "edges":
        return graph_mod.ExactEdges(int(arg))
    if kind == "density":
        return graph_mod.ExactEdges(round(float(arg) * params.pair_count))
    return graph_mod.HalfEdges()


def _initial_state(cfg: ExperimentConfig, params: ModelParams, gen) -> int:
    """Macro-chain analogue of the initial condition."""
    kind, _, arg = cfg.get_str("init").partition(":")
    N = params.pair_count
    if kind == "er":
        return int(gen.binomial(N, float(arg)))
    if kind == "edges":
        return int(arg)
    if kind == "density":
        return round(float(arg) * N)
    return round(N / 2)


def _stride_kwargs(cfg: ExperimentConfig) -> dict:
    kwargs = {}
    if cfg.has("record_dt"):
        kwargs["record_dt"] = cfg.get_float("record_dt")
    if cfg.has("record_every"):
        kwargs["record_every"] = cfg.get_int("record_every")
    return kwargs


def _path_rows(record) -> list[tuple]:
    return list(zip(record.times, record.values))


# --------------------------------------------------------------------------
# experiment implementations (each returns (files, derived-summary))


def _run_micro_path(cfg, out):
    params = _params(cfg)
    seed = cfg.get_int("seed")
    initial = _initial_graph(cfg, params, path_stream(seed, 0))
    record = graph_mod.simulate_path(initial, params, cfg.get_float("t_end"),
                                     seed=path_stream(seed, 1), **_stride_kwargs(cfg))
    _write_csv(out / "path.csv", ["t", "value"], _path_rows(record))
    derived = _roots_summary(params)
    derived["final_density"] = float(record.values[-1])
    return ["path.csv"], derived


def _run_micro_spy(cfg, out):
    params = _params(cfg)
    seed = cfg.get_int("seed")
    initial = _initial_graph(cfg, params, path_stream(seed, 0))
    times = cfg.get_float_list("snapshot_times")
    shots = graph_mod.snapshots_at(initial, params, times, seed=path_stream(seed, 1))
    files = []
    info = []
    for k, (t, state) in enumerate(shots):
        name = f"snapshot_{k:03d}.txt"
        _write_lines(out / name, state.edge_lines())
        files.append(name)
        info.append({"time": t, "edges": state.edge_count, "density": state.density})
    derived = _roots_summary(params)
    derived["snapshots"] = info
    return files, derived


def _run_micro_pij(cfg, out):
    params = _params(cfg)
    t_end = cfg.get_float("t_end")
    record_dt = cfg.get_float("record_dt") if cfg.has("record_dt") else t_end / 50.0
    times = np.arange(1, int(np.floor(t_end / record_dt + 1e-9)) + 1) * record_dt
    est = graph_mod.estimate_edge_probabilities(
        params.n, params, _initial_spec(cfg, params), times,
        cfg.get_int("n_paths"), seed=cfg.get_int("seed"),
        threads=cfg.get_int("threads"))
    rows = []
    for g, t in enumerate(est.times):
        for e in range(est.p_hat.shape[1]):
            rows.append((t, int(est.pair_i[e]) + 1, int(est.pair_j[e]) + 1, est.p_hat[g, e]))
    _write_csv(out / "pij_long.csv", ["t", "i", "j", "p_hat"], rows)
    _write_csv(out / "pij_mean.csv", ["t", "mean"], list(zip(est.times, est.mean)))
    derived = _roots_summary(params)
    derived["final_mean"] = float(est.mean[-1])
    return ["pij_long.csv", "pij_mean.csv"], derived


def _run_macro_path(cfg, out):
    params = _params(cfg)
    seed = cfg.get_int("seed")
    chain = chain_mod.build_chain(params)
    start = _initial_state(cfg, params, path_stream(seed, 0))
    record = chain_mod.simulate_macro_path(chain, start, cfg.get_float("t_end"),
                                           seed=path_stream(seed, 1), **_stride_kwargs(cfg))
    _write_csv(out / "path.csv", ["t", "value"], _path_rows(record))
    derived = _roots_summary(params)
    derived["initial_state"] = start
    derived["final_density"] = float(record.values[-1])
    return ["path.csv"], derived


def _run_macro_steady(cfg, out):
    params = _params(cfg)
    chain = chain_mod.build_chain(params)
    dist = chain_mod.stationary_distribution(chain)
    report = chain_mod.modality(dist, chain)
    N = chain.N
    rows = [(j, j / N, dist.probs[j], dist.probs[j] * N) for j in range(N + 1)]
    _write_csv(out / "steady.csv", ["state", "density", "prob", "prob_density"], rows)
    derived = _roots_summary(params)
    derived["classification"] = report.classification.value
    derived["peak_states"] = [int(j) for j in report.local_maxima]
    derived["peak_densities"] = [j / N for j in report.local_maxima]
    derived["trough_states"] = [int(j) for j in report.local_minima]
    return ["steady.csv"], derived


def _run_macro_exit(cfg, out):
    ns = cfg.get_int_list("n_values")
    roots = equilibrium_densities(_rate_params(cfg, ns[0]))
    if roots.regime is not Regime.BISTABLE:
        raise ConfigError(["macro-exit needs bistable rate constants (three drift roots)"])
    table = chain_mod.transition_time_curve(cfg.get_float("c1"), cfg.get_float("c2"),
                                            cfg.get_float("c3"), ns, roots=roots)
    rows = list(zip(table.n_values, table.low_to_mid, table.high_to_mid, table.ratio))
    _write_csv(out / "exit_times.csv", ["n", "tau_low_to_mid", "tau_high_to_mid", "ratio"], rows)
    derived = {
        "equilibrium_densities": [float(r) for r in roots.roots],
        "regime": roots.regime.value,
        "ratio_first": float(table.ratio[0]),
        "ratio_last": float(table.ratio[-1]),
    }
    return ["exit_times.csv"], derived


def _run_sde_path(cfg, out):
    params = _params(cfg)
    spec = sde_mod.SdeSpec(params)
    result = sde_mod.em_path(spec, cfg.get_float("y0"), cfg.get_float("t_end"),
                             cfg.get_float("dt"), seed=cfg.get_int("seed"),
                             record_every=cfg.get_int("record_every"))
    _write_csv(out / "path.csv", ["t", "value"], _path_rows(result.record))
    derived = _roots_summary(params)
    derived["reflections"] = result.reflections
    derived["final_density"] = float(result.record.values[-1])
    return ["path.csv"], derived


def _run_sde_mfpt(cfg, out):
    grid_points = cfg.get_int("grid_points")
    if cfg.has("n_values"):
        ns = cfg.get_int_list("n_values")
        roots = equilibrium_densities(_rate_params(cfg, ns[0]))
        if roots.regime is not Regime.BISTABLE:
            raise ConfigError(["the sde-mfpt curve needs bistable rate constants"])
        curve = sde_mod.mfpt_curve(cfg.get_float("c1"), cfg.get_float("c2"),
                                   cfg.get_float("c3"), ns,
                                   grid_points=grid_points, roots=roots)
        rows = list(zip(curve.n_values, curve.low_to_mid, curve.high_to_mid, curve.ratio))
        _write_csv(out / "mfpt_curve.csv",
                   ["n", "tau_low_to_mid", "tau_high_to_mid", "ratio"], rows)
        derived = {
            "equilibrium_densities": [float(r) for r in roots.roots],
            "regime": roots.regime.value,
        }
        return ["mfpt_curve.csv"], derived

    params = _params(cfg)
    spec = sde_mod.SdeSpec(params)
    roots = equilibrium_densities(params)
    if roots.regime is not Regime.BISTABLE:
        raise ConfigError(["sde-mfpt tables need bistable rate constants"])
    up = sde_mod.solve_mfpt(spec, sde_mod.MfptProblem(
        (0.0, roots.mid), sde_mod.BoundaryKind.REFLECT_LEFT_ABSORB_RIGHT, grid_points))
    down = sde_mod.solve_mfpt(spec, sde_mod.MfptProblem(
        (roots.mid, 1.0), sde_mod.BoundaryKind.ABSORB_LEFT_REFLECT_RIGHT, grid_points))
    _write_csv(out / "mfpt_low.csv", ["x", "T"], list(zip(up.x, up.values)))
    _write_csv(out / "mfpt_high.csv", ["x", "T"], list(zip(down.x, down.values)))
    derived = _roots_summary(params)
    derived["T_low_to_mid"] = float(up(roots.low))
    derived["T_high_to_mid"] = float(down(roots.high))
    return ["mfpt_low.csv", "mfpt_high.csv"], derived


def _run_ode_trace(cfg, out):
    params = _params(cfg)
    run = ode_mod.integrate(params, cfg.get_float("y0"), cfg.get_float("t_end"),
                            cfg.get_float("step"))
    _write_csv(out / "path.csv", ["t", "value"], _path_rows(run.trace))
    derived = _roots_summary(params)
    derived["final_density"] = float(run.trace.values[-1])
    return ["path.csv"], derived


def _run_mean_field(cfg, out):
    params = _params(cfg)
    run = ode_mod.mean_field_euler(params, cfg.get_float("y0"), cfg.get_int("n_steps"))
    rows = list(zip(range(len(run.values)), run.values))
    _write_csv(out / "path.csv", ["t", "value"], rows)
    derived = _roots_summary(params)
    derived["clamped"] = bool(run.clamped)
    derived["final_density"] = float(run.values[-1])
    return ["path.csv"], derived


def _run_compare_models(cfg, out):
    params = _params(cfg)
    seed = cfg.get_int("seed")
    t_end = cfg.get_float("t_end")
    record_dt = cfg.get_float("record_dt")
    dt = cfg.get_float("dt")

    initial = _initial_graph(cfg, params, path_stream(seed, 0))
    micro = graph_mod.simulate_path(initial, params, t_end, record_dt=record_dt,
                                    seed=path_stream(seed, 1))
    chain = chain_mod.build_chain(params)
    macro = chain_mod.simulate_macro_path(chain, initial.edge_count, t_end,
                                          record_dt=record_dt, seed=path_stream(seed, 2))
    spec = sde_mod.SdeSpec(params)
    y0 = initial.density
    sde_mean = sde_mod.em_ensemble_mean(spec, y0, t_end, dt, cfg.get_int("n_paths"),
                                        seed=path_stream(seed, 3),
                                        record_every=int(round(record_dt / dt)))
    ode_run = ode_mod.integrate(params, y0, t_end, cfg.get_float("step"))
    mf = ode_mod.mean_field_euler(params, y0, max(1, int(np.ceil(t_end))))

    _write_csv(out / "micro.csv", ["t", "value"], _path_rows(micro))
    _write_csv(out / "macro.csv", ["t", "value"], _path_rows(macro))
    _write_csv(out / "sde_mean.csv", ["t", "value"], _path_rows(sde_mean))
    _write_csv(out / "ode.csv", ["t", "value"], _path_rows(ode_run.trace))
    _write_csv(out / "mean_field.csv", ["t", "value"],
               list(zip(range(len(mf.values)), mf.values)))

    grid = micro.times
    interp = {
        "macro": np.interp(grid, macro.times, macro.values),
        "sde_mean": np.interp(grid, sde_mean.times, sde_mean.values),
        "ode": np.interp(grid, ode_run.trace.times, ode_run.trace.values),
    }
    late = grid >= t_end / 2
    derived = _roots_summary(params)
    derived["initial_density"] = y0
    for name, vals in interp.items():
        derived[f"max_late_gap_micro_vs_{name}"] = float(
            np.abs(micro.values[late] - vals[late]).max())
    return ["micro.csv", "macro.csv", "sde_mean.csv", "ode.csv", "mean_field.csv"], derived


_RUNNERS = {
    "micro-path": _run_micro_path,
    "micro-spy": _run_micro_spy,
    "micro-pij": _run_micro_pij,
    "macro-path": _run_macro_path,
    "macro-steady": _run_macro_steady,
    "macro-exit": _run_macro_exit,
    "sde-path": _run_sde_path,
    "sde-mfpt": _run_sde_mfpt,
    "ode-trace": _run_ode_trace,
    "mean-field": _run_mean_field,
    "compare-models": _run_compare_models,
}


def run(config: ExperimentConfig, base_dir: str | Path = ".") -> RunResult:
    """Validate, execute, and write artifacts for one experiment."""
    cfg = canonicalize(config)
    out = Path(base_dir) / cfg.values.get("out", f"runs/{cfg.experiment}")
    out.mkdir(parents=True, exist_ok=True)
    files, derived = _RUNNERS[cfg.experiment](cfg, out)
    summary = {
        "experiment": cfg.experiment,
        "config": dict(sorted(cfg.values.items())),
        "derived": derived,
        "files": files,
    }
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RunResult(out_dir=out, files=files + ["summary.json"], summary=summary)
