"""Command-line experiment harness.

Subcommands: ``verify`` (property suites), ``simulate`` (trajectory + summary),
``conjugacy`` (push the physical flow through the inverse change of variables
and compare with the normal-form flow), ``sweep`` (lifespan surrogate over a
list of amplitudes).

Configuration is a single JSON document; command-line flags override JSON
fields. Every run is deterministic given its config, and every report embeds
a schema version, the config hash, a build id and the grid metadata.

Exit codes: 0 pass, 1 suite/criterion failure, 2 config error, 3 numerical
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .dynamics import KirchhoffDynamics, make_dynamics
from .errors import (
    BlowupError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericalError,
    ParameterError,
)
from .fields import ConjugatePair, field_from_dict, random_field
from .grid import SpectralGrid
from .integrate import IntegratorConfig, TrajectoryRecord, integrate
from .kirchhoff import hamiltonian, momenta, random_state
from .suites import REGISTRY, SuiteConfig, measure_quartic_constant, run_suites
from .transforms import change_of_variables

SCHEMA_VERSION = 1

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# -- config plumbing -----------------------------------------------------------


def build_id() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if rev.returncode == 0:
            return rev.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"pkg-{__version__}"


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_field(path: str, value, spec: dict) -> None:
    kind = spec["kind"]
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected integer, got {value!r}")
    elif kind == "number":
        if not _is_number(value):
            raise ConfigError(f"{path}: expected number, got {value!r}")
    elif kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected string, got {value!r}")
    elif kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected boolean, got {value!r}")
    elif kind == "list":
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected list, got {value!r}")
        for i, item in enumerate(value):
            _check_field(f"{path}[{i}]", item, spec["item"])
        if "min_len" in spec and len(value) < spec["min_len"]:
            raise ConfigError(f"{path}: needs at least {spec['min_len']} entries")
        return
    else:  # pragma: no cover
        raise ConfigError(f"{path}: unknown schema kind {kind!r}")
    if "choices" in spec and value not in spec["choices"]:
        raise ConfigError(f"{path}: must be one of {spec['choices']}, got {value!r}")
    if "min" in spec and value < spec["min"]:
        raise ConfigError(f"{path}: must be >= {spec['min']}, got {value!r}")
    if "max" in spec and value > spec["max"]:
        raise ConfigError(f"{path}: must be <= {spec['max']}, got {value!r}")


def merge_config(defaults: dict, schema: dict, json_path: str | None, overrides: dict) -> dict:
    cfg = dict(defaults)
    if json_path:
        try:
            with open(json_path, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config document must be a JSON object")
        for key, value in loaded.items():
            if key not in schema:
                raise ConfigError(f"{key}: unknown config field")
            cfg[key] = value
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    for key, value in cfg.items():
        _check_field(key, value, schema[key])
    return cfg


def _report_header(command: str, cfg: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "build_id": build_id(),
        "config_hash": config_hash(cfg),
        "config": cfg,
    }


def _write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _grid_meta(grid: SpectralGrid) -> dict:
    return {
        "d": grid.d,
        "N": grid.n_cutoff,
        "n_modes": grid.n_modes,
        "n_classes": grid.n_classes,
        "m0": grid.m0,
    }


# -- verify ---------------------------------------------------------------------

VERIFY_DEFAULTS = {
    "grids": [[1, 4], [1, 8], [2, 4], [2, 8]],
    "samples": 200,
    "seed": 20260808,
    "suites": [],  # empty means all
    "corrupt_diff_sign": False,
    "divisor_radius": 50,
    "divisor_dims": [2, 3],
    "workers": 1,
    "out": "out",
}

VERIFY_SCHEMA = {
    "grids": {
        "kind": "list",
        "min_len": 1,
        "item": {"kind": "list", "min_len": 2, "item": {"kind": "int", "min": 1}},
    },
    "samples": {"kind": "int", "min": 0},
    "seed": {"kind": "int"},
    "suites": {"kind": "list", "item": {"kind": "str", "choices": tuple(REGISTRY)}},
    "corrupt_diff_sign": {"kind": "bool"},
    "divisor_radius": {"kind": "int", "min": 2},
    "divisor_dims": {"kind": "list", "item": {"kind": "int", "min": 2, "max": 3}},
    "workers": {"kind": "int", "min": 1},
    "out": {"kind": "str"},
}


def cmd_verify(cfg: dict) -> int:
    report = _report_header("verify", cfg)
    t0 = time.time()
    if cfg["samples"] == 0:
        results = []
    else:
        suite_cfg = SuiteConfig(
            grids=tuple(tuple(g[:2]) for g in cfg["grids"]),
            samples=cfg["samples"],
            seed=cfg["seed"],
            corrupt_diff_sign=cfg["corrupt_diff_sign"],
            divisor_dims=tuple(cfg["divisor_dims"]),
            divisor_radius=cfg["divisor_radius"],
        )
        names = cfg["suites"] or list(REGISTRY)
        if cfg["workers"] > 1 and len(names) > 1:
            # suites are independent; results merge by task index, so the
            # report is identical whatever the completion order
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
                results = list(pool.map(lambda n: REGISTRY[n](suite_cfg), names))
        else:
            results = run_suites(suite_cfg, names)
    all_pass = all(r.passed for r in results)
    report["suites"] = [r.to_dict() for r in results]
    report["pass"] = all_pass
    report["runtime_s"] = time.time() - t0
    _write_json(os.path.join(cfg["out"], "verify_report.json"), report)
    for r in results:
        print(
            f"{'PASS' if r.passed else 'FAIL'} {r.suite}: samples={r.samples} "
            f"max_defect={r.max_defect:.3e} bound={r.bound:.3e}"
        )
    print(f"verify: {'all suites pass' if all_pass else 'FAILURES PRESENT'}")
    if not all_pass:
        failing = [r.suite for r in results if not r.passed]
        print(f"failing suites: {', '.join(failing)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


# -- simulate ---------------------------------------------------------------------

SIMULATE_DEFAULTS = {
    "d": 1,
    "n_modes": 8,
    "seed": 1,
    "eps": 0.1,
    "representation": "original",
    "method": "structured",
    "scheme": "rk45_adaptive",
    "dt": 1e-2,
    "rel_tol": 1e-10,
    "abs_tol": 1e-13,
    "t_end": 10.0,
    "monitor_stride": 20,
    "s_values": [],  # empty -> [m0, m0+1, m0+2]
    "track_modes": [],  # per-mode momentum channels (original representation)
    "initial_file": "",
    "ball_threshold": 0.0,  # 0 disables
    "out": "out",
}

SIMULATE_SCHEMA = {
    "d": {"kind": "int", "min": 1, "max": 3},
    "n_modes": {"kind": "int", "min": 1},
    "seed": {"kind": "int"},
    "eps": {"kind": "number", "min": 0.0},
    "representation": {
        "kind": "str",
        "choices": ("original", "diagonalized", "normal_form"),
    },
    "method": {"kind": "str", "choices": ("structured", "direct")},
    "scheme": {"kind": "str", "choices": ("rk4", "rk45_adaptive")},
    "dt": {"kind": "number", "min": 0.0},
    "rel_tol": {"kind": "number", "min": 0.0},
    "abs_tol": {"kind": "number", "min": 0.0},
    "t_end": {"kind": "number", "min": 0.0},
    "monitor_stride": {"kind": "int", "min": 1},
    "s_values": {"kind": "list", "item": {"kind": "number", "min": 0.0}},
    "track_modes": {"kind": "list", "item": {"kind": "list", "min_len": 1, "item": {"kind": "int"}}},
    "initial_file": {"kind": "str"},
    "ball_threshold": {"kind": "number", "min": 0.0},
    "out": {"kind": "str"},
}


def _initial_state(cfg: dict, grid: SpectralGrid):
    rep = cfg["representation"]
    if cfg["initial_file"]:
        with open(cfg["initial_file"], encoding="utf-8") as fh:
            data = json.load(fh)
        if rep == "original":
            from .fields import RealPair

            return RealPair(
                field_from_dict(data["u"], grid), field_from_dict(data["v"], grid)
            )
        return ConjugatePair(field_from_dict(data["w"], grid))
    if rep == "original":
        return random_state(grid, cfg["seed"], cfg["eps"])
    return ConjugatePair(random_field(grid, cfg["seed"], cfg["eps"], grid.m0, "free"))


def _simulate_monitors(cfg: dict, grid: SpectralGrid, state0) -> dict:
    rep = cfg["representation"]
    m0 = grid.m0
    s_values = cfg["s_values"] or [m0, m0 + 1.0, m0 + 2.0]
    monitors: dict = {}
    if rep == "original":
        from .kirchhoff import mode_momentum

        h0 = hamiltonian(state0)
        m_0 = momenta(state0)
        monitors["hamiltonian"] = lambda t, st: hamiltonian(st)
        monitors["ham_drift_rel"] = lambda t, st: abs(hamiltonian(st) - h0) / max(1.0, abs(h0))
        monitors["momentum_drift_max"] = lambda t, st: float(np.max(np.abs(momenta(st) - m_0)))
        for mode in cfg["track_modes"]:
            mode = tuple(mode)
            grid.slot(mode)  # validate early
            label = "_".join(str(c) for c in mode)
            for axis in range(grid.d):
                monitors[f"momentum_j{label}_{axis}"] = (
                    lambda t, st, m=mode, a=axis: float(mode_momentum(st, m)[a])
                )
        for s in s_values:
            monitors[f"uv_norm_s{s:g}"] = (
                lambda t, st, s=s: st.u.norm(s + 0.5) + st.v.norm(s - 0.5)
            )
    else:
        for s in s_values:
            monitors[f"w_norm_s{s:g}"] = lambda t, st, s=s: st.w.norm(s)
        if rep == "normal_form":
            from .normal_form import energy_derivative_arrays, normal_form_rhs

            def _speed_shift(t, st):
                return normal_form_rhs(st, method="structured").speed_shift

            def _ed(t, st):
                rhs = normal_form_rhs(st, method="structured")
                return energy_derivative_arrays(
                    grid, st.w.coeffs, rhs.total[0].coeffs, m0
                )

            monitors["speed_shift"] = _speed_shift
            monitors["energy_derivative_m0"] = _ed
    return monitors


def _channel_summary(rec: TrajectoryRecord) -> dict:
    out = {}
    for name, series in rec.channels.items():
        if len(series) == 0:
            continue
        out[name] = {
            "first": float(series[0]),
            "last": float(series[-1]),
            "min": float(series.min()),
            "max": float(series.max()),
        }
    return out


def cmd_simulate(cfg: dict) -> int:
    grid = SpectralGrid(cfg["d"], cfg["n_modes"])
    state0 = _initial_state(cfg, grid)
    dyn = make_dynamics(cfg["representation"], grid, method=cfg["method"])
    monitors = _simulate_monitors(cfg, grid, state0)
    icfg = IntegratorConfig(
        scheme=cfg["scheme"],
        dt=cfg["dt"] or 1e-2,
        rel_tol=cfg["rel_tol"],
        abs_tol=cfg["abs_tol"],
        t_end=cfg["t_end"],
        monitor_stride=cfg["monitor_stride"],
        ball_threshold=cfg["ball_threshold"] or None,
        store_states=False,
    )
    t0 = time.time()
    rec = integrate(dyn, state0, icfg, monitors=monitors)
    runtime = time.time() - t0

    os.makedirs(cfg["out"], exist_ok=True)
    csv_path = os.path.join(cfg["out"], "trajectory.csv")
    rec.to_csv(csv_path)

    summary = _report_header("simulate", cfg)
    summary["grid"] = _grid_meta(grid)
    summary["exit_reason"] = rec.exit_reason
    summary["exit_time"] = rec.exit_time
    summary["n_steps"] = rec.n_steps
    summary["n_rejected"] = rec.n_rejected
    summary["max_projection_defect"] = rec.max_projection_defect
    summary["runtime_s"] = runtime
    summary["channels"] = _channel_summary(rec)
    # growth ratio per monitored norm; for the physical system the max/initial
    # ratio should be essentially independent of the order s
    ratios = {}
    for name, stats in summary["channels"].items():
        if name.startswith(("uv_norm_s", "w_norm_s")) and stats["first"] > 0:
            ratios[name] = stats["max"] / stats["first"]
    summary["norm_growth_ratios"] = ratios
    if len(ratios) >= 2:
        vals = sorted(ratios.values())
        summary["norm_growth_spread"] = (vals[-1] - vals[0]) / vals[0]
    _write_json(os.path.join(cfg["out"], "simulate_summary.json"), summary)
    print(
        f"simulate: {cfg['representation']} d={cfg['d']} N={cfg['n_modes']} "
        f"t={rec.exit_time:g} steps={rec.n_steps} exit={rec.exit_reason}"
    )
    return EXIT_PASS if rec.exit_reason in ("completed", "ball_exit") else EXIT_NUMERICAL


# -- conjugacy ----------------------------------------------------------------------

CONJUGACY_DEFAULTS = {
    "d": 1,
    "n_modes": 8,
    "seed": 3,
    "eps": 0.05,
    "t_end": 5.0,
    "n_samples": 20,
    "base_rel_tol": 4e-12,
    "levels": 3,
    "defect_bound": 1e-7,
    "out": "out",
}

CONJUGACY_SCHEMA = {
    "d": {"kind": "int", "min": 1, "max": 3},
    "n_modes": {"kind": "int", "min": 1},
    "seed": {"kind": "int"},
    "eps": {"kind": "number", "min": 0.0},
    "t_end": {"kind": "number", "min": 0.0},
    "n_samples": {"kind": "int", "min": 1},
    "base_rel_tol": {"kind": "number", "min": 0.0},
    "levels": {"kind": "int", "min": 1},
    "defect_bound": {"kind": "number", "min": 0.0},
    "out": {"kind": "str"},
}


def conjugacy_defect(
    grid: SpectralGrid,
    w0: ConjugatePair,
    t_end: float,
    n_samples: int,
    rel_tol: float,
) -> dict:
    """Max over sample times of || inverse-transformed physical state - normal-form state ||_m0."""
    m0 = grid.m0
    try:
        uv0 = change_of_variables("fwd", w0)
    except DomainError as exc:
        return {"status": "inconclusive", "reason": f"initial ball violation: {exc}"}
    ts = np.linspace(0.0, t_end, n_samples + 1)
    icfg = IntegratorConfig(
        scheme="rk45_adaptive", rel_tol=rel_tol, abs_tol=rel_tol * 1e-2, t_end=t_end,
        dt=1e-2,
    )
    rec_uv = integrate(KirchhoffDynamics(grid), uv0, icfg, t_eval=ts)
    rec_w = integrate(
        make_dynamics("normal_form", grid), w0,
        IntegratorConfig(
            scheme="rk45_adaptive", rel_tol=rel_tol, abs_tol=rel_tol * 1e-2,
            t_end=t_end, dt=1e-2,
        ),
        t_eval=ts,
    )
    if rec_uv.exit_reason != "completed" or rec_w.exit_reason != "completed":
        return {"status": "inconclusive", "reason": f"{rec_uv.exit_reason}/{rec_w.exit_reason}"}
    defect = 0.0
    for st_uv, st_w in zip(rec_uv.states, rec_w.states):
        try:
            w_from_uv = change_of_variables("inv", st_uv)
        except DomainError as exc:
            return {"status": "inconclusive", "reason": f"transform ball exit: {exc}"}
        diff = w_from_uv.w.coeffs - st_w.w.coeffs
        defect = max(defect, grid.coeff_norm(diff, m0))
    return {"status": "ok", "defect": defect, "n_steps": rec_uv.n_steps + rec_w.n_steps}


def cmd_conjugacy(cfg: dict) -> int:
    grid = SpectralGrid(cfg["d"], cfg["n_modes"])
    w0 = ConjugatePair(random_field(grid, cfg["seed"], cfg["eps"], grid.m0, "free"))
    report = _report_header("conjugacy", cfg)
    report["grid"] = _grid_meta(grid)
    levels = []
    inconclusive = False
    for lvl in range(cfg["levels"]):
        tol = cfg["base_rel_tol"] / (2.0 ** lvl)
        res = conjugacy_defect(grid, w0, cfg["t_end"], cfg["n_samples"], tol)
        res["rel_tol"] = tol
        levels.append(res)
        if res["status"] != "ok":
            inconclusive = True
            break
    report["levels"] = levels
    if inconclusive:
        report["status"] = "inconclusive"
        report["pass"] = None
        _write_json(os.path.join(cfg["out"], "conjugacy_report.json"), report)
        print("conjugacy: inconclusive (ball exit)")
        return EXIT_PASS
    defects = [lv["defect"] for lv in levels]
    monotone = all(b < a for a, b in zip(defects, defects[1:]))
    final_ok = defects[-1] <= cfg["defect_bound"]
    report["status"] = "ok"
    report["defects"] = defects
    report["monotone_improvement"] = monotone
    report["final_defect"] = defects[-1]
    report["pass"] = bool(final_ok and (monotone or len(defects) == 1))
    _write_json(os.path.join(cfg["out"], "conjugacy_report.json"), report)
    print(
        f"conjugacy: defects={['%.3e' % d for d in defects]} monotone={monotone} "
        f"final<=bound={final_ok}"
    )
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# -- sweep --------------------------------------------------------------------------

SWEEP_DEFAULTS = {
    "d": 1,
    "n_modes": 8,
    "eps_list": [0.2, 0.14, 0.1, 0.07, 0.05],
    "seeds_per_eps": 1,
    "seed": 100,
    "c1_op": 0.1,
    "t_cap": 1e6,
    "w0_scale": 0.2,
    "rel_tol": 1e-8,
    "n_samples": 200,
    "s_offsets": [0.0, 1.0, 2.0],
    "representation": "original",
    "measure_constants": True,
    "workers": 0,  # 0 -> auto
    "out": "out",
}

SWEEP_SCHEMA = {
    "d": {"kind": "int", "min": 1, "max": 3},
    "n_modes": {"kind": "int", "min": 1},
    "eps_list": {"kind": "list", "min_len": 1, "item": {"kind": "number", "min": 1e-6}},
    "seeds_per_eps": {"kind": "int", "min": 1},
    "seed": {"kind": "int"},
    "c1_op": {"kind": "number", "min": 0.0},
    "t_cap": {"kind": "number", "min": 0.0},
    "w0_scale": {"kind": "number", "min": 0.0},
    "rel_tol": {"kind": "number", "min": 0.0},
    "n_samples": {"kind": "int", "min": 2},
    "s_offsets": {"kind": "list", "min_len": 1, "item": {"kind": "number", "min": 0.0}},
    "representation": {"kind": "str", "choices": ("original", "normal_form")},
    "measure_constants": {"kind": "bool"},
    "workers": {"kind": "int", "min": 0},
    "out": {"kind": "str"},
}


def _sweep_row(params: dict) -> dict:
    """One (eps, seed) row; self-contained for process pools."""
    grid = SpectralGrid(params["d"], params["n_modes"])
    m0 = grid.m0
    eps = params["eps"]
    s_list = [m0 + off for off in params["s_offsets"]]
    w0 = ConjugatePair(
        random_field(grid, params["row_seed"], params["w0_scale"] * eps, m0, "free")
    )
    t_target = params["c1_op"] / eps ** 4
    t_end = min(t_target, params["t_cap"])
    ts = np.linspace(0.0, t_end, params["n_samples"] + 1)
    row = {
        "eps": eps,
        "seed": params["row_seed"],
        "w0_norm_m0": w0.w.norm(m0),
        "t_target": t_target,
        "t_end": t_end,
    }
    icfg = IntegratorConfig(
        scheme="rk45_adaptive",
        rel_tol=params["rel_tol"],
        abs_tol=1e-12,
        t_end=t_end,
        dt=1e-2,
        store_states=True,
    )
    try:
        if params["representation"] == "original":
            state0 = change_of_variables("fwd", w0)
            rec = integrate(KirchhoffDynamics(grid), state0, icfg, t_eval=ts)
            states_w = []
            uv_norms = []
            h_vals = []
            status = None
            for st in rec.states:
                h_vals.append(hamiltonian(st))
                uv_norms.append(st.u.norm(m0 + 0.5) + st.v.norm(m0 - 0.5))
                try:
                    states_w.append(change_of_variables("inv", st))
                except DomainError:
                    status = "transform_ball_exit"
                    break
            norms = {
                s: np.array([st.w.norm(s) for st in states_w]) for s in s_list
            }
            row["ham_drift_rel"] = float(
                np.max(np.abs(np.array(h_vals) - h_vals[0])) / max(1.0, abs(h_vals[0]))
            )
            row["max_uv_norm"] = float(np.max(uv_norms))
            row["uv_ratio"] = float(np.max(uv_norms) / uv_norms[0])
        else:
            dyn = make_dynamics("normal_form", grid)
            rec = integrate(dyn, w0, icfg, t_eval=ts, monitors={})
            states_w = rec.states
            norms = {s: np.array([st.w.norm(s) for st in states_w]) for s in s_list}
            status = None
    except (BlowupError, NumericalError, ConvergenceError) as exc:
        row["status"] = "numerical_error"
        row["error"] = str(exc)
        row["pass_2x"] = False
        return row

    row["achieved_time"] = float(rec.exit_time if status is None else ts[len(states_w) - 1])
    row["exit_reason"] = rec.exit_reason
    row["n_steps"] = rec.n_steps
    for s in s_list:
        series = norms[s]
        ratio = float(np.max(series) / series[0]) if len(series) and series[0] > 0 else 0.0
        row[f"ratio_s{s:g}"] = ratio
        row[f"pass_2x_s{s:g}"] = bool(ratio <= 2.0)
    row["pass_2x"] = all(row[f"pass_2x_s{s:g}"] for s in s_list)
    if status is not None:
        row["status"] = status
        row["pass_2x"] = False
    elif rec.exit_reason == "completed":
        row["status"] = "reached-target" if t_end >= t_target else "stable-at-cap"
    else:
        row["status"] = rec.exit_reason
    return row


def cmd_sweep(cfg: dict) -> int:
    t0 = time.time()
    params_common = {
        k: cfg[k]
        for k in (
            "d",
            "n_modes",
            "c1_op",
            "t_cap",
            "w0_scale",
            "rel_tol",
            "n_samples",
            "s_offsets",
            "representation",
        )
    }
    tasks = []
    for i, eps in enumerate(sorted(cfg["eps_list"], reverse=True)):
        for k in range(cfg["seeds_per_eps"]):
            p = dict(params_common)
            p["eps"] = eps
            p["row_seed"] = cfg["seed"] + 37 * i + k
            tasks.append(p)

    workers = cfg["workers"] or min(len(tasks), os.cpu_count() or 1)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(p) for p in tasks]

    grid = SpectralGrid(cfg["d"], cfg["n_modes"])
    report = _report_header("sweep", cfg)
    report["grid"] = _grid_meta(grid)
    report["rows"] = rows

    finished = [r for r in rows if "achieved_time" in r and r["achieved_time"] > 0]
    if len(finished) >= 2:
        x = np.log([r["eps"] for r in finished])
        y = np.log([r["achieved_time"] for r in finished])
        slope, intercept = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
        report["fit"] = {
            "exponent": float(slope),
            "intercept": float(intercept),
            "residual": resid,
            "censored": all(r["status"] in ("reached-target", "stable-at-cap") for r in finished),
        }

    if cfg["measure_constants"]:
        m0 = grid.m0
        consts = []
        for i, eps in enumerate(sorted(set(cfg["eps_list"]), reverse=True)):
            consts.append(
                measure_quartic_constant(
                    grid, cfg["w0_scale"] * eps, cfg["seed"] + 991 + i, t_end=10.0
                )
            )
        c_star = max(c["c_star_m0"] for c in consts) if consts else float("nan")
        from .transforms import equivalence_ratios

        eq = [
            equivalence_ratios(
                ConjugatePair(
                    random_field(grid, cfg["seed"] + 555 + i, cfg["w0_scale"] * e, m0, "free")
                ),
                m0,
            )
            for i, e in enumerate(sorted(set(cfg["eps_list"]), reverse=True))
        ]
        c0_emp = max(max(r["uv_over_w"], r["w_over_uv"]) for r in eq) if eq else float("nan")
        report["constants"] = {
            "quartic_per_eps": consts,
            "c_star_empirical": c_star,
            "c0_empirical": c0_emp,
            "c1_implied": 15.0 / (32.0 * c_star * c0_emp ** 4)
            if c_star > 0 and c0_emp > 0
            else None,
        }

    report["runtime_s"] = time.time() - t0
    all_pass = all(r.get("pass_2x", False) for r in rows)
    report["pass"] = all_pass

    os.makedirs(cfg["out"], exist_ok=True)
    _write_json(os.path.join(cfg["out"], "sweep_report.json"), report)
    csv_path = os.path.join(cfg["out"], "sweep_rows.csv")
    if rows:
        cols = sorted({k for r in rows for k in r})
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                cells = []
                for c in cols:
                    v = r.get(c, "")
                    cells.append(f"{v:.17g}" if isinstance(v, float) else str(v))
                fh.write(",".join(cells) + "\n")
    for r in rows:
        print(
            f"eps={r['eps']:g} status={r.get('status')} "
            f"achieved={r.get('achieved_time', float('nan')):g} pass_2x={r.get('pass_2x')}"
        )
    print(f"sweep: {'all rows bounded' if all_pass else 'BOUND VIOLATIONS'} "
          f"({report['runtime_s']:.0f}s)")
    return EXIT_PASS if all_pass else EXIT_FAIL


# -- entry point -----------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config document")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kirchhoff-spectral",
        description="Spectral simulator and verification workbench for the "
        "Kirchhoff equation on the d-torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "verify",
        help="run the registered property suites",
        epilog="Available suites: " + ", ".join(REGISTRY),
    )
    _add_common(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--suites", help="comma-separated subset of suites")
    p.add_argument("--corrupt-diff-sign", action="store_true", default=None,
                   help="debug: flip the sign of the difference-coupling table "
                   "(negative control; exact-identity suites must fail)")
    p.add_argument("--divisor-radius", type=int)
    p.add_argument("--workers", type=int, help="suite-level worker pool size")

    p = sub.add_parser(
        "simulate",
        help="integrate one trajectory and summarize",
        epilog="trajectory.csv columns: time, then the monitor channels in "
        "alphabetical order. original: ham_drift_rel, hamiltonian, "
        "momentum_drift_max, uv_norm_s<order> (the physical pair norm per "
        "monitored order); diagonalized/normal_form: w_norm_s<order>, plus "
        "speed_shift and energy_derivative_m0 for normal_form. Floats carry "
        "17 significant digits.",
    )
    _add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--n-modes", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--representation", choices=("original", "diagonalized", "normal_form"))
    p.add_argument("--method", choices=("structured", "direct"))
    p.add_argument("--scheme", choices=("rk4", "rk45_adaptive"))
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--monitor-stride", type=int)
    p.add_argument("--initial-file")

    p = sub.add_parser("conjugacy", help="compare the two flows through the change of variables")
    _add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--n-modes", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--n-samples", type=int)
    p.add_argument("--base-rel-tol", type=float)
    p.add_argument("--levels", type=int)

    p = sub.add_parser(
        "sweep",
        help="lifespan surrogate over a list of amplitudes",
        epilog="sweep_rows.csv columns (alphabetical): achieved_time, eps, "
        "exit_reason, ham_drift_rel, max_uv_norm, n_steps, pass_2x, "
        "pass_2x_s<order> and ratio_s<order> per monitored order, seed, "
        "status, t_end, t_target, uv_ratio, w0_norm_m0. Rows are sorted by "
        "eps descending; floats carry 17 significant digits.",
    )
    _add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--n-modes", type=int)
    p.add_argument("--eps-list", help="comma-separated amplitudes")
    p.add_argument("--seeds-per-eps", type=int)
    p.add_argument("--c1-op", type=float)
    p.add_argument("--t-cap", type=float)
    p.add_argument("--w0-scale", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--n-samples", type=int)
    p.add_argument("--representation", choices=("original", "normal_form"))
    p.add_argument("--workers", type=int)
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    skip = {"command", "config"}
    out = {}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        if key == "suites" and isinstance(value, str):
            value = [s.strip() for s in value.split(",") if s.strip()]
        if key == "eps_list" and isinstance(value, str):
            try:
                value = [float(s) for s in value.split(",")]
            except ValueError as exc:
                raise ConfigError(f"eps_list: expected comma-separated numbers ({exc})")
        out[key] = value
    return out


COMMANDS = {
    "verify": (cmd_verify, VERIFY_DEFAULTS, VERIFY_SCHEMA),
    "simulate": (cmd_simulate, SIMULATE_DEFAULTS, SIMULATE_SCHEMA),
    "conjugacy": (cmd_conjugacy, CONJUGACY_DEFAULTS, CONJUGACY_SCHEMA),
    "sweep": (cmd_sweep, SWEEP_DEFAULTS, SWEEP_SCHEMA),
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    fn, defaults, schema = COMMANDS[args.command]
    try:
        cfg = merge_config(defaults, schema, args.config, _overrides_from_args(args))
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return fn(cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowupError, NumericalError, ConvergenceError, DomainError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
