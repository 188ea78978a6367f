"""Command line driver: JSON config -> scheme runs -> CSV / JSON results.

    irs-isac run --config exp.json [--seed 3] [--out results] [--preset sinr-sweep] [--fast]

Exit codes: 0 all runs passed their audit, 1 some audit failed, 2 bad config,
3 some run aborted in a solver (infeasible subproblem or numerical failure).
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import altopt, relax
from .channel import (DEFAULT_EXPONENTS, INIT_STRATEGIES, LINKS, AlgoConfig, ScenarioConfig, build_channels,
                      db2lin, dbm2watt, default_target_angles, effective_target_channel)
from .matrix import InvalidInputError

log = logging.getLogger(__name__)

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
SWEEP_VARS = ("gamma_dB", "Q", "P0", "N")
FAST_N, FAST_TRIALS = 16, 200
BEAM_GRID_DEG = np.arange(-89, 90, 1.0)

# schemes that fix the user type regardless of algo.cu_type
SCHEME_CU_TYPE = {"algorithm1": "I", "algorithm2": "II"}

DESK = {"system": {"M": 4, "N": 12, "K": 2, "L": 3, "Q": 1}}
PRESETS = {
    "convergence": {**DESK, "scenario": "convergence", "schemes": ["algorithm1", "algorithm2"], "seeds": [0, 1, 2]},
    "beampattern": {**DESK, "scenario": "beampattern",
                    "schemes": ["algorithm1", "algorithm2", "separate_design", "random_phase", "no_irs"],
                    "seeds": [0]},
    "sinr-sweep": {**DESK, "scenario": "sinr-sweep", "sweep": {"var": "gamma_dB", "values": [0, 5, 10, 15]},
                   "schemes": list(altopt.SCHEMES), "seeds": [0, 1]},
    "clutter-sweep": {**DESK, "scenario": "clutter-sweep", "sweep": {"var": "Q", "values": [1, 2, 3]},
                      "schemes": list(altopt.SCHEMES), "seeds": [0, 1]},
    "power-sweep": {**DESK, "scenario": "power-sweep", "sweep": {"var": "P0", "values": [0.1, 0.3, 0.5, 1.0]},
                    "schemes": list(altopt.SCHEMES), "seeds": [0, 1]},
    "n-sweep": {**DESK, "scenario": "n-sweep", "sweep": {"var": "N", "values": [8, 12, 16]},
                "schemes": ["algorithm1", "separate_design", "random_phase"], "seeds": [0, 1]},
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    scenario: str
    config: ScenarioConfig
    schemes: tuple
    seeds: tuple
    sweep_var: str | None = None
    sweep_values: tuple = ()
    out_dir: Path = Path("results")
    raw: dict = field(default_factory=dict)

    def cells(self):
        """(sweep value or None, config) pairs in sweep order."""
        if self.sweep_var is None:
            return [(None, self.config)]
        return [(v, apply_sweep(self.config, self.sweep_var, v)) for v in self.sweep_values]


# --------------------------------------------------------------------------- #
# parsing


def _section(doc: dict, name: str, allowed: set) -> dict:
    sec = doc.get(name, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: must be an object")
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"{name}: unknown field(s) {sorted(extra)}")
    return sec


def _num(sec, key, where, default, kind=float, positive=False, minimum=None):
    if key not in sec:
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: must be a number")
    if kind is int and float(v) != int(v):
        raise ConfigError(f"{where}.{key}: must be an integer")
    v = kind(v)
    if not np.isfinite(v):
        raise ConfigError(f"{where}.{key}: must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be > 0")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}")
    return v


def _num_list(v, where, length=None):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return [float(v)]
    if not isinstance(v, list) or not v or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{where}: must be a number or a non-empty list of numbers")
    if length is not None and len(v) not in (1, length):
        raise ConfigError(f"{where}: expected 1 or {length} entries, got {len(v)}")
    return [float(x) for x in v]


def _pair(v, where):
    if not isinstance(v, list) or len(v) != 2 or not all(isinstance(x, (int, float)) for x in v):
        raise ConfigError(f"{where}: must be a list of two numbers")
    return (float(v[0]), float(v[1]))


def _xi(v):
    if v is None or v == "inf" or v == "Infinity":
        return np.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("power.xi: must be a number, null or \"inf\"")
    return float(v)


def spec_from_dict(doc: dict, out_dir=None) -> ExperimentSpec:
    """Validate a config document and fill defaults (M=8, N=64, K=4, L=5, Q=2, ...)."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    top = {"scenario", "system", "power", "sinr", "targets", "geometry", "channel", "algo", "sweep",
           "schemes", "seeds"}
    extra = set(doc) - top
    if extra:
        raise ConfigError(f"config: unknown field(s) {sorted(extra)}")

    sysd = _section(doc, "system", {"M", "N", "K", "L", "Q"})
    M = _num(sysd, "M", "system", 8, int, minimum=2)
    N = _num(sysd, "N", "system", 64, int, minimum=1)
    K = _num(sysd, "K", "system", 4, int, minimum=1)
    L = _num(sysd, "L", "system", 5, int, minimum=1)
    Q = _num(sysd, "Q", "system", 2, int, minimum=0)

    pw = _section(doc, "power", {"P0_W", "sigma2_dBm", "eta_uW", "xi"})
    P0 = _num(pw, "P0_W", "power", 0.5, positive=True)
    sigma2 = dbm2watt(_num_list(pw.get("sigma2_dBm", -80.0), "power.sigma2_dBm", K))
    eta = 1e-6 * np.asarray(_num_list(pw.get("eta_uW", 0.1), "power.eta_uW", max(Q, 1)))
    if np.any(eta <= 0):
        raise ConfigError("power.eta_uW: must be > 0")
    xi = _xi(pw.get("xi"))

    sd = _section(doc, "sinr", {"gamma_dB"})
    gamma = db2lin(_num_list(sd.get("gamma_dB", 10.0), "sinr.gamma_dB", K))

    td = _section(doc, "targets", {"angles_deg"})
    if "angles_deg" in td:
        angles = _num_list(td["angles_deg"], "targets.angles_deg")
        if len(angles) != L:
            raise ConfigError(f"targets.angles_deg: expected L={L} angles, got {len(angles)}")
        if not all(-90 < a < 90 for a in angles):
            raise ConfigError("targets.angles_deg: angles must lie strictly inside (-90, 90)")
        angles = tuple(np.deg2rad(angles))
    else:
        angles = default_target_angles(L)

    geo = _section(doc, "geometry", {"bs_xy", "irs_xy", "cu_distance_m", "clutter_distance_range_m"})
    ch = _section(doc, "channel", {"rician_factor", "exponents", "K0_dB", "d_irs_over_lambda"})
    exps = dict(DEFAULT_EXPONENTS)
    if "exponents" in ch:
        if not isinstance(ch["exponents"], dict) or set(ch["exponents"]) - set(LINKS):
            raise ConfigError(f"channel.exponents: must be an object with keys from {list(LINKS)}")
        for k, v in ch["exponents"].items():
            exps[k] = _num(ch["exponents"], k, "channel.exponents", None, positive=True)

    al = _section(doc, "algo", {"cu_type", "max_iters", "eps", "rand_trials", "rank_tol", "sdp_tol", "init",
                                "lookahead", "relative_stop"})
    cu_type = al.get("cu_type", "I")
    if cu_type not in ("I", "II"):
        raise ConfigError("algo.cu_type: must be \"I\" or \"II\"")
    init = al.get("init", AlgoConfig.init)
    if init not in INIT_STRATEGIES:
        raise ConfigError(f"algo.init: must be one of {list(INIT_STRATEGIES)}")
    rel = al.get("relative_stop", False)
    if not isinstance(rel, bool):
        raise ConfigError("algo.relative_stop: must be true or false")
    eps = al.get("eps", AlgoConfig.eps)
    eps = np.inf if eps in ("inf", None) else _num(al, "eps", "algo", AlgoConfig.eps, positive=True)

    try:
        algo = AlgoConfig(
            max_iters=_num(al, "max_iters", "algo", AlgoConfig.max_iters, int, minimum=1),
            eps=eps,
            relative_stop=rel,
            rand_trials=_num(al, "rand_trials", "algo", AlgoConfig.rand_trials, int, minimum=1),
            rank_tol=_num(al, "rank_tol", "algo", AlgoConfig.rank_tol, positive=True),
            sdp_tol=_num(al, "sdp_tol", "algo", AlgoConfig.sdp_tol, positive=True),
            init=init,
            lookahead=_num(al, "lookahead", "algo", AlgoConfig.lookahead, int, minimum=0),
        )
        config = ScenarioConfig(
            M=M, N=N, K=K, L=L, Q=Q, P0=P0,
            sigma2=tuple(sigma2) if len(sigma2) > 1 else float(sigma2[0]),
            gamma=tuple(gamma) if len(gamma) > 1 else float(gamma[0]),
            eta=tuple(eta) if len(eta) > 1 else float(eta[0]),
            xi=xi, target_angles=angles,
            d_irs_over_lambda=_num(ch, "d_irs_over_lambda", "channel", 0.5, positive=True),
            rician_factor=_num(ch, "rician_factor", "channel", 0.5, minimum=0.0),
            pathloss_exponents=exps,
            K0_dB=_num(ch, "K0_dB", "channel", -30.0),
            bs_xy=_pair(geo["bs_xy"], "geometry.bs_xy") if "bs_xy" in geo else (0.0, 0.0),
            irs_xy=_pair(geo["irs_xy"], "geometry.irs_xy") if "irs_xy" in geo else (20.0, 2.0),
            cu_distance=_num(geo, "cu_distance_m", "geometry", 10.0, positive=True),
            clutter_distance_range=(_pair(geo["clutter_distance_range_m"], "geometry.clutter_distance_range_m")
                                    if "clutter_distance_range_m" in geo else (12.0, 15.0)),
            cu_type=cu_type,
            algo=algo,
        )
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None

    sw = _section(doc, "sweep", {"var", "values"})
    sweep_var, sweep_values = None, ()
    if sw:
        sweep_var = sw.get("var")
        if sweep_var not in SWEEP_VARS:
            raise ConfigError(f"sweep.var: must be one of {list(SWEEP_VARS)}")
        vals = _num_list(sw.get("values"), "sweep.values")
        if np.any(np.diff(vals) <= 0):
            raise ConfigError("sweep.values: must be strictly increasing")
        if sweep_var in ("Q", "N") and any(v != int(v) for v in vals):
            raise ConfigError(f"sweep.values: {sweep_var} values must be integers")
        sweep_values = tuple(vals)
        for v in sweep_values:  # validate every cell up front
            try:
                apply_sweep(config, sweep_var, v)
            except InvalidInputError as exc:
                raise ConfigError(f"sweep.values: {sweep_var}={v:g} is invalid ({exc})") from None

    schemes = doc.get("schemes", ["algorithm1"])
    if not isinstance(schemes, list) or not schemes or any(s not in altopt.SCHEMES for s in schemes):
        raise ConfigError(f"schemes: must be a non-empty list drawn from {list(altopt.SCHEMES)}")
    seeds = doc.get("seeds", [0])
    if (not isinstance(seeds, list) or not seeds
            or any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in seeds)):
        raise ConfigError("seeds: must be a non-empty list of non-negative integers")
    scenario = doc.get("scenario", "custom")
    if not isinstance(scenario, str):
        raise ConfigError("scenario: must be a string")
    return ExperimentSpec(scenario, config, tuple(schemes), tuple(seeds), sweep_var, sweep_values,
                          Path(out_dir) if out_dir else Path("results"), raw=copy.deepcopy(doc))


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_config(path, preset: str | None = None, out_dir=None) -> ExperimentSpec:
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config: file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be a JSON object")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}")
        doc = _merge(PRESETS[preset], doc)
    return spec_from_dict(doc, out_dir)


def apply_sweep(config: ScenarioConfig, var: str, value: float) -> ScenarioConfig:
    if var == "gamma_dB":
        return config.with_(gamma=float(db2lin(value)))
    if var == "Q":
        return config.with_(Q=int(value))
    if var == "P0":
        return config.with_(P0=float(value))
    if var == "N":
        return config.with_(N=int(value))
    raise InvalidInputError(f"unknown sweep variable {var!r}")


def make_fast(spec: ExperimentSpec) -> ExperimentSpec:
    """Cap N and the randomisation trial count for quick runs."""
    algo = AlgoConfig(**{**spec.config.algo.__dict__, "rand_trials": min(spec.config.algo.rand_trials, FAST_TRIALS)})
    config = spec.config.with_(N=min(spec.config.N, FAST_N), algo=algo)
    values = spec.sweep_values
    if spec.sweep_var == "N":
        values = tuple(v for v in values if v <= FAST_N) or (float(FAST_N),)
    return ExperimentSpec(spec.scenario, config, spec.schemes, spec.seeds, spec.sweep_var, values, spec.out_dir,
                          spec.raw)


# --------------------------------------------------------------------------- #
# running


def beampattern_grid(channels, phi, R, ratio: float, grid_deg=BEAM_GRID_DEG) -> np.ndarray:
    gains = []
    for deg in grid_deg:
        h = effective_target_channel(channels.G, phi, np.deg2rad(deg), ratio)
        gains.append(float(np.real(h.conj() @ R @ h)))
    return np.array(gains)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def run_cell(scheme: str, config: ScenarioConfig, seed: int) -> altopt.RunRecord:
    cfg = config.with_(seed=seed, cu_type=SCHEME_CU_TYPE.get(scheme, config.cu_type))
    channels = build_channels(cfg, np.random.default_rng(seed))
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    try:
        rec = altopt.run_scheme(scheme, channels, cfg, rng)
    except (relax.DegenerateSolutionError, relax.NumericalFailureError) as exc:
        rec = altopt.RunRecord(scheme, cfg.cu_type, [], None, None, 0, 0.0, status="solver_failure",
                               meta={"error": str(exc)})
    rec.meta["channels"] = channels.without_irs() if scheme == "no_irs" else channels
    return rec


def run(spec: ExperimentSpec) -> int:
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    conv_rows, beam_rows, sweep_rows, runs = [], [], [], []
    for value, config in spec.cells():
        for scheme in spec.schemes:
            for seed in spec.seeds:
                rec = run_cell(scheme, config, seed)
                log.info("%s seed=%d sweep=%s -> %s objective=%.6g", scheme, seed, value, rec.status, rec.objective)
                sv = "" if value is None else _fmt(value)
                sweep_rows.append([scheme, sv, seed, _fmt(rec.objective), rec.iterations, int(rec.ok)])
                if value is None:
                    conv_rows += [[scheme, seed, i, _fmt(v)] for i, v in enumerate(rec.trace)]
                    if rec.beamforming is not None:
                        g = beampattern_grid(rec.meta["channels"], rec.phi, rec.beamforming.total,
                                             config.d_irs_over_lambda)
                        beam_rows += [[scheme, seed, _fmt(a), _fmt(x)] for a, x in zip(BEAM_GRID_DEG, g)]
                runs.append({
                    "scheme": scheme, "seed": seed, "sweep_value": value, "cu_type": rec.cu_type,
                    "status": rec.status, "objective_W": rec.objective, "iterations": rec.iterations,
                    "trace_W": list(rec.trace), "wall_time_s": rec.wall_time,
                    "audit": {k: v for k, v in rec.audit.items() if k != "passed"},
                    "meta": {k: v for k, v in rec.meta.items() if k != "channels"},
                })

    def write(name, header, rows):
        with open(out / name, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    write("sweep.csv", ["scheme", "sweep_value", "seed", "min_gain_W", "iterations", "feasible"], sweep_rows)
    if spec.sweep_var is None:
        write("convergence.csv", ["scheme", "seed", "iter", "objective_W"], conv_rows)
        write("beampattern.csv", ["scheme", "seed", "angle_deg", "gain_W"], beam_rows)

    statuses = [r["status"] for r in runs]
    code = EXIT_OK
    if any(s == "audit_failure" for s in statuses):
        code = EXIT_AUDIT
    if any(s in ("infeasible", "solver_failure") for s in statuses):
        code = EXIT_SOLVER
    audit_max = {}
    for r in runs:
        for k, v in r["audit"].items():
            audit_max[k] = max(audit_max.get(k, -np.inf), v)
    summary = {
        "scenario": spec.scenario,
        "sweep": {"var": spec.sweep_var, "values": list(spec.sweep_values)},
        "schemes": list(spec.schemes),
        "seeds": list(spec.seeds),
        "config": spec.raw,
        "exit_code": code,
        "audit_max": audit_max,
        "runs": runs,
    }
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n")
    return code


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irs-isac", description="IRS-assisted ISAC beampattern design experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the schemes of a config and write CSV/JSON results")
    r.add_argument("--config", help="JSON experiment config (optional when --preset is given)")
    r.add_argument("--seed", type=int, help="run this single seed instead of the config's seed list")
    r.add_argument("--out", default="results", help="output directory (default: results)")
    r.add_argument("--preset", choices=sorted(PRESETS), help="desk-scale scenario used as the base config")
    r.add_argument("--fast", action="store_true", help=f"cap N at {FAST_N} and trials at {FAST_TRIALS}")
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.config is None and args.preset is None:
        print("error: give --config, --preset or both", file=sys.stderr)
        return EXIT_CONFIG
    try:
        spec = parse_config(args.config, args.preset, args.out)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be >= 0")
            spec.seeds = (args.seed,)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.fast:
        spec = make_fast(spec)
    code = run(spec)
    print(f"wrote results to {spec.out_dir} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
