"""Command-line front end.

Exit codes: 0 ok, 1 validation failure, 2 config error, 3 physics contract
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .conditional import conditional_numeric, conditional_shift
from .errors import NVPhaseError
from .frames import speed_tiers, gate_speed
from .model import (RotatingField, SpinConstants, StaticFields, dE_from_field, field_from_dE,
                    field_from_gammaB, gammaB_from_field, to_angular, validate_regime)
from .noise import (NoiseModel, epsilon_dec, epsilon_sys, epsilon_sys_exact, mc_gate_error,
                    static_coherence, t2star_static)
from .propagate import PropagationConfig, run_gate
from .validation import FAIL, run_suite, summarize

log = logging.getLogger(__name__)

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_PHYSICS, EXIT_IO = 0, 1, 2, 3, 4


class ConfigError(Exception):
    pass


# Config keys -> (target, field, converter). Units are part of the key name.
CONFIG_KEYS = {
    "D_MHz": ("constants", "D", float),
    "A_par_N_MHz": ("constants", "A_par_N", float),
    "A_perp_N_MHz": ("constants", "A_perp_N", float),
    "A_par_C_MHz": ("constants", "A_par_C", float),
    "d_perp_Hz_cm_per_V": ("constants", "d_perp", float),
    "gamma_e_MHz_per_mT": ("constants", "gamma_e", float),
    "gammaB0_MHz": ("static", "gammaB0", float),
    "dE0_MHz": ("static", "dE0", float),
    "deltaB_MHz": ("static", "deltaB", float),
    "shiftB": ("static", "shiftB", float),
    "shiftE": ("static", "shiftE", float),
    "omega1_MHz": ("rotating", "omega1", float),
    "omega_MHz": ("rotating", "omega", float),
    "omega_prime_MHz": ("rotating", "omega_prime", float),
    "phi0_rad": ("rotating", "phi0", float),
    "duration_us": ("rotating", "duration", float),
    "tau_c_us": ("noise", "tau_c", float),
    "trajectories": ("noise", "trajectories", int),
    "seed": ("noise", "seed", int),
    "step_us": ("propagation", "step", float),
    "method": ("propagation", "method", str),
    "tolerance": ("propagation", "tolerance", float),
    "include_c13": ("run", "include_c13", None),
}


@dataclass(frozen=True)
class RunConfig:
    constants: SpinConstants = SpinConstants()
    static: StaticFields = StaticFields()
    rotating: RotatingField = RotatingField()
    noise: NoiseModel = NoiseModel()
    propagation: PropagationConfig = PropagationConfig()
    include_c13: bool = False


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines (``#`` comments) into a :class:`RunConfig`."""
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    groups: dict[str, dict] = {k: {} for k in ("constants", "static", "rotating", "noise",
                                               "propagation", "run")}
    for key, raw in parser["run"].items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        target, name, conv = CONFIG_KEYS[key]
        try:
            value = parser["run"].getboolean(key) if conv is None else conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        groups[target][name] = value
    s = StaticFields(**groups["static"])
    nm = NoiseModel(**{"deltaB": s.deltaB, **groups["noise"]})
    return RunConfig(constants=SpinConstants(**groups["constants"]), static=s,
                     rotating=RotatingField(**groups["rotating"]), noise=nm,
                     propagation=PropagationConfig(**groups["propagation"]),
                     include_c13=bool(groups["run"].get("include_c13", False)))


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# Reports.

def simulate_report(cfg: RunConfig, numeric_c13: bool = False) -> tuple[dict, np.ndarray]:
    """Regime diagnostics, the three gate-speed tiers and error budgets."""
    c, s, r = cfg.constants, cfg.static, cfg.rotating
    regime = validate_regime(c, s, r)
    speed = gate_speed(c, s, r.omega_prime)
    res = run_gate(c, s, r, cfg.propagation)
    report = {
        "regime": [{"name": d.name, "value": d.value, "threshold": d.threshold,
                    "status": d.status, "message": d.message} for d in regime],
        "gate_speed_rad_per_us": {
            "closed_form": speed.exact,
            "large_field": speed.approx,
            "numeric": res.raw_rate,
        },
        "pi_gate_time_us": {
            "closed_form": math.pi / abs(speed.geometric_exact),
            "large_field": speed.pi_gate_time,
            "numeric": res.pi_time,
        },
        "phase_result": {
            "omega_up_rad": res.omega_up,
            "omega_down_rad": res.omega_down,
            "raw_rate_rad_per_us": res.raw_rate,
            "delta_omega_rate_rad_per_us": res.delta_omega_rate,
            "cyclicity_up": res.cyclicity[0],
            "cyclicity_down": res.cyclicity[1],
            "duration_us": res.duration,
            "cycles": res.cycles,
        },
        "errors": {},
    }
    if s.gammaB0 > 0:
        report["errors"]["t2star_static_us"] = t2star_static(c, s)
        report["errors"]["epsilon_dec"] = epsilon_dec(s)
        if s.dE0 > 0:
            report["errors"]["epsilon_sys"] = epsilon_sys(s)
            report["errors"]["epsilon_sys_exact"] = epsilon_sys_exact(c, s, r.omega_prime)
    if cfg.include_c13:
        cond = conditional_shift(c, s, r.omega_prime)
        report["conditional"] = {"relative_rad_per_us": cond.relative,
                                 "gate_time_us": cond.gate_time,
                                 "truncation_error": cond.truncation_error}
        if numeric_c13:
            num = conditional_numeric(c, s, r, cfg.propagation)
            report["conditional"]["numeric_relative_rad_per_us"] = num.relative
    return report, res.history


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(_flatten(v, key + "."))
        elif isinstance(v, list):
            for item in v:
                out.extend(_flatten({kk: vv for kk, vv in item.items() if kk != "name"},
                                    f"{key}.{item['name']}."))
        else:
            out.append((key, v))
    return out


def format_text(report: dict) -> str:
    return "\n".join(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}"
                     for k, v in _flatten(report))


def write_csv(path: str | None, header: list[str], rows, stream=None):
    """CSV with ``\\n`` line endings and ``repr`` floats (locale independent)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if path is None or path == "-":
        (stream or sys.stdout).write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# Figures and sweeps.

FIG_GRID_B = (10.0, 108.0)
FIG_GRID_E = (0.2, 10.0)


def _numeric_gate_time(args):
    c, s, r, cfg = args
    return run_gate(c, s, r, cfg).pi_time


def _mc_static_t2(args):
    c, s, nm = args
    return static_coherence(c, s, nm).fitted_t2star


def _parallel(func, jobs, workers):
    if workers == 1 or len(jobs) < 2:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, jobs))


def figure_rows(n: str, cfg: RunConfig, grid: int = 50, numeric: bool = False,
                workers: int | None = None) -> tuple[list[str], list[list]]:
    """Header and rows for one figure; rows are in grid order."""
    c, s, r, nm = cfg.constants, cfg.static, cfg.rotating, cfg.noise
    a = to_angular(c.A_par_N)
    rows: list[list] = []
    if n in ("2", "4"):
        bs = np.linspace(*FIG_GRID_B, grid)
        es = np.linspace(*FIG_GRID_E, grid)
        cells = [(b, e) for b in bs for e in es]
        if n == "2":
            header = ["gammaB0_MHz", "dE0_MHz", "method", "gate_time_us"]
            approx = speed_tiers(c, bs[:, None], es[None, :], r.omega_prime)[1] - a
            rows = [[b, e, "closed_form", math.pi / abs(float(approx[i, j]))]
                    for i, b in enumerate(bs) for j, e in enumerate(es)]
            if numeric:
                jobs = [(c, replace(s, gammaB0=b, dE0=e), r, cfg.propagation) for b, e in cells]
                vals = _parallel(_numeric_gate_time, jobs, workers)
                rows += [[b, e, "numeric", v] for (b, e), v in zip(cells, vals)]
        else:
            header = ["gammaB0_MHz", "dE0_MHz", "method", "t2star_ms"]
            rows = [[b, e, "closed_form", t2star_static(c, replace(s, gammaB0=b, dE0=e)) / 1e3]
                    for b, e in cells]
            if numeric:
                jobs = [(c, replace(s, gammaB0=b, dE0=e), nm) for b, e in cells]
                vals = _parallel(_mc_static_t2, jobs, workers)
                rows += [[b, e, "numeric", v / 1e3] for (b, e), v in zip(cells, vals)]
    elif n == "3a":
        header = ["gammaB0_MHz", "method", "epsilon_dec"]
        bs = np.linspace(*FIG_GRID_B, grid)
        rows = [[b, "closed_form", epsilon_dec(replace(s, gammaB0=b))] for b in bs]
        if numeric:
            rows += [[b, "numeric", mc_gate_error(c, replace(s, gammaB0=b), r, nm).error]
                     for b in bs]
    elif n == "3b":
        header = ["gammaDeltaB_MHz", "dDeltaE_MHz", "method", "epsilon_sys"]
        # Relative shifts on a 0.002 lattice so the zero-shift cell is exact.
        ticks = (np.arange(grid) - (grid // 2 - 1)) * 0.002
        cells = [(x, y) for x in ticks for y in ticks]
        methods = [("closed_form", lambda f: epsilon_sys(f))]
        if numeric:
            methods.append(("numeric", lambda f: epsilon_sys_exact(c, f, r.omega_prime)))
        for label, func in methods:
            rows += [[x * s.gammaB0, y * s.dE0, label, func(replace(s, shiftB=x, shiftE=y))]
                     for x, y in cells]
    else:
        raise ValueError(f"unknown figure {n!r}")
    return header, rows


SWEEP_VARIABLES = {
    "gammaB0": "static", "dE0": "static", "deltaB": "static", "shiftB": "static",
    "shiftE": "static", "omega_prime": "rotating",
}
QUANTITIES = ("gate_time", "epsilon_dec", "epsilon_sys", "t2star_static", "conditional_time")


@dataclass(frozen=True)
class SweepSpec:
    """Swept variables with (min, max, steps) ranges and the quantity to evaluate."""

    variables: tuple[str, ...]
    ranges: tuple[tuple[float, float, int], ...]
    quantity: str
    output: str | None = None

    def __post_init__(self):
        if len(self.variables) != len(self.ranges) or not self.variables:
            raise ConfigError("each swept variable needs one range")
        for v, (lo, hi, n) in zip(self.variables, self.ranges):
            if v not in SWEEP_VARIABLES:
                raise ConfigError(f"cannot sweep {v!r}; choose from {sorted(SWEEP_VARIABLES)}")
            if n < 2:
                raise ConfigError(f"{v}: need at least 2 steps")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigError(f"{v}: range must be finite")
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"unknown quantity {self.quantity!r}; choose from {QUANTITIES}")

    def cells(self):
        axes = [np.linspace(lo, hi, n) for lo, hi, n in self.ranges]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _sweep_cell(args):
    cfg, names, values, quantity, numeric = args
    c, s, r = cfg.constants, cfg.static, cfg.rotating
    upd: dict[str, dict] = {"static": {}, "rotating": {}}
    for name, v in zip(names, values):
        upd[SWEEP_VARIABLES[name]][name] = float(v)
    s = replace(s, **upd["static"])
    if "omega_prime" in upd["rotating"]:
        wp = upd["rotating"]["omega_prime"]
        r = replace(r, omega_prime=wp, omega1=wp / 2.0, duration=None)
    if quantity == "gate_time":
        if numeric:
            return run_gate(c, s, r, cfg.propagation).pi_time
        return gate_speed(c, s, r.omega_prime).pi_gate_time
    if quantity == "epsilon_dec":
        if numeric:
            return mc_gate_error(c, s, r, replace(cfg.noise, deltaB=s.deltaB)).error
        return epsilon_dec(s)
    if quantity == "epsilon_sys":
        return epsilon_sys_exact(c, s, r.omega_prime) if numeric else epsilon_sys(s)
    if quantity == "t2star_static":
        if numeric:
            return static_coherence(c, s, replace(cfg.noise, deltaB=s.deltaB)).fitted_t2star
        return t2star_static(c, s)
    if numeric:
        return conditional_numeric(c, s, r, cfg.propagation).gate_time
    return conditional_shift(c, s, r.omega_prime).gate_time


def sweep_rows(spec: SweepSpec, cfg: RunConfig, numeric: bool = False,
               workers: int | None = None) -> tuple[list[str], list[list]]:
    cells = spec.cells()
    methods = ["closed_form"] + (["numeric"] if numeric else [])
    rows = []
    for method in methods:
        jobs = [(cfg, spec.variables, tuple(cell), spec.quantity, method == "numeric")
                for cell in cells]
        vals = _parallel(_sweep_cell, jobs, workers if method == "numeric" else 1)
        rows += [[*cell, method, v] for cell, v in zip(cells, vals)]
    unit = {"gate_time": "_us", "t2star_static": "_us", "conditional_time": "_us"}
    header = [*spec.variables, "method", spec.quantity + unit.get(spec.quantity, "")]
    return header, rows


def parse_var(text: str) -> tuple[str, tuple[float, float, int]]:
    """``name=min:max:steps``."""
    try:
        name, rng = text.split("=", 1)
        lo, hi, n = rng.split(":")
        return name.strip(), (float(lo), float(hi), int(n))
    except ValueError as exc:
        raise ConfigError(f"bad --var {text!r}; expected name=min:max:steps") from exc


# Commands.

def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    nm = cfg.noise
    if getattr(args, "seed", None) is not None:
        nm = replace(nm, seed=args.seed)
    if getattr(args, "trajectories", None) is not None:
        nm = replace(nm, trajectories=args.trajectories)
    return replace(cfg, noise=nm)


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    report, history = simulate_report(cfg, numeric_c13=args.numeric)
    print(json.dumps(report, indent=2) if args.json else format_text(report))
    if args.out:
        write_csv(args.out, ["t_us", "omega_up_rad", "omega_down_rad"], history.tolist())
    return EXIT_OK


def cmd_figure(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    header, rows = figure_rows(args.n, cfg, args.grid, args.numeric, args.jobs)
    write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    parsed = [parse_var(v) for v in args.var]
    spec = SweepSpec(tuple(p[0] for p in parsed), tuple(p[1] for p in parsed), args.quantity,
                     args.out)
    header, rows = sweep_rows(spec, cfg, args.numeric, args.jobs)
    write_csv(spec.output, header, rows)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    results = run_suite(args.level, cfg.constants, cfg.static, cfg.rotating, cfg.noise,
                        seed=cfg.noise.seed)
    if args.json:
        print(json.dumps([asdict(r) for r in results], indent=2))
    else:
        print(summarize(results))
    if args.out:
        write_csv(args.out, [f.name for f in fields(results[0])],
                  [[getattr(r, f.name) for f in fields(r)] for r in results])
    return EXIT_VALIDATION if any(r.status == FAIL for r in results) else EXIT_OK


def cmd_convert_units(args) -> int:
    cfg = load_config(args.config)
    c = cfg.constants
    out = {}
    if args.B_mT is not None:
        out["gammaB_MHz"] = gammaB_from_field(args.B_mT, c)
    if args.E_V_cm is not None:
        out["dE_MHz"] = dE_from_field(args.E_V_cm, c)
    if args.gammaB_MHz is not None:
        out["B_mT"] = field_from_gammaB(args.gammaB_MHz, c)
    if args.dE_MHz is not None:
        out["E_V_cm"] = field_from_dE(args.dE_MHz, c)
    if not out:
        raise ConfigError("give at least one of --B-mT, --E-V-cm, --gammaB-MHz, --dE-MHz")
    print(json.dumps(out) if args.json else "\n".join(f"{k} = {v!r}" for k, v in out.items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nvphase", description="NV nuclear-spin phase-gate simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="output path"):
        sp.add_argument("--config", help="key = value parameter file")
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trajectories", type=int)

    sp = sub.add_parser("simulate", help="single gate run with all tiers")
    common(sp, "CSV of the per-cycle phase trajectory")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--numeric", action="store_true", help="also propagate the 13C register")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("figure", help="CSV grid for one figure")
    sp.add_argument("n", choices=["2", "3a", "3b", "4"])
    common(sp, "CSV path (stdout if omitted)")
    sp.add_argument("--numeric", action="store_true", help="overlay brute-force values")
    sp.add_argument("--grid", type=int, default=50)
    sp.add_argument("--jobs", type=int, default=None, help="worker processes for numeric cells")
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("sweep", help="CSV sweep of one quantity")
    common(sp, "CSV path (stdout if omitted)")
    sp.add_argument("--quantity", required=True, choices=QUANTITIES)
    sp.add_argument("--var", action="append", required=True, help="name=min:max:steps")
    sp.add_argument("--numeric", action="store_true")
    sp.add_argument("--jobs", type=int, default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="cross-tier validation suite")
    common(sp, "CSV of check results")
    sp.add_argument("--level", choices=["quick", "full"], default="quick")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("convert-units", help="field <-> compound frequency")
    sp.add_argument("--config")
    sp.add_argument("--B-mT", type=float)
    sp.add_argument("--E-V-cm", type=float)
    sp.add_argument("--gammaB-MHz", type=float)
    sp.add_argument("--dE-MHz", type=float)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_convert_units)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NVPhaseError, ValueError) as exc:
        print(f"physics contract error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
