"""Batch front-end: parameter sweeps, optimizer runs, throughput tables and
the self-validation gate, all emitting RFC-4180 CSV.

Scenario files are plain ``key = value`` text; command-line ``--set``
overrides win over file values.  All powers are linear inside the library;
dB values (``*_db`` keys or ``sweep_scale = db``) are converted exactly once,
here at the boundary, via ``10 ** (db / 10)``.
"""

from __future__ import annotations

import argparse
import csv
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

from . import acceptance, ergodic, montecarlo, optimize, outage
from .model import LinkStat, RateTarget, SignalParams, SystemParams
from .montecarlo import McConfig
from .optimize import SearchConfig

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """Invalid scenario file or override."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


# Baseline scenario: 20 dB relayed hops, 10 dB self-interference, 3 dB
# direct link, unit powers, strongly improper relay signal, rate 1.
_DEFAULTS: Dict[str, str] = {
    "m_sr": "1",
    "m_rd": "1",
    "m_rr": "1",
    "m_sd": "1",
    "pi_sr_db": "20",
    "pi_rd_db": "20",
    "pi_rr_db": "10",
    "pi_sd_db": "3",
    "p_s": "1",
    "p_max": "1",
    "p_r": "1",
    "c_x": "0.9",
    "r": "1",
    "sweep_var": "c_x",
    "sweep_start": "0",
    "sweep_stop": "1",
    "sweep_points": "21",
    "sweep_scale": "linear",
    "metrics": "outage",
    "methods": "exact,lb,ub",
    "samples": "1000000",
    "seed": "0",
    "optimizer": "2d-cd",
    "grid_n": "101",
    "threads": "1",
}

_POWER_LIKE = {"pi_sr", "pi_rd", "pi_rr", "pi_sd", "p_s", "p_max", "p_r"}
_SWEEPABLE = _POWER_LIKE | {"c_x", "r"}
_METRICS = ("outage", "ergodic", "throughput")
_METHODS = ("exact", "lb", "ub", "mc")


@dataclass
class RunConfig:
    """Fully resolved run description (all values linear)."""

    raw: Dict[str, str]
    sys: SystemParams
    sig: SignalParams
    target: RateTarget
    sweep_var: str
    sweep_values: List[float]
    metrics: List[str]
    methods: List[str]
    samples: int
    seed: int
    optimizer: str
    grid_n: int
    threads: int


def _parse_kv_file(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
                key, _, val = stripped.partition("=")
                key, val = key.strip(), val.strip()
                if not key or not val:
                    raise ConfigError(f"{path}:{lineno}: empty key or value")
                values[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    return values


def _as_float(raw: Dict[str, str], key: str) -> float:
    try:
        return float(raw[key])
    except ValueError as exc:
        raise ConfigError(f"field {key}: not a number: {raw[key]!r}") from exc


def _as_int(raw: Dict[str, str], key: str) -> int:
    try:
        return int(raw[key])
    except ValueError as exc:
        raise ConfigError(f"field {key}: not an integer: {raw[key]!r}") from exc


def _resolve_pi(raw: Dict[str, str], link: str) -> float:
    """A mean link power may be given linearly (pi_xx) or in dB (pi_xx_db)."""
    if f"pi_{link}" in raw:
        return _as_float(raw, f"pi_{link}")
    return db_to_linear(_as_float(raw, f"pi_{link}_db"))


def build_config(
    scenario: Optional[str], overrides: List[str], args: argparse.Namespace
) -> RunConfig:
    raw = dict(_DEFAULTS)
    if scenario:
        raw.update(_parse_kv_file(scenario))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, val = item.partition("=")
        raw[key.strip()] = val.strip()
    if getattr(args, "seed", None) is not None:
        raw["seed"] = str(args.seed)
    if getattr(args, "samples", None) is not None:
        raw["samples"] = str(args.samples)
    if getattr(args, "threads", None) is not None:
        raw["threads"] = str(args.threads)

    known = set(_DEFAULTS) | {f"pi_{l}" for l in ("sr", "rd", "rr", "sd")}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")

    try:
        sys_params = SystemParams(
            sr=LinkStat(_as_int(raw, "m_sr"), _resolve_pi(raw, "sr")),
            rd=LinkStat(_as_int(raw, "m_rd"), _resolve_pi(raw, "rd")),
            rr=LinkStat(_as_int(raw, "m_rr"), _resolve_pi(raw, "rr")),
            sd=LinkStat(_as_int(raw, "m_sd"), _resolve_pi(raw, "sd")),
            p_s=_as_float(raw, "p_s"),
            p_max=_as_float(raw, "p_max"),
        )
        sig = SignalParams(_as_float(raw, "p_r"), _as_float(raw, "c_x"))
        sys_params.check_signal(sig)
        target = RateTarget(_as_float(raw, "r"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sweep_var = raw["sweep_var"]
    if sweep_var not in _SWEEPABLE:
        raise ConfigError(f"sweep_var must be one of {sorted(_SWEEPABLE)}, got {sweep_var!r}")
    scale = raw["sweep_scale"]
    if scale not in ("linear", "db"):
        raise ConfigError(f"sweep_scale must be 'linear' or 'db', got {scale!r}")
    if scale == "db" and sweep_var not in _POWER_LIKE:
        raise ConfigError(f"dB scale is only valid for power-like variables, not {sweep_var}")
    points = _as_int(raw, "sweep_points")
    if points < 2:
        raise ConfigError(f"sweep_points must be >= 2, got {points}")
    start, stop = _as_float(raw, "sweep_start"), _as_float(raw, "sweep_stop")
    axis = [start + (stop - start) * i / (points - 1) for i in range(points)]
    if scale == "db":
        axis = [db_to_linear(v) for v in axis]

    metrics = [m.strip() for m in raw["metrics"].split(",") if m.strip()]
    methods = [m.strip() for m in raw["methods"].split(",") if m.strip()]
    if not metrics:
        raise ConfigError("at least one metric is required")
    for m in metrics:
        if m not in _METRICS:
            raise ConfigError(f"unknown metric {m!r} (choose from {_METRICS})")
    for m in methods:
        if m not in _METHODS:
            raise ConfigError(f"unknown method {m!r} (choose from {_METHODS})")
    samples = _as_int(raw, "samples")
    if samples < 10_000:
        raise ConfigError(f"samples must be >= 10000, got {samples}")
    optimizer = raw["optimizer"]
    if optimizer not in ("1d-cx", "1d-pr", "2d-cd", "grid"):
        raise ConfigError(f"optimizer must be 1d-cx | 1d-pr | 2d-cd | grid, got {optimizer!r}")
    grid_n = _as_int(raw, "grid_n")
    threads = _as_int(raw, "threads")
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return RunConfig(
        raw=raw,
        sys=sys_params,
        sig=sig,
        target=target,
        sweep_var=sweep_var,
        sweep_values=axis,
        metrics=metrics,
        methods=methods,
        samples=samples,
        seed=_as_int(raw, "seed"),
        optimizer=optimizer,
        grid_n=grid_n,
        threads=threads,
    )


def _apply_sweep_value(cfg: RunConfig, value: float) -> Tuple[SystemParams, SignalParams, RateTarget]:
    sys_p, sig, target = cfg.sys, cfg.sig, cfg.target
    var = cfg.sweep_var
    if var in ("pi_sr", "pi_rd", "pi_rr", "pi_sd"):
        link = var[3:]
        sys_p = replace(sys_p, **{link: replace(getattr(sys_p, link), pi=value)})
    elif var == "p_s":
        sys_p = replace(sys_p, p_s=value)
    elif var == "p_max":
        sys_p = replace(sys_p, p_max=value)
        sig = replace(sig, p_r=min(sig.p_r, value))
    elif var == "p_r":
        sig = replace(sig, p_r=value)
    elif var == "c_x":
        sig = replace(sig, c_x=value)
    elif var == "r":
        target = RateTarget(value)
    return sys_p, sig, target


def _sweep_cell(metric: str, method: str, sys_p, sig, target, mc_cfg) -> List[Tuple[str, object]]:
    """One (metric, method) evaluation -> [(column suffix, value), ...]."""
    if metric == "outage":
        if method == "exact":
            res = outage.p_e2e_exact(sys_p, sig, target)
        elif method == "lb":
            res = outage.p_e2e_lb(sys_p, sig, target)
        elif method == "ub":
            res = outage.p_e2e_rayleigh_ub(sys_p, sig, target)
        else:
            res_mc = montecarlo.estimate_outage(sys_p, sig, target, mc_cfg)
            return [("monte-carlo", res_mc.mean), ("monte-carlo:stderr", res_mc.stderr)]
        return [(res.method, res.value)]
    if metric == "ergodic":
        if method == "exact":
            res = ergodic.r_e2e_exact(sys_p, sig)
        elif method == "lb":
            res = ergodic.r_e2e_rayleigh_lb(sys_p, sig)
        elif method == "ub":
            res = ergodic.r_e2e_ub(sys_p, sig)
        else:
            res_mc = montecarlo.estimate_ergodic(sys_p, sig, mc_cfg)
            return [("monte-carlo", res_mc.mean), ("monte-carlo:stderr", res_mc.stderr)]
        return [(res.method, res.value)]
    # throughput = r (1 - outage), inheriting the outage method tag
    cells = _sweep_cell("outage", method, sys_p, sig, target, mc_cfg)
    out = []
    for suffix, value in cells:
        if suffix.endswith("stderr"):
            out.append((suffix, target.r * value))
        else:
            out.append((suffix, target.r * (1.0 - value)))
    return out


def _fmt(value: object) -> str:
    if value is None:
        return ""
    return format(float(value), ".12g")


def _write_csv(path: Optional[str], header: List[str], rows: List[List[object]]) -> None:
    out = open(path, "w", newline="", encoding="utf-8") if path else _sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell) for cell in row])
    finally:
        if path:
            out.close()


def cmd_sweep(cfg: RunConfig, out_path: Optional[str]) -> int:
    mc_cfg = McConfig(cfg.samples, cfg.seed)
    pairs = [(metric, method) for metric in cfg.metrics for method in cfg.methods]
    diagnostics: List[str] = []

    def evaluate(value: float):
        sys_p, sig, target = _apply_sweep_value(cfg, value)
        cells: Dict[Tuple[str, str], List[Tuple[str, object]]] = {}
        for metric, method in pairs:
            try:
                cells[(metric, method)] = _sweep_cell(metric, method, sys_p, sig, target, mc_cfg)
            except (ArithmeticError, ValueError) as exc:
                cells[(metric, method)] = [("failed", None)]
                diagnostics.append(f"{cfg.sweep_var}={value!r} {metric}/{method}: {exc}")
        return cells

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(evaluate, cfg.sweep_values))
    else:
        results = [evaluate(v) for v in cfg.sweep_values]

    # column layout from the first successful evaluation of each pair
    columns: List[Tuple[str, str, str]] = []
    for metric, method in pairs:
        suffixes: List[str] = []
        for row in results:
            tags = [s for s, _ in row[(metric, method)] if s != "failed"]
            if tags:
                suffixes = tags
                break
        for suffix in suffixes or ["failed"]:
            columns.append((metric, method, suffix))

    axis_name = cfg.sweep_var + (":db-input" if cfg.raw["sweep_scale"] == "db" else "")
    header = [axis_name] + [f"{metric}:{suffix}" for metric, _, suffix in columns]
    rows = []
    for value, row in zip(cfg.sweep_values, results):
        cells: List[object] = [value]
        for metric, method, suffix in columns:
            found = dict(row[(metric, method)])
            cells.append(found.get(suffix))
        rows.append(cells)
    _write_csv(out_path, header, rows)
    if diagnostics:
        sidecar = (out_path or "sweep") + ".diagnostics.txt"
        with open(sidecar, "w", encoding="utf-8") as fh:
            fh.write("\n".join(diagnostics) + "\n")
        print(f"{len(diagnostics)} point(s) failed; see {sidecar}", file=_sys.stderr)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, out_path: Optional[str]) -> int:
    search = SearchConfig(grid_n=max(cfg.grid_n, 101))
    if cfg.optimizer == "1d-cx":
        result = optimize.bisect_circularity(cfg.sys, cfg.target, cfg.sig.p_r, search)
        objective_tag = "upper-bound"
    elif cfg.optimizer == "1d-pr":
        result = optimize.bisect_power(cfg.sys, cfg.target, cfg.sig.c_x, search)
        objective_tag = "closed-form-exact" if cfg.sig.c_x == 0.0 else "upper-bound"
    elif cfg.optimizer == "2d-cd":
        result = optimize.coordinate_descent(cfg.sys, cfg.target, search)
        objective_tag = "upper-bound"
    else:
        objective = "outage-ub" if cfg.sys.all_rayleigh else "outage-lb"
        result = optimize.grid_search(cfg.sys, cfg.target, objective, search)
        objective_tag = "upper-bound" if objective == "outage-ub" else "lower-bound"

    print(f"optimizer  : {cfg.optimizer}")
    print(f"p_r*       : {result.p_r_star:.10g}")
    print(f"c_x*       : {result.c_x_star:.10g}")
    print(f"objective  : {result.objective:.10g} ({objective_tag})")
    print(f"iterations : {result.iterations}")
    print(f"converged  : {result.converged}")
    if cfg.optimizer == "2d-cd" and result.trace:
        print("trace      : " + ", ".join(f"{v:.10g}" for v in result.trace))
    header = ["optimizer", "p_r_star", "c_x_star", f"objective:{objective_tag}", "iterations", "converged"]
    row: List[object] = [cfg.optimizer, result.p_r_star, result.c_x_star, result.objective,
                         float(result.iterations), 1.0 if result.converged else 0.0]
    if out_path:
        _write_csv(out_path, header, [row])
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def cmd_throughput(cfg: RunConfig, out_path: Optional[str]) -> int:
    if cfg.sweep_var != "r":
        raise ConfigError("the throughput command needs sweep_var = r")
    mc_cfg = McConfig(cfg.samples, cfg.seed)
    search = SearchConfig(grid_n=max(cfg.grid_n, 101))
    rayleigh = cfg.sys.all_rayleigh
    pgs_tag = "closed-form-exact" if rayleigh else "lower-bound"
    igs_tag = "exact-integral" if rayleigh else "lower-bound"
    header = [
        "r",
        f"throughput:pgs-optimized:{pgs_tag}",
        f"throughput:igs-optimized:{igs_tag}",
        "throughput:hdr-mhdf:monte-carlo",
        "throughput:hdr-mhdf:monte-carlo:stderr",
        "throughput:hdr-mrc:monte-carlo",
        "throughput:hdr-mrc:monte-carlo:stderr",
    ]
    rows = []
    for r in cfg.sweep_values:
        target = RateTarget(r)
        if rayleigh:
            pgs = optimize.bisect_power(cfg.sys, target, 0.0, search).objective
            cd = optimize.coordinate_descent(cfg.sys, target, search)
            igs = outage.p_e2e_exact(
                cfg.sys, SignalParams(cd.p_r_star, cd.c_x_star), target
            ).value
        else:
            igs = optimize.grid_search(cfg.sys, target, "outage-lb", search).objective
            pgs = min(
                outage.p_e2e_lb(cfg.sys, SignalParams(p, 0.0), target).value
                for p in (cfg.sys.p_max * (i + 1) / search.grid_n for i in range(search.grid_n))
            )
        mhdf = montecarlo.estimate_hdr_outage(cfg.sys, target, False, mc_cfg)
        mrc = montecarlo.estimate_hdr_outage(cfg.sys, target, True, mc_cfg)
        rows.append([
            r,
            r * (1.0 - pgs),
            r * (1.0 - igs),
            r * (1.0 - mhdf.mean),
            r * mhdf.stderr,
            r * (1.0 - mrc.mean),
            r * mrc.stderr,
        ])
    _write_csv(out_path, header, rows)
    return EXIT_OK


def cmd_validate() -> int:
    results = acceptance.run_all(report=print)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdrigs",
        description="Outage and ergodic-rate analysis of a full-duplex relay "
        "with an improper Gaussian transmit signal.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "sweep one variable and emit metric columns as CSV"),
        ("optimize", "run a 1D/2D optimizer and report the design point"),
        ("throughput", "optimized throughput vs target rate, with half-duplex baselines"),
        ("validate", "run the self-validation suite"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name != "validate":
            p.add_argument("--config", metavar="PATH", help="scenario file (key = value lines)")
            p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                           help="override a scenario field (repeatable)")
            p.add_argument("--out", metavar="PATH", help="output CSV path (default: stdout)")
            p.add_argument("--seed", type=int, help="Monte Carlo seed")
            p.add_argument("--samples", type=int, help="Monte Carlo sample count")
            p.add_argument("--threads", type=int, help="worker threads for sweeps")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate()
        cfg = build_config(args.config, args.set, args)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        if args.command == "optimize":
            return cmd_optimize(cfg, args.out)
        return cmd_throughput(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
