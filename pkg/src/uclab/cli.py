"""Experiment runner: one subcommand per verification, CSV artifacts out.

Exit codes: 0 when every asserted margin and invariant holds, 2 when a
measured inequality is falsified, 1 for usage or config problems.  Output
CSVs are byte-identical across runs with the same config and seed; only
run_meta.json (which records wall time) may differ.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import statistics
import sys
import time

import numpy as np
import scipy

from . import __version__
from .carleman import (
    CorpusSpec,
    build_corpus,
    caccioppoli_check,
    log_weight_sweep,
    power_weight_sweep,
    write_carleman_csv,
)
from .constants import PipelineConfig, _CONFIG_KEYS, result_to_dict, vanishing_order_pipeline
from .errors import UclabError
from .fields import harmonic_polynomial, make_indicial, power_radial
from .pdesolver import problem_from_config, solve, write_grid_csv
from .verify import (
    builtin_families,
    doubling_suite,
    three_sphere_suite,
    vanishing_order_records,
    write_verification_csv,
)

OK, USAGE_ERROR, FALSIFIED = 0, 1, 2

RUN_ORDER = (
    "three-sphere",
    "carleman-log",
    "carleman-power",
    "caccioppoli",
    "pipeline",
    "vanishing-order",
    "doubling",
    "solve",
)

DEFAULT_BETAS = (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0)
DEFAULT_MS = tuple(k + 0.5 for k in range(1, 21))

_PIPELINE_DEFAULTS = {k: getattr(PipelineConfig(), k) for k in _CONFIG_KEYS}

DEFAULTS: dict[str, dict] = {
    "three-sphere": {"n": 2, "R0": [0.03125], "C0": 2.0, "beta0": 1.0},
    "carleman-log": {"betas": list(DEFAULT_BETAS)},
    "carleman-power": {"ms": list(DEFAULT_MS)},
    "caccioppoli": {"radii": [0.25, 1.0]},
    "pipeline": {**_PIPELINE_DEFAULTS, "rho": 2.0**40},
    "vanishing-order": dict(_PIPELINE_DEFAULTS),
    "doubling": {**_PIPELINE_DEFAULTS, "rho": 2.0**40, "factors": [1.0, 0.5, 0.25]},
    "solve": {
        "operator": {"kind": "laplacian"},
        "r_in": 0.25, "r_out": 1.0, "c1": 0.0, "c2": 0.0,
        "g_in": {"cos": [0.0, 0.0, 0.0625]},
        "g_out": {"cos": [0.0, 0.0, 1.0]},
        "Nr": 64, "Ntheta": 64,
    },
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the artifact contract reserves 2
    for falsified inequalities, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _build_parser() -> _Parser:
    parser = _Parser(prog="uclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name in RUN_ORDER + ("all",):
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--seed", type=int)
        p.add_argument("--nr", type=int)
        p.add_argument("--ntheta", type=int)
        p.add_argument("--r0", type=float)
        p.add_argument("--beta-max", type=float, dest="beta_max")
        p.add_argument("--m-max", type=float, dest="m_max")
        if name in ("pipeline", "all"):
            p.add_argument("--rho", type=float)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageFailure(f"config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageFailure(
            f"config {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise UsageFailure(f"config {path}: top level must be a JSON object")
    return raw


class UsageFailure(Exception):
    pass


def _section(name: str, file_cfg: dict, args) -> dict:
    """Effective options: flags over file keys over built-in defaults."""
    cfg = dict(DEFAULTS[name])
    section = file_cfg.get(name.replace("-", "_"), {})
    if not isinstance(section, dict):
        raise UsageFailure(f"config section {name.replace('-', '_')} must be an object")
    for key, value in section.items():
        if key not in cfg:
            raise UsageFailure(f"config section {name.replace('-', '_')}: unknown key {key!r}")
        cfg[key] = value
    if args.r0 is not None:
        if name == "three-sphere":
            cfg["R0"] = [args.r0]
        elif "R0" in cfg:
            cfg["R0"] = args.r0
    if name == "pipeline" and getattr(args, "rho", None) is not None:
        cfg["rho"] = args.rho
    if name == "carleman-log" and args.beta_max is not None:
        cfg["betas"] = [b for b in cfg["betas"] if b <= args.beta_max]
    if name == "carleman-power" and args.m_max is not None:
        cfg["ms"] = [m for m in cfg["ms"] if m <= args.m_max]
    if name == "solve":
        if args.nr is not None:
            cfg["Nr"] = args.nr
        if args.ntheta is not None:
            cfg["Ntheta"] = args.ntheta
    return cfg


def _all_finite(values) -> bool:
    return all(math.isfinite(v) for v in values)


def _records_ok(records) -> bool:
    return _all_finite(r.margin for r in records) and all(
        r.margin >= -1e-9 for r in records
    )


def _log_stability_ok(reports, lo: float = 1.0, hi: float = 200.0) -> bool:
    members = sorted({r.member for r in reports})
    for member in members:
        ratios = [r.ratio for r in reports if r.member == member and lo <= r.param <= hi]
        if len(ratios) >= 2 and max(ratios) > 10.0 * statistics.median(ratios):
            return False
    return True


def _pipeline_config(cfg: dict) -> PipelineConfig:
    return PipelineConfig(**{k: cfg[k] for k in _CONFIG_KEYS})


def _caccioppoli_fields(n: int = 2):
    const = power_radial(n, 0.0)
    const.name = "const"
    fields = [const] + [harmonic_polynomial(n, l) for l in (1, 2, 3, 4)]
    fields += [make_indicial(n, 1.5, 0)[0], make_indicial(n, 2.5, 1)[0]]
    return fields


def _run_three_sphere(cfg: dict, out: str, seed: int) -> bool:
    records = three_sphere_suite(
        builtin_families(cfg["n"]), tuple(cfg["R0"]), n=cfg["n"],
        C0=cfg["C0"], beta0=cfg["beta0"],
    )
    write_verification_csv(records, os.path.join(out, "three-sphere.csv"))
    ok = _records_ok(records)
    print(f"three-sphere: {len(records)} records, "
          f"min margin {min(r.margin for r in records):.6g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_carleman_log(cfg: dict, out: str, seed: int) -> bool:
    reports = log_weight_sweep(build_corpus(CorpusSpec(seed=seed)), tuple(cfg["betas"]))
    write_carleman_csv(reports, os.path.join(out, "carleman-log.csv"))
    ok = _all_finite(r.ratio for r in reports) and _log_stability_ok(reports)
    print(f"carleman-log: {len(reports)} reports, "
          f"max ratio {max(r.ratio for r in reports):.6g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_carleman_power(cfg: dict, out: str, seed: int) -> bool:
    reports = power_weight_sweep(build_corpus(CorpusSpec(seed=seed)), tuple(cfg["ms"]))
    write_carleman_csv(reports, os.path.join(out, "carleman-power.csv"))
    ok = _all_finite(r.ratio for r in reports) and all(r.ratio > 0 for r in reports)
    print(f"carleman-power: {len(reports)} reports, "
          f"max ratio {max(r.ratio for r in reports):.6g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_caccioppoli(cfg: dict, out: str, seed: int) -> bool:
    reports = [
        caccioppoli_check(u, r) for u in _caccioppoli_fields() for r in cfg["radii"]
    ]
    write_carleman_csv(reports, os.path.join(out, "caccioppoli.csv"))
    ok = _all_finite(r.ratio for r in reports) and all(r.ratio > 0 for r in reports)
    print(f"caccioppoli: {len(reports)} reports, "
          f"max constant {max(r.ratio for r in reports):.6g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_pipeline(cfg: dict, out: str, seed: int) -> bool:
    result = vanishing_order_pipeline(_pipeline_config(cfg), cfg["rho"])
    payload = result_to_dict(result)
    path = os.path.join(out, "pipeline.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("key,value\n")
        for key, value in payload.items():
            if value is None:
                fh.write(f"{key},\n")
            elif isinstance(value, bool):
                fh.write(f"{key},{str(value).lower()}\n")
            elif isinstance(value, int):
                fh.write(f"{key},{value}\n")
            else:
                fh.write(f"{key},{value:.17g}\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    ok = result.growth_ok and result.bracket_ok
    print(f"pipeline: m1 = {result.m1:g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_vanishing_order(cfg: dict, out: str, seed: int) -> bool:
    records = vanishing_order_records(builtin_families(cfg["n"]), _pipeline_config(cfg))
    write_verification_csv(records, os.path.join(out, "vanishing-order.csv"))
    ok = _records_ok(records)
    print(f"vanishing-order: {len(records)} records, "
          f"min margin {min(r.margin for r in records):.6g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_doubling(cfg: dict, out: str, seed: int) -> bool:
    result = vanishing_order_pipeline(_pipeline_config(cfg), cfg["rho"])
    records = doubling_suite(
        builtin_families(cfg["n"]), result.log2_C3, result.R3,
        factors=tuple(cfg["factors"]),
    )
    write_verification_csv(records, os.path.join(out, "doubling.csv"))
    ok = _records_ok(records)
    print(f"doubling: {len(records)} records, "
          f"min margin {min(r.margin for r in records):.6g} -> {'ok' if ok else 'FALSIFIED'}")
    return ok


def _run_solve(cfg: dict, out: str, seed: int) -> bool:
    field = solve(problem_from_config(cfg))
    write_grid_csv(field, os.path.join(out, "solve.csv"))
    print(f"solve: {field.name}, max |u| = {float(np.max(np.abs(field.V))):.6g} -> ok")
    return True


_RUNNERS = {
    "three-sphere": _run_three_sphere,
    "carleman-log": _run_carleman_log,
    "carleman-power": _run_carleman_power,
    "caccioppoli": _run_caccioppoli,
    "pipeline": _run_pipeline,
    "vanishing-order": _run_vanishing_order,
    "doubling": _run_doubling,
    "solve": _run_solve,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    started = time.perf_counter()
    try:
        file_cfg = _load_config(args.config) if args.config else {}
        out = args.out or file_cfg.get("out") or os.environ.get("UCLAB_OUT") or "."
        os.makedirs(out, exist_ok=True)
        seed = args.seed if args.seed is not None else file_cfg.get("seed", 42)
        names = RUN_ORDER if args.subcommand == "all" else (args.subcommand,)
        sections = {name: _section(name, file_cfg, args) for name in names}
    except (UsageFailure, OSError, TypeError, ValueError) as exc:
        print(f"uclab: error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    all_ok = True
    try:
        for name in names:
            all_ok = _RUNNERS[name](sections[name], out, seed) and all_ok
    except (UclabError, ValueError, KeyError, TypeError) as exc:
        print(f"uclab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE_ERROR

    meta = {
        "subcommand": args.subcommand,
        "seed": seed,
        "config": sections,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "uclab": __version__,
        },
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    with open(os.path.join(out, "run_meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return OK if all_ok else FALSIFIED


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
