"""Command-line front door: sieve cache management, moment runs, identity
verification, and the corollary diagnostics, emitted as JSON or CSV.

Every report embeds the artifact version and the fully-resolved RunConfig,
so a saved config (or the echoed one) reproduces the run; full-enumeration
outputs are deterministic apart from the elapsed_ms timing field.  Exit
code 0 means every certified check in the run passed, 1 means some
certified inequality or identity failed, 2 means the run errored.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import psutil

from . import __version__
from .circle import CorrelationSpec, verify_identity
from .ensembles import EXACT, EnsembleSpec, ensemble_size
from .errors import ChowlaLabError
from .expsums import sup_estimate
from .moments import (WEIGHT_ALL_ONES, WEIGHT_FILE, WEIGHT_PRIME,
                      IntervalSpec, WeightSpec, exceedance_report,
                      lower_bound_probe, moment_report)
from .sieve import (MAX_SIEVE_LIMIT, FactorSieve, build_sieve,
                    load_sieve_cache, save_sieve_cache)

ENV_CACHE = "CHOWLA_SIEVE_CACHE"

_COMMON_DEFAULTS = {
    "format": "json",
    "output": None,
    "workers": None,
    "seed": 0,
    "force": False,
    "tuple_budget": 10**8,
    "node_budget": 10**8,
    "sieve_limit": None,
    "sieve_cache": None,
}

_SUB_DEFAULTS = {
    "sieve": {"limit": None, "out": None},
    "moments": {"degrees": None, "height": None, "x": None, "k_max": 4,
                "weights": "all_ones", "mode": "auto", "samples": 100000},
    "verify-identity": {"d": None, "L": None, "points": None, "height": None,
                        "tol": 1e-6},
    "davenport": {"x": None, "grid": None},
    "exceedance": {"degree": None, "height": None, "x": None, "y": "1"},
    "probe": {"degree": None, "height": None, "x": None, "y": 0.5, "m": 1},
}


@dataclass
class RunConfig:
    """Fully-resolved parameters of one run; serialized into every report."""

    subcommand: str
    params: dict

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.params}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        cfg = _merge_config(args)
        payload, rows, ok = _DISPATCH[args.subcommand](cfg)
        payload = {
            "artifact": {"name": "chowla-lab", "version": __version__},
            "config": cfg.to_dict(),
            **payload,
        }
        _emit(payload, rows, cfg.params["format"], cfg.params["output"])
    except ChowlaLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--workers", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--force", action="store_const", const=True,
                        help="override the node-budget refusal")
    common.add_argument("--tuple-budget", type=int, dest="tuple_budget")
    common.add_argument("--node-budget", type=int, dest="node_budget")
    common.add_argument("--sieve-limit", type=int, dest="sieve_limit")
    common.add_argument("--sieve-cache", dest="sieve_cache",
                        help=f"cache path (default ${ENV_CACHE})")
    common.add_argument("--config", help="JSON RunConfig; explicit flags win")

    parser = argparse.ArgumentParser(
        prog="chowla-lab",
        description="Liouville-signed polynomial sums: sieving, moments, "
                    "circle-method identity checks, and corollary diagnostics.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand")

    p = subs.add_parser("sieve", parents=[common],
                        help="build and save a smallest-prime-factor cache")
    p.add_argument("--limit", type=int)
    p.add_argument("--out", help=f"output path (default ${ENV_CACHE})")

    p = subs.add_parser("moments", parents=[common],
                        help="ensemble moment report vs Gaussian predictions")
    p.add_argument("--degrees", help="comma-separated slot degrees, e.g. 3 or 1,2")
    p.add_argument("--height", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--weights", help="all_ones | prime | file:PATH")
    p.add_argument("--mode", choices=("auto", "full", "monte_carlo"))
    p.add_argument("--samples", type=int)

    p = subs.add_parser("verify-identity", parents=[common],
                        help="check the correlation-sum / integral identity")
    p.add_argument("--d", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--points", help="comma-separated evaluation points, e.g. 2,3")
    p.add_argument("--height", type=int)
    p.add_argument("--tol", type=float)

    p = subs.add_parser("davenport", parents=[common],
                        help="sup of the one-sided Liouville exponential sum")
    p.add_argument("--x", type=float)
    p.add_argument("--grid", type=int)

    p = subs.add_parser("exceedance", parents=[common],
                        help="count of |C|/sqrt(x) > y vs the Chebyshev bound")
    p.add_argument("--degree", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--y", help="threshold(s), comma-separated")

    p = subs.add_parser("probe", parents=[common],
                        help="Cauchy-Schwarz lower bound on P(S > y)")
    p.add_argument("--degree", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--m", type=int)

    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < explicit flags."""
    sub = args.subcommand
    merged = dict(_COMMON_DEFAULTS)
    merged.update(_SUB_DEFAULTS[sub])
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            stored = json.load(fh)
        stored_sub = stored.pop("subcommand", sub)
        if stored_sub != sub:
            raise ValueError(
                f"config file is for {stored_sub!r}, not {sub!r}")
        unknown = set(stored) - set(merged)
        if unknown:
            raise ValueError(f"config file has unknown keys {sorted(unknown)}")
        merged.update(stored)
    for key, value in vars(args).items():
        if key in ("subcommand", "config") or value is None:
            continue
        merged[key] = value
    if merged["workers"] is None:
        merged["workers"] = os.cpu_count() or 1
    merged["force"] = bool(merged["force"])
    return RunConfig(subcommand=sub, params=merged)


# ----------------------------------------------------------------------
# sieve sizing


def _memory_cap_entries() -> int:
    return int(psutil.virtual_memory().available * 0.45) // 4


def _resolve_sieve(required: int, params: dict) -> FactorSieve:
    """Load the cache when it covers `required`, otherwise build.

    An explicit --sieve-limit wins over auto-sizing; a table smaller than
    `required` is still usable because per-value factorization covers the
    excess, just slowly, so that case only warns.
    """
    cache = params.get("sieve_cache") or os.environ.get(ENV_CACHE)
    if cache and os.path.exists(cache):
        loaded = load_sieve_cache(cache)
        if loaded.limit >= required:
            return loaded
        print(f"note: cache {cache} stops at {loaded.limit}, below {required}; "
              "rebuilding in memory", file=sys.stderr)
    target = params.get("sieve_limit") or required
    target = min(target, MAX_SIEVE_LIMIT, max(_memory_cap_entries(), 10**6))
    if target < required:
        print(f"note: sieve capped at {target} < {required}; values beyond "
              "the table use slow per-value factorization", file=sys.stderr)
    return build_sieve(max(target, 2))


def _value_bound(degrees, height: int, hi: int) -> int:
    return max(height * sum(hi**j for j in range(d + 1)) for d in degrees)


# ----------------------------------------------------------------------
# subcommands


def _cmd_sieve(cfg: RunConfig):
    p = cfg.params
    _require(p, "limit")
    out = p["out"] or os.environ.get(ENV_CACHE)
    if not out:
        raise ValueError(f"--out or ${ENV_CACHE} must name the cache path")
    sieve = build_sieve(p["limit"])
    nbytes = save_sieve_cache(sieve, out)
    payload = {"limit": sieve.limit, "path": out, "bytes": nbytes}
    return payload, [payload], True


def _cmd_moments(cfg: RunConfig):
    p = cfg.params
    _require(p, "degrees", "height", "x")
    degrees = tuple(_int_list(p["degrees"]))
    interval = IntervalSpec(p["x"])
    weights = _parse_weights(p["weights"])
    full_size = ensemble_size(EnsembleSpec(degrees, p["height"], EXACT))
    mode = p["mode"]
    if mode == "auto":
        mode = "full" if full_size <= p["tuple_budget"] else "monte_carlo"
    samples = p["samples"] if mode == "monte_carlo" else None
    spec = EnsembleSpec(degrees, p["height"], EXACT,
                        sample_count=samples, seed=p["seed"])
    sieve = _resolve_sieve(_value_bound(degrees, p["height"], interval.hi), p)
    report = moment_report(spec, interval, weights, p["k_max"], sieve,
                           workers=p["workers"], tuple_budget=p["tuple_budget"])
    return report.to_dict(), report.to_csv_rows(), True


def _cmd_verify_identity(cfg: RunConfig):
    p = cfg.params
    _require(p, "d", "points", "height")
    points = tuple(_int_list(p["points"]))
    if p["L"] is not None and p["L"] != len(points):
        raise ValueError(f"--L {p['L']} does not match {len(points)} points")
    spec = CorrelationSpec(d=p["d"], m=points, H=p["height"])
    required = max((p["d"] + 1) * mi ** p["d"] * p["height"] for mi in points)
    sieve = _resolve_sieve(required, p)
    report = verify_identity(spec, sieve, tol=p["tol"],
                             node_budget=p["node_budget"],
                             tuple_budget=p["tuple_budget"], force=p["force"])
    return report.to_dict(), [report.to_dict()], report.passed


def _cmd_davenport(cfg: RunConfig):
    p = cfg.params
    _require(p, "x")
    X = math.floor(p["x"])
    if X < 2:
        raise ValueError("x must be at least 2")
    grid = p["grid"] or 8 * X
    sieve = _resolve_sieve(X, p)
    alpha_star, value = sup_estimate(X, grid, sieve)
    log_sq = math.log(p["x"]) ** 2
    payload = {
        "x": p["x"],
        "grid_points": grid,
        "alpha_star": alpha_star,
        "value": value,
        "normalized_value": value * log_sq / p["x"],
        "summatory_abs": abs(sieve.lambda_partial_sum(X)),
    }
    return payload, [payload], True


def _cmd_exceedance(cfg: RunConfig):
    p = cfg.params
    _require(p, "degree", "height", "x", "y")
    interval = IntervalSpec(p["x"])
    spec = EnsembleSpec((p["degree"],), p["height"], EXACT)
    sieve = _resolve_sieve(_value_bound(spec.degrees, p["height"], interval.hi), p)
    rows = []
    ok = True
    for y in _float_list(p["y"]):
        rep = exceedance_report(spec, interval, y, sieve,
                                workers=p["workers"],
                                tuple_budget=p["tuple_budget"])
        rows.append(rep.to_dict())
        ok = ok and rep.certified
    return {"runs": rows}, rows, ok


def _cmd_probe(cfg: RunConfig):
    p = cfg.params
    _require(p, "degree", "height", "x")
    interval = IntervalSpec(p["x"])
    spec = EnsembleSpec((p["degree"],), p["height"], EXACT)
    sieve = _resolve_sieve(_value_bound(spec.degrees, p["height"], interval.hi), p)
    rep = lower_bound_probe(spec, interval, float(p["y"]), p["m"], sieve,
                            workers=p["workers"],
                            tuple_budget=p["tuple_budget"])
    return rep.to_dict(), [rep.to_dict()], rep.certified


_DISPATCH = {
    "sieve": _cmd_sieve,
    "moments": _cmd_moments,
    "verify-identity": _cmd_verify_identity,
    "davenport": _cmd_davenport,
    "exceedance": _cmd_exceedance,
    "probe": _cmd_probe,
}


# ----------------------------------------------------------------------
# plumbing


def _require(params: dict, *keys: str) -> None:
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise ValueError(f"missing required option(s): {flags}")


def _int_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(part) for part in str(value).split(",") if part.strip()]


def _float_list(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(part) for part in str(value).split(",") if part.strip()]


def _parse_weights(value: str) -> WeightSpec:
    text = str(value)
    if text in ("all_ones", "all-ones", "ones"):
        return WeightSpec(WEIGHT_ALL_ONES)
    if text in ("prime", "primes", "prime_indicator"):
        return WeightSpec(WEIGHT_PRIME)
    if text.startswith("file:"):
        return WeightSpec(WEIGHT_FILE, path=text[len("file:"):])
    raise ValueError(f"unknown weights {value!r} (all_ones | prime | file:PATH)")


def _emit(payload: dict, rows: list[dict], fmt: str, output: str | None) -> None:
    if fmt == "csv":
        if not rows:
            raise ValueError("no rows to write as CSV")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()),
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
