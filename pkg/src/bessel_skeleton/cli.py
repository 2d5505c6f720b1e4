"""Command-line front end: ``simulate``, ``stats``, ``sweep`` and ``transform``.

Exit codes: 0 ok, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from pathlib import Path

from . import io as skio
from .core import DomainError, FlagMismatch, HorizonError, MonotonicityError, make_bessel_spec, make_weights
from .sampling import RngStream
from .skeletons import bessel_skeleton_integer, bessel_skeleton_noninteger, default_weights
from .stats import ExperimentConfig, SweepConfig, run_cost_experiment, sweep
from .transforms import (
    CIR,
    CirParams,
    cev_transform,
    cir_transform,
    precision_variable,
    precision_variable_explicit,
    transported_bounds,
)

DEFAULT_SEED = 0xB355E1
EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing


def parse_delta(value) -> tuple[float, bool]:
    """Integer literals (``2``) select the integer generator, decimal literals
    (``2.2``) the non-integer one."""
    if isinstance(value, bool):
        raise ConfigError(f"invalid dimension {value!r}")
    if isinstance(value, int):
        return float(value), True
    if isinstance(value, float):
        return value, False
    text = str(value).strip()
    try:
        return float(int(text)), True
    except ValueError:
        pass
    try:
        return float(text), False
    except ValueError:
        raise ConfigError(f"invalid dimension {value!r}") from None


def parse_grid(text, axis: str) -> list:
    items = text if isinstance(text, list) else [t for t in str(text).split(",") if t.strip()]
    grid = []
    for item in items:
        if axis == "dimension":
            value, is_int = parse_delta(item)
            grid.append(int(value) if is_int else value)
        else:
            try:
                grid.append(float(item))
            except ValueError:
                raise ConfigError(f"invalid grid value {item!r}") from None
    if not grid:
        raise ConfigError("grid must be nonempty")
    return grid


_DEFAULTS = {
    "eps": 0.05,
    "y0": 0.0,
    "T": 1.0,
    "reps": 1000,
    "seed": DEFAULT_SEED,
    "format": "csv",
    "out": "-",
    "model": "cir",
    "k": 2.0,
    "theta": 1.0 / 3.0,
    "sigma": 1.0,
    "x0": 1.0,
    "mu": 0.0,
    "beta": -1.0,
    "T0": 2.0,
    "bins": "fd",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flags")
    common.add_argument("--seed", type=int, help=f"base seed (default {DEFAULT_SEED:#x})")
    common.add_argument("--out", help="output path, '-' for stdout (default)")
    common.add_argument("--eps", type=float, help="precision")

    bessel = argparse.ArgumentParser(add_help=False)
    bessel.add_argument("--delta", help="dimension; write 2 for integer, 2.2 for non-integer")
    bessel.add_argument("--y0", type=float, help="start value")
    bessel.add_argument("--T", type=float, help="horizon")
    bessel.add_argument("--wi", type=float, help="integer-component weight (non-integer dimension)")

    parser = argparse.ArgumentParser(prog="bessel-skeleton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, bessel], help="write one skeleton")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("stats", parents=[common, bessel], help="cost statistics over many paths")
    p.add_argument("--reps", type=int)
    p.add_argument("--bins", help="histogram bins: a numpy rule name or a count")
    p.add_argument("--hist-out", dest="hist_out", help="histogram CSV path (default: beside --out)")

    p = sub.add_parser("sweep", parents=[common, bessel], help="mean cost over a parameter grid")
    p.add_argument("--reps", type=int)
    p.add_argument("--axis", choices=("dimension", "inv_eps2", "wi"))
    p.add_argument("--grid", help="comma-separated grid values")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("transform", parents=[common], help="transported bounds for CIR or CEV")
    p.add_argument("--model", choices=("cir", "cev"))
    p.add_argument("--k", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--mu", type=float, help="CEV drift")
    p.add_argument("--beta", type=float, help="CEV elasticity (<= -1)")
    p.add_argument("--T", dest="T0", type=float, help="observation window [0, T] (default 2)")
    p.add_argument("--wi", type=float)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Flags override the JSON config, which overrides the defaults."""
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except ValueError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        if getattr(args, "command", None) == "transform" and "T" in loaded:
            # --T is the observation window for transform
            loaded.setdefault("T0", loaded.pop("T"))
        cfg.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key != "config":
            cfg[key] = value
    return cfg


# ---------------------------------------------------------------------------
# commands


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _spec(cfg):
    if cfg.get("delta") is None:
        raise ConfigError("--delta is required")
    delta, is_int = parse_delta(cfg["delta"])
    return make_bessel_spec(delta, cfg["y0"], cfg["eps"], is_int)


def _weights(cfg, spec):
    if spec.is_integer:
        if cfg.get("wi") is not None:
            raise ConfigError("--wi only applies to a non-integer dimension")
        return None
    if cfg.get("wi") is None:
        return default_weights(spec)
    return make_weights(spec.delta, cfg["wi"], spec.eps)


def cmd_simulate(cfg) -> int:
    spec = _spec(cfg)
    weights = _weights(cfg, spec)
    stream = RngStream(cfg["seed"], 0)
    records = None
    if spec.is_integer:
        sk = bessel_skeleton_integer(stream, spec, cfg["T"])
    else:
        sk, records = bessel_skeleton_noninteger(stream, spec, weights, cfg["T"])
    with _open_out(cfg["out"]) as out:
        if cfg["format"] == "json":
            payload = skio.skeleton_to_json(sk, records)
            payload["seed"] = cfg["seed"]
            json.dump(payload, out, sort_keys=True)
            out.write("\n")
        else:
            skio.write_skeleton_csv(out, sk, records)
    return EXIT_OK


def _bins(value):
    if isinstance(value, int):
        return value
    text = str(value)
    return int(text) if text.isdigit() else text


def cmd_stats(cfg) -> int:
    spec = _spec(cfg)
    weights = _weights(cfg, spec)
    exp = ExperimentConfig(spec=spec, T=cfg["T"], reps=cfg["reps"], seed=cfg["seed"], weights=weights,
                           bins=_bins(cfg["bins"]))
    res = run_cost_experiment(exp)
    m = res.model
    hist = res.histogram
    payload = {
        "config": {"delta": spec.delta, "is_integer": spec.is_integer, "y0": spec.y0, "eps": spec.eps,
                   "T": exp.T, "reps": exp.reps, "seed": exp.seed,
                   "wi": None if weights is None else weights.wi},
        "empirical": {
            "reps": res.reps,
            "mean_N": res.mean_N,
            "var_N": res.var_N,
            "stderr_N": None if res.reps < 2 else res.stderr_N,
            "eps2_mean_N": res.eps2_mean_N,
            "histogram": {"edges": hist.edges.tolist(), "counts": hist.counts.tolist()},
        },
        "theory": {
            "limit": m.limit(exp.T),
            "limit_eps2_EN": m.limit(exp.T),
            "limit_eps2_EN_per_unit_T": m.limit_eps2_EN,
            "expected_N": m.expected_count(spec.eps, exp.T),
            "mu": m.mu,
            "sigma2": m.sigma2,
            "clt_std_eps2_N": m.clt_std(spec.eps, exp.T),
            "standardized_mean": res.standardized_mean,
            "standardized_var": None if res.reps < 2 else res.standardized_var,
        },
    }
    with _open_out(cfg["out"]) as out:
        json.dump(payload, out, indent=2, sort_keys=True)
        out.write("\n")
    hist_path = cfg.get("hist_out")
    if hist_path is None and cfg["out"] not in (None, "-"):
        p = Path(cfg["out"])
        hist_path = str(p.with_name(p.stem + ".hist.csv"))
    if hist_path:
        with _open_out(hist_path) as out:
            skio.write_table_csv(out, ["bin_lo", "bin_hi", "count"], hist.rows())
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    if cfg.get("axis") is None or cfg.get("grid") is None:
        raise ConfigError("--axis and --grid are required")
    axis = cfg["axis"]
    grid = parse_grid(cfg["grid"], axis)
    if axis == "dimension" and cfg.get("delta") is None:
        first = grid[0]
        cfg = {**cfg, "delta": first}
    spec = _spec(cfg)
    weights = _weights(cfg, spec) if axis != "dimension" else None
    base = ExperimentConfig(spec=spec, T=cfg["T"], reps=cfg["reps"], seed=cfg["seed"], weights=weights)
    table = sweep(SweepConfig(axis=axis, grid=grid, base=base))
    with _open_out(cfg["out"]) as out:
        if cfg["format"] == "json":
            json.dump({"axis": axis, "rows": [r.__dict__ for r in table.rows], "wi_star": table.wi_star},
                      out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            rows = [(r.axis_value, r.mean_N, r.stderr_N, r.theory) for r in table.rows]
            if table.wi_star is not None:
                rows.append(("wi_star", None, None, table.wi_star))
            skio.write_table_csv(out, ["axis_value", "mean_N", "stderr_N", "theory"], rows)
    return EXIT_OK


def cmd_transform(cfg) -> int:
    if cfg["model"] == "cir":
        tspec = cir_transform(CirParams(cfg["k"], cfg["theta"], cfg["sigma"], cfg["x0"]))
    else:
        tspec = cev_transform(cfg["mu"], cfg["sigma"], cfg["beta"], cfg["x0"])
    T0 = float(cfg["T0"])
    spec = tspec.bessel_spec(cfg["eps"])
    horizon = float(tspec.rho(T0))
    stream = RngStream(cfg["seed"], 0)
    if spec.is_integer:
        if cfg.get("wi") is not None:
            raise ConfigError("--wi only applies to a non-integer dimension")
        sk = bessel_skeleton_integer(stream, spec, horizon)
    else:
        weights = default_weights(spec) if cfg.get("wi") is None else make_weights(spec.delta, cfg["wi"], spec.eps)
        sk, _ = bessel_skeleton_noninteger(stream, spec, weights, horizon)
    bounds = transported_bounds(tspec, sk, T0)
    footer = {"model": tspec.kind, "delta": tspec.delta, "y0": tspec.y0, "eps": spec.eps, "T0": T0,
              "seed": cfg["seed"], "n_points": int(len(bounds.t))}
    if tspec.kind == CIR:
        footer["P_eps"] = precision_variable(tspec, sk, T0)
        if tspec.params["k"] > 0:
            footer["P_eps_explicit"] = precision_variable_explicit(tspec, sk, T0)
    with _open_out(cfg["out"]) as out:
        skio.write_table_csv(out, ["t", "lower", "mid", "upper"],
                             zip(bounds.t, bounds.lower, bounds.mid, bounds.upper))
        out.write("# " + json.dumps(footer, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "stats": cmd_stats, "sweep": cmd_sweep, "transform": cmd_transform}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        for key in ("eps", "y0", "T", "T0", "k", "theta", "sigma", "x0", "mu", "beta"):
            if key in cfg and cfg[key] is not None and not math.isfinite(float(cfg[key])):
                raise ConfigError(f"{key} must be finite")
        return COMMANDS[args.command](cfg)
    except (ConfigError, DomainError, FlagMismatch, HorizonError, MonotonicityError) as exc:
        print(f"bessel-skeleton: config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"bessel-skeleton: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TypeError, ValueError) as exc:
        print(f"bessel-skeleton: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
