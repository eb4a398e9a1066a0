"""Command-line driver: fit, register, simulate, peaks.

Exit codes: 0 success, 2 input error, 3 consistency error, 4 numeric failure.
Every output JSON carries the effective configuration under "provenance" and
is validated against the schemas shipped with the package.  All randomness is
governed by a single master seed, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import bernstein, gibbs, peaks as peaks_mod, simulate, transport

EXIT_INPUT = 2
EXIT_CONSISTENCY = 3
EXIT_NUMERIC = 4


class InputError(ValueError):
    pass


def _schema(name: str) -> dict:
    text = resources.files("warpreg.schemas").joinpath(f"{name}.schema.json") \
        .read_text()
    return json.loads(text)


def write_json(path: Path, obj: dict, schema_name: str) -> None:
    jsonschema.validate(obj, _schema(schema_name))
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def load_patterns(path: Path) -> list[transport.PointPattern]:
    """Point patterns from JSON (array of arrays) or CSV (process_id,location)."""
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    if path.suffix.lower() == ".csv":
        groups: dict[str, list[float]] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "process_id" not in reader.fieldnames \
                    or "location" not in reader.fieldnames:
                raise InputError("CSV needs 'process_id' and 'location' columns")
            for row in reader:
                groups.setdefault(row["process_id"], []).append(
                    float(row["location"]))
        raw = [groups[k] for k in sorted(groups)]
    else:
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON at {path}: {exc}") from exc
        if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
            raise InputError("expected a JSON array of arrays of reals")
    out = []
    for i, pts in enumerate(raw):
        if len(pts) == 0:
            raise InputError(f"process {i} has an empty point pattern")
        try:
            out.append(transport.PointPattern(points=np.asarray(pts, dtype=float)))
        except (ValueError, TypeError) as exc:
            raise InputError(f"process {i}: {exc}") from exc
    return out


def _effective(args, config_keys: dict) -> dict:
    """Merge defaults < config file < explicit CLI flags."""
    cfg = dict(config_keys)
    if args.config:
        p = Path(args.config)
        if not p.exists():
            raise InputError(f"config file not found: {p}")
        try:
            file_cfg = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed config JSON: {exc}") from exc
        for k, v in file_cfg.items():
            if k in cfg:
                cfg[k] = v
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _hyper(cfg: dict) -> gibbs.Hyperparameters:
    return gibbs.Hyperparameters(
        k_max=int(cfg["k_max"]), a0=float(cfg["a0"]), b0=float(cfg["b0"]),
        gamma_shape=float(cfg["gamma_shape"]),
        gamma_rate=float(cfg["gamma_rate"]))


_FIT_DEFAULTS = {
    "seed": 0, "iterations": 10000, "burn_in": 5000, "thinning": 5,
    "k_max": 100, "a0": 1.0, "b0": 1.0, "gamma_shape": 1.0, "gamma_rate": 1.0,
}


def cmd_fit(args) -> int:
    cfg = _effective(args, _FIT_DEFAULTS)
    patterns = load_patterns(Path(args.input))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hyper = _hyper(cfg)
    for i, pattern in enumerate(patterns):
        seed = int(np.random.SeedSequence(
            [int(cfg["seed"]), i]).generate_state(1)[0])
        mcmc = gibbs.MCMCConfig(iterations=int(cfg["iterations"]),
                                burn_in=int(cfg["burn_in"]),
                                thinning=int(cfg["thinning"]), seed=seed)
        chain = gibbs.fit_posterior(pattern, hyper, mcmc)
        obj = chain.to_dict()
        obj["provenance"] = {"command": "fit", "process": i, **cfg}
        write_json(out_dir / f"chain_{i:03d}.json", obj, "chain")
    return 0


_REGISTER_DEFAULTS = {"grid": 512, "band_level": 0.95}


def cmd_register(args) -> int:
    cfg = _effective(args, _REGISTER_DEFAULTS)
    observed = load_patterns(Path(args.observed))
    chains = []
    for p in args.chains:
        path = Path(p)
        if not path.exists():
            raise InputError(f"chain file not found: {path}")
        try:
            chains.append(gibbs.PosteriorChain.from_dict(
                json.loads(path.read_text())).draws)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"malformed chain file {path}: {exc}") from exc
    if len(chains) != len(observed):
        raise transport.ChainMismatchError(
            f"{len(chains)} chains but {len(observed)} observed patterns")
    result = transport.posterior_summaries(
        chains, observed, grid_size=int(cfg["grid"]),
        band_level=float(cfg["band_level"]))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    obj = result.to_dict()
    obj["provenance"] = {"command": "register", **cfg}
    write_json(out_dir / "registration.json", obj, "registration")
    if args.export_curves:
        write_csv(out_dir / "frechet_mean.csv", ["t", "value"],
                  transport.curve_to_csv_rows(result.frechet_mean.mean))
        for i, w in enumerate(result.warps):
            write_csv(out_dir / f"warp_{i:03d}.csv", ["t", "value"],
                      transport.curve_to_csv_rows(w.mean))
    return 0


_SIM_DEFAULTS = {
    "seed": 0, "B": 1, "scenario": "small_n",
    "iterations": 1500, "burn_in": 750, "thinning": 3,
    "grid": 512, "band_level": 0.95, "threads": 1,
    "k_max": 100, "a0": 1.0, "b0": 1.0, "gamma_shape": 1.0, "gamma_rate": 1.0,
}


def cmd_simulate(args) -> int:
    cfg = _effective(args, _SIM_DEFAULTS)
    if cfg["scenario"] not in ("small_n", "large_n"):
        raise InputError(f"unknown scenario {cfg['scenario']!r}")
    budget = simulate.FitBudget(iterations=int(cfg["iterations"]),
                                burn_in=int(cfg["burn_in"]),
                                thinning=int(cfg["thinning"]))
    report, timing = simulate.run_monte_carlo(
        cfg["scenario"], int(cfg["B"]), budget=budget, hyper=_hyper(cfg),
        seed=int(cfg["seed"]), grid_size=int(cfg["grid"]),
        band_level=float(cfg["band_level"]), workers=int(cfg["threads"]))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report["provenance"] = {"command": "simulate", **cfg}
    write_json(out_dir / "report.json", report, "report")
    write_csv(out_dir / "boxplot.csv", ["run", "process", "distance"],
              simulate.distances_to_csv_rows(report["distances"]))
    # timing varies between runs, so it lives outside the deterministic outputs
    with open(out_dir / "timing.json", "w") as fh:
        json.dump(timing, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return 0


_PEAKS_DEFAULTS = {
    "seed": 0, "level_above": 0.95, "level_below": 0.05,
    "start_month": 4, "min_records": 30,
    "iterations": 2000, "burn_in": 1000, "thinning": 2,
    "grid": 512, "band_level": 0.95,
    "k_max": 100, "a0": 1.0, "b0": 1.0, "gamma_shape": 1.0, "gamma_rate": 1.0,
}


def cmd_peaks(args) -> int:
    cfg = _effective(args, _PEAKS_DEFAULTS)
    path = Path(args.csv)
    if not path.exists():
        raise InputError(f"CSV not found: {path}")
    try:
        series = peaks_mod.DailySeries.from_csv(path)
    except (peaks_mod.SeriesError, ValueError, KeyError) as exc:
        raise InputError(str(exc)) from exc
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hyper = _hyper(cfg)
    results = {}
    for direction, level in (("above", float(cfg["level_above"])),
                             ("below", float(cfg["level_below"]))):
        ps = peaks_mod.extract_peaks(
            series, level, direction, start_month=int(cfg["start_month"]),
            min_records=int(cfg["min_records"]))
        ps = peaks_mod.rescale_support(ps)
        obj = ps.to_dict()
        obj["provenance"] = {"command": "peaks", "direction": direction, **cfg}
        write_json(out_dir / f"peaks_{direction}.json", obj, "peaks")
        chains = peaks_mod.fit_peakset(
            ps, hyper, iterations=int(cfg["iterations"]),
            burn_in=int(cfg["burn_in"]), thinning=int(cfg["thinning"]),
            seed=int(np.random.SeedSequence(
                [int(cfg["seed"]), 0 if direction == "above" else 1]
            ).generate_state(1)[0]))
        summaries = peaks_mod.spi_posterior(
            chains, grid_size=int(cfg["grid"]),
            band_level=float(cfg["band_level"]))
        result = transport.posterior_summaries(
            chains, ps.patterns, grid_size=int(cfg["grid"]),
            band_level=float(cfg["band_level"]))
        for i, w in enumerate(result.warps):
            write_csv(out_dir / f"warp_{direction}_{ps.years[i]}.csv",
                      ["t", "value"], transport.curve_to_csv_rows(w.mean))
        results[direction] = (ps.years, summaries)
    years = results["above"][0]
    if years != results["below"][0]:
        raise transport.ChainMismatchError(
            "year sets differ between directions")
    rows = []
    for i, year in enumerate(years):
        up = results["above"][1][i]
        dn = results["below"][1][i]
        g_mean = peaks_mod.spi_global(up["mean"], dn["mean"])
        g_lo = peaks_mod.spi_global(up["lower"], dn["lower"])
        g_hi = peaks_mod.spi_global(up["upper"], dn["upper"])
        rows.append([year, f"{dn['mean']:.6f}", f"{up['mean']:.6f}",
                     f"{g_mean:.6f}", f"{g_lo:.6f}", f"{g_hi:.6f}"])
    write_csv(out_dir / "spi.csv",
              ["year", "spi_below", "spi_above", "spi_global", "lower", "upper"],
              rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warpreg",
        description="Bayesian registration of phase-varying point processes")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--config", type=str, default=None)
    common.add_argument("--out-dir", type=str, default=".")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--iterations", type=int, default=None)
    common.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    common.add_argument("--thinning", type=int, default=None)
    common.add_argument("--band-level", dest="band_level", type=float,
                        default=None)
    common.add_argument("--k-max", dest="k_max", type=int, default=None)

    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit one posterior chain per process")
    p_fit.add_argument("--input", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_reg = sub.add_parser("register", parents=[common],
                           help="summaries, warps, and registered points")
    p_reg.add_argument("--chains", nargs="+", required=True)
    p_reg.add_argument("--observed", required=True)
    p_reg.add_argument("--export-curves", action="store_true")
    p_reg.set_defaults(func=cmd_register)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="Monte Carlo study")
    p_sim.add_argument("--scenario", choices=["small_n", "large_n"],
                       default=None)
    p_sim.add_argument("--B", type=int, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_pk = sub.add_parser("peaks", parents=[common],
                          help="annual peak extraction and irregularity scores")
    p_pk.add_argument("--csv", required=True)
    p_pk.add_argument("--level-above", dest="level_above", type=float,
                      default=None)
    p_pk.add_argument("--level-below", dest="level_below", type=float,
                      default=None)
    p_pk.set_defaults(func=cmd_peaks)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": {"code": code, "kind": kind,
                                "message": message}}, sort_keys=True),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, gibbs.EmptyDataError, gibbs.ConfigError,
            peaks_mod.SeriesError, bernstein.DomainError,
            transport.PatternError, FileNotFoundError) as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    except (transport.ChainMismatchError,) as exc:
        return _fail(EXIT_CONSISTENCY, "consistency", str(exc))
    except (bernstein.NonConvergenceError, FloatingPointError,
            ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", str(exc))


if __name__ == "__main__":
    sys.exit(main())
