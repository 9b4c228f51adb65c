"""Command-line entry point: ``hybridmech run|verify|compare|bridge``.

Exit codes: 0 success, 1 a verification (or in-scenario check) failed,
2 the scenario could not be parsed or validated, 3 a numerical guard aborted
the evolution (a diagnostic JSON is written next to the outputs).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import runner
from .battery import DEFAULT_SEED
from .errors import ConfigError, NumericalAbort

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n"


def series_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow(["" if r.get(k) is None else repr(float(r[k])) if isinstance(r.get(k), (float, np.floating))
                    else r.get(k) for k in keys])
    return buf.getvalue()


def write_outputs(result: runner.RunResult, out: Path, fmt: str) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json"]
    written[0].write_text(dumps(result.report))
    if result.series:
        if fmt == "csv":
            path = out / "series.csv"
            path.write_text(series_csv(result.series))
        else:
            path = out / "series.json"
            path.write_text(dumps({"schema_version": runner.SCHEMA_VERSION,
                                   "scenario": result.report["scenario"], "rows": result.series}))
        written.append(path)
    if result.snapshots:
        sdir = out / "snapshots"
        sdir.mkdir(exist_ok=True)
        for name, d in runner.snapshot_dicts(result).items():
            path = sdir / f"{name}.json"
            path.write_text(json.dumps(d, sort_keys=True))
            written.append(path)
    return written


def _load(ref: str, scale: float) -> cfgmod.ScenarioConfig:
    return cfgmod.load(ref).scaled(scale)


def _abort(exc: NumericalAbort, out: Path | None, name: str) -> int:
    diag = dict(exc.diagnostic)
    diag["scenario"] = name
    text = dumps(diag)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "abort.json").write_text(text)
    sys.stderr.write(text)
    return EXIT_ABORT


def cmd_run(args) -> int:
    cfg = _load(args.config, args.resolution_scale)
    out = Path(args.out) / cfg.name
    try:
        result = runner.run(cfg, out if cfg.model == "bridge" else None)
    except NumericalAbort as exc:
        return _abort(exc, out, cfg.name)
    write_outputs(result, out, args.format)
    status = "ok" if result.passed else "FAILED CHECKS"
    print(f"{cfg.name}: {status} -> {out}")
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_bridge(args) -> int:
    cfg = _load(args.config, args.resolution_scale)
    if cfg.model not in ("classical_phase", "classical_hilbert", "bridge"):
        raise ConfigError(f"bridge needs a phase-space scenario, got model {cfg.model!r}")
    out = Path(args.out) / f"{cfg.name}_bridge"
    try:
        result = runner.bridge_analysis(cfg, out)
    except NumericalAbort as exc:
        return _abort(exc, out, cfg.name)
    write_outputs(result, out, args.format)
    s = result.report["summary"]
    print(f"{cfg.name}: round trip L1 {s['round_trip_l1']:.4g}, two-path L1 {s['two_path_l1']:.4g} -> {out}")
    return EXIT_OK


def compare_results(a: runner.RunResult, b: runner.RunResult) -> dict:
    """Largest differences between two runs on their shared series columns and densities."""
    rows_b = {round(r["t"], 9): r for r in b.series if "t" in r}
    diffs: dict[str, float] = {}
    shared_times = 0
    for ra in a.series:
        rb = rows_b.get(round(ra.get("t", np.nan), 9))
        if rb is None:
            continue
        shared_times += 1
        for k, v in ra.items():
            if k == "t" or k not in rb or v is None or rb[k] is None:
                continue
            diffs[k] = max(diffs.get(k, 0.0), abs(float(v) - float(rb[k])))
    out = {"shared_times": shared_times, "series_max_abs_diff": diffs}
    da, db = a.density, b.density
    if da is not None and db is not None:
        if da.grid == db.grid:
            out["density_l1"] = float(np.abs(da.values - db.values).sum() * da.grid.cell_volume)
        elif da.grid.has("q") and db.grid.has("q") and da.grid.axis("q") == db.grid.axis("q"):
            ma, mb = (_q_marginal(d) for d in (da, db))
            out["q_marginal_l1"] = float(np.abs(ma - mb).sum() * da.grid.axis("q").spacing)
    return out


def _q_marginal(f) -> np.ndarray:
    g = f.grid
    other = tuple(i for i, n in enumerate(g.names) if n != "q")
    vol = float(np.prod([g.axis(n).spacing for n in g.names if n != "q"])) if other else 1.0
    return f.values.sum(axis=other) * vol if other else f.values


def cmd_compare(args) -> int:
    ca = _load(args.config_a, args.resolution_scale)
    cb = _load(args.config_b, args.resolution_scale)
    out = Path(args.out) / f"compare_{ca.name}__{cb.name}"
    try:
        ra, rb = runner.run(ca), runner.run(cb)
    except NumericalAbort as exc:
        return _abort(exc, out, f"{ca.name} vs {cb.name}")
    rep = {"schema_version": runner.SCHEMA_VERSION, "a": ca.name, "b": cb.name, **compare_results(ra, rb)}
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.json").write_text(dumps(rep))
    print(dumps(rep), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    rep = verify.run_suite(args.suite, seed=args.seed)
    text = dumps(rep)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"verify_{args.suite}.json").write_text(text)
    for c in rep["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['suite']}: {c['name']}")
    print(f"{args.suite}: {'all passed' if rep['passed'] else 'FAILED'}")
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--resolution-scale", type=float, default=1.0,
                        help="multiply the points on every grid axis")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for the polynomial battery")
    common.add_argument("--format", choices=("csv", "json"), default="json", help="time-series format")
    ap = argparse.ArgumentParser(prog="hybridmech", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", parents=[common], help="run a scenario file or shipped scenario name")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    p.add_argument("suite", choices=("classical", "algebra", "hybrid", "bridge", "all"))
    p.set_defaults(func=cmd_verify, out=None)
    p = sub.add_parser("compare", parents=[common], help="run two scenarios and diff their outputs")
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("bridge", parents=[common], help="decompose a phase-space scenario into a mixture")
    p.add_argument("config")
    p.set_defaults(func=cmd_bridge)
    p = sub.add_parser("list", help="list the shipped scenarios")
    p.set_defaults(func=lambda a: print("\n".join(cfgmod.catalog())) or EXIT_OK)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
