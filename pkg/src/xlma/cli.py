"""Command-line front end: plan, sweep, map, validate, benchmark.

All computation is linear-unit internally; dB/dBm appear only in configs and
outputs. Every command is deterministic given (config, seed): outputs carry
no timestamps, and sweep/map CSVs are written in a fixed ordering.

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .benchmarks import BENCHMARK_KINDS, fpa_layout
from .channel import ArrayLayout
from .errors import ConfigurationError, DomainError
from .montecarlo import MapRequest, SimOptions, correlation_map, power_gain_map, \
    simulate_weighted_sum_rate
from .pipeline import ScenarioContext, context_from_document
from .presets import PRESETS
from .scenario import dbm_to_mw, mw_to_dbm

SWEEP_PARAMETERS = ("m_h", "ma_width", "expected_users", "rician_db")
SWEEP_SCHEMES = ("proposed", "optimal") + BENCHMARK_KINDS
SWEEP_EVALUATORS = ("approx_mrc", "sim_mrc", "sim_mmse", "upper_bound")
EXHAUSTIVE_LIMIT = 10_000_000


def _load_document(args) -> dict:
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigurationError(
                f"unknown preset {args.preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        return PRESETS[args.preset]()
    if args.config:
        return json.loads(Path(args.config).read_text())
    raise ConfigurationError("either --config or --preset is required")


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


def cmd_plan(args) -> int:
    doc = _load_document(args)
    ctx = context_from_document(doc)
    result = ctx.plan()
    payload = {
        "n_mu": [int(i) for i in result.n_mu],
        "chi": [int(v) for v in result.chi],
        "phi_rows": {str(slot): int(cand) for slot, cand in enumerate(result.n_mu)},
        "objective": result.objective,
        "lp": {
            "objective": result.lp.objective,
            "penalty_fallback": result.lp.penalty_fallback,
            "iterations": result.lp.result.iterations,
        },
        "trace": result.trace,
        "rng_seed": ctx.scenario.rng_seed,
    }
    _write_json(args.out, payload)
    if args.trace_jsonl:
        with Path(args.trace_jsonl).open("w") as fh:
            for record in result.trace:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"plan written to {args.out} (objective {result.objective:.6f} bits/s/Hz)")
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _apply_parameter(doc: dict, parameter: str, value) -> dict:
    out = json.loads(json.dumps(doc))
    if parameter == "m_h":
        out["m_h"] = int(value)
    elif parameter == "ma_width":
        ma = out["ma_region"]
        step = (ma["y_max"] - ma["y_min"]) / ma["n_y"]
        n_y = int(round(value / step))
        if n_y < 1:
            raise ConfigurationError(f"ma_width {value} too small for step {step}")
        ma["y_min"], ma["y_max"], ma["n_y"] = -value / 2.0, value / 2.0, n_y
    elif parameter == "expected_users":
        out["distribution"]["expected_users"] = float(value)
    elif parameter == "rician_db":
        out["rician_kappa_db"] = float(value)
    else:
        raise ConfigurationError(
            f"unknown sweep parameter {parameter!r}; one of {SWEEP_PARAMETERS}"
        )
    return out


def _sweep_cell(ctx: ScenarioContext, scheme: str, evaluators, trials: int):
    """Rows (scheme, evaluator, rate, stderr, note) for one sweep cell."""
    rows = []
    try:
        if scheme == "optimal":
            import math

            n0 = ctx.scenario.ma_region.n_candidates
            count = math.comb(n0, ctx.scenario.n_subarrays)
            if count > EXHAUSTIVE_LIMIT:
                return [
                    (scheme, ev, "", "", f"skipped: C(N0,N)={count} exceeds limit")
                    for ev in evaluators
                ]
        placement = ctx.placement_for_scheme(scheme)
    except ConfigurationError as exc:
        return [(scheme, ev, "", "", f"skipped: {exc}") for ev in evaluators]

    for evaluator in evaluators:
        if evaluator == "approx_mrc":
            rows.append((scheme, evaluator, ctx.approx_weighted_sum(placement), "", ""))
        elif evaluator == "upper_bound":
            rows.append((scheme, evaluator, ctx.weighted_upper_bound(placement), "", ""))
        else:
            combiner = "mrc" if evaluator == "sim_mrc" else "mmse"
            est, err = simulate_weighted_sum_rate(
                ctx.scenario, placement, SimOptions(trials=trials, combiner=combiner)
            )
            rows.append((scheme, evaluator, est, err, ""))
    return rows


def cmd_sweep(args) -> int:
    doc = _load_document(args)
    spec = json.loads(Path(args.sweep).read_text())
    parameter = spec.get("parameter")
    values = spec.get("values", [])
    schemes = spec.get("schemes", [])
    evaluators = spec.get("evaluators", ["approx_mrc"])
    trials = int(spec.get("trials", 500))
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    if not values:
        raise ConfigurationError("sweep values must be nonempty")
    if not schemes:
        raise ConfigurationError("sweep schemes must be nonempty")
    for s in schemes:
        if s not in SWEEP_SCHEMES:
            raise ConfigurationError(f"unknown scheme {s!r}; one of {SWEEP_SCHEMES}")
    for e in evaluators:
        if e not in SWEEP_EVALUATORS:
            raise ConfigurationError(f"unknown evaluator {e!r}; one of {SWEEP_EVALUATORS}")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    contexts = [context_from_document(_apply_parameter(doc, parameter, v)) for v in values]
    cells = [(vi, si) for vi in range(len(values)) for si in range(len(schemes))]
    results = [None] * len(cells)

    def run_cell(ci):
        vi, si = cells[ci]
        return _sweep_cell(contexts[vi], schemes[si], evaluators, trials)

    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for ci, rows in enumerate(pool.map(run_cell, range(len(cells)))):
                results[ci] = rows
    else:
        for ci in range(len(cells)):
            results[ci] = run_cell(ci)

    tables = {ev: [] for ev in evaluators}
    for ci, (vi, _si) in enumerate(cells):
        for scheme, evaluator, rate, err, note in results[ci]:
            tables[evaluator].append((values[vi], scheme, evaluator, rate, err, note))

    for evaluator, rows in tables.items():
        path = out_dir / f"sweep_{evaluator}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "scheme", "evaluator", "rate", "stderr", "note"])
            for row in rows:
                writer.writerow([repr(row[0]) if isinstance(row[0], float) else row[0],
                                 row[1], row[2],
                                 repr(row[3]) if isinstance(row[3], float) else row[3],
                                 repr(row[4]) if isinstance(row[4], float) else row[4],
                                 row[5]])
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# map
# ---------------------------------------------------------------------------


def _write_map_csv(path, x, y, values) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x\\y"] + [repr(float(v)) for v in y])
        for i, xv in enumerate(x):
            writer.writerow([repr(float(xv))] + [repr(float(v)) for v in values[i]])


def cmd_map(args) -> int:
    doc = _load_document(args)
    spec = json.loads(Path(args.map_spec).read_text())
    kind = spec.get("kind")
    if kind not in ("power", "correlation"):
        raise ConfigurationError("map kind must be 'power' or 'correlation'")
    ctx = context_from_document(doc)
    scheme = spec.get("scheme", "proposed")
    if isinstance(scheme, dict) and "support" in scheme:
        placement = np.asarray(scheme["support"], int)
    else:
        placement = ctx.placement_for_scheme(scheme)
    if not isinstance(placement, ArrayLayout):
        from .channel import support_layout

        placement = support_layout(ctx.scenario, placement)

    probe = spec.get("probe_point")
    cov = ctx.scenario.coverage
    if probe is not None:
        px, py = float(probe[0]), float(probe[1])
        if not (cov.x_min <= px <= cov.x_max and cov.y_min <= py <= cov.y_max):
            raise ConfigurationError("probe_point outside the coverage region")
    placeholder_dbm = spec.get("blocked_placeholder_dbm")
    request = MapRequest(
        layout=placement,
        resolution=int(spec.get("resolution", 50)),
        probe_point=tuple(probe) if probe is not None else None,
        blocked_placeholder_gain=(
            None if placeholder_dbm is None else float(dbm_to_mw(placeholder_dbm))
        ),
        z_plane=spec.get("z_plane"),
    )
    if kind == "power":
        x, y, values = power_gain_map(ctx.scenario, request)
        values = mw_to_dbm(np.maximum(values, 1e-300))
    else:
        x, y, values = correlation_map(ctx.scenario, request)
    _write_map_csv(args.out, x, y, values)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    from .scenario import load_scenario
    from .validation import validate_scenario

    doc = _load_document(args)
    scenario = load_scenario(doc)
    checks = validate_scenario(scenario, draws=args.draws)
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.detail}")
        failed += 0 if check.passed else 1
    if failed:
        print(f"{failed} check(s) failed")
        return 1
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------


def cmd_benchmark(args) -> int:
    doc = _load_document(args)
    ctx = context_from_document(doc)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []

    plan = ctx.plan()
    support = np.asarray(plan.n_mu, int)
    rows.append(("proposed", ctx.approx_weighted_sum(support),
                 ctx.weighted_upper_bound(support), ""))
    from .channel import support_layout

    _write_json(out_dir / "layout_proposed.json",
                support_layout(ctx.scenario, support).to_json_dict())

    for kind in BENCHMARK_KINDS:
        try:
            layout = fpa_layout(kind, ctx.scenario)
        except ConfigurationError as exc:
            rows.append((kind, "", "", f"skipped: {exc}"))
            continue
        _write_json(out_dir / f"layout_{kind}.json", layout.to_json_dict())
        rows.append((kind, ctx.approx_weighted_sum(layout),
                     ctx.weighted_upper_bound(layout), ""))

    path = out_dir / "benchmarks.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "approx_mrc", "upper_bound", "note"])
        for scheme, rate, bound, note in rows:
            writer.writerow([scheme,
                             repr(rate) if isinstance(rate, float) else rate,
                             repr(bound) if isinstance(bound, float) else bound,
                             note])
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlma",
        description="Movable-subarray placement: optimize, simulate, and map.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="scenario JSON path")
        p.add_argument("--preset", help=f"preset name ({', '.join(sorted(PRESETS))})")

    p = sub.add_parser("plan", help="optimize a placement and write the plan JSON")
    add_config(p)
    p.add_argument("--out", required=True)
    p.add_argument("--trace-jsonl", help="also write the optimizer trace as JSON lines")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="evaluate schemes across a parameter sweep")
    add_config(p)
    p.add_argument("--sweep", required=True, help="sweep spec JSON path")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int, default=0,
                   help="parallel sweep cells (results are identical regardless)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("map", help="export a power-gain or correlation map CSV")
    add_config(p)
    p.add_argument("--map-spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("validate", help="run the built-in identity suite")
    add_config(p)
    p.add_argument("--draws", type=int, default=20000)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("benchmark", help="emit baseline layouts and their rates")
    add_config(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - unexpected runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
