"""Command-line driver: ``validate``, ``solve`` and ``compare``.

Output tables use fixed headers and report cost in USD/month, time in
minutes and emissions in kg CO2/month. Floats are written with 17
significant digits so that re-reading a CSV reproduces the exact doubles.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from .engine import (
    Classification,
    EvaluatedPoint,
    GridEvaluationError,
    dominance_matrix,
    evaluate_grid,
    monetized_front,
    pareto_front,
    query_budget,
)
from .lp import LpError, available_kernels
from .poset import LabeledPoint
from .scenario import ScenarioError, load_scenario, validate_scenario
from .units import mps_to_mph

THREADS_ENV = "IAMOD_CODESIGN_THREADS"

POINT_COLUMNS = [
    "speed_mph",
    "speed_mps",
    "fleet_size",
    "train_factor",
    "n_trains",
    "cost_usd_per_month",
    "time_min",
    "emissions_kg_per_month",
    "vehicles_employed",
    "classification",
]
FRONT_COLUMNS = POINT_COLUMNS[:-1]
MONETIZED_COLUMNS = [
    "rank",
    "cost_usd_per_month",
    "time_min",
    "speed_mph",
    "fleet_size",
    "train_factor",
]
COMPARISON_COLUMNS = ["series"] + MONETIZED_COLUMNS


class MissingArtifact(FileNotFoundError):
    """A run directory lacks one of the files written by ``solve``."""


class RunMismatch(ValueError):
    """Runs passed to ``compare`` were produced from different networks or rates."""


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_float(s: str) -> float:
    return float(s)


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def point_record(p: EvaluatedPoint, n_trains: int) -> dict[str, Any]:
    d = p.design
    r = p.resources
    employed = p.flow.n_v_e if p.flow is not None and p.flow.optimal else math.inf
    rec = {
        "speed_mph": round(mps_to_mph(d.v_a), 9),
        "speed_mps": d.v_a,
        "fleet_size": d.n_v_max,
        "train_factor": str(d.train_factor),
        "n_trains": n_trains,
        "cost_usd_per_month": r.cost,
        "time_min": r.time / 60.0,
        "emissions_kg_per_month": r.emissions,
        "vehicles_employed": employed,
    }
    if p.classification is not None:
        rec["classification"] = p.classification.value
    return rec


def _csv_text(columns: Sequence[str], records: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([fmt_float(rec[c]) if isinstance(rec[c], float) else rec[c] for c in columns])
    return buf.getvalue()


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _json_records(columns: Sequence[str], records: Sequence[dict]) -> list[dict]:
    return [{c: _json_value(rec[c]) for c in columns} for rec in records]


def parse_budget(text: str) -> tuple[float, float, float]:
    """``"cost,time,emissions"`` in USD/month, minutes, kg/month (``inf`` allowed)."""
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("budget must be 'cost,time,emissions'")
    try:
        values = [float(s) for s in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad budget value: {exc}") from None
    if any(math.isnan(v) or v < 0 for v in values):
        raise argparse.ArgumentTypeError("budget components must be >= 0 (or inf)")
    return values[0], values[1], values[2]


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"error: {THREADS_ENV}={raw!r} is not an integer")
    return max(1, n)


# --- commands ---------------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    report = validate_scenario(args.scenario)
    print(report.format())
    return 0 if report.ok else 1


def solve_scenario(
    scenario_path: str | Path,
    out_dir: str | Path,
    *,
    threads: int = 1,
    fmt: str = "csv",
    budget: tuple[float, float, float] | None = None,
    kernel: str | None = None,
) -> dict[str, Any]:
    """Run the grid sweep and write every artifact; returns the summary dict."""
    from .design import subway_dp

    start = time.perf_counter()
    scenario = load_scenario(scenario_path)
    points = evaluate_grid(scenario, threads=threads, kernel=kernel)
    front = pareto_front(points)
    mfront = monetized_front(front, scenario.monetization_rate)

    trains = {f: subway_dp(f, scenario.subway_catalog).n_trains for f in scenario.grid.train_factors}
    records = [point_record(p, trains[p.design.train_factor]) for p in points]
    front_pts = sorted(
        (lp.label for lp in front),
        key=lambda p: (p.resources.cost, p.resources.time, p.resources.emissions),
    )
    front_records = [point_record(p, trains[p.design.train_factor]) for p in front_pts]
    mrecords = []
    for rank, lp in enumerate(mfront.sorted()):
        d = lp.label.design
        mrecords.append({
            "rank": rank,
            "cost_usd_per_month": lp.resources[0],
            "time_min": lp.resources[1] / 60.0,
            "speed_mph": round(mps_to_mph(d.v_a), 9),
            "fleet_size": d.n_v_max,
            "train_factor": str(d.train_factor),
        })

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        (out / "points.csv").write_text(_csv_text(POINT_COLUMNS, records))
        (out / "front.csv").write_text(_csv_text(FRONT_COLUMNS, front_records))
    else:
        (out / "points.json").write_text(_json_text({"points": _json_records(POINT_COLUMNS, records)}))
        (out / "front.json").write_text(_json_text({"front": _json_records(FRONT_COLUMNS, front_records)}))
    (out / "front_monetized.csv").write_text(_csv_text(MONETIZED_COLUMNS, mrecords))

    counts = {c.value: 0 for c in Classification}
    for p in points:
        counts[p.classification.value] += 1
    summary: dict[str, Any] = {
        "scenario": scenario.name,
        "network_hash": scenario.network_hash(),
        "alpha_tot_per_s": scenario.alpha_tot,
        "alpha_tot_per_h": scenario.alpha_tot * 3600.0,
        "grid_size": len(points),
        "grid_axes": {
            "speed_mph": [round(mps_to_mph(v), 9) for v in scenario.grid.speeds],
            "fleet_size": list(scenario.grid.fleet_sizes),
            "train_factor": [str(f) for f in scenario.grid.train_factors],
        },
        "counts": counts,
        "front_size": len(front),
        "monetized_front_size": len(mfront),
        "monetization_rate_usd_per_kg": scenario.monetization_rate,
        "budget": None,
    }
    if budget is not None:
        c_max, t_max, e_max = budget
        chosen = query_budget(front, (c_max, t_max * 60.0, e_max))
        summary["budget"] = {
            "cost_usd_per_month": _json_value(c_max),
            "time_min": _json_value(t_max),
            "emissions_kg_per_month": _json_value(e_max),
            "selection": None if chosen is None else _json_records(
                FRONT_COLUMNS, [point_record(chosen, trains[chosen.design.train_factor])]
            )[0],
        }
    summary["wall_time_s"] = time.perf_counter() - start
    (out / "summary.json").write_text(_json_text(summary))
    return summary


def cmd_solve(args: argparse.Namespace) -> int:
    summary = solve_scenario(
        args.scenario,
        args.out,
        threads=args.threads,
        fmt=args.format,
        budget=args.budget,
        kernel=args.kernel,
    )
    counts = ", ".join(f"{k}={v}" for k, v in summary["counts"].items())
    print(f"{summary['scenario']}: {summary['grid_size']} designs ({counts}) in {summary['wall_time_s']:.2f} s")
    print(f"front: {summary['front_size']} points, monetized: {summary['monetized_front_size']}")
    if summary["budget"] is not None:
        sel = summary["budget"]["selection"]
        if sel is None:
            print("budget: no front element fits")
        else:
            print(
                f"budget: {sel['speed_mph']:g} mph, {sel['fleet_size']} vehicles, factor {sel['train_factor']}"
                f" -> {sel['time_min']:.3f} min at {sel['cost_usd_per_month']:.0f} USD/month"
            )
    print(f"wrote {args.out}")
    return 0


def _read_run(run_dir: Path) -> tuple[dict, list[dict]]:
    summary_path = run_dir / "summary.json"
    front_path = run_dir / "front_monetized.csv"
    for p in (summary_path, front_path):
        if not p.is_file():
            raise MissingArtifact(f"run directory {run_dir} has no {p.name}")
    summary = json.loads(summary_path.read_text())
    with front_path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return summary, rows


def compare_runs(run_dirs: Sequence[str | Path], out_dir: str | Path) -> dict[str, Any]:
    """Overlay the monetized fronts of several runs and report dominance."""
    if len(run_dirs) < 2:
        raise ValueError("compare needs at least two run directories")
    runs = []
    names: list[str] = []
    for rd in run_dirs:
        rd = Path(rd)
        summary, rows = _read_run(rd)
        name = rd.name or str(rd)
        k = 2
        while name in names:
            name = f"{rd.name}#{k}"
            k += 1
        names.append(name)
        runs.append((name, summary, rows))

    hashes = {s["network_hash"] for _, s, _ in runs}
    if len(hashes) != 1:
        detail = ", ".join(f"{n}={s['network_hash'][:12]}" for n, s, _ in runs)
        raise RunMismatch(f"scenario hash mismatch; runs were solved on different networks ({detail})")
    rates = {s["monetization_rate_usd_per_kg"] for _, s, _ in runs}
    if len(rates) != 1:
        raise RunMismatch(f"runs use different monetization rates: {sorted(rates)}")

    series = {}
    long_rows = []
    for name, _, rows in runs:
        pts = []
        for row in rows:
            pts.append(LabeledPoint(
                (parse_float(row["cost_usd_per_month"]), parse_float(row["time_min"])), row
            ))
            long_rows.append({"series": name, **row})
        series[name] = pts
    dominance = dominance_matrix(series)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COMPARISON_COLUMNS, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(long_rows)
    (out / "comparison.csv").write_text(buf.getvalue())
    report = {
        "network_hash": hashes.pop(),
        "monetization_rate_usd_per_kg": rates.pop(),
        "series": [{"name": n, "points": len(series[n]), "run_dir": str(rd)} for n, rd in zip(names, run_dirs)],
        "dominance": [{"a": a, "b": b, "a_covers_b": v} for (a, b), v in dominance.items()],
    }
    (out / "comparison.json").write_text(_json_text(report))
    return report


def cmd_compare(args: argparse.Namespace) -> int:
    report = compare_runs(args.run_dirs, args.out)
    for s in report["series"]:
        print(f"series {s['name']}: {s['points']} points")
    for d in report["dominance"]:
        rel = "covers" if d["a_covers_b"] else "does not cover"
        print(f"{d['a']} {rel} {d['b']}")
    print(f"wrote {Path(args.out) / 'comparison.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iamod-codesign",
        description="Co-design of intermodal autonomous mobility-on-demand systems over a design grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file and list every violation")
    p.add_argument("scenario", type=Path)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="evaluate the design grid and write result tables")
    p.add_argument("scenario", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads for the grid sweep (default ${THREADS_ENV} or 1)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--budget", type=parse_budget, default=None, metavar="C,T,E",
                   help="upper bounds in USD/month, minutes, kg/month; 'inf' allowed")
    p.add_argument("--kernel", choices=available_kernels(), default=None,
                   help="simplex kernel (default: compiled if available)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="overlay the monetized fronts of finished runs")
    p.add_argument("run_dirs", nargs="+", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 0) is None:
        args.threads = _default_threads()
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (GridEvaluationError, LpError, MissingArtifact, RunMismatch, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
