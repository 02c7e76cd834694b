"""Command-line driver: ``run`` executes a configured estimation run, ``export-plot`` writes CSV."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry as geo
from .config import RunConfig, load_config
from .errors import ConfigError, DegenerateFront, EmptyFront
from .oracle import exact_step
from .propagation import Front, propagate_front, seed_front
from .simulate import sample_disturbances, simulate

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_EMPTY, EXIT_DEGENERATE = 0, 1, 2, 3
CSV_COLUMNS = ("step", "kind", "seq", "x1", "x2", "dx1", "dx2")


# ---------------------------------------------------------------------------
# JSON with 17 significant digits
# ---------------------------------------------------------------------------

def _float_token(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps17(obj) -> str:
    """Compact JSON with every float written to 17 significant digits.

    The stdlib encoder always uses the shortest repr, so floats are emitted
    here and everything else is delegated to ``json.dumps``.
    """
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps17(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps17(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps17(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return _float_token(float(obj))
    if isinstance(obj, np.integer):
        return str(int(obj))
    return json.dumps(obj)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

class OracleTracker:
    """Oracle hook that advances the exact recursion one measurement at a time."""

    def __init__(self, sysm, start: geo.Polytope, steps_done: int, tol: float):
        self.sysm = sysm
        self.current = start
        self.steps = steps_done
        self.tol = tol

    def __call__(self, z_history: list[float]) -> geo.Polytope:
        while self.steps < len(z_history):
            nxt = exact_step(self.current, self.sysm, z_history[self.steps], self.tol)
            if nxt is None:
                raise EmptyFront(self.steps + 1, "exact recursion is empty")
            self.current = nxt
            self.steps += 1
        return self.current


@dataclass
class RunResult:
    report: dict
    exit_code: int


def _cone_record(point, cone: geo.SupportCone) -> dict:
    rec = {"point": np.asarray(point).tolist(), "generators": cone.generators.tolist()}
    if cone.interval is not None:
        rec["interval"] = list(cone.interval)
    return rec


def _step_record(front: Front, source: str, truth, oracle: geo.Polytope | None, bounds_check: bool) -> dict:
    P = front.polytope
    rec = {
        "k": front.k,
        "source": source,
        "z": front.z_history[-1],
        "vertices": P.vertices.tolist(),
        "boundary_points": [_cone_record(x, c) for x, c in front.boundary_points],
        "oracle": None if oracle is None else oracle.vertices.tolist(),
        "hausdorff_to_oracle": None if oracle is None else geo.hausdorff_polytopes(P, oracle),
        "defects": [] if front.diagnostics is None else [d.tolist() for d in front.diagnostics.defects],
        "true_state": None if truth is None else np.asarray(truth).tolist(),
        "true_state_inside": None,
    }
    if truth is not None and bounds_check:
        inside = P.contains(truth, 1e-9)
        rec["true_state_inside"] = inside
        if not inside:
            log.warning("step %d: true state lies outside the propagated set", front.k)
    return rec


def run(cfg: RunConfig) -> RunResult:
    sysm = cfg.system()
    tol = cfg.tolerances
    truth = None
    if cfg.seeded:
        v, w = sample_disturbances(cfg.measurements.seed, cfg.horizon, cfg.measurements.law)
        traj = simulate(sysm.plant, cfg.x0, v, w, sysm.est)
        z = [float(x) for x in traj.z]
        truth = traj.x
    else:
        z = list(cfg.measurements)
    report = {"config": cfg.to_dict(), "m": sysm.m, "measurements": z, "status": "ok",
              "halted_at": None, "steps": []}

    def truth_at(k):
        return None if truth is None else truth[k]

    def finish(status, k, code):
        report["status"] = status
        report["halted_at"] = k
        report["defect_count"] = sum(len(s["defects"]) for s in report["steps"])
        return RunResult(report, code)

    # warm-up: exact recursion until the set has interior
    try:
        front, exact = seed_front(sysm, cfg.x0, z, tol)
    except EmptyFront as exc:
        return finish("empty_front", exc.k, EXIT_EMPTY)
    except DegenerateFront as exc:
        return finish("degenerate_front", exc.k, EXIT_DEGENERATE)
    for j, S in enumerate(exact[:-1], start=1):
        warm = Front(S, [], j, z[:j])
        report["steps"].append(_step_record(warm, "exact", truth_at(j), S if cfg.oracle else None, cfg.bounds_check))
    report["steps"].append(_step_record(front, "exact", truth_at(front.k), front.polytope if cfg.oracle else None,
                                        cfg.bounds_check))
    hook = OracleTracker(sysm, front.polytope, front.k, tol.geom) if cfg.oracle else None
    while front.k < cfg.horizon:
        try:
            front = propagate_front(front, z[front.k], sysm, tol, cfg.sample_density, hook)
        except EmptyFront as exc:
            return finish("empty_front", exc.k, EXIT_EMPTY)
        except DegenerateFront as exc:
            return finish("degenerate_front", exc.k, EXIT_DEGENERATE)
        oracle = front.diagnostics.oracle if front.diagnostics is not None else None
        report["steps"].append(_step_record(front, "propagated", truth_at(front.k), oracle, cfg.bounds_check))
    return finish("ok", None, EXIT_OK)


def write_run(result: RunResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dumps17(result.report) + "\n")
    with open(out_dir / "steps.jsonl", "w") as fh:
        for rec in result.report["steps"]:
            fh.write(dumps17(rec) + "\n")


# ---------------------------------------------------------------------------
# plot export
# ---------------------------------------------------------------------------

def plot_rows(report: dict) -> list[list]:
    """Rows of the plot CSV: closed vertex loops, oracle loops and cone rays per step."""
    rows: list[list] = []

    def loop(step, kind, verts):
        verts = [list(v) for v in verts]
        if verts and len(verts[0]) == 2 and len(verts) > 2:
            verts = verts + [verts[0]]
        for i, v in enumerate(verts):
            rows.append([step, kind, i, v[0], v[1] if len(v) > 1 else "", "", ""])

    for rec in report.get("steps", []):
        k = rec["k"]
        loop(k, "vertex", rec["vertices"])
        if rec.get("oracle") is not None:
            loop(k, "oracle", rec["oracle"])
        seq = 0
        for bp in rec.get("boundary_points", []):
            p = bp["point"]
            for g in bp["generators"]:
                rows.append([k, "ray", seq, p[0], p[1] if len(p) > 1 else "", g[0], g[1] if len(g) > 1 else ""])
                seq += 1
    return rows


def export_plot(report_path: Path, out_dir: Path) -> Path:
    report = json.loads(Path(report_path).read_text()) if Path(report_path).stat().st_size else {}
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "plot.csv"
    with open(target, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in plot_rows(report):
            writer.writerow([_float_token(c) if isinstance(c, float) else c for c in row])
    return target


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exactsme", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="propagate the uncertainty set for a configured run")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, required=True)
    p_run.add_argument("--oracle", action="store_true", help="reconcile every step against the exact recursion")
    p_run.add_argument("--seed", type=int, default=None, help="override the measurement seed")
    p_plot = sub.add_parser("export-plot", help="write plot.csv from a run report")
    p_plot.add_argument("report", type=Path)
    p_plot.add_argument("--out", type=Path, required=True)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "export-plot":
        path = export_plot(args.report, args.out)
        print(path)
        return EXIT_OK
    try:
        cfg = load_config(args.config).with_overrides(oracle=True if args.oracle else None, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run(cfg)
    write_run(result, args.out)
    rep = result.report
    print(f"status={rep['status']} steps={len(rep['steps'])} defects={rep['defect_count']} out={args.out}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
