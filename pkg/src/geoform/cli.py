"""Command-line entry point: ``geoform <subcommand>``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import dmd
from .harness import (MODES, ConfigError, ScenarioConfig, compare_modes, emit_metrics_json,
                      emit_steps_csv, generate_reference_csv, load_config, run_scenario)
from .sensors import CameraModel

log = logging.getLogger("geoform")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    if getattr(args, "track", None):
        cfg = cfg.with_track(args.track)
    if getattr(args, "mode", None):
        cfg = cfg.with_mode(MODES[args.mode])
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    logs, summary = run_scenario(cfg)
    emit_steps_csv(logs, out / "steps.csv")
    emit_metrics_json(summary, out / "metrics.json")
    log.info("wrote %d steps to %s", len(logs), out)
    return EXIT_OK


def cmd_reference(args) -> int:
    cfg = _config(args)
    generate_reference_csv(cfg, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    seeds = range(args.first_seed, args.first_seed + args.seeds)
    report = {track: compare_modes(cfg.with_track(track), seeds) for track in args.tracks}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def dmd_bench(dim: int = 2, steps: int = 200, noise: float = 0.01, seed: int = 0) -> dict:
    """Online-vs-batch gap and per-update timing on synthetic linear systems."""
    rng = np.random.default_rng(seed)
    out = {"dim": dim, "steps": steps, "cases": []}
    for label, sigma in (("exact", 0.0), ("noisy", noise)):
        # scaled orthogonal operator: persistently exciting, slowly decaying
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        M = 0.999 * q
        x = rng.normal(size=dim)
        xs = [x]
        for _ in range(dim + steps + 1):
            x = M @ x
            xs.append(x)
        X = np.array(xs).T + sigma * rng.normal(size=(dim, len(xs)))
        n0 = max(dim + 1, 3)
        st = dmd.init_online(X[:, :n0], X[:, 1:n0 + 1], ridge=0.0)
        t0 = time.perf_counter()
        for k in range(n0, n0 + steps):
            st = dmd.update(st, X[:, k], X[:, k + 1])
        per_update = (time.perf_counter() - t0) / steps
        T_batch = dmd.batch_fit(X[:, :n0 + steps], X[:, 1:n0 + steps + 1])
        out["cases"].append({
            "case": label,
            "frobenius_gap": float(np.linalg.norm(st.T - T_batch)),
            "operator_error": float(np.linalg.norm(st.T - M)),
            "seconds_per_update": per_update,
        })
    return out


def cmd_dmd_bench(args) -> int:
    report = dmd_bench(args.dim, args.steps, seed=args.seed)
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def camera_rows(cam: CameraModel):
    rows = []
    for du in (29.0, 32.0, 35.0):
        for dv in range(-10, 11):
            rows.append(("pan", du, float(dv), cam.pan_px(du, dv)))
    for du in range(24, 46):
        rows.append(("side", float(du), 0.0, cam.side_px(du)))
    return rows


def cmd_camera_table(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    path = Path(args.out)
    try:
        with path.open("w") as fh:
            fh.write("table,du,dv,value_px\n")
            for name, du, dv, px in camera_rows(cfg.camera):
                fh.write(f"{name},{du:.6f},{dv:.6f},{px:.6f}\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoform", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario, write steps.csv and metrics.json")
    sim.add_argument("--config")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--mode", choices=["dmd", "nondmd"])
    sim.add_argument("--track", choices=["one", "two"])
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    ref = sub.add_parser("reference", help="ideal leader and follower reference trajectory")
    ref.add_argument("--config")
    ref.add_argument("--track", choices=["one", "two"])
    ref.add_argument("--out", required=True)
    ref.set_defaults(func=cmd_reference)

    cmp_ = sub.add_parser("compare", help="DMD vs non-DMD correction ratio over seeds")
    cmp_.add_argument("--config")
    cmp_.add_argument("--tracks", nargs="+", default=["one", "two"], choices=["one", "two"])
    cmp_.add_argument("--seeds", type=int, default=10)
    cmp_.add_argument("--first-seed", type=int, default=1)
    cmp_.add_argument("--out")
    cmp_.set_defaults(func=cmd_compare)

    bench = sub.add_parser("dmd-bench", help="online vs batch DMD on synthetic systems")
    bench.add_argument("--dim", type=int, default=2)
    bench.add_argument("--steps", type=int, default=200)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_dmd_bench)

    cam = sub.add_parser("camera-table", help="noise-free pan and side-length tables")
    cam.add_argument("--config")
    cam.add_argument("--out", required=True)
    cam.set_defaults(func=cmd_camera_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
