"""Command-line runner.

    vssph run SCENE_FILE [--steps N] [--frames N] [--out-dir DIR] [--seed S]
                         [--warm-start] [--threads N]
    vssph scene NAME [--set key=value ...] [same flags as run]
    vssph calibrate [--dim 2] [--d0 1] [--h-ratio 2.5] [--kernel NAME] [--delta D]
    vssph kernels [--samples N]

``run`` and ``scene`` write ``metrics.csv`` and ``frame_XXXX.txt`` snapshots to
the output directory.  Exit status is 0 on success, 1 on a runtime or scene
error and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .calibration import calibrate
from .io import MetricsWriter, SceneFileError, format_scene, load_scene, parse_scene, write_snapshot
from .kernel import KernelFamily, make_kernel, stability_table
from .scenes import SCENES, build
from .solver import StepFailure

log = logging.getLogger("vssph")

THREADS_ENV = "VSSPH_THREADS"


def _add_run_flags(p):
    p.add_argument("--steps", type=int, help="stop after this many steps")
    p.add_argument("--frames", type=int, help="stop after this many snapshot frames")
    p.add_argument("--out-dir", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="override the scene seed")
    p.add_argument("--warm-start", action="store_true", help="start CG from the last pressure")
    p.add_argument("--threads", type=int, help=f"worker threads (also ${THREADS_ENV})")


def build_parser():
    parser = argparse.ArgumentParser(prog="vssph", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scene file")
    p.add_argument("scene_file")
    _add_run_flags(p)

    p = sub.add_parser("scene", help="run a built-in scene")
    p.add_argument("name", choices=sorted(SCENES))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a scene-file key (repeatable)")
    p.add_argument("--print", action="store_true", help="print the scene file and exit")
    _add_run_flags(p)

    p = sub.add_parser("calibrate", help="print the reference constants")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--d0", type=float, default=1.0)
    p.add_argument("--h-ratio", type=float, default=2.5)
    p.add_argument("--kernel", default="proposed_quartic", choices=[f.value for f in KernelFamily])
    p.add_argument("--delta", type=float)
    p.add_argument("--rho0", type=float, default=1000.0)

    p = sub.add_parser("kernels", help="stability indicator per kernel family")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--rows", type=int, default=6, help="table rows printed per family")
    return parser


def _apply_threads(n):
    n = n or (int(os.environ[THREADS_ENV]) if os.environ.get(THREADS_ENV) else None)
    if n is not None:
        if n < 1:
            raise ValueError("--threads must be at least 1")
        # numpy kernels here are single threaded; this only bounds BLAS pools
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)
    return n


def _simulate(cfg, args, out):
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.warm_start:
        cfg = replace(cfg, warm_start=True)
    _apply_threads(args.threads)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scene.txt").write_text(format_scene(cfg), encoding="utf-8")

    sim = build(cfg)
    consts = {k: getattr(sim.consts, k) for k in ("alpha0", "A0", "c0", "delta0c", "beta0")}
    log.info("N = %d, ghosts = %d, constants %s", sim.state.n, len(sim.ghosts), consts)
    metrics = MetricsWriter(out / "metrics.csv", cfg.shift_iterations, consts)

    frame = 0
    write_snapshot(sim, out / f"frame_{frame:04d}.txt")
    next_frame = cfg.frame_interval
    steps = 0
    while True:
        if args.steps is not None and steps >= args.steps:
            break
        if args.frames is not None and frame >= args.frames:
            break
        if args.steps is None and sim.state.t >= cfg.total_time - 1e-12:
            break
        dt = sim._next_dt()
        # land exactly on frame times
        dt = min(dt, next_frame - sim.state.t) if next_frame - sim.state.t > 1e-12 else dt
        info = sim.step(dt)
        metrics.append(info)
        steps += 1
        if sim.state.t >= next_frame - 1e-12:
            frame += 1
            write_snapshot(sim, out / f"frame_{frame:04d}.txt")
            next_frame += cfg.frame_interval
    write_snapshot(sim, out / "final.txt")
    print(f"{steps} steps, t = {sim.state.t:.6g} s, {frame} frames written to {out}")
    return 0


def _cmd_run(args):
    cfg, _ = load_scene(args.scene_file)
    return _simulate(cfg, args, args.out_dir)


def _cmd_scene(args):
    cfg = SCENES[args.name]()
    if args.set:
        text = format_scene(cfg)
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise SceneFileError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = (s.strip() for s in item.split("=", 1))
            overrides[key] = value
        # overridden keys replace the built-in lines; repeatable keys are replaced wholesale
        lines = [ln for ln in text.splitlines() if ln.split("=", 1)[0].strip() not in overrides]
        lines += [f"{k} = {v}" for k, v in overrides.items()]
        cfg = parse_scene("\n".join(lines), source=f"scene {args.name}")
    if args.print:
        sys.stdout.write(format_scene(cfg))
        return 0
    return _simulate(cfg, args, args.out_dir)


def _cmd_calibrate(args):
    kernel = make_kernel(args.kernel, args.d0, args.h_ratio, args.delta)
    c = calibrate(args.dim, args.d0, kernel, args.rho0)
    print(f"kernel  = {kernel.family.value}")
    print(f"dim     = {args.dim}")
    print(f"d0      = {args.d0:.10g}")
    print(f"h       = {kernel.h:.10g}")
    print(f"delta   = {kernel.delta:.10g}")
    for k in ("alpha0", "A0", "c0", "delta0c", "beta0", "lambda0", "kappa0"):
        print(f"{k:<7} = {getattr(c, k):.10g}")
    return 0


def _cmd_kernels(args):
    for fam in KernelFamily:
        spec = make_kernel(fam.value, 1.0, 2.5)
        r, om = stability_table(spec, args.samples)
        verdict = "stable" if np.all(om > 0) else "unstable"
        print(f"{fam.value}: {verdict} (min Omega = {om.min():.6g} at r/h = {r[om.argmin()] / spec.h:.4f})")
        idx = np.linspace(0, len(r) - 1, args.rows).astype(int)
        for k in idx:
            print(f"    r/h = {r[k] / spec.h:.4f}  Omega = {om[k]: .6g}")
    return 0


COMMANDS = {"run": _cmd_run, "scene": _cmd_scene, "calibrate": _cmd_calibrate,
            "kernels": _cmd_kernels}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SceneFileError, ValueError) as exc:
        print(f"vssph: error: {exc}", file=sys.stderr)
        return 1
    except StepFailure as exc:
        print(f"vssph: simulation failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"vssph: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
