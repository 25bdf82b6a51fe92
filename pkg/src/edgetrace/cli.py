"""Command line front end: ``edgetrace run | validate | bench``.

Exit codes: 0 ok, 2 bad input, 3 validation failure, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import _backend, bench, scenes, validation
from .config import SimulationConfig
from .geometry import Scene, load_obj

EXIT_OK, EXIT_INPUT, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("edgetrace")


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def parse_point(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse point {text!r}; expected x,y,z")
    if len(vals) != 3 or not np.all(np.isfinite(vals)):
        raise InputError(f"point {text!r} needs three finite coordinates")
    return np.array(vals)


def load_scene(scene_arg: str, config: SimulationConfig):
    """``builtin:NAME`` or an OBJ path; returns (scene, default source, default listener)."""
    if scene_arg.startswith("builtin:"):
        try:
            b = scenes.get(scene_arg.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(str(exc.args[0]))
        bc = b.bc_of_material()
        bc.update(config.bc_of_material())
        return Scene(b.mesh, bc, emission=config.emission), b.source, b.listener
    path = Path(scene_arg)
    if not path.is_file():
        raise InputError(f"scene file {scene_arg!r} not found")
    try:
        mesh = load_obj(path)
    except (OSError, UnicodeDecodeError, ValueError) as exc:
        raise InputError(f"cannot read scene: {exc}")
    return Scene(mesh, config.bc_of_material(), emission=config.emission), None, None


def build_config(args) -> SimulationConfig:
    try:
        cfg = SimulationConfig.from_file(args.config) if args.config else SimulationConfig()
        over = {k: getattr(args, k) for k in ("samples", "seed", "workers")
                if getattr(args, k, None) is not None}
        return cfg.replace(**over) if over else cfg
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"bad configuration: {exc}")


def _positions(args, src0, lst0):
    src = parse_point(args.source) if args.source else src0
    lst = parse_point(args.listener) if args.listener else lst0
    if src is None or lst is None:
        raise InputError("--source and --listener are required for scene files")
    return src, lst


def cmd_run(args) -> int:
    cfg = build_config(args)
    scene, s0, l0 = load_scene(args.scene, cfg)
    src, lst = _positions(args, s0, l0)
    from .transport import simulate
    ir = simulate(scene, src, lst, cfg)
    p = ir.pressure
    if not np.all(np.isfinite(p)) or not np.all(np.isfinite(ir.variance)):
        log.error("non-finite amplitudes in the impulse response")
        return EXIT_NUMERIC
    if not np.any(p):
        log.error("no valid path reached the listener")
        return EXIT_VALIDATION
    ir.to_csv(args.out)
    if args.wav:
        ir.to_wav(args.wav)
    log.info("wrote %s (%d bins, %d samples, %d edges)", args.out, ir.nbins, cfg.samples,
             len(scene.edges))
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        results = validation.run_suite(args.suite)
    except KeyError as exc:
        raise InputError(str(exc.args[0]))
    for r in results:
        print(r.line(), file=sys.stderr if args.out is None else sys.stdout)
    report = {"suite": args.suite, "passed": all(r.passed for r in results),
              "compiled": _backend.COMPILED, "checks": [r.as_dict() for r in results]}
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_bench(args) -> int:
    cfg = build_config(args)
    scene, s0, l0 = load_scene(args.scene, cfg)
    src, lst = _positions(args, s0, l0)
    cfg = cfg.replace(workers=1)
    half, full, ratio = bench.scaling(scene, src, lst, cfg, args.repeats)
    report = {"scene": args.scene, "samples": cfg.samples, "triangles": len(scene.mesh.triangles),
              "edges": len(scene.edges), "ms_per_ir": full * 1e3,
              "ms_per_ir_half_samples": half * 1e3, "scaling_ratio": ratio,
              "budget_ms": bench.BUDGET_MS, "within_budget": full * 1e3 <= bench.BUDGET_MS,
              "reference_ms": bench.REFERENCE_BOXES_MS}
    if not args.no_pure:
        timings, speedup, agree = bench.compare_backends(scene, src, lst, cfg)
        report["backends"] = {k: {"samples": t.samples, "seconds": t.seconds,
                                  "us_per_sample": t.per_sample_us} for k, t in timings.items()}
        report["speedup"] = speedup
        report["backend_max_rel_diff"] = agree
    print(f"{args.scene}: {full * 1e3:.1f} ms per IR at {cfg.samples} samples "
          f"(budget {bench.BUDGET_MS:.0f} ms, reference {bench.REFERENCE_BOXES_MS:.0f} ms); "
          f"half-sample ratio {ratio:.2f}", file=sys.stderr)
    if report.get("speedup"):
        print(f"compiled kernels are {report['speedup']:.0f}x faster per sample than pure "
              f"Python", file=sys.stderr)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edgetrace",
                                 description="Monte Carlo edge-diffraction impulse responses")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_required):
        p.add_argument("--scene", required=True, help="OBJ path or builtin:NAME "
                       f"({', '.join(sorted(scenes.BUILTINS))})")
        p.add_argument("--config", help="INI-style configuration file")
        p.add_argument("--source", help="x,y,z (defaults to the builtin's source)")
        p.add_argument("--listener", help="x,y,z (defaults to the builtin's listener)")
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out", required=out_required)

    run = sub.add_parser("run", help="simulate one impulse response")
    common(run, True)
    run.add_argument("--wav", help="also write a normalised 16-bit WAV")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="run an oracle comparison suite")
    val.add_argument("suite", choices=sorted(validation.SUITES))
    val.add_argument("--out", help="write the JSON report here instead of stdout")
    val.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="time simulations and compare kernel backends")
    common(b, False)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--no-pure", action="store_true", help="skip the pure-Python timing")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (FloatingPointError, ArithmeticError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
