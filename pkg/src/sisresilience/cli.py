"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 bracket failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .errors import BracketError, InvalidSpecError, ScenarioParseError, ScenarioValidationError
from .io import (
    MANIFEST_NAME,
    build_manifest,
    replay_manifest,
    run_scenario,
    verify_manifest,
    write_json,
    write_plot_script,
)
from .scenario import FIGURES, load_scenario, reproduce, serialize_scenario
from .sweeps import estimate_threshold, sweep

EXIT_OK, EXIT_VALIDATION, EXIT_BRACKET, EXIT_IO = 0, 2, 3, 4


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, help="override master seed")
    common.add_argument("--replicates", type=_positive, help="override replicate count")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--workers", type=_positive, default=1, help="threads for replicate batches")
    common.add_argument("--backend", choices=("numba", "numpy"), help="force a kernel backend")

    p = argparse.ArgumentParser(prog="sisres", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate a scenario").add_argument("scenario", type=Path)
    sub.add_parser("sweep", parents=[common], help="grid sweep over one parameter").add_argument("sweep_file", type=Path)
    sub.add_parser("threshold", parents=[common], help="bisect a critical parameter").add_argument("sweep_file", type=Path)
    sub.add_parser("reproduce", parents=[common], help="run a figure preset").add_argument("figure", choices=FIGURES)
    sub.add_parser("replay", parents=[common], help="re-run a manifest and compare checksums").add_argument(
        "manifest", type=Path)
    sub.add_parser("verify", parents=[common], help="check output checksums").add_argument("directory", type=Path)
    return p


def _load(path, args):
    sc = load_scenario(path)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    return dataclasses.replace(sc, **changes) if changes else sc


def _out_dir(args, sc):
    return Path(args.out or sc.output_dir or f"out/{sc.name}")


def _summarize(reports, echo):
    res = np.array([r.resilience for r in reports])
    erad = [r.eradication_time for r in reports if r.eradication_time is not None]
    echo(f"replicates={len(reports)} mean_R={res.mean():.6f} eradicated={len(erad)}/{len(reports)} "
         f"mean_peak={np.mean([r.peak_infected for r in reports]):.1f}")


def cmd_run(args, echo):
    sc = _load(args.scenario, args)
    _, reports, out = run_scenario(sc, _out_dir(args, sc), base_dir=args.scenario.parent,
                                   backend=args.backend, quiet=args.quiet, log=echo)
    _summarize(reports, echo)
    echo(f"wrote {out}")


def cmd_reproduce(args, echo):
    kw = {}
    if args.seed is not None:
        kw["master_seed"] = args.seed
    if args.replicates is not None:
        kw["replicates"] = args.replicates
    sc = reproduce(args.figure, **kw)
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{sc.name}.toml").write_text(serialize_scenario(sc), encoding="utf-8")
    plot = write_plot_script(out, sc.name, show_omega=sc.params.w_global > 0, xscale="log")
    _, reports, out = run_scenario(sc, out, backend=args.backend, quiet=args.quiet, log=echo,
                                   extra_files=[plot, out / f"{sc.name}.toml"])
    _summarize(reports, echo)
    for note in sc.assumptions:
        echo(f"assumption: {note}")
    echo(f"wrote {out}")


def cmd_sweep(args, echo):
    sc = _load(args.sweep_file, args)
    spec = sc.sweep_spec(base_dir=args.sweep_file.parent)
    rows = sweep(spec, backend=args.backend, workers=args.workers)
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("value", "survival", "mean_resilience", "mean_peak", "mean_eradication_time"))
        for r in rows:
            w.writerow((repr(r.value), repr(r.survival), repr(r.mean_resilience), repr(r.mean_peak),
                        repr(r.mean_eradication_time)))
            echo(f"{spec.axis}={r.value:g} survival={r.survival:.3f} R={r.mean_resilience:.6f} "
                 f"peak={r.mean_peak:.1f} erad={r.mean_eradication_time:.1f}")
    write_json(out / MANIFEST_NAME, build_manifest(sc, [path], out))
    echo(f"wrote {out}")


def cmd_threshold(args, echo):
    sc = _load(args.sweep_file, args)
    spec = sc.sweep_spec(base_dir=args.sweep_file.parent)
    est = estimate_threshold(spec, backend=args.backend, workers=args.workers)
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "threshold.json"
    write_json(path, {
        "axis": est.axis,
        "estimate": est.estimate,
        "bracket_final": list(est.bracket_final),
        "survival_lo": est.survival_lo,
        "survival_hi": est.survival_hi,
        "replicates_used": est.replicates_used,
        "iterations": est.iterations,
        "history": [list(h) for h in est.history],
    })
    write_json(out / MANIFEST_NAME, build_manifest(sc, [path], out))
    echo(f"{est.axis}_c ~= {est.estimate:.5f} bracket=({est.bracket_final[0]:.5f}, {est.bracket_final[1]:.5f}) "
         f"survival=({est.survival_lo:.2f}, {est.survival_hi:.2f})")


def cmd_replay(args, echo):
    bad = replay_manifest(args.manifest, base_dir=args.manifest.parent, backend=args.backend)
    if bad:
        echo("mismatched: " + ", ".join(bad))
        return 1
    echo("replay identical")


def cmd_verify(args, echo):
    bad = verify_manifest(args.directory)
    if bad:
        echo("checksum mismatch: " + ", ".join(bad))
        return 1
    echo("checksums verified")


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "threshold": cmd_threshold, "reproduce": cmd_reproduce,
            "replay": cmd_replay, "verify": cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    echo = (lambda *a, **k: None) if args.quiet else print
    try:
        return COMMANDS[args.command](args, echo) or EXIT_OK
    except (ScenarioParseError, ScenarioValidationError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
