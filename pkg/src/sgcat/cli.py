"""Command-line entry point: ``sgcat <command> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .diagnostics.svm import SvmTrainingError
from .harness.batch import load_design, results_csv, run_batch_pairs
from .harness.bench import bench_report, load_reference, read_results
from .harness.cases import DEFAULT_RAMP, benchmark_design, benchmark_template
from .harness.lhs import LhsDesign, lhs_sample, load_bounds
from .harness.runner import Outcome, run_scenario
from .harness.scenario import ScenarioError, load_scenario, scenario_to_dict
from .harness.training import load_dataset, train_models

log = logging.getLogger("sgcat")

EXIT_RUN_FAILED = 1
EXIT_CONFIG = 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _scenario(args):
    s = load_scenario(args.scenario)
    if args.seed is not None:
        s = dataclasses.replace(s, seed=args.seed)
    return s


def cmd_simulate(args) -> int:
    s = _scenario(args)
    r = run_scenario(s, telemetry_path=args.telemetry, keep_telemetry=False)
    summary = {
        "name": r.name, "seed": r.seed, "outcome": r.outcome.value, "t_trip": r.t_trip,
        "t_insertion": r.t_insertion, "steps": r.steps, "telemetry": r.telemetry_path,
        "detectors": {d.value: {"t_first_alarm": r.t_first_alarm.get(d),
                                "false_positive": bool(r.false_positive.get(d))} for d in r.enabled},
    }
    if r.error:
        summary["error"] = r.error
    _emit(json.dumps(summary, indent=1) + "\n", args.out)
    if r.outcome is Outcome.ERROR:
        print(f"error: {r.error}", file=sys.stderr)
        return EXIT_RUN_FAILED
    return 0


def cmd_sample(args) -> int:
    params = load_bounds(args.bounds)
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    design: LhsDesign = lhs_sample(params, args.n, rng)
    _emit(json.dumps(design.to_dict(), indent=1) + "\n", args.out)
    return 0


def cmd_batch(args) -> int:
    s = _scenario(args)
    design = load_design(args.design)
    pairs = run_batch_pairs(s, design, parallelism=args.jobs, telemetry_dir=args.telemetry_dir)
    _emit(results_csv(pairs), args.out)
    failed = sum(r.outcome is Outcome.ERROR for _, r in pairs)
    if failed:
        print(f"{failed} of {len(pairs)} runs failed", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    spec, base = load_dataset(args.dataset)
    if args.seed is not None:
        spec = {**spec, "seed": args.seed}
    manifest = train_models(spec, base)
    _emit(json.dumps(manifest, indent=1) + "\n", args.out)
    return 0


def cmd_bench(args) -> int:
    reference = load_reference() if args.reference else None
    if args.results:
        records = read_results(args.results)
    elif reference is not None:
        records = reference
    else:
        print("error: give a results CSV, --reference, or both", file=sys.stderr)
        return EXIT_CONFIG
    report = bench_report(records, reference if args.results else None)
    _emit(report.render(), args.out)
    return 0


def cmd_cases(args) -> int:
    template = benchmark_template(ramp=args.ramp, seed=0 if args.seed is None else args.seed)
    Path(args.template).parent.mkdir(parents=True, exist_ok=True)
    Path(args.template).write_text(json.dumps(scenario_to_dict(template), indent=1) + "\n")
    Path(args.design).write_text(json.dumps(benchmark_design(template.control).to_dict(), indent=1) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the master seed")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sgcat", description="Steam-generator level-control attack testbed.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common], help="run one scenario")
    sp.add_argument("scenario")
    sp.add_argument("--telemetry", default=None, help="telemetry CSV path (overrides the scenario)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sample", parents=[common], help="draw a Latin hypercube design")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--bounds", required=True, help="JSON file with parameter bounds")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("batch", parents=[common], help="run a template scenario over a design")
    sp.add_argument("scenario")
    sp.add_argument("--design", required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--telemetry-dir", default=None)
    sp.set_defaults(func=cmd_batch)

    sp = sub.add_parser("train", parents=[common], help="train SVM and qSVM detectors")
    sp.add_argument("dataset")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("bench", parents=[common], help="detection benchmark report")
    sp.add_argument("results", nargs="?", default=None)
    sp.add_argument("--reference", action="store_true", help="compare against the bundled reference cases")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("cases", parents=[common], help="write the nine-case MiM template and design")
    sp.add_argument("--template", required=True)
    sp.add_argument("--design", required=True)
    sp.add_argument("--ramp", type=float, default=DEFAULT_RAMP)
    sp.set_defaults(func=cmd_cases)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, SvmTrainingError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED


if __name__ == "__main__":
    sys.exit(main())
