#!/usr/bin/env python3
"""
Contextuality CLI - one entry point for the toolkit.

    python scripts/contextuality_cli.py bell --in scenarios/cats.json
    python scripts/contextuality_cli.py poll --in scenarios/poll_default.json --seed 7
    python scripts/contextuality_cli.py liar --in scenarios/liar_5.txt --grid 0:10pi:pi/20 --svg
    python scripts/contextuality_cli.py classify --in scenarios/sphere_fan_transitions.json
    python scripts/contextuality_cli.py kernel-validate --in scenarios/diamond_kernel.json

Exit codes: 0 success, 2 input error, 1 internal error.
"""

import argparse
import json
import sys
from pathlib import Path

from config import DEFAULT_OUTPUT_DIR, DEFAULT_TAU
from errors import ContextualityError, TransitionDataError
from rng import SEED_MASK
from bell_correlations import evaluate_bell_scenario, scenario_from_dict
from context_core import kernel_from_dict
from liar_dynamics import (
    build_step_matrix,
    cycle_structure,
    extract_hamiltonian,
    find_contradiction_times,
    is_paradoxical,
    parse_claim,
    parse_config,
    parse_grid,
    probability_trace,
)
from probability_structure import (
    classify_structure,
    transition_data_from_dict,
    transition_data_from_pairwise,
)
from reporting import RunManifest, write_csv, write_json, write_trace_svg
from sphere_epsilon import poll_config_from_dict, run_opinion_poll

DEFAULT_GRID = "0:10pi:pi/20"
DEFAULT_HYPOTHESIS = "1:true"


def read_input(path: str) -> bytes:
    """Raw bytes of an input file; the manifest digest is taken over these."""
    file_path = Path(path)
    if not file_path.is_file():
        raise ContextualityError(
            f"Input file not found: {path}",
            code="INPUT_NOT_FOUND",
            recovery="Check the --in path",
        )
    return file_path.read_bytes()


def parse_json_input(raw: bytes, path: str):
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ContextualityError(
            f"Invalid JSON in {path}: {e}",
            code="INVALID_JSON",
            recovery="Validate the file with a JSON linter",
        )


def output_dir(args) -> Path:
    out = Path(args.out) if args.out else DEFAULT_OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    return out


def finish(out: Path, subcommand: str, raw: bytes, seed=None) -> None:
    manifest = RunManifest.for_input(subcommand, raw, seed)
    write_json(out / "manifest.json", manifest.to_dict())
    print(f"📁 Outputs in {out}", file=sys.stderr)


def cmd_bell(args) -> int:
    """Evaluate the CHSH inequality on a scenario file."""
    raw = read_input(args.input)
    scenario = scenario_from_dict(parse_json_input(raw, args.input))
    report = evaluate_bell_scenario(scenario)

    out = output_dir(args)
    write_json(out / "bell_report.json", report.to_dict())
    finish(out, "bell", raw)

    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    print(report.summary())
    return 0


def cmd_poll(args) -> int:
    """Run the three-question opinion poll and classify its conditional table."""
    raw = read_input(args.input)
    config = poll_config_from_dict(
        parse_json_input(raw, args.input),
        seed=args.seed,
        epsilon=args.epsilon,
        population=args.population,
        workers=args.workers,
    )
    report = run_opinion_poll(config)

    out = output_dir(args)
    write_json(out / "poll_report.json", report.to_dict())
    write_csv(out / "census.csv", ["pattern", "count", "fraction"], report.census_rows())

    if report.unobserved_pairs:
        print(
            f"⚠️  {len(report.unobserved_pairs)} conditional row(s) never observed; "
            f"classification skipped",
            file=sys.stderr,
        )
        classification = {
            "verdict": None,
            "note": "conditional table has unobserved rows",
            "unobserved_pairs": report.unobserved_pairs,
        }
        verdict = "not classified"
    else:
        result = classify_structure(report.conditional)
        classification = result.to_dict()
        verdict = result.verdict
    write_json(out / "classification.json", classification)
    finish(out, "poll", raw, config.seed)

    yes = ", ".join(f"{p:.4f}" for p in report.marginal_yes)
    formed = ", ".join(f"{p:.4f}" for p in report.formed)
    print(f"✅ Poll of {report.population} (epsilon={report.epsilon:.6g}): "
          f"yes [{yes}], formed [{formed}], verdict {verdict}")
    return 0


def cmd_liar(args) -> int:
    """Continuous-time reasoning trace for a sentence configuration."""
    raw = read_input(args.input)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ContextualityError(f"{args.input} is not UTF-8 text: {e}", code="INVALID_TEXT")
    config = parse_config(text)
    hypothesis = parse_claim(args.hypothesis)
    times = parse_grid(args.grid)
    tau = DEFAULT_TAU if args.tau is None else args.tau

    step = build_step_matrix(config)
    operator = extract_hamiltonian(step, tau)
    trace = probability_trace(config, hypothesis, times, tau, operator=operator)
    contradictions = find_contradiction_times(trace, hypothesis)

    out = output_dir(args)
    write_csv(out / "trace.csv", ["time", "claim", "probability"], trace.rows())
    metadata = {
        **operator.metadata(),
        "m": config.m,
        "config": config.to_text(),
        "hypothesis": hypothesis.label,
        "grid": {"expression": args.grid, "points": int(times.size)},
        "cycle_structure": cycle_structure(step),
        "paradoxical": is_paradoxical(config),
        "contradiction_times": contradictions,
    }
    write_json(out / "metadata.json", metadata)
    if args.svg:
        series = {claim.label: trace.probability(claim) for claim in trace.basis}
        write_trace_svg(out / "trace.svg", trace.times, series,
                        title=f"m = {config.m}, hypothesis {hypothesis.label}")
        print(f"📊 Plot: {out / 'trace.svg'}", file=sys.stderr)
    finish(out, "liar", raw)

    kind = "paradoxical" if metadata["paradoxical"] else "consistent"
    print(f"✅ {config.m}-sentence chain ({kind}), cycles {metadata['cycle_structure']}, "
          f"{len(contradictions)} contradiction time(s)"
          + (f", first at t = {contradictions[0]:.6g}" if contradictions else ""))
    return 0


def cmd_classify(args) -> int:
    """Kolmogorovian / pure-quantum / both / neither for transition data."""
    raw = read_input(args.input)
    payload = parse_json_input(raw, args.input)
    if isinstance(payload, dict) and {"p12", "p13", "p23"} <= payload.keys() and "cond" not in payload:
        try:
            pairwise = [float(payload[key]) for key in ("p12", "p13", "p23")]
        except (TypeError, ValueError) as e:
            raise TransitionDataError(f"Pairwise probabilities must be numbers: {e}")
        data = transition_data_from_pairwise(*pairwise)
    else:
        data = transition_data_from_dict(payload)
    result = classify_structure(data)

    out = output_dir(args)
    write_json(out / "classification.json", result.to_dict())
    finish(out, "classify", raw)
    print(f"✅ Verdict: {result.verdict} (kolmogorov feasible: {result.kolmogorov.feasible}, "
          f"sphere-quantum: {result.quantum.feasible if result.quantum.applicable else 'n/a'})")
    return 0


def cmd_kernel_validate(args) -> int:
    """Validate a kernel file; invalid rows give exit code 2."""
    raw = read_input(args.input)
    kernel = kernel_from_dict(parse_json_input(raw, args.input))
    report = kernel.report

    out = output_dir(args)
    write_json(out / "validation_report.json", report.to_dict())
    finish(out, "kernel-validate", raw)

    if report.valid:
        print(f"✅ Kernel valid: {len(kernel.states)} states, {len(kernel.contexts)} contexts")
        return 0
    print(f"❌ Kernel invalid: {len(report.violations)} row(s)", file=sys.stderr)
    for violation in report.violations:
        print(f"   - source={violation.source!r} context={violation.context!r}: "
              f"{violation.reason} (sum={violation.row_sum!r})", file=sys.stderr)
    return 2


def seed_value(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= seed <= SEED_MASK:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return seed


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Contextuality toolkit - Bell, poll, liar and structure analyses")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    def add_common(p):
        p.add_argument("--in", dest="input", required=True, help="Input file")
        p.add_argument("--out", help="Output directory (default: $CONTEXTUALITY_OUTPUT_DIR or data/runs)")

    p = subparsers.add_parser("bell", help="CHSH evaluation of a Bell scenario")
    add_common(p)

    p = subparsers.add_parser("poll", help="Simulate the three-question opinion poll")
    add_common(p)
    p.add_argument("--seed", type=seed_value, help="64-bit seed (overrides the config)")
    p.add_argument("--epsilon", type=float, help="Breakable fraction of the elastic, 0..1")
    p.add_argument("--population", type=positive_int, help="Number of respondents")
    p.add_argument("--workers", type=positive_int, help="Worker threads")

    p = subparsers.add_parser("liar", help="Probability trace of the generalized liar paradox")
    add_common(p)
    p.add_argument("--hypothesis", default=DEFAULT_HYPOTHESIS, help="Initial claim, e.g. 1:true")
    p.add_argument("--tau", type=float, help="Duration of one reasoning step (default pi/2)")
    p.add_argument("--grid", default=DEFAULT_GRID, help="START:STOP:STEP, pi allowed (default 0:10pi:pi/20)")
    p.add_argument("--svg", action="store_true", help="Also write trace.svg")

    p = subparsers.add_parser("classify", help="Kolmogorovian / quantum classification of transition data")
    add_common(p)

    p = subparsers.add_parser("kernel-validate", help="Check a transition kernel file")
    add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    cmd_map = {
        "bell": cmd_bell,
        "poll": cmd_poll,
        "liar": cmd_liar,
        "classify": cmd_classify,
        "kernel-validate": cmd_kernel_validate,
    }

    try:
        return cmd_map[args.command](args)
    except ContextualityError as e:
        print(f"❌ [{e.code}]: {e.message}", file=sys.stderr)
        if e.recovery:
            print(f"🔧 Recovery: {e.recovery}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
