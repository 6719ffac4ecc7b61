"""Command line front end for the scenario pipeline.

Subcommands mirror the development phases: ``validate`` (functional),
``lower`` (functional -> logical), ``concretize`` (logical -> concrete),
``export`` (concrete -> test cases), and ``pipeline`` (everything). All
randomness flows from ``--seed``; no environment entropy is consulted.

Exit codes: 0 ok, 1 findings, 2 I/O, 3 syntax, 4 infeasible, 5 internal.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import concretize as cz
from . import testcase as tc
from .canonical import dumps_canonical
from .errors import InfeasibleLevels, SamplingExhausted, ScenarioError
from .functional import check_consistency, parse_functional
from .logical import LogicalScenario, deserialize_logical, serialize_logical, validate_logical
from .lowering import load_parameter_catalog, lower_to_logical
from .vocabulary import load_vocabulary

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_IO = 2
EXIT_SYNTAX = 3
EXIT_INFEASIBLE = 4
EXIT_INTERNAL = 5


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def generate_suite(scenario: LogicalScenario, method: str, k: int, n: int, seed: int):
    """Build a concrete suite; returns (scenarios, levels used for coverage)."""
    boundary = {p.name: cz.boundary_values(p) for p in scenario.parameters}
    if method == "random":
        return cz.sample_random(scenario, n, seed), boundary
    if method == "boundary":
        levels = boundary
    elif method == "equivalence":
        levels = {p.name: cz.equivalence_classes(p, k) for p in scenario.parameters}
    elif method == "pairwise":
        levels = {p.name: sorted(set(boundary[p.name])
                                 | set(cz.equivalence_classes(p, k)))
                  for p in scenario.parameters}
    else:
        raise ScenarioError(f"unknown method {method!r}")
    scenarios = cz.pairwise_cover(scenario, levels)
    if method != "pairwise":
        scenarios = [dataclasses.replace(
            c, method=method,
            scenario_id=c.scenario_id.replace("-pairwise-", f"-{method}-"))
            for c in scenarios]
    return scenarios, levels


def _emit_findings(path, findings, as_json):
    if as_json:
        print(dumps_canonical({
            "path": str(path),
            "findings": [{"code": f.code, "message": f.message, "elements": list(f.elements)}
                         for f in findings],
        }), end="")
    else:
        status = "OK" if not findings else f"{len(findings)} finding(s)"
        print(f"{path}: {status}")
        for finding in findings:
            print(f"  [{finding.code}] {finding.message}")


def cmd_validate(args) -> int:
    vocabulary = load_vocabulary(_read(args.vocab))
    status = EXIT_OK
    for path in args.scenarios:
        scenario = parse_functional(_read(path), vocabulary)
        report = check_consistency(scenario, vocabulary)
        _emit_findings(path, report.findings, args.json)
        if report.findings:
            status = EXIT_FINDINGS
    return status


def _lower_one(path, vocabulary, catalog):
    scenario = parse_functional(_read(path), vocabulary)
    report = check_consistency(scenario, vocabulary)
    if report.findings:
        return scenario, None, report
    return scenario, lower_to_logical(scenario, catalog), report


def cmd_lower(args) -> int:
    vocabulary = load_vocabulary(_read(args.vocab))
    catalog = load_parameter_catalog(_read(args.catalog), vocabulary)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for path in args.scenarios:
        functional, logical, report = _lower_one(path, vocabulary, catalog)
        if logical is None:
            _emit_findings(path, report.findings, args.json)
            status = EXIT_FINDINGS
            continue
        validation = validate_logical(logical)
        if not validation.ok:
            _emit_findings(path, validation.findings, args.json)
            if any(f.code == "INTERVAL_INFEASIBLE" for f in validation.findings):
                return EXIT_INFEASIBLE
            status = EXIT_FINDINGS
            continue
        target = out / f"{logical.scenario_id}.logical.json"
        target.write_text(serialize_logical(logical), encoding="utf-8")
        print(f"{path} -> {target}")
    return status


def cmd_concretize(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for index, path in enumerate(args.scenarios):
        logical = deserialize_logical(_read(path))
        validation = validate_logical(logical)
        if not validation.ok:
            _emit_findings(path, validation.findings, args.json)
            if any(f.code == "INTERVAL_INFEASIBLE" for f in validation.findings):
                return EXIT_INFEASIBLE
            return EXIT_FINDINGS
        seed = cz.derive_seed(args.seed, index)
        scenarios, levels = generate_suite(logical, args.method, args.k, args.n, seed)
        coverage = cz.coverage_metrics(logical, levels, scenarios)
        target = out / f"{logical.scenario_id}.suite.json"
        target.write_text(dumps_canonical(cz.suite_to_dict(scenarios, coverage)),
                          encoding="utf-8")
        print(f"{path} -> {target} ({len(scenarios)} scenarios, "
              f"pair coverage {coverage.pair_coverage:.3f})")
    return EXIT_OK


def _export_cases(logical, scenarios, args, destination) -> dict:
    expected = tc.load_expected(_read(args.expected))
    meta = {
        "work_product_ref": args.work_product,
        "preconditions": args.preconditions,
        "configuration": args.configuration,
    }
    cases = []
    for concrete in scenarios:
        traces = tc.synthesize_traces(logical, concrete, args.duration, args.dt)
        cases.append(tc.assemble_test_case(concrete, traces, meta, expected))
    return tc.export_suite(cases, destination)


def cmd_export(args) -> int:
    logical = deserialize_logical(_read(args.logical))
    suite = json.loads(_read(args.suite))
    scenarios = [cz.concrete_from_dict(d) for d in suite["scenarios"]]
    manifest = _export_cases(logical, scenarios, args, args.out)
    print(f"{args.suite} -> {args.out} ({manifest['case_count']} test cases)")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    vocabulary = load_vocabulary(_read(args.vocab))
    catalog = load_parameter_catalog(_read(args.catalog), vocabulary)
    out = Path(args.out)
    (out / "logical").mkdir(parents=True, exist_ok=True)
    (out / "concrete").mkdir(parents=True, exist_ok=True)
    summary = []
    for index, path in enumerate(args.scenarios):
        functional, logical, report = _lower_one(path, vocabulary, catalog)
        if logical is None:
            _emit_findings(path, report.findings, args.json)
            return EXIT_FINDINGS
        validation = validate_logical(logical)
        if not validation.ok:
            _emit_findings(path, validation.findings, args.json)
            if any(f.code == "INTERVAL_INFEASIBLE" for f in validation.findings):
                return EXIT_INFEASIBLE
            return EXIT_FINDINGS

        logical_path = out / "logical" / f"{logical.scenario_id}.logical.json"
        logical_path.write_text(serialize_logical(logical), encoding="utf-8")

        seed = cz.derive_seed(args.seed, index)
        scenarios, levels = generate_suite(logical, args.method, args.k, args.n, seed)
        coverage = cz.coverage_metrics(logical, levels, scenarios)
        suite_path = out / "concrete" / f"{logical.scenario_id}.suite.json"
        suite_path.write_text(dumps_canonical(cz.suite_to_dict(scenarios, coverage)),
                              encoding="utf-8")

        cases_dir = out / "cases" / logical.scenario_id
        manifest = _export_cases(logical, scenarios, args, cases_dir)
        summary.append({
            "scenario_id": logical.scenario_id,
            "logical": str(logical_path),
            "suite": str(suite_path),
            "cases": str(cases_dir),
            "case_count": manifest["case_count"],
            "pair_coverage": coverage.pair_coverage,
        })
    if args.json:
        print(dumps_canonical({"scenarios": summary}), end="")
    else:
        for entry in summary:
            print(f"{entry['scenario_id']}: {entry['case_count']} test cases, "
                  f"pair coverage {entry['pair_coverage']:.3f} -> {entry['cases']}")
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--json", action="store_true", help="machine-readable reports")


def _add_method(parser):
    parser.add_argument("--method", default="pairwise",
                        choices=["boundary", "equivalence", "pairwise", "random"])
    parser.add_argument("--k", type=int, default=2, help="equivalence classes per parameter")
    parser.add_argument("--n", type=int, default=10, help="sample count for --method random")
    parser.add_argument("--seed", type=int, default=0)


def _add_export(parser):
    parser.add_argument("--expected", required=True, help="authored expected-behavior JSON")
    parser.add_argument("--duration", type=float, default=10.0)
    parser.add_argument("--dt", type=float, default=0.1)
    parser.add_argument("--work-product", dest="work_product", required=True,
                        help="reference to the work product under verification")
    parser.add_argument("--preconditions", default="nominal start, all systems ready")
    parser.add_argument("--configuration", default="default")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenkit",
                                     description="functional/logical/concrete scenario pipeline")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("validate", help="parse and consistency-check functional scenarios")
    p.add_argument("--vocab", required=True)
    p.add_argument("scenarios", nargs="+")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = subparsers.add_parser("lower", help="lower functional scenarios to logical scenarios")
    p.add_argument("--vocab", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("scenarios", nargs="+")
    _add_common(p)
    p.set_defaults(func=cmd_lower)

    p = subparsers.add_parser("concretize", help="derive concrete suites from logical scenarios")
    p.add_argument("--out", required=True)
    p.add_argument("scenarios", nargs="+")
    _add_method(p)
    _add_common(p)
    p.set_defaults(func=cmd_concretize)

    p = subparsers.add_parser("export", help="turn a concrete suite into test case files")
    p.add_argument("--logical", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("suite")
    _add_export(p)
    _add_common(p)
    p.set_defaults(func=cmd_export)

    p = subparsers.add_parser("pipeline", help="run the whole chain end to end")
    p.add_argument("--vocab", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("scenarios", nargs="+")
    _add_method(p)
    _add_export(p)
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleLevels, SamplingExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
