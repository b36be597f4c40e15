"""Command-line interface.

Exit codes: 0 conformant/success, 1 drift detected, 2 usage/parse/inference error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import bench as bench_mod
from .dataset import read_jsonl_path
from .errors import InferenceError, ParseError
from .gate import check_paths
from .policy import DriftReport, SchemaPolicy
from .schema import load_schema, serialize_schema, validate

EXIT_OK = 0
EXIT_DRIFT = 1
EXIT_ERROR = 2


def _policy(text: str) -> SchemaPolicy:
    try:
        return SchemaPolicy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or any(s <= 0 for s in sizes):
        raise argparse.ArgumentTypeError(f"sizes must be positive integers, got {text!r}")
    return sizes


def _emit_verdict(report: DriftReport | None, header: dict[str, str], fmt: str) -> int:
    if fmt == "json":
        payload = dict(header)
        payload["status"] = "ok" if report is None else "drift"
        payload["items"] = [] if report is None else [item.to_dict() for item in report.items]
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        for key, value in header.items():
            print(f"{key}: {value}")
        print("OK" if report is None else report.render())
    return EXIT_OK if report is None else EXIT_DRIFT


def _error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def cmd_diff(args: argparse.Namespace) -> int:
    schemas = []
    for path in (args.left, args.right):
        try:
            schemas.append(load_schema(path))
        except (ParseError, OSError) as exc:
            return _error(f"{path}: {exc}")
    left, right = schemas
    report = validate(left, right, args.policy)
    header = {"producer (left)": str(args.left), "contract (right)": str(args.right), "policy": args.policy.value}
    return _emit_verdict(report, header, args.format)


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        contract = load_schema(args.contract)
    except (ParseError, OSError) as exc:
        return _error(f"{args.contract}: {exc}")
    try:
        data = read_jsonl_path(args.data)
    except (ParseError, InferenceError, OSError) as exc:
        return _error(f"{args.data}: {exc}")
    report = validate(data.schema, contract, args.policy)
    header = {"data": str(args.data), "contract": str(args.contract), "policy": args.policy.value}
    return _emit_verdict(report, header, args.format)


def cmd_infer(args: argparse.Namespace) -> int:
    try:
        data = read_jsonl_path(args.data)
    except (ParseError, InferenceError, OSError) as exc:
        return _error(f"{args.data}: {exc}")
    sys.stdout.write(serialize_schema(data.schema))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        config = bench_mod.BenchConfig(
            pair_counts=args.sizes,
            schema_width=args.width,
            nesting_depth=args.depth,
            warmup_iterations=args.warmup,
            measured_iterations=args.iterations,
            seed=args.seed,
        )
    except ValueError as exc:
        return _error(str(exc))
    result = bench_mod.bench_compile(config) if args.suite == "compile" else bench_mod.bench_runtime(config)
    markdown = bench_mod.render_markdown(result)
    if args.out:
        out = Path(args.out)
        out.write_text(markdown, encoding="utf-8")
        out.with_suffix(".json").write_text(result.to_json(), encoding="utf-8")
        print(f"wrote {out} and {out.with_suffix('.json')}")
    else:
        sys.stdout.write(markdown)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    try:
        diagnostics = check_paths(args.paths)
    except OSError as exc:
        return _error(str(exc))
    for diag in diagnostics:
        print(diag.render(), file=sys.stderr)
    if not diagnostics:
        print(f"gate passed: {', '.join(map(str, args.paths))}")
        return EXIT_OK
    if any(d.code == "syntax" for d in diagnostics):
        return EXIT_ERROR
    print(f"build failed: {len(diagnostics)} gate error(s)", file=sys.stderr)
    return EXIT_DRIFT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapegate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    policy_help = "one of: " + ", ".join(p.value for p in SchemaPolicy)

    p = sub.add_parser("diff", help="compare a producer schema (left) with a contract schema (right)")
    p.add_argument("--left", required=True, help="producer / actual schema JSON")
    p.add_argument("--right", required=True, help="contract schema JSON")
    p.add_argument("--policy", required=True, type=_policy, help=policy_help)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("validate", help="infer the schema of a JSONL file and validate it against a contract")
    p.add_argument("--data", required=True)
    p.add_argument("--contract", required=True)
    p.add_argument("--policy", required=True, type=_policy, help=policy_help)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("infer", help="print the inferred schema of a JSONL file")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True, choices=("compile", "runtime"))
    p.add_argument("--sizes", type=_sizes, default=(10, 25, 50), help="pair counts, e.g. 10,25,50")
    p.add_argument("--out", help="markdown output path; JSON is written next to it")
    p.add_argument("--iterations", type=int, default=15, help="measured repetitions or batches")
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="run the static gate over source files (build step)")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
