"""Command-line surface: reductions, lemma solvers, transforms, verification.

Exit codes: 0 success / verification PASS, 1 usage or IO error, 2
verification FAIL, 3 degenerate configuration after retries (includes
non-squarefree inputs), 4 precision exhausted.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys

from .errors import (
    DegenerateConfiguration,
    NoConvergence,
    NonSquarefree,
    PrecisionExhausted,
)
from . import conegeom, pipeline, serialize, tschirnhaus
from .linalg import child_seed
from .numerics import DEFAULT_PRECISION_BITS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAIL = 2
EXIT_DEGENERATE = 3
EXIT_PRECISION = 4


def _default_precision() -> int:
    env = os.environ.get("RESOLVENT_PRECISION_BITS")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_PRECISION_BITS


def _add_common(parser, needs_seed):
    parser.add_argument("--input", required=True, help="input JSON path")
    parser.add_argument("--output", default="-", help="output JSON path (default stdout)")
    if needs_seed:
        parser.add_argument("--seed", type=int, required=True,
                            help="reproducibility seed (mandatory, never defaulted)")
    parser.add_argument("--precision-bits", type=int, default=_default_precision())
    parser.add_argument("--tolerance-override", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resolvent",
        description="Reduce polynomial equations to few-parameter normal forms "
                    "through chains of low-degree auxiliary equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="full reduction for degree >= 21")
    _add_common(p, needs_seed=True)

    p = sub.add_parser("bring", help="quintic corridor (z^5 + a z + 1)")
    _add_common(p, needs_seed=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for batch inputs")

    p = sub.add_parser("transform", help="apply a substitution map (cross-checked)")
    _add_common(p, needs_seed=False)

    p = sub.add_parser("lemma1", help="common isotropic k-plane of two quadric cones")
    _add_common(p, needs_seed=True)

    p = sub.add_parser("lemma2", help="2-plane on a cubic cone in 5-space")
    _add_common(p, needs_seed=True)

    p = sub.add_parser("verify", help="independently re-check a reduction report")
    _add_common(p, needs_seed=False)
    return parser


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path: str, payload) -> None:
    text = serialize.dumps(payload)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _stage_table(stages) -> str:
    lines = ["  stage                             degree   residual"]
    for s in stages:
        lines.append(f"  {s.name:<32}  {s.auxiliary_degree:>5}   {s.residual:.3e}")
    return "\n".join(lines)


def _check_precision(bits: int) -> None:
    if bits < 64:
        raise ValueError("precision_bits must be at least 64")


def _run_reduce(args) -> int:
    _check_precision(args.precision_bits)
    f = serialize.poly_from_json(_read_json(args.input))
    if f.degree == 5:
        print("error: input is a quintic; the full reduction needs degree >= 21 — "
              "use the `bring` command instead", file=sys.stderr)
        return EXIT_USAGE
    if f.degree < 21:
        print("error: the full reduction needs degree >= 21", file=sys.stderr)
        return EXIT_USAGE
    report = pipeline.reduce_theorem1(f, args.seed, args.precision_bits)
    _write_json(args.output, serialize.report_to_json(report))
    print(f"reduced degree-{f.degree} input to {report.parameter_count} free "
          f"coefficients; auxiliary-degree ledger:", file=sys.stderr)
    print(_stage_table(report.trace.stages), file=sys.stderr)
    return EXIT_OK


def _bring_one(payload):
    poly_json, seed, precision_bits = payload
    f = serialize.poly_from_json(poly_json)
    report = pipeline.reduce_bring(f, seed, precision_bits)
    return serialize.report_to_json(report)


def _run_bring(args) -> int:
    _check_precision(args.precision_bits)
    data = _read_json(args.input)
    batch = data.get("batch") if isinstance(data, dict) else None
    if batch is None and isinstance(data, list):
        batch = data
    if batch is not None:
        payloads = [
            (poly_json, child_seed(args.seed, idx), args.precision_bits)
            for idx, poly_json in enumerate(batch)
        ]
        if args.jobs > 1:
            with multiprocessing.Pool(args.jobs) as pool:
                results = pool.map(_bring_one, payloads)
        else:
            results = [_bring_one(p) for p in payloads]
        _write_json(args.output, results)
        print(f"reduced {len(results)} quintics", file=sys.stderr)
        return EXIT_OK
    f = serialize.poly_from_json(data)
    if f.degree != 5:
        print("error: `bring` needs a quintic input", file=sys.stderr)
        return EXIT_USAGE
    report = pipeline.reduce_bring(f, args.seed, args.precision_bits)
    _write_json(args.output, serialize.report_to_json(report))
    print("one-parameter form reached; auxiliary-degree ledger:", file=sys.stderr)
    print(_stage_table(report.trace.stages), file=sys.stderr)
    return EXIT_OK


def _run_transform(args) -> int:
    _check_precision(args.precision_bits)
    data = _read_json(args.input)
    f = serialize.poly_from_json(data["poly"])
    tmap = serialize.map_from_json(data["map"])
    equation = tschirnhaus.transform(f, tmap, args.precision_bits, cross_check=True)
    _write_json(args.output, serialize.equation_to_json(equation))
    return EXIT_OK


def _run_lemma1(args) -> int:
    _check_precision(args.precision_bits)
    data = _read_json(args.input)
    q1 = serialize.quadratic_from_json(data["q1"])
    q2 = serialize.quadratic_from_json(data["q2"])
    k = int(data["k"])
    subspace, stages = conegeom.lemma1_subspace(q1, q2, k, args.seed, args.precision_bits)
    from .forms import restrict

    worst = max(
        float(conegeom.max_restriction_entry(restrict(q, subspace)))
        for q in (q1, q2)
    )
    _write_json(args.output, {
        "subspace": serialize.subspace_to_json(subspace),
        "stages": [s.to_json() for s in stages],
        "max_restriction_entry": worst,
    })
    print(_stage_table(stages), file=sys.stderr)
    return EXIT_OK


def _run_lemma2(args) -> int:
    _check_precision(args.precision_bits)
    data = _read_json(args.input)
    cubic = serialize.cubic_from_json(data["cubic"])
    plane, stages = conegeom.lemma2_plane(cubic, args.seed, args.precision_bits)
    from .forms import restrict

    worst = float(conegeom.max_restriction_entry(restrict(cubic, plane)))
    _write_json(args.output, {
        "subspace": serialize.subspace_to_json(plane),
        "stages": [s.to_json() for s in stages],
        "max_restriction_entry": worst,
    })
    print(_stage_table(stages), file=sys.stderr)
    return EXIT_OK


def _run_verify(args) -> int:
    _check_precision(args.precision_bits)
    report = serialize.report_from_json(_read_json(args.input))
    verdict = pipeline.verify_report(
        report, args.precision_bits, tolerance_override=args.tolerance_override
    )
    _write_json(args.output, verdict.to_json())
    for check in verdict.checks:
        mark = "PASS" if check.passed else "FAIL"
        print(f"  {mark}  {check.name}: {check.detail}", file=sys.stderr)
    return EXIT_OK if verdict.passed else EXIT_VERIFY_FAIL


_COMMANDS = {
    "reduce": _run_reduce,
    "bring": _run_bring,
    "transform": _run_transform,
    "lemma1": _run_lemma1,
    "lemma2": _run_lemma2,
    "verify": _run_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateConfiguration, NonSquarefree) as exc:
        print(f"degenerate configuration: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (PrecisionExhausted, NoConvergence) as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
