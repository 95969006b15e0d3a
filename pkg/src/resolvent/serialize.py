"""JSON formats with exact decimal-string scalars.

Every binary float is a dyadic rational, hence an exact finite decimal; we
emit that decimal and parse it back without rounding, so files round-trip
bit-exactly at any precision. Residual diagnostics stay plain JSON numbers.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from mpmath import mp, mpf, mpc
from mpmath.libmp import from_man_exp

from .forms import CubicForm, LinearSubspace, QuadraticForm
from .numerics import UniPoly
from .pipeline import ReductionReport, ReductionTrace
from .tracing import TraceStage
from .tschirnhaus import TschirnhausMap, TransformedEquation

TRACE_VERSION = 1

_DECIMAL_RE = re.compile(r"^-?\d+(\.\d+)?$")


def mpf_to_decimal(x) -> str:
    """Exact decimal representation of an mpf (dyadic) value."""
    x = mpf(x)
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return "0"
    digits = man << exp if exp >= 0 else man * 5 ** (-exp)
    s = str(digits)
    if exp < 0:
        k = -exp
        s = s.rjust(k + 1, "0")
        s = s[:-k] + "." + s[-k:]
        s = s.rstrip("0").rstrip(".")
    return ("-" if sign else "") + s


def decimal_to_mpf(s: str) -> mpf:
    """Parse a decimal string; exact for dyadic decimals, rounded otherwise."""
    text = s.strip()
    if not _DECIMAL_RE.match(text):
        return mpf(text)
    negative = text.startswith("-")
    if negative:
        text = text[1:]
    if "." in text:
        whole, frac = text.split(".")
    else:
        whole, frac = text, ""
    digits = int(whole + frac) if whole + frac else 0
    k = len(frac)
    if digits == 0:
        return mpf(0)
    power5 = 5 ** k
    if digits % power5 == 0:
        man = digits // power5
        if negative:
            man = -man
        return mp.make_mpf(from_man_exp(man, -k))
    return mpf(("-" if negative else "") + whole + ("." + frac if frac else ""))


def scalar_to_json(z) -> list:
    z = mpc(z)
    return [mpf_to_decimal(z.real), mpf_to_decimal(z.imag)]


def scalar_from_json(pair) -> mpc:
    return mpc(decimal_to_mpf(pair[0]), decimal_to_mpf(pair[1]))


def _fraction_of(text: str):
    return Fraction(text) if _DECIMAL_RE.match(text.strip()) else None


def poly_to_json(p: UniPoly) -> dict:
    return {
        "degree": p.degree,
        "coeffs": [scalar_to_json(c) for c in p.coeffs],
    }


def poly_from_json(data: dict) -> UniPoly:
    coeffs = data["coeffs"]
    if int(data["degree"]) != len(coeffs) - 1:
        raise ValueError("degree field disagrees with the coefficient list")
    values = []
    exact = []
    for pair in coeffs:
        values.append(scalar_from_json(pair))
        if exact is not None:
            fr, fi = _fraction_of(pair[0]), _fraction_of(pair[1])
            exact = None if fr is None or fi is None else exact + [(fr, fi)]
    return UniPoly(coeffs=tuple(values), exact=tuple(exact) if exact else None)


def map_to_json(tmap: TschirnhausMap) -> dict:
    return {"n": tmap.n, "t": [scalar_to_json(x) for x in tmap.t]}


def map_from_json(data: dict) -> TschirnhausMap:
    return TschirnhausMap(
        n=int(data["n"]), t=tuple(scalar_from_json(p) for p in data["t"])
    )


def equation_to_json(eq: TransformedEquation) -> dict:
    return {
        "source": poly_to_json(eq.source),
        "map": map_to_json(eq.map),
        "result": poly_to_json(eq.result),
        "C": [scalar_to_json(c) for c in eq.C],
    }


def quadratic_to_json(q: QuadraticForm) -> dict:
    return {
        "dim": q.dim,
        "matrix": [[scalar_to_json(x) for x in row] for row in q.matrix],
    }


def quadratic_from_json(data: dict) -> QuadraticForm:
    rows = [[scalar_from_json(x) for x in row] for row in data["matrix"]]
    return QuadraticForm.from_rows(rows)


def cubic_to_json(c: CubicForm) -> dict:
    return {
        "dim": c.dim,
        "entries": [[i, j, k, scalar_to_json(v)] for (i, j, k), v in c.entries],
    }


def cubic_from_json(data: dict) -> CubicForm:
    entries = {}
    for i, j, k, pair in data["entries"]:
        entries[tuple(sorted((int(i), int(j), int(k))))] = scalar_from_json(pair)
    return CubicForm.from_entries(int(data["dim"]), entries)


def subspace_to_json(s: LinearSubspace) -> dict:
    out = {
        "ambient_dim": s.ambient_dim,
        "basis": [[scalar_to_json(x) for x in b] for b in s.basis],
    }
    if s.base_point is not None:
        out["base_point"] = [scalar_to_json(x) for x in s.base_point]
    return out


def subspace_from_json(data: dict, precision_bits: int = 256) -> LinearSubspace:
    base = data.get("base_point")
    return LinearSubspace.create(
        int(data["ambient_dim"]),
        [[scalar_from_json(x) for x in b] for b in data["basis"]],
        base_point=[scalar_from_json(x) for x in base] if base else None,
        precision_bits=precision_bits,
    )


def trace_to_json(trace: ReductionTrace) -> dict:
    return {
        "trace_version": TRACE_VERSION,
        "stages": [s.to_json() for s in trace.stages],
        "final_map": map_to_json(trace.final_map),
        "final_poly": poly_to_json(trace.final_poly),
        "scale_factor": scalar_to_json(trace.scale_factor),
    }


def trace_from_json(data: dict) -> ReductionTrace:
    if int(data.get("trace_version", -1)) != TRACE_VERSION:
        raise ValueError("unsupported trace_version")
    return ReductionTrace(
        stages=tuple(TraceStage.from_json(s) for s in data["stages"]),
        final_map=map_from_json(data["final_map"]),
        final_poly=poly_from_json(data["final_poly"]),
        scale_factor=scalar_from_json(data["scale_factor"]),
    )


def report_to_json(report: ReductionReport) -> dict:
    return {
        "input": poly_to_json(report.input),
        "trace": trace_to_json(report.trace),
        "vanished": list(report.vanished),
        "parameter_count": report.parameter_count,
        "root_residuals": list(report.root_residuals),
    }


def report_from_json(data: dict) -> ReductionReport:
    return ReductionReport(
        input=poly_from_json(data["input"]),
        trace=trace_from_json(data["trace"]),
        vanished=tuple(float(x) for x in data["vanished"]),
        parameter_count=int(data["parameter_count"]),
        root_residuals=tuple(float(x) for x in data["root_residuals"]),
    )


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
