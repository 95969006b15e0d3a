"""End-to-end reduction driver with a full audit trace.

The degree-n input (n >= 21) is carried through a chain of substitutions
until five leading coefficients of the transformed equation vanish and the
constant term is one; what remains is an (n-6)-parameter normal form. Every
auxiliary equation solved along the way is recorded with its degree, so the
central claim — nothing above degree six before the final degree-<=20
intersection — is machine-checkable. A quintic corridor exercises the
origin-move and normalization stages on their own (one-parameter output).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from mpmath import mpf, mpc

from .errors import (
    DegenerateConfiguration,
    DegenerateSection,
    ZeroConstant,
)
from .forms import extract_forms, linear_part, quadratic_part
from .conegeom import bivariate_intersections, lemma1_subspace, lemma2_plane
from .linalg import child_seed, combine, nullspace, orthonormalize, rand_scalar, vnorm
from .numerics import (
    DEFAULT_PRECISION_BITS,
    UniPoly,
    frame_scale_exponent,
    inverse_dft,
    inverse_dft2,
    peval,
    roots,
    tolerance,
    unit_roots,
    working_precision,
)
from .tracing import TraceStage
from .tschirnhaus import (
    CoefficientCache,
    TschirnhausMap,
    c1_functional,
    find_c123_point,
    normalize_constant,
    scale_input,
    transform,
    unscale_map,
)

_STAGE_RETRIES = 8
_RESTRICTION_DIM = 15  # ambient size handed to the isotropic-pair search (3k, k=5)
_SCREEN_TOL = mpf(2) ** -24  # pre-polish candidate screen (refined afterwards)


@dataclass(frozen=True)
class ReductionTrace:
    """Ordered record of every auxiliary equation plus the final data."""

    stages: tuple  # TraceStage items
    final_map: TschirnhausMap
    final_poly: UniPoly
    scale_factor: mpc


@dataclass(frozen=True)
class ReductionReport:
    input: UniPoly
    trace: ReductionTrace
    vanished: tuple  # |C_1..C_k| magnitudes killed by the chain
    parameter_count: int
    root_residuals: tuple


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyResult:
    passed: bool
    checks: tuple

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def _validate_input(f: UniPoly):
    if not f.is_monic:
        raise ValueError("input polynomial must be monic")


def reduce_theorem1(f: UniPoly, seed: int,
                    precision_bits: int = DEFAULT_PRECISION_BITS) -> ReductionReport:
    """Full reduction of a monic squarefree input of degree n >= 21.

    Stage chain: origin move onto C_1=C_2=C_3=0, tangent-space cut to n-4
    directions, seeded 15-dimensional restriction, common isotropic 5-space
    of the two quadratic parts, 2-plane on the restricted cubic, and the
    final quartic/quintic intersection (eliminant degree <= 20) followed by
    constant-term normalization. Deterministic given (input, seed,
    precision_bits).
    """
    _validate_input(f)
    n = f.degree
    if n < 21:
        raise ValueError("reduce_theorem1 needs degree >= 21 (quintics go through reduce_bring)")
    with working_precision(precision_bits):
        # work in a root-scale-normalized frame: power sums of the scaled
        # input stay tame, so chart polynomials keep a sane dynamic range
        exponent = frame_scale_exponent(f)
        scaled = scale_input(f, exponent) if exponent != 0 else f
        cache = CoefficientCache(scaled, precision_bits)
        ell, _ = c1_functional(scaled, precision_bits)
        failure = None
        for attempt in range(_STAGE_RETRIES):
            try:
                origin_map, origin_stages = find_c123_point(
                    scaled, child_seed(seed, 1000 + attempt), precision_bits
                )
            except DegenerateConfiguration as exc:
                failure = exc
                continue
            t_star = list(origin_map.t)
            directions = _tangent_directions(cache, ell, t_star, n, precision_bits)
            if directions is None:
                failure = DegenerateConfiguration("tangent space had the wrong dimension")
                continue
            try:
                return _reduce_within_tangent_space(
                    f, scaled, exponent, cache, seed, precision_bits,
                    origin_stages, t_star, directions,
                )
            except DegenerateConfiguration as exc:
                failure = exc
        raise DegenerateConfiguration(
            f"reduction failed after {_STAGE_RETRIES} origin moves: {failure}"
        )


def _shifted_coefficient(cache, t_star, i):
    def evaluate(v):
        point = [a + b for a, b in zip(t_star, v)]
        return cache.coefficients(point, i)[i - 1]

    return evaluate


def _restricted_coefficient(cache, t_star, basis, i):
    def evaluate(y):
        offset = combine(basis, y)
        point = [a + b for a, b in zip(t_star, offset)]
        return cache.coefficients(point, i)[i - 1]

    return evaluate


def _tangent_directions(cache, ell, t_star, n, precision_bits):
    """Directions spanning {C_1 = 0} cut by both tangent hyperplanes at t*."""
    m = n - 1
    phi1 = linear_part(_shifted_coefficient(cache, t_star, 2), m,
                       max_degree=2, precision_bits=precision_bits)
    psi1 = linear_part(_shifted_coefficient(cache, t_star, 3), m,
                       max_degree=3, precision_bits=precision_bits)
    directions = nullspace(
        [list(ell.coeffs), list(phi1.coeffs), list(psi1.coeffs)], m
    )
    if len(directions) != n - 4:
        return None
    return directions


def _reduce_within_tangent_space(f, scaled, exponent, cache, seed, precision_bits,
                                 origin_stages, t_star, directions):
    n = f.degree
    tol = tolerance(precision_bits)
    failure = None
    for attempt in range(_STAGE_RETRIES):
        rng = random.Random(child_seed(seed, 2000 + attempt))
        combos = [
            combine(directions, [rand_scalar(rng) for _ in directions])
            for _ in range(_RESTRICTION_DIM)
        ]
        basis15 = orthonormalize(combos)
        if len(basis15) != _RESTRICTION_DIM:
            failure = DegenerateConfiguration("random restriction collapsed")
            continue
        phi2 = quadratic_part(
            _restricted_coefficient(cache, t_star, basis15, 2),
            _RESTRICTION_DIM, max_degree=3, precision_bits=precision_bits,
        )
        psi2 = quadratic_part(
            _restricted_coefficient(cache, t_star, basis15, 3),
            _RESTRICTION_DIM, max_degree=3, precision_bits=precision_bits,
        )
        try:
            sub5, lemma1_stages = lemma1_subspace(
                phi2, psi2, 5, child_seed(seed, 3000 + attempt), precision_bits
            )
        except DegenerateConfiguration as exc:
            failure = exc
            continue
        basis5 = [combine(basis15, coords) for coords in sub5.basis]
        decomposition = extract_forms(
            _restricted_coefficient(cache, t_star, basis5, 3),
            5, max_degree=3, precision_bits=precision_bits,
        )
        psi3 = decomposition.cubic
        if psi3.scale() <= tol:
            failure = DegenerateConfiguration("restricted cubic vanished identically")
            continue
        for plane_attempt in range(_STAGE_RETRIES):
            try:
                plane, lemma2_stages = lemma2_plane(
                    psi3, child_seed(seed, 4000 + 16 * attempt + plane_attempt),
                    precision_bits,
                )
                plane_vectors = [combine(basis5, coords) for coords in plane.basis]
                t_final, final_stage = _final_intersection(
                    scaled, cache, t_star, plane_vectors, precision_bits, seed
                )
                stages = (
                    list(origin_stages) + list(lemma1_stages)
                    + list(lemma2_stages) + [final_stage]
                )
                return _assemble_report(
                    f, t_final, stages, precision_bits, kill=5, exponent=exponent
                )
            except (DegenerateConfiguration, ZeroConstant) as exc:
                failure = exc
    raise DegenerateConfiguration(f"tangent-space stages failed: {failure}")


def _snap_grid(grid, total_degree):
    """Zero the entries beyond the known total degree (pure rounding noise)."""
    out = []
    for j, row in enumerate(grid):
        out.append([mpc(0) if j + k > total_degree else c for k, c in enumerate(row)])
    return out


def _chart_radius_exponents(grids):
    """Candidate chart scales from the Newton polygons of the grid polynomials.

    Roots of a polynomial with coefficients spanning many orders of magnitude
    cluster near radii given by the slopes of the upper concave hull of
    (degree, log2 |coefficient|); collecting those slopes (by total degree,
    both grids) gives the handful of power-of-two rescalings at which
    unit-circle elimination can see each cluster. Radius 1 is always tried.
    """
    exponents = {0}
    for grid in grids:
        levels = {}
        for j, row in enumerate(grid):
            for k, c in enumerate(row):
                mag = abs(c)
                if mag == 0:
                    continue
                _, _, exp, bc = mag._mpf_
                d = j + k
                levels[d] = max(levels.get(d, exp + bc), exp + bc)
        points = sorted(levels.items())
        if len(points) < 2:
            continue
        hull = []
        for pt in points:
            while len(hull) >= 2:
                (d1, l1), (d2, l2) = hull[-2], hull[-1]
                # keep the upper concave envelope
                if (l2 - l1) * (pt[0] - d1) <= (pt[1] - l1) * (d2 - d1):
                    hull.pop()
                else:
                    break
            hull.append(pt)
        for (d1, l1), (d2, l2) in zip(hull, hull[1:]):
            slope = (l1 - l2) / (d2 - d1)
            exponents.add(int(round(slope)))
    return sorted(exponents)


def _harvest_intersections(grid4, grid5, precision_bits):
    """Eliminate at every Newton-polygon chart radius and pool the candidates.

    A single elimination at unit nodes only resolves the intersection points
    whose chart coordinates are O(1); rescaling the chart by each hull slope
    exposes the clusters at the other scales. Candidates are deduplicated and
    the recorded degree is the best (largest) trimmed eliminant degree seen.
    """
    from .conegeom import _scale_grid

    best_degree = 0
    pooled = []
    failure = None
    for e in _chart_radius_exponents([grid4, grid5]):
        scaled4 = _scale_grid(grid4, e, e) if e else grid4
        scaled5 = _scale_grid(grid5, e, e) if e else grid5
        try:
            degree, candidates = bivariate_intersections(
                scaled4, 4, scaled5, 5, precision_bits, (1, 20),
                residual_tol=_SCREEN_TOL, balance=(e == 0),
            )
        except DegenerateSection as exc:
            failure = exc
            continue
        best_degree = max(best_degree, degree)
        back = mpf(2) ** e
        pooled.extend((a * back, b * back, r) for a, b, r in candidates)
    if not pooled:
        raise DegenerateSection(f"elimination found no intersection points: {failure}")
    pooled.sort(key=lambda c: (c[0].real, c[0].imag, c[1].real, c[1].imag))
    unique = []
    for alpha, beta, residual in pooled:
        duplicate = False
        for a0, b0, _ in unique:
            close_a = abs(alpha - a0) <= mpf(2) ** -24 * (1 + abs(alpha))
            close_b = abs(beta - b0) <= mpf(2) ** -24 * (1 + abs(beta))
            if close_a and close_b:
                duplicate = True
                break
        if not duplicate:
            unique.append((alpha, beta, residual))
    return best_degree, unique


def _polish_candidate(cache, t_star, w1, w2, alpha, beta, precision_bits):
    """Newton-refine an approximate chart intersection on the true functions.

    The eliminant roots carry the interpolation noise of badly scaled charts;
    a handful of 2x2 Newton steps against exact coefficient evaluations (line
    restrictions recovered by DFT at the candidate's own scale) takes them to
    working accuracy. Returns the refined (alpha, beta) or None.
    """
    n = cache.f.degree
    stop = mpf(2) ** -(precision_bits + 8)
    level = 1 + abs(alpha) + abs(beta)
    _, _, exp, bc = level._mpf_
    h = mpf(2) ** (exp + bc - 24)  # step at the candidate's own scale
    nodes = [h * w for w in unit_roots(6)]

    def values_at(a, b):
        point = [t + a * x + b * y for t, x, y in zip(t_star, w1, w2)]
        cs = cache.coefficients(point, 5)
        return cs[3], cs[4]

    best_step = None
    stalled = 0
    for iteration in range(28):
        f4, f5 = values_at(alpha, beta)
        line_a4, line_a5, line_b4, line_b5 = [], [], [], []
        for s in nodes:
            a4, a5 = values_at(alpha + s, beta)
            b4, b5 = values_at(alpha, beta + s)
            line_a4.append(a4)
            line_a5.append(a5)
            line_b4.append(b4)
            line_b5.append(b5)
        j11 = inverse_dft(line_a4)[1] / h
        j12 = inverse_dft(line_b4)[1] / h
        j21 = inverse_dft(line_a5)[1] / h
        j22 = inverse_dft(line_b5)[1] / h
        det = j11 * j22 - j12 * j21
        if det == 0:
            return None
        da = (-f4 * j22 + f5 * j12) / det
        db = (-f5 * j11 + f4 * j21) / det
        alpha += da
        beta += db
        step = abs(da) + abs(db)
        if step <= stop * (1 + abs(alpha) + abs(beta)):
            return alpha, beta
        # corrections hovering at the evaluation-noise floor count as converged
        if best_step is not None and step * 2 > best_step:
            stalled += 1
            if stalled >= 4 and iteration >= 8:
                return alpha, beta
        else:
            stalled = 0
        if best_step is None or step < best_step:
            best_step = step
    return None


def _final_intersection(f, cache, t_star, plane_vectors, precision_bits, seed):
    """Meet the quartic and quintic coefficient curves on the 2-plane.

    The two inhomogeneous chart polynomials are interpolated exactly on a
    6x6 unit-root grid, one variable is eliminated (eliminant degree <= 20)
    at every plausible chart radius, and every surviving intersection point
    is screened; among the points killing C_1..C_5 the one with the largest
    constant term wins (greatest distance from the zero-constant failure
    mode), ties to the earliest.
    """
    n = f.degree
    tol = tolerance(precision_bits)
    w1, w2 = plane_vectors
    nodes = unit_roots(6)
    values4 = [[mpc(0)] * 6 for _ in range(6)]
    values5 = [[mpc(0)] * 6 for _ in range(6)]
    for a_idx, a in enumerate(nodes):
        for b_idx, b in enumerate(nodes):
            point = [t + a * x + b * y for t, x, y in zip(t_star, w1, w2)]
            cs = cache.coefficients(point, 5)
            values4[a_idx][b_idx] = cs[3]
            values5[a_idx][b_idx] = cs[4]
    grid4 = _snap_grid(inverse_dft2(values4), 4)
    grid5 = _snap_grid(inverse_dft2(values5), 5)
    grid4 = [row[:5] for row in grid4[:5]]
    degree, candidates = _harvest_intersections(grid4, grid5, precision_bits)

    # rough screen and constant-term ranking on the unpolished candidates
    ranked = []
    for idx, (alpha, beta, _) in enumerate(candidates):
        point = [t + alpha * x + beta * y for t, x, y in zip(t_star, w1, w2)]
        cs = cache.coefficients(point, n)
        scale = max(abs(c) for c in cs)
        if scale == 0:
            continue
        if max(abs(cs[k]) for k in range(5)) > _SCREEN_TOL * scale:
            continue
        ranked.append((-abs(cs[n - 1]), idx, alpha, beta))
    ranked.sort(key=lambda item: (item[0], item[1]))
    if not ranked:
        raise DegenerateSection("no intersection point killed the five coefficients")

    saw_zero_constant = False
    for _, _, alpha, beta in ranked:
        refined = _polish_candidate(cache, t_star, w1, w2, alpha, beta, precision_bits)
        if refined is None:
            continue
        alpha, beta = refined
        t_final = [t + alpha * x + beta * y for t, x, y in zip(t_star, w1, w2)]
        cs = cache.coefficients(t_final, n)
        scale = max(abs(c) for c in cs)
        if scale == 0:
            continue
        worst = max(abs(cs[k]) for k in range(5))
        if worst > tol * scale:
            continue
        if abs(cs[n - 1]) <= tol * scale:
            saw_zero_constant = True
            continue
        stage = TraceStage(
            name="quartic_quintic_intersection",
            auxiliary_degree=degree,
            residual=float(worst / scale),
            seed_used=seed,
            subspace_dims=(2, 0),
        )
        return t_final, stage
    if saw_zero_constant:
        raise ZeroConstant("all surviving intersection candidates have vanishing constant term")
    raise DegenerateSection("no intersection candidate reached working accuracy")


def _assemble_report(f, t_final, stages, precision_bits, kill, exponent=0):
    n = f.degree
    tol = tolerance(precision_bits)
    final_map = TschirnhausMap(n=n, t=tuple(t_final))
    if exponent:
        final_map = unscale_map(final_map, exponent)
    equation = transform(f, final_map, precision_bits, cross_check=True)
    normalized, factor = normalize_constant(equation.result, precision_bits)
    scale = normalized.scale()
    for k in range(1, kill + 1):
        if abs(normalized.coeffs[n - k]) > tol * scale:
            raise DegenerateConfiguration("normalization amplified a killed coefficient")
    input_roots = roots(f, precision_bits)
    residuals = []
    g = final_map.g_coeffs()
    for x in input_roots.roots:
        z = peval(g, x) / factor
        rel = abs(normalized.eval(z)) / (scale * max(mpf(1), abs(z)) ** n)
        residuals.append(float(rel))
    trace = ReductionTrace(
        stages=tuple(stages),
        final_map=final_map,
        final_poly=normalized,
        scale_factor=factor,
    )
    return ReductionReport(
        input=f,
        trace=trace,
        vanished=tuple(float(abs(equation.C[k])) for k in range(kill)),
        parameter_count=n - 1 - kill,
        root_residuals=tuple(residuals),
    )


def reduce_bring(f: UniPoly, seed: int,
                 precision_bits: int = DEFAULT_PRECISION_BITS) -> ReductionReport:
    """Quintic corridor: origin move plus normalization only.

    Output has the one-parameter shape z^5 + a z + 1.
    """
    _validate_input(f)
    if f.degree != 5:
        raise ValueError("reduce_bring needs a quintic")
    with working_precision(precision_bits):
        failure = None
        for attempt in range(_STAGE_RETRIES):
            try:
                tmap, stages = find_c123_point(
                    f, child_seed(seed, attempt), precision_bits
                )
                return _assemble_report(
                    f, list(tmap.t), stages, precision_bits, kill=3
                )
            except (DegenerateConfiguration, ZeroConstant) as exc:
                failure = exc
        raise DegenerateConfiguration(
            f"quintic reduction failed after {_STAGE_RETRIES} attempts: {failure}"
        )


def _ledger_check(stages, is_full_reduction):
    if is_full_reduction:
        if len(stages) < 2:
            return False, "trace too short for a full reduction"
        pre, final = stages[:-1], stages[-1]
        bad = [s.auxiliary_degree for s in pre if s.auxiliary_degree not in (2, 3, 4, 6)]
        if bad:
            return False, f"pre-final auxiliary degrees outside {{2,3,4,6}}: {bad}"
        if not 1 <= final.auxiliary_degree <= 20:
            return False, f"final intersection degree {final.auxiliary_degree} exceeds 20"
        return True, (
            f"degrees {[s.auxiliary_degree for s in pre]} + final {final.auxiliary_degree}"
        )
    degrees = sorted(s.auxiliary_degree for s in stages)
    if degrees != [2, 2, 3]:
        return False, f"origin-move degrees {degrees} != [2, 2, 3]"
    return True, "degrees [2, 2, 3]"


def verify_report(report: ReductionReport,
                  precision_bits: int = DEFAULT_PRECISION_BITS,
                  tolerance_override=None) -> VerifyResult:
    """Independent re-verification of a reduction report.

    Recomputes transformed roots from the input roots, their substitution
    residuals in the final polynomial, the killed-coefficient magnitudes, the
    auxiliary-degree ledger, and the parameter count, using only polynomial
    primitives (never the reduction pipeline). Returns per-check outcomes;
    never raises on a bad report.
    """
    tol = mpf(tolerance_override) if tolerance_override is not None else tolerance(precision_bits)
    checks = []
    final = report.trace.final_poly
    n = final.degree
    is_full = report.input.degree >= 21
    kill = 5 if is_full else 3
    with working_precision(precision_bits):
        scale = final.scale()

        lead = abs(final.coeffs[n] - 1)
        checks.append(CheckOutcome(
            "monic_leading", lead <= tol, f"|lead - 1| = {float(lead):.3e}"))

        const = abs(final.coeffs[0] - 1)
        checks.append(CheckOutcome(
            "unit_constant", const <= tol, f"|constant - 1| = {float(const):.3e}"))

        worst = max(abs(final.coeffs[n - k]) for k in range(1, kill + 1))
        checks.append(CheckOutcome(
            "vanished_coefficients",
            worst <= tol * scale,
            f"max killed coefficient = {float(worst):.3e} (scale {float(scale):.3e})",
        ))

        expected_count = n - 1 - kill
        checks.append(CheckOutcome(
            "parameter_count",
            report.parameter_count == expected_count,
            f"reported {report.parameter_count}, expected {expected_count}",
        ))

        ok, detail = _ledger_check(report.trace.stages, is_full)
        checks.append(CheckOutcome("degree_ledger", ok, detail))

        try:
            input_roots = roots(report.input, precision_bits)
            g = report.trace.final_map.g_coeffs()
            factor = report.trace.scale_factor
            transformed = [peval(g, x) / factor for x in input_roots.roots]
            worst_sub = mpf(0)
            for z in transformed:
                rel = abs(final.eval(z)) / (scale * max(mpf(1), abs(z)) ** n)
                worst_sub = max(worst_sub, rel)
            checks.append(CheckOutcome(
                "root_substitution",
                worst_sub <= tol,
                f"max relative residual = {float(worst_sub):.3e}",
            ))
            out_roots = roots(final, precision_bits)
            matched, worst_gap = _match_roots(transformed, list(out_roots.roots), tol)
            checks.append(CheckOutcome(
                "root_conservation",
                matched,
                f"max matching gap = {float(worst_gap):.3e}",
            ))
        except Exception as exc:  # verification must return FAIL, not raise
            checks.append(CheckOutcome("root_substitution", False, f"failed: {exc}"))
            checks.append(CheckOutcome("root_conservation", False, f"failed: {exc}"))

        claimed = max(report.root_residuals) if report.root_residuals else 0.0
        checks.append(CheckOutcome(
            "claimed_residuals", mpf(claimed) <= tol, f"max claimed = {claimed:.3e}"))

    return VerifyResult(passed=all(c.passed for c in checks), checks=tuple(checks))


def _match_roots(expected, actual, tol):
    """Greedy bijective matching; returns (all matched, worst gap)."""
    used = [False] * len(actual)
    worst = mpf(0)
    if len(expected) != len(actual):
        return False, mpf("inf")
    for z in expected:
        best_idx, best_gap = -1, None
        for idx, w in enumerate(actual):
            if used[idx]:
                continue
            gap = abs(z - w)
            if best_gap is None or gap < best_gap:
                best_idx, best_gap = idx, gap
        used[best_idx] = True
        worst = max(worst, best_gap / (1 + abs(z)))
    return worst <= tol, worst
