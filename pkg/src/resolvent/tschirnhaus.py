"""Tschirnhaus transformation engine.

Substituting y = g(x) with deg g = n-1 into a monic degree-n equation yields
a new monic degree-n equation whose coefficients are polynomials in the
substitution coefficients. The hot path computes the transformed equation by
Newton identities on power sums of g modulo the input (no root extraction);
the public transform() additionally cross-checks against an interpolated
resultant elimination.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from mpmath import mp, mpf, mpc

from .errors import (
    DegenerateConfiguration,
    NonSquarefree,
    PrecisionExhausted,
    ZeroConstant,
)
from .linalg import child_seed, combine, nullspace, rand_real, rand_scalar, vnorm
from .numerics import (
    DEFAULT_PRECISION_BITS,
    UniPoly,
    balanced_roots,
    inverse_dft,
    peval,
    pmod_monic,
    pmul,
    ptrim,
    frame_scale_exponent,
    noise_tolerance,
    resultant,
    root_scale_exponent,
    roots,
    tolerance,
    unit_roots,
    working_precision,
    _power_sums_list,
)
from .forms import LinearForm, linear_part
from .tracing import TraceStage

_MAX_RETRIES = 8


@dataclass(frozen=True)
class TschirnhausMap:
    """Coefficients t_0..t_{n-2} of y = t_0 + t_1 x + ... + x^(n-1)."""

    n: int
    t: tuple

    def __post_init__(self):
        if len(self.t) != self.n - 1:
            raise ValueError("need exactly n-1 coefficients")

    def g_coeffs(self) -> list:
        return [mpc(x) for x in self.t] + [mpc(1)]

    def g_poly(self) -> UniPoly:
        return UniPoly(coeffs=tuple(self.g_coeffs()))

    def apply(self, x) -> mpc:
        return peval(self.g_coeffs(), x)


@dataclass(frozen=True)
class TransformedEquation:
    source: UniPoly
    map: TschirnhausMap
    result: UniPoly
    C: tuple  # C[i-1] is the coefficient of y^(n-i)


def _source_power_sums(f: UniPoly, upto: int) -> list:
    """Power sums [p_0=n, p_1, ..., p_upto] of the roots of monic f."""
    sums = _power_sums_list(list(f.coeffs), upto)
    return [mpc(f.degree)] + sums


def _transformed_sums(f_coeffs, ps, g, upto: int) -> list:
    """First `upto` power sums of g(root) over the roots of f.

    Uses traces of powers of g modulo f: each g^k mod f has degree < n, and
    its trace is the power-sum-weighted sum of its coefficients.
    """
    gk = pmod_monic(g, f_coeffs) if len(g) > len(f_coeffs) - 1 else list(g)
    out = []
    for _ in range(upto):
        trace = mpc(0)
        for j, c in enumerate(gk):
            if c != 0:
                trace += c * ps[j]
        out.append(trace)
        if len(out) == upto:
            break
        gk = pmod_monic(pmul(gk, g), f_coeffs)
    return out


def _coeffs_from_sums(sums, n: int) -> list:
    """[C_1..C_n] of the monic polynomial with the given root power sums."""
    e = [mpc(1)]
    for k in range(1, n + 1):
        acc = mpc(0)
        for i in range(1, k + 1):
            term = e[k - i] * sums[i - 1]
            acc += term if i % 2 == 1 else -term
        e.append(acc / k)
    return [e[i] if i % 2 == 0 else -e[i] for i in range(1, n + 1)]


class CoefficientCache:
    """Memoized evaluation of leading transformed coefficients at many points.

    Shared by form extraction and the reduction driver so that every distinct
    substitution point costs one partial power-sum computation.
    """

    def __init__(self, f: UniPoly, precision_bits: int = DEFAULT_PRECISION_BITS):
        if not f.is_monic or f.degree < 2:
            raise ValueError("need a monic polynomial of degree >= 2")
        self.f = f
        self.precision_bits = precision_bits
        with working_precision(precision_bits):
            self._f_coeffs = list(f.coeffs)
            self._ps = _source_power_sums(f, f.degree - 1)
        self._memo = {}

    def coefficients(self, t, upto: int) -> list:
        """[C_1..C_upto] of the transformed equation at substitution point t."""
        key = tuple(t)
        hit = self._memo.get(key)
        if hit is not None and len(hit) >= upto:
            return list(hit[:upto])
        with working_precision(self.precision_bits):
            g = [mpc(x) for x in key] + [mpc(1)]
            sums = _transformed_sums(self._f_coeffs, self._ps, g, upto)
            cs = _coeffs_from_sums(sums, upto)
        self._memo[key] = cs
        return list(cs)

    def evaluator(self, i: int):
        """Black-box map t -> C_i(t)."""
        def evaluate(t):
            return self.coefficients(t, i)[i - 1]

        return evaluate


def transform(f: UniPoly, tmap: TschirnhausMap,
              precision_bits: int = DEFAULT_PRECISION_BITS,
              cross_check: bool = True) -> TransformedEquation:
    """Transformed equation prod (y - g(x_i)) over the roots x_i of f.

    Computed from power sums of g modulo f; when cross_check is set the
    result is compared coefficient-wise against the interpolated resultant
    elimination of x, and PrecisionExhausted signals that the two paths
    disagree beyond tolerance (raise precision_bits and rerun).
    """
    n = f.degree
    if n < 2 or not f.is_monic:
        raise ValueError("transform() needs a monic polynomial of degree >= 2")
    if tmap.n != n:
        raise ValueError("map size does not match the polynomial degree")
    with working_precision(precision_bits):
        f_coeffs = list(f.coeffs)
        ps = _source_power_sums(f, n - 1)
        g = tmap.g_coeffs()
        sums = _transformed_sums(f_coeffs, ps, g, n)
        cs = _coeffs_from_sums(sums, n)
        coeffs = [mpc(0)] * (n + 1)
        coeffs[n] = mpc(1)
        for i in range(1, n + 1):
            coeffs[n - i] = cs[i - 1]
        result = UniPoly(coeffs=tuple(coeffs))
        if cross_check:
            _resultant_cross_check(f, g, result, precision_bits)
        return TransformedEquation(source=f, map=tmap, result=result, C=tuple(cs))


def _resultant_cross_check(f, g, result, precision_bits):
    """Interpolated elimination of x, compared in the root-balanced frame.

    Sampling at the result's own root scale keeps every balanced coefficient
    above the interpolation noise even when the transformed roots are huge.
    """
    n = f.degree
    radius_exp = root_scale_exponent(result)
    radius = mpf(2) ** radius_exp
    nodes = [radius * w for w in unit_roots(n + 1)]
    down = radius ** -n
    values = []
    for y in nodes:
        shifted = [-c for c in g]
        shifted[0] += y
        values.append(resultant(f, UniPoly(coeffs=tuple(shifted)), precision_bits) * down)
    # interp holds the monic balanced polynomial prod (u - y_i / radius)
    interp = inverse_dft(values)
    lead = interp[-1]
    tol = tolerance(precision_bits)
    if abs(abs(lead) - 1) > tol * 16:
        raise PrecisionExhausted("resultant path lost the unit leading coefficient")
    balanced = []
    power = down
    for c in result.coeffs:
        balanced.append(c * power)
        power *= radius
    scale = max(abs(c) for c in balanced)
    bound = tol * scale * 8 * (n + 1)
    for a, b in zip(interp, balanced):
        if abs(a / lead - b) > bound:
            raise PrecisionExhausted(
                "power-sum and resultant paths disagree beyond tolerance"
            )


def coefficient_functional(f: UniPoly, i: int,
                           precision_bits: int = DEFAULT_PRECISION_BITS):
    """Black-box map t -> C_i(t), a polynomial of total degree <= i in t."""
    if not 1 <= i <= f.degree:
        raise ValueError("need 1 <= i <= n")
    return CoefficientCache(f, precision_bits).evaluator(i)


def c1_functional(f: UniPoly, precision_bits: int = DEFAULT_PRECISION_BITS):
    """C_1 as an explicit affine map: (LinearForm in t, constant).

    C_1(t) = -(n t_0 + sum_j t_j p_j + p_{n-1}) with p_j the power sums of f.
    """
    n = f.degree
    with working_precision(precision_bits):
        ps = _source_power_sums(f, n - 1)
        coeffs = [-mpc(n)] + [-ps[j] for j in range(1, n - 1)]
        return LinearForm(coeffs=tuple(coeffs)), -ps[n - 1]


def kill_c1(f: UniPoly, t_rest,
            precision_bits: int = DEFAULT_PRECISION_BITS) -> TschirnhausMap:
    """Solve the linear equation C_1(t) = 0 for t_0 given t_1..t_{n-2}.

    Always solvable: the t_0 coefficient of C_1 is -n.
    """
    n = f.degree
    rest = list(t_rest)
    if len(rest) != n - 2:
        raise ValueError("t_rest must supply t_1..t_{n-2}")
    with working_precision(precision_bits):
        ps = _source_power_sums(f, n - 1)
        acc = ps[n - 1]
        for j, tj in enumerate(rest, start=1):
            acc += mpc(tj) * ps[j]
        t0 = -acc / n
        return TschirnhausMap(n=n, t=tuple([t0] + [mpc(x) for x in rest]))


def scale_input(f: UniPoly, e: int) -> UniPoly:
    """Conjugate f by x -> 2^e x (monic result; roots shrink by 2^e).

    Pure power-of-two scaling: exact at any precision.
    """
    n = f.degree
    coeffs = []
    for k, c in enumerate(f.coeffs):
        factor = mpf(2) ** (e * (k - n))
        coeffs.append(mpc(c) * factor)
    return UniPoly(coeffs=tuple(coeffs))


def unscale_map(tmap: TschirnhausMap, e: int) -> TschirnhausMap:
    """Map found for the 2^e-scaled input, expressed in the original frame.

    If t solves the scaled problem, t_j 2^(e(n-1-j)) is a unit-leading
    substitution for the original input whose transformed equation is the
    scaled-frame one with coefficient i multiplied by 2^(e i (n-1)); the
    vanishing pattern and the normalized output are unchanged.
    """
    n = tmap.n
    t = [x * mpf(2) ** (e * (n - 1 - j)) for j, x in enumerate(tmap.t)]
    return TschirnhausMap(n=n, t=tuple(t))


def restrict_to_line(evaluate, base, direction, degree: int) -> UniPoly:
    """Univariate polynomial s -> evaluate(base + s*direction), degree known.

    Sampled on the unit roots and inverted by DFT; exact for polynomial
    evaluators of the stated degree.
    """
    nodes = unit_roots(degree + 1)
    values = []
    for s in nodes:
        point = [b + s * d for b, d in zip(base, direction)]
        values.append(evaluate(point))
    return UniPoly(coeffs=tuple(inverse_dft(values)))


def _solve_line(poly: UniPoly, expected_degree: int, precision_bits: int):
    """Roots of a line-restricted polynomial whose trimmed degree must match.

    Returns (roots, relative residuals); tangent (root-clustered) sections
    surface as DegenerateConfiguration so callers re-randomize.
    """
    trimmed = ptrim(list(poly.coeffs), noise_tolerance(precision_bits))
    if len(trimmed) - 1 != expected_degree:
        raise DegenerateConfiguration(
            f"line restriction degenerated to degree {len(trimmed) - 1}"
        )
    try:
        return balanced_roots(UniPoly(coeffs=tuple(trimmed)), precision_bits)
    except NonSquarefree as exc:
        raise DegenerateConfiguration(f"tangent line section: {exc}") from exc


def find_c123_point(f: UniPoly, seed: int,
                    precision_bits: int = DEFAULT_PRECISION_BITS):
    """Common point of C_1 = C_2 = C_3 = 0 in substitution-coefficient space.

    Construction: (i) solve C_1 = 0 linearly, (ii) meet a seeded random line
    in that hyperplane with the quadric C_2 = 0 (degree-2 auxiliary), (iii)
    find a line on the quadric through the found point (second degree-2
    auxiliary, direction killed by the gradient), (iv) restrict C_3 to that
    line (degree-3 auxiliary). Returns (map, trace stages with degrees
    {2, 2, 3}); deterministic given the seed.
    """
    n = f.degree
    if n < 5:
        raise ValueError("needs degree >= 5 (at least four free parameters)")
    m = n - 1
    tol = tolerance(precision_bits)
    with working_precision(precision_bits):
        exponent = frame_scale_exponent(f)
        scaled = scale_input(f, exponent) if exponent != 0 else f
        cache = CoefficientCache(scaled, precision_bits)
        ell, _ = c1_functional(scaled, precision_bits)
        base0 = list(kill_c1(scaled, [0] * (n - 2), precision_bits).t)
        chart = nullspace([list(ell.coeffs)], m)
        if len(chart) != m - 1:
            raise DegenerateConfiguration("C_1 direction space has the wrong dimension")
        failure = None
        for attempt in range(_MAX_RETRIES):
            rng = random.Random(child_seed(seed, attempt))
            try:
                tmap, stages = _find_c123_attempt(
                    scaled, cache, ell, base0, chart, rng, seed, precision_bits, tol
                )
            except DegenerateConfiguration as exc:
                failure = exc
                continue
            if exponent != 0:
                tmap = unscale_map(tmap, exponent)
            return tmap, stages
        raise DegenerateConfiguration(
            f"no C_1=C_2=C_3 point after {_MAX_RETRIES} attempts: {failure}"
        )


def _find_c123_attempt(f, cache, ell, base0, chart, rng, seed, precision_bits, tol):
    n = f.degree
    m = n - 1
    c2 = cache.evaluator(2)
    c3 = cache.evaluator(3)

    # (ii) line inside {C_1 = 0} meets the quadric {C_2 = 0}
    anchor = [b + x for b, x in zip(base0, combine(chart, [rand_scalar(rng) for _ in chart]))]
    direction = combine(chart, [rand_scalar(rng) for _ in chart])
    dnorm = vnorm(direction)
    if dnorm < mpf(2) ** -8:
        raise DegenerateConfiguration("degenerate line direction")
    direction = [x / dnorm for x in direction]
    line2 = restrict_to_line(c2, anchor, direction, 2)
    roots2, rels2 = _solve_line(line2, 2, precision_bits)
    s2 = roots2[0]
    point = [a + s2 * d for a, d in zip(anchor, direction)]
    stage_a = TraceStage(
        name="line_meets_quadric",
        auxiliary_degree=2,
        residual=float(rels2[0]),
        seed_used=seed,
    )

    # (iii) direction through the point staying on the quadric: kill both the
    # gradient of C_2 at the point and the C_1 direction, then solve for a
    # null direction of the homogeneous quadratic part.
    gradient = linear_part(lambda v: c2([p + x for p, x in zip(point, v)]),
                           m, max_degree=2, precision_bits=precision_bits)
    if gradient.scale() <= tol:
        raise DegenerateConfiguration("quadric gradient vanished at the section point")
    ruled = nullspace([list(ell.coeffs), list(gradient.coeffs)], m)
    if len(ruled) != m - 2:
        raise DegenerateConfiguration("tangent direction space has the wrong dimension")
    c2_at_point = c2(point)

    def quadratic_tail(w):
        plus = c2([p + x for p, x in zip(point, w)])
        minus = c2([p - x for p, x in zip(point, w)])
        return (plus + minus) / 2 - c2_at_point

    w_base = combine(ruled, [rand_scalar(rng) for _ in ruled])
    w_dir = combine(ruled, [rand_scalar(rng) for _ in ruled])
    wnorm = vnorm(w_dir)
    if wnorm < mpf(2) ** -8:
        raise DegenerateConfiguration("degenerate ruling direction")
    w_dir = [x / wnorm for x in w_dir]
    line_q = restrict_to_line(quadratic_tail, w_base, w_dir, 2)
    roots_q, rels_q = _solve_line(line_q, 2, precision_bits)
    sq = roots_q[0]
    ruling = [a + sq * d for a, d in zip(w_base, w_dir)]
    rnorm = vnorm(ruling)
    if rnorm < mpf(2) ** -24:
        raise DegenerateConfiguration("ruling direction collapsed to zero")
    ruling = [x / rnorm for x in ruling]
    stage_b = TraceStage(
        name="ruling_direction_on_quadric",
        auxiliary_degree=2,
        residual=float(rels_q[0]),
        seed_used=seed,
    )

    # (iv) cubic along the ruled line
    line3 = restrict_to_line(c3, point, ruling, 3)
    roots3, rels3 = _solve_line(line3, 3, precision_bits)
    s3 = roots3[0]
    t_star = [p + s3 * r for p, r in zip(point, ruling)]
    stage_c = TraceStage(
        name="cubic_on_ruled_line",
        auxiliary_degree=3,
        residual=float(rels3[0]),
        seed_used=seed,
    )

    tmap = TschirnhausMap(n=n, t=tuple(t_star))
    values = cache.coefficients(t_star, n)
    scale = max(abs(c) for c in values)
    if scale == 0 or any(abs(values[k]) > tol * scale for k in range(3)):
        raise DegenerateConfiguration("residuals at the intersection point too large")
    return tmap, [stage_a, stage_b, stage_c]


def normalize_constant(p: UniPoly,
                       precision_bits: int = DEFAULT_PRECISION_BITS):
    """Rescale y = c*z with c the principal n-th root of the constant term.

    Returns (monic polynomial in z with constant term exactly 1, c). Roots
    rescale as z_i = y_i / c. Raises ZeroConstant when the constant term
    vanishes within tolerance (perturb the upstream intersection point).
    """
    n = p.degree
    if not p.is_monic or n < 1:
        raise ValueError("normalize_constant() needs a monic polynomial")
    tol = tolerance(precision_bits)
    constant = p.coeffs[0]
    if abs(constant) <= tol * p.scale():
        raise ZeroConstant("constant term vanishes within tolerance")
    with working_precision(precision_bits):
        c = mp.root(mpc(constant), n)
        coeffs = [mpc(0)] * (n + 1)
        coeffs[0] = mpc(1)
        coeffs[n] = mpc(1)
        power = mpc(1)
        for k in range(1, n):
            power *= c
            coeffs[k] = p.coeffs[k] * power / constant
        return UniPoly(coeffs=tuple(coeffs)), c
