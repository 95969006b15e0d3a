"""Isotropic subspaces of quadric cones and planes on cubic cones.

Two algorithms, both driven by seeded random plane sections with bounded
retry on degeneracy:

* a pair of quadric cones in 3k-space shares a k-dimensional isotropic
  subspace, found by recursion on a common straight-line generator (one
  auxiliary equation of degree <= 4 per level);
* a cubic cone in 5-space contains a 2-plane through its vertex, found via a
  point on a hyperplane section (degree 3) and a common generator of the
  induced conic/cubic pair in 3-space (degree <= 6).

All intersections are computed in affine charts over the complex numbers;
chart re-randomization repairs the measure-zero configurations at infinity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from mpmath import mpf, mpc

from .errors import DegenerateConfiguration, DegenerateSection, NonSquarefree
from .forms import CubicForm, LinearSubspace, QuadraticForm, restrict
from .linalg import child_seed, combine, dot, nullspace, orthonormalize, rand_vector, vnorm
from .numerics import (
    DEFAULT_PRECISION_BITS,
    UniPoly,
    balanced_roots,
    inverse_dft,
    noise_tolerance,
    ptrim,
    resultant,
    roots,
    tolerance,
    unit_roots,
    working_precision,
)
from .tracing import TraceStage

_MAX_RETRIES = 8
_LEAD_REL = mpf(2) ** -24


@dataclass(frozen=True)
class ConePair:
    """Two quadric cones with a common vertex at the origin."""

    Q1: QuadraticForm
    Q2: QuadraticForm

    def __post_init__(self):
        if self.Q1.dim != self.Q2.dim:
            raise ValueError("cones must share the ambient dimension")


@dataclass(frozen=True)
class PlaneSection:
    """Affine 2-plane chart (not through the vertex) with restricted curves."""

    chart: LinearSubspace
    curves: tuple  # bivariate coefficient grids, one per form


def restriction_bound(dim: int, precision_bits: int) -> mpf:
    """Residual bound 32 m^2 tol for restricted-form entries (times scale)."""
    return 32 * dim * dim * tolerance(precision_bits)


def max_restriction_entry(form) -> mpf:
    if isinstance(form, QuadraticForm):
        return max(abs(x) for row in form.matrix for x in row)
    if isinstance(form, CubicForm):
        return max(abs(v) for _, v in form.entries)
    return max(abs(c) for c in form.coeffs)


def _grid_scale(grid) -> mpf:
    return max(abs(c) for row in grid for c in row)


def _entry_log2(c):
    mag = abs(c)
    if mag == 0:
        return None
    _, _, exp, bc = mag._mpf_
    return exp + bc  # within one of log2|c|


def _balance_exponents(grids):
    """Power-of-two chart rescaling flattening the coefficient magnitudes.

    Fits log2|c_jk| ~ a + b*j + c*k over all nonzero entries (least squares
    on plain floats, deterministic) and returns (-round(b), -round(c)):
    substituting alpha -> 2^(-b) alpha', beta -> 2^(-c) beta' makes the grids
    as flat as a single scaling per variable can.
    """
    points = []
    for grid in grids:
        for j, row in enumerate(grid):
            for k, entry in enumerate(row):
                level = _entry_log2(entry)
                if level is not None:
                    points.append((float(j), float(k), float(level)))
    if len(points) < 4:
        return 0, 0
    n = float(len(points))
    sj = sum(p[0] for p in points)
    sk = sum(p[1] for p in points)
    sl = sum(p[2] for p in points)
    sjj = sum(p[0] * p[0] for p in points)
    skk = sum(p[1] * p[1] for p in points)
    sjk = sum(p[0] * p[1] for p in points)
    sjl = sum(p[0] * p[2] for p in points)
    skl = sum(p[1] * p[2] for p in points)
    # normal equations for L ~ a + b j + c k
    det = (n * (sjj * skk - sjk * sjk)
           - sj * (sj * skk - sjk * sk)
           + sk * (sj * sjk - sjj * sk))
    if abs(det) < 1e-9:
        return 0, 0
    b = (n * (sjl * skk - sjk * skl)
         - sj * (sl * skk - sk * skl)
         + sk * (sl * sjk - sk * sjl)) / det
    c = (n * (sjj * skl - sjl * sjk)
         - sj * (sj * skl - sl * sjk)
         + sk * (sj * sjl - sjj * sl)) / det
    return -int(round(b)), -int(round(c))


def _scale_grid(grid, e_alpha, e_beta):
    out = []
    for j, row in enumerate(grid):
        out.append([c * mpf(2) ** (e_alpha * j + e_beta * k) for k, c in enumerate(row)])
    return out


def _grid_eval(grid, alpha, beta) -> mpc:
    acc = mpc(0)
    apow = mpc(1)
    for row in grid:
        bpow = apow
        for c in row:
            if c != 0:
                acc += c * bpow
            bpow *= beta
        apow *= alpha
    return acc


def _beta_poly(grid, alpha, degree) -> list:
    coeffs = []
    for k in range(degree + 1):
        acc = mpc(0)
        apow = mpc(1)
        for j in range(len(grid)):
            acc += grid[j][k] * apow
            apow *= alpha
        coeffs.append(acc)
    return coeffs


def bivariate_intersections(grid1, d1: int, grid2, d2: int,
                            precision_bits: int = DEFAULT_PRECISION_BITS,
                            degree_window=(1, None), residual_tol=None,
                            balance: bool = True):
    """Common zeros of two bivariate chart polynomials.

    Eliminates beta by a Sylvester resultant evaluated on unit-root nodes and
    interpolated back (the beta-leading coefficients are alpha-independent,
    so the matrix shape never changes). Returns (trimmed eliminant degree,
    candidates [(alpha, beta, relative residual), ...]) in deterministic
    order; spurious eliminant roots are filtered by back-substitution against
    residual_tol (the certification tolerance by default; callers refining
    candidates afterwards may pass a looser screen).
    """
    tol = mpf(residual_tol) if residual_tol is not None else tolerance(precision_bits)
    with working_precision(precision_bits):
        e_alpha, e_beta = _balance_exponents([grid1, grid2]) if balance else (0, 0)
        flat1 = _scale_grid(grid1, e_alpha, e_beta)
        flat2 = _scale_grid(grid2, e_alpha, e_beta)
        scale1, scale2 = _grid_scale(flat1), _grid_scale(flat2)
        if scale1 == 0 or scale2 == 0:
            raise DegenerateSection("a section curve vanished identically")
        # the beta-leading coefficients are alpha-independent, so the Sylvester
        # shape is constant; they only need to be genuine (above rounding noise)
        floor = noise_tolerance(precision_bits)
        if abs(flat1[0][d1]) <= floor * scale1 or abs(flat2[0][d2]) <= floor * scale2:
            raise DegenerateSection("section is tangent to the line at infinity")
        n_nodes = d1 * d2 + 1
        values = []
        for node in unit_roots(n_nodes):
            p1 = UniPoly(coeffs=tuple(_beta_poly(flat1, node, d1)))
            p2 = UniPoly(coeffs=tuple(_beta_poly(flat2, node, d2)))
            values.append(resultant(p1, p2, precision_bits))
        eliminant = ptrim(inverse_dft(values), noise_tolerance(precision_bits))
        degree = len(eliminant) - 1
        low, high = degree_window
        if degree < low or (high is not None and degree > high):
            raise DegenerateSection(f"eliminant degree {degree} outside the budget")
        try:
            alpha_roots, _ = balanced_roots(UniPoly(coeffs=tuple(eliminant)), precision_bits)
        except NonSquarefree as exc:
            raise DegenerateSection(f"tangent section: {exc}") from exc
        candidates = []
        back_alpha = mpf(2) ** e_alpha
        back_beta = mpf(2) ** e_beta
        for alpha in alpha_roots:
            fiber = UniPoly(coeffs=tuple(_beta_poly(flat1, alpha, d1)))
            try:
                beta_candidates, _ = balanced_roots(fiber, precision_bits)
            except NonSquarefree:
                continue
            for beta in beta_candidates:
                reach = max(mpf(1), abs(alpha), abs(beta))
                r1 = abs(_grid_eval(flat1, alpha, beta)) / (scale1 * reach ** d1)
                r2 = abs(_grid_eval(flat2, alpha, beta)) / (scale2 * reach ** d2)
                if r1 <= tol and r2 <= tol:
                    candidates.append((alpha * back_alpha, beta * back_beta, max(r1, r2)))
        if not candidates:
            raise DegenerateSection("no intersection point survived back-substitution")
        return degree, candidates


def _section_attempt(forms, degrees, rng, precision_bits, degree_window):
    """One seeded affine-2-plane section through a list of cone forms."""
    m = forms[0].dim
    tol = tolerance(precision_bits)
    q = rand_vector(rng, m)
    plane = orthonormalize([rand_vector(rng, m), rand_vector(rng, m)])
    if len(plane) != 2:
        raise DegenerateSection("random plane directions were dependent")
    u, v = plane
    off = list(q)
    for b in (u, v):
        c = dot([x.conjugate() for x in b], off)
        off = [x - c * y for x, y in zip(off, b)]
    if vnorm(off) <= mpf(2) ** -8:
        raise DegenerateSection("section plane nearly passes through the vertex")
    grids = [form.affine_plane_grid(q, u, v) for form in forms]
    degree, candidates = bivariate_intersections(
        grids[0], degrees[0], grids[1], degrees[1], precision_bits, degree_window
    )
    chart = LinearSubspace.create(m, [u, v], base_point=q, assume_independent=True)
    section = PlaneSection(chart=chart, curves=tuple(tuple(tuple(r) for r in g) for g in grids))
    for alpha, beta, _ in candidates:
        x = [qq + alpha * uu + beta * vv for qq, uu, vv in zip(q, u, v)]
        nx = vnorm(x)
        if nx <= mpf(2) ** -20:
            continue
        unit = [xx / nx for xx in x]
        rels = [
            abs(form.eval(unit)) / form.scale() for form in forms
        ]
        if all(r <= tol for r in rels):
            return unit, degree, max(rels), section
    raise DegenerateSection("no candidate met the ambient residual bound")


def common_generator(Q1: QuadraticForm, Q2: QuadraticForm, seed: int,
                     precision_bits: int = DEFAULT_PRECISION_BITS):
    """Direction of a straight line through the vertex lying on both cones.

    Intersects both cones with a seeded random affine 2-plane, eliminates one
    chart variable between the two conics (degree <= 4 eliminant), solves,
    and joins the intersection point to the vertex. Returns (unit vector,
    [trace stage]).
    """
    if Q1.dim != Q2.dim or Q1.dim < 3:
        raise ValueError("need two forms of equal dimension >= 3")
    failure = None
    with working_precision(precision_bits):
        for attempt in range(_MAX_RETRIES):
            rng = random.Random(child_seed(seed, attempt))
            try:
                point, degree, residual, _ = _section_attempt(
                    [Q1, Q2], (2, 2), rng, precision_bits, (2, 4)
                )
            except DegenerateSection as exc:
                failure = exc
                continue
            stage = TraceStage(
                name="quadric_pair_section",
                auxiliary_degree=degree,
                residual=float(residual),
                seed_used=seed,
            )
            return point, [stage]
    raise DegenerateSection(
        f"no common generator after {_MAX_RETRIES} sections: {failure}"
    )


def lemma1_subspace(Q1: QuadraticForm, Q2: QuadraticForm, k: int, seed: int,
                    precision_bits: int = DEFAULT_PRECISION_BITS):
    """k-dimensional subspace through the origin isotropic for both forms.

    Requires ambient dimension exactly 3k. Recursion: common generator ->
    hyperplane section -> both tangent hyperplanes at the shared point ->
    3(k-1)-dimensional subproblem; the result is joined with the generator.
    The trace records exactly k auxiliaries of degree <= 4.
    """
    m = Q1.dim
    if k < 1 or m != 3 * k or Q2.dim != m:
        raise ValueError("ambient dimension must be exactly 3k")
    failure = None
    with working_precision(precision_bits):
        for attempt in range(_MAX_RETRIES):
            try:
                return _lemma1_attempt(Q1, Q2, k, child_seed(seed, attempt), precision_bits)
            except DegenerateConfiguration as exc:
                failure = exc
        raise DegenerateConfiguration(
            f"no isotropic {k}-plane after {_MAX_RETRIES} attempts: {failure}"
        )


def _lemma1_attempt(Q1, Q2, k, seed, precision_bits):
    m = 3 * k
    tol = tolerance(precision_bits)
    generator, stages = common_generator(Q1, Q2, child_seed(seed, 1), precision_bits)
    if k == 1:
        subspace = LinearSubspace.create(m, [generator], assume_independent=True)
        _verify_isotropy((Q1, Q2), subspace, precision_bits)
        return subspace, stages

    rng = random.Random(child_seed(seed, 2))
    hyper = rand_vector(rng, m)
    anchor = dot(hyper, generator)
    if abs(anchor) <= mpf(2) ** -8 * vnorm(hyper):
        raise DegenerateConfiguration("hyperplane nearly contains the generator")
    point = [x / anchor for x in generator]

    tangent1 = Q1.gradient_row(point)
    tangent2 = Q2.gradient_row(point)
    reach = vnorm(point)
    if vnorm(tangent1) <= tol * Q1.scale() * reach or vnorm(tangent2) <= tol * Q2.scale() * reach:
        raise DegenerateConfiguration("shared point is singular on a cone")
    directions = nullspace([hyper, tangent1, tangent2], m)
    if len(directions) != m - 3:
        raise DegenerateConfiguration("tangent intersection has the wrong dimension")
    inner_space = LinearSubspace.create(m, directions, assume_independent=True)
    inner_q1 = restrict(Q1, inner_space)
    inner_q2 = restrict(Q2, inner_space)
    inner, inner_stages = lemma1_subspace(
        inner_q1, inner_q2, k - 1, child_seed(seed, 3), precision_bits
    )
    mapped = [combine(directions, coords) for coords in inner.basis]
    basis = orthonormalize([generator] + mapped)
    if len(basis) != k:
        raise DegenerateConfiguration("generator fell into the recursive subspace")
    subspace = LinearSubspace.create(m, basis, assume_independent=True)
    _verify_isotropy((Q1, Q2), subspace, precision_bits)
    stages = [replace(stages[0], subspace_dims=(m, m - 3))]
    return subspace, stages + inner_stages


def _verify_isotropy(forms, subspace, precision_bits):
    bound = restriction_bound(forms[0].dim, precision_bits)
    for form in forms:
        restricted = restrict(form, subspace)
        if max_restriction_entry(restricted) > bound * form.scale():
            raise DegenerateConfiguration("restriction residual above the success bound")


def lemma2_plane(C: CubicForm, seed: int,
                 precision_bits: int = DEFAULT_PRECISION_BITS):
    """2-plane through the vertex lying entirely on a cubic cone in 5-space.

    Proof-following construction: a point on a hyperplane section of the cone
    (degree-3 auxiliary), the tangent hyperplane there, and a common
    generator of the induced quadric/cubic pair in three variables (degree-6
    eliminant). Trace degrees are {3, 6}.
    """
    if C.dim != 5:
        raise ValueError("ambient dimension must be 5")
    failure = None
    with working_precision(precision_bits):
        for attempt in range(_MAX_RETRIES):
            try:
                return _lemma2_attempt(C, child_seed(seed, attempt), precision_bits)
            except DegenerateConfiguration as exc:
                failure = exc
        raise DegenerateConfiguration(
            f"no plane on the cubic cone after {_MAX_RETRIES} attempts: {failure}"
        )


def _lemma2_attempt(C, seed, precision_bits):
    m = 5
    tol = tolerance(precision_bits)
    scale = C.scale()
    rng = random.Random(seed)

    hyper = rand_vector(rng, m)
    section_dirs = nullspace([hyper], m)
    if len(section_dirs) != m - 1:
        raise DegenerateConfiguration("degenerate hyperplane functional")

    # a point on the cubic hypersurface cut out on the section
    anchor = rand_vector(rng, m)
    lift = dot(hyper, anchor)
    if abs(lift) <= mpf(2) ** -8 * vnorm(hyper):
        raise DegenerateConfiguration("anchor nearly on the vertex hyperplane")
    anchor = [x / lift for x in anchor]
    direction = combine(section_dirs, [c for c in rand_vector(rng, m - 1)])
    dnorm = vnorm(direction)
    if dnorm <= mpf(2) ** -8:
        raise DegenerateConfiguration("degenerate section-line direction")
    direction = [x / dnorm for x in direction]
    line = [
        C.eval(anchor),
        3 * C.trilinear(anchor, anchor, direction),
        3 * C.trilinear(anchor, direction, direction),
        C.eval(direction),
    ]
    trimmed = ptrim(line, noise_tolerance(precision_bits))
    if len(trimmed) - 1 != 3:
        raise DegenerateConfiguration("cubic line restriction lost degree")
    try:
        line_roots, line_rels = balanced_roots(UniPoly(coeffs=tuple(trimmed)), precision_bits)
    except NonSquarefree as exc:
        raise DegenerateConfiguration(f"tangent line section: {exc}") from exc
    s = line_roots[0]
    point = [a + s * d for a, d in zip(anchor, direction)]
    stage_point = TraceStage(
        name="cubic_section_point",
        auxiliary_degree=3,
        residual=float(line_rels[0]),
        seed_used=seed,
        subspace_dims=(5, 3),
    )

    # tangent hyperplane at the point, inside the section's direction space
    gradient = C.gradient_row(point)
    if vnorm(gradient) <= tol * scale * max(mpf(1), vnorm(point)) ** 2:
        raise DegenerateConfiguration("singular point on the cubic cone")
    tangent_dirs = nullspace([hyper, gradient], m)
    if len(tangent_dirs) != 3:
        raise DegenerateConfiguration("tangent space has the wrong dimension")

    # induced quadric/cubic pair in three variables on the tangent directions
    quad_rows = [[mpc(0)] * 3 for _ in range(3)]
    for a in range(3):
        for b in range(a, 3):
            val = 3 * C.trilinear(point, tangent_dirs[a], tangent_dirs[b])
            quad_rows[a][b] = val
            quad_rows[b][a] = val
    induced_quadric = QuadraticForm(matrix=tuple(tuple(r) for r in quad_rows))
    induced_cubic = CubicForm.from_trilinear(
        3,
        lambda a, b, c: C.trilinear(tangent_dirs[a], tangent_dirs[b], tangent_dirs[c]),
    )
    quadric_gone = induced_quadric.scale() <= tol * scale * max(mpf(1), vnorm(point))
    cubic_gone = induced_cubic.scale() <= tol * scale
    if quadric_gone and cubic_gone:
        # the tangent hyperplane lies entirely on the cone (e.g. the cone is
        # a union of hyperplanes): every tangent direction rules the cone
        extra_stages = []
        ruling = tangent_dirs[0]
    elif quadric_gone or cubic_gone:
        raise DegenerateConfiguration("an induced section form vanished identically")
    else:
        inner_rng = random.Random(child_seed(seed, 17))
        generator_local, degree, residual, _ = _section_attempt(
            [induced_quadric, induced_cubic], (2, 3), inner_rng, precision_bits, (6, 6)
        )
        extra_stages = [TraceStage(
            name="conic_cubic_section",
            auxiliary_degree=degree,
            residual=float(residual),
            seed_used=seed,
            subspace_dims=(3, 1),
        )]
        ruling = combine(tangent_dirs, generator_local)

    basis = orthonormalize([point, ruling])
    if len(basis) != 2:
        raise DegenerateConfiguration("plane directions collapsed")
    plane = LinearSubspace.create(m, basis, assume_independent=True)
    restricted = restrict(C, plane)
    bound = restriction_bound(m, precision_bits)
    if max_restriction_entry(restricted) > bound * scale:
        raise DegenerateConfiguration("restricted cubic above the success bound")
    return plane, [stage_point] + extra_stages
