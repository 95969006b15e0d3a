"""Multivariate linear/quadratic/cubic forms over complex scalars.

Forms are extracted from black-box polynomial evaluators by exact
finite-difference polarization (step 1 on integer stencils, no small-h
differentiation), restricted to subspaces, and turned into tangent
hyperplanes. All stencils are exact for polynomials of the declared degree.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from mpmath import mp, mpf, mpc

from .errors import DegreeMismatch, ZeroForm
from .linalg import combine, dot, orthonormalize, smallest_singular_value
from .numerics import DEFAULT_PRECISION_BITS, tolerance, working_precision

_CHECK_SEED = 0xC0FFEE


@dataclass(frozen=True)
class LinearForm:
    coeffs: tuple

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def eval(self, v) -> mpc:
        return dot(self.coeffs, v)

    def scale(self) -> mpf:
        return max(abs(c) for c in self.coeffs)


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric matrix; eval(v) = v^T M v (bilinear, no conjugation)."""

    matrix: tuple  # tuple of row tuples, symmetric

    @classmethod
    def from_rows(cls, rows) -> "QuadraticForm":
        m = len(rows)
        sym = [[(mpc(rows[i][j]) + mpc(rows[j][i])) / 2 for j in range(m)] for i in range(m)]
        return cls(matrix=tuple(tuple(r) for r in sym))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def eval(self, v) -> mpc:
        return self.bilinear(v, v)

    def bilinear(self, u, v) -> mpc:
        acc = mpc(0)
        for i, row in enumerate(self.matrix):
            ui = u[i]
            if ui == 0:
                continue
            acc += ui * dot(row, v)
        return acc

    def gradient_row(self, p) -> list:
        """Row vector of w -> 2 B(p, w); the tangent functional at p."""
        return [2 * dot(row, p) for row in self.matrix]

    def scale(self) -> mpf:
        return max(abs(x) for row in self.matrix for x in row)

    def affine_plane_grid(self, q, u, v) -> list:
        """Coefficients c[j][k] of alpha^j beta^k for Q(q + alpha u + beta v)."""
        grid = [[mpc(0)] * 3 for _ in range(3)]
        grid[0][0] = self.eval(q)
        grid[1][0] = 2 * self.bilinear(q, u)
        grid[0][1] = 2 * self.bilinear(q, v)
        grid[2][0] = self.eval(u)
        grid[0][2] = self.eval(v)
        grid[1][1] = 2 * self.bilinear(u, v)
        return grid


def _multiplicity(idx) -> int:
    i, j, k = idx
    if i == j == k:
        return 1
    if i == j or j == k or i == k:
        return 3
    return 6


@dataclass(frozen=True)
class CubicForm:
    """Fully symmetric 3-tensor stored by its distinct entries.

    ``entries`` maps sorted index triples (i <= j <= k) to the tensor value
    T_ijk; eval(v) = sum over all index triples of T_ijk v_i v_j v_k.
    """

    dim: int
    entries: tuple  # tuple of ((i, j, k), value) sorted by index triple

    @classmethod
    def from_entries(cls, dim: int, mapping) -> "CubicForm":
        items = sorted((tuple(idx), mpc(val)) for idx, val in mapping.items())
        return cls(dim=dim, entries=tuple(items))

    @classmethod
    def from_trilinear(cls, dim: int, fn) -> "CubicForm":
        entries = {}
        for idx in itertools.combinations_with_replacement(range(dim), 3):
            entries[idx] = fn(*idx)
        return cls.from_entries(dim, entries)

    def entry(self, i: int, j: int, k: int) -> mpc:
        key = tuple(sorted((i, j, k)))
        for idx, val in self.entries:
            if idx == key:
                return val
        return mpc(0)

    def eval(self, v) -> mpc:
        acc = mpc(0)
        for (i, j, k), val in self.entries:
            acc += _multiplicity((i, j, k)) * val * v[i] * v[j] * v[k]
        return acc

    def trilinear(self, u, v, w) -> mpc:
        acc = mpc(0)
        for (i, j, k), val in self.entries:
            perms = set(itertools.permutations((i, j, k)))
            term = mpc(0)
            for a, b, c in perms:
                term += u[a] * v[b] * w[c]
            acc += val * term
        return acc

    def gradient_row(self, p) -> list:
        """Row vector of w -> 3 T(p, p, w); the tangent functional at p."""
        ei = [mpc(0)] * self.dim
        out = []
        for a in range(self.dim):
            ei[a] = mpc(1)
            out.append(3 * self.trilinear(p, p, ei))
            ei[a] = mpc(0)
        return out

    def scale(self) -> mpf:
        return max(abs(val) for _, val in self.entries)

    def affine_plane_grid(self, q, u, v) -> list:
        """Coefficients c[j][k] of alpha^j beta^k for C(q + alpha u + beta v)."""
        t = self.trilinear
        grid = [[mpc(0)] * 4 for _ in range(4)]
        grid[0][0] = t(q, q, q)
        grid[1][0] = 3 * t(q, q, u)
        grid[0][1] = 3 * t(q, q, v)
        grid[2][0] = 3 * t(q, u, u)
        grid[1][1] = 6 * t(q, u, v)
        grid[0][2] = 3 * t(q, v, v)
        grid[3][0] = t(u, u, u)
        grid[2][1] = 3 * t(u, u, v)
        grid[1][2] = 3 * t(u, v, v)
        grid[0][3] = t(v, v, v)
        return grid


@dataclass(frozen=True)
class LinearSubspace:
    """Subspace given by independent basis vectors, optionally affine.

    Without a base_point the subspace passes through the origin.
    """

    ambient_dim: int
    basis: tuple  # tuple of basis vectors (tuples of mpc)
    base_point: tuple | None = None

    @classmethod
    def create(
        cls,
        ambient_dim: int,
        basis,
        base_point=None,
        precision_bits: int = DEFAULT_PRECISION_BITS,
        assume_independent: bool = False,
    ) -> "LinearSubspace":
        vectors = [tuple(mpc(x) for x in b) for b in basis]
        if not assume_independent:
            threshold = mpf(2) ** -(precision_bits // 4)
            with working_precision(precision_bits):
                smin = smallest_singular_value([list(v) for v in vectors])
            if smin < threshold:
                raise ValueError(
                    f"basis nearly dependent: smallest singular value {mp.nstr(smin, 5)}"
                )
        return cls(
            ambient_dim=ambient_dim,
            basis=tuple(vectors),
            base_point=tuple(mpc(x) for x in base_point) if base_point is not None else None,
        )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def point(self, coords) -> list:
        v = combine([list(b) for b in self.basis], coords)
        if self.base_point is not None:
            v = [x + y for x, y in zip(v, self.base_point)]
        return v


# ---------------------------------------------------------------------------
# extraction stencils

class _Memo:
    """Black-box evaluation memo on integer stencil points."""

    def __init__(self, evaluate, m):
        self.evaluate = evaluate
        self.m = m
        self.values = {}

    def __call__(self, point) -> mpc:
        key = tuple(point)
        val = self.values.get(key)
        if val is None:
            val = self.evaluate([mpc(x) for x in key])
            self.values[key] = val
        return val


def _unit(m, i, factor=1):
    p = [0] * m
    p[i] = factor
    return tuple(p)


def linear_part(evaluate, m: int, max_degree: int = 3,
                precision_bits: int = DEFAULT_PRECISION_BITS) -> LinearForm:
    """Linear part of a polynomial black box of total degree <= 4.

    Antisymmetric stencil (8(F(e)-F(-e)) - (F(2e)-F(-2e)))/12, exact through
    degree four, so cubic terms never contaminate the gradient.
    """
    memo = evaluate if isinstance(evaluate, _Memo) else _Memo(evaluate, m)
    with working_precision(precision_bits):
        coeffs = []
        for i in range(m):
            if max_degree <= 2:
                c = (memo(_unit(m, i)) - memo(_unit(m, i, -1))) / 2
            else:
                c = (
                    8 * (memo(_unit(m, i)) - memo(_unit(m, i, -1)))
                    - (memo(_unit(m, i, 2)) - memo(_unit(m, i, -2)))
                ) / 12
            coeffs.append(c)
        return LinearForm(coeffs=tuple(coeffs))


def quadratic_part(evaluate, m: int, max_degree: int = 3,
                   precision_bits: int = DEFAULT_PRECISION_BITS) -> QuadraticForm:
    """Quadratic part of a polynomial black box of total degree <= 3.

    Symmetrized second differences cancel the odd (linear and cubic) parts:
    B(u,v) = (F(u+v) + F(-u-v) - F(u) - F(-u) - F(v) - F(-v) + 2 F(0)) / 4.
    """
    memo = evaluate if isinstance(evaluate, _Memo) else _Memo(evaluate, m)
    with working_precision(precision_bits):
        zero = memo(tuple([0] * m))
        rows = [[mpc(0)] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                upv = tuple(
                    (1 if k == i else 0) + (1 if k == j else 0) for k in range(m)
                )
                umv = tuple(-x for x in upv)
                b = (
                    memo(upv) + memo(umv)
                    - memo(_unit(m, i)) - memo(_unit(m, i, -1))
                    - memo(_unit(m, j)) - memo(_unit(m, j, -1))
                    + 2 * zero
                ) / 4
                rows[i][j] = b
                rows[j][i] = b
        return QuadraticForm(matrix=tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class FormDecomposition:
    constant: mpc
    linear: LinearForm
    quadratic: QuadraticForm | None
    cubic: CubicForm | None

    def eval(self, v) -> mpc:
        acc = self.constant + self.linear.eval(v)
        if self.quadratic is not None:
            acc += self.quadratic.eval(v)
        if self.cubic is not None:
            acc += self.cubic.eval(v)
        return acc


def extract_forms(evaluate, m: int, max_degree: int,
                  precision_bits: int = DEFAULT_PRECISION_BITS) -> FormDecomposition:
    """Graded parts of a polynomial black box of total degree <= max_degree.

    max_degree picks the stencils: 1 gives (constant, linear), 2 adds the
    quadratic, 3 adds the cubic. The reconstruction identity is verified at
    20 fixed pseudo-random points; DegreeMismatch means the black box has
    higher degree than declared.
    """
    if max_degree not in (1, 2, 3):
        raise ValueError("max_degree must be 1, 2 or 3")
    memo = _Memo(evaluate, m)
    with working_precision(precision_bits):
        constant = memo(tuple([0] * m))
        cubic = None
        if max_degree == 3:
            entries = {}
            for idx in itertools.combinations_with_replacement(range(m), 3):
                entries[idx] = _third_difference(memo, m, idx, constant)
            cubic = CubicForm.from_entries(m, entries)
        if max_degree == 1:
            linear = LinearForm(
                coeffs=tuple(memo(_unit(m, i)) - constant for i in range(m))
            )
            quadratic = None
        else:
            linear = linear_part(memo, m, max_degree, precision_bits)
            quadratic = quadratic_part(memo, m, max_degree, precision_bits)
        decomposition = FormDecomposition(constant, linear, quadratic, cubic)
        _check_reconstruction(memo, m, decomposition, precision_bits)
        return decomposition


def _third_difference(memo, m, idx, zero_value) -> mpc:
    i, j, k = idx
    def point(*axes):
        p = [0] * m
        for a in axes:
            p[a] += 1
        return tuple(p)

    total = (
        memo(point(i, j, k))
        - memo(point(i, j)) - memo(point(i, k)) - memo(point(j, k))
        + memo(point(i)) + memo(point(j)) + memo(point(k))
        - zero_value
    )
    return total / 6


def _check_reconstruction(memo, m, decomposition, precision_bits):
    rng = random.Random(_CHECK_SEED ^ m)
    tol = tolerance(precision_bits)
    scale = max(
        [abs(decomposition.constant)]
        + [abs(c) for c in decomposition.linear.coeffs]
        + ([abs(x) for row in decomposition.quadratic.matrix for x in row]
           if decomposition.quadratic else [])
        + ([abs(v) for _, v in decomposition.cubic.entries]
           if decomposition.cubic else [])
        + [mpf(1)]
    )
    bound = 8 * m ** 3 * tol
    for _ in range(20):
        v = [mpc(rng.randrange(-8, 9), rng.randrange(-8, 9)) / 4 for _ in range(m)]
        expected = memo.evaluate(v)
        got = decomposition.eval(v)
        reach = max(scale, abs(expected), abs(got))
        if abs(expected - got) > bound * reach:
            raise DegreeMismatch(
                "reconstruction residual exceeds tolerance; black box degree "
                "is higher than declared"
            )


# ---------------------------------------------------------------------------
# restriction and tangency

def restrict(form, subspace: LinearSubspace):
    """Pull a form back along the subspace basis: restricted(u) = form(S u)."""
    if subspace.base_point is not None:
        raise ValueError("homogeneous restriction needs a subspace through the origin")
    basis = [list(b) for b in subspace.basis]
    if isinstance(form, LinearForm):
        return LinearForm(coeffs=tuple(form.eval(b) for b in basis))
    if isinstance(form, QuadraticForm):
        k = len(basis)
        rows = [[mpc(0)] * k for _ in range(k)]
        for a in range(k):
            for b in range(a, k):
                val = form.bilinear(basis[a], basis[b])
                rows[a][b] = val
                rows[b][a] = val
        return QuadraticForm(matrix=tuple(tuple(r) for r in rows))
    if isinstance(form, CubicForm):
        return CubicForm.from_trilinear(
            len(basis), lambda a, b, c: form.trilinear(basis[a], basis[b], basis[c])
        )
    raise TypeError(f"cannot restrict {type(form).__name__}")


def compose(outer: LinearSubspace, inner: LinearSubspace) -> LinearSubspace:
    """Subspace of the outer ambient space whose coordinates are inner's."""
    outer_basis = [list(b) for b in outer.basis]
    basis = [combine(outer_basis, coords) for coords in inner.basis]
    return LinearSubspace.create(
        outer.ambient_dim, basis, base_point=outer.base_point, assume_independent=True
    )


def tangent_hyperplane(form: LinearForm, precision_bits: int = DEFAULT_PRECISION_BITS,
                       scale_hint=1) -> LinearSubspace:
    """(m-1)-dimensional null space of a nonzero linear form, through the origin."""
    m = form.dim
    mags = [abs(c) for c in form.coeffs]
    top = max(mags)
    if top <= tolerance(precision_bits) * scale_hint:
        raise ZeroForm("linear form vanishes within tolerance")
    pivot = mags.index(top)
    with working_precision(precision_bits):
        basis = []
        for j in range(m):
            if j == pivot:
                continue
            v = [mpc(0)] * m
            v[j] = mpc(1)
            v[pivot] = -form.coeffs[j] / form.coeffs[pivot]
            basis.append(v)
        return LinearSubspace.create(m, basis, precision_bits=precision_bits)


def orthonormal_subspace(ambient_dim: int, vectors, base_point=None) -> LinearSubspace:
    """Orthonormalized subspace; raises if the vectors were dependent."""
    basis = orthonormalize([list(v) for v in vectors])
    if len(basis) != len(list(vectors)):
        raise ValueError("vectors were linearly dependent")
    return LinearSubspace.create(
        ambient_dim, basis, base_point=base_point, assume_independent=True
    )
