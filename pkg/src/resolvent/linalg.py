"""Dense complex linear algebra on plain Python lists of mpmath numbers.

Vectors are lists of ``mpc``; matrices are lists of row lists. mpmath's own
matrix class is avoided in hot paths (indexing overhead); everything here is
deterministic given the ambient mpmath precision.
"""

from __future__ import annotations

from mpmath import mp, mpf, mpc

_MIX1 = 0x9E3779B97F4A7C15
_MIX2 = 0xBF58476D1CE4E5B9
_MASK63 = (1 << 63) - 1


def child_seed(seed: int, tag: int) -> int:
    """Derive a reproducible sub-seed for retry attempt `tag`."""
    return ((seed * _MIX1) ^ (tag * _MIX2)) & _MASK63


def rand_real(rng):
    """Exact dyadic in [-1, 1]; safe to convert to mpf at any precision."""
    return mpf(rng.randrange(-(1 << 20), (1 << 20) + 1)) / (1 << 20)


def rand_scalar(rng) -> mpc:
    return mpc(rand_real(rng), rand_real(rng))


def rand_vector(rng, m: int, min_norm=mpf(2) ** -4):
    while True:
        v = [rand_scalar(rng) for _ in range(m)]
        if vnorm(v) >= min_norm:
            return v


def herm(u, v) -> mpc:
    """Hermitian inner product <u, v> = sum conj(u_i) v_i."""
    acc = mpc(0)
    for a, b in zip(u, v):
        acc += a.conjugate() * b
    return acc


def dot(u, v) -> mpc:
    """Bilinear pairing sum u_i v_i (no conjugation)."""
    acc = mpc(0)
    for a, b in zip(u, v):
        acc += a * b
    return acc


def vnorm(v) -> mpf:
    return mp.sqrt(sum((abs(x) ** 2 for x in v), mpf(0)))


def vadd(u, v):
    return [a + b for a, b in zip(u, v)]


def vsub(u, v):
    return [a - b for a, b in zip(u, v)]


def vscale(v, c):
    return [c * x for x in v]


def combine(vectors, coeffs):
    """Linear combination sum_k coeffs[k] * vectors[k]."""
    out = [mpc(0)] * len(vectors[0])
    for c, vec in zip(coeffs, vectors):
        for i, x in enumerate(vec):
            out[i] += c * x
    return out


def orthonormalize(vectors, drop_tol=None):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Vectors whose residual after projection falls below ``drop_tol`` times
    their original norm are dropped; callers check the returned length.
    """
    if drop_tol is None:
        drop_tol = mpf(2) ** -(mp.prec // 4)
    basis = []
    for w in vectors:
        original = vnorm(w)
        if original == 0:
            continue
        v = list(w)
        for _ in range(2):
            for b in basis:
                c = herm(b, v)
                v = [x - c * y for x, y in zip(v, b)]
        nrm = vnorm(v)
        if nrm <= drop_tol * original:
            continue
        basis.append([x / nrm for x in v])
    return basis


def nullspace(functionals, m: int, accept_tol=mpf(2) ** -40):
    """Orthonormal basis of { v : sum_j a_j v_j = 0 for each functional a }.

    The bilinear condition a.v = 0 is Hermitian orthogonality to conj(a), so
    the null space is the complement of the conjugated functionals. Standard
    basis vectors are projected in index order; near-dependent candidates
    (residual below accept_tol) are skipped to keep the output well
    conditioned. Callers validate the resulting dimension.
    """
    rows = orthonormalize([[x.conjugate() for x in f] for f in functionals])
    expect = m - len(rows)
    basis = []
    for j in range(m):
        if len(basis) == expect:
            break
        v = [mpc(0)] * m
        v[j] = mpc(1)
        for _ in range(2):
            for b in rows:
                c = herm(b, v)
                v = [x - c * y for x, y in zip(v, b)]
            for b in basis:
                c = herm(b, v)
                v = [x - c * y for x, y in zip(v, b)]
        nrm = vnorm(v)
        if nrm <= accept_tol:
            continue
        basis.append([x / nrm for x in v])
    return basis


def lu_det(rows) -> mpc:
    """Determinant by LU with partial pivoting (deterministic pivot choice)."""
    n = len(rows)
    a = [list(r) for r in rows]
    det = mpc(1)
    for col in range(n):
        piv, pmag = col, abs(a[col][col])
        for r in range(col + 1, n):
            mag = abs(a[r][col])
            if mag > pmag:
                piv, pmag = r, mag
        if pmag == 0:
            return mpc(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        pivot = a[col][col]
        det *= pivot
        for r in range(col + 1, n):
            f = a[r][col] / pivot
            if f == 0:
                continue
            arow, crow = a[r], a[col]
            for c in range(col + 1, n):
                arow[c] -= f * crow[c]
    return det


def smallest_singular_value(vectors) -> mpf:
    """Smallest singular value of the matrix with the given (normalized) columns."""
    cols = []
    for v in vectors:
        nrm = vnorm(v)
        if nrm == 0:
            return mpf(0)
        cols.append([x / nrm for x in v])
    k = len(cols)
    gram = mp.matrix(k, k)
    for a in range(k):
        for b in range(a, k):
            g = herm(cols[a], cols[b])
            gram[a, b] = g
            gram[b, a] = g.conjugate()
    eigenvalues = mp.eighe(gram, eigvals_only=True)
    lo = min(eigenvalues)
    if lo < 0:
        return mpf(0)
    return mp.sqrt(lo)
