"""Arbitrary-precision complex polynomial arithmetic.

Scalars are mpmath ``mpf``/``mpc``; the working precision of every public
operation is ``precision_bits`` plus a fixed guard margin, so results are
deterministic for a fixed ``precision_bits``. Tolerances follow the
convention tol = 2^(-precision_bits/2), relative to the largest coefficient
magnitude of the polynomial at hand.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf, mpc

from .errors import NoConvergence, NonSquarefree
from .linalg import lu_det

DEFAULT_PRECISION_BITS = 256
GUARD_BITS = 32

_ABERTH_SEED = 0x5EEDBA5E
_ABERTH_MAX_ITER = 600


def working_precision(precision_bits: int):
    """Context manager setting the internal working precision."""
    return mp.workprec(precision_bits + GUARD_BITS)


def tolerance(precision_bits: int) -> mpf:
    """Relative certification tolerance 2^(-precision_bits/2)."""
    return mpf(2) ** -(precision_bits // 2)


def noise_tolerance(precision_bits: int) -> mpf:
    """Relative threshold separating genuine coefficients from rounding noise.

    Sits a safety margin above the working-precision rounding floor; used for
    degree trimming, where the certification tolerance would wrongly discard
    genuinely small leading coefficients of badly scaled polynomials.
    """
    return mpf(2) ** -(precision_bits + GUARD_BITS - 24)


# ---------------------------------------------------------------------------
# exact Gaussian-rational coefficients (construction/IO only; solving is
# always complex-numeric)

ExactScalar = tuple  # (Fraction real, Fraction imag)


def _exact_of(value):
    """Exact (re, im) Fraction pair for ints/Fractions/exact pairs, else None."""
    if isinstance(value, (int, Fraction)):
        return (Fraction(value), Fraction(0))
    if isinstance(value, tuple) and len(value) == 2 and all(
        isinstance(p, (int, Fraction)) for p in value
    ):
        return (Fraction(value[0]), Fraction(value[1]))
    if isinstance(value, complex) and value.real == int(value.real) and value.imag == int(value.imag):
        return (Fraction(int(value.real)), Fraction(int(value.imag)))
    return None


def _exact_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _exact_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _exact_div(a, b):
    d = b[0] * b[0] + b[1] * b[1]
    return ((a[0] * b[0] + a[1] * b[1]) / d, (a[1] * b[0] - a[0] * b[1]) / d)


def _exact_to_mpc(a) -> mpc:
    def part(fr: Fraction) -> mpf:
        return mpf(fr.numerator) / fr.denominator

    return mpc(part(a[0]), part(a[1]))


def _to_mpc(value) -> mpc:
    if isinstance(value, (int, float)):
        return mpc(value)
    if isinstance(value, Fraction):
        return _exact_to_mpc((value, Fraction(0)))
    if isinstance(value, tuple):
        return _exact_to_mpc((Fraction(value[0]), Fraction(value[1])))
    return mpc(value)


# ---------------------------------------------------------------------------
# list-level polynomial helpers (ascending coefficients)

def peval(coeffs, x) -> mpc:
    acc = mpc(coeffs[-1])
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * x + coeffs[k]
    return acc


def pderiv(coeffs):
    if len(coeffs) == 1:
        return [mpc(0)]
    return [k * coeffs[k] for k in range(1, len(coeffs))]


def pmul(a, b):
    out = [mpc(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def pmod_monic(num, den):
    """Remainder of num modulo a monic den (ascending coefficients)."""
    r = list(num)
    dn = len(den) - 1
    for k in range(len(r) - 1, dn - 1, -1):
        c = r[k]
        if c == 0:
            continue
        r[k] = mpc(0)
        base = k - dn
        for j in range(dn):
            r[base + j] -= c * den[j]
    r = r[:dn]
    while len(r) < dn:
        r.append(mpc(0))
    return r


def ptrim(coeffs, rel_tol) -> list:
    """Drop leading coefficients tiny relative to the largest one."""
    mags = [abs(c) for c in coeffs]
    scale = max(mags) if mags else mpf(0)
    if scale == 0:
        return [mpc(0)]
    cut = len(coeffs)
    while cut > 1 and mags[cut - 1] <= rel_tol * scale:
        cut -= 1
    return list(coeffs[:cut])


def inverse_dft(values) -> list:
    """Coefficients of the degree < N polynomial with the given values at the
    N-th roots of unity (node s is exp(2*pi*i*s/N))."""
    n = len(values)
    omega = [mp.expjpi(mpf(-2 * k) / n) for k in range(n)]
    coeffs = []
    for k in range(n):
        acc = mpc(0)
        for s, val in enumerate(values):
            acc += val * omega[(k * s) % n]
        coeffs.append(acc / n)
    return coeffs


def root_scale_exponent(p: UniPoly) -> int:
    """Smallest e >= 0 with 2^e >= |a_{n-k}|^(1/k) for every coefficient.

    2^e bounds the root radius within a factor of two (coefficient bound);
    substituting x -> 2^e x tames the dynamic range of power sums. Integer
    arithmetic on the mpf exponents keeps the choice exact and deterministic.
    """
    n = p.degree
    e = 0
    for k in range(1, n + 1):
        mag = abs(p.coeffs[n - k] / p.coeffs[n])
        if mag == 0:
            continue
        _, _, exp, bc = mag._mpf_
        ek = -((-(exp + bc)) // k)  # ceil((exp+bc)/k) >= ceil(log2|a|/k)
        if ek > e:
            e = ek
    return e


def frame_scale_exponent(p: UniPoly) -> int:
    """Frame normalization: scale the largest root magnitude to about one.

    One notch below the coefficient root bound (which overshoots by up to a
    factor of two). With the top root near unit size the power sums stay
    bounded by about n, so every substitution-space construction works with
    O(1) coordinates: no probe is ever rounded against a large base point.
    """
    return root_scale_exponent(p) - 1


def inverse_dft2(values) -> list:
    """2-D analogue of inverse_dft on a square tensor grid of unit roots.

    values[a][b] holds the sample at (node_a, node_b); returns coefficients
    c[j][k] of alpha^j beta^k.
    """
    n = len(values)
    omega = [mp.expjpi(mpf(-2 * k) / n) for k in range(n)]
    half = [inverse_dft(row) for row in values]  # transform the beta axis
    coeffs = [[mpc(0)] * n for _ in range(n)]
    for k in range(n):
        for j in range(n):
            acc = mpc(0)
            for a in range(n):
                acc += half[a][k] * omega[(j * a) % n]
            coeffs[j][k] = acc / n
    return coeffs


def unit_roots(n: int) -> list:
    return [mp.expjpi(mpf(2 * k) / n) for k in range(n)]


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial; coeffs[i] is the coefficient of x^i.

    ``exact`` carries Gaussian-rational coefficients when the polynomial was
    built from exact data (ints, Fractions, decimal strings); it is preserved
    through construction/IO only.
    """

    coeffs: tuple
    exact: tuple | None = None

    @classmethod
    def make(cls, values) -> "UniPoly":
        exact = []
        for v in values:
            e = _exact_of(v)
            if e is None:
                exact = None
                break
            exact.append(e)
        coeffs = tuple(_to_mpc(v) for v in values)
        if not coeffs:
            coeffs = (mpc(0),)
        return cls(coeffs=coeffs, exact=tuple(exact) if exact else None)

    @classmethod
    def from_roots(cls, rts) -> "UniPoly":
        coeffs = [mpc(1)]
        for r in rts:
            coeffs = pmul(coeffs, [-mpc(r), mpc(1)])
        return cls(coeffs=tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    def scale(self) -> mpf:
        return max(abs(c) for c in self.coeffs)

    def eval(self, x) -> mpc:
        return peval(self.coeffs, x)

    def deriv(self) -> "UniPoly":
        return UniPoly(coeffs=tuple(pderiv(self.coeffs)))


@dataclass(frozen=True)
class RootSet:
    """All roots of a polynomial with certified residuals.

    For each root r with residual rho: |p(r)| <= rho <= certified_tol * scale(p).
    """

    roots: tuple
    residuals: tuple
    certified_tol: mpf


# ---------------------------------------------------------------------------
# operations

def roots(p: UniPoly, precision_bits: int = DEFAULT_PRECISION_BITS) -> RootSet:
    """All complex roots by simultaneous (Ehrlich-Aberth) iteration.

    Deterministic: initial points sit on a perturbed circle derived from a
    fixed internal seed. Roots are sorted by (real, imag). Raises
    NonSquarefree when a converged cluster is tighter than the certification
    tolerance, NoConvergence when the iteration budget runs out.
    """
    n = p.degree
    if n < 1:
        raise ValueError("roots() needs degree >= 1")
    tol = tolerance(precision_bits)
    scale = p.scale()
    with working_precision(precision_bits):
        lead = p.coeffs[-1]
        if lead == 0:
            raise ValueError("leading coefficient is zero")
        monic = [c / lead for c in p.coeffs]
        if n == 1:
            zs = [-monic[0]]
        else:
            zs = _aberth(monic, precision_bits)
        residuals = [abs(peval(p.coeffs, z)) for z in zs]
        order = sorted(range(n), key=lambda i: (zs[i].real, zs[i].imag))
        zs = [zs[i] for i in order]
        residuals = [residuals[i] for i in order]
        _check_clusters(zs, tol)
        bound = tol * scale
        if any(r > bound for r in residuals):
            raise NoConvergence("residuals exceed certification bound; raise precision_bits")
        return RootSet(roots=tuple(zs), residuals=tuple(residuals), certified_tol=tol)


def _check_clusters(zs, tol):
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            gap = abs(zs[i] - zs[j])
            if gap <= tol * (1 + abs(zs[i]) + abs(zs[j])):
                raise NonSquarefree(
                    f"roots {i} and {j} are {mp.nstr(gap, 5)} apart, below certification tolerance"
                )


def _aberth(monic, precision_bits):
    n = len(monic) - 1
    deriv = pderiv(monic)
    radius = 1 + max(abs(c) for c in monic[:-1])
    rng = random.Random(_ABERTH_SEED)
    zs = []
    for k in range(n):
        angle = 2 * mp.pi * (k + mpf(3) / 10) / n + (rng.random() - 0.5) * mp.pi / (4 * n)
        rad = radius * (1 + mpf(1) / 4 * rng.random())
        zs.append(rad * (mp.cos(angle) + 1j * mp.sin(angle)))
    stop = mpf(2) ** -(precision_bits + 16)
    eval_eps = mpf(2) ** -(precision_bits + 8)
    scale = max(abs(c) for c in monic)
    nudge = mpf(2) ** -(precision_bits // 8)
    for _ in range(_ABERTH_MAX_ITER):
        worst = mpf(0)
        settled = True  # every residual at the evaluation-rounding floor
        for i in range(n):
            zi = zs[i]
            pv = peval(monic, zi)
            if pv == 0:
                continue
            majorant = (n + 1) * scale * max(mpf(1), abs(zi)) ** n
            if abs(pv) > eval_eps * majorant:
                settled = False
            dv = peval(deriv, zi)
            acc = mpc(0)
            for j in range(n):
                if j == i:
                    continue
                diff = zi - zs[j]
                if diff == 0:
                    diff = mpc(nudge)
                acc += 1 / diff
            denom = dv - pv * acc
            if denom == 0:
                zs[i] = zi + nudge * (1 + abs(zi))
                worst = mpf(1)
                continue
            w = pv / denom
            zs[i] = zi - w
            rel = abs(w) / (1 + abs(zs[i]))
            if rel > worst:
                worst = rel
        if worst <= stop or settled:
            return zs
    # report the failure mode: clustered roots beat a genuine stall
    tol = tolerance(precision_bits)
    _check_clusters(zs, tol)
    raise NoConvergence(f"no convergence after {_ABERTH_MAX_ITER} iterations")


def balanced_roots(p: UniPoly, precision_bits: int = DEFAULT_PRECISION_BITS):
    """Roots of p solved on its power-of-two root-scale balance.

    Substituting x -> 2^e u keeps the iteration's initial circle honest when
    coefficients span many orders of magnitude; the residual certificate
    applies to the balanced polynomial. Returns (roots in the original
    variable, relative residuals), both sorted by (real, imag).
    """
    e = root_scale_exponent(p)
    if e == 0:
        rs = roots(p, precision_bits)
        scale = p.scale()
        return rs.roots, tuple(r / scale for r in rs.residuals)
    with working_precision(precision_bits):
        factor = mpf(2) ** e
        coeffs = []
        power = mpf(1)
        for c in p.coeffs:
            coeffs.append(c * power)
            power *= factor
        balanced = UniPoly(coeffs=tuple(coeffs))
        rs = roots(balanced, precision_bits)
        scale = balanced.scale()
        mapped = tuple(r * factor for r in rs.roots)
        return mapped, tuple(r / scale for r in rs.residuals)


def resultant(f: UniPoly, g: UniPoly, precision_bits: int = DEFAULT_PRECISION_BITS) -> mpc:
    """Resultant with the convention Res(f,g) = lc(f)^deg(g) * prod g(root of f).

    Computed as the Sylvester determinant: exactly when both inputs carry
    exact Gaussian-rational coefficients, numerically (LU) otherwise.
    """
    m, n = f.degree, g.degree
    if m < 1:
        raise ValueError("resultant() needs deg f >= 1")
    if f.exact is not None and g.exact is not None:
        det = _exact_sylvester_det(f.exact, g.exact)
        return _exact_to_mpc(det)
    with working_precision(precision_bits):
        if n == 0:
            return mpc(g.coeffs[0]) ** m
        rows = _sylvester_rows(list(f.coeffs), list(g.coeffs))
        return lu_det(rows)


def _sylvester_rows(fc, gc):
    m, n = len(fc) - 1, len(gc) - 1
    size = m + n
    fdesc = fc[::-1]
    gdesc = gc[::-1]
    rows = []
    for s in range(n):
        row = [mpc(0)] * size
        for j, c in enumerate(fdesc):
            row[s + j] = mpc(c)
        rows.append(row)
    for s in range(m):
        row = [mpc(0)] * size
        for j, c in enumerate(gdesc):
            row[s + j] = mpc(c)
        rows.append(row)
    return rows


def _exact_sylvester_det(fe, ge):
    m, n = len(fe) - 1, len(ge) - 1
    zero = (Fraction(0), Fraction(0))
    if n == 0:
        acc = (Fraction(1), Fraction(0))
        for _ in range(m):
            acc = _exact_mul(acc, ge[0])
        return acc
    size = m + n
    fdesc = list(fe[::-1])
    gdesc = list(ge[::-1])
    rows = []
    for s in range(n):
        row = [zero] * size
        for j, c in enumerate(fdesc):
            row[s + j] = c
        rows.append(row)
    for s in range(m):
        row = [zero] * size
        for j, c in enumerate(gdesc):
            row[s + j] = c
        rows.append(row)
    # exact Gaussian elimination over Q(i)
    det = (Fraction(1), Fraction(0))
    sign = 1
    for col in range(size):
        piv = None
        for r in range(col, size):
            if rows[r][col] != zero:
                piv = r
                break
        if piv is None:
            return zero
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            sign = -sign
        pivot = rows[col][col]
        det = _exact_mul(det, pivot)
        for r in range(col + 1, size):
            if rows[r][col] == zero:
                continue
            factor = _exact_div(rows[r][col], pivot)
            rows[r][col] = zero
            for c in range(col + 1, size):
                rows[r][c] = _exact_sub(rows[r][c], _exact_mul(factor, rows[col][c]))
    if sign < 0:
        det = (-det[0], -det[1])
    return det


def power_sums(p: UniPoly, k_max: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> list:
    """Power sums p_1..p_k_max of the roots, by Newton's identities.

    No roots are extracted; p must be monic.
    """
    if not p.is_monic:
        raise ValueError("power_sums() needs a monic polynomial")
    if k_max < 1:
        raise ValueError("k_max >= 1")
    with working_precision(precision_bits):
        return _power_sums_list(list(p.coeffs), k_max)


def _power_sums_list(coeffs, k_max):
    n = len(coeffs) - 1
    # elementary symmetric functions: e_i = (-1)^i * coeff of x^(n-i)
    e = [mpc(0)] * (n + 1)
    e[0] = mpc(1)
    for i in range(1, n + 1):
        e[i] = coeffs[n - i] if i % 2 == 0 else -coeffs[n - i]
    ps = [mpc(n)]
    for k in range(1, k_max + 1):
        acc = mpc(0)
        for i in range(1, min(k - 1, n) + 1):
            term = e[i] * ps[k - i]
            acc += term if i % 2 == 1 else -term
        if k <= n:
            acc += (k * e[k]) if k % 2 == 1 else -(k * e[k])
        ps.append(acc)
    return ps[1:]


def coeffs_from_power_sums(sums, n: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> UniPoly:
    """Monic degree-n polynomial whose root power sums are sums[0..n-1]."""
    if len(sums) < n:
        raise ValueError("need at least n power sums")
    with working_precision(precision_bits):
        e = [mpc(1)]
        for k in range(1, n + 1):
            acc = mpc(0)
            for i in range(1, k + 1):
                term = e[k - i] * sums[i - 1]
                acc += term if i % 2 == 1 else -term
            e.append(acc / k)
        coeffs = [mpc(0)] * (n + 1)
        coeffs[n] = mpc(1)
        for i in range(1, n + 1):
            coeffs[n - i] = e[i] if i % 2 == 0 else -e[i]
        return UniPoly(coeffs=tuple(coeffs))
