"""Exact scalar domains and dense linear algebra.

Two domains are supported: the rationals (``QQ``, values are
:class:`fractions.Fraction`) and prime fields (``GF(p)``, values are Python
ints in ``[0, p)``).  Matrices are plain lists of rows.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy


class DimensionError(ValueError):
    pass


class InterpolationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalar domains
# ---------------------------------------------------------------------------


class RationalField:
    """The field of rational numbers, backed by ``Fraction``."""

    name = "QQ"
    characteristic = 0

    zero = Fraction(0)
    one = Fraction(1)

    def __call__(self, x) -> Fraction:
        if isinstance(x, str):
            return Fraction(x)
        return Fraction(x)

    def is_zero(self, x) -> bool:
        return x == 0

    def neg(self, x):
        return -x

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(x)

    def div(self, x, y):
        return Fraction(x) / y

    def random_element(self, rng, bound: int = 10) -> Fraction:
        return Fraction(rng.randint(-bound, bound))

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")


QQ = RationalField()


class PrimeField:
    """Integers modulo an odd prime ``p``; elements are ints in ``[0, p)``."""

    def __init__(self, p: int, check: bool = True):
        if check and (p < 3 or not sympy.isprime(p)):
            raise ValueError(f"{p} is not an odd prime")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"
        self.zero = 0
        self.one = 1

    def __call__(self, x) -> int:
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"denominator of {x} vanishes mod {self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def is_zero(self, x) -> bool:
        return x == 0

    def neg(self, x):
        return -x % self.p

    def add(self, x, y):
        return (x + y) % self.p

    def sub(self, x, y):
        return (x - y) % self.p

    def mul(self, x, y):
        return x * y % self.p

    def inv(self, x):
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def div(self, x, y):
        return x * self.inv(y) % self.p

    def random_element(self, rng, bound=None) -> int:
        return rng.randrange(self.p)

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


@functools.lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def default_primes(count: int = 2, bits: int = 62) -> list[int]:
    """The ``count`` largest primes below ``2**bits`` (deterministic)."""
    return list(_primes_below(bits, count))


@functools.lru_cache(maxsize=None)
def _primes_below(bits: int, count: int) -> tuple:
    if count == 0:
        return ()
    prev = _primes_below(bits, count - 1)
    x = prev[-1] if prev else 1 << bits
    return prev + (int(sympy.prevprime(x)),)


def scalar_to_str(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def scalar_from_str(s) -> Fraction:
    if isinstance(s, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if not isinstance(s, str):
        raise TypeError(f"expected a decimal string scalar, got {type(s).__name__}")
    return Fraction(s.strip())


# ---------------------------------------------------------------------------
# dense linear algebra
# ---------------------------------------------------------------------------


def _shape(M: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(M)
    cols = len(M[0]) if rows else 0
    for row in M:
        if len(row) != cols:
            raise DimensionError("ragged matrix")
    return rows, cols


def _integer_rows(M, field) -> list[list]:
    """Rows of M in the field; over QQ each row is scaled to integers."""
    if field is QQ or isinstance(field, RationalField):
        out = []
        for row in M:
            row = [Fraction(x) for x in row]
            den = math.lcm(*(x.denominator for x in row)) if row else 1
            out.append([int(x * den) for x in row])
        return out
    return [[field(x) for x in row] for row in M]


def _bareiss_echelon(A: list[list[int]]):
    """Fraction-free row echelon form of an integer matrix (in place).

    Returns (pivot_columns, sign) where ``sign`` tracks row swaps.
    """
    rows, cols = len(A), len(A[0]) if A else 0
    pivots = []
    sign = 1
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            A[r], A[piv] = A[piv], A[r]
            sign = -sign
        pr = A[r]
        p = pr[c]
        for i in range(r + 1, rows):
            row = A[i]
            f = row[c]
            for j in range(c + 1, cols):
                row[j] = (p * row[j] - f * pr[j]) // prev
            row[c] = 0
        # rows above the pivot row in skipped columns keep their values,
        # which is fine for echelon purposes
        prev = p
        pivots.append(c)
        r += 1
    return pivots, sign


def _gauss_jordan_mod(A: list[list[int]], p: int) -> list[int]:
    """Reduced row echelon form mod p (in place); returns pivot columns."""
    rows, cols = len(A), len(A[0]) if A else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if A[i][c] % p), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        pr = A[r]
        for i in range(rows):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], pr)]
        pivots.append(c)
        r += 1
    return pivots


def det(M: Sequence[Sequence], field=QQ):
    """Exact determinant of a square matrix."""
    rows, cols = _shape(M)
    if rows != cols:
        raise DimensionError(f"determinant of a {rows}x{cols} matrix")
    if rows == 0:
        return field.one
    if isinstance(field, RationalField):
        scale = Fraction(1)
        A = []
        for row in M:
            row = [Fraction(x) for x in row]
            den = math.lcm(*(x.denominator for x in row))
            scale *= den
            A.append([int(x * den) for x in row])
        pivots, sign = _bareiss_echelon(A)
        if len(pivots) < rows:
            return Fraction(0)
        return Fraction(sign * A[-1][-1]) / scale
    p = field.p
    A = [[field(x) for x in row] for row in M]
    sign = 1
    result = 1
    for c in range(rows):
        piv = next((i for i in range(c, rows) if A[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            sign = -sign
        result = result * A[c][c] % p
        inv = pow(A[c][c], -1, p)
        for i in range(c + 1, rows):
            f = A[i][c] * inv % p
            if f:
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[c])]
    return sign * result % p


def det_top_minor(vectors: Sequence[Sequence], m: int, field=QQ):
    """Determinant of the top ``m x m`` minor of the matrix with the given columns."""
    if len(vectors) != m:
        raise DimensionError(f"need exactly {m} vectors, got {len(vectors)}")
    if m == 0:
        return field.one
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise DimensionError("vectors of different lengths")
    if m > n:
        raise DimensionError(f"minor size {m} exceeds dimension {n}")
    return det([[v[i] for v in vectors] for i in range(m)], field)


def rank(M: Sequence[Sequence], field=QQ) -> int:
    rows, cols = _shape(M)
    if rows == 0 or cols == 0:
        return 0
    A = _integer_rows(M, field)
    if isinstance(field, RationalField):
        return len(_bareiss_echelon(A)[0])
    return len(_gauss_jordan_mod(A, field.p))


def normalize_integer_vector(v: Sequence) -> list[int]:
    """Scale a rational vector to coprime integers with positive leading entry."""
    v = [Fraction(x) for x in v]
    den = math.lcm(*(x.denominator for x in v))
    w = [int(x * den) for x in v]
    g = math.gcd(*w)
    if g == 0:
        return w
    w = [x // g for x in w]
    lead = next(x for x in w if x)
    return w if lead > 0 else [-x for x in w]


def nullspace(M: Sequence[Sequence], field=QQ, cols: int | None = None) -> list[list]:
    """Basis of the right kernel {v : M v = 0}.

    Over QQ every vector is returned as coprime integers whose first nonzero
    entry is positive; over GF(p) the first nonzero entry is 1.
    ``cols`` fixes the column count when M has no rows.
    """
    rows, ncols = _shape(M)
    if rows == 0:
        if cols is None:
            raise DimensionError("column count of an empty matrix is unknown")
        ncols = cols
        return [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    A = _integer_rows(M, field)
    basis = []
    if isinstance(field, RationalField):
        pivots, _ = _bareiss_echelon(A)
        free = [c for c in range(ncols) if c not in pivots]
        for f in free:
            x = [Fraction(0)] * ncols
            x[f] = Fraction(1)
            for r in range(len(pivots) - 1, -1, -1):
                c = pivots[r]
                s = sum(A[r][j] * x[j] for j in range(c + 1, ncols))
                x[c] = Fraction(-s) / A[r][c]
            basis.append(normalize_integer_vector(x))
        return basis
    p = field.p
    pivots = _gauss_jordan_mod(A, p)
    free = [c for c in range(ncols) if c not in pivots]
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for r, c in enumerate(pivots):
            x[c] = -A[r][f] % p
        lead = next(y for y in x if y)
        inv = pow(lead, -1, p)
        basis.append([y * inv % p for y in x])
    return basis


def matvec(M: Sequence[Sequence], v: Sequence, field=QQ) -> list:
    out = []
    for row in M:
        acc = field.zero
        for a, b in zip(row, v):
            acc = field.add(acc, field.mul(field(a), field(b)))
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# modular reconstruction
# ---------------------------------------------------------------------------


def crt(residues: Sequence[int], moduli: Sequence[int]) -> tuple[int, int]:
    """Combine residues modulo pairwise coprime moduli; returns (x, prod)."""
    if len(residues) != len(moduli):
        raise ValueError("residue and modulus lists differ in length")
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        if math.gcd(m, n) != 1:
            raise ValueError("moduli are not pairwise coprime")
        # x + m*k = r (mod n)
        k = (r - x) * pow(m, -1, n) % n
        x, m = x + m * k, m * n
    return x % m, m


def symmetric_residue(x: int, m: int) -> int:
    x %= m
    return x - m if x > m // 2 else x


def rational_reconstruct(a: int, m: int, bound: int | None = None) -> Fraction | None:
    """Find n/d = a (mod m) with |n|, d <= bound (default sqrt(m/2)).

    Returns None when no such fraction exists.
    """
    if bound is None:
        bound = math.isqrt(m // 2)
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    frac = Fraction(r1, s1)
    if (frac.numerator - a * frac.denominator) % m:
        return None
    return frac


# ---------------------------------------------------------------------------
# univariate polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial with rational coefficients, low degree first."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, k: int, c=1) -> "UniPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        acc = Fraction(0) if not isinstance(x, int) or self.coeffs else 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        lead = other.leading
        for k in range(len(q) - 1, -1, -1):
            c = rem[k + other.degree] / lead
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return UniPoly(q), UniPoly(rem[: other.degree] if other.degree > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return UniPoly(c / self.leading for c in self.coeffs)

    def content(self) -> Fraction:
        """Positive rational c such that self / c has coprime integer coefficients."""
        if self.is_zero():
            return Fraction(0)
        den = math.lcm(*(c.denominator for c in self.coeffs))
        g = math.gcd(*(int(c * den) for c in self.coeffs))
        return Fraction(g, den)

    def primitive(self) -> "UniPoly":
        """Integer primitive part with positive leading coefficient."""
        if self.is_zero():
            return self
        p = UniPoly(c / self.content() for c in self.coeffs)
        return p if p.leading > 0 else -p

    def derivative(self) -> "UniPoly":
        return UniPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def to_strs(self) -> list[str]:
        return [scalar_to_str(c) for c in self.coeffs]

    @classmethod
    def from_strs(cls, items: Sequence) -> "UniPoly":
        return cls(scalar_from_str(s) for s in items)

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("q" if k == 1 else f"q^{k}")
            if mono and abs(c) == 1:
                s = mono
            else:
                s = scalar_to_str(abs(c)) + ("*" + mono if mono else "")
            terms.append(("-" if c < 0 else "+", s))
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sgn, s in terms[1:]:
            out += f" {sgn} {s}"
        return out


def _as_poly(x) -> UniPoly:
    return x if isinstance(x, UniPoly) else UniPoly([x])


def interpolate(points: Sequence[tuple], max_degree: int | None = None) -> UniPoly:
    """Exact polynomial of minimal degree through the given (x, y) points.

    With ``max_degree`` set, points that do not lie on a polynomial of at most
    that degree raise :class:`InterpolationError`.
    """
    if not points:
        raise InterpolationError("no points")
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise InterpolationError("interpolation nodes are not distinct")
    # Newton divided differences
    coef = list(ys)
    n = len(xs)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = UniPoly([coef[-1]])
    for i in range(n - 2, -1, -1):
        poly = poly * UniPoly([-xs[i], 1]) + coef[i]
    if max_degree is not None and poly.degree > max_degree:
        raise InterpolationError(
            f"points are inconsistent with degree <= {max_degree} (interpolant has degree {poly.degree})"
        )
    return poly


def poly_gcd(polys: Sequence[UniPoly]) -> UniPoly:
    """Monic gcd of the inputs (the zero polynomial only if all inputs are zero)."""
    g = UniPoly()
    for p in polys:
        a, b = g, p
        while not b.is_zero():
            a, b = b, a % b
        g = a.monic()
    return g


def rational_roots(poly: UniPoly) -> set[Fraction]:
    """All rational roots of a nonzero polynomial (divisor test)."""
    if poly.is_zero():
        raise ValueError("the zero polynomial has every number as a root")
    p = poly.primitive()
    roots = set()
    c = [int(x) for x in p.coeffs]
    k = 0
    while c and c[0] == 0:
        c.pop(0)
        k += 1
    if k:
        roots.add(Fraction(0))
    if len(c) <= 1:
        return roots
    reduced = UniPoly(c)
    for num in sympy.divisors(abs(c[0])):
        for den in sympy.divisors(abs(c[-1])):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if cand not in roots and reduced(cand) == 0:
                    roots.add(cand)
    return roots


def common_roots(polys: Sequence[UniPoly]) -> set[Fraction]:
    """Rational numbers at which every input polynomial vanishes."""
    polys = list(polys)
    if not polys:
        raise ValueError("no polynomials given")
    if any(p.is_zero() for p in polys):
        raise ValueError("common_roots needs nonzero polynomials")
    return rational_roots(poly_gcd(polys))
