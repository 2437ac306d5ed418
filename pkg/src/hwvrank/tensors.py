"""Three-leg tensors, the matrix multiplication family, and the diagonal normal form.

Coordinates are 0-based in memory and 1-based in JSON.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import QQ, det, rank, scalar_from_str, scalar_to_str


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class RankDecomposedTensor:
    """Sum of coefficient-weighted simple tensors ``coeff * u (x) v (x) w``."""

    n: int
    terms: tuple = ()

    def __post_init__(self):
        terms = []
        for term in self.terms:
            coeff, u, v, w = term
            vecs = tuple(tuple(Fraction(x) for x in vec) for vec in (u, v, w))
            if any(len(vec) != self.n for vec in vecs):
                raise ValueError(f"term vectors must have length {self.n}")
            terms.append((Fraction(coeff),) + vecs)
        object.__setattr__(self, "terms", tuple(terms))

    def __len__(self):
        return len(self.terms)

    def scaled(self, alpha) -> "RankDecomposedTensor":
        alpha = Fraction(alpha)
        return RankDecomposedTensor(self.n, tuple((alpha * c, u, v, w) for c, u, v, w in self.terms))

    def dense(self) -> dict:
        """Coordinate map (i, j, k) -> value with zero entries removed."""
        out: dict = {}
        for c, u, v, w in self.terms:
            if c == 0:
                continue
            for i, a in enumerate(u):
                if not a:
                    continue
                for j, b in enumerate(v):
                    if not b:
                        continue
                    cab = c * a * b
                    for k, g in enumerate(w):
                        if g:
                            out[(i, j, k)] = out.get((i, j, k), 0) + cab * g
        return {key: val for key, val in out.items() if val != 0}

    def to_sparse(self) -> "SparseTensor":
        return SparseTensor(self.n, self.dense())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {
                    "coeff": scalar_to_str(c),
                    "u": [scalar_to_str(x) for x in u],
                    "v": [scalar_to_str(x) for x in v],
                    "w": [scalar_to_str(x) for x in w],
                }
                for c, u, v, w in self.terms
            ],
        }


@dataclass(frozen=True)
class SparseTensor:
    """Coordinate -> nonzero coefficient map on ``[n]^3``."""

    n: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for pos, val in self.entries.items():
            pos = tuple(int(x) for x in pos)
            if len(pos) != 3 or not all(0 <= x < self.n for x in pos):
                raise ValueError(f"position {pos} outside [0, {self.n})^3")
            val = Fraction(val)
            if val != 0:
                clean[pos] = val
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, pos) -> Fraction:
        return self.entries.get(tuple(pos), Fraction(0))

    def support(self) -> frozenset:
        return frozenset(self.entries)

    def __eq__(self, other):
        return isinstance(other, SparseTensor) and self.n == other.n and self.entries == other.entries

    def __hash__(self):
        return hash((self.n, frozenset(self.entries.items())))

    def to_rank_decomposed(self) -> RankDecomposedTensor:
        """One unit-vector term per nonzero entry."""
        terms = []
        for (i, j, k), val in sorted(self.entries.items()):
            terms.append((val, _unit(self.n, i), _unit(self.n, j), _unit(self.n, k)))
        return RankDecomposedTensor(self.n, tuple(terms))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                {"pos": [i + 1, j + 1, k + 1], "coeff": scalar_to_str(v)}
                for (i, j, k), v in sorted(self.entries.items())
            ],
        }


@dataclass(frozen=True)
class DiagonalTriple:
    """Three invertible diagonal matrices, stored by their diagonals."""

    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        for name in ("a", "b", "c"):
            diag = tuple(Fraction(x) for x in getattr(self, name))
            if any(x == 0 for x in diag):
                raise ValueError("diagonal entries must be nonzero")
            object.__setattr__(self, name, diag)
        if not len(self.a) == len(self.b) == len(self.c):
            raise ValueError("diagonals of different lengths")

    @classmethod
    def identity(cls, n: int) -> "DiagonalTriple":
        one = (1,) * n
        return cls(one, one, one)

    def then(self, other: "DiagonalTriple") -> "DiagonalTriple":
        """The group element 'apply self, then other'."""
        return DiagonalTriple(
            tuple(x * y for x, y in zip(self.a, other.a)),
            tuple(x * y for x, y in zip(self.b, other.b)),
            tuple(x * y for x, y in zip(self.c, other.c)),
        )

    def matrices(self) -> tuple:
        return tuple(_diag_matrix(d) for d in (self.a, self.b, self.c))

    def to_json(self) -> dict:
        return {k: [scalar_to_str(x) for x in getattr(self, k)] for k in ("a", "b", "c")}


def _unit(n: int, i: int) -> tuple:
    return tuple(1 if k == i else 0 for k in range(n))


def _diag_matrix(d: Sequence) -> list:
    n = len(d)
    return [[d[i] if i == j else 0 for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# matrix multiplication tensors
# ---------------------------------------------------------------------------


def mm_tensor(n: int) -> RankDecomposedTensor:
    """<n,n,n> = sum e_ij (x) e_jk (x) e_ki, with e_ij identified with e_{i*n + j}."""
    if n < 1:
        raise ValueError("n must be positive")
    N = n * n
    terms = []
    for i, j, k in itertools.product(range(n), repeat=3):
        terms.append((1, _unit(N, i * n + j), _unit(N, j * n + k), _unit(N, k * n + i)))
    return RankDecomposedTensor(N, tuple(terms))


MM2_SUPPORT = frozenset(
    (i - 1, j - 1, k - 1)
    for i, j, k in [(1, 1, 1), (1, 2, 3), (2, 3, 1), (2, 4, 3), (3, 1, 2), (3, 2, 4), (4, 3, 2), (4, 4, 4)]
)

# labels of the eight coefficients of a tensor with the support of <2,2,2>
MM2_LABELS = {
    "a": (0, 0, 0),
    "b": (0, 1, 2),
    "c": (1, 2, 0),
    "d": (1, 3, 2),
    "e": (2, 0, 1),
    "f": (2, 1, 3),
    "g": (3, 2, 1),
    "h": (3, 3, 3),
}


def perturbed_mm(q) -> RankDecomposedTensor:
    """<2,2,2> with the coefficient of e11 (x) e11 (x) e11 replaced by ``q``.

    For q = 0 the term is dropped, leaving seven terms.
    """
    q = Fraction(q)
    terms = []
    for coeff, u, v, w in mm_tensor(2).terms:
        if u[0] and v[0] and w[0]:
            if q == 0:
                continue
            coeff = q
        terms.append((coeff, u, v, w))
    return RankDecomposedTensor(4, tuple(terms))


def ghz(r: int) -> RankDecomposedTensor:
    return RankDecomposedTensor(r, tuple((1, _unit(r, i), _unit(r, i), _unit(r, i)) for i in range(r)))


# ---------------------------------------------------------------------------
# group action
# ---------------------------------------------------------------------------


def _check_matrix(A, n):
    if len(A) != n or any(len(row) != n for row in A):
        raise ValueError(f"expected a {n}x{n} matrix")
    if det(A, QQ) == 0:
        raise ValueError("singular matrix")


def apply_group(g, t):
    """Apply ``A (x) B (x) C`` to a tensor.

    ``g`` is a DiagonalTriple or a triple of square matrices (lists of rows).
    """
    if isinstance(g, DiagonalTriple):
        mats = g.matrices()
    else:
        mats = tuple([[Fraction(x) for x in row] for row in A] for A in g)
        if len(mats) != 3:
            raise ValueError("expected three matrices")
    for A in mats:
        _check_matrix(A, t.n)
    if isinstance(t, RankDecomposedTensor):
        terms = []
        for c, u, v, w in t.terms:
            terms.append((c, _mv(mats[0], u), _mv(mats[1], v), _mv(mats[2], w)))
        return RankDecomposedTensor(t.n, tuple(terms))
    if isinstance(t, SparseTensor):
        A, B, C = mats
        n = t.n
        out: dict = {}
        for (i, j, k), val in t.entries.items():
            for x in range(n):
                ax = A[x][i]
                if not ax:
                    continue
                for y in range(n):
                    by = B[y][j]
                    if not by:
                        continue
                    for z in range(n):
                        cz = C[z][k]
                        if cz:
                            out[(x, y, z)] = out.get((x, y, z), 0) + val * ax * by * cz
        return SparseTensor(n, out)
    raise TypeError(f"cannot act on {type(t).__name__}")


def _mv(A, v):
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


# ---------------------------------------------------------------------------
# parameter reduction
# ---------------------------------------------------------------------------


def _mm2_coefficients(t: SparseTensor) -> dict:
    if t.n != 4 or t.support() != MM2_SUPPORT:
        raise SupportError("tensor does not have the support of <2,2,2>")
    return {name: t[pos] for name, pos in MM2_LABELS.items()}


def normal_form_q(t: SparseTensor) -> Fraction:
    """The invariant q = adfg / (bceh) of a tensor with the support of <2,2,2>."""
    x = _mm2_coefficients(t)
    return x["a"] * x["d"] * x["f"] * x["g"] / (x["b"] * x["c"] * x["e"] * x["h"])


def normal_form(t: SparseTensor) -> tuple:
    """Scale a <2,2,2>-supported tensor so that seven entries become 1.

    Returns ``(q, stages, s)``: the (1,1,1) entry of the result, the three
    diagonal scalings in the order they are applied, and the scaled tensor.
    """
    x = _mm2_coefficients(t)
    a, b, c, d, e, f, g, h = (x[k] for k in "abcdefgh")
    one = Fraction(1)
    e1, g1 = e / f, g / h
    c2 = (c / d) / g1
    stages = (
        DiagonalTriple((1 / b, 1 / d, 1 / f, 1 / h), (one,) * 4, (one,) * 4),
        DiagonalTriple((one,) * 4, (1 / e1, one, 1 / g1, one), (one,) * 4),
        DiagonalTriple((one,) * 4, (one,) * 4, (1 / c2, one, one, one)),
    )
    q = a * d * f * g / (b * c * e * h)
    entries = {pos: Fraction(1) for pos in MM2_SUPPORT}
    entries[MM2_LABELS["a"]] = q
    return q, stages, SparseTensor(4, entries)


def normal_form_staged(t: SparseTensor) -> tuple:
    """Same result as :func:`normal_form`, computed by applying each scaling
    and reading the next one off the intermediate tensor."""
    _mm2_coefficients(t)
    one = Fraction(1)
    lab = MM2_LABELS
    s1 = DiagonalTriple(
        (1 / t[lab["b"]], 1 / t[lab["d"]], 1 / t[lab["f"]], 1 / t[lab["h"]]), (one,) * 4, (one,) * 4
    )
    t1 = apply_group(s1, t)
    s2 = DiagonalTriple((one,) * 4, (1 / t1[lab["e"]], one, 1 / t1[lab["g"]], one), (one,) * 4)
    t2 = apply_group(s2, t1)
    s3 = DiagonalTriple((one,) * 4, (one,) * 4, (1 / t2[lab["c"]], one, one, one))
    t3 = apply_group(s3, t2)
    return t3[lab["a"]], (s1, s2, s3), t3


def compose_stages(stages: Sequence[DiagonalTriple]) -> DiagonalTriple:
    out = DiagonalTriple.identity(len(stages[0].a))
    for s in stages:
        out = out.then(s)
    return out


# ---------------------------------------------------------------------------
# flattenings
# ---------------------------------------------------------------------------


def flattening_matrices(t) -> tuple:
    entries = t.dense() if isinstance(t, RankDecomposedTensor) else t.entries
    n = t.n
    mats = [[[0] * (n * n) for _ in range(n)] for _ in range(3)]
    for (i, j, k), val in entries.items():
        mats[0][i][j * n + k] = val
        mats[1][j][k * n + i] = val
        mats[2][k][i * n + j] = val
    return tuple(mats)


def flattening_ranks(t) -> tuple:
    return tuple(rank(M, QQ) for M in flattening_matrices(t))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def tensor_from_json(obj: dict):
    """Parse either tensor JSON shape; errors name the offending field."""
    if not isinstance(obj, dict) or "n" not in obj:
        raise ValueError("tensor JSON: missing field 'n'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("tensor JSON: field 'n' must be a positive integer")
    if "terms" in obj:
        terms = []
        for idx, term in enumerate(obj["terms"]):
            try:
                terms.append(
                    (
                        scalar_from_str(term.get("coeff", "1")),
                        [scalar_from_str(x) for x in term["u"]],
                        [scalar_from_str(x) for x in term["v"]],
                        [scalar_from_str(x) for x in term["w"]],
                    )
                )
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"tensor JSON: bad field 'terms[{idx}]': {exc}") from None
        return RankDecomposedTensor(n, tuple(terms))
    if "entries" in obj:
        entries = {}
        for idx, ent in enumerate(obj["entries"]):
            try:
                pos = tuple(int(x) - 1 for x in ent["pos"])
                if len(pos) != 3:
                    raise ValueError("pos must have three coordinates")
                entries[pos] = scalar_from_str(ent["coeff"])
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"tensor JSON: bad field 'entries[{idx}]': {exc}") from None
        return SparseTensor(n, entries)
    raise ValueError("tensor JSON: expected field 'terms' or 'entries'")
