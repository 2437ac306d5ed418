"""Highest-weight vectors given by permutation pairs, and their evaluation.

A spec ``(lambda, tau1, tau2)`` encodes the polynomial

    f(t) = sum over j in [r]^d of
           prod over legs l, prod over blocks B of leg l of
           det_B( t^l_{j_s} : s in B )

for ``t = sum_i coeff_i t^1_i (x) t^2_i (x) t^3_i``.  Leg ``l`` has one block
per column of the Young diagram of ``lambda[l]``; the blocks occupy
consecutive positions ``0..d-1`` in order of increasing size, and position
``p`` of leg 2 (leg 3) holds slot ``tau1[p]`` (``tau2[p]``); leg 1 uses the
identity.  ``det_B`` of a block of size m is the m x m minor on the rows
``n-1, n-2, ..., n-m`` taken in that order, i.e. the top minor in the dual
basis ``e_n*, ..., e_1*``.  With these conventions ``f`` is invariant under
upper unitriangular changes of basis on each leg.
"""

from __future__ import annotations

import itertools
import math
import random
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import combinatorics as comb
from .exact import GF, QQ, PrimeField, DimensionError, default_primes, det_top_minor, rank
from .tensors import RankDecomposedTensor, SparseTensor

NAIVE_GUARD = 10**7
LAS_VEGAS_RETRIES = 16
# direct search when r^d is at most this, else contraction (unless monomial)
AUTO_BACKTRACK_LIMIT = 10**6


class BasisError(RuntimeError):
    pass


@dataclass(frozen=True)
class HwvSpec:
    lam: tuple
    tau1: tuple
    tau2: tuple

    def __post_init__(self):
        lam = tuple(comb.Partition(x) for x in self.lam)
        if len(lam) != 3:
            raise ValueError("lambda must be a triple of partitions")
        d = lam[0].size
        if any(x.size != d for x in lam):
            raise ValueError(f"partitions of different sizes: {[x.size for x in lam]}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "tau1", comb.check_permutation(self.tau1, d))
        object.__setattr__(self, "tau2", comb.check_permutation(self.tau2, d))

    @property
    def d(self) -> int:
        return self.lam[0].size

    @property
    def min_dimension(self) -> int:
        return max(len(x) for x in self.lam)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "lambda": [list(x) for x in self.lam],
            "tau1": list(self.tau1),
            "tau2": list(self.tau2),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HwvSpec":
        for key in ("lambda", "tau1", "tau2"):
            if key not in obj:
                raise ValueError(f"HWV JSON: missing field '{key}'")
        try:
            spec = cls(tuple(obj["lambda"]), tuple(obj["tau1"]), tuple(obj["tau2"]))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"HWV JSON: bad field 'lambda'/'tau1'/'tau2': {exc}") from None
        if "d" in obj and obj["d"] != spec.d:
            raise ValueError(f"HWV JSON: field 'd' is {obj['d']} but lambda has size {spec.d}")
        return spec


@dataclass(frozen=True)
class BlockStructure:
    """Per leg, the blocks as tuples of slots in block-position order."""

    d: int
    legs: tuple

    def sizes(self, leg: int) -> tuple:
        return tuple(len(b) for b in self.legs[leg])

    def membership(self) -> list:
        """``out[leg][slot] = (block index, position in block)``."""
        out = [[None] * self.d for _ in range(3)]
        for leg, blocks in enumerate(self.legs):
            for bi, block in enumerate(blocks):
                for pos, s in enumerate(block):
                    out[leg][s] = (bi, pos)
        return out


def block_sizes(lam: Sequence[int]) -> tuple:
    """Block sizes of one leg: the column lengths of ``lam``, smallest first."""
    return tuple(sorted(comb.transpose(lam)))


def block_structure(spec: HwvSpec) -> BlockStructure:
    legs = []
    for leg, perm in enumerate((None, spec.tau1, spec.tau2)):
        blocks = []
        start = 0
        for m in block_sizes(spec.lam[leg]):
            positions = range(start, start + m)
            blocks.append(tuple(p if perm is None else perm[p] for p in positions))
            start += m
        legs.append(tuple(blocks))
    return BlockStructure(spec.d, tuple(legs))


@dataclass
class EvalContext:
    """Scalar domain and strategy for evaluations.

    ``method`` is ``"backtrack"`` (depth-first search over term indices),
    ``"network"`` (dense contraction, see :mod:`hwvrank.network`) or
    ``"auto"``, which backtracks for monomial tensors (every term vector a
    scaled unit vector) or small ``r^d`` and contracts otherwise.  ``order`` overrides the slot visit order.
    """

    field: object = QQ
    method: str = "auto"
    order: tuple | None = None
    stats: dict = dataclasses.field(default_factory=dict)

    @classmethod
    def mod_p(cls, p: int | None = None, **kw) -> "EvalContext":
        return cls(field=GF(p if p is not None else default_primes(1)[0]), **kw)


def visit_order(structure: BlockStructure) -> tuple:
    """Greedy slot order keeping few blocks open at any time.

    At every step take the slot whose assignment leaves the fewest blocks
    open (ties: more blocks closed, then smaller slot).
    """
    memb = structure.membership()
    size = {(leg, bi): len(b) for leg in range(3) for bi, b in enumerate(structure.legs[leg])}
    filled = {key: 0 for key in size}
    open_blocks: set = set()
    left = set(range(structure.d))
    order = []
    while left:
        best = None
        for s in left:
            keys = [(leg, memb[leg][s][0]) for leg in range(3)]
            closes = sum(1 for k in keys if filled[k] + 1 == size[k])
            opened = len(open_blocks | set(keys)) - closes
            score = (opened, -closes, s)
            if best is None or score < best:
                best = score
        s = best[2]
        order.append(s)
        left.discard(s)
        for leg in range(3):
            key = (leg, memb[leg][s][0])
            filled[key] += 1
            open_blocks.add(key)
            if filled[key] == size[key]:
                open_blocks.discard(key)
    return tuple(order)


def _dual_vectors(t: RankDecomposedTensor, F) -> list:
    """Per term: (leg1 * coeff, leg2, leg3) with coordinates reversed, in F."""
    out = []
    for c, u, v, w in t.terms:
        if c == 0:
            continue
        cf = F(c)
        u = [F.mul(cf, F(x)) for x in reversed(u)]
        v = [F(x) for x in reversed(v)]
        w = [F(x) for x in reversed(w)]
        out.append((u, v, w))
    return out


def _as_rank_decomposed(t) -> RankDecomposedTensor:
    if isinstance(t, SparseTensor):
        return t.to_rank_decomposed()
    if isinstance(t, RankDecomposedTensor):
        return t
    raise TypeError(f"cannot evaluate at {type(t).__name__}")


def _check_dims(spec: HwvSpec, t) -> None:
    if t.n < spec.min_dimension:
        raise DimensionError(
            f"tensor dimension {t.n} is smaller than the number of parts {spec.min_dimension}"
        )


def evaluate(spec: HwvSpec, t, ctx: EvalContext | None = None):
    """Value of the polynomial encoded by ``spec`` at the tensor ``t``."""
    ctx = ctx or EvalContext()
    t = _as_rank_decomposed(t)
    _check_dims(spec, t)
    method = ctx.method
    if method == "auto":
        small = len(t) ** spec.d <= AUTO_BACKTRACK_LIMIT
        method = "backtrack" if small or _is_monomial(t) else "network"
    if method == "network":
        from .network import evaluate_network

        return evaluate_network(spec, t, ctx.field)
    if method != "backtrack":
        raise ValueError(f"unknown evaluation method {ctx.method!r}")
    return _backtrack(spec, t, ctx)


def _is_monomial(t: RankDecomposedTensor) -> bool:
    return all(sum(1 for x in vec if x) <= 1 for term in t.terms for vec in term[1:])


class _Plan:
    """Static data of one (spec, visit order): per step the three blocks of
    the slot, block sizes, and the sign relating fill order to block order."""

    def __init__(self, spec: HwvSpec, order: Sequence[int] | None):
        st = block_structure(spec)
        self.d = spec.d
        self.order = tuple(order) if order is not None else visit_order(st)
        if sorted(self.order) != list(range(self.d)):
            raise ValueError("visit order is not a permutation of the slots")
        memb = st.membership()
        self.nblocks = [len(st.legs[leg]) for leg in range(3)]
        offset = [0, self.nblocks[0], self.nblocks[0] + self.nblocks[1]]
        self.size = [len(b) for leg in range(3) for b in st.legs[leg]]
        self.steps = []
        fill = {g: [] for g in range(len(self.size))}
        for s in self.order:
            gs = []
            for leg in range(3):
                bi, pos = memb[leg][s]
                g = offset[leg] + bi
                fill[g].append(pos)
                gs.append(g)
            self.steps.append(tuple(gs))
        # determinant in fill order = sign * determinant in position order
        self.sign = 1
        for g, positions in fill.items():
            self.sign *= comb.sign(positions)


def _backtrack(spec: HwvSpec, t: RankDecomposedTensor, ctx: EvalContext):
    F = ctx.field
    plan = _Plan(spec, ctx.order)
    terms = _dual_vectors(t, F)
    if not terms:
        return F.zero
    if all(sum(1 for x in vec if x) <= 1 for term in terms for vec in term):
        value, nodes = _backtrack_monomial(plan, terms, F)
    else:
        value, nodes = _backtrack_generic(plan, terms, F)
    ctx.stats["nodes"] = ctx.stats.get("nodes", 0) + nodes
    return value if plan.sign == 1 else F.neg(value)


def _backtrack_generic(plan: _Plan, terms: list, F):
    """Depth-first search with one incremental column echelon per block.

    Each open block keeps its columns reduced against earlier pivots, so a
    column that reduces to zero (a repeated or dependent index) prunes the
    branch at once; on completion the determinant is the signed product of
    the pivots.
    """
    d = plan.d
    size = plan.size
    nb = len(size)
    # truncated block vectors per term and block size
    cache = {}
    for j, vecs in enumerate(terms):
        for leg in range(3):
            for m in set(size):
                cache[(j, leg, m)] = vecs[leg][:m]
    leg_of = []
    for gs in plan.steps:
        leg_of.append(gs)
    used = [set() for _ in range(nb)]
    cols = [[] for _ in range(nb)]  # (reduced column, pivot row)
    r = len(terms)
    zero, mul, sub, div, is_zero = F.zero, F.mul, F.sub, F.div, F.is_zero
    nodes = 0

    def reduce(g, v):
        v = list(v)
        for c, prow in cols[g]:
            f = v[prow]
            if not is_zero(f):
                f = div(f, c[prow])
                v = [sub(x, mul(f, y)) for x, y in zip(v, c)]
        for i, x in enumerate(v):
            if not is_zero(x):
                return v, i
        return None, -1

    def block_det(g):
        prod = F.one
        rows = []
        for c, prow in cols[g]:
            prod = mul(prod, c[prow])
            rows.append(prow)
        return prod if comb.sign(rows) == 1 else F.neg(prod)

    total = zero

    def rec(k, acc):
        nonlocal total, nodes
        nodes += 1
        if k == d:
            total = F.add(total, acc)
            return
        gs = leg_of[k]
        for j in range(r):
            if j in used[gs[0]] or j in used[gs[1]] or j in used[gs[2]]:
                continue
            pushed = []
            ok = True
            for leg, g in enumerate(gs):
                v, prow = reduce(g, cache[(j, leg, size[g])])
                if v is None:
                    ok = False
                    break
                cols[g].append((v, prow))
                used[g].add(j)
                pushed.append(g)
            if ok:
                new = acc
                for g in gs:
                    if len(cols[g]) == size[g]:
                        new = mul(new, block_det(g))
                if not is_zero(new):
                    rec(k + 1, new)
            for g in pushed:
                cols[g].pop()
                used[g].discard(j)

    rec(0, F.one)
    return total, nodes


def _backtrack_monomial(plan: _Plan, terms: list, F):
    """Depth-first search for tensors whose term vectors are scaled unit vectors.

    A block determinant of unit columns is the sign of the row permutation, so
    the remaining sum depends only on which rows each open block has used;
    subtrees are memoized on that state.  The search runs on plain integers:
    over QQ the weights are scaled to a common denominator first.
    """
    d = plan.d
    size = plan.size
    rows = []
    for u, v, w in terms:
        weight = F.one
        rs = []
        for vec in (u, v, w):
            idx = next((i for i, x in enumerate(vec) if not F.is_zero(x)), None)
            if idx is None:
                weight = None
                break
            weight = F.mul(weight, vec[idx])
            rs.append(idx)
        if weight is not None:
            rows.append((weight, rs[0], rs[1], rs[2]))
    if isinstance(F, PrimeField):
        mod, denom = F.p, 1
    else:
        mod = None
        denom = math.lcm(*(Fraction(w).denominator for w, *_ in rows)) if rows else 1
    rows = [(int(w * denom) if mod is None else w, r0, r1, r2) for w, r0, r1, r2 in rows]
    steps = plan.steps
    memo: dict = {}
    nodes = 0

    def rec(k, masks):
        nonlocal nodes
        if k == d:
            return 1
        key = (k, masks)
        hit = memo.get(key)
        if hit is not None:
            return hit
        nodes += 1
        g0, g1, g2 = steps[k]
        m0, m1, m2 = masks[g0], masks[g1], masks[g2]
        s0, s1, s2 = size[g0], size[g1], size[g2]
        total = 0
        for weight, r0, r1, r2 in rows:
            if r0 >= s0 or r1 >= s1 or r2 >= s2:
                continue
            if (m0 >> r0) & 1 or (m1 >> r1) & 1 or (m2 >> r2) & 1:
                continue
            new = list(masks)
            new[g0] = m0 | 1 << r0
            new[g1] = m1 | 1 << r1
            new[g2] = m2 | 1 << r2
            sub = rec(k + 1, tuple(new))
            if sub:
                inv = bin(m0 >> r0).count("1") + bin(m1 >> r1).count("1") + bin(m2 >> r2).count("1")
                total += -weight * sub if inv & 1 else weight * sub
        if mod is not None:
            total %= mod
        memo[key] = total
        return total

    value = rec(0, (0,) * len(size))
    return F(Fraction(value, denom**d)) if mod is None else value, nodes


def evaluate_naive(spec: HwvSpec, t, field=QQ):
    """Literal sum over all ``j in [r]^d``; the test oracle for :func:`evaluate`."""
    t = _as_rank_decomposed(t)
    _check_dims(spec, t)
    F = field
    r = len(t.terms)
    d = spec.d
    if r**d > NAIVE_GUARD:
        raise ValueError(f"naive evaluation would enumerate {r}^{d} > {NAIVE_GUARD} index tuples")
    st = block_structure(spec)
    vecs = []
    for c, u, v, w in t.terms:
        vecs.append((F(c), [[F(x) for x in reversed(vec)] for vec in (u, v, w)]))
    total = F.zero
    for j in itertools.product(range(r), repeat=d):
        val = F.one
        for s in j:
            val = F.mul(val, vecs[s][0])
        for leg in range(3):
            for block in st.legs[leg]:
                if F.is_zero(val):
                    break
                cols = [vecs[j[s]][1][leg] for s in block]
                val = F.mul(val, det_top_minor(cols, len(block), F))
        total = F.add(total, val)
    return total


# ---------------------------------------------------------------------------
# random tensors and Las Vegas basis construction
# ---------------------------------------------------------------------------


def random_rank_tensor(r: int, n: int, rng: random.Random, field=QQ, bound: int = 10) -> RankDecomposedTensor:
    """Sum of ``r`` random simple tensors: entries uniform in ``{-bound..bound}``
    over QQ, or uniform in the prime field."""
    terms = []
    for _ in range(r):
        vecs = [[field.random_element(rng, bound) for _ in range(n)] for _ in range(3)]
        terms.append((1, *vecs))
    return RankDecomposedTensor(n, tuple(terms))


def random_dense_tensor(n: int, rng: random.Random, field=QQ, bound: int = 10) -> SparseTensor:
    entries = {}
    for pos in itertools.product(range(n), repeat=3):
        entries[pos] = field.random_element(rng, bound)
    return SparseTensor(n, entries)


def evaluation_matrix(specs: Sequence[HwvSpec], tensors: Sequence, ctx: EvalContext) -> list:
    """``M[i][j] = specs[j](tensors[i])``: one row per tensor, one column per spec."""
    return [[evaluate(spec, t, ctx) for spec in specs] for t in tensors]


def random_basis(lam, rng: random.Random, ctx: EvalContext | None = None, n: int | None = None):
    """Las Vegas basis of the highest-weight vectors of weight ``lam``.

    Draws ``k = kronecker(lam)`` random permutation pairs and ``k`` random
    tensors until the ``k x k`` evaluation matrix is invertible.  Returns
    ``(specs, witness)``.
    """
    ctx = ctx or EvalContext.mod_p()
    lam = tuple(comb.Partition(x) for x in lam)
    k = comb.kronecker(*lam)
    if k == 0:
        raise BasisError(f"Kronecker coefficient of {[list(x) for x in lam]} is zero")
    d = lam[0].size
    if n is None:
        n = max(len(x) for x in lam)
    for _ in range(LAS_VEGAS_RETRIES):
        specs = [
            HwvSpec(lam, comb.random_permutation(d, rng), comb.random_permutation(d, rng)) for _ in range(k)
        ]
        tensors = [random_dense_tensor(n, rng, ctx.field) for _ in range(k)]
        M = evaluation_matrix(specs, tensors, ctx)
        if rank(M, ctx.field) == k:
            return specs, M
    raise BasisError(f"no full-rank evaluation matrix after {LAS_VEGAS_RETRIES} attempts")
