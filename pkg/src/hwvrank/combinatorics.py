"""Partitions, permutations, symmetric group characters and Kronecker coefficients."""

from __future__ import annotations

import functools
import math
import random
from collections import Counter
from fractions import Fraction
from typing import Iterable, Iterator, Sequence


class Partition(tuple):
    """A partition: a nonincreasing tuple of positive integers."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(x) for x in parts)
        if any(x <= 0 for x in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"partition parts must be nonincreasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def size(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def transpose(self) -> "Partition":
        return transpose(self)

    def __repr__(self):
        return f"Partition({list(self)})"


def transpose(lam: Sequence[int]) -> Partition:
    """Conjugate partition (column lengths of the Young diagram)."""
    lam = Partition(lam)
    if not lam:
        return lam
    return Partition(sum(1 for x in lam if x > i) for i in range(lam[0]))


def partitions(d: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``d`` in reverse lexicographic order."""
    if max_part is None:
        max_part = d
    if d == 0:
        yield Partition()
        return
    for first in range(min(d, max_part), 0, -1):
        for rest in partitions(d - first, first):
            yield Partition((first,) + rest)


def centralizer_order(mu: Sequence[int]) -> int:
    """z_mu: order of the centralizer of a permutation of cycle type mu."""
    z = 1
    for part, mult in Counter(mu).items():
        z *= part**mult * math.factorial(mult)
    return z


def class_size(mu: Sequence[int]) -> int:
    return math.factorial(sum(mu)) // centralizer_order(mu)


def hook_dimension(lam: Sequence[int]) -> int:
    """Dimension of the Specht module S^lam by the hook length formula."""
    lam = Partition(lam)
    conj = transpose(lam)
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= row - j + conj[j] - i - 1
    return math.factorial(lam.size) // hooks


@functools.lru_cache(maxsize=None)
def _mn(beta: tuple, mu: tuple) -> int:
    # beta: strictly decreasing beta-set of the current shape; mu: remaining
    # class parts, largest first
    if not mu:
        return 1
    k = mu[0]
    rest = mu[1:]
    bset = set(beta)
    total = 0
    for b in beta:
        target = b - k
        if target < 0 or target in bset:
            continue
        # beads passed over = height of the removed border strip
        height = sum(1 for c in beta if target < c < b)
        new = tuple(sorted((bset - {b}) | {target}, reverse=True))
        val = _mn(_trim(new), rest)
        if val:
            total += -val if height & 1 else val
    return total


def _trim(beta: tuple) -> tuple:
    # drop trailing beads sitting at 0, 1, 2, ... (empty rows), so equal shapes
    # share one cache key
    beta = list(beta)
    while beta and beta[-1] == 0:
        beta.pop()
        beta = [b - 1 for b in beta]
    return tuple(beta)


def mn_character(lam: Sequence[int], mu: Sequence[int]) -> int:
    """Irreducible character chi_lam evaluated on the class of cycle type mu.

    Murnaghan-Nakayama rule on beta-sets, removing border strips for the
    largest class part first.
    """
    lam = Partition(lam)
    mu = Partition(sorted(mu, reverse=True))
    if lam.size != mu.size:
        raise ValueError(f"|lambda| = {lam.size} but |mu| = {mu.size}")
    ell = len(lam)
    beta = tuple(lam[i] + ell - 1 - i for i in range(ell))
    return _mn(_trim(beta), tuple(mu))


@functools.lru_cache(maxsize=None)
def _classes(d: int) -> tuple:
    return tuple((mu, centralizer_order(mu)) for mu in partitions(d))


def kronecker(lam1: Sequence[int], lam2: Sequence[int], lam3: Sequence[int]) -> int:
    """Kronecker coefficient k(lam1, lam2, lam3) via the character inner product."""
    lams = [Partition(x) for x in (lam1, lam2, lam3)]
    d = lams[0].size
    if any(x.size != d for x in lams):
        raise ValueError(f"partitions of different sizes: {[x.size for x in lams]}")
    total = Fraction(0)
    for mu, z in _classes(d):
        a = mn_character(lams[0], mu)
        if not a:
            continue
        b = mn_character(lams[1], mu)
        if not b:
            continue
        c = mn_character(lams[2], mu)
        if c:
            total += Fraction(a * b * c, z)
    if total.denominator != 1 or total < 0:
        raise ArithmeticError(f"non-integral Kronecker coefficient {total}")
    return int(total)


# ---------------------------------------------------------------------------
# permutations (one-line notation, 0-based); (s o t)(i) = s[t[i]]
# ---------------------------------------------------------------------------


def is_permutation(p: Sequence[int]) -> bool:
    return sorted(p) == list(range(len(p)))


def check_permutation(p: Sequence[int], d: int | None = None) -> tuple:
    p = tuple(int(x) for x in p)
    if not is_permutation(p):
        raise ValueError(f"not a permutation of 0..{len(p) - 1}: {list(p)}")
    if d is not None and len(p) != d:
        raise ValueError(f"permutation has length {len(p)}, expected {d}")
    return p


def compose(s: Sequence[int], t: Sequence[int]) -> tuple:
    return tuple(s[i] for i in t)


def inverse(p: Sequence[int]) -> tuple:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def sign(p: Sequence[int]) -> int:
    """Sign of a permutation, or of any sequence of distinct comparables."""
    p = list(p)
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def cycle_type(p: Sequence[int]) -> Partition:
    seen = [False] * len(p)
    lengths = []
    for i in range(len(p)):
        if not seen[i]:
            n = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
                n += 1
            lengths.append(n)
    return Partition(sorted(lengths, reverse=True))


def random_permutation(d: int, rng: random.Random) -> tuple:
    if d < 1:
        raise ValueError("d must be positive")
    p = list(range(d))
    rng.shuffle(p)
    return tuple(p)
