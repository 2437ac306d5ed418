"""Evaluation of highest-weight vectors by tensor-network contraction.

Expanding every block determinant with a Levi-Civita symbol turns ``f(t)``
into a closed network: one copy of the dense tensor per slot (indices
``a_s, b_s, c_s``) and one epsilon per block, joined along the bonds of the
block structure.  Contracting pairwise along an optimized path costs far less
than the ``r^d`` index tuples of the direct sum when ``t`` has many terms.

Over a prime field the contraction runs in exact uint64 arithmetic; over QQ
the denominators are cleared and the integer value is recovered from
several primes by the Chinese remainder theorem.
"""

from __future__ import annotations

import functools
import itertools
import math
from fractions import Fraction

import cotengra as ctg
import numpy as np

from . import combinatorics as comb
from ._modmat import matmul_mod
from .exact import PrimeField, crt, default_primes, symmetric_residue
from .hwv import HwvSpec, block_structure
from .tensors import SparseTensor

PATH_REPEATS = 16


@functools.lru_cache(maxsize=None)
def _levi(m: int, n: int, p: int) -> np.ndarray:
    """Epsilon symbol on the first ``m`` of ``n`` coordinates, mod ``p``."""
    dt = np.uint64 if p < (1 << 62) else object
    E = np.zeros((n,) * m, dtype=dt)
    for perm in itertools.permutations(range(m)):
        E[perm] = 1 if comb.sign(perm) == 1 else p - 1
    E.setflags(write=False)
    return E


def network_edges(spec: HwvSpec) -> list:
    """Index labels per node: ``d`` tensor nodes, then one node per block.

    Bond ``leg * d + s`` joins slot ``s`` (its ``leg``-th index) to the block
    of that leg containing ``s``.
    """
    d = spec.d
    st = block_structure(spec)
    nodes = [(s, d + s, 2 * d + s) for s in range(d)]
    for leg in range(3):
        for block in st.legs[leg]:
            nodes.append(tuple(leg * d + s for s in block))
    return nodes


@functools.lru_cache(maxsize=4096)
def contraction_path(spec: HwvSpec, n: int, repeats: int = PATH_REPEATS) -> tuple:
    """Pairwise contraction order for the network of ``spec``.

    Returns ``(cost, steps)``: ``cost`` counts multiply-adds and each step
    ``(i, j, k)`` contracts nodes ``i`` and ``j`` into the new node ``k``.
    The order only affects speed, never the value.
    """
    nodes = network_edges(spec)
    inputs = [tuple(str(x) for x in e) for e in nodes]
    sizes = {x: n for e in inputs for x in e}
    opt = ctg.HyperOptimizer(
        methods=["greedy"], max_repeats=repeats, minimize="flops", optlib="random", progbar=False, parallel=False
    )
    tree = opt.search(inputs, (), sizes)
    steps = []
    k = len(nodes)
    for i, j in tree.get_ssa_path():
        steps.append((i, j, k))
        k += 1
    return int(tree.contraction_cost()), tuple(steps)


def _contract_mod(spec: HwvSpec, T: np.ndarray, p: int) -> int:
    n = T.shape[0]
    nodes = network_edges(spec)
    _, steps = contraction_path(spec, n)
    d = spec.d
    tensors = {s: (T, nodes[s]) for s in range(d)}
    for i in range(d, len(nodes)):
        tensors[i] = (_levi(len(nodes[i]), n, p), nodes[i])
    for i, j, k in steps:
        A, ia = tensors.pop(i)
        B, ib = tensors.pop(j)
        shared = [x for x in ia if x in ib]
        fa = [x for x in ia if x not in shared]
        fb = [x for x in ib if x not in shared]
        A2 = A.transpose([ia.index(x) for x in fa] + [ia.index(x) for x in shared])
        B2 = B.transpose([ib.index(x) for x in shared] + [ib.index(x) for x in fb])
        ks = n ** len(shared)
        C = matmul_mod(A2.reshape(-1, ks), B2.reshape(ks, -1), p)
        tensors[k] = (C.reshape((n,) * (len(fa) + len(fb))), tuple(fa + fb))
    (C, _), = tensors.values()
    return int(C.reshape(-1)[0])


def _dual_dense(t) -> dict:
    """Dense entries of ``t`` with every coordinate reversed (dual basis)."""
    n = t.n
    items = t.entries if isinstance(t, SparseTensor) else t.dense()
    return {(n - 1 - a, n - 1 - b, n - 1 - c): x for (a, b, c), x in items.items() if x}


def _array_mod(entries: dict, n: int, p: int) -> np.ndarray:
    dt = np.uint64 if p < (1 << 62) else object
    T = np.zeros((n, n, n), dtype=dt)
    for pos, x in entries.items():
        x = Fraction(x)
        T[pos] = x.numerator % p * pow(x.denominator, -1, p) % p
    return T


def magnitude_bound(spec: HwvSpec, max_entry: int) -> int:
    """Bound on ``|f(T)|`` for an integer tensor with entries at most ``max_entry``.

    Every bond index is fixed by the epsilon it meets, so the network sum has
    at most ``prod m_B!`` nonzero terms, each a product of ``d`` entries.
    """
    st = block_structure(spec)
    terms = 1
    for leg in range(3):
        for block in st.legs[leg]:
            terms *= math.factorial(len(block))
    return terms * max_entry**spec.d


def evaluate_network(spec: HwvSpec, t, field):
    n = t.n
    entries = _dual_dense(t)
    if isinstance(field, PrimeField):
        return _contract_mod(spec, _array_mod(entries, n, field.p), field.p)
    if not entries:
        return Fraction(0)
    denom = math.lcm(*(Fraction(x).denominator for x in entries.values()))
    ints = {pos: int(Fraction(x) * denom) for pos, x in entries.items()}
    bound = magnitude_bound(spec, max(abs(x) for x in ints.values()))
    count = 1
    while math.prod(default_primes(count)) <= 2 * bound:
        count += 1
    use = default_primes(count)
    residues = [_contract_mod(spec, _array_mod(ints, n, p), p) for p in use]
    value, m = crt(residues, use)
    return Fraction(symmetric_residue(value, m), denom**spec.d)
