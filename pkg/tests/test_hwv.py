import itertools
import random
from fractions import Fraction

import pytest

from hwvrank import combinatorics as comb
from hwvrank.exact import GF, QQ, DimensionError, default_primes, nullspace, rank
from hwvrank.hwv import (
    BasisError,
    EvalContext,
    HwvSpec,
    block_sizes,
    block_structure,
    evaluate,
    evaluate_naive,
    random_basis,
    random_dense_tensor,
    random_rank_tensor,
    visit_order,
)
from hwvrank.tensors import DiagonalTriple, RankDecomposedTensor, apply_group, ghz

P = default_primes(1)[0]
IDENT20 = tuple(range(20))


def random_spec(d, rng, max_parts=3):
    parts = [p for p in comb.partitions(d) if len(p) <= max_parts]
    lam = tuple(rng.choice(parts) for _ in range(3))
    return HwvSpec(lam, comb.random_permutation(d, rng), comb.random_permutation(d, rng))


def unitriangular(n, rng):
    return [[1 if i == j else (rng.randint(-3, 3) if i < j else 0) for j in range(n)] for i in range(n)]


def test_block_structure_examples():
    st = block_structure(HwvSpec(((5, 5, 5, 5),) * 3, IDENT20, IDENT20))
    assert st.legs[0] == tuple(tuple(range(4 * i, 4 * i + 4)) for i in range(5))
    assert block_structure(HwvSpec(((2,),) * 3, (0, 1), (1, 0))).sizes(1) == (1, 1)
    assert sorted(block_sizes((5, 5, 5, 4)), reverse=True) == [4, 4, 4, 4, 3]
    spec = HwvSpec(((5, 5, 5, 4),) * 3, tuple(range(19)), tuple(range(19)))
    assert sorted(block_structure(spec).sizes(0)) == [3, 4, 4, 4, 4]


def test_blocks_follow_tau():
    spec = HwvSpec(((2, 1),) * 3, (2, 0, 1), (1, 2, 0))
    st = block_structure(spec)
    for leg, tau in ((1, spec.tau1), (2, spec.tau2)):
        flat = [s for b in st.legs[leg] for s in b]
        assert flat == list(tau)
    assert sorted(visit_order(st)) == [0, 1, 2]


def test_spec_json_round_trip_and_errors():
    spec = HwvSpec(((2, 1), (3,), (1, 1, 1)), (2, 0, 1), (0, 1, 2))
    assert HwvSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError, match="tau1"):
        HwvSpec.from_json({"lambda": [[2, 1]] * 3, "tau2": [0, 1, 2]})
    with pytest.raises(ValueError, match="'d'"):
        HwvSpec.from_json({"d": 4, "lambda": [[2, 1]] * 3, "tau1": [0, 1, 2], "tau2": [0, 1, 2]})
    with pytest.raises(ValueError):
        HwvSpec(((2, 1), (2,), (3,)), (0, 1, 2), (0, 1, 2))


def test_evaluate_examples():
    spec = HwvSpec(((1,),) * 3, (0,), (0,))
    t = RankDecomposedTensor(3, ((2, (1, 2, 3), (4, 5, 6), (7, 8, 9)),))
    # one slot, three 1x1 minors on the (reversed) leading coordinate
    assert evaluate(spec, t) == 2 * 3 * 6 * 9
    assert evaluate_naive(spec, t) == 2 * 3 * 6 * 9
    rng = random.Random(3)
    rank1 = random_rank_tensor(1, 3, rng)
    for _ in range(5):
        s = random_spec(4, rng)
        if max(max(block_sizes(x)) for x in s.lam) >= 2:
            assert evaluate(s, rank1) == 0
    assert evaluate_naive(random_spec(3, rng), RankDecomposedTensor(3, ())) == 0
    assert evaluate(random_spec(3, rng), RankDecomposedTensor(3, ())) == 0


def test_flattening_minor_example():
    spec = HwvSpec(((1, 1), (1, 1), (2,)), (0, 1), (0, 1))
    vals = {}
    for a, b, c, d in itertools.product(range(-2, 3), repeat=4):
        terms = []
        for (i, j), coeff in zip([(0, 0), (0, 1), (1, 0), (1, 1)], (a, b, c, d)):
            e = [[1, 0], [0, 1]]
            terms.append((coeff, e[i], e[j], e[1]))
        t = RankDecomposedTensor(2, tuple(terms))
        vals[(a, b, c, d)] = evaluate_naive(spec, t)
        assert evaluate(spec, t) == vals[(a, b, c, d)]
    signs = {v / (a * d - b * c) for (a, b, c, d), v in vals.items() if a * d - b * c}
    assert len(signs) == 1 and abs(signs.pop()) == 2
    # the sum e1 x e1 x w + e2 x e2 x w with w on the highest coordinate
    w = (0, 1)
    t = RankDecomposedTensor(2, ((1, (1, 0), (1, 0), w), (1, (0, 1), (0, 1), w)))
    assert abs(evaluate(spec, t)) == 2


def test_dimension_error():
    spec = HwvSpec(((1, 1, 1),) * 3, (0, 1, 2), (0, 1, 2))
    with pytest.raises(DimensionError):
        evaluate(spec, ghz(2))
    with pytest.raises(DimensionError):
        evaluate_naive(spec, ghz(2))


def test_oracle_equivalence_mod_p():
    rng = random.Random(11)
    F = GF(P)
    for _ in range(40):
        d = rng.randint(1, 4)
        spec = random_spec(d, rng)
        t = random_rank_tensor(rng.randint(0, 3), 3, rng, F)
        assert evaluate(spec, t, EvalContext(field=F)) == evaluate_naive(spec, t, F)


@pytest.mark.parametrize("method", ["backtrack", "network"])
def test_methods_agree_with_oracle(method):
    rng = random.Random(hash(method) % 1000)
    for _ in range(30):
        d = rng.randint(1, 4)
        spec = random_spec(d, rng)
        t = random_rank_tensor(rng.randint(1, 3), rng.randint(3, 3), rng)
        assert evaluate(spec, t, EvalContext(method=method)) == evaluate_naive(spec, t)


def test_unknown_method():
    with pytest.raises(ValueError):
        evaluate(HwvSpec(((1,),) * 3, (0,), (0,)), ghz(1), EvalContext(method="magic"))


def test_homogeneity():
    rng = random.Random(5)
    for _ in range(30):
        d = rng.randint(1, 4)
        spec = random_spec(d, rng)
        t = random_rank_tensor(3, 3, rng)
        alpha = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        assert evaluate(spec, t.scaled(alpha)) == alpha**d * evaluate(spec, t)


def dual_weight(spec, n, diag):
    out = Fraction(1)
    for leg in range(3):
        lam = list(spec.lam[leg]) + [0] * (n - len(spec.lam[leg]))
        for i in range(n):
            out *= Fraction(diag[leg][i]) ** lam[n - 1 - i]
    return out


def test_torus_covariance():
    rng = random.Random(6)
    n = 3
    for _ in range(30):
        spec = random_spec(rng.randint(1, 4), rng)
        t = random_rank_tensor(3, n, rng)
        diag = [[rng.choice([-3, -2, -1, 1, 2, 3, Fraction(1, 2)]) for _ in range(n)] for _ in range(3)]
        lhs = evaluate(spec, apply_group(DiagonalTriple(*diag), t))
        assert lhs == dual_weight(spec, n, diag) * evaluate(spec, t)


def test_unipotent_invariance():
    rng = random.Random(7)
    n = 3
    for _ in range(30):
        spec = random_spec(rng.randint(1, 4), rng)
        t = random_rank_tensor(3, n, rng)
        g = [unitriangular(n, rng) for _ in range(3)]
        assert evaluate(spec, apply_group(g, t)) == evaluate(spec, t)


def test_mod_p_consistency():
    rng = random.Random(8)
    for p in (P, 1000003):
        F = GF(p)
        for _ in range(15):
            spec = random_spec(rng.randint(1, 4), rng)
            t = random_rank_tensor(3, 3, rng)
            exact = evaluate(spec, t)
            assert evaluate(spec, t, EvalContext(field=F)) == exact.numerator % p


def test_symmetrizer_redundancy():
    # relabel slots by a permutation that swaps two equal-size leg-1 blocks
    rng = random.Random(9)
    lam = ((2, 2), (3, 1), (2, 1, 1))
    for _ in range(10):
        spec = HwvSpec(lam, comb.random_permutation(4, rng), comb.random_permutation(4, rng))
        t = random_rank_tensor(4, 3, rng)
        v = evaluate(spec, t)
        swap = (2, 3, 0, 1)
        moved = HwvSpec(lam, comb.compose(swap, spec.tau1), comb.compose(swap, spec.tau2))
        assert evaluate(moved, t) == v
        # a transposition inside one leg-1 block flips only that determinant
        inner = (1, 0, 2, 3)
        flipped = HwvSpec(lam, comb.compose(inner, spec.tau1), comb.compose(inner, spec.tau2))
        assert evaluate(flipped, t) == -v


def test_random_dense_tensor_shape():
    t = random_dense_tensor(3, random.Random(0))
    assert t.n == 3 and all(-10 <= x <= 10 for x in t.entries.values())


def test_random_basis_small_span():
    lam = ((2,), (1, 1), (1, 1))
    specs, witness = random_basis(lam, random.Random(1), EvalContext(), n=2)
    assert len(specs) == 1 and rank(witness, QQ) == 1
    # every phi_lambda pi lies in the span of the returned basis element
    rng = random.Random(2)
    tensors = [random_rank_tensor(3, 2, rng) for _ in range(4)]
    base = [evaluate(specs[0], t) for t in tensors]
    assert any(base)
    for t1 in itertools.permutations(range(2)):
        for t2 in itertools.permutations(range(2)):
            col = [evaluate_naive(HwvSpec(lam, t1, t2), t) for t in tensors]
            M = [[b, c] for b, c in zip(base, col)]
            assert rank(M, QQ) == 1


def test_random_basis_d4():
    lam = ((2, 2), (2, 2), (2, 2))
    k = comb.kronecker(*lam)
    specs, witness = random_basis(lam, random.Random(3))
    assert len(specs) == k and rank(witness, GF(P)) == k


def test_random_basis_zero_kronecker():
    with pytest.raises(BasisError):
        random_basis(((2,), (2,), (1, 1)), random.Random(0))


def test_basis_dimension_matches_kronecker():
    # at d=3 with n=3 the span of all phi_lambda pi has dimension k(lambda)
    rng = random.Random(4)
    tensors = [random_dense_tensor(3, rng) for _ in range(8)]
    for lam in [((2, 1),) * 3, ((3,), (2, 1), (2, 1)), ((1, 1, 1), (2, 1), (2, 1))]:
        cols = []
        for t1 in itertools.permutations(range(3)):
            for t2 in itertools.permutations(range(3)):
                spec = HwvSpec(lam, t1, t2)
                cols.append([evaluate(spec, t) for t in tensors])
        M = [list(r) for r in zip(*cols)]
        assert rank(M, QQ) == comb.kronecker(*lam)
