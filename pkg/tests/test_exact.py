import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hwvrank.exact import (
    GF,
    QQ,
    DimensionError,
    InterpolationError,
    UniPoly,
    common_roots,
    crt,
    default_primes,
    det,
    det_top_minor,
    interpolate,
    matvec,
    nullspace,
    rank,
    rational_reconstruct,
    rational_roots,
    scalar_from_str,
    scalar_to_str,
)

small_int = st.integers(-9, 9)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_int, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_det_top_minor_examples():
    assert det_top_minor([(5, 0)], 1) == 5
    e = [[1, 0, 0, 0], [0, 1, 0, 0]]
    assert det_top_minor(e, 2) == 1
    assert det_top_minor([(1, 2, 9), (2, 4, 7)], 2) == 0


def test_det_top_minor_errors():
    with pytest.raises(DimensionError):
        det_top_minor([(1, 2), (3, 4), (5, 6)], 3)
    with pytest.raises(DimensionError):
        det_top_minor([(1, 2, 3), (3, 4)], 2)


def test_det_top_minor_alternating():
    rng = random.Random(1)
    for _ in range(50):
        vs = [[rng.randint(-5, 5) for _ in range(4)] for _ in range(3)]
        a = det_top_minor(vs, 3)
        assert det_top_minor([vs[1], vs[0], vs[2]], 3) == -a
        assert det_top_minor([vs[0], vs[0], vs[2]], 3) == 0


def test_rank_examples():
    assert rank([[int(i == j) for j in range(4)] for i in range(4)]) == 4
    assert rank([[0] * 5 for _ in range(3)]) == 0
    assert rank([[1, 2], [2, 4]]) == 1


def test_nullspace_examples():
    assert nullspace([[1, 0], [0, 1]]) == []
    assert len(nullspace([[0, 0, 0]])) == 3
    assert nullspace([[1, 1, 0], [0, 0, 1]]) == [[1, -1, 0]]


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_and_det_match_sympy(M):
    S = sympy.Matrix(M)
    assert rank(M) == S.rank()
    if len(M) == len(M[0]):
        assert det(M) == S.det()


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_nullspace_is_kernel(M):
    cols = len(M[0])
    ker = nullspace(M)
    assert rank(M) + len(ker) == cols
    for v in ker:
        assert all(x == 0 for x in matvec(M, v))
        assert all(isinstance(x, int) for x in v)
        lead = next(x for x in v if x)
        assert lead > 0


def test_nullspace_mod_p():
    p = 101
    F = GF(p)
    rng = random.Random(3)
    for _ in range(40):
        M = [[rng.randrange(p) for _ in range(6)] for _ in range(rng.randint(1, 5))]
        ker = nullspace(M, F)
        assert rank(M, F) + len(ker) == 6
        for v in ker:
            assert all(x % p == 0 for x in matvec(M, v, F))
            assert next(x for x in v if x) == 1


def test_rank_rational_vs_two_primes():
    rng = random.Random(4)
    for _ in range(40):
        M = [[rng.randint(-3, 3) for _ in range(5)] for _ in range(4)]
        q = rank(M)
        for p in default_primes(2):
            assert rank(M, GF(p)) <= q
        assert max(rank(M, GF(p)) for p in default_primes(2)) == q


def test_default_primes_are_large():
    for p in default_primes(2):
        assert sympy.isprime(p) and p >= 2**61


def test_prime_field_rejects_composite():
    with pytest.raises(ValueError):
        GF(91)


def test_scalar_strings():
    for x in [Fraction(3, 7), Fraction(-5), Fraction(0)]:
        assert scalar_from_str(scalar_to_str(x)) == x
    assert scalar_to_str(Fraction(-6, 4)) == "-3/2"


def test_crt_and_reconstruction():
    primes = default_primes(2)
    x = Fraction(-123456789, 9876543)
    m = primes[0] * primes[1]
    residues = [x.numerator * pow(x.denominator, -1, p) % p for p in primes]
    a, mm = crt(residues, primes)
    assert mm == m
    assert rational_reconstruct(a, m) == x


def test_interpolate_examples():
    assert interpolate([(0, 0), (1, 1), (2, 4)]) == UniPoly([0, 0, 1])
    assert interpolate([(0, 5), (1, 5)]) == UniPoly([5])
    target = UniPoly([0, 0, -730140480, -730140480])
    pts = [(q, target(q)) for q in range(-10, 11)]
    assert interpolate(pts, max_degree=20) == target


def test_interpolate_inconsistent():
    with pytest.raises(InterpolationError):
        interpolate([(0, 0), (1, 1), (2, 4)], max_degree=1)
    with pytest.raises(InterpolationError):
        interpolate([(0, 0), (0, 1)])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=8))
def test_interpolate_inverts_evaluation(coeffs):
    p = UniPoly(coeffs)
    pts = [(x, p(x)) for x in range(len(coeffs))]
    assert interpolate(pts) == p


def test_common_roots_examples():
    q = UniPoly([0, 1])
    assert common_roots([UniPoly([0, 2, 3]), UniPoly([0, 0, 1, 1])]) == {0}
    assert common_roots([q, q]) == {0}
    assert common_roots([UniPoly([-1, 1]), UniPoly([1, 1])]) == set()
    with pytest.raises(ValueError):
        common_roots([])
    with pytest.raises(ValueError):
        common_roots([UniPoly()])


def test_rational_roots():
    # (2q - 3)(q + 5) q^2
    p = UniPoly([-3, 2]) * UniPoly([5, 1]) * UniPoly([0, 0, 1])
    assert rational_roots(p) == {Fraction(3, 2), -5, 0}
    assert rational_roots(UniPoly([-2, 0, 1])) == set()


def test_poly_ops():
    a = UniPoly([1, 2, 3])
    b = UniPoly([0, 1])
    qq, r = divmod(a * b + UniPoly([7]), b)
    assert qq == a and r == UniPoly([7])
    assert UniPoly.from_strs(a.to_strs()) == a
    assert str(UniPoly()) == "0"
