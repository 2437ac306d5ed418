import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hwvrank.tensors import (
    MM2_LABELS,
    MM2_SUPPORT,
    DiagonalTriple,
    RankDecomposedTensor,
    SparseTensor,
    SupportError,
    apply_group,
    compose_stages,
    flattening_ranks,
    ghz,
    mm_tensor,
    normal_form,
    normal_form_staged,
    perturbed_mm,
    tensor_from_json,
)

PRINTED_SUPPORT = {(1, 1, 1), (1, 2, 3), (2, 3, 1), (2, 4, 3), (3, 1, 2), (3, 2, 4), (4, 3, 2), (4, 4, 4)}


def mm2_tensor(vals):
    return SparseTensor(4, {MM2_LABELS[k]: v for k, v in zip("abcdefgh", vals)})


def test_mm_tensor_small():
    t = mm_tensor(1)
    assert len(t) == 1 and t.terms[0] == (1, (1,), (1,), (1,))
    t2 = mm_tensor(2)
    assert len(t2) == 8 and all(c == 1 for c, *_ in t2.terms)
    support = {(i + 1, j + 1, k + 1) for i, j, k in t2.to_sparse().support()}
    assert support == PRINTED_SUPPORT
    assert MM2_SUPPORT == t2.to_sparse().support()
    assert len(mm_tensor(3)) == 27


def test_mm_tensor_is_matrix_product():
    # <n,n,n> contracted with matrices A, B gives (AB)^T in the third leg
    n = 3
    rng = random.Random(0)
    A = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
    B = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
    out = [[0] * n for _ in range(n)]
    for (x, y, z), v in mm_tensor(n).dense().items():
        i, j = divmod(x, n)
        j2, k = divmod(y, n)
        k2, i2 = divmod(z, n)
        out[i2][k2] += v * A[i][j] * B[j2][k]
    AB = [[sum(A[i][j] * B[j][k] for j in range(n)) for k in range(n)] for i in range(n)]
    assert out == AB


def test_perturbed_mm():
    assert perturbed_mm(1).to_sparse() == mm_tensor(2).to_sparse()
    s0 = perturbed_mm(0).to_sparse()
    assert len(s0.support()) == 7 and s0[(0, 0, 0)] == 0
    s3 = perturbed_mm(3).to_sparse()
    assert s3[(0, 0, 0)] == 3
    assert all(s3[p] == 1 for p in MM2_SUPPORT if p != (0, 0, 0))


def test_normal_form_examples():
    q, stages, s = normal_form(mm2_tensor([1] * 8))
    assert q == 1
    assert all(st.a == (1,) * 4 and st.b == (1,) * 4 and st.c == (1,) * 4 for st in stages)
    assert normal_form(mm2_tensor([2, 1, 1, 1, 1, 1, 1, 1]))[0] == 2
    assert normal_form(mm2_tensor(range(1, 9)))[0] == Fraction(7, 10)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=9).filter(lambda x: x != 0),
                min_size=8, max_size=8))
def test_normal_form_properties(vals):
    t = mm2_tensor(vals)
    q, stages, s = normal_form(t)
    a, b, c, d, e, f, g, h = vals
    assert q == a * d * f * g / (b * c * e * h)
    assert s[MM2_LABELS["a"]] == q
    assert sum(1 for p in MM2_SUPPORT if s[p] == 1 and p != MM2_LABELS["a"]) == 7
    x = t
    for st_ in stages:
        x = apply_group(st_, x)
    assert x == s
    assert apply_group(compose_stages(stages), t) == s
    q2, stages2, s2 = normal_form_staged(t)
    assert (q2, s2) == (q, s)
    assert stages2 == stages


def test_normal_form_of_family():
    for q in [Fraction(-3), Fraction(5, 7), Fraction(1)]:
        assert normal_form(perturbed_mm(q).to_sparse())[0] == q


def test_normal_form_errors():
    with pytest.raises(SupportError):
        normal_form(perturbed_mm(0).to_sparse())
    with pytest.raises(SupportError):
        normal_form(SparseTensor(4, {(0, 0, 0): 1}))


def test_apply_group():
    t = perturbed_mm(3)
    assert apply_group(DiagonalTriple.identity(4), t.to_sparse()) == t.to_sparse()
    e = RankDecomposedTensor(4, ((1, (1, 0, 0, 0), (1, 0, 0, 0), (1, 0, 0, 0)),))
    g = DiagonalTriple((5, 1, 1, 1), (1, 1, 1, 1), (1, 1, 1, 1))
    assert apply_group(g, e).to_sparse() == SparseTensor(4, {(0, 0, 0): 5})
    with pytest.raises(ValueError):
        DiagonalTriple((0, 1), (1, 1), (1, 1))
    sing = [[1, 0], [0, 0]]
    ident = [[1, 0], [0, 1]]
    with pytest.raises(ValueError):
        apply_group((sing, ident, ident), ghz(2))


def test_apply_group_dense_agrees_with_termwise():
    rng = random.Random(2)
    t = RankDecomposedTensor(3, tuple((rng.randint(-3, 3), *[[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)])
                                      for _ in range(4)))
    mats = []
    for _ in range(3):
        while True:
            M = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
            from hwvrank.exact import det
            if det(M):
                break
        mats.append(M)
    assert apply_group(mats, t).to_sparse() == apply_group(mats, t.to_sparse())


def test_diagonal_preserves_support():
    rng = random.Random(9)
    for _ in range(20):
        t = mm2_tensor([rng.randint(1, 9) for _ in range(8)])
        g = DiagonalTriple(*[[rng.choice([-3, -1, 2, 5]) for _ in range(4)] for _ in range(3)])
        assert apply_group(g, t).support() == t.support()


def test_flattening_ranks():
    assert flattening_ranks(ghz(3)) == (3, 3, 3)
    assert flattening_ranks(mm_tensor(2)) == (4, 4, 4)
    rng = random.Random(1)
    for m in range(1, 5):
        t = RankDecomposedTensor(4, tuple((1, *[[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)])
                                          for _ in range(m)))
        assert all(r <= m for r in flattening_ranks(t))


def test_tensor_json_round_trip():
    t = perturbed_mm(Fraction(2, 3))
    assert tensor_from_json(t.to_json()) == t
    s = t.to_sparse()
    assert tensor_from_json(s.to_json()) == s
    assert s.to_json()["entries"][0]["pos"] == [1, 1, 1]


@pytest.mark.parametrize(
    "obj, field",
    [
        ({}, "'n'"),
        ({"n": 2, "terms": [{"coeff": "1", "u": ["1", "0"], "v": ["x", "0"], "w": ["1", "0"]}]}, "terms[0]"),
        ({"n": 2, "entries": [{"pos": [1, 1], "coeff": "1"}]}, "entries[0]"),
        ({"n": 2}, "'terms'"),
    ],
)
def test_tensor_json_errors(obj, field):
    with pytest.raises(ValueError, match=field.replace("[", r"\[").replace("]", r"\]")):
        tensor_from_json(obj)
