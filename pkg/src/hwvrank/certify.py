"""Vanishing combinations of highest-weight vectors and border-rank certificates.

A combination ``f = sum c_i b_i`` of basis elements is searched as the kernel
of the evaluation matrix at random rank-``r`` tensors, checked by random
evaluations over prime fields (a nonzero ``f`` pulled back to the rank-``r``
parametrization has degree at most ``3d``, so one random zero is wrong with
probability at most ``3d/p``), and finally evaluated along the perturbed
matrix multiplication family.  Two such polynomials with ``0`` as their only
common root show that every ``<2,2,2>_q`` with ``q != 0`` lies outside the
secant variety, i.e. the border support rank of ``<2,2,2>`` exceeds ``r``.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .exact import (
    GF,
    QQ,
    UniPoly,
    common_roots,
    crt,
    default_primes,
    interpolate,
    matvec,
    normalize_integer_vector,
    nullspace,
    rational_reconstruct,
    scalar_to_str,
)
from .hwv import EvalContext, HwvSpec, evaluate, random_rank_tensor
from .tensors import apply_group, perturbed_mm

RANK_UPPER_BOUND = 7  # support rank of <2,2,2> (Strassen)
DEFAULT_MARGIN = 4


def derive_rng(seed: int, *labels) -> random.Random:
    """Independent stream for one task, fixed by the root seed and labels."""
    key = json.dumps([seed, *labels], separators=(",", ":")).encode()
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))


@dataclass(frozen=True)
class VanishingCombination:
    basis: tuple
    coeffs: tuple
    r: int | None = None

    def __post_init__(self):
        basis = tuple(self.basis)
        coeffs = tuple(int(c) for c in self.coeffs)
        if not basis:
            raise ValueError("empty basis")
        if len(coeffs) != len(basis):
            raise ValueError(f"{len(coeffs)} coefficients for {len(basis)} basis elements")
        if not any(coeffs):
            raise ValueError("all-zero coefficient vector is not a valid combination")
        d = basis[0].d
        if any(b.d != d or b.lam != basis[0].lam for b in basis):
            raise ValueError("basis elements of different weights")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def d(self) -> int:
        return self.basis[0].d

    @property
    def lam(self) -> tuple:
        return self.basis[0].lam

    def to_json(self) -> dict:
        out = {
            "d": self.d,
            "lambda": [list(x) for x in self.lam],
            "pis": [[list(b.tau1), list(b.tau2)] for b in self.basis],
            "coeffs": [str(c) for c in self.coeffs],
        }
        if self.r is not None:
            out["r"] = self.r
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "VanishingCombination":
        for key in ("lambda", "pis", "coeffs"):
            if key not in obj:
                raise ValueError(f"combination JSON: missing field '{key}'")
        try:
            lam = tuple(tuple(x) for x in obj["lambda"])
            basis = tuple(HwvSpec(lam, a, b) for a, b in obj["pis"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"combination JSON: bad field 'pis' or 'lambda': {exc}") from None
        try:
            coeffs = tuple(int(c) for c in obj["coeffs"])
        except (TypeError, ValueError):
            raise ValueError("combination JSON: bad field 'coeffs' (integers as strings expected)") from None
        return cls(basis, coeffs, obj.get("r"))


def basis_from_json(obj) -> list:
    """A basis given as a list of HWV JSON objects or as a combination-style object."""
    if isinstance(obj, list):
        return [HwvSpec.from_json(x) for x in obj]
    if isinstance(obj, dict) and "pis" in obj and "lambda" in obj:
        lam = tuple(tuple(x) for x in obj["lambda"])
        return [HwvSpec(lam, a, b) for a, b in obj["pis"]]
    if isinstance(obj, dict) and "basis" in obj:
        return [HwvSpec.from_json(x) for x in obj["basis"]]
    raise ValueError("basis JSON: expected a list of HWV objects or fields 'lambda' and 'pis'")


def load_bundled(d: int) -> VanishingCombination:
    """The shipped degree-19 or degree-20 combination."""
    name = f"f{d}.json"
    try:
        text = resources.files("hwvrank").joinpath("data", name).read_text()
    except FileNotFoundError:
        raise ValueError(f"no bundled combination of degree {d}") from None
    return VanishingCombination.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# parallel evaluation helpers (results always combined in a fixed order)
# ---------------------------------------------------------------------------


def _eval_task(args):
    spec, t, fld = args
    return evaluate(spec, t, EvalContext(field=fld))


def _evaluate_all(tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [_eval_task(x) for x in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_eval_task, tasks))


# ---------------------------------------------------------------------------
# kernel search
# ---------------------------------------------------------------------------


def _sample_matrix(basis, r, n, F, rng, rows, threads):
    tensors = [random_rank_tensor(r, n, rng, F) for _ in range(rows)]
    values = _evaluate_all([(b, t, F) for t in tensors for b in basis], threads)
    k = len(basis)
    return [values[i * k : (i + 1) * k] for i in range(rows)]


def _lift(vectors_by_prime: list, primes: list) -> list | None:
    """Integer vectors from matching kernel bases modulo several primes."""
    modulus = math.prod(primes)
    bound = math.isqrt(modulus // 2)
    out = []
    for vecs in zip(*vectors_by_prime):
        entries = []
        for residues in zip(*vecs):
            x, m = crt(list(residues), primes)
            y = rational_reconstruct(x, m, bound)
            if y is None:
                return None
            entries.append(y)
        out.append(normalize_integer_vector(entries))
    return out


def find_vanishing(
    basis: Sequence[HwvSpec],
    r: int,
    n: int,
    rng: random.Random,
    primes: Sequence[int] | None = None,
    margin: int = DEFAULT_MARGIN,
    threads: int = 1,
) -> list:
    """Combinations of ``basis`` vanishing at ``k + margin`` random rank-``r`` tensors.

    The kernel is computed modulo every prime; the bases must agree in
    dimension and lift to the same integer vectors.  Each lifted vector is
    then checked against a fresh sample matrix per prime (double witness);
    vectors failing that are dropped.
    """
    basis = list(basis)
    if not basis:
        raise ValueError("empty basis")
    if margin < 0:
        raise ValueError(f"sample margin must be nonnegative, got {margin}")
    if r < 1:
        raise ValueError("rank must be positive")
    d = basis[0].d
    if any(b.d != d for b in basis):
        raise ValueError("basis elements of different degrees")
    primes = list(primes) if primes else default_primes(2)
    k = len(basis)
    rows = k + margin
    kernels = []
    witnesses = []
    for p in primes:
        F = GF(p)
        M = _sample_matrix(basis, r, n, F, rng, rows, threads)
        witnesses.append(M)
        kernels.append(nullspace(M, F))
    dims = {len(K) for K in kernels}
    if dims != {len(kernels[0])}:
        raise ArithmeticError(f"kernel dimensions differ across primes: {[len(K) for K in kernels]}")
    if not kernels[0]:
        return []
    lifted = _lift(kernels, primes)
    if lifted is None:
        raise ArithmeticError("kernel vectors do not lift to rationals; use more primes")
    found = []
    for v in lifted:
        ok = True
        for p, M in zip(primes, witnesses):
            F = GF(p)
            fresh = _sample_matrix(basis, r, n, F, rng, rows, threads)
            vp = [F(c) for c in v]
            if any(matvec(M, vp, F)) or any(matvec(fresh, vp, F)):
                ok = False
                break
        if ok:
            found.append(VanishingCombination(tuple(basis), tuple(v), r))
    return found


# ---------------------------------------------------------------------------
# randomized membership check
# ---------------------------------------------------------------------------


@dataclass
class MembershipReport:
    r: int
    trials: int
    primes: list
    failures: int
    per_trial_bound: list
    seed: int
    first_failure: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    @property
    def error_bound(self) -> Fraction:
        """Probability that a polynomial outside the ideal passes every trial."""
        out = Fraction(1)
        for b in self.per_trial_bound:
            out *= b**self.trials
        return out

    @property
    def confidence_log10(self) -> float:
        """``log10`` of the error bound (a large negative number)."""
        b = self.error_bound
        return math.log10(b.numerator) - math.log10(b.denominator)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "trials": self.trials,
            "primes": [str(p) for p in self.primes],
            "failures": self.failures,
            "passed": self.passed,
            "per_trial_bound": [scalar_to_str(b) for b in self.per_trial_bound],
            "log10_error_bound": round(self.confidence_log10, 3),
            "seed": self.seed,
            "first_failure": self.first_failure,
        }


def combination_value(f: VanishingCombination, t, ctx: EvalContext):
    F = ctx.field
    total = F.zero
    for c, b in zip(f.coeffs, f.basis):
        if c:
            total = F.add(total, F.mul(F(c), evaluate(b, t, ctx)))
    return total


def verify_vanishing(
    f: VanishingCombination,
    trials: int,
    primes: Sequence[int] | None = None,
    r: int | None = None,
    n: int = 4,
    seed: int = 0,
    threads: int = 1,
) -> MembershipReport:
    """Evaluate ``f`` at ``trials`` random rank-``r`` tensors over each prime."""
    if trials < 1:
        raise ValueError("at least one trial is required")
    r = r if r is not None else f.r
    if r is None:
        raise ValueError("secant rank r not given")
    primes = list(primes) if primes else default_primes(2)
    bound = 3 * f.d
    for p in primes:
        if p <= bound:
            raise ValueError(f"prime {p} does not exceed the degree bound {bound}")
    failures = 0
    first = None
    for p in primes:
        F = GF(p)
        tensors = [random_rank_tensor(r, n, derive_rng(seed, "verify", p, i), F) for i in range(trials)]
        k = len(f.basis)
        tasks = [(b, t, F) for t in tensors for c, b in zip(f.coeffs, f.basis)]
        values = _evaluate_all(tasks, threads)
        for i in range(trials):
            total = 0
            for c, v in zip(f.coeffs, values[i * k : (i + 1) * k]):
                total += c * v
            if total % p:
                failures += 1
                if first is None:
                    first = {"prime": str(p), "trial": i, "value": str(total % p)}
    return MembershipReport(r, trials, primes, failures, [Fraction(bound, p) for p in primes], seed, first)


# ---------------------------------------------------------------------------
# the perturbed matrix multiplication family
# ---------------------------------------------------------------------------


def default_q_samples(d: int) -> list:
    """``-(d//2), ..., ceil(d/2) + 1``: ``d + 2`` points, one more than needed."""
    return list(range(-(d // 2), -(-d // 2) + 2))


def family_polynomial(
    basis: Sequence[HwvSpec],
    coeffs: Sequence[int],
    q_samples: Sequence | None = None,
    group_element=None,
    threads: int = 1,
) -> UniPoly:
    """``q -> sum c_i b_i(g . <2,2,2>_q)`` as an exact polynomial."""
    basis = list(basis)
    d = basis[0].d
    qs = [Fraction(q) for q in (q_samples if q_samples is not None else default_q_samples(d))]
    if len(set(qs)) != len(qs):
        raise ValueError("q samples are not distinct")
    if len(qs) < d + 1:
        raise ValueError(f"{len(qs)} samples cannot determine a polynomial of degree {d}")
    used = [(c, b) for c, b in zip(coeffs, basis) if c]
    if not used:
        return UniPoly()
    tensors = []
    for q in qs:
        t = perturbed_mm(q)
        if group_element is not None:
            t = apply_group(group_element, t)
        tensors.append(t)
    values = _evaluate_all([(b, t, QQ) for t in tensors for _, b in used], threads)
    m = len(used)
    points = []
    for i, q in enumerate(qs):
        points.append((q, sum(c * v for (c, _), v in zip(used, values[i * m : (i + 1) * m]))))
    return interpolate(points, max_degree=d)


def eval_on_family(f: VanishingCombination, q_samples=None, group_element=None, threads: int = 1) -> UniPoly:
    return family_polynomial(f.basis, f.coeffs, q_samples, group_element, threads)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    combinations: list
    polynomials: list
    common_roots: list
    bound: int | None
    valid: bool
    diagnostic: str = ""
    seeds: list = field(default_factory=list)
    membership: dict = field(default_factory=dict)
    group_element: list | None = None

    def to_json(self) -> dict:
        out = {}
        for f, poly in zip(self.combinations, self.polynomials):
            entry = f.to_json()
            entry["family_poly"] = poly.to_strs()
            entry["family_poly_text"] = str(poly)
            out[f"degree{f.d}"] = entry
        out["common_roots"] = [scalar_to_str(x) for x in self.common_roots]
        out["bound"] = self.bound
        out["upper_bound"] = RANK_UPPER_BOUND if self.valid else None
        out["conclusion"] = (
            f"border support rank of <2,2,2> >= {self.bound}"
            + (" and therefore = 7" if self.valid and self.bound == RANK_UPPER_BOUND else "")
            if self.valid
            else None
        )
        out["valid"] = self.valid
        out["diagnostic"] = self.diagnostic
        out["seeds"] = self.seeds
        out["membership"] = self.membership
        out["verification"] = "randomized (Schwartz-Zippel); not an exact ideal-membership proof"
        out["group_element"] = self.group_element
        return out


def _matrices_json(g) -> list | None:
    if g is None:
        return None
    return [[[scalar_to_str(x) for x in row] for row in M] for M in g]


def certify(
    combinations: Sequence[VanishingCombination],
    trials: int = 0,
    primes: Sequence[int] | None = None,
    seed: int = 0,
    group_element=None,
    reports: dict | None = None,
    threads: int = 1,
    polynomials: Sequence[UniPoly] | None = None,
) -> Certificate:
    """Border-support-rank certificate from vanishing combinations.

    With ``trials > 0`` every combination is first checked by
    :func:`verify_vanishing`; a failure refuses the certificate.  The
    certificate is valid iff the common rational roots of the family
    polynomials are exactly ``{0}``.  Precomputed family polynomials may be
    passed in ``polynomials`` (same order as ``combinations``).
    """
    combinations = list(combinations)
    if not combinations:
        raise ValueError("no combinations given")
    rs = {f.r for f in combinations}
    if len(rs) != 1 or None in rs:
        raise ValueError(f"combinations must share one secant rank, got {sorted(map(str, rs))}")
    r = rs.pop()
    membership = dict(reports or {})
    seeds = [seed]
    for f in combinations:
        if trials > 0:
            rep = verify_vanishing(f, trials, primes, r, 4, seed, threads)
            membership[f"degree{f.d}"] = rep.to_json()
        rep_json = membership.get(f"degree{f.d}")
        if rep_json is not None and not rep_json["passed"]:
            return Certificate(
                combinations,
                [],
                [],
                None,
                False,
                f"degree-{f.d} combination does not vanish on the secant variety "
                f"({rep_json['failures']} failed trials)",
                seeds,
                membership,
                _matrices_json(group_element),
            )
    if polynomials is not None:
        polys = list(polynomials)
        if len(polys) != len(combinations):
            raise ValueError("one family polynomial per combination is required")
    else:
        polys = [eval_on_family(f, group_element=group_element, threads=threads) for f in combinations]
    zero = [f.d for f, p in zip(combinations, polys) if p.is_zero()]
    if zero:
        return Certificate(
            combinations, polys, [], None, False,
            f"family polynomial of degree-{zero[0]} combination is identically zero",
            seeds, membership, _matrices_json(group_element),
        )
    roots = sorted(common_roots(polys))
    if roots != [0]:
        return Certificate(
            combinations, polys, roots, None, False,
            f"common rational roots {[scalar_to_str(x) for x in roots]} are not exactly {{0}}",
            seeds, membership, _matrices_json(group_element),
        )
    return Certificate(combinations, polys, roots, r + 1, True, "", seeds, membership, _matrices_json(group_element))
