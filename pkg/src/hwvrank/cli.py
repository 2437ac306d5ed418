"""Command-line interface.

Every subcommand prints one JSON document on stdout that embeds the run
configuration.  Exit status: 0 success, 1 refusal (invalid certificate,
failed verification, impossible request), 2 usage or input error.

Flags can also be set through environment variables named ``HWVRANK_`` plus
the flag name in upper case with dashes as underscores, for example
``HWVRANK_SEED=7`` or ``HWVRANK_PRIME=101,103``.  Explicit flags win.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys
from dataclasses import dataclass

from . import __version__
from . import combinatorics as comb
from .certify import (
    VanishingCombination,
    basis_from_json,
    certify,
    default_q_samples,
    eval_on_family,
    find_vanishing,
    load_bundled,
    verify_vanishing,
)
from .exact import GF, QQ, default_primes, scalar_from_str, scalar_to_str
from .hwv import BasisError, EvalContext, HwvSpec, evaluate, random_basis
from .tensors import SupportError, mm_tensor, normal_form, perturbed_mm, tensor_from_json

ENV_PREFIX = "HWVRANK_"


class UsageError(Exception):
    pass


class Refusal(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


@dataclass
class RunConfig:
    command: str
    seed: int
    primes: list
    trials: int
    samples_margin: int
    field: str
    threads: int
    rediscover: list
    group_element: list | None
    inputs: list

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["primes"] = [str(p) for p in self.primes]
        out["version"] = __version__
        return out


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------


def _load_json(arg: str, what: str):
    """Inline JSON, ``-`` for stdin, or a file path."""
    text = arg
    if arg == "-":
        text = sys.stdin.read()
    elif not arg.lstrip().startswith(("[", "{")):
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"{what}: cannot read {arg}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _unwrap(obj, key: str):
    # outputs of this tool wrap their payload; accept both shapes
    if isinstance(obj, dict) and key in obj and "config" in obj:
        return obj[key]
    return obj


def _parse_lambda(obj) -> tuple:
    try:
        lam = tuple(comb.Partition(x) for x in obj)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"field 'lambda': {exc}") from None
    if len(lam) != 3:
        raise UsageError("field 'lambda': expected three partitions")
    if len({x.size for x in lam}) != 1:
        raise UsageError("field 'lambda': partitions of different sizes")
    return lam


def _parse_group_element(obj):
    if obj is None:
        return None
    try:
        mats = [[[scalar_from_str(x) for x in row] for row in M] for M in obj]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--group-element: bad matrix entry: {exc}") from None
    if len(mats) != 3 or any(len(M) != 4 or any(len(row) != 4 for row in M) for M in mats):
        raise UsageError("--group-element: expected three 4x4 matrices")
    return mats


def _load_combination(arg: str) -> VanishingCombination:
    obj = _load_json(arg, "combination")
    obj = _unwrap(obj, "combinations")
    if isinstance(obj, list):
        if not obj:
            raise Refusal("input holds no combination")
        obj = obj[0]
    try:
        return VanishingCombination.from_json(obj)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _field(cfg: RunConfig):
    if cfg.field == "rational":
        return QQ
    return GF(cfg.primes[0])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_kron(args, cfg):
    lam = _parse_lambda(_load_json(args.partitions, "lambda"))
    return {"lambda": [list(x) for x in lam], "kronecker": comb.kronecker(*lam)}


def cmd_mmten(args, cfg):
    if args.n < 1:
        raise UsageError("n must be positive")
    if args.q is not None:
        if args.n != 2:
            raise UsageError("--q is only defined for n = 2")
        t = perturbed_mm(scalar_from_str(args.q))
    else:
        t = mm_tensor(args.n)
    return {"tensor": t.to_json(), "sparse": t.to_sparse().to_json()}


def cmd_normalize(args, cfg):
    obj = _unwrap(_load_json(args.tensor, "tensor"), "tensor")
    try:
        t = tensor_from_json(obj)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not hasattr(t, "entries"):
        t = t.to_sparse()
    try:
        q, stages, s = normal_form(t)
    except SupportError as exc:
        raise Refusal(str(exc)) from None
    except ZeroDivisionError:
        raise Refusal("a coefficient on the support is zero") from None
    return {"q": scalar_to_str(q), "stages": [st.to_json() for st in stages], "tensor": s.to_json()}


def cmd_basis(args, cfg):
    lam = _parse_lambda(_load_json(args.partitions, "lambda"))
    ctx = EvalContext(field=_field(cfg))
    try:
        specs, witness = random_basis(lam, random.Random(cfg.seed), ctx, n=args.n)
    except BasisError as exc:
        raise Refusal(str(exc)) from None
    return {
        "lambda": [list(x) for x in lam],
        "kronecker": len(specs),
        "pis": [[list(s.tau1), list(s.tau2)] for s in specs],
        "basis": [s.to_json() for s in specs],
        "witness": [[scalar_to_str(x) for x in row] for row in witness],
        "witness_field": "rational" if cfg.field == "rational" else str(cfg.primes[0]),
    }


def cmd_eval(args, cfg):
    try:
        spec = HwvSpec.from_json(_unwrap(_load_json(args.hwv, "hwv"), "hwv"))
        t = tensor_from_json(_unwrap(_load_json(args.tensor, "tensor"), "tensor"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    value = evaluate(spec, t, EvalContext(field=_field(cfg)))
    return {"value": scalar_to_str(value), "field": "rational" if cfg.field == "rational" else str(cfg.primes[0])}


def cmd_nullspace(args, cfg):
    obj = _load_json(args.basis, "basis")
    try:
        basis = basis_from_json(obj)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not basis:
        raise UsageError("basis: empty")
    n = args.n or max(len(x) for x in basis[0].lam)
    try:
        found = find_vanishing(
            basis, args.rank, n, random.Random(cfg.seed), cfg.primes, cfg.samples_margin, cfg.threads
        )
    except ArithmeticError as exc:
        raise Refusal(str(exc)) from None
    return {
        "rank": args.rank,
        "samples": len(basis) + cfg.samples_margin,
        "kernel_dimension": len(found),
        "combinations": [f.to_json() for f in found],
    }


def cmd_verify(args, cfg):
    f = _load_combination(args.combination)
    r = args.rank if args.rank is not None else (f.r if f.r is not None else 6)
    rep = verify_vanishing(f, cfg.trials, cfg.primes, r, args.n, cfg.seed, cfg.threads)
    out = {"d": f.d, "report": rep.to_json()}
    if not rep.passed:
        raise Refusal(f"{rep.failures} trials did not vanish", out)
    return out


def cmd_family(args, cfg):
    f = _load_combination(args.combination)
    g = _parse_group_element(cfg.group_element)
    poly = eval_on_family(f, group_element=g, threads=cfg.threads)
    return {
        "d": f.d,
        "q_samples": [str(q) for q in default_q_samples(f.d)],
        "family_poly": poly.to_strs(),
        "text": str(poly),
    }


def cmd_certify(args, cfg):
    g = _parse_group_element(cfg.group_element)
    combos = []
    extra = {}
    for d in (19, 20):
        f = load_bundled(d)
        if d in cfg.rediscover:
            found = find_vanishing(
                f.basis, f.r, 4, random.Random(cfg.seed + d), cfg.primes, cfg.samples_margin, cfg.threads
            )
            extra[f"degree{d}"] = {
                "kernel_dimension": len(found),
                "matches_bundled": len(found) == 1 and list(found[0].coeffs) == list(f.coeffs),
            }
            if len(found) != 1:
                raise Refusal(f"rediscovery at degree {d} found a kernel of dimension {len(found)}", extra)
            f = found[0]
        combos.append(f)
    cert = certify(combos, cfg.trials, cfg.primes, cfg.seed, g, threads=cfg.threads)
    out = cert.to_json()
    if extra:
        out["rediscovery"] = extra
    if not cert.valid:
        raise Refusal(cert.diagnostic, out)
    return out


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _common(default_trials: int, default_field: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="root seed of all randomness (default 0)")
    p.add_argument("--prime", type=int, action="append", default=None, help="prime modulus; repeatable")
    p.add_argument("--trials", type=int, default=None, help=f"random trials per prime (default {default_trials})")
    p.add_argument("--samples-margin", type=int, default=None, help="extra sample tensors beyond k (default 4)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (results do not depend on it)")
    p.add_argument("--field", choices=["rational", "fp"], default=None, help=f"scalar domain (default {default_field})")
    p.add_argument("--group-element", default=None, help="three 4x4 matrices as JSON (default identity)")
    p.set_defaults(_default_trials=default_trials, _default_field=default_field)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwvrank", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, trials=100, field="fp"):
        sp = sub.add_parser(name, parents=[_common(trials, field)], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("kron", cmd_kron, "Kronecker coefficient of a partition triple")
    sp.add_argument("partitions", help="JSON triple of partitions")
    sp = add("mmten", cmd_mmten, "matrix multiplication tensor")
    sp.add_argument("n", type=int)
    sp.add_argument("--q", default=None, help="perturbed (1,1,1) coefficient (n = 2 only)")
    sp = add("normalize", cmd_normalize, "normal form of a <2,2,2>-supported tensor")
    sp.add_argument("tensor", help="tensor JSON (file, inline, or -)")
    sp = add("basis", cmd_basis, "random highest-weight vector basis")
    sp.add_argument("partitions", help="JSON triple of partitions")
    sp.add_argument("--n", type=int, default=None, help="dimension per leg (default: most parts)")
    sp = add("eval", cmd_eval, "evaluate a highest-weight vector at a tensor", field="rational")
    sp.add_argument("hwv")
    sp.add_argument("tensor")
    sp = add("nullspace", cmd_nullspace, "combinations vanishing at random rank-r tensors")
    sp.add_argument("basis")
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--n", type=int, default=None)
    sp = add("verify", cmd_verify, "randomized membership check of a combination")
    sp.add_argument("combination")
    sp.add_argument("--rank", type=int, default=None)
    sp.add_argument("--n", type=int, default=4)
    sp = add("certify", cmd_certify, "border support rank certificate for <2,2,2>", trials=0)
    sp.add_argument(
        "--rediscover",
        nargs="?",
        const="20",
        default=None,
        help="recompute the vanishing combination(s) of the given degrees (default 20; e.g. 19,20)",
    )
    sp = add("family", cmd_family, "polynomial of a combination along <2,2,2>_q", field="rational")
    sp.add_argument("combination")
    return parser


def _config(args) -> RunConfig:
    seed = args.seed if args.seed is not None else int(_env("seed", 0))
    primes = args.prime
    if primes is None:
        env = _env("prime", None)
        primes = [int(x) for x in env.split(",")] if env else default_primes(2)
    trials = args.trials if args.trials is not None else int(_env("trials", args._default_trials))
    margin = args.samples_margin if args.samples_margin is not None else int(_env("samples_margin", 4))
    threads = args.threads if args.threads is not None else int(_env("threads", 1))
    fld = args.field or _env("field", args._default_field)
    group = args.group_element if args.group_element is not None else _env("group_element", None)
    redisc = getattr(args, "rediscover", None)
    if redisc is None:
        redisc = _env("rediscover", None)
    degrees = sorted({int(x) for x in redisc.split(",")}) if redisc else []
    if fld not in ("rational", "fp"):
        raise UsageError(f"--field must be rational or fp, got {fld!r}")
    if trials < 0 or margin < 0 or threads < 1:
        raise UsageError("--trials and --samples-margin must be nonnegative and --threads positive")
    for p in primes:
        try:
            GF(p)
        except ValueError as exc:
            raise UsageError(f"--prime: {exc}") from None
    if any(d not in (19, 20) for d in degrees):
        raise UsageError("--rediscover takes degrees 19 and/or 20")
    inputs = [getattr(args, k) for k in ("partitions", "tensor", "hwv", "basis", "combination") if hasattr(args, k)]
    g = None
    if group is not None:
        g = _load_json(group, "--group-element")
    return RunConfig(args.command, seed, primes, trials, margin, fld, threads, degrees, g, inputs)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        payload = args.func(args, cfg)
        status = 0
    except UsageError as exc:
        print(f"hwvrank {args.command}: {exc}", file=sys.stderr)
        return 2
    except Refusal as exc:
        print(f"hwvrank {args.command}: refused: {exc}", file=sys.stderr)
        payload = exc.payload or {}
        payload = dict(payload, refused=str(exc))
        status = 1
    except (ValueError, ArithmeticError) as exc:
        print(f"hwvrank {args.command}: {exc}", file=sys.stderr)
        return 1
    payload = dict(payload)
    payload["config"] = cfg.to_json()
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
