"""Batch command-line interface.

Every command prints a JSON document with an inputs echo, a deterministic
"result" object (canonical key order; byte-identical across runs at fixed
seed and precision, cache on or off) and a volatile "timing" field kept
outside the result.  Exit codes: 0 success, 2 validation failure, 3
general-position failure, 4 precision failure, 5 search exhausted.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import __version__
from .cache import EvalCache
from .cocycle import (
    MPoly,
    MPolyPair,
    cocycle_check_closed,
    cocycle_eval,
    DedekindKey,
    dedekind_sum,
    check_general_position,
)
from .config import load_config
from .errors import EkzetaError, ValidationError
from .field import QuadField, QuadIdeal, parse_quadelem
from .jobs import build_lvalue_job, build_zeta_job
from .kronecker import KEKey, Lattice1D, MultiIndex, ke_accel, ke_direct, ke_rows
from .lattice import GroupElement
from .numerics import BigComplex, workprec
from .recognize import PeriodSpec, cm_period, normalize_by_period, recognize_algebraic
from .zeta import l_value, partial_zeta_smoothed


def _bc_json(v: BigComplex) -> dict:
    from .cache import mpf_to_hex

    with workprec(v.prec_bits):
        return {
            "re": mpmath.nstr(v.re, 40, strip_zeros=False),
            "im": mpmath.nstr(v.im, 40, strip_zeros=False),
            "re_hex": mpf_to_hex(v.re),
            "im_hex": mpf_to_hex(v.im),
            "err_abs": mpmath.nstr(v.err_abs, 8),
            "prec_bits": v.prec_bits,
        }


def _emit(command: str, inputs: dict, result: dict, t0: float, args) -> int:
    doc = {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "result": result,
        "timing": time.time() - t0,
    }
    json.dump(doc, sys.stdout, sort_keys=True, separators=(",", ":"))
    sys.stdout.write("\n")
    return 0


def _common(sub):
    sub.add_argument("--prec", type=int, default=256, help="precision in bits")
    sub.add_argument("--eps", default="1e-20", help="target absolute error")
    sub.add_argument("--cache", default=None, help="path of the evaluation cache")
    sub.add_argument("--json", action="store_true", help="JSON output (always on)")
    sub.add_argument("--verbose-terms", action="store_true")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1,
                     help="accepted for interface stability; evaluation is "
                          "sequential with deterministic summation order")


def cmd_ke(args) -> int:
    t0 = time.time()
    F = QuadField(args.d)
    lat = Lattice1D.from_ideal(QuadIdeal(parse_quadelem(args.ideal, F)))
    if args.z_re is not None:
        with workprec(args.prec):
            z = mpmath.mpc(mpmath.mpf(args.z_re), mpmath.mpf(args.z_im or "0"))
    else:
        z = parse_quadelem(args.z, F)
    s = Fraction(args.s)
    s = int(s) if s.denominator == 1 else mpf(s.numerator) / s.denominator
    key = KEKey(args.p, args.q, z, lat, s, args.prec)
    cache = EvalCache(args.cache) if args.cache else None
    route = {"accel": ke_accel, "direct": ke_direct, "rows": ke_rows}[args.route]
    if args.route == "accel":
        val = ke_accel(key, mpf(args.eps), cache=cache)
    else:
        val = route(key, mpf(args.eps))
    inputs = {
        "d": args.d, "ideal": args.ideal, "p": args.p, "q": args.q,
        "z": args.z or f"{args.z_re},{args.z_im}", "s": str(args.s),
        "prec": args.prec, "eps": args.eps, "route": args.route,
    }
    return _emit("ke", inputs, {"value": _bc_json(val)}, t0, args)


def _parse_vector(raw: str, F: QuadField):
    return [parse_quadelem(p, F) for p in raw.split(",")]


def _parse_matrix(raw: str, F: QuadField):
    return [[parse_quadelem(p, F) for p in row.split(",")] for row in raw.split(";")]


def cmd_dsum(args) -> int:
    t0 = time.time()
    F = QuadField(args.d)
    z = _parse_vector(args.z, F)
    A = _parse_matrix(args.A, F)
    I = MultiIndex(tuple(int(x) for x in args.I.split(",")))
    J = MultiIndex(tuple(int(x) for x in args.J.split(",")))
    base = QuadIdeal(parse_quadelem(args.base_ideal, F))
    smooth = QuadIdeal(parse_quadelem(args.smooth, F)) if args.smooth else None
    key = DedekindKey(
        I=I, J=J, z=tuple(z), A=tuple(tuple(r) for r in A), baseI=base,
        smoothP=smooth, prec_bits=args.prec,
    )
    cache = EvalCache(args.cache) if args.cache else None
    val = dedekind_sum(key, mpf(args.eps), cache=cache, route=args.route)
    inputs = {
        "d": args.d, "I": args.I, "J": args.J, "z": args.z, "A": args.A,
        "base_ideal": args.base_ideal, "smooth": args.smooth,
        "prec": args.prec, "eps": args.eps, "route": args.route,
    }
    return _emit("dsum", inputs, {"value": _bc_json(val)}, t0, args)


def _random_gamma(F: QuadField, pid: QuadIdeal, n: int, rng, steps=2) -> GroupElement:
    g = [[F.one() if i == j else F.zero() for j in range(n)] for i in range(n)]

    def matmul(a, b):
        return [
            [sum((a[i][t] * b[t][j] for t in range(n)), F.zero()) for j in range(n)]
            for i in range(n)
        ]

    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        x = F.elem(rng.randint(-1, 1), rng.randint(-1, 1))
        if j == 0 and i > 0:
            x = x * pid.gen
        e = [[F.one() if a == b else F.zero() for b in range(n)] for a in range(n)]
        e[i][j] = x
        g = matmul(g, e)
    return GroupElement(g)


def _random_tuple(F, pid, n, count, rng, det_bound=30):
    from .cocycle import columns_matrix
    from .lattice import det_quad
    import itertools

    while True:
        gs = [_random_gamma(F, pid, n, rng) for _ in range(count)]
        ok = True
        for sub in itertools.combinations(gs, n):
            A = columns_matrix(list(sub))
            d = det_quad(A)
            if not d.is_zero() and abs(d.norm()) > det_bound:
                ok = False
                break
        if ok:
            return gs


def _random_z(F, n, rng):
    return [
        F.elem(
            Fraction(rng.randint(-3, 3), rng.choice([5, 7, 11])),
            Fraction(rng.randint(-3, 3), rng.choice([5, 7, 11])),
        )
        for _ in range(n)
    ]


def cmd_cocycle_test(args) -> int:
    t0 = time.time()
    F = QuadField(args.d)
    pid = QuadIdeal(parse_quadelem(args.p_ideal, F))
    Oid = QuadIdeal(F.one())
    rng = random.Random(args.seed)
    n = args.N
    eps = mpf(args.eps)
    tol = mpf(args.tol)
    cache = EvalCache(args.cache) if args.cache else None
    coeff = MPolyPair(
        MPoly.monomial(n, tuple([args.p] + [0] * (n - 1))),
        MPoly.monomial(n, tuple([0] * (n - 1) + [args.q]), conjugated=True),
    )
    residuals = []
    worst = mpf(0)
    for trial in range(args.count):
        gs = _random_tuple(F, pid, n, n + 1, rng)
        while True:
            z = _random_z(F, n, rng)
            try:
                check_general_position(z, gs, pid, Oid)
                break
            except EkzetaError:
                continue
        res = cocycle_check_closed(
            gs, z, args.p, args.q, coeff, pid, Oid, eps, args.prec, cache=cache
        )
        residuals.append(mpmath.nstr(res, 6))
        worst = max(worst, res)
    ok = worst < tol
    inputs = {
        "d": args.d, "N": n, "p": args.p, "q": args.q, "seed": args.seed,
        "count": args.count, "prec": args.prec, "eps": args.eps, "tol": args.tol,
    }
    result = {
        "residuals": residuals,
        "worst": mpmath.nstr(worst, 6),
        "pass": bool(ok),
    }
    rc = _emit("cocycle-test", inputs, result, t0, args)
    return rc if ok else 1


def cmd_zeta(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    cache = EvalCache(args.cache) if args.cache else None
    job = build_zeta_job(cfg, cache=cache, prec=args.prec_opt, eps=mpf(args.eps) if args.eps_opt else None)
    val = partial_zeta_smoothed(job)
    from .extension import o_basis

    result = {
        "value": _bc_json(val),
        "NP": int(job.P.absolute_norm()),
        "NPt": int(job.Ptilde.absolute_norm()),
        "detsig": _bc_json(job.alpha.detsig),
        "certificates": len(job.certificates),
        "p": job.p,
        "q": job.q,
    }
    inputs = {"config": args.config, "prec": job.prec_bits, "eps": str(job.eps)}
    return _emit("zeta", inputs, result, t0, args)


def cmd_lvalue(args) -> int:
    t0 = time.time()
    cfg = load_config(args.config)
    cache = EvalCache(args.cache) if args.cache else None
    job = build_lvalue_job(cfg, cache=cache, prec=args.prec_opt, eps=mpf(args.eps) if args.eps_opt else None)
    raw, L0 = l_value(job)
    result = {
        "raw_sum": _bc_json(raw),
        "L0": _bc_json(L0),
        "NP": job.NP,
        "NPt": job.NPt,
        "weight": [job.weight_p, job.weight_q],
    }
    if args.recognize:
        d = cfg.integer("field", "d", required=True)
        prec = job.jobs[0].prec_bits
        om, _ = cm_period(PeriodSpec.builtin(d), prec)
        N = job.jobs[0].F.n
        t = normalize_by_period(L0, N, job.weight_p, job.weight_q, om, prec)
        rec_prec = min(prec, _usable_bits(t))
        rec = recognize_algebraic(t, args.degree_bound, args.height_bound, rec_prec)
        result["normalized"] = _bc_json(t)
        result["omega"] = mpmath.nstr(om, 40)
        result["recognized"] = (
            {
                "minpoly": list(rec.minpoly),
                "residual": mpmath.nstr(rec.residual, 6),
                "height": int(rec.height),
            }
            if rec
            else None
        )
    inputs = {"config": args.config, "prec": job.jobs[0].prec_bits}
    return _emit("lvalue", inputs, result, t0, args)


def _usable_bits(v: BigComplex) -> int:
    if v.err_abs == 0:
        return v.prec_bits
    import math

    bits = int(-mpmath.log(v.err_abs, 2)) - 16
    return max(64, min(v.prec_bits, 2 * (bits // 2)))


def cmd_recognize(args) -> int:
    t0 = time.time()
    with workprec(args.prec + 16):
        x = BigComplex(mpf(args.re), mpf(args.im), args.prec, mpf(args.err))
    rec = recognize_algebraic(x, args.degree_bound, args.height_bound, args.prec)
    result = {
        "recognized": (
            {
                "minpoly": list(rec.minpoly),
                "residual": mpmath.nstr(rec.residual, 6),
                "height": int(rec.height),
            }
            if rec
            else None
        )
    }
    inputs = {
        "re": args.re, "im": args.im, "prec": args.prec,
        "degree_bound": args.degree_bound, "height_bound": args.height_bound,
    }
    return _emit("recognize", inputs, result, t0, args)


def cmd_selftest(args) -> int:
    t0 = time.time()
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as e:
            checks.append((name, False, f"{type(e).__name__}: {e}"))

    from .numerics import upper_incomplete_gamma

    def gamma_recurrence():
        rng = random.Random(args.seed)
        with workprec(192):
            for _ in range(20):
                a = rng.randint(1, 40)
                x = mpf(rng.randint(0, 50)) + mpf(rng.random())
                lhs = upper_incomplete_gamma(a + 1, x, 160)
                rhs = a * upper_incomplete_gamma(a, x, 160) + x**a * mpmath.exp(-x)
                assert abs(lhs - rhs) <= abs(lhs) * mpf(2) ** -150

    check("gamma-recurrence", gamma_recurrence)

    def field_hom():
        from .field import embed

        rng = random.Random(args.seed)
        for d in (-1, -2, -3, -7, -11):
            F = QuadField(d)
            for _ in range(10):
                x = F.elem(rng.randint(-999, 999), rng.randint(-999, 999))
                y = F.elem(rng.randint(-999, 999), rng.randint(-999, 999))
                with workprec(160):
                    lhs = embed(x * y, 128).to_mpc()
                    rhs = embed(x, 128).to_mpc() * embed(y, 128).to_mpc()
                    assert abs(lhs - rhs) < mpf(2) ** -100

    check("field-embedding-hom", field_hom)

    def dual_path():
        F = QuadField(-1)
        lat = Lattice1D.from_ideal(QuadIdeal(F.one()))
        with workprec(192):
            z = mpmath.mpc("0.3301", "0.177")
        for (p, q) in [(2, 0), (3, 1)]:
            va = ke_accel(KEKey(p, q, z, lat, 2, 192), mpf("1e-30"))
            vr = ke_rows(KEKey(p, q, z, lat, 2, 192), mpf("1e-35"))
            assert abs(va.to_mpc() - vr.to_mpc()) < mpf("1e-28")

    check("ke-dual-path", dual_path)

    def cocycle_small():
        F = QuadField(-1)
        pid = QuadIdeal(F.elem(1, 1))
        Oid = QuadIdeal(F.one())
        rng = random.Random(args.seed)
        gs = _random_tuple(F, pid, 2, 3, rng)
        z = _random_z(F, 2, rng)
        coeff = MPolyPair(
            MPoly.constant(2, 1), MPoly.constant(2, 1, conjugated=True)
        )
        res = cocycle_check_closed(gs, z, 0, 0, coeff, pid, Oid, mpf("1e-18"), 192)
        assert res < mpf("1e-15"), f"residual {res}"

    check("cocycle-closedness", cocycle_small)

    def recognize_sanity():
        with workprec(224):
            x = BigComplex((1 + mpmath.sqrt(5)) / 2, 0, 224, mpf("1e-55"))
        rec = recognize_algebraic(x, 2, 10**6, 180)
        assert rec and list(rec.minpoly) == [-1, -1, 1]
        with workprec(224):
            y = BigComplex(mpmath.pi, 0, 224, mpf("1e-55"))
        assert recognize_algebraic(y, 6, 10**6, 180) is None

    check("recognition-sanity", recognize_sanity)

    def agm_period():
        om, iters = cm_period(PeriodSpec.builtin(-1), 192)
        assert iters <= 18
        with workprec(192):
            ref = mpf("5.244115108584239620929679179782238827366")
            assert abs(om - ref) < mpf("1e-30")

    check("cm-period", agm_period)

    ok = all(c[1] for c in checks)
    result = {
        "checks": [{"name": n, "pass": p, "detail": d} for n, p, d in checks],
        "pass": bool(ok),
    }
    _emit("selftest", {"seed": args.seed}, result, t0, args)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ekzeta",
        description="Kronecker-Eisenstein series, Dedekind sums and Hecke "
        "L-values over imaginary quadratic fields",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_ke = subs.add_parser("ke", help="one-variable series value")
    p_ke.add_argument("--d", type=int, required=True)
    p_ke.add_argument("--ideal", default="1")
    p_ke.add_argument("--p", type=int, required=True)
    p_ke.add_argument("--q", type=int, required=True)
    p_ke.add_argument("--z", default=None, help="exact element a+b*w")
    p_ke.add_argument("--z-re", default=None)
    p_ke.add_argument("--z-im", default=None)
    p_ke.add_argument("--s", default="0")
    p_ke.add_argument("--route", choices=["accel", "direct", "rows"], default="accel")
    _common(p_ke)
    p_ke.set_defaults(func=cmd_ke)

    p_ds = subs.add_parser("dsum", help="generalized Dedekind sum")
    p_ds.add_argument("--d", type=int, required=True)
    p_ds.add_argument("--I", required=True)
    p_ds.add_argument("--J", required=True)
    p_ds.add_argument("--z", required=True, help="vector: comma-separated elements")
    p_ds.add_argument("--A", required=True, help="matrix: rows ';', entries ','")
    p_ds.add_argument("--base-ideal", default="1")
    p_ds.add_argument("--smooth", default=None)
    p_ds.add_argument("--route", choices=["coset", "direct"], default="coset")
    _common(p_ds)
    p_ds.set_defaults(func=cmd_dsum)

    p_ct = subs.add_parser("cocycle-test", help="random cocycle identity check")
    p_ct.add_argument("--d", type=int, default=-1)
    p_ct.add_argument("--N", type=int, default=2)
    p_ct.add_argument("--p-ideal", default="1+1*w")
    p_ct.add_argument("--p", type=int, default=0)
    p_ct.add_argument("--q", type=int, default=0)
    p_ct.add_argument("--count", type=int, default=3)
    p_ct.add_argument("--tol", default="1e-15")
    _common(p_ct)
    p_ct.set_defaults(func=cmd_cocycle_test)

    p_z = subs.add_parser("zeta", help="smoothed partial zeta value")
    p_z.add_argument("--config", required=True)
    _common(p_z)
    p_z.set_defaults(func=cmd_zeta)

    p_l = subs.add_parser("lvalue", help="critical Hecke L-value")
    p_l.add_argument("--config", required=True)
    p_l.add_argument("--recognize", action="store_true")
    p_l.add_argument("--degree-bound", type=int, default=8)
    p_l.add_argument("--height-bound", type=int, default=10**8)
    _common(p_l)
    p_l.set_defaults(func=cmd_lvalue)

    p_r = subs.add_parser("recognize", help="algebraic recognition of a value")
    p_r.add_argument("--re", required=True)
    p_r.add_argument("--im", default="0")
    p_r.add_argument("--err", default="1e-40")
    p_r.add_argument("--degree-bound", type=int, default=8)
    p_r.add_argument("--height-bound", type=int, default=10**6)
    _common(p_r)
    p_r.set_defaults(func=cmd_recognize)

    p_s = subs.add_parser("selftest", help="run the invariant battery")
    _common(p_s)
    p_s.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    # zeta/lvalue read prec/eps from the config unless overridden
    args.prec_opt = args.prec if "--prec" in (argv or sys.argv) else None
    args.eps_opt = "--eps" in (argv or sys.argv)
    try:
        return args.func(args)
    except EkzetaError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
