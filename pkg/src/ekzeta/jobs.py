"""Builders turning a parsed JobConfig into validated evaluation jobs."""

from __future__ import annotations

from fractions import Fraction

from mpmath import mpf

from .cache import EvalCache
from .config import JobConfig
from .errors import ValidationError
from .extension import ExtField, LIdeal, make_alpha, unit_matrix
from .field import QuadElem, QuadField, QuadIdeal, parse_quadelem
from .lattice import OLattice, mat_vec_quad
from .zeta import (
    LValueJob,
    ZetaJob,
    make_prime_ideal,
    select_prime_P,
    select_prime_Ptilde,
)


def build_field(cfg: JobConfig) -> QuadField:
    d = cfg.integer("field", "d", required=True)
    return QuadField(d)


def build_extension(cfg: JobConfig, K: QuadField) -> ExtField:
    g = cfg.elem_vector(K, "extension", "g", required=True)
    N = len(g) - 1
    ib_raw = cfg.get("extension", "intbasis", default="identity")
    if ib_raw == "identity":
        intbasis = [[K.one() if i == j else K.zero() for j in range(N)] for i in range(N)]
    else:
        intbasis = cfg.elem_matrix(K, "extension", "intbasis")
    mt_raw = cfg.get("extension", "multtable", default="auto")
    if mt_raw == "auto":
        multtable = _auto_multtable(K, g, intbasis)
    else:
        groups = [grp.strip() for grp in mt_raw.split("|")]
        if len(groups) != N * N:
            raise ValidationError(
                f"{cfg.where('extension', 'multtable')}: need {N * N} entries"
            )
        multtable = [
            [
                [parse_quadelem(p, K) for p in groups[i * N + j].split(",")]
                for j in range(N)
            ]
            for i in range(N)
        ]
    return ExtField(K, g, intbasis, multtable)


def _auto_multtable(K: QuadField, g, intbasis):
    """Multiplication table derived from power-basis arithmetic (the
    ExtField constructor re-validates it, so auto mode is self-consistent
    by construction)."""
    N = len(g) - 1

    def poly_mulmod(a, b):
        prod = [K.zero()] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] = prod[i + j] + x * y
        for d in range(len(prod) - 1, N - 1, -1):
            c = prod[d]
            if c.is_zero():
                continue
            prod[d] = K.zero()
            for t in range(N):
                prod[d - N + t] = prod[d - N + t] - c * g[t]
        return prod[:N]

    from .lattice import mat_inv_quad

    inv = mat_inv_quad(intbasis)
    cols = [[intbasis[i][j] for i in range(N)] for j in range(N)]
    table = []
    for i in range(N):
        row = []
        for j in range(N):
            pb = poly_mulmod(cols[i], cols[j])
            row.append(mat_vec_quad(inv, pb))
        table.append(row)
    return table


def build_ideal(cfg: JobConfig, F: ExtField, key: str, default_ring=False) -> LIdeal:
    raw = cfg.get("ideals", key, required=not default_ring)
    if raw is None or raw == "ring":
        return LIdeal.ring(F)
    K = F.base
    if raw.startswith("principal:"):
        vec = [parse_quadelem(p, K) for p in raw[len("principal:") :].split(",")]
        if len(vec) != F.n:
            raise ValidationError(
                f"{cfg.where('ideals', key)}: element needs {F.n} coordinates"
            )
        return LIdeal.principal(F, vec)
    if raw.startswith("basis:"):
        cols = [
            [parse_quadelem(p, K) for p in row.split(",")]
            for row in raw[len("basis:") :].split(";")
        ]
        return LIdeal(F, cols)
    raise ValidationError(
        f"{cfg.where('ideals', key)}: expected 'ring', 'principal: ...' or 'basis: ...'"
    )


def build_prime(cfg: JobConfig, F: ExtField, prefix: str) -> LIdeal | None:
    """Optional prime override: '<prefix>_pgen' (generator of the prime of
    O below) and '<prefix>_root' (theta = root mod the prime)."""
    pgen = cfg.elem(F.base, "ideals", f"{prefix}_pgen")
    if pgen is None:
        return None
    root = cfg.elem(F.base, "ideals", f"{prefix}_root", required=True)
    return make_prime_ideal(F, QuadIdeal(pgen), root)


def build_units(cfg: JobConfig, F: ExtField) -> list:
    units = []
    i = 1
    while True:
        raw = cfg.get("units", f"u{i}")
        if raw is None:
            break
        vec = [parse_quadelem(p, F.base) for p in raw.split(",")]
        if len(vec) != F.n:
            raise ValidationError(
                f"{cfg.where('units', f'u{i}')}: unit needs {F.n} coordinates"
            )
        units.append(vec)
        i += 1
    if len(units) != F.n - 1:
        raise ValidationError(f"need {F.n - 1} units, found {len(units)}")
    return units


def build_zeta_job(cfg: JobConfig, cache: EvalCache | None = None,
                   prec: int | None = None, eps=None) -> ZetaJob:
    K = build_field(cfg)
    F = build_extension(cfg, K)
    fid = build_ideal(cfg, F, "f")
    aid = build_ideal(cfg, F, "a", default_ring=True)
    units = build_units(cfg, F)
    unit_index = cfg.integer("units", "unit_index", required=True)
    norm_unit_order = cfg.integer("units", "norm_unit_order", default=1)
    p = cfg.integer("exponents", "p", default=None)
    q = cfg.integer("exponents", "q", default=None)
    if p is None or q is None:
        wp = cfg.integer("exponents", "weight_p", default=None)
        wq = cfg.integer("exponents", "weight_q", default=None)
        if wp is None or wq is None:
            raise ValidationError("need [exponents] p/q or weight_p/weight_q")
        p, q = -wp - 1, wq
    prec = prec if prec is not None else cfg.integer("params", "prec", default=256)
    eps = eps if eps is not None else mpf(cfg.get("params", "eps", default="1e-20"))
    search = cfg.integer("params", "search_bound", default=200)
    P = build_prime(cfg, F, "P")
    if P is None:
        P = select_prime_P(F, fid, aid, search_bound=search)
    alpha = make_alpha(F, fid, aid, P)
    u_mats = [unit_matrix(u, alpha, F) for u in units]
    Pt = build_prime(cfg, F, "Pt")
    certs = []
    if Pt is None:
        Pt, certs = select_prime_Ptilde(F, fid, aid, P, alpha, u_mats, search_bound=search)
    return ZetaJob(
        F=F, f=fid, a=aid, p=p, q=q, units=units, unit_index=unit_index,
        P=P, Ptilde=Pt, alpha=alpha, u_mats=u_mats, prec_bits=prec, eps=eps,
        norm_unit_order=norm_unit_order, certificates=certs, cache=cache,
    )


def build_lvalue_job(cfg: JobConfig, cache: EvalCache | None = None,
                     prec: int | None = None, eps=None) -> LValueJob:
    """One zeta job per ray-class representative (keys a, a2, a3, ...),
    sharing the same smoothing primes P and Pt across representatives (the
    Euler factors are global, so Pt must pass the general-position checks
    for every representative's alpha simultaneously)."""
    from .zeta import ptilde_candidates, verify_ptilde

    wp = cfg.integer("exponents", "weight_p", required=True)
    wq = cfg.integer("exponents", "weight_q", required=True)
    base_job = build_zeta_job(cfg, cache=cache, prec=prec, eps=eps)
    F = base_job.F
    K = F.base
    raw_vals = cfg.get("character", "values", required=True)
    char_values = [parse_quadelem(v.strip(), K) for v in raw_vals.split("|")]
    reps = [base_job.a]
    idx = 2
    while cfg.get("ideals", f"a{idx}") is not None:
        reps.append(build_ideal(cfg, F, f"a{idx}"))
        idx += 1
    if len(reps) != len(char_values):
        raise ValidationError(
            f"{len(reps)} representatives but {len(char_values)} character values"
        )
    alphas = [base_job.alpha]
    umatss = [base_job.u_mats]
    for aid in reps[1:]:
        al = make_alpha(F, base_job.f, aid, base_job.P)
        alphas.append(al)
        umatss.append([unit_matrix(u, al, F) for u in base_job.units])
    # joint Pt: try the base job's choice first, then later candidates
    search = cfg.integer("params", "search_bound", default=200)
    chosen = None
    for Pt in [base_job.Ptilde] + list(ptilde_candidates(F, search)):
        all_certs = []
        for aid, al, um in zip(reps, alphas, umatss):
            certs = verify_ptilde(F, base_job.f, aid, base_job.P, Pt, al, um)
            if certs is None:
                all_certs = None
                break
            all_certs.append(certs)
        if all_certs is not None:
            chosen = (Pt, all_certs)
            break
    if chosen is None:
        raise ValidationError("no Pt verifies for all representatives")
    Pt, all_certs = chosen
    jobs = []
    for aid, al, um, certs in zip(reps, alphas, umatss, all_certs):
        jobs.append(
            ZetaJob(
                F=F, f=base_job.f, a=aid, p=base_job.p, q=base_job.q,
                units=base_job.units, unit_index=base_job.unit_index,
                P=base_job.P, Ptilde=Pt, alpha=al, u_mats=um,
                prec_bits=base_job.prec_bits, eps=base_job.eps,
                norm_unit_order=base_job.norm_unit_order,
                certificates=certs, cache=cache,
            )
        )
    phi_P = cfg.elem(K, "character", "phi_P", required=True)
    phi_Pt = cfg.elem(K, "character", "phi_Pt", required=True)
    return LValueJob(
        jobs=jobs,
        char_values=char_values,
        phi_P=phi_P,
        phi_Pt=phi_Pt,
        NP=int(base_job.P.absolute_norm()),
        NPt=int(Pt.absolute_norm()),
        weight_p=wp,
        weight_q=wq,
    )
