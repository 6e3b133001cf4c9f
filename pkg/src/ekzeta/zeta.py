"""Smoothed partial zeta values via the evaluated cocycle formula, prime
selection with explicit general-position verification, and assembly of
critical Hecke L-values.

The central evaluation: with alpha transporting f a^-1 onto the standard
lattice Lambda(I), v0 = alpha(1), unit matrices U_i and the coefficient
pair built from the embeddings of the alpha-basis,

    zeta(a, 0) = detsig^-1 unit_index^-1 *
        sum_{sigma in S_{N-1}} sgn(sigma)
        sum_{0 != x in Pt^-1 f / f}
            cocycle_eval(v0 + alpha(x), u_sigma, pN, qN, coeff, p, I)

where u_sigma = (1, U_sigma(1), U_sigma(1) U_sigma(2), ...).  The
ineffective constant of the underlying existence lemma is replaced by a
finite list of exact translate checks, emitted as machine-checkable
certificates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from .cocycle import MPoly, MPolyPair, cocycle_eval, columns_matrix
from .errors import (
    GeneralPositionError,
    SearchExhaustedError,
    ValidationError,
)
from .extension import (
    AlphaMap,
    Embeddings,
    ExtField,
    LIdeal,
    make_alpha,
    rel_norm,
    unit_matrix,
    validate_units,
)
from .field import QuadElem, QuadField, QuadIdeal, is_coprime, primes_above
from .lattice import (
    GroupElement,
    OLattice,
    lambda_of_ideal,
    lies_in_translate,
    mat_vec_quad,
)
from .numerics import BigComplex, Tolerance, workprec


def _small_primes(bound):
    n = 2
    while n <= bound:
        yield n
        n += 1
        while n <= bound and any(n % p == 0 for p in range(2, int(math.isqrt(n)) + 1)):
            n += 1


def _poly_roots_mod(Fext: ExtField, pid: QuadIdeal) -> list[QuadElem]:
    """Roots of g modulo pid, as lifts in O, by scanning the residue field
    (primes here are small; only called for primes coprime to the
    power-basis index)."""
    K = Fext.base
    n = int(pid.norm())
    ell = None
    for p in range(2, n + 1):
        if n % p == 0:
            ell = p
            break
    inert = n == ell * ell
    if not inert:
        cands = [K.elem(a) for a in range(ell)]
    else:
        cands = [K.elem(a, b) for a in range(ell) for b in range(ell)]
    roots = []
    for c in cands:
        val = K.zero()
        cp = K.one()
        for coeff in Fext.g:
            val = val + coeff * cp
            cp = cp * c
        if pid.contains(val):
            roots.append(c)
    return roots


def make_prime_ideal(Fext: ExtField, pid: QuadIdeal, root: QuadElem) -> LIdeal:
    """The degree-1 prime P = pid O_L + (theta - root) O_L."""
    K = Fext.base
    th = Fext.theta_vec()
    one = Fext.one_vec()
    tmr = [a - root * b for a, b in zip(th, one)]
    gens = []
    for j in range(Fext.n):
        ej = [K.one() if t == j else K.zero() for t in range(Fext.n)]
        gens.append([pid.gen * x for x in ej])
        gens.append(Fext.mul(tmr, ej))
    return LIdeal.from_lattice(
        Fext, OLattice.from_o_generators(K, Fext.n, gens), check=False
    )


def select_prime_P(
    Fext: ExtField,
    f: LIdeal,
    a: LIdeal,
    search_bound: int = 200,
    skip: int = 0,
) -> LIdeal:
    """Smallest degree-1 prime P of O_L with n(P) of prime norm, coprime
    to f and a (optionally skipping the first few hits)."""
    K = Fext.base
    index_ideal = Fext.scalar_index_ideal()
    hits = 0
    for ell in _small_primes(search_bound):
        for pid, deg in primes_above(K, ell):
            if deg != 1:
                continue
            if not is_coprime(pid, index_ideal):
                continue
            for root in _poly_roots_mod(Fext, pid):
                P = make_prime_ideal(Fext, pid, root)
                if not (P.relative_norm() == pid):
                    continue
                if not (P.is_coprime_to(f) and P.is_coprime_to(a)):
                    continue
                if hits >= skip:
                    return P
                hits += 1
    raise SearchExhaustedError(f"no suitable P below {search_bound}")


@dataclass
class PositionCertificate:
    """One verified general-position fact: v0 + alpha(x) avoids every
    Lambda(pI)-translate of the recorded subspace."""

    x_coords: tuple
    subset: tuple
    sigma: tuple


def _subspaces_from_units(u_mats: list[GroupElement], N: int):
    """All proper subspaces spanned by first columns of the u_sigma tuples."""
    spans = {}
    for sigma in itertools.permutations(range(1, N)):
        tup = _u_sigma_tuple(u_mats, sigma)
        cols = [[g.mat[i][0] for i in range(N)] for g in tup]
        for r in range(0, N):
            for subset in itertools.combinations(range(N), r):
                key = (sigma, subset)
                spans[key] = [cols[i] for i in subset]
    return spans


def _u_sigma_tuple(u_mats: list[GroupElement], sigma) -> list[GroupElement]:
    N = u_mats[0].n
    one = GroupElement(
        [
            [u_mats[0].mat[0][0].field.one() if i == j else u_mats[0].mat[0][0].field.zero() for j in range(N)]
            for i in range(N)
        ]
    )
    out = [one]
    acc = one
    for s in sigma:
        acc = acc * u_mats[s - 1]
        out.append(acc)
    return out


def verify_ptilde(
    Fext: ExtField,
    f: LIdeal,
    a: LIdeal,
    P: LIdeal,
    Pt: LIdeal,
    alpha: AlphaMap,
    u_mats: list[GroupElement],
) -> list[PositionCertificate] | None:
    """Exact general-position verification of a candidate Pt: every
    nonzero x in Pt^-1 f / f must put v0 + alpha(x) outside every
    Lambda(pI)-translate of every unit-tuple subspace.  Returns the
    certificate list, or None when some check fails."""
    N = Fext.n
    if not (Pt.is_coprime_to(f) and Pt.is_coprime_to(a) and Pt.is_coprime_to(P)):
        return None
    reps = _quotient_nonzero_reps(Fext, f, Pt)
    if reps is None:
        return None
    v0 = alpha.v0()
    Lp = lambda_of_ideal(alpha.pid * alpha.I, N)
    spans = _subspaces_from_units(u_mats, N)
    certs = []
    for x in reps:
        z = [v + w for v, w in zip(v0, alpha.apply(x))]
        for (sigma, subset), span in sorted(spans.items()):
            try:
                hit = lies_in_translate(z, span, Lp)
            except Exception:
                continue
            if hit:
                return None
            certs.append(
                PositionCertificate(
                    x_coords=tuple((str(c.a), str(c.b)) for c in x),
                    subset=subset,
                    sigma=sigma,
                )
            )
    return certs


def ptilde_candidates(Fext: ExtField, search_bound: int = 200):
    """Degree-1 prime ideals of O_L in ascending order of the rational
    prime below (over primes coprime to the power-basis index)."""
    K = Fext.base
    index_ideal = Fext.scalar_index_ideal()
    for ell in _small_primes(search_bound):
        for pid, deg in primes_above(K, ell):
            if not is_coprime(pid, index_ideal):
                continue
            for root in _poly_roots_mod(Fext, pid):
                yield make_prime_ideal(Fext, pid, root)


def select_prime_Ptilde(
    Fext: ExtField,
    f: LIdeal,
    a: LIdeal,
    P: LIdeal,
    alpha: AlphaMap,
    u_mats: list[GroupElement],
    search_bound: int = 200,
    skip: int = 0,
) -> tuple[LIdeal, list[PositionCertificate]]:
    """Smallest verified Pt (optionally skipping the first few hits)."""
    hits = 0
    for Pt in ptilde_candidates(Fext, search_bound):
        certs = verify_ptilde(Fext, f, a, P, Pt, alpha, u_mats)
        if certs is not None:
            if hits >= skip:
                return Pt, certs
            hits += 1
    raise SearchExhaustedError(f"no suitable Ptilde below {search_bound}")


def _quotient_nonzero_reps(Fext: ExtField, f: LIdeal, Pt: LIdeal):
    """Nonzero representatives of (Pt^-1 f)/f, or None if the count is off."""
    sup = f * Pt.inverse()
    try:
        reps = sup.quotient_reps(f)
    except Exception:
        return None
    expected = int(Pt.absolute_norm())
    if len(reps) != expected:
        return None
    out = [x for x in reps if not f.contains(x)]
    if len(out) != expected - 1:
        return None
    return out


def build_P_alpha(p: int, q: int, alpha: AlphaMap, prec_bits: int) -> MPolyPair:
    """Coefficient pair p!^-N P_alpha^p (x) conj(Q_alpha)^q of degrees
    (pN, qN): P_alpha is the product of the linear forms given by the
    columns of S^-1 and Q_alpha the conjugated product of the rows of S,
    where S = (sigma_i(alpha_j))."""
    N = alpha.F.n
    S = alpha.sigma_mat
    with workprec(prec_bits + 32):
        det = alpha.detsig.to_mpc()
        rownorms = mpf(1)
        for row in S:
            rownorms *= mpmath.sqrt(sum(abs(x) ** 2 for x in row))
        if abs(det) < rownorms * mpf(2) ** (-(prec_bits // 2)):
            raise ValidationError("embedding matrix is ill-conditioned")
        Sinv = _mat_inv_mpc(S)
        P = MPoly.constant(N, mpc(1))
        for i in range(N):
            P = P * MPoly.linear_form([Sinv[j][i] for j in range(N)])
        Qb = MPoly.constant(N, mpc(1), conjugated=True)
        for i in range(N):
            Qb = Qb * MPoly.linear_form(
                [S[i][j].conjugate() for j in range(N)], conjugated=True
            )
        Ppow = P**p
        Qpow = Qb**q
        scale = mpf(math.factorial(p)) ** (-N)
        Ppow = Ppow.scale(mpc(scale))
    return MPolyPair(Ppow, Qpow)


def _mat_inv_mpc(M):
    n = len(M)
    A = [list(row) + [mpc(1) if i == j else mpc(0) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(A[r][c]))
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c:
                f = A[r][c]
                if f != 0:
                    A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


@dataclass
class ZetaJob:
    """Everything needed for one smoothed partial zeta value."""

    F: ExtField
    f: LIdeal
    a: LIdeal
    p: int
    q: int
    units: list
    unit_index: int
    P: LIdeal
    Ptilde: LIdeal
    alpha: AlphaMap
    u_mats: list
    prec_bits: int
    eps: object
    norm_unit_order: int = 1
    certificates: list = dc_field(default_factory=list)
    cache: object = None

    def validate(self):
        if self.p < 0 or self.q < 0:
            raise ValidationError("zeta exponents must be non-negative")
        if (self.p + self.q + 1) % self.norm_unit_order != 0:
            raise ValidationError(
                "weight condition fails: p+q+1 not divisible by |n(U(f))|"
            )
        pairs = [
            (self.f, self.a),
            (self.f, self.P),
            (self.f, self.Ptilde),
            (self.a, self.P),
            (self.a, self.Ptilde),
            (self.P, self.Ptilde),
        ]
        for x, y in pairs:
            if not x.is_coprime_to(y):
                raise ValidationError("ideal coprimality violated")
        rep = validate_units(self.units, self.f, self.F)
        if not rep.ok:
            raise ValidationError("unit validation failed: " + "; ".join(rep.messages))
        if self.unit_index < 1:
            raise ValidationError("unit_index must be positive")


def partial_zeta_smoothed(job: ZetaJob) -> BigComplex:
    """The doubly smoothed partial zeta value at s = 0 via the evaluated
    cocycle formula; deterministic summation order."""
    job.validate()
    N = job.F.n
    eps = Tolerance.of(job.eps)
    coeff = build_P_alpha(job.p, job.q, job.alpha, job.prec_bits)
    v0 = job.alpha.v0()
    reps = _quotient_nonzero_reps(job.F, job.f, job.Ptilde)
    if reps is None:
        raise ValidationError("Pt^-1 f / f does not have N(Pt) classes")
    reps.sort(key=lambda x: tuple((c.a, c.b) for c in x))
    sigmas = sorted(itertools.permutations(range(1, N)))
    nterms = max(1, len(reps) * len(sigmas))
    with workprec(job.prec_bits + 32):
        scale = abs(job.alpha.detsig.to_mpc()) * job.unit_index
        eps_term = Tolerance(eps.eps_abs * scale / (4 * nterms))
    total = BigComplex(0, 0, job.prec_bits)
    for sigma in sigmas:
        tup = _u_sigma_tuple(job.u_mats, sigma)
        sgn = _perm_sign(sigma)
        for x in reps:
            z = [v + w for v, w in zip(v0, job.alpha.apply(x))]
            val = cocycle_eval(
                z,
                tup,
                job.p * N,
                job.q * N,
                coeff,
                job.alpha.pid,
                job.alpha.I,
                eps_term,
                job.prec_bits,
                cache=job.cache,
                verify_membership=False,
            )
            total = total + (val if sgn > 0 else -val)
    inv = BigComplex(1, 0, job.prec_bits + 32) / job.alpha.detsig
    idx_inv = BigComplex(Fraction(1, job.unit_index), 0, job.prec_bits + 32)
    return total * inv * idx_inv


def _perm_sign(sigma) -> int:
    s = 1
    sig = list(sigma)
    for i in range(len(sig)):
        for j in range(i + 1, len(sig)):
            if sig[i] > sig[j]:
                s = -s
    return s


@dataclass
class LValueJob:
    """Assembly of a critical Hecke L-value from per-class zeta jobs."""

    jobs: list  # ZetaJob per ray-class representative
    char_values: list  # phi(a_j P Pt) per representative (exact or mpc)
    phi_P: object
    phi_Pt: object
    NP: int
    NPt: int
    weight_p: int  # infinity type (p, q) with p < 0 <= q
    weight_q: int

    def validate(self):
        if not (self.weight_p < 0 <= self.weight_q):
            raise ValidationError("weight must satisfy p < 0 <= q")
        if len(self.jobs) != len(self.char_values):
            raise ValidationError("one character value per representative")
        for job in self.jobs:
            if job.p != -self.weight_p - 1 or job.q != self.weight_q:
                raise ValidationError(
                    "zeta exponents must be (-p-1, q) for weight (p, q)"
                )


def l_value(job: LValueJob) -> tuple[BigComplex, BigComplex]:
    """(raw_sum, L0): raw_sum = sum_j phi(a_j P Pt) zeta_j(0) and L0 the
    L-value after dividing the two modified Euler factors at s = 0."""
    job.validate()
    prec = job.jobs[0].prec_bits
    raw = BigComplex(0, 0, prec)
    for zj, chi in zip(job.jobs, job.char_values):
        zv = partial_zeta_smoothed(zj)
        raw = raw + zv * _coerce_char(chi, prec)
    one = BigComplex(1, 0, prec + 32)
    eu1 = one - _coerce_char(job.phi_P, prec) * job.NP
    eu2 = one - _coerce_char(job.phi_Pt, prec)
    for eu, name in ((eu1, "P"), (eu2, "Ptilde")):
        if abs(eu.to_mpc()) <= 4 * (eu.err_abs + mpf(2) ** (-prec + 8)):
            raise ValidationError(
                f"vanishing Euler factor at {name}: re-choose smoothing primes"
            )
    L0 = raw / (eu1 * eu2)
    return raw, L0


def _coerce_char(x, prec) -> BigComplex:
    from .field import embed

    if isinstance(x, BigComplex):
        return x
    if isinstance(x, QuadElem):
        return embed(x, prec + 32)
    if isinstance(x, (int, Fraction)):
        return BigComplex(x, 0, prec + 32)
    return BigComplex.from_mpc(mpc(x), prec + 32)
