"""Generalized Dedekind sums, their prime smoothing, multivariate
polynomial coefficients, and evaluation of the degree-(N-1) cocycle.

The cocycle value at group elements gamma_1, ..., gamma_N against a
coefficient pair (P, Qbar) is computed through the finite formula

    sum_{I,J} c_I d_J D_p^{I,J}(z, A, Lambda(I0)),
    A = (gamma_1 e_1 | ... | gamma_N e_1),

where the c_I are the monomial coefficients of y -> P(y A^{-1}) (P acts on
row vectors) and the d_J those of the conjugated polynomial v -> Qbar(A v).
This convention is pinned by two identities that the test suite enforces:
the equivariance of the cocycle under simultaneous translation of z and
the gamma tuple, and the closed form of the adapted coefficient pair of
the unit-cycle construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from .errors import (
    GeneralPositionError,
    ImproperSubspaceError,
    SingularMatrixError,
    ValidationError,
)
from .field import QuadElem, QuadField, QuadIdeal, embed
from .kronecker import KEKey, Lattice1D, MultiIndex, ke_accel_batch, ke_product
from .lattice import (
    GroupElement,
    OLattice,
    apply_matrix,
    coordinate_kernel_ideal,
    coset_reps,
    det_quad,
    lambda_of_ideal,
    lies_in_translate,
    mat_inv_quad,
    mat_vec_quad,
    in_gamma0,
)
from .numerics import BigComplex, Tolerance, workprec


def _c_is_zero(c) -> bool:
    if isinstance(c, QuadElem):
        return c.is_zero()
    return c == 0


class MPoly:
    """Sparse homogeneous polynomial in n_vars variables.

    Coefficients are either exact (QuadElem / Fraction / int) or numeric
    (mpc); the conjugated flag marks polynomials in the conjugated
    variables (anti-holomorphic factors)."""

    __slots__ = ("n_vars", "terms", "conjugated", "degree")

    def __init__(self, n_vars: int, terms: dict, conjugated: bool = False):
        clean = {}
        deg = None
        for expo, c in terms.items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != n_vars:
                raise ValidationError("exponent length mismatch")
            if _c_is_zero(c):
                continue
            d = sum(expo)
            if deg is None:
                deg = d
            elif d != deg:
                raise ValidationError("polynomial must be homogeneous")
            clean[expo] = c
        object.__setattr__(self, "n_vars", n_vars)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "conjugated", bool(conjugated))
        object.__setattr__(self, "degree", deg if deg is not None else 0)

    def __setattr__(self, *a):
        raise AttributeError("MPoly is immutable")

    @staticmethod
    def constant(n_vars: int, c=1, conjugated=False) -> "MPoly":
        return MPoly(n_vars, {tuple([0] * n_vars): c}, conjugated)

    @staticmethod
    def monomial(n_vars: int, expo, c=1, conjugated=False) -> "MPoly":
        return MPoly(n_vars, {tuple(expo): c}, conjugated)

    @staticmethod
    def linear_form(coeffs, conjugated=False) -> "MPoly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if not _c_is_zero(c):
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        if not terms:
            return MPoly(n, {tuple([0] * n): 0}, conjugated)
        return MPoly(n, terms, conjugated)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "MPoly") -> "MPoly":
        if self.n_vars != other.n_vars or self.conjugated != other.conjugated:
            raise ValidationError("incompatible polynomials")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return MPoly(self.n_vars, out, self.conjugated)

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if self.n_vars != other.n_vars or self.conjugated != other.conjugated:
                raise ValidationError("incompatible polynomials")
            out = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    c = c1 * c2
                    out[e] = out[e] + c if e in out else c
            return MPoly(self.n_vars, out, self.conjugated)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "MPoly":
        return MPoly(self.n_vars, {e: x * c for e, x in self.terms.items()}, self.conjugated)

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ValidationError("negative power")
        out = MPoly.constant(self.n_vars, 1, self.conjugated)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def substitute(self, M) -> "MPoly":
        """z -> P(M z): variable i is replaced by sum_j M[i][j] z_j."""
        n = self.n_vars
        if len(M) != n or any(len(r) != n for r in M):
            raise ValidationError("substitution matrix size mismatch")
        forms = [MPoly.linear_form(M[i], self.conjugated) for i in range(n)]
        out = None
        for expo, c in self.terms.items():
            term = MPoly.constant(n, c, self.conjugated)
            for i, e in enumerate(expo):
                if e:
                    term = term * forms[i] ** e
            out = term if out is None else out + term
        return out if out is not None else MPoly(n, {}, self.conjugated)

    def substitute_row(self, M) -> "MPoly":
        """y -> P(y M) for row vectors: substitution by the transpose."""
        Mt = [[M[j][i] for j in range(len(M))] for i in range(len(M))]
        return self.substitute(Mt)

    def numeric_coeffs(self, prec_bits: int) -> dict:
        out = {}
        for e, c in self.terms.items():
            if isinstance(c, QuadElem):
                out[e] = embed(c, prec_bits).to_mpc()
            elif isinstance(c, (int, Fraction)):
                out[e] = mpc(Fraction(c).numerator) / Fraction(c).denominator
            else:
                out[e] = mpc(c)
        return out

    def eval_numeric(self, point, prec_bits: int) -> mpc:
        """Evaluate at a complex point (conjugated polynomials are applied
        to the conjugates of the given coordinates)."""
        with workprec(prec_bits):
            vals = [mpc(x) for x in point]
            if self.conjugated:
                vals = [v.conjugate() for v in vals]
            total = mpc(0)
            for e, c in self.numeric_coeffs(prec_bits).items():
                t = c
                for i, k in enumerate(e):
                    if k:
                        t *= vals[i] ** k
                total += t
            return total

    def __repr__(self):
        bar = "~" if self.conjugated else ""
        return f"MPoly{bar}({self.terms!r})"


@dataclass(frozen=True)
class MPolyPair:
    """Coefficient pair: P of degree p in z, Qbar of degree q in conj(z)."""

    P: MPoly
    Qbar: MPoly

    def __post_init__(self):
        if self.P.conjugated or not self.Qbar.conjugated:
            raise ValidationError("P must be plain, Qbar conjugated")
        if self.P.n_vars != self.Qbar.n_vars:
            raise ValidationError("variable count mismatch")

    @property
    def degrees(self) -> tuple[int, int]:
        return (self.P.degree, self.Qbar.degree)

    def act(self, g: GroupElement) -> "MPolyPair":
        """The group action used by the cocycle: (g P)(y) = P(y g) on row
        polynomials and (g Qbar)(v) = Qbar(g^{-1} v) on conjugated ones."""
        gmat = [list(r) for r in g.mat]
        ginv = mat_inv_quad(gmat)
        ginv_conj = [[x.conj() for x in row] for row in ginv]
        return MPolyPair(self.P.substitute_row(gmat), self.Qbar.substitute(ginv_conj))


@dataclass(frozen=True)
class DedekindKey:
    I: MultiIndex
    J: MultiIndex
    z: tuple
    A: tuple
    baseI: QuadIdeal
    smoothP: QuadIdeal | None
    prec_bits: int


def columns_matrix(gammas: list[GroupElement]) -> list[list[QuadElem]]:
    """A(gamma) = (gamma_1 e_1 | ... | gamma_N e_1)."""
    N = gammas[0].n
    if len(gammas) != N:
        raise ValidationError(f"need exactly {N} group elements")
    return [[gammas[j].mat[i][0] for j in range(N)] for i in range(N)]


def _endomorphism_of(A, L: OLattice) -> bool:
    for v in L.basis_vectors():
        if not L.contains(mat_vec_quad(A, v)):
            return False
    return True


class _DedekindEngine:
    """Shared evaluator: all (I, J) Dedekind sums for a fixed (z, A,
    lattice) computed against one coset enumeration, with the per-point
    series evaluations batched over the needed (i_k, j_k) pairs."""

    def __init__(self, A, Lam: OLattice, z, prec_bits: int, cache=None):
        self.A = A
        self.Lam = Lam
        self.z = list(z)
        self.prec = prec_bits
        self.cache = cache
        F = Lam.field
        if det_quad(A).is_zero():
            raise SingularMatrixError("engine needs invertible A")
        if not _endomorphism_of(A, Lam):
            raise ValidationError("A does not stabilize the lattice")
        self.Ainv = mat_inv_quad(A)
        ALam = apply_matrix(A, Lam)
        self.reps = coset_reps(ALam, Lam)
        self.cs = [coordinate_kernel_ideal(Lam, k).gen for k in range(Lam.n)]
        self.lats = [Lattice1D.from_ideal(QuadIdeal(c)) for c in self.cs]
        self.points = []
        for rep in self.reps:
            y = mat_vec_quad(self.Ainv, [zz + rr for zz, rr in zip(self.z, rep)])
            for k, c in enumerate(self.cs):
                if (y[k] / c).is_integral():
                    raise GeneralPositionError(
                        f"shifted coordinate {k} lies on its lattice"
                    )
            self.points.append(y)

    def evaluate(self, ij_pairs: list[tuple[MultiIndex, MultiIndex]], eps) -> dict:
        """dict (I, J) -> D^{I,J}(z, A, Lam) value (BigComplex)."""
        eps = Tolerance.of(eps)
        N = self.Lam.n
        per_coord = [set() for _ in range(N)]
        for I, J in ij_pairs:
            for k in range(N):
                per_coord[k].add((I[k], J[k]))
        nterms = max(1, len(self.points)) * max(1, N)
        eps_term = Tolerance(eps.eps_abs / (16 * nterms))
        out = {key: BigComplex(0, 0, self.prec) for key in ij_pairs}
        for y in self.points:
            vals = []
            for k in range(N):
                vals.append(
                    _batch_cached(
                        y[k], self.lats[k], per_coord[k], eps_term, self.prec, self.cache
                    )
                )
            for I, J in ij_pairs:
                factor = None
                for k in range(N):
                    v = vals[k][(I[k], J[k])]
                    factor = v if factor is None else factor * v
                out[(I, J)] = out[(I, J)] + factor
        det = det_quad(self.A)
        det_inv = embed(det, self.prec + 32)
        one = BigComplex(1, 0, self.prec + 32)
        det_inv = one / det_inv
        return {key: val * det_inv for key, val in out.items()}


def _batch_cached(zk, lat, pairs, eps, prec, cache):
    pairs = sorted(pairs)
    missing = []
    out = {}
    if cache is not None:
        for (p, q) in pairs:
            key = KEKey(p, q, zk, lat, 0, prec)
            hit = cache.lookup(key.cache_key(eps.eps_abs), prec, eps.eps_abs)
            if hit is None:
                missing.append((p, q))
            else:
                out[(p, q)] = hit
    else:
        missing = pairs
    if missing:
        res = ke_accel_batch(zk, lat, 0, missing, eps, prec)
        for pq, val in res.items():
            out[pq] = val
            if cache is not None:
                key = KEKey(pq[0], pq[1], zk, lat, 0, prec)
                cache.store(key.cache_key(eps.eps_abs), val)
    return out


def matrix_substitute(P: MPoly, M) -> MPoly:
    """Expanded polynomial z -> P(M z); conjugated polynomials substitute
    the matrix as given (callers pass the conjugated matrix)."""
    return P.substitute(M)


def dedekind_sum(key: DedekindKey, eps, cache=None, route: str = "coset") -> BigComplex:
    """D^{I,J}(z, A, Lambda(baseI)) (unsmoothed when smoothP is None,
    otherwise the smoothed difference).

    route='coset' uses the finite coset expansion; route='direct' computes
    det(A)^{-1} K^{I,J}(A^{-1} z, A^{-1} Lambda) without coset expansion
    (the two are equal; the acceptance suite checks it)."""
    A = [list(r) for r in key.A]
    z = list(key.z)
    lam_ideals = [key.baseI]
    weights = [1]
    if key.smoothP is not None:
        np_ = int(key.smoothP.norm())
        lam_ideals = [key.smoothP * key.baseI, key.baseI]
        weights = [1, -np_]
    if det_quad(A).is_zero():
        return BigComplex(0, 0, key.prec_bits)
    eps = Tolerance.of(eps)
    total = BigComplex(0, 0, key.prec_bits)
    for ideal, wgt in zip(lam_ideals, weights):
        Lam = lambda_of_ideal(ideal, len(z))
        if route == "coset":
            eng = _DedekindEngine(A, Lam, z, key.prec_bits, cache)
            val = eng.evaluate([(key.I, key.J)], Tolerance(eps.eps_abs / (2 * len(weights))))[
                (key.I, key.J)
            ]
        elif route == "direct":
            Ainv = mat_inv_quad(A)
            y = mat_vec_quad(Ainv, z)
            LamT = apply_matrix(Ainv, Lam)
            v = ke_product(
                y, LamT, key.I, key.J, Tolerance(eps.eps_abs / (4 * len(weights))),
                key.prec_bits, cache=cache,
            )
            det_inv = BigComplex(1, 0, key.prec_bits + 32) / embed(
                det_quad(A), key.prec_bits + 32
            )
            val = v * det_inv
        else:
            raise ValidationError(f"unknown route {route!r}")
        total = total + val * wgt
    return total


def dedekind_sum_smoothed(key: DedekindKey, eps, cache=None) -> BigComplex:
    if key.smoothP is None:
        raise ValidationError("smoothed sum needs smoothP")
    if not is_coprime_ids(key.smoothP, key.baseI):
        raise ValidationError("smoothing prime must be coprime to the base ideal")
    return dedekind_sum(key, eps, cache=cache)


def is_coprime_ids(a: QuadIdeal, b: QuadIdeal) -> bool:
    from .field import is_coprime

    return is_coprime(a, b)


def check_general_position(
    z, gammas: list[GroupElement], p_ideal: QuadIdeal, I_ideal: QuadIdeal
) -> None:
    """Exact check that z avoids every Lambda(pI)-translate of every proper
    subspace spanned by a subset of the first columns; raises
    GeneralPositionError naming the offending subspace."""
    N = gammas[0].n
    L = lambda_of_ideal(p_ideal * I_ideal, N)
    cols = [[g.mat[i][0] for i in range(N)] for g in gammas]
    for r in range(0, N + 1):
        for subset in itertools.combinations(range(len(cols)), r):
            span = [cols[i] for i in subset]
            try:
                hit = lies_in_translate(z, span, L)
            except ImproperSubspaceError:
                continue  # full space: no constraint
            if hit:
                raise GeneralPositionError(
                    f"z lies in a lattice translate of the span of columns {subset}"
                )


def cocycle_eval(
    z,
    gammas: list[GroupElement],
    p: int,
    q: int,
    coeff: MPolyPair,
    p_ideal: QuadIdeal,
    I_ideal: QuadIdeal,
    eps,
    prec_bits: int,
    cache=None,
    verify_membership: bool = True,
    verify_position: bool = False,
) -> BigComplex:
    """Value of the smoothed cocycle at (z, gamma_1..gamma_N) against the
    coefficient pair; zero when the column matrix is singular."""
    eps = Tolerance.of(eps)
    N = gammas[0].n
    if coeff.degrees != (p, q):
        raise ValidationError(f"coefficient degrees {coeff.degrees} != ({p},{q})")
    if verify_membership:
        for g in gammas:
            if not in_gamma0(g, p_ideal, I_ideal):
                raise ValidationError("group element outside Gamma_0(p, Lambda(I))")
    A = columns_matrix(gammas)
    if det_quad(A).is_zero():
        return BigComplex(0, 0, prec_bits)
    if verify_position:
        check_general_position(z, gammas, p_ideal, I_ideal)
    Ainv = mat_inv_quad(A)
    A_conj = [[x.conj() for x in row] for row in A]
    cP = coeff.P.substitute_row(Ainv)
    cQ = coeff.Qbar.substitute(A_conj)
    prec_c = prec_bits + 32
    cPn = cP.numeric_coeffs(prec_c)
    cQn = cQ.numeric_coeffs(prec_c)
    pairs = []
    coeffs = {}
    for eI, cI in cPn.items():
        for eJ, dJ in cQn.items():
            w = cI * dJ
            if w == 0:
                continue
            key = (MultiIndex(eI), MultiIndex(eJ))
            pairs.append(key)
            coeffs[key] = w
    if not pairs:
        return BigComplex(0, 0, prec_bits)
    coefsum = sum(abs(w) for w in coeffs.values())
    np_ = int(p_ideal.norm())
    eps_engine = Tolerance(eps.eps_abs / (4 * (1 + np_) * (1 + coefsum)))
    Lam_p = lambda_of_ideal(p_ideal * I_ideal, N)
    Lam_0 = lambda_of_ideal(I_ideal, N)
    eng_p = _DedekindEngine(A, Lam_p, z, prec_bits, cache)
    eng_0 = _DedekindEngine(A, Lam_0, z, prec_bits, cache)
    D_p = eng_p.evaluate(pairs, eps_engine)
    D_0 = eng_0.evaluate(pairs, eps_engine)
    total = BigComplex(0, 0, prec_bits)
    for key in pairs:
        D = D_p[key] + D_0[key] * (-np_)
        w = coeffs[key]
        total = total + D * BigComplex.from_mpc(w, prec_bits + 32)
    return total


def cocycle_check_closed(
    gammas: list[GroupElement],
    z,
    p: int,
    q: int,
    coeff: MPolyPair,
    p_ideal: QuadIdeal,
    I_ideal: QuadIdeal,
    eps,
    prec_bits: int,
    cache=None,
) -> mpf:
    """|alternating sum over the N+1 subtuples|; the cocycle identity says
    this vanishes."""
    N = gammas[0].n
    if len(gammas) != N + 1:
        raise ValidationError(f"need {N + 1} group elements")
    total = BigComplex(0, 0, prec_bits)
    for i in range(N + 1):
        sub = gammas[:i] + gammas[i + 1 :]
        v = cocycle_eval(
            z, sub, p, q, coeff, p_ideal, I_ideal, eps, prec_bits, cache=cache
        )
        total = total + (v if i % 2 == 0 else -v)
    return abs(total.to_mpc())
