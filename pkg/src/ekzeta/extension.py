"""Degree-N extensions L/k as exact validated data.

All extension data (integral basis, multiplication table, ideal bases,
units) are inputs: nothing class-field-theoretic is computed here, but
every property the evaluators consume is verified exactly.  Elements of L
are coordinate vectors over k in the integral basis w_1..w_N; O_L-ideals
are O-lattices of rank N (reusing the Z-level lattice machinery) with an
exact O_L-stability check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .errors import (
    PrecisionError,
    RootSeparationError,
    ValidationError,
)
from .field import QuadElem, QuadField, QuadIdeal, canonical_associate, divmod_O, embed, gcd_extended
from .lattice import (
    GroupElement,
    OLattice,
    apply_matrix,
    det_quad,
    lambda_of_ideal,
    lattice_index,
    lattice_intersection,
    lattice_sum,
    mat_inv_quad,
    mat_mul_quad,
    mat_vec_quad,
    standard_basis,
    in_gamma0,
)
from .numerics import BigComplex, workprec


class ExtField:
    """L = k[x]/(g) with an O-basis w_1..w_N of O_L.

    g is monic with coefficients in O (ascending order, g[N] = 1);
    intbasis columns express w_j in the power basis 1, theta, ...,
    theta^(N-1); multtable[i][j] is the w-coordinate vector of w_i w_j and
    is validated against power-basis arithmetic at construction."""

    def __init__(self, base: QuadField, g: list[QuadElem], intbasis, multtable):
        self.base = base
        self.g = list(g)
        N = len(g) - 1
        if N < 2:
            raise ValidationError("extension degree must be >= 2")
        if not (g[N] == base.one()):
            raise ValidationError("g must be monic")
        for c in g:
            if not c.is_integral():
                raise ValidationError("g must have integral coefficients")
        self.n = N
        self.intbasis = [list(r) for r in intbasis]
        if len(self.intbasis) != N or any(len(r) != N for r in self.intbasis):
            raise ValidationError("intbasis must be N x N")
        if det_quad(self.intbasis).is_zero():
            raise ValidationError("intbasis is singular")
        self.intbasis_inv = mat_inv_quad(self.intbasis)
        self.multtable = [
            [list(multtable[i][j]) for j in range(N)] for i in range(N)
        ]
        self._validate_multtable()
        self._check_squarefree()

    # ---- polynomial helpers over k

    def _poly_mulmod(self, a: list[QuadElem], b: list[QuadElem]) -> list[QuadElem]:
        """Product of power-basis polynomials reduced mod g."""
        F = self.base
        N = self.n
        prod = [F.zero()] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x.is_zero():
                continue
            for j, y in enumerate(b):
                prod[i + j] = prod[i + j] + x * y
        # reduce: theta^N = -(g_0 + g_1 theta + ... + g_{N-1} theta^{N-1})
        for d in range(len(prod) - 1, N - 1, -1):
            c = prod[d]
            if c.is_zero():
                continue
            prod[d] = F.zero()
            for t in range(N):
                prod[d - N + t] = prod[d - N + t] - c * self.g[t]
        return prod[:N]

    def _validate_multtable(self):
        F = self.base
        N = self.n
        cols = [[self.intbasis[i][j] for i in range(N)] for j in range(N)]
        for i in range(N):
            for j in range(N):
                prod_pb = self._poly_mulmod(cols[i], cols[j])
                # express in w-basis: solve intbasis * c = prod_pb
                c = mat_vec_quad(self.intbasis_inv, prod_pb)
                claimed = self.multtable[i][j]
                if len(claimed) != N:
                    raise ValidationError("multtable entry has wrong length")
                for t in range(N):
                    if not (c[t] == claimed[t]):
                        raise ValidationError(
                            f"multtable[{i}][{j}] does not match power-basis arithmetic"
                        )
                    if not claimed[t].is_integral():
                        raise ValidationError("multtable entries must lie in O")

    def _check_squarefree(self):
        """gcd(g, g') must be 1: rules out repeated factors (cheap exact
        stand-in for irreducibility; the numeric root-separation check in
        embeddings() catches the rest at evaluation time)."""
        F = self.base
        a = list(self.g)
        b = [c * i for i, c in enumerate(self.g)][1:]
        while any(not x.is_zero() for x in b):
            a, b = b, _poly_mod(a, b, F)
        deg = max((i for i, c in enumerate(a) if not c.is_zero()), default=0)
        if deg != 0:
            raise ValidationError("g is not squarefree")

    # ---- element arithmetic in the w-basis

    def zero_vec(self):
        return [self.base.zero()] * self.n

    def one_vec(self):
        # coordinates of 1 in the w-basis
        F = self.base
        one_pb = [F.one()] + [F.zero()] * (self.n - 1)
        return mat_vec_quad(self.intbasis_inv, one_pb)

    def theta_vec(self):
        F = self.base
        th = [F.zero(), F.one()] + [F.zero()] * (self.n - 2)
        return mat_vec_quad(self.intbasis_inv, th)

    def mul(self, x: list[QuadElem], y: list[QuadElem]) -> list[QuadElem]:
        F = self.base
        out = self.zero_vec()
        for i in range(self.n):
            if x[i].is_zero():
                continue
            for j in range(self.n):
                if y[j].is_zero():
                    continue
                c = x[i] * y[j]
                row = self.multtable[i][j]
                out = [o + c * r for o, r in zip(out, row)]
        return out

    def mul_matrix(self, x: list[QuadElem]) -> list[list[QuadElem]]:
        """Matrix of multiplication by x in the w-basis (columns = x*w_j)."""
        cols = []
        F = self.base
        for j in range(self.n):
            ej = [F.one() if t == j else F.zero() for t in range(self.n)]
            cols.append(self.mul(x, ej))
        return [[cols[j][i] for j in range(self.n)] for i in range(self.n)]

    def power(self, x: list[QuadElem], k: int) -> list[QuadElem]:
        out = self.one_vec()
        base = list(x)
        while k:
            if k & 1:
                out = self.mul(out, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return out

    def scalar_index_ideal(self) -> QuadIdeal:
        """The O-ideal det(intbasis)^-1 O measuring [O_L : O[theta]]."""
        return QuadIdeal(det_quad(self.intbasis)).inverse()

    def ring_lattice(self) -> OLattice:
        return OLattice.from_o_generators(self.base, self.n, standard_basis(self.base, self.n))


def _poly_mod(a: list[QuadElem], b: list[QuadElem], F: QuadField) -> list[QuadElem]:
    a = list(a)
    db = max(i for i, c in enumerate(b) if not c.is_zero())
    lead = b[db]
    for d in range(len(a) - 1, db - 1, -1):
        if d >= len(a) or a[d].is_zero():
            continue
        f = a[d] / lead
        for t in range(db + 1):
            a[d - db + t] = a[d - db + t] - f * b[t]
    return a[:db] if db > 0 else [F.zero()]


def rel_norm(F: ExtField, x: list[QuadElem]) -> QuadElem:
    """Norm L -> k: determinant of the multiplication matrix."""
    return det_quad(F.mul_matrix(x))


def rel_trace(F: ExtField, x: list[QuadElem]) -> QuadElem:
    M = F.mul_matrix(x)
    t = F.base.zero()
    for i in range(F.n):
        t = t + M[i][i]
    return t


class LIdeal:
    """Fractional O_L-ideal given by an O-basis (columns, w-coordinates)."""

    def __init__(self, F: ExtField, lat_cols: list[list[QuadElem]], check=True):
        self.F = F
        self.lattice = OLattice.from_o_generators(F.base, F.n, lat_cols)
        if check and not self._ol_stable():
            raise ValidationError("module is not O_L-stable")

    @staticmethod
    def from_lattice(F: ExtField, lattice: OLattice, check=True) -> "LIdeal":
        out = LIdeal.__new__(LIdeal)
        out.F = F
        out.lattice = lattice
        if check and not out._ol_stable():
            raise ValidationError("module is not O_L-stable")
        return out

    def _ol_stable(self) -> bool:
        F = self.F
        basis = self.lattice.basis_vectors()
        Fk = F.base
        for i in range(F.n):
            wi = [Fk.one() if t == i else Fk.zero() for t in range(F.n)]
            for v in basis:
                if not self.lattice.contains(F.mul(wi, v)):
                    return False
        return True

    @staticmethod
    def ring(F: ExtField) -> "LIdeal":
        return LIdeal(F, standard_basis(F.base, F.n), check=False)

    @staticmethod
    def principal(F: ExtField, x: list[QuadElem]) -> "LIdeal":
        Fk = F.base
        cols = []
        for j in range(F.n):
            ej = [Fk.one() if t == j else Fk.zero() for t in range(F.n)]
            cols.append(F.mul(x, ej))
        return LIdeal(F, cols, check=False)

    def __mul__(self, other: "LIdeal") -> "LIdeal":
        gens = []
        for a in self.lattice.basis_vectors():
            for b in other.lattice.basis_vectors():
                gens.append(self.F.mul(a, b))
        return LIdeal.from_lattice(
            self.F, OLattice.from_z_generators(self.F.base, self.F.n, gens, check_o_stable=False),
            check=False,
        )

    def inverse(self) -> "LIdeal":
        """{x : x a <= O_L} by intersecting preimage lattices."""
        F = self.F
        ring = F.ring_lattice()
        inter = None
        for a in self.lattice.basis_vectors():
            M = F.mul_matrix(a)
            Minv = mat_inv_quad(M)
            Lpre = apply_matrix(Minv, ring)
            inter = Lpre if inter is None else lattice_intersection(inter, Lpre)
        return LIdeal.from_lattice(F, inter, check=False)

    def contains(self, x: list[QuadElem]) -> bool:
        return self.lattice.contains(x)

    def is_integral(self) -> bool:
        return all(self.F.ring_lattice().contains(v) for v in self.lattice.basis_vectors())

    def absolute_norm(self) -> Fraction:
        return self.lattice.det_key() / self.F.ring_lattice().det_key()

    def relative_norm(self) -> QuadIdeal:
        """n(a) as an O-ideal: the determinant ideal of an O-basis matrix
        relative to the w-basis."""
        A = _cols_to_matrix(o_basis(self.lattice))
        return QuadIdeal(det_quad(A))

    def is_coprime_to(self, other: "LIdeal") -> bool:
        s = lattice_sum(self.lattice, other.lattice)
        return s == self.F.ring_lattice()

    def quotient_reps(self, sub: "LIdeal") -> list[list[QuadElem]]:
        """Representatives of self/sub (sub contained in self)."""
        from .lattice import coset_reps

        return coset_reps(sub.lattice, self.lattice)

    def __eq__(self, other):
        return isinstance(other, LIdeal) and self.lattice == other.lattice

    def __hash__(self):
        return hash(self.lattice)


def _cols_to_matrix(cols: list[list[QuadElem]]):
    n = len(cols[0])
    return [[cols[j][i] for j in range(len(cols))] for i in range(n)]


def o_basis(lattice: OLattice) -> list[list[QuadElem]]:
    """An O-basis (N vectors) of a rank-N O-stable lattice, extracted from
    its 2N Z-basis vectors by Hermite reduction over the Euclidean ring O."""
    F = lattice.field
    vecs = lattice.basis_vectors()
    n = lattice.n
    den = 1
    for v in vecs:
        for x in v:
            den = math.lcm(den, x.denominator())
    cols = [[x * den for x in v] for v in vecs]
    ncols = len(cols)
    r = 0
    c = 0
    while r < n and c < ncols:
        piv = None
        best = None
        for j in range(c, ncols):
            if not cols[j][r].is_zero():
                nn = abs(cols[j][r].norm())
                if best is None or nn < best:
                    best = nn
                    piv = j
        if piv is None:
            r += 1
            continue
        cols[c], cols[piv] = cols[piv], cols[c]
        j = c + 1
        while j < ncols:
            while not cols[j][r].is_zero():
                q, _ = divmod_O(cols[j][r], cols[c][r])
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[c])]
                if not cols[j][r].is_zero():
                    cols[c], cols[j] = cols[j], cols[c]
            j += 1
        r += 1
        c += 1
    out = [
        [x * Fraction(1, den) for x in col]
        for col in cols
        if any(not x.is_zero() for x in col)
    ]
    if len(out) != n:
        raise ValidationError("module does not have full rank over O")
    # sanity: the O-span of the reduced columns equals the lattice
    recon = OLattice.from_o_generators(F, n, out)
    if not (recon == lattice):
        raise ValidationError("O-basis extraction changed the module")
    return out


class Embeddings:
    """The N complex embeddings of L extending the fixed embedding of k,
    in deterministic order (sorted by real part, then imaginary part)."""

    def __init__(self, F: ExtField, prec_bits: int):
        self.F = F
        self.prec = prec_bits
        with workprec(prec_bits + 32):
            coeffs = [embed(c, prec_bits + 32).to_mpc() for c in F.g]
            # mpmath.polyroots wants descending order
            roots = mpmath.polyroots(
                list(reversed(coeffs)), maxsteps=200, extraprec=prec_bits
            )
            roots = sorted(roots, key=lambda r: (r.real, r.imag))
            sep = min(
                abs(roots[i] - roots[j])
                for i in range(len(roots))
                for j in range(i + 1, len(roots))
            )
            if sep < mpf(2) ** (-(prec_bits // 2)):
                raise RootSeparationError("roots of g are numerically indistinct")
            self.roots = roots
            # sigma_i(w_j)
            N = F.n
            self.wmat = []
            for i in range(N):
                row = []
                for j in range(N):
                    val = mpc(0)
                    for t in range(N):
                        c = F.intbasis[t][j]
                        if not c.is_zero():
                            val += embed(c, prec_bits + 32).to_mpc() * roots[i] ** t
                    row.append(val)
                self.wmat.append(row)

    def apply(self, i: int, x: list[QuadElem]) -> mpc:
        with workprec(self.prec + 32):
            val = mpc(0)
            for j, c in enumerate(x):
                if not c.is_zero():
                    val += embed(c, self.prec + 32).to_mpc() * self.wmat[i][j]
            return val

    def vector(self, x: list[QuadElem]) -> list[mpc]:
        return [self.apply(i, x) for i in range(self.F.n)]


def embeddings(F: ExtField, prec_bits: int) -> Embeddings:
    return Embeddings(F, prec_bits)


@dataclass
class AlphaMap:
    """k-isomorphism alpha: L -> k^N with alpha(f a^-1) = Lambda(I) and
    alpha(f (a P)^-1) = Lambda(p I); mat is the matrix in the w-basis and
    sigma_mat the numeric matrix (sigma_i(alpha_j)) of the dual basis."""

    F: ExtField
    mat: list
    mat_inv: list
    I: QuadIdeal
    pid: QuadIdeal
    detsig: BigComplex
    sigma_mat: list
    emb: Embeddings

    def apply(self, x: list[QuadElem]) -> list[QuadElem]:
        return mat_vec_quad(self.mat, x)

    def apply_inv(self, v: list[QuadElem]) -> list[QuadElem]:
        return mat_vec_quad(self.mat_inv, v)

    def v0(self) -> list[QuadElem]:
        return self.apply(self.F.one_vec())

    def transport(self, b: LIdeal) -> OLattice:
        return apply_matrix(self.mat, b.lattice)


def transport_ideal(b: LIdeal, alpha: AlphaMap) -> OLattice:
    return alpha.transport(b)


def _o_snf(M: list[list[QuadElem]]):
    """Smith-style diagonalization over the norm-Euclidean ring O:
    returns (U, D, V) with U M V = D diagonal, U, V unimodular over O."""
    n = len(M)
    m = len(M[0])
    F = M[0][0].field
    A = [list(r) for r in M]
    U = [[F.one() if i == j else F.zero() for j in range(n)] for i in range(n)]
    V = [[F.one() if i == j else F.zero() for j in range(m)] for i in range(m)]

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for X in (A, V):
                for row in X:
                    row[i], row[j] = row[j], row[i]

    def addmul_row(i, k, q):
        A[i] = [x - q * y for x, y in zip(A[i], A[k])]
        U[i] = [x - q * y for x, y in zip(U[i], U[k])]

    def addmul_col(j, k, q):
        for X in (A, V):
            for row in X:
                row[j] = row[j] - q * row[k]

    t = 0
    while t < min(n, m):
        piv = None
        best = None
        for i in range(t, n):
            for j in range(t, m):
                if not A[i][j].is_zero():
                    nn = abs(A[i][j].norm())
                    if best is None or nn < best:
                        best = nn
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            for i in range(t + 1, n):
                while not A[i][t].is_zero():
                    q, _ = divmod_O(A[i][t], A[t][t])
                    addmul_row(i, t, q)
                    if not A[i][t].is_zero():
                        swap_rows(t, i)
            for j in range(t + 1, m):
                while not A[t][j].is_zero():
                    q, _ = divmod_O(A[t][j], A[t][t])
                    addmul_col(j, t, q)
                    if not A[t][j].is_zero():
                        swap_cols(t, j)
            if all(A[i][t].is_zero() for i in range(t + 1, n)) and all(
                A[t][j].is_zero() for j in range(t + 1, m)
            ):
                break
        t += 1
    return U, A, V


def _round_complex_to_O(F: QuadField, z: mpc) -> QuadElem:
    """Nearest element of O to a complex number (numeric)."""
    with workprec(96):
        sq = mpmath.sqrt(mpf(-F.d))
        if F.omega_is_half:
            w_re, w_im = mpf(1) / 2, sq / 2
        else:
            w_re, w_im = mpf(0), sq
        b = z.imag / w_im
        a = z.real - b * w_re
        best = None
        for da in (0, 1, -1):
            for db in (0, 1, -1):
                aa = int(mpmath.floor(a)) + da
                bb = int(mpmath.floor(b)) + db
                d2 = (z.real - aa - bb * w_re) ** 2 + (z.imag - bb * w_im) ** 2
                if best is None or d2 < best[0]:
                    best = (d2, QuadElem(F, aa, bb))
        return best[1]


def _minkowski_reduced_vectors(F: ExtField, lat: OLattice, prec=128) -> list[list[QuadElem]]:
    """Z-basis of the module LLL-reduced in the Minkowski metric."""
    from .intlinalg import lll_reduce_gram

    emb = Embeddings(F, prec)
    vecs = lat.basis_vectors()
    with workprec(prec):
        embv = [emb.vector(v) for v in vecs]
        n = len(vecs)
        scale = mpf(2) ** 48
        # normalize so the Gram is O(2^48)
        mx = max(max(abs(x) for x in row) for row in embv)
        G = []
        for i in range(n):
            row = []
            for j in range(n):
                ip = sum((a * b.conjugate() for a, b in zip(embv[i], embv[j])), mpc(0)).real
                row.append(int(mpmath.nint(ip / (mx * mx) * scale)))
            G.append(row)
    U = lll_reduce_gram(G)
    out = []
    for coeffs in U:
        v = [F.base.zero()] * F.n
        for c, vec in zip(coeffs, vecs):
            if c:
                v = [x + c * y for x, y in zip(v, vec)]
        out.append(v)
    return out


def _adapted_basis_short(F: ExtField, M: OLattice, Mp: OLattice, pid: QuadIdeal):
    """Short adapted basis for N = 2: v1 in M' \\ M (generator of the
    prime-index quotient) and v2 in M with (pi v1, v2) an O-basis of M,
    both picked among LLL-short vectors; returns None when the search
    fails (caller falls back to the Smith basis)."""
    Fk = F.base
    pi = pid.gen
    emb = Embeddings(F, 128)

    def norm2(v):
        with workprec(128):
            return sum(abs(x) ** 2 for x in emb.vector(v))

    red_p = _minkowski_reduced_vectors(F, Mp)
    red_m = _minkowski_reduced_vectors(F, M)
    cands1 = list(red_p)
    for i in range(len(red_p)):
        for j in range(i + 1, len(red_p)):
            cands1.append([x + y for x, y in zip(red_p[i], red_p[j])])
            cands1.append([x - y for x, y in zip(red_p[i], red_p[j])])
    cands1 = [v for v in cands1 if not M.contains(v)]
    if not cands1:
        return None
    cands1.sort(key=norm2)
    cands2 = list(red_m)
    for i in range(len(red_m)):
        for j in range(i + 1, len(red_m)):
            cands2.append([x + y for x, y in zip(red_m[i], red_m[j])])
            cands2.append([x - y for x, y in zip(red_m[i], red_m[j])])
    cands2.sort(key=norm2)
    for v1 in cands1[:6]:
        pv1 = [pi * x for x in v1]
        for v2 in cands2[:12]:
            try:
                span = OLattice.from_o_generators(Fk, F.n, [pv1, v2])
            except Exception:
                continue
            if span == M:
                return [v1, v2]
    return None


def _reduce_adapted_basis(F: ExtField, cols: list[list[QuadElem]], pid: QuadIdeal):
    """Size-reduce the adapted basis in the Minkowski embedding while
    preserving the level structure: v_1 (the quotient generator, which
    only needs to stay outside M) moves freely; the later vectors lie in M
    and may only absorb pid-multiples of v_1.  Keeps the unit matrices
    (and hence the Dedekind-sum coset counts) small."""
    prec = 128
    emb = Embeddings(F, prec)
    Fk = F.base
    pi = pid.gen
    cols = [list(c) for c in cols]

    def herm(a, b):
        va = emb.vector(a)
        vb = emb.vector(b)
        return sum((x * y.conjugate() for x, y in zip(va, vb)), mpc(0))

    def norm2(a):
        return herm(a, a).real

    n = len(cols)
    with workprec(prec):
        for _ in range(64):
            changed = False
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    denom = norm2(cols[j])
                    if denom == 0:
                        continue
                    t = herm(cols[i], cols[j]) / denom
                    if i >= 1 and j == 0:
                        # constrained: only pid-multiples of v_1
                        s = _round_complex_to_O(Fk, mpc(t) / embed(pi, prec).to_mpc())
                        move = s * pi
                    else:
                        move = _round_complex_to_O(Fk, mpc(t))
                    if move.is_zero():
                        continue
                    cand = [x - move * y for x, y in zip(cols[i], cols[j])]
                    if norm2(cand) < norm2(cols[i]) * (1 - mpf(2) ** -20):
                        cols[i] = cand
                        changed = True
            if not changed:
                break
    return cols


def make_alpha(
    F: ExtField,
    f: LIdeal,
    a: LIdeal,
    P: LIdeal,
    I: QuadIdeal | None = None,
) -> AlphaMap:
    """Construct the isomorphism of the commuting square: an O-basis of
    M = f a^-1 adapted to the index-Np overmodule M' = f (a P)^-1 via
    Smith reduction over O, mapped onto the standard lattices."""
    Fk = F.base
    if I is None:
        I = QuadIdeal(Fk.one())
    pid = P.relative_norm()
    np_ = pid.norm()
    if np_ < 2 or not _is_prime_int(int(np_)):
        raise ValidationError(f"n(P) must have prime norm, got {np_}")
    M = f * a.inverse()
    Mp = M * P.inverse()
    # T: columns of an O-basis of M in an O-basis of M'
    Bm = _cols_to_matrix(o_basis(M.lattice))
    Bmp = _cols_to_matrix(o_basis(Mp.lattice))
    T = mat_mul_quad(mat_inv_quad(Bmp), Bm)
    for row in T:
        for x in row:
            if not x.is_integral():
                raise ValidationError("M is not contained in M'")
    U, D, V = _o_snf(T)
    divisors = [D[i][i] for i in range(F.n)]
    nonunit = [i for i, d in enumerate(divisors) if not d.is_unit()]
    if len(nonunit) != 1 or not (QuadIdeal(divisors[nonunit[0]]) == pid):
        raise ValidationError(
            "elementary divisors of M in M' are not (p, 1, ..., 1): bad input ideals"
        )
    # adapted M'-basis: columns of Bmp * U^{-1}; reorder so the p-divisor
    # lands on coordinate 1, then shrink (small bases keep the unit
    # matrices, and with them the Dedekind coset counts, small)
    Uinv = mat_inv_quad(U)
    Badapt = mat_mul_quad(Bmp, Uinv)
    order = [nonunit[0]] + [i for i in range(F.n) if i != nonunit[0]]
    cols = [[Badapt[r][c] for r in range(F.n)] for c in order]
    if F.n == 2:
        short = _adapted_basis_short(F, M.lattice, Mp.lattice, pid)
        if short is not None:
            cols = short
    cols = _reduce_adapted_basis(F, cols, pid)
    W = _cols_to_matrix(cols)
    # alpha maps v'_1 -> pi^-1 gI^-1 e_1, v'_j -> e_j
    gi = (pid * I).gen
    Bstd = [[Fk.zero() for _ in range(F.n)] for _ in range(F.n)]
    Bstd[0][0] = gi.inverse()
    for j in range(1, F.n):
        Bstd[j][j] = Fk.one()
    Amat = mat_mul_quad(Bstd, mat_inv_quad(W))
    Ainv = mat_inv_quad(Amat)
    # exact postconditions
    if not (apply_matrix(Amat, M.lattice) == lambda_of_ideal(I, F.n)):
        raise ValidationError("alpha(f a^-1) != Lambda(I)")
    if not (apply_matrix(Amat, Mp.lattice) == lambda_of_ideal(pid * I, F.n)):
        raise ValidationError("alpha(f (aP)^-1) != Lambda(pI)")
    prec = 256
    emb = Embeddings(F, prec)
    S = _sigma_alpha_matrix(emb, Ainv, prec)
    with workprec(prec + 16):
        det = _det_mpc(S)
    detsig = BigComplex(det.real, det.imag, prec, abs(det) * mpf(2) ** (-prec + 16))
    return AlphaMap(
        F=F, mat=Amat, mat_inv=Ainv, I=I, pid=pid, detsig=detsig,
        sigma_mat=S, emb=emb,
    )


def _sigma_alpha_matrix(emb: Embeddings, Ainv, prec_bits: int):
    """S[i][j] = sigma_i(alpha^-1(e_j))."""
    F = emb.F
    N = F.n
    cols = []
    for j in range(N):
        ej = [F.base.one() if t == j else F.base.zero() for t in range(N)]
        aj = mat_vec_quad(Ainv, ej)
        cols.append(emb.vector(aj))
    return [[cols[j][i] for j in range(N)] for i in range(N)]


def _det_mpc(M):
    n = len(M)
    A = [row[:] for row in M]
    det = mpc(1)
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(A[r][c]))
        if abs(A[piv][c]) == 0:
            return mpc(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


def _is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, int(math.isqrt(n)) + 1):
        if n % p == 0:
            return False
    return True


@dataclass
class UnitReport:
    ok: bool
    messages: list[str]
    torsion_flags: list[bool]


def validate_units(units: list[list[QuadElem]], f: LIdeal, F: ExtField, prec_bits=128) -> UnitReport:
    """Exact checks: each u in O_L^x, u = 1 mod f, n(u) = 1; numeric check:
    the log-embedding matrix has full rank (multiplicative independence)."""
    msgs = []
    ok = True
    torsion = []
    ring = F.ring_lattice()
    emb = Embeddings(F, prec_bits)
    for idx, u in enumerate(units):
        if not ring.contains(u):
            ok = False
            msgs.append(f"unit {idx}: not integral")
        nu = rel_norm(F, u)
        if abs(nu.norm()) != 1:
            ok = False
            msgs.append(f"unit {idx}: not a unit of O_L (|N(n(u))| != 1)")
        if not (nu == F.base.one()):
            ok = False
            msgs.append(f"unit {idx}: n(u) = {nu} != 1")
        one = F.one_vec()
        diff = [x - y for x, y in zip(u, one)]
        if not f.contains(diff):
            ok = False
            msgs.append(f"unit {idx}: u is not congruent to 1 mod f")
        mags = [abs(v) for v in emb.vector(u)]
        is_tors = all(abs(m - 1) < mpf(2) ** (-prec_bits // 4) for m in mags)
        torsion.append(is_tors)
        if is_tors:
            ok = False
            msgs.append(f"unit {idx}: all conjugates have modulus 1 (torsion unit)")
    if len(units) != F.n - 1:
        ok = False
        msgs.append(f"need exactly {F.n - 1} units, got {len(units)}")
    else:
        with workprec(prec_bits):
            rows = []
            for u in units:
                rows.append([mpmath.log(abs(emb.apply(i, u))) for i in range(F.n - 1)])
            if F.n == 2:
                rank_ok = abs(rows[0][0]) > mpf(2) ** (-prec_bits // 4)
            else:
                d = _det_mpc([[mpc(x) for x in row] for row in rows])
                rank_ok = abs(d) > mpf(2) ** (-prec_bits // 4)
            if not rank_ok:
                ok = False
                msgs.append("log-embedding matrix is rank-deficient (units dependent)")
    return UnitReport(ok=ok, messages=msgs, torsion_flags=torsion)


def principal_generator(b: LIdeal) -> list[QuadElem]:
    """A generator of a principal O_L-ideal, found among Minkowski-short
    vectors (class number one heuristics: a generator has minimal absolute
    norm, equal to the ideal norm)."""
    F = b.F
    target = b.absolute_norm()
    red = _minkowski_reduced_vectors(F, b.lattice)
    cands = list(red)
    for i in range(len(red)):
        for j in range(i + 1, len(red)):
            cands.append([x + y for x, y in zip(red[i], red[j])])
            cands.append([x - y for x, y in zip(red[i], red[j])])
    for v in cands:
        nv = rel_norm(F, v)
        if abs(nv.norm()) == target and LIdeal.principal(F, v).lattice == b.lattice:
            return v
    raise ValidationError("no principal generator found (non-principal ideal?)")


def unit_matrix(u: list[QuadElem], alpha: AlphaMap, F: ExtField) -> GroupElement:
    """U = alpha (mult by u) alpha^-1, with exact postconditions: det 1,
    membership in Gamma_0(p, Lambda(I)), and U v0 = v0 mod Lambda(I)."""
    Mu = F.mul_matrix(u)
    Umat = mat_mul_quad(mat_mul_quad(alpha.mat, Mu), alpha.mat_inv)
    try:
        U = GroupElement(Umat)
    except ValidationError as e:
        raise ValidationError(f"unit matrix has det != 1: {e}") from None
    if not in_gamma0(U, alpha.pid, alpha.I):
        raise ValidationError("unit matrix is not in Gamma_0(p, Lambda(I))")
    v0 = alpha.v0()
    Uv0 = mat_vec_quad(Umat, v0)
    diff = [x - y for x, y in zip(Uv0, v0)]
    if not lambda_of_ideal(alpha.I, F.n).contains(diff):
        raise ValidationError("U v0 is not congruent to v0 mod Lambda(I)")
    return U
