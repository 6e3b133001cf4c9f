"""Rank-N O-lattices in k^N at the Z-level (rank 2N), in canonical Hermite
normal form: standard lattices I^{-1} + O^{N-1}, coset enumeration via
diagonal boxes, congruence-subgroup membership, and the exact translate
checks used by the general-position certificates.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import (
    ImproperSubspaceError,
    NotASublatticeError,
    SingularMatrixError,
    ValidationError,
)
from .field import QuadElem, QuadField, QuadIdeal, gcd_extended
from .intlinalg import (
    det_int,
    hnf_columns,
    kernel_int,
    mat_identity,
    mat_inverse_unimodular,
    mat_transpose,
    mat_vec,
    snf_with_transform,
    solve_int,
    solve_rational,
)

# Q-basis of k^n: (e_1, w e_1, e_2, w e_2, ..., e_n, w e_n)


def vector_to_coords(v: list[QuadElem]) -> list[Fraction]:
    out = []
    for x in v:
        out.append(Fraction(x.a))
        out.append(Fraction(x.b))
    return out


def coords_to_vector(F: QuadField, c: list[Fraction]) -> list[QuadElem]:
    return [QuadElem(F, c[2 * i], c[2 * i + 1]) for i in range(len(c) // 2)]


def omega_action_coords(F: QuadField, c: list[Fraction]) -> list[Fraction]:
    """Coordinates of omega * v given coordinates of v."""
    out = []
    for i in range(0, len(c), 2):
        a, b = c[i], c[i + 1]
        # w(a + b w) = b w^2 + a w = b c0 + (a + b c1) w
        out.append(b * F.om_c0)
        out.append(a + b * F.om_c1)
    return out


class OLattice:
    """Full O-lattice in k^n; zbasis columns are a Z-basis of denom * L in
    the Q-basis above, stored in canonical column HNF."""

    __slots__ = ("field", "n", "zbasis", "denom")

    def __init__(self, field: QuadField, n: int, zbasis, denom: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "zbasis", tuple(tuple(r) for r in zbasis))
        object.__setattr__(self, "denom", denom)

    def __setattr__(self, *a):
        raise AttributeError("OLattice is immutable")

    @staticmethod
    def from_z_generators(
        field: QuadField, n: int, vectors: list[list[QuadElem]], check_o_stable=True
    ) -> "OLattice":
        """Lattice = Z-span of the given k^n vectors (must be full rank 2n
        and O-stable)."""
        coords = [vector_to_coords(v) for v in vectors]
        den = 1
        for c in coords:
            for x in c:
                den = math.lcm(den, x.denominator)
        cols = [[int(x * den) for x in c] for c in coords]
        M = mat_transpose(cols)
        H = hnf_columns(M)
        if len(H[0]) != 2 * n:
            raise ValidationError("generators do not span a full lattice")
        g = den
        for row in H:
            for x in row:
                g = math.gcd(g, x)
        H = [[x // g for x in row] for row in H]
        den //= g
        lat = OLattice(field, n, H, den)
        if check_o_stable and not lat._is_o_stable():
            raise ValidationError("Z-span is not O-stable")
        return lat

    @staticmethod
    def from_o_generators(field: QuadField, n: int, vectors) -> "OLattice":
        """Lattice = O-span of the given vectors."""
        vs = list(vectors)
        extra = []
        w = field.omega()
        for v in vs:
            extra.append([w * x for x in v])
        return OLattice.from_z_generators(field, n, vs + extra, check_o_stable=False)

    def _is_o_stable(self) -> bool:
        for col in mat_transpose([list(r) for r in self.zbasis]):
            c = omega_action_coords(self.field, [Fraction(x) for x in col])
            if not self._contains_scaled(c):
                return False
        return True

    def _contains_scaled(self, c: list[Fraction]) -> bool:
        """Membership of (1/denom) * c in the lattice."""
        den = 1
        for x in c:
            den = math.lcm(den, x.denominator)
        v = [int(x * den) for x in c]
        B = [[x * den for x in row] for row in self.zbasis]
        return solve_int(B, v) is not None

    def contains(self, v: list[QuadElem]) -> bool:
        c = vector_to_coords(v)
        return self._contains_scaled([x * self.denom for x in c])

    def basis_vectors(self) -> list[list[QuadElem]]:
        cols = mat_transpose([list(r) for r in self.zbasis])
        return [
            coords_to_vector(self.field, [Fraction(x, self.denom) for x in col])
            for col in cols
        ]

    def det_key(self) -> Fraction:
        return Fraction(abs(det_int([list(r) for r in self.zbasis])), self.denom ** (2 * self.n))

    def __eq__(self, other):
        if not isinstance(other, OLattice):
            return NotImplemented
        return (
            self.field.d == other.field.d
            and self.n == other.n
            and self.denom == other.denom
            and self.zbasis == other.zbasis
        )

    def __hash__(self):
        return hash((self.field.d, self.n, self.denom, self.zbasis))

    def __repr__(self):
        return f"OLattice(d={self.field.d}, n={self.n}, denom={self.denom})"

    def key(self) -> str:
        return f"d{self.field.d}:n{self.n}:den{self.denom}:" + ",".join(
            str(x) for row in self.zbasis for x in row
        )


class GroupElement:
    """Element of SL_N(k) with exact entries."""

    __slots__ = ("mat",)

    def __init__(self, mat: list[list[QuadElem]]):
        n = len(mat)
        if any(len(r) != n for r in mat):
            raise ValidationError("matrix must be square")
        d = det_quad(mat)
        if not (d.a == 1 and d.b == 0):
            raise ValidationError(f"det must be 1, got {d}")
        object.__setattr__(self, "mat", tuple(tuple(r) for r in mat))

    def __setattr__(self, *a):
        raise AttributeError("GroupElement is immutable")

    @property
    def n(self):
        return len(self.mat)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(mat_mul_quad(self.mat, other.mat))

    def inverse(self) -> "GroupElement":
        return GroupElement(mat_inv_quad(self.mat))

    def column(self, j: int) -> list[QuadElem]:
        return [self.mat[i][j] for i in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.mat == other.mat

    def __hash__(self):
        return hash(self.mat)


def mat_mul_quad(A, B):
    n = len(A)
    m = len(B[0])
    k = len(B)
    return [
        [sum((A[i][t] * B[t][j] for t in range(k)), A[0][0].field.zero()) for j in range(m)]
        for i in range(n)
    ]


def mat_vec_quad(A, v):
    n = len(A)
    return [sum((A[i][t] * v[t] for t in range(len(v))), v[0].field.zero()) for i in range(n)]


def det_quad(M) -> QuadElem:
    """Determinant over k by exact Gaussian elimination."""
    n = len(M)
    A = [list(r) for r in M]
    F = A[0][0].field
    det = F.one()
    for c in range(n):
        piv = None
        for r in range(c, n):
            if not A[r][c].is_zero():
                piv = r
                break
        if piv is None:
            return F.zero()
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c]
        inv = A[c][c].inverse()
        for r in range(c + 1, n):
            if not A[r][c].is_zero():
                f = A[r][c] * inv
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


def mat_inv_quad(M):
    """Inverse over k by exact Gauss-Jordan."""
    n = len(M)
    F = M[0][0].field
    A = [list(r) + [F.one() if i == j else F.zero() for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        piv = None
        for r in range(c, n):
            if not A[r][c].is_zero():
                piv = r
                break
        if piv is None:
            raise SingularMatrixError("matrix not invertible")
        A[c], A[piv] = A[piv], A[c]
        inv = A[c][c].inverse()
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and not A[r][c].is_zero():
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def standard_basis(F: QuadField, n: int) -> list[list[QuadElem]]:
    return [[F.one() if i == j else F.zero() for i in range(n)] for j in range(n)]


def lambda_of_ideal(I: QuadIdeal, N: int) -> OLattice:
    """The standard lattice I^{-1} e_1 + O e_2 + ... + O e_N."""
    F = I.field
    gens = standard_basis(F, N)
    gens[0] = [x * I.gen.inverse() for x in gens[0]]
    return OLattice.from_o_generators(F, N, gens)


def apply_matrix(A: list[list[QuadElem]], L: OLattice) -> OLattice:
    """The lattice A L in canonical form."""
    if det_quad(A).is_zero():
        raise SingularMatrixError("singular matrix applied to lattice")
    vecs = [mat_vec_quad(A, v) for v in L.basis_vectors()]
    return OLattice.from_z_generators(L.field, L.n, vecs, check_o_stable=False)


def lattice_index(sub: OLattice, sup: OLattice) -> int:
    """[sup : sub] for sub contained in sup."""
    T = _expansion_matrix(sub, sup)
    d = abs(det_int(T))
    if d == 0:
        raise NotASublatticeError("degenerate expansion")
    return d


def _expansion_matrix(sub: OLattice, sup: OLattice):
    """Integer matrix T with sub = sup * T (columns of sub in sup basis);
    raises NotASublatticeError when sub is not contained in sup."""
    if sub.field.d != sup.field.d or sub.n != sup.n:
        raise ValidationError("lattice mismatch")
    m = 2 * sub.n
    Bsup = [[x * sub.denom for x in row] for row in sup.zbasis]
    Bsub = [[x * sup.denom for x in row] for row in sub.zbasis]
    cols = []
    for j in range(m):
        v = [Bsub[i][j] for i in range(m)]
        x = solve_int(Bsup, v)
        if x is None:
            raise NotASublatticeError("not a sublattice")
        cols.append(x)
    return mat_transpose(cols)


def coset_reps(sub: OLattice, sup: OLattice) -> list[list[QuadElem]]:
    """Exact representatives of sup/sub, count = index, via the diagonal
    box of the Smith decomposition.  Cost is proportional to the index."""
    T = _expansion_matrix(sub, sup)
    U, D, V = snf_with_transform(T)
    Uinv = mat_inverse_unimodular(U)
    m = 2 * sup.n
    diag = [D[i][i] for i in range(m)]
    if any(d == 0 for d in diag):
        raise NotASublatticeError("degenerate quotient")
    # adapted sup basis: columns of sup.zbasis * Uinv
    B = [list(r) for r in sup.zbasis]
    Badapt = [[sum(B[i][t] * Uinv[t][j] for t in range(m)) for j in range(m)] for i in range(m)]
    reps = []
    idx = [0] * m
    total = 1
    for d in diag:
        total *= abs(d)
    for _ in range(total):
        c = mat_vec(Badapt, idx)
        reps.append(coords_to_vector(sup.field, [Fraction(x, sup.denom) for x in c]))
        for i in range(m):
            idx[i] += 1
            if idx[i] < abs(diag[i]):
                break
            idx[i] = 0
    return reps


def in_gamma0(g: GroupElement, p: QuadIdeal, I: QuadIdeal) -> bool:
    """Membership in Gamma_0(p, Lambda(I)) = Gamma(Lambda(pI)) cap
    Gamma(Lambda(I)): g stabilizes both standard lattices."""
    N = g.n
    L1 = lambda_of_ideal(I, N)
    L2 = lambda_of_ideal(p * I, N)
    return stabilizes(g, L1) and stabilizes(g, L2)


def stabilizes(g: GroupElement, L: OLattice) -> bool:
    """g L = L (det g = 1, so inclusion suffices)."""
    for v in L.basis_vectors():
        if not L.contains(mat_vec_quad([list(r) for r in g.mat], v)):
            return False
    return True


def lies_in_translate(
    v: list[QuadElem], spanning: list[list[QuadElem]], L: OLattice
) -> bool:
    """True iff v lies in W + L where W is the k-span of the spanning
    vectors (a proper subspace); decided exactly in rational arithmetic."""
    F = L.field
    n = L.n
    m = 2 * n
    # Q-basis of W: s and w*s for each spanning vector
    wcols = []
    for s in spanning:
        c = vector_to_coords(s)
        wcols.append(c)
        wcols.append(omega_action_coords(F, c))
    # rank check / properness
    rank = _rational_rank(wcols, m)
    if rank >= m:
        raise ImproperSubspaceError("spanning set spans all of k^N")
    # v in W + L  <=>  exists rational x, integer y: v = W x + B y / denom
    # Scale: denom * v = W' x' + B y with W' = denom*W (rational x absorbs).
    # Solve by eliminating W-columns over Q first: project onto a complement.
    vc = vector_to_coords(v)
    # Build matrix [W | B/denom] and solve with x rational, y integer:
    # equivalently: does v + L meet W? Reduce v modulo L generators over Z
    # cannot be done directly; instead compute the quotient map.
    proj_rows = _complement_projection(wcols, m)
    # image of lattice generators and of v under the projection
    Bcols = mat_transpose([list(r) for r in L.zbasis])
    img_cols = []
    den = L.denom
    for col in Bcols:
        img_cols.append([sum(Fraction(r[t]) * col[t] for t in range(m)) / den for r in proj_rows])
    img_v = [sum(Fraction(r[t]) * vc[t] for t in range(m)) for r in proj_rows]
    # membership of img_v in the Z-span of img_cols (rational vectors)
    dd = 1
    for col in img_cols:
        for x in col:
            dd = math.lcm(dd, x.denominator)
    for x in img_v:
        dd = math.lcm(dd, x.denominator)
    Bint = [[int(img_cols[j][i] * dd) for j in range(len(img_cols))] for i in range(len(proj_rows))]
    vint = [int(x * dd) for x in img_v]
    return solve_int(Bint, vint) is not None


def _rational_rank(cols: list[list[Fraction]], m: int) -> int:
    A = [[Fraction(cols[j][i]) for j in range(len(cols))] for i in range(m)]
    rank = 0
    rowpos = 0
    for c in range(len(cols)):
        piv = None
        for r in range(rowpos, m):
            if A[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        A[rowpos], A[piv] = A[piv], A[rowpos]
        pr = A[rowpos][c]
        A[rowpos] = [x / pr for x in A[rowpos]]
        for r in range(m):
            if r != rowpos and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rowpos])]
        rank += 1
        rowpos += 1
    return rank


def _complement_projection(wcols: list[list[Fraction]], m: int) -> list[list[Fraction]]:
    """Rows of a surjection Q^m -> Q^m/W expressed in coordinates: a
    maximal set of coordinate functionals completed against W by Gaussian
    elimination (rows r with r . w = 0 for all w in W)."""
    # solve W^T r = 0: kernel of the transpose, rational
    if not wcols:
        return [[Fraction(1 if i == j else 0) for j in range(m)] for i in range(m)]
    A = [[Fraction(c[i]) for i in range(m)] for c in wcols]  # rows = w^T
    # rational kernel via row reduction
    n_rows = len(A)
    M = [row[:] for row in A]
    pivots = []
    r = 0
    for c in range(m):
        piv = None
        for i in range(r, n_rows):
            if M[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pr = M[r][c]
        M[r] = [x / pr for x in M[r]]
        for i in range(n_rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(m) if c not in pivots]
    rows = []
    for fc in free:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -M[i][fc]
        rows.append(vec)
    return rows


def lattice_intersection(L1: OLattice, L2: OLattice) -> OLattice:
    """L1 cap L2 via the integer kernel of [B1 | -B2]."""
    if L1.field.d != L2.field.d or L1.n != L2.n:
        raise ValidationError("lattice mismatch")
    m = 2 * L1.n
    B1 = [[x * L2.denom for x in row] for row in L1.zbasis]
    B2 = [[x * L1.denom for x in row] for row in L2.zbasis]
    stacked = [[B1[i][j] for j in range(m)] + [-B2[i][j] for j in range(m)] for i in range(m)]
    ker = kernel_int(stacked)
    gens = []
    den = L1.denom * L2.denom
    for kv in ker:
        col = mat_vec([list(r) for r in B1], kv[:m])
        gens.append(coords_to_vector(L1.field, [Fraction(x, den) for x in col]))
    if len(gens) < m:
        raise ValidationError("intersection not full rank")
    return OLattice.from_z_generators(L1.field, L1.n, gens, check_o_stable=False)


def lattice_sum(L1: OLattice, L2: OLattice) -> OLattice:
    """L1 + L2 (the lattice generated by both)."""
    if L1.field.d != L2.field.d or L1.n != L2.n:
        raise ValidationError("lattice mismatch")
    return OLattice.from_z_generators(
        L1.field, L1.n, L1.basis_vectors() + L2.basis_vectors(), check_o_stable=False
    )


def coordinate_kernel_ideal(L: OLattice, k: int) -> QuadIdeal:
    """The fractional ideal {x in k : x e_k in L} (nonzero for full L)."""
    m = 2 * L.n
    rows = [i for i in range(m) if i not in (2 * k, 2 * k + 1)]
    B = [list(r) for r in L.zbasis]
    # lattice vectors supported on coordinate k: kernel of the other rows
    Bres = [B[i] for i in rows] if rows else [[0] * m]
    ker = kernel_int(Bres)
    gens = []
    for kv in ker:
        col = mat_vec(B, kv)
        x = QuadElem(L.field, Fraction(col[2 * k], L.denom), Fraction(col[2 * k + 1], L.denom))
        if not x.is_zero():
            gens.append(x)
    if not gens:
        raise ValidationError("coordinate kernel trivial (lattice not full?)")
    return _ideal_from_elements(gens)


def coordinate_image_ideal(L: OLattice, k: int) -> QuadIdeal:
    """The fractional ideal {lambda_k : lambda in L} (k-th coordinate image)."""
    gens = []
    for v in L.basis_vectors():
        if not v[k].is_zero():
            gens.append(v[k])
    if not gens:
        raise ValidationError("coordinate image trivial")
    return _ideal_from_elements(gens)


def _ideal_from_elements(xs: list[QuadElem]) -> QuadIdeal:
    den = 1
    for x in xs:
        den = math.lcm(den, x.denominator())
    g = None
    for x in xs:
        xi = x * den
        if g is None:
            g = xi
        else:
            g, _, _ = gcd_extended(g, xi)
    return QuadIdeal(g * Fraction(1, den))
