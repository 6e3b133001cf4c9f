import random
from fractions import Fraction

import pytest

from ekzeta.errors import (
    ImproperSubspaceError,
    NotASublatticeError,
    SingularMatrixError,
    ValidationError,
)
from ekzeta.field import QuadField, QuadIdeal
from ekzeta.intlinalg import (
    det_int,
    hnf_columns,
    kernel_int,
    lll_reduce_gram,
    mat_identity,
    mat_mul,
    mat_inverse_unimodular,
    snf_with_transform,
    solve_int,
)
from ekzeta.lattice import (
    GroupElement,
    OLattice,
    apply_matrix,
    coordinate_kernel_ideal,
    coset_reps,
    in_gamma0,
    lambda_of_ideal,
    lattice_index,
    lattice_intersection,
    lattice_sum,
    lies_in_translate,
    standard_basis,
)


class TestIntLinalg:
    def test_hnf_canonical(self):
        rng = random.Random(2)
        for _ in range(30):
            n = rng.randint(1, 4)
            ncols = n + rng.randint(0, 2)
            M = [[rng.randint(-9, 9) for _ in range(ncols)] for _ in range(n)]
            H = hnf_columns(M)
            # unimodular column operations do not change the HNF
            cols = len(M[0])
            U = mat_identity(cols)
            i, j = rng.randrange(cols), rng.randrange(cols)
            if i != j:
                for r in range(cols):
                    U[r][j] += (3 if r == i else 0)
            H2 = hnf_columns(mat_mul(M, U))
            assert H == H2

    def test_snf_transforms(self):
        rng = random.Random(4)
        for _ in range(30):
            n = rng.randint(1, 4)
            m = rng.randint(1, 4)
            M = [[rng.randint(-9, 9) for _ in range(m)] for _ in range(n)]
            U, D, V = snf_with_transform(M)
            assert mat_mul(mat_mul(U, M), V) == D
            assert det_int(U) in (1, -1)
            assert det_int(V) in (1, -1)
            for i in range(n):
                for j in range(m):
                    if i != j:
                        assert D[i][j] == 0

    def test_solve_int(self):
        B = [[2, 0], [0, 3]]
        assert solve_int(B, [4, 9]) == [2, 3]
        assert solve_int(B, [1, 0]) is None

    def test_kernel(self):
        B = [[1, 2, 3]]
        ker = kernel_int(B)
        assert len(ker) == 2
        for v in ker:
            assert sum(b * x for b, x in zip(B[0], v)) == 0

    def test_inverse_unimodular(self):
        U = [[1, 2], [1, 3]]
        Ui = mat_inverse_unimodular(U)
        assert mat_mul(U, Ui) == mat_identity(2)

    def test_lll_shortens(self):
        # a skewed 2d lattice: LLL must find the short vector (1, 0)
        G = [[1, 10], [10, 101]]  # basis (1,0), (10,1): Gram
        U = lll_reduce_gram(G)
        norms = []
        for row in U:
            q = sum(
                row[a] * G[a][b] * row[b] for a in range(2) for b in range(2)
            )
            norms.append(q)
        assert min(norms) == 1


@pytest.fixture
def O2(K):
    return lambda_of_ideal(QuadIdeal(K.one()), 2)


class TestStandardLattices:
    def test_ring_lattice_identity(self, K, O2):
        assert O2.denom == 1
        assert O2.zbasis == tuple(tuple(r) for r in mat_identity(4))

    def test_lambda_overlattice_index(self, K, O2):
        I = QuadIdeal(K.elem(1, 1))
        L = lambda_of_ideal(I, 2)
        assert lattice_index(O2, L) == 2  # [L : O^2] = N(I)

    def test_lambda_index_general(self, K):
        for gen in (K.elem(2, 1), K.elem(3), K.elem(0, 2)):
            I = QuadIdeal(gen)
            L = lambda_of_ideal(I, 3)
            O3 = lambda_of_ideal(QuadIdeal(K.one()), 3)
            assert lattice_index(O3, L) == int(I.norm())

    def test_canonical_form_generator_independent(self, K):
        # same lattice from different generating sets
        e = standard_basis(K, 2)
        g1 = [e[0], e[1]]
        g2 = [[a + b for a, b in zip(e[0], e[1])], e[1], e[0]]
        L1 = OLattice.from_o_generators(K, 2, g1)
        L2 = OLattice.from_o_generators(K, 2, g2)
        assert L1 == L2

    def test_o_stability_enforced(self, K):
        e = standard_basis(K, 2)
        w = K.omega()
        # Z-span of e1, w e1, e2, 2 w e2 is not O-stable
        vecs = [e[0], [w * x for x in e[0]], e[1], [K.elem(2) * w * x for x in e[1]]]
        with pytest.raises(ValidationError):
            OLattice.from_z_generators(K, 2, vecs)


class TestCosets:
    def test_sixteen_reps(self, K, O2):
        two = [[K.elem(2), K.zero()], [K.zero(), K.elem(2)]]
        L = apply_matrix(two, O2)
        reps = coset_reps(L, O2)
        assert len(reps) == 16

    def test_trivial(self, K, O2):
        reps = coset_reps(O2, O2)
        assert len(reps) == 1
        assert all(x.is_zero() for x in reps[0])

    def test_count_equals_norm_of_det(self, K, O2):
        rng = random.Random(7)
        for _ in range(5):
            A = [
                [K.elem(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(2)]
                for _ in range(2)
            ]
            from ekzeta.lattice import det_quad

            d = det_quad(A)
            if d.is_zero() or abs(d.norm()) > 20:
                continue
            L = apply_matrix(A, O2)
            reps = coset_reps(L, O2)
            assert len(reps) == abs(d.norm())

    def test_reps_pairwise_incongruent(self, K, O2):
        A = [[K.elem(1, 1), K.zero()], [K.one(), K.one()]]
        L = apply_matrix(A, O2)
        reps = coset_reps(L, O2)
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                diff = [a - b for a, b in zip(reps[i], reps[j])]
                assert not L.contains(diff)

    def test_not_a_sublattice(self, K, O2):
        I = QuadIdeal(K.elem(1, 1))
        L = lambda_of_ideal(I, 2)  # strictly bigger than O2
        with pytest.raises(NotASublatticeError):
            coset_reps(L, O2)

    def test_index_multiplicative(self, K, O2):
        rng = random.Random(13)
        from ekzeta.lattice import det_quad, mat_mul_quad

        for _ in range(5):
            A = [[K.elem(rng.randint(-1, 1), rng.randint(-1, 1)) for _ in range(2)] for _ in range(2)]
            B = [[K.elem(rng.randint(-1, 1), rng.randint(-1, 1)) for _ in range(2)] for _ in range(2)]
            if det_quad(A).is_zero() or det_quad(B).is_zero():
                continue
            AL = apply_matrix(A, O2)
            ABL = apply_matrix(mat_mul_quad(A, B), O2)
            assert lattice_index(ABL, O2) == lattice_index(AL, O2) * lattice_index(
                ABL, AL
            )


class TestApplyMatrix:
    def test_identity(self, K, O2):
        e = standard_basis(K, 2)
        assert apply_matrix(e, O2) == O2

    def test_singular_rejected(self, K, O2):
        A = [[K.one(), K.one()], [K.one(), K.one()]]
        with pytest.raises(SingularMatrixError):
            apply_matrix(A, O2)

    def test_functorial(self, K, O2):
        from ekzeta.lattice import mat_mul_quad

        A = [[K.elem(1, 1), K.zero()], [K.zero(), K.one()]]
        B = [[K.one(), K.elem(0, 1)], [K.one(), K.elem(2)]]
        L1 = apply_matrix(A, apply_matrix(B, O2))
        L2 = apply_matrix(mat_mul_quad(A, B), O2)
        assert L1 == L2

    def test_diag_index_two(self, K, O2):
        A = [[K.elem(1, 1), K.zero()], [K.zero(), K.one()]]
        assert lattice_index(apply_matrix(A, O2), O2) == 2


class TestGamma0:
    def test_identity(self, K):
        e = GroupElement(standard_basis(K, 2))
        assert in_gamma0(e, QuadIdeal(K.elem(1, 1)), QuadIdeal(K.one()))

    def test_unipotents(self, K):
        p = QuadIdeal(K.elem(1, 1))
        O = QuadIdeal(K.one())
        upper = GroupElement([[K.one(), K.one()], [K.zero(), K.one()]])
        lower = GroupElement([[K.one(), K.zero()], [K.one(), K.one()]])
        lower_p = GroupElement([[K.one(), K.zero()], [K.elem(1, 1), K.one()]])
        assert in_gamma0(upper, p, O)
        assert not in_gamma0(lower, p, O)
        assert in_gamma0(lower_p, p, O)
        assert in_gamma0(lower, O, O)

    def test_group_inverse_agreement(self, K):
        p = QuadIdeal(K.elem(1, 1))
        O = QuadIdeal(K.one())
        rng = random.Random(21)
        from tests.conftest import random_gamma

        for _ in range(10):
            g = random_gamma(K, p, 2, rng)
            assert in_gamma0(g, p, O) == in_gamma0(g.inverse(), p, O)

    def test_det_must_be_one(self, K):
        with pytest.raises(ValidationError):
            GroupElement([[K.elem(2), K.zero()], [K.zero(), K.one()]])


class TestTranslates:
    def test_v_in_subspace(self, K, O2):
        e = standard_basis(K, 2)
        assert lies_in_translate(e[0], [e[0]], O2)

    def test_third_coordinate(self, K, O2):
        e = standard_basis(K, 2)
        v = [K.zero(), K.elem(Fraction(1, 3))]
        assert not lies_in_translate(v, [e[0]], O2)

    def test_lattice_point_any_subspace(self, K, O2):
        e = standard_basis(K, 2)
        v = [K.elem(2, 1), K.elem(-1, 3)]
        assert lies_in_translate(v, [e[1]], O2)

    def test_improper(self, K, O2):
        e = standard_basis(K, 2)
        with pytest.raises(ImproperSubspaceError):
            lies_in_translate(e[0], [e[0], e[1]], O2)

    def test_empty_span_is_membership(self, K, O2):
        v = [K.elem(Fraction(1, 2)), K.zero()]
        assert not lies_in_translate(v, [], O2)
        assert lies_in_translate([K.one(), K.elem(3, 4)], [], O2)


class TestMisc:
    def test_intersection_and_sum(self, K, O2):
        I = QuadIdeal(K.elem(1, 1))
        L = lambda_of_ideal(I, 2)
        assert lattice_intersection(L, O2) == O2
        assert lattice_sum(L, O2) == L

    def test_coordinate_kernel(self, K):
        I = QuadIdeal(K.elem(1, 1))
        L = lambda_of_ideal(I, 2)
        c0 = coordinate_kernel_ideal(L, 0)
        c1 = coordinate_kernel_ideal(L, 1)
        assert c0 == I.inverse()
        assert c1 == QuadIdeal(K.one())
