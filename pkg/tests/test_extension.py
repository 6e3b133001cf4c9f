import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from ekzeta.errors import ValidationError
from ekzeta.extension import (
    ExtField,
    LIdeal,
    embeddings,
    make_alpha,
    o_basis,
    principal_generator,
    rel_norm,
    rel_trace,
    transport_ideal,
    unit_matrix,
    validate_units,
)
from ekzeta.field import QuadField, QuadIdeal
from ekzeta.lattice import (
    OLattice,
    apply_matrix,
    lambda_of_ideal,
    lattice_index,
    mat_vec_quad,
)
from ekzeta.numerics import workprec
from ekzeta.zeta import make_prime_ideal, select_prime_P


class TestExtFieldValidation:
    def test_monic_required(self, K):
        with pytest.raises(ValidationError):
            ExtField(K, [K.one(), K.zero(), K.elem(2)], [[K.one(), K.zero()], [K.zero(), K.one()]], None)

    def test_multtable_mismatch_rejected(self, K):
        bad = [
            [[K.one(), K.zero()], [K.zero(), K.one()]],
            [[K.zero(), K.one()], [K.one(), K.zero()]],  # wrong: theta^2 = i
        ]
        with pytest.raises(ValidationError):
            ExtField(K, [K.elem(0, -1), K.zero(), K.one()],
                     [[K.one(), K.zero()], [K.zero(), K.one()]], bad)

    def test_non_squarefree_rejected(self, K):
        # g = x^2: double root
        ib = [[K.one(), K.zero()], [K.zero(), K.one()]]
        mt = [
            [[K.one(), K.zero()], [K.zero(), K.one()]],
            [[K.zero(), K.one()], [K.zero(), K.zero()]],
        ]
        with pytest.raises(ValidationError):
            ExtField(K, [K.zero(), K.zero(), K.one()], ib, mt)


class TestArithmetic:
    def test_norm_form(self, K, zeta8_field):
        # n(a + b theta) = a^2 - i b^2 for theta^2 = i
        F = zeta8_field
        rng = random.Random(17)
        for _ in range(20):
            a = K.elem(rng.randint(-9, 9), rng.randint(-9, 9))
            b = K.elem(rng.randint(-9, 9), rng.randint(-9, 9))
            n = rel_norm(F, [a, b])
            assert n == a * a - K.omega() * b * b

    def test_norm_one(self, zeta8_field):
        assert rel_norm(zeta8_field, zeta8_field.one_vec()) == zeta8_field.base.one()

    def test_norm_multiplicative(self, K, zeta8_field):
        F = zeta8_field
        rng = random.Random(19)
        for _ in range(20):
            x = [K.elem(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(2)]
            y = [K.elem(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(2)]
            assert rel_norm(F, F.mul(x, y)) == rel_norm(F, x) * rel_norm(F, y)

    def test_embeddings_vieta(self, K, zeta8_field):
        emb = embeddings(zeta8_field, 160)
        with workprec(200):
            s = sum(emb.roots)
            p = emb.roots[0] * emb.roots[1]
            assert abs(s) < mpf(2) ** -140
            # product of roots = g(0) for monic quadratic = -i... x^2 - i: product = -i
            assert abs(p - mpmath.mpc(0, -1)) < mpf(2) ** -140

    def test_embeddings_norm_product(self, K, zeta8_field):
        F = zeta8_field
        emb = embeddings(F, 160)
        rng = random.Random(23)
        from ekzeta.field import embed as kembed

        with workprec(200):
            for _ in range(10):
                x = [K.elem(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(2)]
                lhs = emb.apply(0, x) * emb.apply(1, x)
                rhs = kembed(rel_norm(F, x), 160).to_mpc()
                assert abs(lhs - rhs) < mpf("1e-38")


class TestIdeals:
    def test_inverse(self, K, zeta8_fixture):
        f = zeta8_fixture["f"]
        F = zeta8_fixture["F"]
        prod = f * f.inverse()
        assert prod.lattice == LIdeal.ring(F).lattice

    def test_absolute_norm(self, zeta8_fixture):
        assert zeta8_fixture["f"].absolute_norm() == 8

    def test_relative_norm_of_principal(self, K, zeta8_fixture):
        F = zeta8_fixture["F"]
        x = [K.elem(2, 1), K.elem(1)]
        b = LIdeal.principal(F, x)
        assert b.relative_norm() == QuadIdeal(rel_norm(F, x))

    def test_quotient_reps_count(self, K, zeta8_fixture):
        F = zeta8_fixture["F"]
        f = zeta8_fixture["f"]
        two = LIdeal.principal(F, [K.elem(2), K.zero()])
        sup = LIdeal.ring(F)
        reps = sup.quotient_reps(two)
        assert len(reps) == 16

    def test_ol_stability_rejected(self, K, zeta8_field):
        # O-span of (1,0) and (i,0) only: not O_L-stable (theta*(1,0)=(0,1))
        with pytest.raises(ValidationError):
            LIdeal(zeta8_field, [[K.one(), K.zero()], [K.omega(), K.zero()]])

    def test_o_basis_roundtrip(self, K, zeta8_fixture):
        f = zeta8_fixture["f"]
        cols = o_basis(f.lattice)
        F = zeta8_fixture["F"]
        recon = OLattice.from_o_generators(K, 2, cols)
        assert recon == f.lattice

    def test_principal_generator(self, K, zeta8_fixture):
        F = zeta8_fixture["F"]
        x = [K.elem(1, 2), K.elem(0, 1)]
        b = LIdeal.principal(F, x)
        g = principal_generator(b)
        assert LIdeal.principal(F, g).lattice == b.lattice


class TestAlpha:
    @pytest.fixture(scope="class")
    def alpha_setup(self, zeta8_fixture):
        F = zeta8_fixture["F"]
        f = zeta8_fixture["f"]
        a = zeta8_fixture["a"]
        P = select_prime_P(F, f, a)
        alpha = make_alpha(F, f, a, P)
        return F, f, a, P, alpha

    def test_lattice_equalities(self, alpha_setup):
        F, f, a, P, alpha = alpha_setup
        M = f * a.inverse()
        Mp = M * P.inverse()
        assert apply_matrix(alpha.mat, M.lattice) == lambda_of_ideal(alpha.I, 2)
        assert apply_matrix(alpha.mat, Mp.lattice) == lambda_of_ideal(
            alpha.pid * alpha.I, 2
        )

    def test_alpha_bijective(self, K, alpha_setup):
        F, f, a, P, alpha = alpha_setup
        rng = random.Random(29)
        for _ in range(10):
            x = [K.elem(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(2)]
            assert alpha.apply_inv(alpha.apply(x)) == x

    def test_v0_membership(self, alpha_setup):
        F, f, a, P, alpha = alpha_setup
        # v0 = alpha(1) lies in Lambda(I) iff 1 lies in f a^-1
        v0 = alpha.v0()
        in_lam = lambda_of_ideal(alpha.I, 2).contains(v0)
        one_in = (f * a.inverse()).contains(F.one_vec())
        assert in_lam == one_in

    def test_detsig_covolume_ratio(self, alpha_setup):
        # |det(sigma_i(alpha_j))|^2 equals the covolume ratio of the
        # sigma-embedded module to the embedded standard lattice
        F, f, a, P, alpha = alpha_setup
        from ekzeta.extension import Embeddings

        emb = alpha.emb
        M = (f * a.inverse()).lattice
        Lam = lambda_of_ideal(alpha.I, 2)
        with workprec(300):

            def covol(lat, embedder):
                rows = []
                for v in lat.basis_vectors():
                    ev = embedder(v)
                    rows.append(
                        [ev[0].real, ev[0].imag, ev[1].real, ev[1].imag]
                    )
                return abs(_det4(rows))

            v_m = covol(M, lambda v: emb.vector(v))
            from ekzeta.field import embed as kembed

            v_l = covol(Lam, lambda v: [kembed(x, 280).to_mpc() for x in v])
            ratio = v_m / v_l
            assert abs(ratio - abs(alpha.detsig.to_mpc()) ** 2) < mpf("1e-40")

    def test_transport_index_preserved(self, K, alpha_setup):
        F, f, a, P, alpha = alpha_setup
        b = f * a.inverse()
        b2 = b * LIdeal.principal(F, [K.elem(1, 1), K.zero()])
        i1 = lattice_index(b2.lattice, b.lattice)
        i2 = lattice_index(transport_ideal(b2, alpha), transport_ideal(b, alpha))
        assert i1 == i2

    def test_bad_input_ideals_rejected(self, K, zeta8_fixture):
        # P with n(P) not prime: use P = (2) (norm 16, n = (4))
        F = zeta8_fixture["F"]
        f = zeta8_fixture["f"]
        two = LIdeal.principal(F, [K.elem(2), K.zero()])
        with pytest.raises(ValidationError):
            make_alpha(F, f, zeta8_fixture["a"], two)


def _det4(rows):
    import itertools

    n = 4
    total = 0
    for perm in itertools.permutations(range(n)):
        sgn = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sgn = -sgn
        prod = rows[0][perm[0]]
        for i in range(1, n):
            prod = prod * rows[i][perm[i]]
        total += sgn * prod
    return total


class TestUnits:
    def test_validate_good_unit(self, zeta8_fixture):
        rep = validate_units([zeta8_fixture["u2"]], zeta8_fixture["f"], zeta8_fixture["F"])
        assert rep.ok, rep.messages

    def test_norm_minus_one_fails(self, zeta8_fixture):
        rep = validate_units([zeta8_fixture["u"]], zeta8_fixture["f"], zeta8_fixture["F"])
        assert not rep.ok
        assert any("n(u)" in m for m in rep.messages)

    def test_torsion_flagged(self, zeta8_fixture):
        rep = validate_units([zeta8_fixture["theta"]], zeta8_fixture["f"], zeta8_fixture["F"])
        assert not rep.ok
        assert any(rep.torsion_flags)

    def test_one_fails_independence(self, zeta8_fixture):
        rep = validate_units([zeta8_fixture["one"]], zeta8_fixture["f"], zeta8_fixture["F"])
        assert not rep.ok

    def test_unit_matrix_properties(self, K, zeta8_fixture):
        F = zeta8_fixture["F"]
        f = zeta8_fixture["f"]
        a = zeta8_fixture["a"]
        P = select_prime_P(F, f, a)
        alpha = make_alpha(F, f, a, P)
        u2 = zeta8_fixture["u2"]
        U = unit_matrix(u2, alpha, F)
        # trace equals sigma(tr(u)) = 6 exactly
        tr = U.mat[0][0] + U.mat[1][1]
        assert tr == K.elem(6)
        # identity maps to identity
        Uid = unit_matrix(F.one_vec(), alpha, F)
        assert all(
            Uid.mat[i][j] == (K.one() if i == j else K.zero())
            for i in range(2)
            for j in range(2)
        )
        # functoriality: U(u*u) = U(u)^2 exactly
        Usq = unit_matrix(F.mul(u2, u2), alpha, F)
        UU = U * U
        assert Usq.mat == UU.mat
