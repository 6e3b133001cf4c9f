import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from ekzeta.errors import UnsupportedFieldError, ValidationError
from ekzeta.field import (
    QuadElem,
    QuadField,
    QuadIdeal,
    canonical_associate,
    divides,
    divmod_O,
    embed,
    format_quadelem,
    gcd_extended,
    ideal_inverse,
    ideal_mul,
    ideal_norm,
    is_coprime,
    kronecker_symbol,
    parse_quadelem,
    primes_above,
)
from ekzeta.numerics import workprec

ALL_D = (-1, -2, -3, -7, -11)


class TestField:
    def test_unsupported(self):
        with pytest.raises(UnsupportedFieldError):
            QuadField(-5)

    def test_omega_squared(self):
        for d in ALL_D:
            F = QuadField(d)
            w = F.omega()
            w2 = w * w
            assert w2 == F.elem(F.om_c0, F.om_c1)

    def test_units_count(self):
        assert len(QuadField(-1).units()) == 4
        assert len(QuadField(-3).units()) == 6
        assert len(QuadField(-7).units()) == 2
        for d in ALL_D:
            for u in QuadField(d).units():
                assert u.is_unit()


class TestEmbed:
    def test_embed_i(self):
        F = QuadField(-1)
        v = embed(F.omega(), 128)
        assert abs(v.re) < mpf(2) ** -120
        assert abs(v.im - 1) < mpf(2) ** -120

    def test_embed_omega_minus3(self):
        F = QuadField(-3)
        with workprec(160):
            v = embed(F.omega(), 128)
            assert abs(v.re - mpf(1) / 2) < mpf(2) ** -120
            assert abs(v.im - mpmath.sqrt(3) / 2) < mpf(2) ** -120

    def test_additivity(self):
        F = QuadField(-1)
        w = F.omega()
        with workprec(160):
            s = embed(F.elem(2) - w, 128).to_mpc() + embed(w, 128).to_mpc()
            assert abs(s - 2) < mpf(2) ** -118

    @given(
        st.sampled_from(ALL_D),
        st.integers(-10**6, 10**6),
        st.integers(-10**6, 10**6),
        st.integers(-10**6, 10**6),
        st.integers(-10**6, 10**6),
    )
    @settings(max_examples=60, deadline=None)
    def test_ring_homomorphism(self, d, a1, b1, a2, b2):
        F = QuadField(d)
        x = F.elem(a1, b1)
        y = F.elem(a2, b2)
        with workprec(200):
            lhs = embed(x * y, 160).to_mpc()
            rhs = embed(x, 160).to_mpc() * embed(y, 160).to_mpc()
            assert abs(lhs - rhs) <= 4 * mpf(2) ** -156 * (1 + abs(lhs))


class TestGcd:
    def test_gcd_1pi_2(self):
        F = QuadField(-1)
        a = F.elem(1, 1)
        g, u, v = gcd_extended(a, F.elem(2))
        assert u * a + v * F.elem(2) == g
        # 2 = -i (1+i)^2, so the gcd is an associate of 1+i
        assert divides(g, a) and divides(g, F.elem(2))
        assert abs(g.norm()) == 2

    def test_gcd_with_zero(self):
        F = QuadField(-7)
        a = F.elem(3, 2)
        g, u, v = gcd_extended(a, F.zero())
        assert canonical_associate(g) == canonical_associate(a)

    def test_gcd_coprime_integers(self):
        for d in ALL_D:
            F = QuadField(d)
            g, _, _ = gcd_extended(F.elem(3), F.elem(5))
            assert abs(g.norm()) == 1

    def test_euclidean_division(self):
        rng = random.Random(5)
        for d in ALL_D:
            F = QuadField(d)
            for _ in range(50):
                a = F.elem(rng.randint(-50, 50), rng.randint(-50, 50))
                b = F.elem(rng.randint(-50, 50), rng.randint(-50, 50))
                if b.is_zero():
                    continue
                q, r = divmod_O(a, b)
                assert a == q * b + r
                assert abs(r.norm()) < abs(b.norm())


class TestIdeals:
    def test_norms(self):
        F = QuadField(-1)
        assert ideal_norm(QuadIdeal(F.elem(1, 1))) == 2
        assert ideal_norm(QuadIdeal(F.one())) == 1
        F3 = QuadField(-3)
        assert ideal_norm(QuadIdeal(F3.omega())) == 1

    def test_mul_inverse(self):
        F = QuadField(-1)
        I = QuadIdeal(F.elem(1, 1))
        assert ideal_mul(I, ideal_inverse(I)).is_unit_ideal()
        J = QuadIdeal(F.elem(1, -1))
        assert ideal_mul(I, J) == QuadIdeal(F.elem(2))

    def test_equality_up_to_units(self):
        F = QuadField(-1)
        assert QuadIdeal(F.elem(1, 1)) == QuadIdeal(F.elem(-1, 1))  # i(1+i)=(i-1)

    def test_coprime(self):
        F = QuadField(-1)
        assert is_coprime(QuadIdeal(F.elem(1, 1)), QuadIdeal(F.elem(3)))
        assert not is_coprime(QuadIdeal(F.elem(1, 1)), QuadIdeal(F.elem(2)))

    def test_norm_multiplicative(self):
        rng = random.Random(3)
        for d in ALL_D:
            F = QuadField(d)
            for _ in range(20):
                x = F.elem(rng.randint(-9, 9), rng.randint(-9, 9))
                y = F.elem(rng.randint(-9, 9), rng.randint(-9, 9))
                if x.is_zero() or y.is_zero():
                    continue
                I, J = QuadIdeal(x), QuadIdeal(y)
                assert ideal_norm(ideal_mul(I, J)) == ideal_norm(I) * ideal_norm(J)


class TestPrimesAbove:
    def test_split_5(self):
        F = QuadField(-1)
        ps = primes_above(F, 5)
        assert len(ps) == 2
        assert all(deg == 1 and ideal_norm(P) == 5 for P, deg in ps)
        assert ps[0][0] != ps[1][0]

    def test_inert_3(self):
        F = QuadField(-1)
        ps = primes_above(F, 3)
        assert len(ps) == 1
        assert ps[0][1] == 2
        assert ideal_norm(ps[0][0]) == 9

    def test_ramified_2(self):
        F = QuadField(-1)
        ps = primes_above(F, 2)
        assert len(ps) == 1
        assert ideal_norm(ps[0][0]) == 2

    def test_norm_product_all_fields(self):
        # product of norms with ramification multiplicity equals ell^2
        primes = [p for p in range(2, 1000) if all(p % q for q in range(2, p))]
        for d in ALL_D:
            F = QuadField(d)
            for ell in primes:
                ps = primes_above(F, ell)
                chi = kronecker_symbol(F.disc, ell)
                total = 1
                for P, deg in ps:
                    mult = 2 if chi == 0 else 1
                    total *= int(ideal_norm(P)) ** mult
                assert total == ell * ell, (d, ell)


class TestParse:
    def test_examples(self, K):
        assert parse_quadelem("3/2-5*w", K) == K.elem(Fraction(3, 2), -5)
        assert parse_quadelem("w", K) == K.omega()
        assert parse_quadelem("-2", K) == K.elem(-2)
        assert parse_quadelem("1+1*w", K) == K.elem(1, 1)

    def test_roundtrip(self, K):
        rng = random.Random(9)
        for _ in range(50):
            x = K.elem(
                Fraction(rng.randint(-99, 99), rng.randint(1, 20)),
                Fraction(rng.randint(-99, 99), rng.randint(1, 20)),
            )
            assert parse_quadelem(format_quadelem(x), K) == x

    def test_bad_literal(self, K):
        with pytest.raises(ValidationError):
            parse_quadelem("3//2", K)
