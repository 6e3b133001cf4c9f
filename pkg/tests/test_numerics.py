import random

import mpmath
import pytest
from mpmath import mpf

from ekzeta.errors import PrecisionError, ValidationError
from ekzeta.numerics import (
    BigComplex,
    Tolerance,
    gaussian_tail_radius,
    polynomial_tail_radius,
    upper_incomplete_gamma,
    workprec,
)


class TestUpperIncompleteGamma:
    def test_gamma_1_2_is_exp(self):
        with workprec(160):
            v = upper_incomplete_gamma(1, mpf(2), 128)
            assert abs(v - mpmath.exp(-2)) < mpf(2) ** -120

    def test_gamma_3_0_is_factorial(self):
        v = upper_incomplete_gamma(3, 0, 128)
        assert v == 2

    def test_gamma_3_1_closed_form(self):
        # Gamma(3, x) = 2 e^-x (1 + x + x^2/2), so Gamma(3, 1) = 5/e
        with workprec(160):
            v = upper_incomplete_gamma(3, mpf(1), 128)
            assert abs(v - 5 / mpmath.e) < mpf(2) ** -120

    def test_recurrence(self):
        # Gamma(a+1, x) = a Gamma(a, x) + x^a e^-x
        rng = random.Random(11)
        with workprec(200):
            for _ in range(40):
                a = rng.randint(1, 40)
                x = mpf(rng.randint(0, 50)) + mpf(rng.random())
                lhs = upper_incomplete_gamma(a + 1, x, 160)
                rhs = a * upper_incomplete_gamma(a, x, 160) + x**a * mpmath.exp(-x)
                assert abs(lhs - rhs) <= abs(lhs) * mpf(2) ** -152

    def test_negative_integer_a(self):
        with workprec(200):
            for a in (0, -1, -2):
                x = mpf("7.25")
                v = upper_incomplete_gamma(a, x, 160)
                ref = mpmath.gammainc(mpf(a), x, mpmath.inf)
                assert abs(v - ref) < abs(ref) * mpf(2) ** -140

    def test_real_a(self):
        with workprec(200):
            v = upper_incomplete_gamma(mpf("3.5"), mpf(2), 160)
            ref = mpmath.gammainc(mpf("3.5"), mpf(2), mpmath.inf)
            assert abs(v - ref) < abs(ref) * mpf(2) ** -140

    def test_negative_x_rejected(self):
        with pytest.raises(ValidationError):
            upper_incomplete_gamma(2, -1, 128)

    def test_diverging_case_rejected(self):
        with pytest.raises(PrecisionError):
            upper_incomplete_gamma(0, 0, 128)


class TestGaussianTailRadius:
    def _shell_sum(self, t, R, degree, count=400):
        # oracle: actually sum the discarded terms of the square lattice
        with workprec(80):
            s = mpf(0)
            Rc = int(mpmath.ceil(R)) + count
            for m in range(-Rc, Rc + 1):
                for n in range(-Rc, Rc + 1):
                    r2 = mpf(m * m + n * n)
                    r = mpmath.sqrt(r2)
                    if r <= R:
                        continue
                    s += r**degree * mpmath.exp(-t * r2)
            return s

    def test_example_eps30(self):
        R = gaussian_tail_radius(mpmath.pi, 1, mpf("1e-30"), 0)
        assert R <= 6
        assert self._shell_sum(mpmath.pi, R, 0, count=20) < mpf("1e-30")

    def test_example_eps60(self):
        R = gaussian_tail_radius(mpmath.pi, 1, mpf("1e-60"), 0)
        with workprec(80):
            assert R >= mpmath.sqrt(60 * mpmath.log(10) / mpmath.pi)
        assert self._shell_sum(mpmath.pi, R, 0, count=20) < mpf("1e-60")

    def test_degree_monotone(self):
        r0 = gaussian_tail_radius(mpmath.pi, 1, mpf("1e-30"), 0)
        r8 = gaussian_tail_radius(mpmath.pi, 1, mpf("1e-30"), 8)
        assert r8 >= r0

    def test_polynomial_radius(self):
        R = polynomial_tail_radius(mpf(7), 1, mpf("1e-8"))
        # oracle: sum the tail of |x|^-7 over Z[i] beyond R
        with workprec(80):
            s = mpf(0)
            Rc = int(R) + 300
            for m in range(-Rc, Rc + 1):
                for n in range(-Rc, Rc + 1):
                    r2 = m * m + n * n
                    if 0 < r2 and mpmath.sqrt(r2) > R:
                        s += mpf(r2) ** mpf("-3.5")
            assert s < mpf("1e-8")


class TestBigComplex:
    def test_error_monotone_ops(self):
        a = BigComplex(1, 2, 128, mpf("1e-30"))
        b = BigComplex(3, -1, 128, mpf("1e-31"))
        assert (a + b).err_abs >= a.err_abs + b.err_abs
        assert (a * b).err_abs >= a.err_abs
        assert (a / b).err_abs > 0

    def test_precision_floor(self):
        with pytest.raises(ValidationError):
            BigComplex(1, 0, 32)

    def test_immutability(self):
        a = BigComplex(1, 0, 128)
        with pytest.raises(AttributeError):
            a.re = mpf(2)

    def test_error_monotonicity_under_precision_doubling(self):
        # recomputing a composite expression at doubled precision moves the
        # value by less than the reported bound
        def compute(prec):
            with workprec(prec):
                a = BigComplex(mpf(1) / 3, mpf(2) / 7, prec)
                b = BigComplex(mpf(5) / 11, mpf(-3) / 13, prec)
                return (a * b + a / b) * b - a

        v1 = compute(128)
        v2 = compute(256)
        with workprec(300):
            assert abs(v1.to_mpc() - v2.to_mpc()) < v1.err_abs

    def test_division_by_fuzzy_zero(self):
        a = BigComplex(1, 0, 128)
        z = BigComplex(0, 0, 128, mpf("1e-20"))
        with pytest.raises(PrecisionError):
            a / z


class TestTolerance:
    def test_positive(self):
        with pytest.raises(ValidationError):
            Tolerance(mpf(0))

    def test_unreachable(self):
        with pytest.raises(PrecisionError):
            Tolerance(mpf(2) ** -130).check_against(128)
        Tolerance(mpf(2) ** -100).check_against(128)
