"""Arbitrary-precision arithmetic layer.

Everything numerical in the package flows through this module: BigComplex
values carrying a conservative absolute-error bound, the upper incomplete
gamma function used by the accelerated lattice sums, and truncation-radius
helpers.  Backed by mpmath (gmpy backend when available); error tracking is
a scalar bound, not ball arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .errors import PrecisionError, ValidationError

MIN_PREC = 64


def ulp(prec_bits: int) -> mpf:
    return mpf(2) ** (-prec_bits)


class workprec:
    """Context manager setting the working precision in bits."""

    def __init__(self, prec_bits: int):
        if prec_bits < MIN_PREC:
            raise ValidationError(f"prec_bits must be >= {MIN_PREC}, got {prec_bits}")
        self.prec = prec_bits

    def __enter__(self):
        self._saved = mp.prec
        mp.prec = self.prec
        return self

    def __exit__(self, *exc):
        mp.prec = self._saved
        return False


def to_mpf_exact(x) -> mpf:
    """Convert int/Fraction/str/mpf to mpf at current precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


@dataclass(frozen=True)
class Tolerance:
    """Target absolute error of a series value."""

    eps_abs: mpf

    def __post_init__(self):
        if not self.eps_abs > 0:
            raise ValidationError("eps_abs must be positive")

    @staticmethod
    def of(x) -> "Tolerance":
        return Tolerance(mpf(x) if not isinstance(x, Tolerance) else x.eps_abs)

    def check_against(self, prec_bits: int):
        """The tolerance must be reachable at the active precision."""
        if not self.eps_abs > mpf(2) ** (-(prec_bits - 8)):
            raise PrecisionError(
                f"eps_abs={self.eps_abs} unreachable at prec_bits={prec_bits}"
            )


class BigComplex:
    """Immutable arbitrary-precision complex number with a tracked absolute
    error bound.

    err_abs is a conservative upper bound on |stored - true|; it grows
    monotonically under arithmetic (propagated input bounds plus one unit of
    rounding at prec_bits).  err_abs may be +inf when untracked.
    """

    __slots__ = ("re", "im", "prec_bits", "err_abs")

    def __init__(self, re, im=0, prec_bits=None, err_abs=None):
        prec = prec_bits if prec_bits is not None else mp.prec
        if prec < MIN_PREC:
            raise ValidationError(f"prec_bits must be >= {MIN_PREC}")
        with workprec(prec):
            object.__setattr__(self, "re", to_mpf_exact(re))
            object.__setattr__(self, "im", to_mpf_exact(im))
        object.__setattr__(self, "prec_bits", prec)
        e = mpf(0) if err_abs is None else mpf(err_abs)
        if e < 0:
            raise ValidationError("err_abs must be non-negative")
        object.__setattr__(self, "err_abs", e)

    def __setattr__(self, *a):
        raise AttributeError("BigComplex is immutable")

    @staticmethod
    def from_mpc(z, prec_bits=None, err_abs=0) -> "BigComplex":
        z = mpc(z)
        return BigComplex(z.real, z.imag, prec_bits=prec_bits, err_abs=err_abs)

    def to_mpc(self) -> mpc:
        return mpc(self.re, self.im)

    def _round_unit(self) -> mpf:
        return (abs(self.re) + abs(self.im) + 1) * ulp(self.prec_bits)

    def magnitude(self) -> mpf:
        return mpmath.hypot(self.re, self.im)

    def _binop_prec(self, other) -> int:
        return min(self.prec_bits, other.prec_bits)

    def __add__(self, other):
        other = _coerce(other, self.prec_bits)
        prec = self._binop_prec(other)
        with workprec(prec):
            z = self.to_mpc() + other.to_mpc()
            out = BigComplex.from_mpc(z, prec)
            err = self.err_abs + other.err_abs + out._round_unit()
        return BigComplex(out.re, out.im, prec, err)

    __radd__ = __add__

    def __neg__(self):
        return BigComplex(-self.re, -self.im, self.prec_bits, self.err_abs)

    def __sub__(self, other):
        other = _coerce(other, self.prec_bits)
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other, self.prec_bits) + (-self)

    def __mul__(self, other):
        other = _coerce(other, self.prec_bits)
        prec = self._binop_prec(other)
        with workprec(prec):
            z = self.to_mpc() * other.to_mpc()
            out = BigComplex.from_mpc(z, prec)
            err = (
                self.err_abs * other.magnitude()
                + other.err_abs * self.magnitude()
                + self.err_abs * other.err_abs
                + out._round_unit()
            )
        return BigComplex(out.re, out.im, prec, err)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other, self.prec_bits)
        prec = self._binop_prec(other)
        with workprec(prec):
            om = other.magnitude()
            if not om > 2 * other.err_abs:
                raise PrecisionError("division by a value indistinguishable from 0")
            z = self.to_mpc() / other.to_mpc()
            out = BigComplex.from_mpc(z, prec)
            # |a/b - a'/b'| <= (|a| err_b + |b| err_a) / (|b| (|b|-err_b))
            err = (self.magnitude() * other.err_abs + om * self.err_abs) / (
                om * (om - other.err_abs)
            ) + out._round_unit()
        return BigComplex(out.re, out.im, prec, err)

    def conjugate(self):
        return BigComplex(self.re, -self.im, self.prec_bits, self.err_abs)

    def __abs__(self) -> mpf:
        return self.magnitude()

    def __eq__(self, other):
        if not isinstance(other, BigComplex):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"BigComplex({self.re!r}, {self.im!r}, prec={self.prec_bits}, err={self.err_abs!r})"


def _coerce(x, prec) -> BigComplex:
    if isinstance(x, BigComplex):
        return x
    if isinstance(x, (int, Fraction, float, mpf)):
        with workprec(prec):
            return BigComplex(to_mpf_exact(x), 0, prec)
    if isinstance(x, (complex, mpc)):
        return BigComplex.from_mpc(x, prec)
    raise TypeError(f"cannot coerce {type(x)} to BigComplex")


def upper_incomplete_gamma(a, x, prec_bits: int) -> mpf:
    """Gamma(a, x) = int_x^inf t^(a-1) e^(-t) dt for real a and x >= 0.

    Integer a >= 1 uses the exact finite form (a-1)! e^(-x) sum x^k/k!
    (all terms positive, no cancellation); other cases fall back to
    mpmath's gammainc with guard bits.  Absolute error is within
    2^(-prec_bits+4) * max(1, Gamma(a, x)).
    """
    with workprec(prec_bits + 16):
        xm = to_mpf_exact(x)
        if xm < 0:
            raise ValidationError("x must be >= 0")
        if isinstance(a, (int,)) or (isinstance(a, mpf) and a == int(a)):
            ai = int(a)
            if ai >= 1:
                if xm == 0:
                    r = mpmath.factorial(ai - 1)
                else:
                    term = mpf(1)
                    s = mpf(1)
                    for k in range(1, ai):
                        term = term * xm / k
                        s += term
                    r = mpmath.factorial(ai - 1) * mpmath.exp(-xm) * s
                with workprec(prec_bits):
                    return +r
            if xm == 0:
                raise PrecisionError("Gamma(a, 0) diverges for a <= 0")
            # downward recurrence from Gamma(0, x) = E1(x)
            g = mpmath.e1(xm)
            if ai < 0:
                emx = mpmath.exp(-xm)
                for b in range(0, ai, -1):
                    # Gamma(b-1, x) = (Gamma(b, x) - x^(b-1) e^(-x)) / (b-1)
                    g = (g - xm ** (b - 1) * emx) / (b - 1)
            with workprec(prec_bits):
                return +g
        if xm == 0:
            r = mpmath.gamma(to_mpf_exact(a))
        else:
            r = mpmath.gammainc(to_mpf_exact(a), xm, mpmath.inf)
        with workprec(prec_bits):
            return +r


def _shell_count_bound(r: mpf, covol: mpf) -> mpf:
    """Upper bound on the number of lattice points with |x| in [r, r+1),
    for any lattice of covolume covol: area of the annulus inflated by the
    covering radius, divided by covol.  Crude but safe for r >= diam."""
    diam = mpmath.sqrt(covol) * 4 + 2
    return (2 * mpmath.pi * (r + diam) + mpmath.pi * (2 * diam + 1)) / covol + 8


def gaussian_tail_radius(t_scale, covol, eps, poly_degree: int, prec_bits: int = 64) -> mpf:
    """Radius R such that sum over lattice points |x| > R of
    |x|^poly_degree * exp(-t_scale |x|^2) is provably below eps.

    Works for any planar lattice of the given covolume; the bound compares
    the shell sums with max-term times a per-shell point count."""
    eps = Tolerance.of(eps).eps_abs
    with workprec(max(prec_bits, 64)):
        t = to_mpf_exact(t_scale)
        v = to_mpf_exact(covol)
        if not (t > 0 and v > 0 and eps > 0):
            raise ValidationError("t_scale, covol, eps must be positive")
        d = int(poly_degree)

        def tail_bound(R):
            # sum_{k>=0} max|term| on shell [R+k, R+k+1) * count(shell)
            # term r^d e^{-t r^2} is decreasing past sqrt(d/2t)
            s = mpf(0)
            r = R
            while True:
                c = _shell_count_bound(r, v)
                term = r**d * mpmath.exp(-t * r * r) if d else mpmath.exp(-t * r * r)
                s += c * term
                if c * term < eps * mpf(2) ** (-16) and r > R + 4:
                    break
                r += 1
                if r > R + 10000:
                    break
            return s

        R = mpmath.sqrt(max(mpf(d) / (2 * t), mpf(1))) + 1
        while tail_bound(R) >= eps:
            R = R * mpf("1.25") + 1
            if R > mpf(10) ** 12:
                raise PrecisionError("tail radius diverged")
        return +R


def polynomial_tail_radius(power: mpf, covol, eps, prec_bits: int = 64) -> mpf:
    """Radius R with sum over |x| > R of |x|^(-power) < eps, for a planar
    lattice of covolume covol; requires power > 2."""
    eps = Tolerance.of(eps).eps_abs
    with workprec(max(prec_bits, 64)):
        p = to_mpf_exact(power)
        v = to_mpf_exact(covol)
        if not p > 2:
            raise ValidationError("tail power must be > 2")
        # shell-sum bound: sum_{r >= R} count(r) max-term(r)
        #   <= (2 pi / v) * integral_{R-1-diam}^{inf} (r+diam+1) r^{-p} dr + slack
        diam = mpmath.sqrt(v) * 4 + 2
        R = diam + 4
        while True:
            r0 = R - 1
            b = (2 * mpmath.pi / v) * (
                (r0 + 2 * diam + 2) ** 2 * r0 ** (-p) * (p / (p - 2))
            ) + 16 * R ** (-p) * (R + diam)
            if b < eps:
                return +R
            R = R * mpf("1.2") + 1
            if R > mpf(10) ** 14:
                raise PrecisionError("tail radius diverged")
