"""Exact arithmetic in the norm-Euclidean imaginary quadratic fields.

Supported discriminant keys d in {-1, -2, -3, -7, -11}: for these the ring
of integers O is norm-Euclidean, hence a PID with an effective extended gcd,
and every fractional ideal is principal.  Elements are a + b*omega with
exact rational a, b, where omega = sqrt(d) or (1+sqrt(d))/2 for d = 1 mod 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .errors import UnsupportedFieldError, ValidationError
from .numerics import BigComplex, workprec

SUPPORTED_D = (-1, -2, -3, -7, -11)


@dataclass(frozen=True)
class QuadField:
    d: int

    def __post_init__(self):
        if self.d not in SUPPORTED_D:
            raise UnsupportedFieldError(
                f"d={self.d} not supported (need one of {SUPPORTED_D})"
            )

    @property
    def disc(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def omega_is_half(self) -> bool:
        return self.d % 4 == 1  # note: -3 % 4 == 1 in python

    # omega^2 = om_c0 + om_c1 * omega
    @property
    def om_c0(self) -> int:
        return (self.d - 1) // 4 if self.omega_is_half else self.d

    @property
    def om_c1(self) -> int:
        return 1 if self.omega_is_half else 0

    def omega(self) -> "QuadElem":
        return QuadElem(self, 0, 1)

    def one(self) -> "QuadElem":
        return QuadElem(self, 1, 0)

    def zero(self) -> "QuadElem":
        return QuadElem(self, 0, 0)

    def elem(self, a, b=0) -> "QuadElem":
        return QuadElem(self, Fraction(a), Fraction(b))

    def units(self) -> list["QuadElem"]:
        """All units of O (4 for d=-1, 6 for d=-3, else 2)."""
        one = self.one()
        us = [one, -one]
        if self.d == -1:
            i = self.omega()
            us += [i, -i]
        elif self.d == -3:
            w = self.omega()  # primitive 6th root of unity
            us += [w, -w, w * w, -(w * w)]
        return us

    def __repr__(self):
        return f"QuadField(d={self.d})"


@dataclass(frozen=True)
class QuadElem:
    """a + b*omega with exact rational a, b."""

    field: QuadField
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def _check(self, other):
        if self.field.d != other.field.d:
            raise ValidationError("mixed base fields")

    def __add__(self, other):
        other = self._coerce(other)
        return QuadElem(self.field, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        other = self._coerce(other)
        return QuadElem(self.field, self.a - other.a, self.b - other.b)

    def __neg__(self):
        return QuadElem(self.field, -self.a, -self.b)

    def __mul__(self, other):
        other = self._coerce(other)
        # (a1 + b1 w)(a2 + b2 w) = a1 a2 + b1 b2 w^2 + (a1 b2 + a2 b1) w
        f = self.field
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return QuadElem(
            f, a1 * a2 + b1 * b2 * f.om_c0, a1 * b2 + a2 * b1 + b1 * b2 * f.om_c1
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self._coerce(other) - self

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(self.field, Fraction(other), 0)
        raise TypeError(f"cannot coerce {type(other)}")

    def conj(self) -> "QuadElem":
        # conj(omega) = om_c1 - omega
        f = self.field
        return QuadElem(f, self.a + self.b * f.om_c1, -self.b)

    def norm(self) -> Fraction:
        return (self * self.conj()).a

    def trace(self) -> Fraction:
        return 2 * self.a + self.b * self.field.om_c1

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of 0")
        c = self.conj()
        return QuadElem(self.field, c.a / n, c.b / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def is_unit(self) -> bool:
        return self.is_integral() and abs(self.norm()) == 1

    def denominator(self) -> int:
        return math.lcm(self.a.denominator, self.b.denominator)

    def __hash__(self):
        return hash((self.field.d, self.a, self.b))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, QuadElem):
            return NotImplemented
        return self.field.d == other.field.d and self.a == other.a and self.b == other.b

    def __repr__(self):
        return f"({self.a}+{self.b}*w)"

    def key(self):
        """Deterministic sort key."""
        return (self.norm(), self.a, self.b)


def embed(x: QuadElem, prec_bits: int) -> BigComplex:
    """The fixed embedding with Im(sigma(omega)) > 0; error <= 2^(-prec+2)."""
    with workprec(prec_bits + 8):
        sq = mpmath.sqrt(mpf(-x.field.d))
        if x.field.omega_is_half:
            w_re, w_im = mpf(1) / 2, sq / 2
        else:
            w_re, w_im = mpf(0), sq
        a = mpf(x.a.numerator) / x.a.denominator
        b = mpf(x.b.numerator) / x.b.denominator
        re = a + b * w_re
        im = b * w_im
    v = BigComplex(re, im, prec_bits)
    return BigComplex(v.re, v.im, prec_bits, v._round_unit() * 4)


def _round_to_O(x: QuadElem) -> QuadElem:
    """Nearest integral element for norm-Euclidean division: tries the
    four floor/ceil combinations of the (a, b) coordinates plus neighbours
    and picks the one minimizing the norm of the remainder."""
    f = x.field
    best = None
    a0 = math.floor(x.a)
    b0 = math.floor(x.b)
    for da in (0, 1, -1, 2):
        for db in (0, 1, -1, 2):
            q = QuadElem(f, a0 + da, b0 + db)
            r = x - q
            n = r.norm()
            if best is None or n < best[0]:
                best = (n, q)
    return best[1]


def divmod_O(a: QuadElem, b: QuadElem) -> tuple[QuadElem, QuadElem]:
    """q, r with a = q b + r and N(r) < N(b) (norm-Euclidean division)."""
    if b.is_zero():
        raise ZeroDivisionError("division by zero in O")
    q = _round_to_O(a / b)
    r = a - q * b
    if not (abs(r.norm()) < abs(b.norm())):
        raise UnsupportedFieldError("norm-Euclidean division failed")
    return q, r


def gcd_extended(a: QuadElem, b: QuadElem) -> tuple[QuadElem, QuadElem, QuadElem]:
    """g, u, v with g = u a + v b, g | a, g | b; via the Euclidean algorithm."""
    if not (a.is_integral() and b.is_integral()):
        raise ValidationError("gcd_extended requires integral arguments")
    if a.is_zero() and b.is_zero():
        raise ValidationError("gcd(0, 0) undefined")
    f = a.field
    r0, r1 = a, b
    s0, s1 = f.one(), f.zero()
    t0, t1 = f.zero(), f.one()
    while not r1.is_zero():
        q, r = divmod_O(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def divides(a: QuadElem, b: QuadElem) -> bool:
    """a | b in O."""
    if a.is_zero():
        return b.is_zero()
    return (b / a).is_integral()


def canonical_associate(x: QuadElem) -> QuadElem:
    """Deterministic representative of x among its unit multiples."""
    if x.is_zero():
        return x
    cands = [x * u for u in x.field.units()]
    return min(cands, key=lambda y: (y.a, y.b))


class QuadIdeal:
    """Nonzero fractional ideal of O, stored by a canonical principal
    generator (class number one)."""

    __slots__ = ("gen",)

    def __init__(self, gen: QuadElem):
        if gen.is_zero():
            raise ValidationError("zero ideal forbidden")
        object.__setattr__(self, "gen", canonical_associate(gen))

    def __setattr__(self, *a):
        raise AttributeError("QuadIdeal is immutable")

    @property
    def field(self) -> QuadField:
        return self.gen.field

    def norm(self) -> Fraction:
        return abs(self.gen.norm())

    def __mul__(self, other: "QuadIdeal") -> "QuadIdeal":
        return QuadIdeal(self.gen * other.gen)

    def inverse(self) -> "QuadIdeal":
        return QuadIdeal(self.gen.inverse())

    def __eq__(self, other):
        if not isinstance(other, QuadIdeal):
            return NotImplemented
        return self.gen == other.gen

    def __hash__(self):
        return hash(("QuadIdeal", self.gen))

    def is_integral(self) -> bool:
        return self.gen.is_integral()

    def contains(self, x: QuadElem) -> bool:
        return (x / self.gen).is_integral()

    def is_unit_ideal(self) -> bool:
        return self.gen.is_unit()

    def __repr__(self):
        return f"QuadIdeal({self.gen!r})"


def ideal_norm(I: QuadIdeal) -> Fraction:
    return I.norm()


def ideal_mul(I: QuadIdeal, J: QuadIdeal) -> QuadIdeal:
    return I * J


def ideal_inverse(I: QuadIdeal) -> QuadIdeal:
    return I.inverse()


def is_coprime(I: QuadIdeal, J: QuadIdeal) -> bool:
    """Coprimality of the integral parts after clearing denominators."""
    a = _integral_part(I)
    b = _integral_part(J)
    g, _, _ = gcd_extended(a, b)
    return g.is_unit()


def _integral_part(I: QuadIdeal) -> QuadElem:
    g = I.gen
    den = g.denominator()
    return g * den if den > 1 else g


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a / n) for n > 0."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        raise ValidationError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def primes_above(F: QuadField, ell: int) -> list[tuple[QuadIdeal, int]]:
    """Prime ideals of O over the rational prime ell, with residue degrees.

    Split: two ideals of norm ell; inert: one of norm ell^2; ramified: one
    of norm ell (the list carries it once; its square is (ell))."""
    if ell < 2 or any(ell % p == 0 for p in range(2, int(math.isqrt(ell)) + 1)):
        raise ValidationError(f"{ell} is not prime")
    chi = kronecker_symbol(F.disc, ell)
    lam = F.elem(ell)
    if chi == -1:
        return [(QuadIdeal(lam), 2)]
    # find a root of the minimal polynomial of omega mod ell
    # omega^2 - c1*omega - c0 = 0
    root = None
    for r in range(ell):
        if (r * r - F.om_c1 * r - F.om_c0) % ell == 0:
            root = r
            break
    if root is None:
        raise ValidationError("prime with chi >= 0 must have a root (impossible)")
    g1, _, _ = gcd_extended(lam, F.elem(-root, 1))
    P1 = QuadIdeal(g1)
    if chi == 0:
        return [(P1, 1)]
    # second root is c1 - root mod ell
    r2 = (F.om_c1 - root) % ell
    g2, _, _ = gcd_extended(lam, F.elem(-r2, 1))
    P2 = QuadIdeal(g2)
    if P1 == P2:
        raise ValidationError("split prime produced equal factors")
    out = sorted([P1, P2], key=lambda I: I.gen.key())
    return [(out[0], 1), (out[1], 1)]


def parse_quadelem(s: str, F: QuadField) -> QuadElem:
    """Parse 'a+b*w' with exact rational a, b (e.g. '3/2-5*w', 'w', '-2')."""
    s = s.replace(" ", "")
    if not s:
        raise ValidationError("empty element literal")
    # tokenize into signed terms
    terms = []
    cur = ""
    for i, ch in enumerate(s):
        if ch in "+-" and i > 0 and s[i - 1] not in "+-*/":
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    terms.append(cur)
    a = Fraction(0)
    b = Fraction(0)
    for t in terms:
        if not t:
            continue
        sign = Fraction(1)
        while t and t[0] in "+-":
            if t[0] == "-":
                sign = -sign
            t = t[1:]
        if t.endswith("*w"):
            coeff = t[:-2]
            b += sign * (Fraction(coeff) if coeff else Fraction(1))
        elif t == "w":
            b += sign
        else:
            try:
                a += sign * Fraction(t)
            except ValueError as e:
                raise ValidationError(f"bad element literal {s!r}: {e}") from None
    return QuadElem(F, a, b)


def format_quadelem(x: QuadElem) -> str:
    out = []
    if x.a != 0 or x.b == 0:
        out.append(str(x.a))
    if x.b != 0:
        sb = f"{x.b}*w"
        if x.b > 0 and out:
            out.append("+" + sb)
        else:
            out.append(sb)
    return "".join(out)
