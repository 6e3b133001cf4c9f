"""CM periods via the arithmetic-geometric mean and LLL-based recognition
of computed values as algebraic numbers after period normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from .errors import PrecisionError, ValidationError
from .intlinalg import lll_reduce_gram
from .numerics import BigComplex, workprec

# short Weierstrass models y^2 = x^3 + A x + B of curves with CM by the
# maximal order, one per supported discriminant, with their j-invariants
CURVE_TABLE = {
    -1: (Fraction(-1), Fraction(0), 1728),
    -2: (Fraction(-30), Fraction(56), 8000),
    -3: (Fraction(0), Fraction(1), 0),
    -7: (Fraction(-35), Fraction(-98), -3375),
    -11: (Fraction(-264), Fraction(1694), -32768),
}


@dataclass(frozen=True)
class PeriodSpec:
    d: int
    A: Fraction
    B: Fraction

    @staticmethod
    def builtin(d: int) -> "PeriodSpec":
        if d not in CURVE_TABLE:
            raise ValidationError(f"no builtin curve for d={d}")
        A, B, _ = CURVE_TABLE[d]
        return PeriodSpec(d, A, B)

    def j_invariant(self) -> Fraction:
        A, B = self.A, self.B
        den = 4 * A**3 + 27 * B**2
        if den == 0:
            raise ValidationError("singular curve")
        return Fraction(1728) * 4 * A**3 / den

    def check_cm(self):
        if self.d in CURVE_TABLE and self.j_invariant() != CURVE_TABLE[self.d][2]:
            raise ValidationError(
                f"curve j-invariant {self.j_invariant()} does not match the CM value"
            )


@dataclass(frozen=True)
class RecognitionResult:
    minpoly: tuple  # integer coefficients, ascending
    residual: mpf
    height: int


def _agm(a, b, prec_bits: int):
    """AGM with the principal branch choice |a-b| <= |a+b|; quadratic
    convergence, iteration count O(log prec)."""
    with workprec(prec_bits + 16):
        a = mpc(a)
        b = mpc(b)
        max_iter = int(math.log2(prec_bits + 16)) + 12
        for it in range(max_iter):
            if abs(a - b) <= abs(a + b) * mpf(2) ** (-(prec_bits + 8)):
                return (a + b) / 2, it + 1
            a, b = (a + b) / 2, mpmath.sqrt(a * b)
            if abs(a - b) > abs(a + b):
                b = -b
        raise PrecisionError("AGM did not converge in the expected iterations")


def cm_period(spec: PeriodSpec, prec_bits: int) -> tuple[mpf, int]:
    """Real period of y^2 = x^3 + A x + B: the integral of dx/y over the
    real locus; via AGM on the 2-torsion roots (complex branch when only
    one root is real).  Returns (Omega, agm_iterations)."""
    spec.check_cm()
    with workprec(prec_bits + 32):
        A = mpf(spec.A.numerator) / spec.A.denominator
        B = mpf(spec.B.numerator) / spec.B.denominator
        roots = mpmath.polyroots([1, 0, A, B], maxsteps=200, extraprec=prec_bits)
        reals = sorted([r.real for r in roots if abs(r.imag) < mpf(2) ** (-prec_bits // 2)])
        if len(reals) == 3:
            e3, e2, e1 = reals
            m, iters = _agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2), prec_bits)
        else:
            # one real root e1 and a conjugate pair
            e1 = max(reals)
            others = sorted(
                [r for r in roots if abs(r.imag) >= mpf(2) ** (-prec_bits // 2)],
                key=lambda r: r.imag,
            )
            m, iters = _agm(
                mpmath.sqrt(e1 - others[0]), mpmath.sqrt(e1 - others[1]), prec_bits
            )
        omega = 2 * mpmath.pi / m
        if abs(omega.imag) > abs(omega.real) * mpf(2) ** (-(prec_bits // 2)):
            raise PrecisionError("period came out non-real")
        with workprec(prec_bits):
            return +omega.real, iters


def recognize_algebraic(
    x: BigComplex, degree_bound: int, height_bound: int, prec_bits: int
):
    """Integer polynomial relation among 1, x, ..., x^degree via LLL on
    the real/imaginary embedding; returns RecognitionResult or None.

    Accepts only if the residual is below 2^(-prec_bits/4), the height is
    within bound, and the relation re-verifies with the evaluation carried
    at doubled working precision."""
    if x.err_abs > mpf(2) ** (-(prec_bits // 2)):
        raise PrecisionError(
            f"input error {x.err_abs} too large for recognition at {prec_bits} bits"
        )
    with workprec(prec_bits + 32):
        xv = x.to_mpc()
        d = int(degree_bound)
        powers = [mpc(1)]
        for _ in range(d):
            powers.append(powers[-1] * xv)
        scale_bits = prec_bits - 16
        C = mpf(2) ** scale_bits
        rows = []
        for k in range(d + 1):
            rows.append(
                [1 if t == k else 0 for t in range(d + 1)]
                + [int(mpmath.nint(powers[k].real * C)), int(mpmath.nint(powers[k].imag * C))]
            )
        n = len(rows)
        m = len(rows[0])
        G = [[sum(rows[i][t] * rows[j][t] for t in range(m)) for j in range(n)] for i in range(n)]
        U = lll_reduce_gram(G)
        thresh = mpf(2) ** (-(prec_bits // 4))
        best = None
        for coeffs in U:
            poly = list(coeffs)
            while poly and poly[-1] == 0:
                poly.pop()
            if len(poly) <= 1:
                continue
            h = max(abs(c) for c in poly)
            if h > height_bound or h == 0:
                continue
            g = 0
            for c in poly:
                g = math.gcd(g, abs(c))
            poly = [c // g for c in poly]
            if poly[-1] < 0:
                poly = [-c for c in poly]
            res = _poly_residual(poly, xv)
            if res < thresh:
                # re-verify at doubled working precision
                with workprec(2 * prec_bits):
                    res2 = _poly_residual(poly, x.to_mpc())
                if res2 < thresh:
                    cand = RecognitionResult(
                        minpoly=tuple(poly), residual=+res2, height=max(abs(c) for c in poly)
                    )
                    if best is None or cand.height < best.height:
                        best = cand
        return best


def _poly_residual(poly, xv) -> mpf:
    acc = mpc(0)
    for c in reversed(poly):
        acc = acc * xv + c
    return abs(acc)


def normalize_by_period(
    value: BigComplex, N: int, p: int, q: int, omega_inf, prec_bits: int
) -> BigComplex:
    """value * Omega^(-N(q-p)) * pi^(N q) for an L-value of weight (p, q)
    with p < 0 <= q."""
    if not (p < 0 <= q):
        raise ValidationError("weight convention requires p < 0 <= q")
    with workprec(prec_bits + 32):
        om = mpf(omega_inf)
        factor = om ** (-N * (q - p)) * mpmath.pi ** (N * q)
        f = BigComplex(factor, 0, prec_bits + 32)
    return value * f
