"""Numerical evaluation of the one-variable Kronecker-Eisenstein lattice
series and the N-variable product series at s = 0.

Normalization (used throughout the package):

    K(p, q; z, L, s) = p! * sum_{w in z + L} conj(w)^q / (w^(p+1) |w|^(2s))

with z not in L.  The sum converges absolutely for 2 Re(s) + p + 1 - q > 2
and continues analytically in s; the central value s = 0 is what the
Dedekind sums and the cocycle consume.

Three independent evaluation routes are provided:

  * ke_direct    -- truncated summation over |z + lambda| <= R with a
                    rigorous polynomial tail radius; convergent range only.
                    Slow; the baseline oracle.
  * ke_rows      -- exact row-by-row closed form (cotangent derivatives and
                    Hurwitz zeta values); integer s >= 0 with q <= s, or
                    q = 0 <= s; convergent range only, but fast at any
                    precision.  Independent of the incomplete-gamma path.
  * ke_accel     -- analytic continuation valid for every real s (s = 0 in
                    particular): a balanced Mellin split of the Gaussian
                    integral plus Poisson summation turns the series into
                    two exponentially convergent sums whose terms involve
                    upper incomplete gamma values and dual-lattice phases
                    e^(2 pi i <z, mu>) with <v, w> = 2 Re(v conj(w)).

The two-sum representation used by ke_accel, with V = covol(L), dual
lattice L~ = {mu : 2 Re(lambda conj(mu)) in Z for all lambda in L},
split point c = pi / V, A = s + p + 1 and m = p + q + 1:

    K = p!/Gamma(A) * [  sum_{w in z+L} conj(w)^m |w|^(-2A) Gamma(A, c|w|^2)
        + pi (-2 pi i)^m / V * sum_{0 != mu in L~} e^(2 pi i <z, mu>)
          conj(mu)^m (4 pi^2 |mu|^2)^(s-q-1) Gamma(q+1-s, 4 pi^2 |mu|^2 / c) ]

Correctness of the constants is enforced by the dual-path agreement tests,
not by trusting the derivation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .errors import (
    OutOfConvergenceRangeError,
    SingularPointError,
    ValidationError,
)
from .field import QuadElem, QuadField, QuadIdeal, embed
from .lattice import OLattice, coordinate_kernel_ideal, coset_reps
from .numerics import (
    BigComplex,
    Tolerance,
    gaussian_tail_radius,
    polynomial_tail_radius,
    to_mpf_exact,
    upper_incomplete_gamma,
    workprec,
)

CONVERGENCE_MARGIN = mpf(1) / 8


class Lattice1D:
    """Lattice Z w1 + Z w2 in C with Im(w2/w1) > 0.

    Either carries exact provenance (a fractional ideal of a supported
    field, embedded at whatever precision is requested) or a fixed numeric
    basis (mpf values are exact binary rationals, so re-use at higher
    precision is lossless)."""

    __slots__ = ("ideal", "_w1", "_w2")

    def __init__(self, w1=None, w2=None, ideal: QuadIdeal | None = None):
        object.__setattr__(self, "ideal", ideal)
        if ideal is None:
            w1, w2 = mpc(w1), mpc(w2)
            if _im_ratio(w1, w2) <= 0:
                w1, w2 = w2, w1
            if _im_ratio(w1, w2) <= 0:
                raise ValidationError("degenerate lattice basis")
            object.__setattr__(self, "_w1", w1)
            object.__setattr__(self, "_w2", w2)
        else:
            object.__setattr__(self, "_w1", None)
            object.__setattr__(self, "_w2", None)

    def __setattr__(self, *a):
        raise AttributeError("Lattice1D is immutable")

    @staticmethod
    def from_ideal(I: QuadIdeal) -> "Lattice1D":
        return Lattice1D(ideal=I)

    def basis(self, prec_bits: int) -> tuple[mpc, mpc]:
        """(w1, w2) at the requested precision, Im(w2/w1) > 0."""
        if self.ideal is None:
            return self._w1, self._w2
        g = self.ideal.gen
        w = g.field.omega()
        w1 = embed(g, prec_bits + 8).to_mpc()
        w2 = embed(g * w, prec_bits + 8).to_mpc()
        return w1, w2

    def covol(self, prec_bits: int) -> mpf:
        w1, w2 = self.basis(prec_bits)
        with workprec(prec_bits + 8):
            return abs((w1.conjugate() * w2).imag)

    def key(self) -> str:
        if self.ideal is not None:
            g = self.ideal.gen
            return f"ideal:d{g.field.d}:{g.a}:{g.b}"
        return f"basis:{_mpc_key(self._w1)}:{_mpc_key(self._w2)}"


def _im_ratio(w1, w2):
    return (w2 / w1).imag


def _mpc_key(z: mpc) -> str:
    return f"{mpmath.nstr(z.real, 40, strip_zeros=False)},{mpmath.nstr(z.imag, 40, strip_zeros=False)}"


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.entries):
            raise ValidationError("multi-index entries must be >= 0")
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def total(self) -> int:
        return sum(self.entries)


@dataclass(frozen=True)
class KEKey:
    """A cacheable series-evaluation request."""

    p: int
    q: int
    z: object  # QuadElem (exact) or mpc
    lat: Lattice1D
    s: object  # int, Fraction or mpf (real)
    prec_bits: int

    def z_mpc(self, prec_bits=None) -> mpc:
        prec = prec_bits or self.prec_bits
        if isinstance(self.z, QuadElem):
            return embed(self.z, prec).to_mpc()
        return mpc(self.z)

    def s_mpf(self) -> mpf:
        return to_mpf_exact(self.s)

    def cache_key(self, eps) -> str:
        if isinstance(self.z, QuadElem):
            zs = f"exact:{self.z.a}:{self.z.b}"
        else:
            zs = "num:" + _mpc_key(mpc(self.z))
        return (
            f"ke|p{self.p}|q{self.q}|{zs}|{self.lat.key()}|s{self.s}"
            f"|prec{self.prec_bits}|eps{mpmath.nstr(Tolerance.of(eps).eps_abs, 8)}"
        )


def lattice_points_in_disk(z: mpc, w1: mpc, w2: mpc, R: mpf):
    """Integer pairs (m, n), sorted deterministically, with
    |z + m w1 + n w2| <= R."""
    out = []
    # |z + m w1 + n w2| >= |Im((z + n w2)/w1)| * |w1| gives the n-range
    h = abs((w2 / w1).imag) * abs(w1)
    t0 = (z / w1).imag / (w2 / w1).imag
    n_lo = int(mpmath.floor(-t0 - R / h)) - 1
    n_hi = int(mpmath.ceil(-t0 + R / h)) + 1
    aa = abs(w1) ** 2
    for n in range(n_lo, n_hi + 1):
        u = z + n * w2
        bb = 2 * (w1.conjugate() * u).real
        cc = abs(u) ** 2 - R * R
        disc = bb * bb - 4 * aa * cc
        if disc < 0:
            continue
        sq = mpmath.sqrt(disc)
        m_lo = int(mpmath.ceil((-bb - sq) / (2 * aa) - mpf("1e-9")))
        m_hi = int(mpmath.floor((-bb + sq) / (2 * aa) + mpf("1e-9")))
        for m in range(m_lo, m_hi + 1):
            if abs(z + m * w1 + n * w2) <= R:
                out.append((m, n))
    out.sort()
    return out


def nearest_lattice_distance(z: mpc, w1: mpc, w2: mpc) -> mpf:
    """Distance from z to the lattice (exactly: min over candidates around
    the rational coordinates of -z)."""
    det = (w1.conjugate() * w2).imag
    # coordinates: z = x w1 + y w2 with x, y real
    y = (w1.conjugate() * z).imag / det
    x = (z / w1).real - y * (w2 / w1).real
    best = None
    for dm in range(-2, 3):
        for dn in range(-2, 3):
            m = int(mpmath.floor(-x)) + dm
            n = int(mpmath.floor(-y)) + dn
            d = abs(z + m * w1 + n * w2)
            if best is None or d < best:
                best = d
    return best


def _check_not_singular(zv: mpc, w1: mpc, w2: mpc, prec_bits: int):
    margin = mpf(2) ** (-(prec_bits // 2))
    if nearest_lattice_distance(zv, w1, w2) < margin:
        raise SingularPointError("z is within the singularity margin of a lattice point")


def ke_direct(key: KEKey, eps) -> BigComplex:
    """Truncated direct summation in the absolutely convergent range."""
    eps = Tolerance.of(eps)
    p, q = key.p, key.q
    s = key.s_mpf()
    t_power = 2 * s + p + 1 - q
    if not t_power > 2 + CONVERGENCE_MARGIN:
        raise OutOfConvergenceRangeError(
            f"direct sum needs 2s+p+1-q > 2 (+margin); got {t_power}"
        )
    prec_work = key.prec_bits + 64
    with workprec(prec_work):
        eps.check_against(key.prec_bits)
        w1, w2 = key.lat.basis(prec_work)
        V = key.lat.covol(prec_work)
        zv = key.z_mpc(prec_work)
        _check_not_singular(zv, w1, w2, key.prec_bits)
        fac = mpmath.factorial(p)
        R = polynomial_tail_radius(t_power, V, eps.eps_abs / (4 * fac), prec_work)
        pts = lattice_points_in_disk(zv, w1, w2, R)
        s_int = int(s) if s == int(s) else None
        total = mpc(0)
        absum = mpf(0)
        for (m, n) in pts:
            w = zv + m * w1 + n * w2
            wc = w.conjugate()
            w2abs = (w * wc).real
            num = wc**q
            den = w ** (p + 1)
            if s_int is not None:
                den *= w2abs**s_int
            else:
                den *= mpmath.exp(s * mpmath.log(w2abs))
            term = num / den
            total += term
            absum += abs(term)
        total *= fac
        absum *= fac
        tail = eps.eps_abs / 4
        rnd = absum * mpf(2) ** (-prec_work + 8)
        err = tail + rnd
    return BigComplex(total.real, total.imag, key.prec_bits, err)


# ---------------------------------------------------------------------------
# closed-form row evaluation (cotangent derivatives + Hurwitz zeta)

_COT_POLYS: list[list[int]] = [[0, 1]]  # P_0(c) = c; d^k/dx^k cot(pi x) = pi^k P_k(c)


def _cot_poly(k: int) -> list[int]:
    while len(_COT_POLYS) <= k:
        P = _COT_POLYS[-1]
        dP = [i * P[i] for i in range(1, len(P))]
        # P_{k+1} = -(1 + c^2) P_k'
        nxt = [0] * (len(dP) + 2)
        for i, a in enumerate(dP):
            nxt[i] -= a
            nxt[i + 2] -= a
        _COT_POLYS.append(nxt)
    return _COT_POLYS[k]


def _poly_eval(coeffs: list[int], x: mpc) -> mpc:
    r = mpc(0)
    for a in reversed(coeffs):
        r = r * x + a
    return r


def _cot_pi(x: mpc) -> mpc:
    E = mpmath.exp(2j * mpmath.pi * x)
    return 1j * (E + 1) / (E - 1)


def _sum_inv_powers(j: int, cot: mpc) -> mpc:
    """S_j = sum_{m in Z} (m + x)^(-j), j >= 2, given cot(pi x)."""
    return (-1) ** (j - 1) * mpmath.pi**j * _poly_eval(_cot_poly(j - 1), cot) / mpmath.factorial(j - 1)


def ke_rows(key: KEKey, eps) -> BigComplex:
    """Exact convergent-range evaluation by summing each horizontal lattice
    row in closed form; integer s >= max(q, 0) required."""
    eps = Tolerance.of(eps)
    p, q = key.p, key.q
    s = key.s_mpf()
    if s != int(s) or int(s) < 0:
        raise OutOfConvergenceRangeError("ke_rows requires integer s >= 0")
    si = int(s)
    a = p + 1 + si
    b = si - q
    if b < 0:
        raise OutOfConvergenceRangeError("ke_rows requires q <= s")
    if a + b < 3:
        raise OutOfConvergenceRangeError("ke_rows requires p+1+2s-q >= 3")
    prec_work = key.prec_bits + 96
    with workprec(prec_work):
        eps.check_against(key.prec_bits)
        w1, w2 = key.lat.basis(prec_work)
        zv = key.z_mpc(prec_work)
        _check_not_singular(zv, w1, w2, key.prec_bits)
        tau = w2 / w1
        beta1 = tau.imag
        beta0 = (zv / w1).imag
        lneps = -mpmath.log(eps.eps_abs)
        N0 = int(mpmath.ceil((lneps + 40) / (2 * mpmath.pi * beta1))) + 2
        N0 = max(N0, int(mpmath.ceil(abs(beta0 / beta1))) + 3, 6)
        total = mpc(0)
        for n in range(-N0, N0 + 1):
            v = (zv + n * w2) / w1
            total += _row_sum(v, a, b, prec_work)
        if b >= 1:
            total += _row_tails(a, b, beta0, beta1, N0)
        pref = mpmath.factorial(p) * w1.conjugate() ** (-b) * w1 ** (-a)
        total *= pref
        err = eps.eps_abs / 8 + abs(total) * mpf(2) ** (-key.prec_bits - 16)
    return BigComplex(total.real, total.imag, key.prec_bits, err)


def _row_sum(v: mpc, a: int, b: int, prec_work: int) -> mpc:
    """sum_{m in Z} (v + m)^(-a) (conj(v) + m)^(-b), exact closed form."""
    if b == 0:
        return _sum_inv_powers(a, _cot_pi(v))
    D = v.conjugate() - v  # -2i Im(v)
    if D == 0:
        return _sum_inv_powers(a + b, _cot_pi(v))
    lostbits = max(0, int(-mpmath.log(abs(D), 2)) + 1) * (a + b)
    if lostbits > 8:
        with workprec(prec_work + lostbits + 16):
            return +_row_sum_core(mpc(v), a, b)
    return _row_sum_core(v, a, b)


def _row_sum_core(v: mpc, a: int, b: int) -> mpc:
    D = v.conjugate() - v
    vb = v.conjugate()
    cot_v = _cot_pi(v)
    cot_vb = _cot_pi(vb)
    total = mpc(0)
    # A_{a-k} = (-1)^k C(b+k-1, k) D^(-(b+k)), poles at -v
    for k in range(a):
        j = a - k
        coeff = (-1) ** k * math.comb(b + k - 1, k) * D ** (-(b + k))
        if j >= 2:
            total += coeff * _sum_inv_powers(j, cot_v)
        else:
            total += coeff * mpmath.pi * (cot_v - cot_vb)  # A1 = -B1
    for k in range(b):
        j = b - k
        coeff = (-1) ** k * math.comb(a + k - 1, k) * (-D) ** (-(a + k))
        if j >= 2:
            total += coeff * _sum_inv_powers(j, cot_vb)
        # j == 1 already accounted for via A1 = -B1
    return total


def _row_tails(a: int, b: int, beta0: mpf, beta1: mpf, N0: int) -> mpc:
    """sum over |n| > N0 of the limiting rational row value, via Hurwitz
    zeta (the exponentially small corrections are below the error budget)."""
    Mp = a + b - 1
    binc = math.comb(a + b - 2, a - 1)
    base = 2 * mpmath.pi * 1j * (-1) ** (a - 1) * binc * beta1 ** (-Mp)
    zp = mpmath.zeta(Mp, N0 + 1 + beta0 / beta1)
    zm = mpmath.zeta(Mp, N0 + 1 - beta0 / beta1)
    tail_plus = -base * (-2j) ** (-Mp) * zp
    tail_minus = base * (2j) ** (-Mp) * zm
    return tail_plus + tail_minus


# ---------------------------------------------------------------------------
# accelerated evaluation (incomplete gamma + Poisson)


def _dual_basis(w1: mpc, w2: mpc) -> tuple[mpc, mpc]:
    """Basis of {mu : 2 Re(w_i conj(mu)) in Z}."""
    g11 = 2 * (w1 * w1.conjugate()).real
    g12 = 2 * (w1 * w2.conjugate()).real
    g22 = 2 * (w2 * w2.conjugate()).real
    det = g11 * g22 - g12 * g12
    # columns of G^{-1}
    m1 = (g22 * w1 - g12 * w2) / det
    m2 = (-g12 * w1 + g11 * w2) / det
    return m1, m2


def ke_accel(key: KEKey, eps, cache=None) -> BigComplex:
    """Analytic continuation via the two exponentially convergent sums."""
    eps_t = Tolerance.of(eps)
    if cache is not None:
        hit = cache.lookup(key.cache_key(eps_t.eps_abs), key.prec_bits, eps_t.eps_abs)
        if hit is not None:
            return hit
    res = ke_accel_batch(
        key.z, key.lat, key.s, [(key.p, key.q)], eps_t, key.prec_bits
    )[(key.p, key.q)]
    if cache is not None:
        cache.store(key.cache_key(eps_t.eps_abs), res)
    return res


def ke_accel_batch(
    z, lat: Lattice1D, s, pq_pairs, eps, prec_bits: int, radius_factor=1
) -> dict:
    """Evaluate several (p, q) pairs sharing one lattice enumeration.

    The dominant cost (exponentials at each lattice and dual-lattice point)
    is paid once; the per-pair work is polynomial bookkeeping."""
    eps = Tolerance.of(eps)
    pairs = sorted(set((int(p), int(q)) for p, q in pq_pairs))
    s_val = to_mpf_exact(s)
    max_m = max(p + q + 1 for p, q in pairs)
    prec_work = prec_bits + 64 + 4 * max_m
    out = {}
    with workprec(prec_work):
        eps.check_against(prec_bits)
        w1, w2 = lat.basis(prec_work)
        V = abs((w1.conjugate() * w2).imag)
        if isinstance(z, QuadElem):
            zv = embed(z, prec_work).to_mpc()
        else:
            zv = mpc(z)
        _check_not_singular(zv, w1, w2, prec_bits)
        c = mpmath.pi / V
        tpi2 = 4 * mpmath.pi**2
        int_s = s_val == int(s_val)
        budget = eps.eps_abs / 8

        # radii: primal terms are bounded by 2 c^(A-1) |w|^(m-2) e^(-c|w|^2)
        # once c|w|^2 >= 2A+2; dual terms analogously on the dual lattice.
        R1 = mpf(0)
        R2 = mpf(0)
        info = {}
        for (p, q) in pairs:
            A = s_val + p + 1
            m = p + q + 1
            fac = mpmath.factorial(p) / mpmath.gamma(A)
            info[(p, q)] = (A, m, fac)
            deg = max(m - 2, 0)
            coef_primal = abs(fac) * 2 * c ** (A - 1)
            Rp = gaussian_tail_radius(c, V, budget / coef_primal, deg, prec_bits)
            Rp = max(Rp, mpmath.sqrt((2 * A + 2) / c))
            coef_dual = (
                abs(fac) * 2 * mpmath.pi * (2 * mpmath.pi) ** m / (V * tpi2) * c ** (s_val - q)
            )
            Rd = gaussian_tail_radius(tpi2 / c, 1 / (4 * V), budget / coef_dual, deg, prec_bits)
            Rd = max(Rd, mpmath.sqrt((2 * abs(s_val - q - 1) + 4) * c / tpi2))
            R1 = max(R1, Rp)
            R2 = max(R2, Rd)
        R1 *= radius_factor
        R2 *= radius_factor

        m1, m2 = _dual_basis(w1, w2)
        if int_s and int(s_val) >= 0:
            from . import _fastsum

            si = int(s_val)
            P = prec_work
            prim = _fastsum.primal_sums(zv, w1, w2, R1, c, pairs, si, P)
            dual = _fastsum.dual_sums(zv, m1, m2, R2, c, pairs, si, P)
            for (p, q) in pairs:
                A, m, fac = info[(p, q)]
                dual_pref = mpmath.pi * (-2j * mpmath.pi) ** m / V
                tr, ti, ab = prim[(p, q)]
                dr, di, dab = dual[(p, q)]
                tot = (mpc(tr, ti) + dual_pref * mpc(dr, di)) * fac
                absum = (ab + abs(dual_pref) * dab) * abs(fac)
                err = eps.eps_abs / 4 + (absum + 1) * mpf(2) ** (-prec_work + 16)
                out[(p, q)] = BigComplex(tot.real, tot.imag, prec_bits, err)
            return out

        primal_pts = lattice_points_in_disk(zv, w1, w2, R1)
        dual_pts = lattice_points_in_disk(mpc(0), m1, m2, R2)

        totals = {pq: mpc(0) for pq in pairs}
        absums = {pq: mpf(0) for pq in pairs}
        for (mm, nn) in primal_pts:
            w = zv + mm * w1 + nn * w2
            x2 = (w * w.conjugate()).real
            x = c * x2
            emx = mpmath.exp(-x)
            wc_pows = _powers(w.conjugate(), max_m)
            for (p, q) in pairs:
                A, m, fac = info[(p, q)]
                if int_s:
                    g = _upper_gamma_int(int(A), x, emx)
                    t = wc_pows[m] * g / x2 ** int(A)
                else:
                    g = mpmath.gammainc(A, x, mpmath.inf)
                    t = wc_pows[m] * g * x2 ** (-A)
                totals[(p, q)] += t
                absums[(p, q)] += abs(t)
        for (mm, nn) in dual_pts:
            if mm == 0 and nn == 0:
                continue
            mu = mm * m1 + nn * m2
            mu2 = (mu * mu.conjugate()).real
            xd = tpi2 * mu2 / c
            emx = mpmath.exp(-xd)
            phase = mpmath.expjpi(4 * (zv * mu.conjugate()).real)
            muc_pows = _powers(mu.conjugate(), max_m)
            for (p, q) in pairs:
                A, m, fac = info[(p, q)]
                aa = q + 1 - s_val
                if int_s:
                    g = _upper_gamma_int(int(aa), xd, emx)
                    scale = (tpi2 * mu2) ** (int(s_val) - q - 1)
                else:
                    g = mpmath.gammainc(aa, xd, mpmath.inf)
                    scale = (tpi2 * mu2) ** (s_val - q - 1)
                t = phase * muc_pows[m] * scale * g
                dual_pref = mpmath.pi * (-2j * mpmath.pi) ** m / V
                totals[(p, q)] += dual_pref * t
                absums[(p, q)] += abs(dual_pref) * abs(t)
        for (p, q) in pairs:
            A, m, fac = info[(p, q)]
            tot = totals[(p, q)] * fac
            err = eps.eps_abs / 4 + absums[(p, q)] * abs(fac) * mpf(2) ** (-prec_work + 10)
            out[(p, q)] = BigComplex(tot.real, tot.imag, prec_bits, err)
    return out


def _powers(base: mpc, n: int) -> list[mpc]:
    out = [mpc(1)]
    for _ in range(n):
        out.append(out[-1] * base)
    return out


def _upper_gamma_int(a: int, x: mpf, emx: mpf) -> mpf:
    """Gamma(a, x) for integer a (any sign), given e^(-x)."""
    if a >= 1:
        ssum = mpf(1)
        term = mpf(1)
        for k in range(1, a):
            term = term * x / k
            ssum += term
        return mpmath.factorial(a - 1) * emx * ssum
    g = mpmath.e1(x)
    for b in range(0, a, -1):
        g = (g - x ** (b - 1) * emx) / (b - 1)
    return g


# ---------------------------------------------------------------------------
# N-variable product series at s = 0


def ke_product(
    z: list,
    Lam: OLattice,
    I: MultiIndex,
    J: MultiIndex,
    eps,
    prec_bits: int,
    cs: list[QuadElem] | None = None,
    cache=None,
) -> BigComplex:
    """K^{I,J}(z, Lambda, 0) via the coset decomposition over a diagonal
    sublattice c_1 O + ... + c_N O contained in Lambda.

    z must be a vector of exact field elements (general position and
    singularity checks are exact); the value does not depend on the choice
    of the c_k."""
    eps = Tolerance.of(eps)
    F = Lam.field
    N = Lam.n
    if len(z) != N or len(I) != N or len(J) != N:
        raise ValidationError("dimension mismatch")
    if not all(isinstance(x, QuadElem) for x in z):
        raise ValidationError("ke_product requires exact coordinates")
    if cs is None:
        cs = [coordinate_kernel_ideal(Lam, k).gen for k in range(N)]
    else:
        for k, c in enumerate(cs):
            ek = [F.one() if i == k else F.zero() for i in range(N)]
            if not Lam.contains([c * x for x in ek]):
                raise ValidationError(f"c_{k} e_{k} not in the lattice")
    sub = OLattice.from_o_generators(
        F, N, [[cs[k] if i == k else F.zero() for i in range(N)] for k in range(N)]
    )
    reps = coset_reps(sub, Lam)
    lats = [Lattice1D.from_ideal(QuadIdeal(cs[k])) for k in range(N)]
    # exact singularity pre-check on every shifted coordinate
    for rep in reps:
        for k in range(N):
            zz = z[k] + rep[k]
            if (zz / cs[k]).is_integral():
                raise SingularPointError(
                    f"coordinate {k} of z + rep lies on the lattice (hyperplane violation)"
                )
    eps_term = Tolerance(eps.eps_abs / (8 * len(reps) * N))
    retry = 0
    while True:
        total = BigComplex(0, 0, prec_bits)
        for rep in reps:
            factor = None
            for k in range(N):
                key = KEKey(I[k], J[k], z[k] + rep[k], lats[k], 0, prec_bits)
                val = ke_accel(key, eps_term, cache=cache)
                factor = val if factor is None else factor * val
            total = total + factor
        if total.err_abs <= eps.eps_abs or retry >= 2:
            break
        retry += 1
        eps_term = Tolerance(eps_term.eps_abs / 64)
    return total
