"""Fixed-point inner loops for the accelerated lattice sums.

The per-point work of the two exponentially convergent sums is done on
python integers scaled by 2^P (fixed point).  Gaussian weights come from
row recurrences: the exponent is quadratic in the column index, so the
ratio of consecutive ratios is a constant; marching OUTWARD from the
minimum-norm point of each row keeps every multiplier at most slightly
above 1, so truncation error stays at the 2^-P level instead of being
amplified across the row.  Dual-sum phases are maintained as running
unit-circle products seeded by two complex exponentials per batch.

Only integer s >= 0 is handled here (s = 0 is the production case); the
caller falls back to the plain mpmath path otherwise.
"""

from __future__ import annotations

import math

import mpmath
from mpmath import mp, mpc, mpf
from mpmath.libmp import from_man_exp, to_fixed


def _fix(x, P: int) -> int:
    return to_fixed(mpf(x)._mpf_, P)


def _unfix(x: int, P: int) -> mpf:
    return mpf(from_man_exp(x, -P))


def _cmul(ar, ai, br, bi, P):
    return (ar * br - ai * bi) >> P, (ar * bi + ai * br) >> P


def _exp_fix(x_fix: int, P: int) -> int:
    with mp.workprec(P + 10):
        return _fix(mpmath.exp(_unfix(x_fix, P)), P)


def _rows_for_disk(z: mpc, w1: mpc, w2: mpc, R: mpf):
    """Rows (n, m_lo, m_hi) of {(m, n) : |z + m w1 + n w2| <= R}."""
    rows = []
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
        if m_lo <= m_hi:
            rows.append((n, m_lo, m_hi))
    return rows


class _RowMarch:
    """Iterates a disk row outward from its minimum-norm column, yielding
    (w_re, w_im, x2, gauss) in fixed point, where gauss = e^(-k x2)."""

    def __init__(self, u_r, u_i, w1r, w1i, m_lo, m_hi, k_fix, rho, P):
        self.P = P
        self.w1r, self.w1i = w1r, w1i
        self.w1n2 = (w1r * w1r + w1i * w1i) >> P
        self.k = k_fix
        self.rho = rho
        self.m_lo, self.m_hi = m_lo, m_hi
        # vertex of x2(m) = |u + m w1|^2 at m* = -Re(u conj(w1))/|w1|^2
        # (integer floor division: being one step off the true vertex only
        # costs a bounded constant factor in the first ratio)
        num = (u_r * w1r + u_i * w1i) >> P
        mstar = -(num // self.w1n2) if self.w1n2 > 0 else 0
        m_mid = int(min(max(mstar, m_lo), m_hi))
        self.m_mid = m_mid
        wr = u_r + m_mid * w1r
        wi = u_i + m_mid * w1i
        x2 = (wr * wr + wi * wi) >> P
        t = (2 * (wr * w1r + wi * w1i)) >> P
        self.start = (wr, wi, x2, t)
        self.g_mid = _exp_fix(-((k_fix * x2) >> P), P)

    def upward(self):
        P = self.P
        wr, wi, x2, t = self.start
        g = self.g_mid
        r = _exp_fix(-((self.k * (t + self.w1n2)) >> P), P)
        for m in range(self.m_mid, self.m_hi + 1):
            yield m, wr, wi, x2, g
            x2 = x2 + t + self.w1n2
            t = t + 2 * self.w1n2
            wr += self.w1r
            wi += self.w1i
            g = (g * r) >> P
            r = (r * self.rho) >> P

    def downward(self):
        P = self.P
        wr, wi, x2, t = self.start
        rd = _exp_fix(((self.k * (t - self.w1n2)) >> P), P)
        g = self.g_mid
        for m in range(self.m_mid - 1, self.m_lo - 1, -1):
            g = (g * rd) >> P
            rd = (rd * self.rho) >> P
            x2 = x2 - t + self.w1n2
            t = t - 2 * self.w1n2
            wr -= self.w1r
            wi -= self.w1i
            yield m, wr, wi, x2, g


def _conj_powers(wr, wi, max_m, P):
    one = 1 << P
    pow_r = [one]
    pow_i = [0]
    ar, ai = one, 0
    cr, ci = wr, -wi
    for _ in range(max_m):
        ar, ai = _cmul(ar, ai, cr, ci, P)
        pow_r.append(ar)
        pow_i.append(ai)
    return pow_r, pow_i


def primal_sums(zv, w1, w2, R, c, pairs, s_int, P):
    """dict pair -> (re, im, abssum) of
    sum_{|z+mw1+nw2|<=R} conj(w)^(p+q+1) Gamma(s+p+1, c|w|^2) / |w|^(2(s+p+1))."""
    rows = _rows_for_disk(zv, w1, w2, R)
    max_m = max(p + q + 1 for p, q in pairs)
    A_of = {pq: s_int + pq[0] + 1 for pq in pairs}
    fact = [math.factorial(k) for k in range(max(A_of.values()) + 1)]
    one = 1 << P
    w1r, w1i = _fix(w1.real, P), _fix(w1.imag, P)
    w2r, w2i = _fix(w2.real, P), _fix(w2.imag, P)
    zr, zi = _fix(zv.real, P), _fix(zv.imag, P)
    c_fix = _fix(c, P)
    w1n2 = (w1r * w1r + w1i * w1i) >> P
    rho = _exp_fix(-((2 * c_fix * w1n2) >> P), P)
    totals = {pq: [0, 0, 0] for pq in pairs}

    def add_point(wr, wi, x2, g):
        if x2 <= 0:
            return
        x2inv = (one << P) // x2
        xinv = (x2inv << P) // c_fix
        pow_r, pow_i = _conj_powers(wr, wi, max_m, P)
        for pq in pairs:
            A = A_of[pq]
            mdeg = pq[0] + pq[1] + 1
            acc = 0
            xp = xinv
            for j in range(1, A + 1):
                acc += xp // fact[A - j]
                if j < A:
                    xp = (xp * xinv) >> P
            gg = (g * acc) >> P
            val = fact[A - 1] * gg
            tr = (pow_r[mdeg] * val) >> P
            ti = (pow_i[mdeg] * val) >> P
            tot = totals[pq]
            tot[0] += tr
            tot[1] += ti
            tot[2] += abs(tr) + abs(ti)

    for (n, m_lo, m_hi) in rows:
        u_r = zr + n * w2r
        u_i = zi + n * w2i
        march = _RowMarch(u_r, u_i, w1r, w1i, m_lo, m_hi, c_fix, rho, P)
        for m, wr, wi, x2, g in march.upward():
            add_point(wr, wi, x2, g)
        for m, wr, wi, x2, g in march.downward():
            add_point(wr, wi, x2, g)
    out = {}
    with mp.workprec(P + 10):
        for pq in pairs:
            A = A_of[pq]
            cA = mpf(c) ** A
            out[pq] = (
                _unfix(totals[pq][0], P) * cA,
                _unfix(totals[pq][1], P) * cA,
                _unfix(totals[pq][2], P) * cA,
            )
    return out


def dual_sums(zv, m1, m2, R, c, pairs, s_int, P):
    """dict pair -> (re, im, abssum) of
    sum_{0 != mu, |mu|<=R} e^(2 pi i <z,mu>) conj(mu)^(p+q+1)
        (4 pi^2 |mu|^2)^(s-q-1) Gamma(q+1-s, 4 pi^2 |mu|^2 / c)."""
    rows = _rows_for_disk(mpc(0), m1, m2, R)
    max_m = max(p + q + 1 for p, q in pairs)
    one = 1 << P
    with mp.workprec(P + 10):
        tpi2 = 4 * mpmath.pi**2
        k_fix = _fix(tpi2 / c, P)
        tpi2_fix = _fix(tpi2, P)
        E = []
        for mu in (m1, m2):
            ph = mpmath.expjpi(4 * (zv * mu.conjugate()).real)
            E.append((_fix(ph.real, P), _fix(ph.imag, P)))
    m1r, m1i = _fix(m1.real, P), _fix(m1.imag, P)
    m2r, m2i = _fix(m2.real, P), _fix(m2.imag, P)
    m1n2 = (m1r * m1r + m1i * m1i) >> P
    rho = _exp_fix(-((2 * k_fix * m1n2) >> P), P)
    totals = {pq: [0, 0, 0] for pq in pairs}
    needs_e1 = any(pq[1] + 1 - s_int <= 0 for pq in pairs)

    def add_point(m, n, wr, wi, x2, g, phr, phi):
        if m == 0 and n == 0:
            return
        x2d = (tpi2_fix * x2) >> P
        if x2d <= 0:
            return
        x2dinv = (one << P) // x2d
        xd = (k_fix * x2) >> P
        pow_r, pow_i = _conj_powers(wr, wi, max_m, P)
        if needs_e1:
            with mp.workprec(P + 10):
                e1val = _fix(mpmath.e1(_unfix(xd, P)), P) if xd > 0 else 0
        else:
            e1val = 0
        for pq in pairs:
            q = pq[1]
            mdeg = pq[0] + q + 1
            gam = _gamma_int_fix(q + 1 - s_int, xd, g, e1val, P)
            e = s_int - q - 1
            sc = _ipow_fix(x2d if e >= 0 else x2dinv, abs(e), P)
            val = (gam * sc) >> P
            tr, ti = _cmul(pow_r[mdeg], pow_i[mdeg], phr, phi, P)
            tr = (tr * val) >> P
            ti = (ti * val) >> P
            tot = totals[pq]
            tot[0] += tr
            tot[1] += ti
            tot[2] += abs(tr) + abs(ti)

    for (n, m_lo, m_hi) in rows:
        u_r = n * m2r
        u_i = n * m2i
        march = _RowMarch(u_r, u_i, m1r, m1i, m_lo, m_hi, k_fix, rho, P)
        ph2 = _cpow(E[1], n, P)
        ph_mid = _cmul(*_cpow(E[0], march.m_mid, P), *ph2, P)
        phr, phi = ph_mid
        for m, wr, wi, x2, g in march.upward():
            add_point(m, n, wr, wi, x2, g, phr, phi)
            phr, phi = _cmul(phr, phi, E[0][0], E[0][1], P)
        phr, phi = ph_mid
        E0c = (E[0][0], -E[0][1])
        for m, wr, wi, x2, g in march.downward():
            phr, phi = _cmul(phr, phi, E0c[0], E0c[1], P)
            add_point(m, n, wr, wi, x2, g, phr, phi)
    return {
        pq: (
            _unfix(t[0], P),
            _unfix(t[1], P),
            _unfix(t[2], P),
        )
        for pq, t in totals.items()
    }


def _cpow(base, k: int, P: int):
    br, bi = base
    if k < 0:
        br, bi = br, -bi
        k = -k
    rr, ri = 1 << P, 0
    while k:
        if k & 1:
            rr, ri = _cmul(rr, ri, br, bi, P)
        k >>= 1
        if k:
            br, bi = _cmul(br, bi, br, bi, P)
    return rr, ri


def _ipow_fix(x: int, k: int, P: int) -> int:
    r = 1 << P
    while k:
        if k & 1:
            r = (r * x) >> P
        k >>= 1
        if k:
            x = (x * x) >> P
    return r


def _gamma_int_fix(a: int, x_fix: int, emx_fix: int, e1_fix: int, P: int) -> int:
    """Gamma(a, x) in fixed point, given e^-x (and E1(x) when a <= 0)."""
    one = 1 << P
    if a >= 1:
        ssum = one
        term = one
        for k in range(1, a):
            term = ((term * x_fix) >> P) // k
            ssum += term
        return math.factorial(a - 1) * ((emx_fix * ssum) >> P)
    g = e1_fix
    xinv = (one << P) // x_fix if x_fix else 0
    for b in range(0, a, -1):
        xp = _ipow_fix(xinv, 1 - b, P)
        g = (g - ((xp * emx_fix) >> P)) // (b - 1)
    return g
