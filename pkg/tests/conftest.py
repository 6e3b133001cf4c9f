import random
from fractions import Fraction

import pytest
from mpmath import mpf

from ekzeta.field import QuadField, QuadIdeal
from ekzeta.extension import ExtField, LIdeal
from ekzeta.lattice import GroupElement, OLattice


@pytest.fixture(scope="session")
def K():
    return QuadField(-1)


@pytest.fixture(scope="session")
def zeta8_field(K):
    """L = Q(zeta_8) over Q(i): g = x^2 - i, power integral basis."""
    g = [K.elem(0, -1), K.zero(), K.one()]
    return ExtField(
        K,
        g,
        [[K.one(), K.zero()], [K.zero(), K.one()]],
        [
            [[K.one(), K.zero()], [K.zero(), K.one()]],
            [[K.zero(), K.one()], [K.elem(0, 1), K.zero()]],
        ],
    )


@pytest.fixture(scope="session")
def zeta8_fixture(K, zeta8_field):
    """The golden arithmetic data: f = ((zeta8-1)^3), the norm-one unit
    3+2*sqrt(2) congruent to 1 mod f, unit index 2."""
    F = zeta8_field
    th = F.theta_vec()
    one = F.one_vec()
    u = [K.one(), K.elem(1, -1)]  # 1 + sqrt2
    u2 = F.mul(u, u)  # 3 + 2 sqrt2
    pi2 = [a - b for a, b in zip(th, one)]
    f_gen = F.mul(F.mul(pi2, pi2), pi2)
    fid = LIdeal.principal(F, f_gen)
    return {
        "F": F,
        "theta": th,
        "one": one,
        "u": u,
        "u2": u2,
        "f_gen": f_gen,
        "f": fid,
        "a": LIdeal.ring(F),
        "unit_index": 2,
    }


def random_gamma(F, pid, n, rng, steps=2):
    g = [[F.one() if i == j else F.zero() for j in range(n)] for i in range(n)]

    def matmul(a, b):
        return [
            [sum((a[i][t] * b[t][j] for t in range(n)), F.zero()) for j in range(n)]
            for i in range(n)
        ]

    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        x = F.elem(rng.randint(-1, 1), rng.randint(-1, 1))
        if j == 0 and i > 0:
            x = x * pid.gen
        e = [[F.one() if a == b else F.zero() for b in range(n)] for a in range(n)]
        e[i][j] = x
        g = matmul(g, e)
    return GroupElement(g)


def random_tuple(F, pid, n, count, rng, det_bound=25):
    import itertools

    from ekzeta.cocycle import columns_matrix
    from ekzeta.lattice import det_quad

    while True:
        gs = [random_gamma(F, pid, n, rng) for _ in range(count)]
        ok = True
        for sub in itertools.combinations(gs, n):
            A = columns_matrix(list(sub))
            d = det_quad(A)
            if not d.is_zero() and abs(d.norm()) > det_bound:
                ok = False
                break
        if ok:
            return gs


def random_z(F, n, rng):
    return [
        F.elem(
            Fraction(rng.randint(-3, 3), rng.choice([5, 7, 11])),
            Fraction(rng.randint(-3, 3), rng.choice([5, 7, 11])),
        )
        for _ in range(n)
    ]
