import random
import time
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from ekzeta.cache import EvalCache
from ekzeta.errors import (
    OutOfConvergenceRangeError,
    SingularPointError,
    ValidationError,
)
from ekzeta.field import QuadField, QuadIdeal
from ekzeta.kronecker import (
    KEKey,
    Lattice1D,
    MultiIndex,
    ke_accel,
    ke_accel_batch,
    ke_direct,
    ke_product,
    ke_rows,
    nearest_lattice_distance,
)
from ekzeta.lattice import apply_matrix, lambda_of_ideal
from ekzeta.numerics import workprec


@pytest.fixture(scope="module")
def zi(K):
    return Lattice1D.from_ideal(QuadIdeal(K.one()))


def rand_z(rng, prec=256):
    with workprec(prec):
        return mpc(mpf(rng.uniform(-0.5, 0.5)), mpf(rng.uniform(-0.5, 0.5)))


class TestDirect:
    def test_symmetry_zero(self, K, zi):
        key = KEKey(2, 0, K.elem(Fraction(1, 2)), zi, 0, 128)
        v = ke_direct(key, mpf("1e-6"))
        assert abs(v.to_mpc()) < mpf("1e-6")

    def test_stability_under_tightening(self, zi):
        with workprec(192):
            z = mpc("0.25", "0.125")
        v1 = ke_direct(KEKey(0, 0, z, zi, 2, 128), mpf("1e-6"))
        v2 = ke_direct(KEKey(0, 0, z, zi, 2, 128), mpf("1e-8"))
        assert abs(v1.to_mpc() - v2.to_mpc()) < mpf("1e-6")

    def test_translation(self, zi):
        with workprec(192):
            z = mpc("0.21", "0.37")
        v1 = ke_direct(KEKey(3, 0, z, zi, 2, 128), mpf("1e-7"))
        v2 = ke_direct(KEKey(3, 0, z + 2 + 1j, zi, 2, 128), mpf("1e-7"))
        assert abs(v1.to_mpc() - v2.to_mpc()) < mpf("3e-7")

    def test_out_of_range(self, zi):
        with pytest.raises(OutOfConvergenceRangeError):
            ke_direct(KEKey(0, 1, mpc(0.3, 0.1), zi, 0, 128), mpf("1e-6"))

    def test_singular_z(self, zi):
        with pytest.raises(SingularPointError):
            ke_direct(KEKey(2, 0, mpc(1, 1), zi, 0, 128), mpf("1e-6"))


class TestRows:
    def test_matches_direct(self, zi):
        rng = random.Random(5)
        for (p, q, s) in [(2, 0, 2), (3, 1, 2), (2, 0, 0)]:
            z = rand_z(rng, 192)
            vd = ke_direct(KEKey(p, q, z, zi, s, 160), mpf("1e-8"))
            vr = ke_rows(KEKey(p, q, z, zi, s, 192), mpf("1e-30"))
            assert abs(vd.to_mpc() - vr.to_mpc()) < mpf("1e-7")

    def test_nonsquare_lattice(self, K):
        lat = Lattice1D.from_ideal(QuadIdeal(K.elem(2, 1)))
        rng = random.Random(6)
        z = rand_z(rng, 192)
        vd = ke_direct(KEKey(2, 0, z, lat, 2, 160), mpf("1e-8"))
        vr = ke_rows(KEKey(2, 0, z, lat, 2, 192), mpf("1e-30"))
        assert abs(vd.to_mpc() - vr.to_mpc()) < mpf("1e-7")

    def test_real_axis_z(self, K, zi):
        # pole-collision path: exactly real evaluation point
        v = ke_rows(KEKey(2, 0, K.elem(Fraction(1, 2)), zi, 0, 192), mpf("1e-30"))
        assert abs(v.to_mpc()) < mpf("1e-29")

    def test_requires_integer_s(self, zi):
        with pytest.raises(OutOfConvergenceRangeError):
            ke_rows(KEKey(2, 0, mpc(0.3, 0.2), zi, mpf("2.5"), 128), mpf("1e-8"))
        with pytest.raises(OutOfConvergenceRangeError):
            ke_rows(KEKey(2, 3, mpc(0.3, 0.2), zi, 2, 128), mpf("1e-8"))


class TestAccel:
    def test_dual_path_vs_rows(self, zi):
        rng = random.Random(7)
        for (p, q) in [(2, 0), (3, 0), (3, 1), (4, 2)]:
            z = rand_z(rng)
            va = ke_accel(KEKey(p, q, z, zi, 2, 256), mpf("1e-30"))
            vr = ke_rows(KEKey(p, q, z, zi, 2, 256), mpf("1e-40"))
            assert abs(va.to_mpc() - vr.to_mpc()) < mpf("1e-29")

    def test_dual_path_vs_direct(self, zi):
        rng = random.Random(8)
        z = rand_z(rng, 192)
        va = ke_accel(KEKey(3, 0, z, zi, 2, 192), mpf("1e-20"))
        vd = ke_direct(KEKey(3, 0, z, zi, 2, 160), mpf("1e-8"))
        assert abs(va.to_mpc() - vd.to_mpc()) < mpf("1e-7")

    def test_s_zero_symmetry(self, K, zi):
        v = ke_accel(KEKey(2, 0, K.elem(Fraction(1, 2)), zi, 0, 256), mpf("1e-30"))
        assert abs(v.to_mpc()) < mpf("1e-29")

    def test_continuation_consistency(self, zi):
        # s in the convergent range, including non-integer s
        rng = random.Random(9)
        z = rand_z(rng, 192)
        for s in (2, mpf("2.5"), 3):
            va = ke_accel(KEKey(3, 0, z, zi, s, 192), mpf("1e-18"))
            vd = ke_direct(KEKey(3, 0, z, zi, s, 160), mpf("1e-7"))
            assert abs(va.to_mpc() - vd.to_mpc()) < mpf("1e-6"), s

    def test_rotation_covariance(self, zi):
        rng = random.Random(10)
        z = rand_z(rng)
        p, q, s = 3, 1, 0
        vz = ke_accel(KEKey(p, q, z, zi, s, 256), mpf("1e-30"))
        viz = ke_accel(KEKey(p, q, 1j * z, zi, s, 256), mpf("1e-30"))
        with workprec(280):
            pred = mpc(0, -1) ** q * mpc(0, 1) ** (-(p + 1)) * vz.to_mpc()
            assert abs(viz.to_mpc() - pred) < mpf("1e-29")

    def test_homogeneity(self, K, zi):
        rng = random.Random(11)
        z = rand_z(rng)
        p, q, s = 3, 1, 2
        c = K.elem(1, 1)
        latc = Lattice1D.from_ideal(QuadIdeal(c))
        with workprec(280):
            cc = mpc(1, 1)
            vc = ke_accel(KEKey(p, q, cc * z, latc, s, 256), mpf("1e-30"))
            vz = ke_accel(KEKey(p, q, z, zi, s, 256), mpf("1e-30"))
            pred = cc.conjugate() ** q * cc ** (-(p + 1)) * abs(cc) ** (-2 * s) * vz.to_mpc()
            assert abs(vc.to_mpc() - pred) < mpf("1e-28")

    def test_truncation_radius_doubling(self, zi):
        rng = random.Random(12)
        z = rand_z(rng)
        v1 = ke_accel_batch(z, zi, 0, [(3, 1)], mpf("1e-30"), 256)[(3, 1)]
        v2 = ke_accel_batch(z, zi, 0, [(3, 1)], mpf("1e-30"), 256, radius_factor=2)[
            (3, 1)
        ]
        assert abs(v1.to_mpc() - v2.to_mpc()) < mpf("1e-30")

    def test_precision_doubling(self, zi):
        rng = random.Random(13)
        z = rand_z(rng)
        v1 = ke_accel(KEKey(2, 0, z, zi, 0, 256), mpf("1e-30"))
        v2 = ke_accel(KEKey(2, 0, z, zi, 0, 512), mpf("1e-30"))
        assert abs(v1.to_mpc() - v2.to_mpc()) < v1.err_abs + v2.err_abs

    def test_err_abs_honest(self, zi):
        rng = random.Random(14)
        z = rand_z(rng)
        v = ke_accel(KEKey(2, 1, z, zi, 0, 256), mpf("1e-25"))
        ref = ke_accel_batch(z, zi, 0, [(2, 1)], mpf("1e-40"), 320)[(2, 1)]
        assert abs(v.to_mpc() - ref.to_mpc()) <= v.err_abs
        assert v.err_abs <= mpf("1e-25")

    def test_cache_roundtrip(self, K, zi, tmp_path):
        cache = EvalCache(str(tmp_path / "c.jsonl"))
        z = K.elem(Fraction(1, 3), Fraction(1, 5))
        key = KEKey(2, 0, z, zi, 0, 192)
        v1 = ke_accel(key, mpf("1e-20"), cache=cache)
        assert cache.misses >= 1
        v2 = ke_accel(key, mpf("1e-20"), cache=cache)
        assert cache.hits >= 1
        assert v1.re == v2.re and v1.im == v2.im
        # a fresh cache object reading the same file reproduces the bits
        cache2 = EvalCache(str(tmp_path / "c.jsonl"))
        v3 = ke_accel(key, mpf("1e-20"), cache=cache2)
        assert v1.re == v3.re and v1.im == v3.im


class TestProduct:
    def test_product_symmetry_zero(self, K):
        O2 = lambda_of_ideal(QuadIdeal(K.one()), 2)
        z = [K.elem(Fraction(1, 2)), K.elem(Fraction(1, 2))]
        v = ke_product(z, O2, MultiIndex((2, 2)), MultiIndex((0, 0)), mpf("1e-30"), 256)
        assert abs(v.to_mpc()) < mpf("1e-28")

    def test_coset_independence(self, K):
        O2 = lambda_of_ideal(QuadIdeal(K.one()), 2)
        z = [K.elem(Fraction(1, 3), Fraction(1, 5)), K.elem(Fraction(2, 7), Fraction(1, 2))]
        I, J = MultiIndex((2, 1)), MultiIndex((0, 1))
        va = ke_product(z, O2, I, J, mpf("1e-25"), 256)
        vb = ke_product(z, O2, I, J, mpf("1e-25"), 256, cs=[K.elem(1, 1), K.elem(2)])
        assert abs(va.to_mpc() - vb.to_mpc()) < mpf("1e-24")

    def test_periodicity(self, K):
        O2 = lambda_of_ideal(QuadIdeal(K.one()), 2)
        z = [K.elem(Fraction(1, 3), Fraction(1, 5)), K.elem(Fraction(2, 7), Fraction(1, 2))]
        I, J = MultiIndex((2, 0)), MultiIndex((0, 0))
        z2 = [z[0] + K.elem(1, 1), z[1] - K.elem(0, 1)]
        va = ke_product(z, O2, I, J, mpf("1e-25"), 256)
        vb = ke_product(z2, O2, I, J, mpf("1e-25"), 256)
        assert abs(va.to_mpc() - vb.to_mpc()) < mpf("1e-24")

    def test_hyperplane_violation(self, K):
        O2 = lambda_of_ideal(QuadIdeal(K.one()), 2)
        z = [K.elem(2, 1), K.elem(Fraction(1, 2))]  # first coordinate on the lattice
        with pytest.raises(SingularPointError):
            ke_product(z, O2, MultiIndex((2, 0)), MultiIndex((0, 0)), mpf("1e-20"), 192)

    def test_exact_coordinates_required(self, K):
        O2 = lambda_of_ideal(QuadIdeal(K.one()), 2)
        with pytest.raises(ValidationError):
            ke_product([mpc(0.5), mpc(0.5)], O2, MultiIndex((2, 0)), MultiIndex((0, 0)), mpf("1e-20"), 192)


class TestTypes:
    def test_multiindex(self):
        I = MultiIndex((2, 0, 1))
        assert I.total == 3
        assert len(I) == 3
        with pytest.raises(ValidationError):
            MultiIndex((-1, 0))

    def test_lattice_orientation(self):
        with workprec(128):
            lat = Lattice1D(w1=mpc(0, 1), w2=mpc(1, 0))
            w1, w2 = lat.basis(128)
            assert ((w2 / w1).imag) > 0

    def test_nearest_distance(self):
        with workprec(128):
            d = nearest_lattice_distance(mpc("0.5", "0.5"), mpc(1), mpc(0, 1))
            assert abs(d - mpmath.sqrt(2) / 2) < mpf("1e-20")
