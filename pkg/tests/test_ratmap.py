"""Rational map construction, evaluation, derivatives, conjugation, critical points."""

import random

import gmpy2
import pytest

from ratspec.algebra import BigComplex
from ratspec.errors import DegenerateMap, EmptyInput
from ratspec.ratmap import Mobius, RationalMap, SpherePoint


def bc(re, im=0):
    return BigComplex(re, im, 256)


def sp(re, im=0):
    return SpherePoint.affine(bc(re, im))


@pytest.fixture
def square():
    return RationalMap.from_affine([0, 0, 1], [1])


@pytest.fixture
def basilica():
    return RationalMap.from_affine([-1, 0, 1], [1])


class TestFromAffine:
    def test_simple_degrees(self, square, basilica):
        assert square.degree == 2
        assert basilica.degree == 2

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            RationalMap.from_affine([], [1])

    def test_gcd_clearing_exact(self):
        f = RationalMap.from_affine([0, 1], [0, 0, 1], mode="exact")
        assert f.degree == 1
        assert [c.to_string() for c in f.num.coeffs] == ["1"]
        assert [c.to_string() for c in f.den.coeffs] == ["0", "1"]

    def test_gcd_clearing_disabled_degenerate(self):
        with pytest.raises(DegenerateMap):
            RationalMap.from_affine([0, 1], [0, 0, 1], mode="exact", clear_gcd=False)

    def test_degenerate_mp(self):
        with pytest.raises(DegenerateMap):
            RationalMap.from_affine([0, 1], [0, 0, 1])  # z / z^2 shares the root 0

    def test_json_roundtrip(self, basilica):
        g = RationalMap.from_json(basilica.to_json())
        assert g.degree == 2
        assert all((a - b).is_zero() for a, b in zip(g.num.coeffs, basilica.num.coeffs))


class TestEvaluate:
    def test_infinity_fixed(self, square):
        assert square.evaluate(SpherePoint.infinity()).is_infinity()

    def test_two_cycle(self, basilica):
        p1 = basilica.evaluate(sp(0))
        p2 = basilica.evaluate(p1)
        assert p1.to_affine().close_to(bc(-1), 1e-70)
        assert p2.chordal(sp(0)) < 1e-70

    def test_pole(self):
        g = RationalMap.from_affine([1, 0, 1], [-1, 0, 1])
        assert g.evaluate(sp(1)).is_infinity()


class TestDerivative:
    def test_affine(self, square):
        assert square.derivative_at(sp(1)).close_to(bc(2), 1e-70)

    def test_at_infinity(self, square):
        assert square.derivative_at(SpherePoint.infinity()).is_zero()

    def test_superattracting_chain(self, basilica):
        # factors 0 and -2 along the basilica cycle {0, -1}
        d0 = basilica.derivative_at(sp(0))
        d1 = basilica.derivative_at(sp(-1))
        assert d0.abs() < 1e-70
        assert d1.close_to(bc(-2), 1e-70)
        lam = basilica.multiplier_of_orbit([sp(0), sp(-1)])
        assert lam.is_zero() or lam.abs() < 1e-70

    def test_cycle_multiplier_chart_independent(self, square):
        # 2-cycle of z^2 at primitive cube roots of unity: d(z^4)/dz = 4 z^3 = 4
        from ratspec.periodic import periodic_cycles

        cyc = [c for c in periodic_cycles(square, 2) if c.period == 2][0]
        assert cyc.multiplier.close_to(bc(4), 1e-70)


class TestComposeIterateConjugate:
    def test_iterate_degree(self, square):
        assert square.iterate(3).degree == 8
        f3 = square.iterate(3)
        assert f3.num.coeffs[-1].close_to(bc(1), 1e-70)

    def test_degree_multiplies(self, square, basilica):
        assert square.compose(basilica).degree == 4

    def test_conjugate_by_inversion(self, square):
        m = Mobius(bc(0), bc(1), bc(1), bc(0))  # z -> 1/z
        g = square.conjugate(m)
        # z^2 is fixed by this conjugation
        for z in (sp(0.3, 0.4), sp(-1.2, 0.1)):
            assert g.evaluate(z).chordal(square.evaluate(z)) < 1e-70

    def test_conjugate_by_translation_hand_expansion(self, basilica):
        m = Mobius(bc(1), bc(1), bc(0), bc(1))  # z -> z + 1
        g = basilica.conjugate(m)
        # (z+1)^2 - 1 - 1 = z^2 + 2z - 1, expanded by hand
        target = RationalMap.from_affine([-1, 2, 1], [1])
        for z in (sp(0.5), sp(-0.25, 1.5)):
            assert g.evaluate(z).chordal(target.evaluate(z)) < 1e-70

    def test_conjugation_roundtrip(self):
        rng = random.Random(11)
        for _ in range(5):
            f = RationalMap.from_affine([bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)],
                                        [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)])
            m = Mobius(bc(rng.uniform(0.5, 1)), bc(rng.uniform(-1, 1)),
                       bc(rng.uniform(-1, 1)), bc(rng.uniform(0.5, 1)))
            g = f.conjugate(m).conjugate(m.inverse())
            for a, b in zip(g.num.coeffs, f.num.coeffs):
                assert (a - b).abs() < gmpy2.mpfr(2) ** -128


class TestCriticalPoints:
    def test_square(self, square):
        pts = square.critical_points()
        assert sum(m for _, m in pts) == 2
        kinds = {p.is_infinity() for p, _ in pts}
        assert kinds == {True, False}

    def test_basilica(self, basilica):
        pts = basilica.critical_points()
        assert sum(m for _, m in pts) == 2
        finite = [p for p, _ in pts if not p.is_infinity()]
        assert finite[0].to_affine().abs() < 1e-70

    def test_lattes_count(self):
        # (z^2-2)^2 / (4 z (z-1)(z-2)): 2d-2 = 6 critical points with multiplicity
        f = RationalMap.from_affine([4, 0, -4, 0, 1], [0, 16, -24, 8])
        assert sum(m for _, m in f.critical_points()) == 6

    def test_random_count_invariant(self):
        rng = random.Random(5)
        for _ in range(5):
            f = RationalMap.from_affine(
                [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)],
                [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)])
            assert sum(m for _, m in f.critical_points()) == 2 * f.degree - 2


class TestSpherePoint:
    def test_normalization(self):
        p = SpherePoint(bc(3, 4), bc(1))
        assert p.x.abs() <= 1 or p.y.abs() <= 1

    def test_chordal_symmetry(self):
        a, b = sp(2, 1), SpherePoint.infinity()
        assert abs(a.chordal(b) - b.chordal(a)) < 1e-70

    def test_zero_zero_rejected(self):
        with pytest.raises(Exception):
            SpherePoint(bc(0), bc(0))
