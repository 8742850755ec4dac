"""Horseshoes, coded periodic orbits, Livsic linearity."""

import math

import gmpy2
import pytest

from ratspec.algebra import BigComplex
from ratspec.cer import (
    build_horseshoe,
    cylinder_diameter,
    expansion_lower_bound,
    livsic_linearity_test,
    lyndon_words,
    periodic_words,
)
from ratspec.homoclinic import find_homoclinic, koenigs_chart
from ratspec.periodic import fixed_points_with_multipliers
from ratspec.ratmap import RationalMap, SpherePoint


def bc(re, im=0):
    return BigComplex(re, im, 256)


@pytest.fixture(scope="module")
def square():
    return RationalMap.from_affine([0, 0, 1], [1])


@pytest.fixture(scope="module")
def square_horseshoe(square):
    chart = koenigs_chart(square, SpherePoint.affine(bc(1)), order=40)
    orb = find_homoclinic(square, chart, SpherePoint.affine(bc(-1)))
    return build_horseshoe(square, chart, [orb])


@pytest.fixture(scope="module")
def basilica():
    return RationalMap.from_affine([-1, 0, 1], [1])


@pytest.fixture(scope="module")
def basilica_horseshoe(basilica):
    o = next(pt for pt, _, lam in fixed_points_with_multipliers(basilica, 1)
             if not pt.is_infinity() and lam.abs() > 3)
    chart = koenigs_chart(basilica, o, order=48)
    orb = find_homoclinic(basilica, chart, SpherePoint.affine(-o.to_affine()))
    return build_horseshoe(basilica, chart, [orb])


class TestLyndon:
    def test_binary_up_to_three(self):
        assert lyndon_words(2, 3) == [(1,), (2,), (1, 2), (1, 1, 2), (1, 2, 2)]

    def test_count_identity(self):
        # full shift combinatorics: sum over d | n of d * L_k(d) = k^n
        for k in (2, 3):
            words = lyndon_words(k, 4)
            by_len = {}
            for w in words:
                by_len[len(w)] = by_len.get(len(w), 0) + 1
            for n in range(1, 5):
                total = sum(d * by_len[d] for d in range(1, n + 1) if n % d == 0)
                assert total == k ** n


class TestHorseshoeConstruction:
    def test_square_two_branches(self, square_horseshoe):
        h = square_horseshoe
        assert h.k == 2
        assert h.m == 4            # regression pin at 256 bits
        assert 0 < h.kappa < 1
        # contains the fixed point and the marked orbit point
        assert h.branches[0].center.chordal(h.chart.o) < 1e-60

    def test_basilica_builds(self, basilica_horseshoe):
        h = basilica_horseshoe
        assert h.k == 2
        assert h.m <= 30           # pilot bound from the spec example
        assert 0 < h.kappa < 1

    def test_two_orbits_three_branches(self, square):
        # seeds -1 and -i give distinct backward orbits (upper/lower semicircle)
        chart = koenigs_chart(square, SpherePoint.affine(bc(1)), order=40)
        orb1 = find_homoclinic(square, chart, SpherePoint.affine(bc(-1)))
        orb2 = find_homoclinic(square, chart, SpherePoint.affine(bc(0, -1)))
        assert orb1.points[2].chordal(orb2.points[2]) > 0.5
        h = build_horseshoe(square, chart, [orb1, orb2])
        assert h.k == 3
        # pairwise disjoint branch boundaries
        for i in range(h.k):
            for j in range(i + 1, h.k):
                sep = min(float(p.chordal(q))
                          for p in h.branches[i].boundary for q in h.branches[j].boundary)
                assert sep > 0


class TestCodedOrbits:
    def test_fixed_word_is_fixed_point(self, square, square_horseshoe):
        coded = periodic_words(square_horseshoe, square, 1)
        w1 = next(c for c in coded if c.word == (1,))
        assert w1.point.chordal(SpherePoint.affine(bc(1))) < 1e-60
        assert (w1.multiplier - 2 ** square_horseshoe.m).abs() < gmpy2.mpfr("1e-40")

    def test_word_12_is_genuine_2m_periodic(self, square, square_horseshoe):
        h = square_horseshoe
        coded = periodic_words(h, square, 2)
        w12 = next(c for c in coded if c.word == (1, 2))
        fixed_words = [c for c in coded if c.period == 1]
        for fw in fixed_words:
            assert w12.point.chordal(fw.point) > 1e-6
        orbit = square.orbit(w12.point, 2 * h.m)
        assert orbit[-1].chordal(w12.point) < 1e-60
        assert orbit[h.m].chordal(w12.point) > 1e-6

    def test_all_words_distinct_points(self, square, square_horseshoe):
        coded = periodic_words(square_horseshoe, square, 3)
        pts = [c.point for c in coded]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                assert pts[i].chordal(pts[j]) > 1e-8

    def test_multipliers_match_periodic_module(self, square, square_horseshoe):
        # coded multipliers are a sub-multiset of the nm-divisor multipliers
        h = square_horseshoe
        coded = periodic_words(h, square, 2)
        for c in coded:
            nm = c.period * h.m
            if square.degree ** nm + 1 > 1000:
                continue
            fixed = fixed_points_with_multipliers(square, nm)
            best = min(fixed, key=lambda rec: c.point.chordal(rec[0]))
            assert c.point.chordal(best[0]) < gmpy2.mpfr(2) ** -80
            assert (best[2] - c.multiplier).abs() < gmpy2.mpfr("1e-20")


class TestLivsic:
    def test_square_linear(self, square, square_horseshoe):
        rep = livsic_linearity_test(square_horseshoe, square, 3)
        assert rep.verdict == "linear-consistent"
        assert rep.variance < 1e-24
        assert rep.mean == pytest.approx(math.log(2), abs=1e-12)

    def test_basilica_nonlinear(self, basilica, basilica_horseshoe):
        rep = livsic_linearity_test(basilica_horseshoe, basilica, 3)
        assert rep.verdict == "nonlinear"
        assert rep.variance > 1e-3

    def test_flexible_lattes_linear(self):
        # |multipliers| = 2^n law; degree-4 pullbacks make this the slow case
        from ratspec.exceptional import make_exceptional
        from ratspec.cli import _repelling_fixed_points, _seed_candidates

        f = make_exceptional("flexible_lattes", 2)
        o = _repelling_fixed_points(f, 256)[0]
        chart = koenigs_chart(f, o, order=48)
        seed = _seed_candidates(f, o, 256)[0]
        orb = find_homoclinic(f, chart, seed)
        h = build_horseshoe(f, chart, [orb])
        rep = livsic_linearity_test(h, f, 2)
        assert rep.verdict == "linear-consistent"
        assert rep.variance < 1e-12

    def test_report_serialization(self, square, square_horseshoe):
        rep = livsic_linearity_test(square_horseshoe, square, 2)
        obj = rep.to_obj()
        assert obj["verdict"] == "linear-consistent"
        assert len(obj["orbit_means"]) == 3


class TestGeometry:
    def test_expansion(self, square, square_horseshoe):
        bound = expansion_lower_bound(square_horseshoe, square)
        assert bound > 1 / square_horseshoe.kappa - 1

    def test_cylinder_decay(self, square, square_horseshoe):
        d1 = cylinder_diameter(square_horseshoe, square, (1,))
        d2 = cylinder_diameter(square_horseshoe, square, (1, 2))
        d3 = cylinder_diameter(square_horseshoe, square, (1, 2, 2))
        assert d2 < d1 * square_horseshoe.kappa
        assert d3 < d2 * square_horseshoe.kappa
