"""Fixed-point divisors, cycles, spectrum tables, multiset matching."""

import random

import gmpy2
import pytest

from ratspec.algebra import BigComplex
from ratspec.algebra.scalars import working_precision
from ratspec.errors import BadInput, BudgetExceeded
from ratspec.periodic import (
    SpectrumTable,
    fixed_point_divisor,
    fixed_points_with_multipliers,
    holomorphic_index_sum,
    length_subset_test,
    match_spectra,
    periodic_cycles,
    spectrum_table,
)
from ratspec.ratmap import Mobius, RationalMap, SpherePoint


def bc(re, im=0):
    return BigComplex(re, im, 256)


@pytest.fixture
def square():
    return RationalMap.from_affine([0, 0, 1], [1])


@pytest.fixture
def basilica():
    return RationalMap.from_affine([-1, 0, 1], [1])


def _sqrt5():
    with working_precision(300):
        return gmpy2.sqrt(gmpy2.mpfr(5))


class TestDivisor:
    def test_square_n1(self, square):
        div = fixed_point_divisor(square, 1)
        # z^2 - z with roots {0, 1}; infinity carries the third point
        assert div.degree == 2
        roots = {0, 1}
        for r in roots:
            assert div.evaluate(bc(r)).abs() < 1e-70

    def test_square_n2_counts(self, square):
        pts = fixed_points_with_multipliers(square, 2)
        assert sum(m for _, m, _ in pts) == 5
        finite = [p for p, _, _ in pts if not p.is_infinity()]
        # 0, 1 and two primitive cube roots of unity
        assert len(finite) == 4

    def test_basilica_golden_fixed_points(self, basilica):
        # quadratic formula oracle: fixed points (1 +- sqrt5)/2, multipliers 1 +- sqrt5
        s5 = _sqrt5()
        expected = sorted([float((1 + s5)), float(1 - s5)])
        pts = fixed_points_with_multipliers(basilica, 1)
        lams = sorted(float(lam.re) for p, _, lam in pts if not p.is_infinity())
        assert lams == pytest.approx(expected, abs=1e-60)

    def test_budget(self, square):
        with pytest.raises(BudgetExceeded):
            fixed_point_divisor(square, 30)


class TestCycles:
    def test_square_n2(self, square):
        cycles = periodic_cycles(square, 2)
        periods = sorted(c.period for c in cycles)
        assert periods == [1, 1, 1, 2]
        two = [c for c in cycles if c.period == 2][0]
        assert two.multiplier.close_to(bc(4), 1e-70)
        assert two.cls == "repelling"
        fixed_classes = {c.cls for c in cycles if c.period == 1}
        assert "attracting" in fixed_classes and "repelling" in fixed_classes

    def test_basilica_superattracting_two_cycle(self, basilica):
        cycles = periodic_cycles(basilica, 2)
        two = [c for c in cycles if c.period == 2]
        assert len(two) == 1
        assert two[0].multiplier.abs() < 1e-70
        assert two[0].cls == "attracting"

    def test_square_all_repelling_multiplier_law(self, square):
        for n in (1, 2, 3):
            for c in periodic_cycles(square, n):
                if c.cls == "repelling":
                    assert c.multiplier.close_to(bc(2 ** c.period), 1e-60)


class TestSpectrumTable:
    def test_square_s1(self, square):
        t = spectrum_table(square, 1)
        vals = [z.to_string(8) for z in t.s[1]]
        assert vals == ["0", "0", "2.0000000e+0"]

    def test_square_s2(self, square):
        t = spectrum_table(square, 2)
        assert len(t.s[2]) == 5
        nonzero = [z for z in t.s[2] if not z.is_zero()]
        assert len(nonzero) == 3
        assert all(z.close_to(bc(4), 1e-60) for z in nonzero)

    def test_basilica_s1(self, basilica):
        s5 = _sqrt5()
        t = spectrum_table(basilica, 1)
        vals = sorted(float(z.re) for z in t.s[1])
        assert vals == pytest.approx(sorted([0.0, float(1 - s5), float(1 + s5)]), abs=1e-60)

    def test_rl_star_view(self, square):
        t = spectrum_table(square, 2)
        assert t.rl_star(1) == t.RL[1]
        assert t.rl_star(2) == t.RL[2]
        assert t.rl_star(3) is None

    def test_sizes(self):
        f = RationalMap.from_affine([0, 1, 0, 1], [1])  # z^3 + z
        t = spectrum_table(f, 2)
        assert len(t.s[1]) == 4 and len(t.s[2]) == 10


class TestIterateConsistency:
    def test_s1_of_iterate_equals_sn(self, basilica):
        n = 2
        t_direct = spectrum_table(basilica, n)
        t_iter = spectrum_table(basilica.iterate(n), 1)
        a = sorted(t_direct.s[n], key=lambda z: (z.re, z.im))
        b = sorted(t_iter.s[1], key=lambda z: (z.re, z.im))
        assert all(x.close_to(y, 1e-50) for x, y in zip(a, b))


class TestExactMode:
    def test_exact_map_matches_mp_spectrum(self, basilica):
        f_exact = RationalMap.from_affine([-1, 0, 1], [1], mode="exact")
        rep = match_spectra(spectrum_table(f_exact, 2), spectrum_table(basilica, 2), tol=1e-30)
        assert rep.matched
        cycles = periodic_cycles(f_exact, 2)
        assert sorted(c.period for c in cycles) == [1, 1, 1, 2]


class TestIndexFormula:
    def test_random_maps_index_one(self):
        rng = random.Random(123)
        count = 0
        while count < 10:
            try:
                f = RationalMap.from_affine(
                    [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)],
                    [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)])
                s = holomorphic_index_sum(f)
            except BadInput:
                continue
            count += 1
            assert (s - 1).abs() < gmpy2.mpfr(2) ** -64


class TestMatching:
    def test_self_match_cost_zero(self, square):
        t = spectrum_table(square, 2)
        rep = match_spectra(t, t, tol=1e-30)
        assert rep.matched and rep.cost == 0.0

    def test_conjugacy_invariance(self, basilica):
        m = Mobius(bc(2, 1), bc(0.5), bc(1), bc(1, 1))
        g = basilica.conjugate(m)
        rep = match_spectra(spectrum_table(basilica, 2), spectrum_table(g, 2), tol=1e-20)
        assert rep.matched
        assert rep.cost < 1e-60

    def test_distinct_maps_mismatch(self, square, basilica):
        rep = match_spectra(spectrum_table(square, 1), spectrum_table(basilica, 1), tol=1e-3)
        assert not rep.matched
        assert rep.unmatched

    def test_subset_tests(self, square):
        assert length_subset_test(square, 1, [2])
        assert not length_subset_test(square, 1, [2, 2])
        assert length_subset_test(square, 2, [4, 4, 4])

    def test_index_check_runs_by_default(self, square):
        # z^2 has no parabolic fixed point, so the sanity check is active
        spectrum_table(square, 1)
        # parabolic example z + z^2 must not trip the check (it is skipped)
        parab = RationalMap.from_affine([0, 1, 1], [1])
        spectrum_table(parab, 1)


from hypothesis import given, settings
from hypothesis import strategies as st


@settings(max_examples=15, deadline=None)
@given(st.permutations(range(5)), st.integers(0, 10 ** 6))
def test_match_invariant_under_permutation_and_noise(perm, jitter):
    """Permuting one spectrum and perturbing below tol never breaks a match."""
    square = RationalMap.from_affine([0, 0, 1], [1])
    t = spectrum_table(square, 2)
    eps = BigComplex(1, 1, 256) * (jitter * 1e-28)
    shuffled = [t.s[2][k] + eps for k in perm]
    t2 = SpectrumTable(degree=t.degree, nmax=2,
                       s={1: list(t.s[1]), 2: shuffled},
                       L=t.L, RL=t.RL)
    assert match_spectra(t, t2, tol=1e-20).matched
