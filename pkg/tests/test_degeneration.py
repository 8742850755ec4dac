"""Exact t-adic families: normalization, reduction, base change, rescaling."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratspec.algebra import GaussianRational
from ratspec.degeneration import (
    FamilyMap,
    MobiusFamily,
    TParam,
    base_change,
    newton_polygon,
    normalize_family,
    parse_tparam,
    propose_rescalings,
    reduce_at_zero,
    rescaling_limit,
    root_valuations,
)
from ratspec.errors import BadInput, NoCandidates, ZeroPolynomial


def fam(num, den=("1",)):
    return FamilyMap.from_coeffs(list(num), list(den))


class TestTParam:
    def test_parse_and_print(self):
        assert parse_tparam("1/t").to_string() == "1/t"
        assert parse_tparam("t^2+1").to_string() == "t^2+1"
        assert parse_tparam("(1+2i)t").to_string() == "(1+2i)t"
        assert parse_tparam("3/2-1/2i").to_string() == "3/2-1/2i"
        assert parse_tparam("t^-3").to_string() == "1/t^3"

    def test_valuations(self):
        assert parse_tparam("t^2/(t+t^2)").valuation() == 1
        assert parse_tparam("1/t").valuation() == -1
        assert parse_tparam("0").valuation() is None
        assert parse_tparam("3t^2").leading_coeff() == GaussianRational(3)

    def test_implicit_multiplication(self):
        assert parse_tparam("2t") == parse_tparam("2*t")
        assert parse_tparam("(1+t)(1-t)") == parse_tparam("1-t^2")
        assert parse_tparam("1/2i") == parse_tparam("i/2")

    def test_substitute(self):
        x = parse_tparam("t^2+1/t")
        assert x.substitute_t_power(3) == parse_tparam("t^6+1/t^3")

    @settings(max_examples=30, deadline=None)
    @given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
    def test_field_identities(self, a, b, c):
        t = TParam.t_power(1)
        x = TParam.constant(a) + t * b
        y = TParam.constant(c) + t * t
        z = TParam.constant(b) - t * a
        assert (x + y) * z == x * z + y * z
        if not y.is_zero():
            assert (x / y) * y == x


class TestNormalize:
    def test_clear_common_t(self):
        n = normalize_family(fam(["0", "0", "t"], ["t"]))
        assert n.to_obj() == {"num": ["0", "0", "1"], "den": ["1"]}

    def test_clear_negative_valuation(self):
        n = normalize_family(fam(["1/t", "0", "1/t"], ["1"]))
        assert n.to_obj() == {"num": ["1", "0", "1"], "den": ["t"]}

    def test_idempotent(self):
        n = normalize_family(fam(["1/t", "0", "1/t"], ["1"]))
        assert normalize_family(n).to_obj() == n.to_obj()


class TestReduce:
    def test_good_reduction_z2_plus_t(self):
        rep = reduce_at_zero(fam(["t", "0", "1"]))
        assert rep.explicit_good
        assert rep.resultant_valuation == 0
        assert rep.reduction_degree == 2
        assert rep.reduction.to_obj()["num"] == ["0", "0", "1"]

    def test_exact_block_resultant(self):
        # Res((x^2 + t y^2), y^2) = 1 exactly over Q(i)(t)
        assert fam(["t", "0", "1"]).resultant() == TParam.one()

    def test_degree_drop_tz2_plus_z(self):
        rep = reduce_at_zero(fam(["0", "1", "t"]))
        assert not rep.explicit_good
        assert rep.resultant_valuation == 2
        assert rep.reduction_degree == 1

    def test_constant_family(self):
        rep = reduce_at_zero(fam(["0", "0", "1"]))
        assert rep.explicit_good and rep.reduction_degree == 2

    def test_collapse_to_constant_infinity(self):
        rep = reduce_at_zero(fam(["1/t", "0", "1"]))
        assert rep.reduction_degree == 0
        assert rep.constant_value.is_infinity()

    def test_explicit_good_implies_full_degree(self):
        # Theorem-style invariant on a few families
        for coeffs in (["t", "0", "1"], ["1", "t", "1"], ["i", "0", "0", "1"]):
            rep = reduce_at_zero(fam(coeffs))
            if rep.explicit_good:
                assert rep.reduction_degree == len(coeffs) - 1


class TestBaseChange:
    def test_simple(self):
        assert base_change(fam(["t", "0", "1"]), 2).to_obj()["num"] == ["t^2", "0", "1"]

    def test_composition_law(self):
        f = fam(["t", "1", "1"], ["1", "t^2"])
        a = base_change(base_change(f, 2), 3).to_obj()
        b = base_change(f, 6).to_obj()
        assert a == b

    def test_negative_powers(self):
        assert base_change(fam(["1/t", "0", "1"]), 2).to_obj()["num"] == ["1/t^2", "0", "1"]


class TestRescalingLimit:
    def test_spec_example_exact(self):
        res = rescaling_limit(fam(["0", "1", "t"]), MobiusFamily.from_coeffs("1/t", "0", "0", "1"), 1)
        assert not res.degenerate
        assert res.limit.to_obj()["num"] == ["0", "1", "1"]
        assert res.limit.to_obj()["den"] == ["1"]
        assert res.indeterminacy == []

    def test_good_reduction_identity(self):
        res = rescaling_limit(fam(["t", "0", "1"]), MobiusFamily.identity(), 1)
        assert not res.degenerate
        assert res.limit.to_obj()["num"] == ["0", "0", "1"]

    def test_degenerate_case(self):
        res = rescaling_limit(fam(["1/t", "0", "1"]), MobiusFamily.identity(), 1)
        assert res.degenerate
        assert res.limit is None

    def test_conjugation_coherence(self):
        # replacing M by M o A (A with unit-valuation entries, invertible
        # reduction) conjugates the limit by the reduction of A
        f = fam(["0", "1", "t"])
        m = MobiusFamily.from_coeffs("1/t", "0", "0", "1")
        a = MobiusFamily.from_coeffs("1", "1", "0", "1")     # z + 1
        res = rescaling_limit(f, m.compose(a), 1)
        assert not res.degenerate
        # hand expansion: (z+1)^2 + (z+1) - 1 = z^2 + 3z + 1
        assert res.limit.to_obj()["num"] == ["1", "3", "1"]

    def test_base_change_commutes(self):
        f = fam(["0", "1", "t"])
        m = MobiusFamily.from_coeffs("1/t", "0", "0", "1")
        direct = rescaling_limit(f, m, 1)
        changed = rescaling_limit(base_change(f, 2), m.substitute_t_power(2), 1)
        assert direct.limit.to_obj() == changed.limit.to_obj()


class TestNewtonPolygon:
    def test_factored_quadratic(self):
        # (z-1)(z-t): valuations {0, 1} (normative example for the sign convention)
        assert root_valuations(["t", "-1-t", "1"]) == [(Fraction(1), 1), (Fraction(0), 1)]

    def test_half_valuation(self):
        # roots (1 +- sqrt(1 - 4/t))/2 ~ +- i t^(-1/2): one segment of slope
        # 1/2 and length 2, i.e. two roots of valuation -1/2
        assert newton_polygon(["1/t", "-1", "1"]) == [(Fraction(1, 2), 2)]
        assert root_valuations(["1/t", "-1", "1"]) == [(Fraction(-1, 2), 2)]

    def test_monomial_shift(self):
        assert root_valuations(["-t^3", "1"]) == [(Fraction(3), 1)]

    def test_zero_polynomial(self):
        with pytest.raises(ZeroPolynomial):
            newton_polygon(["0"])


class TestProposeRescalings:
    def test_tz2_plus_z_finds_scale(self):
        props = propose_rescalings(fam(["0", "1", "t"]), 1)
        hit = [p for p in props if p.limit.to_obj()["num"] == ["0", "1", "1"]]
        assert hit
        assert hit[0].base_change_order == 1
        assert hit[0].mobius.a == parse_tparam("1/t")

    def test_z2_plus_t_identity_suffices(self):
        props = propose_rescalings(fam(["t", "0", "1"]), 1)
        ids = [p for p in props
               if p.mobius.a == TParam.one() and p.mobius.b.is_zero()]
        assert ids and ids[0].limit.to_obj()["num"] == ["0", "0", "1"]

    def test_z2_plus_1_over_t_hints_base_change(self):
        with pytest.raises(NoCandidates) as exc:
            propose_rescalings(fam(["1/t", "0", "1"]), 1)
        assert 2 in exc.value.hints

    def test_z2_plus_1_over_t_stays_empty_at_q2(self):
        # escaping regime: no degree >= 2 limit at q = 2 either
        with pytest.raises(NoCandidates):
            propose_rescalings(fam(["1/t", "0", "1"]), 2)


class TestDegeneratingLattesFamily:
    """(z^2-t)^2 / (4z(z-1)(z-t)): a degree-4 family collapsing at t = 0."""

    def _family(self):
        return fam(["t^2", "0", "-2t", "0", "1"], ["0", "4t", "-4-4t", "4"])

    def test_reduction_drops_to_degree_two(self):
        rep = reduce_at_zero(self._family())
        assert not rep.explicit_good
        assert rep.resultant_valuation == 4
        assert rep.reduction_degree == 2
        # limit z^2 / (4(z-1)); the cleared factor z^2 vanishes at 0 twice
        assert rep.reduction.to_obj()["num"] == ["0", "0", "1"]
        assert rep.reduction.to_obj()["den"] == ["-4", "4"]
        assert len(rep.indeterminacy) == 2
        assert all(not p.is_infinity() and p.to_affine().abs() < 1e-40
                   for p in rep.indeterminacy)

    def test_identity_is_a_validated_rescaling(self):
        res = rescaling_limit(self._family(), MobiusFamily.identity(), 1)
        assert not res.degenerate and res.limit.degree == 2

    def test_proposal_search_finds_limits(self):
        props = propose_rescalings(self._family(), 1)
        assert props
        assert all(p.limit.degree >= 2 for p in props)
