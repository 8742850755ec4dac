"""Acceptance suite: one test per criterion, stated tolerances, pass/fail lines.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance is pinned here, nothing is deferred to calibration.
"""

import json
import random
import time

import gmpy2
import pytest

from ratspec.algebra import BigComplex
from ratspec.cer import build_horseshoe, livsic_linearity_test, periodic_words
from ratspec.cli import main as cli_main
from ratspec.degeneration import (
    FamilyMap,
    MobiusFamily,
    newton_polygon,
    propose_rescalings,
    reduce_at_zero,
    rescaling_limit,
    root_valuations,
)
from ratspec.errors import BadInput, NoCandidates
from ratspec.exceptional import QuadraticRing, make_exceptional, milnor_integrality_test
from ratspec.homoclinic import (
    adjoint_sequence,
    exceptional_criterion,
    find_homoclinic,
    fit_asymptotics,
    koenigs_chart,
    working_pair,
)
from ratspec.homoclinic import _max_residual
from ratspec.periodic import (
    fixed_points_with_multipliers,
    holomorphic_index_sum,
    match_spectra,
    spectrum_table,
)
from ratspec.ratmap import Mobius, RationalMap, SpherePoint

PREC = 256


def bc(re, im=0):
    return BigComplex(re, im, PREC)


def report(criterion: int, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def _random_quadratic(rng):
    while True:
        try:
            return RationalMap.from_affine(
                [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)],
                [bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)],
                prec=PREC)
        except Exception:
            continue


def _random_mobius(rng):
    while True:
        try:
            m = Mobius(*(bc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(4)))
            return m
        except Exception:
            continue


def test_criterion_1_fixed_point_counting():
    t0 = time.monotonic()
    maps = {
        "z^2": RationalMap.from_affine([0, 0, 1], [1], prec=PREC),
        "z^2-1": RationalMap.from_affine([-1, 0, 1], [1], prec=PREC),
        "z^3+z": RationalMap.from_affine([0, 1, 0, 1], [1], prec=PREC),
        "chebyshev2": make_exceptional("chebyshev", 2, prec=PREC),
    }
    for name, f in maps.items():
        for n in (1, 2, 3):
            pts = fixed_points_with_multipliers(f, n, prec=PREC)
            total = sum(m for _, m, _ in pts)
            assert total == f.degree ** n + 1, (name, n, total)
    dt = time.monotonic() - t0
    report(1, dt < 10, f"divisor counts d^n+1 exact for 4 maps, n<=3, in {dt:.1f}s (<10s)")


def test_criterion_2_conjugacy_invariance():
    t0 = time.monotonic()
    rng = random.Random(20240809)
    for k in range(100):
        f = _random_quadratic(rng)
        mob = _random_mobius(rng)
        g = f.conjugate(mob)
        rep = match_spectra(spectrum_table(f, 2, prec=PREC),
                            spectrum_table(g, 2, prec=PREC), tol=1e-20)
        assert rep.matched, f"map {k} failed conjugacy match"
    dt = time.monotonic() - t0
    report(2, dt < 120, f"100 random conjugacy matches at tol 1e-20, n<=2, in {dt:.1f}s (<2min)")


def test_criterion_3_index_formula():
    rng = random.Random(314159)
    bound = gmpy2.mpfr("1e-30")
    done = 0
    worst = gmpy2.mpfr(0)
    while done < 50:
        f = _random_quadratic(rng)
        try:
            s = holomorphic_index_sum(f, prec=PREC)
        except BadInput:
            continue  # parabolic-adjacent draw; criterion excludes these
        done += 1
        err = (s - 1).abs()
        worst = max(worst, err)
        assert err < bound
    report(3, True, f"50 random maps: |sum 1/(1-lambda) - 1| <= {float(worst):.2e} (<1e-30)")


def test_criterion_4_koenigs():
    import math

    f = RationalMap.from_affine([0, 0, 1], [1], prec=PREC)
    chart = koenigs_chart(f, SpherePoint.affine(bc(1)), order=40, prec=PREC)
    worst = gmpy2.mpfr(0)
    for k in range(1, 33):
        target = BigComplex(1, 0, PREC) / math.factorial(k)
        rel = (chart.psi_coeffs[k - 1] - target).abs() / target.abs()
        worst = max(worst, rel)
    assert worst < gmpy2.mpfr(2) ** -100
    res = _max_residual(f, chart, 32)
    assert res < gmpy2.mpfr(2) ** -128
    report(4, True,
           f"psi_k vs 1/k! rel err {float(worst):.2e} (<2^-100); residual {float(res):.2e} (<2^-128)")


@pytest.fixture(scope="module")
def basilica_sequence():
    b = RationalMap.from_affine([-1, 0, 1], [1], prec=PREC)
    o = next(pt for pt, _, lam in fixed_points_with_multipliers(b, 1, prec=PREC)
             if not pt.is_infinity() and lam.abs() > 3)
    chart = koenigs_chart(b, o, order=48, prec=PREC)
    orb = find_homoclinic(b, chart, SpherePoint.affine(-o.to_affine()))
    dom, m = working_pair(orb)
    return b, adjoint_sequence(b, orb, m, m + 12, dom)


def test_criterion_5_exceptionality_criterion(basilica_sequence):
    # z^2 passes with C = 1
    f = RationalMap.from_affine([0, 0, 1], [1], prec=PREC)
    chart = koenigs_chart(f, SpherePoint.affine(bc(1)), order=40, prec=PREC)
    orb = find_homoclinic(f, chart, SpherePoint.affine(bc(-1)))
    dom, m = working_pair(orb)
    seq = adjoint_sequence(f, orb, m, m + 10, dom)
    v = exceptional_criterion(seq, tol=1e-20)
    c = BigComplex.from_string(v.detail["C"], PREC)
    assert v.verdict == "pass" and (c - 1).abs() < gmpy2.mpfr("1e-30")

    # chebyshev 2 passes at the interior fixed point (multiplier -2)
    ch = make_exceptional("chebyshev", 2, prec=PREC)
    o = next(pt for pt, _, lam in fixed_points_with_multipliers(ch, 1, prec=PREC)
             if not pt.is_infinity() and abs(float(lam.abs()) - 2) < 0.1)
    chart_c = koenigs_chart(ch, o, order=48, prec=PREC)
    orb_c = find_homoclinic(ch, chart_c, SpherePoint.affine(bc(0.5)))
    dom_c, m_c = working_pair(orb_c)
    seq_c = adjoint_sequence(ch, orb_c, m_c, m_c + 10, dom_c)
    v_c = exceptional_criterion(seq_c, tol=1e-20)
    assert v_c.verdict == "pass"

    # z^2 - 1 fails with offset bounded away from 0 (regression margin 0.5)
    b, seq_b = basilica_sequence
    v_b = exceptional_criterion(seq_b, tol=1e-20)
    assert v_b.verdict == "fail"
    assert v_b.witness["offset_abs"] > 0.5

    # Lemma-style residual decay on z^2 - 1: within 25% of 1/|lambda|
    fit = fit_asymptotics(seq_b, window=6)
    lam_abs = float(seq_b.orbit.chart.lam.abs())
    ratio = fit["error_decay_ratio"]
    assert ratio == pytest.approx(1 / lam_abs, rel=0.25)
    report(5, True,
           f"criterion: z^2 pass (C=1), chebyshev2 pass, z^2-1 fail "
           f"(offset {v_b.witness['offset_abs']:.3f} > 0.5); decay {ratio:.6f} ~ 1/|lam| {1/lam_abs:.6f}")


def test_criterion_6_milnor():
    t0 = time.monotonic()
    ring = QuadraticRing(1)
    for name, f in (
        ("z^2", make_exceptional("power", 2, prec=PREC)),
        ("chebyshev2", make_exceptional("chebyshev", 2, prec=PREC)),
        ("lattes2", make_exceptional("flexible_lattes", 2, prec=PREC)),
    ):
        v = milnor_integrality_test(f, ring, nmax=3, tol=1e-20, prec=PREC)
        assert v.verdict == "pass", name
    b = RationalMap.from_affine([-1, 0, 1], [1], prec=PREC)
    v = milnor_integrality_test(b, ring, nmax=1, tol=1e-20, prec=PREC)
    assert v.verdict == "fail"
    lam = BigComplex.from_string(v.witness["multiplier"], PREC)
    from ratspec.algebra.scalars import context

    s5 = BigComplex(context(PREC).sqrt(gmpy2.mpfr(5, PREC)), 0, PREC)
    one = BigComplex(1, 0, PREC)
    wit_err = min(float((lam - (one + s5)).abs()), float((lam - (one - s5)).abs()))
    assert wit_err < 1e-60
    dt = time.monotonic() - t0
    report(6, dt < 300,
           f"milnor pass for z^2/chebyshev2/lattes(2) at nmax=3, fail for z^2-1 "
           f"with witness 1+-sqrt5 (err {wit_err:.1e}), in {dt:.1f}s (<5min)")


def test_criterion_7_livsic():
    f = RationalMap.from_affine([0, 0, 1], [1], prec=PREC)
    chart = koenigs_chart(f, SpherePoint.affine(bc(1)), order=40, prec=PREC)
    orb = find_homoclinic(f, chart, SpherePoint.affine(bc(-1)))
    h = build_horseshoe(f, chart, [orb])
    coded = periodic_words(h, f, 3)
    rep = livsic_linearity_test(h, f, 3, coded=coded)
    assert rep.variance < 1e-24 and rep.verdict == "linear-consistent"

    # coded multipliers vs the periodic module where the divisor budget allows
    checked = 0
    for c in coded:
        nm = c.period * h.m
        if f.degree ** nm + 1 > 1000:
            continue
        fixed = fixed_points_with_multipliers(f, nm, prec=PREC)
        best = min(fixed, key=lambda rec: c.point.chordal(rec[0]))
        assert (best[2] - c.multiplier).abs() < gmpy2.mpfr("1e-20")
        checked += 1
    assert checked >= 2

    b = RationalMap.from_affine([-1, 0, 1], [1], prec=PREC)
    ob = next(pt for pt, _, lam in fixed_points_with_multipliers(b, 1, prec=PREC)
              if not pt.is_infinity() and lam.abs() > 3)
    chart_b = koenigs_chart(b, ob, order=48, prec=PREC)
    orb_b = find_homoclinic(b, chart_b, SpherePoint.affine(-ob.to_affine()))
    hb = build_horseshoe(b, chart_b, [orb_b])
    rep_b = livsic_linearity_test(hb, b, 3)
    assert rep_b.variance > 1e-3 and rep_b.verdict == "nonlinear"
    report(7, True,
           f"z^2 variance {rep.variance:.2e} (<1e-24), z^2-1 variance {rep_b.variance:.2e} (>1e-3), "
           f"{checked} coded multipliers match periodic cycles at 1e-20")


def test_criterion_8_degeneration_exact():
    t0 = time.monotonic()
    z2t = FamilyMap.from_coeffs(["t", "0", "1"], ["1"])
    r1 = reduce_at_zero(z2t)
    assert r1.explicit_good and r1.resultant_valuation == 0

    tz2z = FamilyMap.from_coeffs(["0", "1", "t"], ["1"])
    r2 = reduce_at_zero(tz2z)
    assert (not r2.explicit_good) and r2.resultant_valuation == 2

    res = rescaling_limit(tz2z, MobiusFamily.from_coeffs("1/t", "0", "0", "1"), 1)
    assert not res.degenerate
    assert res.limit.to_obj()["num"] == ["0", "1", "1"]
    assert res.limit.to_obj()["den"] == ["1"]
    assert res.indeterminacy == []

    from fractions import Fraction

    assert root_valuations(["1/t", "-1", "1"]) == [(Fraction(-1, 2), 2)]

    with pytest.raises(NoCandidates) as exc:
        propose_rescalings(FamilyMap.from_coeffs(["1/t", "0", "1"], ["1"]), 1)
    assert 2 in exc.value.hints
    dt = time.monotonic() - t0
    report(8, dt < 10, f"exact degeneration suite (zero tolerance) in {dt:.1f}s (<10s)")


def test_criterion_9_determinism(capsys):
    suites = [
        ["spectrum", "--map", '{"num":["0","0","1"],"den":["1"]}', "--nmax", "2", "--seed", "7"],
        ["classify", "--map", '{"num":["-1","0","1"],"den":["1"]}', "--n", "2", "--seed", "7"],
        ["rescale", "--family", '{"num":["0","1","t"],"den":["1"]}', "--q", "1", "--seed", "7"],
        ["milnor", "--map", "lattes:2", "--nmax", "2", "--seed", "7"],
        ["livsic", "--map", "power:2", "--max-len", "2", "--seed", "7"],
    ]
    for argv in suites:
        cli_main(argv)
        out1 = capsys.readouterr().out
        cli_main(argv)
        out2 = capsys.readouterr().out
        assert out1 == out2, f"non-deterministic output for {argv[0]}"

    # seeded random suite: byte-identical serialized spectra across reruns
    def serialized_run():
        rng = random.Random(99)
        blobs = []
        for _ in range(5):
            f = _random_quadratic(rng)
            t = spectrum_table(f, 2, prec=PREC)
            blobs.append(json.dumps({str(n): [z.to_string() for z in t.s[n]] for n in t.s}))
        return "".join(blobs)

    assert serialized_run() == serialized_run()
    report(9, True, "byte-identical reports across reruns (5 CLI suites + seeded random spectra)")
