"""Periodic cycles, multipliers and the spectrum tables s_n / L_n / RL_n.

The n-th fixed-point divisor of a degree-d map always carries d^n + 1
points with multiplicity; spectra are built per n directly from that
divisor (a point of lower minimal period enters s_n with multiplier
lambda^(n/m) automatically).  Cycle extraction groups divisor roots into
forward orbits at a matching radius tied to the working precision, and
parabolic root clusters keep their divisor multiplicity instead of being
split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2

from ._matching import hopcroft_karp, hungarian
from .algebra import BigComplex, Poly, poly_roots
from .errors import BadInput, BudgetExceeded, OrbitMatchingAmbiguous
from .ratmap import RationalMap, SpherePoint

DIVISOR_BUDGET = 1000

CLASS_ATTRACTING = "attracting"
CLASS_REPELLING = "repelling"
CLASS_RATIONALLY_INDIFFERENT = "rationally-indifferent"
CLASS_IRRATIONALLY_INDIFFERENT = "irrationally-indifferent"


@dataclass(frozen=True)
class Cycle:
    points: list
    period: int
    multiplier: BigComplex
    cls: str
    multiplicity_in_divisor: int

    def modulus(self):
        return self.multiplier.abs()


@dataclass(frozen=True)
class SpectrumTable:
    degree: int
    nmax: int
    s: dict      # n -> sorted list of BigComplex (with multiplicity)
    L: dict      # n -> sorted list of mpfr moduli
    RL: dict     # n -> sub-multiset of L with entries > 1

    def rl_star(self, k: int):
        """View RL at factorial indices: RL*_k = RL_{k!}; None beyond nmax."""
        import math

        idx = math.factorial(k)
        return self.RL.get(idx)


@dataclass(frozen=True)
class MatchReport:
    matched: bool
    cost: float
    unmatched: list = field(default_factory=list)


def fixed_point_divisor(f: RationalMap, n: int, budget: int = DIVISOR_BUDGET) -> Poly:
    """Dehomogenized divisor y P_n - x Q_n of f^n; roots are the finite fixed
    points, the degree deficit against d^n + 1 is the multiplicity at infinity."""
    if n < 1:
        raise BadInput("period must be >= 1")
    if f.degree ** n + 1 > budget:
        raise BudgetExceeded(f"divisor degree {f.degree ** n + 1} exceeds budget {budget}")
    g = f.iterate(n) if n > 1 else f
    return g.num - g.den.shift_up(1)


def _divisor_infinity_multiplicity(f: RationalMap, n: int, divisor: Poly) -> int:
    return f.degree ** n + 1 - (divisor.degree if not divisor.is_zero() else 0)


def fixed_points_with_multipliers(f: RationalMap, n: int, prec: int | None = None,
                                  budget: int = DIVISOR_BUDGET):
    """All fixed points of f^n: list of (SpherePoint, multiplicity, multiplier).

    The multiplier is the n-step chain product of chart derivatives along
    the forward orbit, which for a fixed point of f^n is df^n.
    """
    prec = prec or f.prec
    divisor = fixed_point_divisor(f, n, budget=budget)
    out = []
    if not divisor.is_zero() and divisor.degree >= 1:
        clusters = poly_roots(divisor, prec)
    else:
        clusters = []
    for rc in clusters:
        pt = SpherePoint.affine(rc.center)
        orbit = f.orbit(pt, n - 1)
        out.append((pt, rc.multiplicity, _as_mp(f.multiplier_of_orbit(orbit), prec)))
    m_inf = _divisor_infinity_multiplicity(f, n, divisor)
    if m_inf > 0:
        # numeric (mp) representative regardless of the map's scalar mode
        pt = SpherePoint.infinity("mp", prec)
        orbit = f.orbit(pt, n - 1)
        out.append((pt, m_inf, _as_mp(f.multiplier_of_orbit(orbit), prec)))
    total = sum(m for _, m, _ in out)
    if total != f.degree ** n + 1:
        raise OrbitMatchingAmbiguous(
            f"divisor multiplicity {total} != {f.degree ** n + 1}; escalate precision")
    return out


def _matching_radius(prec: int):
    return gmpy2.mpfr(2) ** (-(prec // 4))


def _as_mp(lam, prec: int) -> BigComplex:
    """Multiplier chains over exact maps can stay exact; spectra are numeric."""
    return lam if isinstance(lam, BigComplex) else lam.to_bigcomplex(prec)


def classify_multiplier(lam: BigComplex, tol: float = 1e-9, root_of_unity_bound: int = 64) -> str:
    a = lam.abs()
    if a < 1 - tol:
        return CLASS_ATTRACTING
    if a > 1 + tol:
        return CLASS_REPELLING
    power = lam
    for _ in range(root_of_unity_bound):
        if (power - 1).abs() < tol:
            return CLASS_RATIONALLY_INDIFFERENT
        power = power * lam
    return CLASS_IRRATIONALLY_INDIFFERENT


def periodic_cycles(f: RationalMap, n: int, prec: int | None = None,
                    cls_tol: float = 1e-9, budget: int = DIVISOR_BUDGET) -> list[Cycle]:
    """Cycles among the fixed points of f^n, with minimal periods m | n."""
    prec = prec or f.prec
    fixed = fixed_points_with_multipliers(f, n, prec=prec, budget=budget)
    radius = _matching_radius(prec)

    def locate(q: SpherePoint) -> int:
        best, second, arg = None, None, -1
        for k, (pt, _, _) in enumerate(fixed):
            d = q.chordal(pt)
            if best is None or d < best:
                second = best
                best, arg = d, k
            elif second is None or d < second:
                second = d
        if best > radius:
            raise OrbitMatchingAmbiguous("forward image does not land on a divisor root; escalate precision")
        if second is not None and second <= radius:
            raise OrbitMatchingAmbiguous("two divisor roots within matching radius; escalate precision")
        return arg

    divisors_of_n = [m for m in range(1, n + 1) if n % m == 0]
    used = [False] * len(fixed)
    cycles = []
    for idx, (pt, mult, lam_n) in enumerate(fixed):
        if used[idx]:
            continue
        orbit_pts = f.orbit(pt, n)
        minimal = n
        for m in divisors_of_n:
            if pt.chordal(orbit_pts[m]) <= radius:
                minimal = m
                break
        cycle_idx = [idx]
        cur = idx
        for step in range(1, minimal):
            nxt = locate(orbit_pts[step])
            if nxt == idx:
                break
            cycle_idx.append(nxt)
            cur = nxt
        for k in cycle_idx:
            used[k] = True
        cyc_points = [fixed[k][0] for k in cycle_idx]
        lam = _as_mp(f.multiplier_of_orbit(cyc_points), prec)
        cycles.append(Cycle(
            points=cyc_points,
            period=minimal,
            multiplier=lam,
            cls=classify_multiplier(lam, cls_tol),
            multiplicity_in_divisor=mult,
        ))
    cycles.sort(key=lambda c: (c.period, c.points[0].is_infinity(),
                               *( () if c.points[0].is_infinity() else (c.points[0].to_affine().re, c.points[0].to_affine().im))))
    return cycles


def spectrum_table(f: RationalMap, nmax: int, prec: int | None = None,
                   rl_tol: float = 1e-9, budget: int = DIVISOR_BUDGET,
                   index_check: bool = True) -> SpectrumTable:
    """Assemble s_n, L_n, RL_n for 1 <= n <= nmax.

    With ``index_check`` the classical index relation sum 1/(1-lambda) = 1
    is verified on s_1 whenever no fixed point is parabolic; a violation
    means the computed spectrum cannot be trusted at this precision.
    """
    if nmax < 1:
        raise BadInput("nmax must be >= 1")
    prec = prec or f.prec
    s, L, RL = {}, {}, {}
    for n in range(1, nmax + 1):
        entries = []
        for _, mult, lam in fixed_points_with_multipliers(f, n, prec=prec, budget=budget):
            entries.extend([lam] * mult)
        entries.sort(key=lambda z: (z.re, z.im))
        s[n] = entries
        mods = sorted(z.abs() for z in entries)
        L[n] = mods
        RL[n] = [a for a in mods if a > 1 + rl_tol]
    if index_check:
        _index_sanity(s[1], prec)
    return SpectrumTable(degree=f.degree, nmax=nmax, s=s, L=L, RL=RL)


def _index_sanity(s1: list, prec: int):
    one = BigComplex(1, 0, prec)
    near_parabolic = gmpy2.mpfr(2) ** (-(prec // 4))
    acc = BigComplex(0, 0, prec)
    for lam in s1:
        if (lam - one).abs() < near_parabolic:
            return
        acc = acc + one / (one - lam)
    if (acc - one).abs() > gmpy2.mpfr(2) ** (-(prec // 4)):
        raise OrbitMatchingAmbiguous(
            "holomorphic index sum deviates from 1; escalate precision")


def _pair_tol(a: BigComplex, b: BigComplex, tol):
    scale = max(gmpy2.mpfr(1), a.abs(), b.abs())
    return gmpy2.mpfr(tol) * scale


def match_spectra(A: SpectrumTable, B: SpectrumTable, tol: float = 1e-3) -> MatchReport:
    """Per-n optimal assignment of multipliers under |a - b|.

    ``matched`` is a bottleneck statement (a perfect assignment exists with
    every pair within the scale-relative tolerance); ``cost`` reports the
    min-sum assignment value in double precision.
    """
    if A.degree != B.degree or A.nmax != B.nmax:
        raise BadInput("spectra must share degree and nmax")
    matched = True
    cost = 0.0
    unmatched = []
    for n in range(1, A.nmax + 1):
        xs, ys = A.s[n], B.s[n]
        if len(xs) != len(ys):
            raise BadInput("spectra of equal degree must have equal sizes")
        k = len(xs)
        adj = []
        for i in range(k):
            row = [j for j in range(k) if (xs[i] - ys[j]).abs() <= _pair_tol(xs[i], ys[j], tol)]
            adj.append(row)
        size, match_l = hopcroft_karp(adj, k, k)
        if size != k:
            matched = False
            unmatched.extend(
                (n, xs[i].to_string()) for i in range(k) if match_l[i] == -1)
        dist = [[_dist_float(xs[i], ys[j]) for j in range(k)] for i in range(k)]
        c, _ = hungarian(dist)
        cost += c
    return MatchReport(matched=matched, cost=cost, unmatched=unmatched)


def _dist_float(a: BigComplex, b: BigComplex) -> float:
    v = (a - b).abs()
    try:
        return float(v)
    except OverflowError:
        return 1e300


def length_subset_test(f: RationalMap, n: int, a: list, tol: float = 1e-3,
                       prec: int | None = None, budget: int = DIVISOR_BUDGET) -> bool:
    """True iff the multiset a embeds into L_n(f) within |.| distance tol."""
    prec = prec or f.prec
    if len(a) > f.degree ** n + 1:
        raise BadInput("subset larger than the spectrum")
    table = spectrum_table(f, n, prec=prec, budget=budget)
    mods = table.L[n]
    values = [gmpy2.mpfr(x) if not isinstance(x, gmpy2.mpfr) else x for x in a]
    t = gmpy2.mpfr(tol)
    adj = []
    for x in values:
        adj.append([j for j, y in enumerate(mods) if abs(x - y) <= t])
    size, _ = hopcroft_karp(adj, len(values), len(mods))
    return size == len(values)


def holomorphic_index_sum(f: RationalMap, prec: int | None = None):
    """Sum of 1/(1 - lambda) over the fixed points; equals 1 when no
    fixed point is parabolic (classical rational fixed point theorem)."""
    prec = prec or f.prec
    fixed = fixed_points_with_multipliers(f, 1, prec=prec)
    acc = BigComplex(0, 0, prec)
    one = BigComplex(1, 0, prec)
    for _, mult, lam in fixed:
        if (lam - 1).is_zero() or (lam - 1).abs() < gmpy2.mpfr(2) ** (-(prec // 2)):
            raise BadInput("index sum undefined: fixed point with multiplier 1")
        acc = acc + (one / (one - lam)) * mult
    return acc
