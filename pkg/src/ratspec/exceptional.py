"""Exceptional-map constructors and the two statement-level detectors.

``make_exceptional`` builds power maps z^m, Chebyshev maps (classical
normalization T_m(cos t) = cos mt) and the degree-4 family induced by
doubling on the elliptic curve y^2 = x(x-1)(x-a),

    f_a(z) = (z^2 - a)^2 / (4 z (z-1)(z-a)),

whose coefficients come from the duplication law x(2P) = s^2 + (1+a) - 2x
with tangent slope s = c'(x)/(2y), c(x) = x(x-1)(x-a); the constructor
re-derives x(2P) through that group law at sample points and refuses to
return a map that fails the check.

Both detectors are evidence-only: a pass never certifies exceptionality
(the hypotheses quantify over all periods), a fail always carries a
witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .algebra import BigComplex, GaussianRational
from .algebra.scalars import context
from .errors import BadParameter
from .periodic import fixed_points_with_multipliers
from .ratmap import RationalMap, SpherePoint


@dataclass(frozen=True)
class QuadraticRing:
    """Ring of integers of Q(sqrt(-D)), D squarefree positive.

    The lattice basis is {1, w} with w = sqrt(-D) when -D = 2, 3 (mod 4)
    and w = (1 + sqrt(-D))/2 when -D = 1 (mod 4).
    """

    D: int

    def __post_init__(self):
        if self.D < 1:
            raise BadParameter("D must be a positive integer")
        d = self.D
        for p in range(2, int(d ** 0.5) + 1):
            if d % (p * p) == 0:
                raise BadParameter("D must be squarefree")

    def omega(self, prec: int = 256) -> BigComplex:
        ctx = context(prec)
        root = ctx.sqrt(gmpy2.mpfr(self.D, prec))
        if (-self.D) % 4 == 1:
            half = ctx.div(gmpy2.mpfr(1, prec), gmpy2.mpfr(2, prec))
            return BigComplex(half, ctx.div(root, gmpy2.mpfr(2, prec)), prec)
        return BigComplex(0, root, prec)

    def nearest_distance(self, z: BigComplex):
        """Distance from z to the nearest lattice point m + n*omega."""
        w = self.omega(z.prec)
        n_est = z.im / w.im
        best = None
        for dn in (-1, 0, 1):
            n = int(gmpy2.rint(n_est)) + dn
            m_est = z.re - n * w.re
            for dm in (-1, 0, 1):
                m = int(gmpy2.rint(m_est)) + dm
                cand = BigComplex(m, 0, z.prec) + w * n
                dist = (z - cand).abs()
                if best is None or dist < best:
                    best = dist
        return best


@dataclass(frozen=True)
class ExceptionalVerdict:
    verdict: str                     # pass | fail | inconclusive
    periods_checked: int
    witness: dict | None = None      # period, point, multiplier, distance
    detail: dict | None = None

    def to_obj(self) -> dict:
        out = {"verdict": self.verdict, "periods_checked": self.periods_checked}
        if self.witness:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


def _chebyshev_coeffs(m: int) -> list[int]:
    t_prev, t_cur = [1], [0, 1]
    for _ in range(m - 1):
        t_next = [0] + [2 * c for c in t_cur]
        for k, c in enumerate(t_prev):
            t_next[k] -= c
        t_prev, t_cur = t_cur, t_next
    return t_cur


def make_exceptional(kind: str, param, mode: str = "mp", prec: int = 256) -> RationalMap:
    """Constructors: kind in {'power', 'chebyshev', 'flexible_lattes'}."""
    if kind == "power":
        m = int(param)
        if abs(m) < 2:
            raise BadParameter("power maps need |m| >= 2")
        if m > 0:
            return RationalMap.from_affine([0] * m + [1], [1], mode=mode, prec=prec)
        return RationalMap.from_affine([1], [0] * (-m) + [1], mode=mode, prec=prec)

    if kind == "chebyshev":
        m = int(param)
        if m < 2:
            raise BadParameter("chebyshev maps need m >= 2")
        coeffs = _chebyshev_coeffs(m)
        f = RationalMap.from_affine(coeffs, [1], mode=mode, prec=prec)
        _verify_chebyshev(f, m, prec)
        return f

    if kind == "flexible_lattes":
        a = param if isinstance(param, GaussianRational) else GaussianRational(Fraction(param))
        if a == GaussianRational(0) or a == GaussianRational(1):
            raise BadParameter("flexible Lattes parameter must avoid {0, 1}")
        one = GaussianRational(1)
        num = [a * a, GaussianRational(0), GaussianRational(-2) * a, GaussianRational(0), one]
        den = [GaussianRational(0), GaussianRational(4) * a,
               GaussianRational(-4) * (one + a), GaussianRational(4)]
        f = RationalMap.from_affine(num, den, mode=mode, prec=prec)
        _verify_duplication(f, a, prec)
        return f

    raise BadParameter(f"unknown exceptional kind {kind!r}")


def _verify_chebyshev(f: RationalMap, m: int, prec: int, samples: int = 20):
    """Semiconjugacy check: T_m((w + 1/w)/2) = (w^m + w^-m)/2 on sample points."""
    ctx = context(prec)
    bound = gmpy2.mpfr(2) ** (-(prec // 2))
    two_pi = 2 * ctx.const_pi()
    for k in range(samples):
        theta = two_pi * k / samples + gmpy2.mpfr(1, prec) / 7
        r = gmpy2.mpfr("1.3", prec)
        w = BigComplex(ctx.mul(r, ctx.cos(theta)), ctx.mul(r, ctx.sin(theta)), prec)
        z = (w + 1 / w) / 2
        lhs = f.evaluate(SpherePoint.affine(z)).to_affine()
        rhs = (w ** m + 1 / w ** m) / 2
        if (lhs - rhs).abs() > bound:
            raise BadParameter(f"Chebyshev semiconjugacy residual too large at sample {k}")


def _verify_duplication(f: RationalMap, a: GaussianRational, prec: int, samples: int = 20):
    """Group-law oracle: f(x(P)) must equal x(2P) from the tangent construction."""
    ctx = context(prec)
    bound = gmpy2.mpfr(2) ** (-(prec // 2))
    av = a.to_bigcomplex(prec)
    one = BigComplex(1, 0, prec)
    for k in range(samples):
        x = BigComplex(Fraction(3, 10) + Fraction(k, 7), Fraction(k, 13), prec)
        y2 = x * (x - one) * (x - av)
        if y2.abs() < gmpy2.mpfr("1e-6"):
            continue
        y = y2.sqrt()
        slope = (x * x * 3 - (one + av) * x * 2 + av) / (y * 2)
        x2p = slope * slope + (one + av) - x * 2
        fx = f.evaluate(SpherePoint.affine(x)).to_affine()
        if (fx - x2p).abs() > bound:
            raise BadParameter(f"duplication-law residual too large at sample {k}")


def milnor_integrality_test(f: RationalMap, ring: QuadraticRing, nmax: int = 3,
                            tol: float = 1e-20, prec: int | None = None) -> ExceptionalVerdict:
    """Pass iff every multiplier of s_n, n <= nmax, is within tol of the ring lattice.

    A pass is evidence consistent with exceptionality only; the underlying
    statement quantifies over all n.
    """
    prec = prec or f.prec
    t = gmpy2.mpfr(tol)
    for n in range(1, nmax + 1):
        for pt, _, lam in fixed_points_with_multipliers(f, n, prec=prec):
            dist = ring.nearest_distance(lam)
            if dist > t:
                return ExceptionalVerdict(
                    verdict="fail", periods_checked=nmax,
                    witness={
                        "period": n,
                        "point": pt.to_string(20),
                        "multiplier": lam.to_string(),
                        "distance": float(dist),
                    })
    return ExceptionalVerdict(verdict="pass", periods_checked=nmax)


def constant_lyapunov_test(f: RationalMap, nmax: int = 3, tol: float = 1e-20,
                           exception_budget: int = 4,
                           prec: int | None = None) -> ExceptionalVerdict:
    """Fit a single a > 0 with |lambda| = a^n over repelling spectrum entries.

    Pass iff at most ``exception_budget`` violating appearances remain,
    where an appearance is a (period n, periodic point) pair whose
    multiplier breaks |lambda| = a^n by more than tol in log scale (a point
    violating at several periods n <= nmax counts once per period).
    Attracting and indifferent points never count.

    Each *fixed* branch point of a semiconjugacy contributes nmax
    appearances, so the budget must be at least nmax times their number:
    the degree-3 Chebyshev map fixes both branch points +-1 and needs
    exception_budget >= 2 * nmax even though it is exceptional.
    """
    prec = prec or f.prec
    repelling = []  # (n, point, lambda, log|lambda|)
    for n in range(1, nmax + 1):
        for pt, _, lam in fixed_points_with_multipliers(f, n, prec=prec):
            a = lam.abs()
            if a > 1 + gmpy2.mpfr("1e-9"):
                repelling.append((n, pt, lam, gmpy2.log(a)))
    if not repelling:
        return ExceptionalVerdict(verdict="inconclusive", periods_checked=nmax,
                                  detail={"reason": "no repelling periodic points found"})
    t = gmpy2.mpfr(tol)

    def violators(log_a):
        return [(n, pt) for n, pt, _, ll in repelling if abs(ll - n * log_a) > t]

    candidates = sorted({str(ll / n): ll / n for n, _, _, ll in repelling}.values(),
                        key=lambda v: v)
    best_log_a, best_bad = None, None
    for cand in candidates:
        bad = violators(cand)
        if best_bad is None or len(bad) < len(best_bad):
            best_log_a, best_bad = cand, bad
    a_fit = float(gmpy2.exp(best_log_a))
    if len(best_bad) <= exception_budget:
        return ExceptionalVerdict(verdict="pass", periods_checked=nmax,
                                  detail={"a": a_fit, "violations": len(best_bad)})
    n0, w = best_bad[0]
    return ExceptionalVerdict(
        verdict="fail", periods_checked=nmax,
        witness={"period": n0, "point": w.to_string(20), "violations": len(best_bad), "a": a_fit},
        detail={"a": a_fit, "violations": len(best_bad)})
