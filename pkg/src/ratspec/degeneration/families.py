"""One-parameter families over Q(i)(t): reduction at t=0 and rescaling limits.

Everything here is exact.  A family is a pair of z-polynomials with
TParam coefficients; the key operations are

* ``normalize_family`` — divide by the minimal t-power so the smallest
  coefficient valuation is 0 and clear common z-content;
* ``reduce_at_zero`` — the induced map on the special fiber, with the
  explicit-good-reduction verdict (integral coefficients and unit
  resultant) and the cleared common factor whose roots bound the
  central-fiber indeterminacy;
* ``base_change`` — substitute t -> t^n;
* ``rescaling_limit`` — reduce M^-1 o F^q o M at t=0, the algebraic test
  for a rescaling limit (the conjugated family fixing the Gauss point with
  degree >= 2 reduction);
* ``newton_polygon`` / ``propose_rescalings`` — root valuations of the
  fixed-point divisor and a search over centering/scaling candidates
  M(z) = c(t) + t^e z, validated through rescaling_limit.  Candidate
  discovery may lean on numerics (Puiseux leading terms snapped back to
  Q(i) and re-verified exactly); validation never does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..algebra import GaussianRational, Poly, poly_gcd, poly_roots, resultant_homogeneous
from ..algebra.poly import compose_pair, mobius_conjugate_pair
from ..errors import BadInput, BudgetExceeded, DegenerateMap, NoCandidates, ZeroFamily
from ..ratmap import RationalMap, SpherePoint
from .tparam import TParam, parse_tparam

RESCALING_DEGREE_BUDGET = 64

_T_ZERO = TParam.zero()
_T_ONE = TParam.one()


def _tp(x) -> TParam:
    if isinstance(x, TParam):
        return x
    if isinstance(x, str):
        return parse_tparam(x)
    return TParam.constant(x)


@dataclass(frozen=True)
class FamilyMap:
    num: Poly                 # z-polynomial with TParam coefficients
    den: Poly
    degree: int

    @staticmethod
    def from_coeffs(num_coeffs, den_coeffs) -> "FamilyMap":
        num = Poly([_tp(c) for c in num_coeffs])
        den = Poly([_tp(c) for c in den_coeffs])
        if num.is_zero() and den.is_zero():
            raise ZeroFamily("both coordinates vanish identically")
        d = max(num.degree, den.degree)
        if d < 1:
            raise DegenerateMap("family must have projective degree >= 1")
        fam = FamilyMap(num=num, den=den, degree=d)
        if fam.resultant().is_zero():
            raise DegenerateMap("generic resultant vanishes identically")
        return fam

    @staticmethod
    def from_json(obj) -> "FamilyMap":
        try:
            return FamilyMap.from_coeffs(obj["num"], obj["den"])
        except (KeyError, TypeError) as e:
            raise BadInput(f"family JSON must carry num/den coefficient lists: {e}") from e

    def to_obj(self) -> dict:
        return {
            "num": [c.to_string() for c in self.num.coeffs],
            "den": [c.to_string() for c in self.den.coeffs],
        }

    def _pad(self, p: Poly) -> list:
        return list(p.coeffs) + [_T_ZERO] * (self.degree - p.degree)

    def resultant(self) -> TParam:
        return resultant_homogeneous(self._pad(self.num), self._pad(self.den), self.degree)

    def coeff_valuations(self):
        vals = []
        for c in list(self.num.coeffs) + list(self.den.coeffs):
            v = c.valuation()
            if v is not None:
                vals.append(v)
        return vals

    def is_normalized(self) -> bool:
        vals = self.coeff_valuations()
        return bool(vals) and min(vals) == 0

    def fixed_point_polynomial(self) -> Poly:
        """num(z) - z den(z); its roots are the finite fixed points."""
        return self.num - self.den.shift_up(1)

    def specialize(self, t_value, mode: str = "mp", prec: int = 256) -> RationalMap:
        """Evaluate the family at a numeric parameter value."""
        num = [c.evaluate(t_value) for c in self.num.coeffs]
        den = [c.evaluate(t_value) for c in self.den.coeffs]
        return RationalMap.from_affine(num, den, mode=mode, prec=prec)


@dataclass(frozen=True)
class MobiusFamily:
    a: TParam
    b: TParam
    c: TParam
    d: TParam

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det.is_zero():
            raise DegenerateMap("Mobius family determinant vanishes identically")

    @staticmethod
    def from_coeffs(a, b, c, d) -> "MobiusFamily":
        return MobiusFamily(_tp(a), _tp(b), _tp(c), _tp(d))

    @staticmethod
    def from_json(obj) -> "MobiusFamily":
        try:
            return MobiusFamily.from_coeffs(obj["a"], obj["b"], obj["c"], obj["d"])
        except (KeyError, TypeError) as e:
            raise BadInput(f"mobius JSON must carry a, b, c, d: {e}") from e

    @staticmethod
    def identity() -> "MobiusFamily":
        return MobiusFamily(_T_ONE, _T_ZERO, _T_ZERO, _T_ONE)

    @staticmethod
    def affine(center: TParam, scale: TParam) -> "MobiusFamily":
        """z -> center + scale * z."""
        return MobiusFamily(scale, center, _T_ZERO, _T_ONE)

    def substitute_t_power(self, n: int) -> "MobiusFamily":
        return MobiusFamily(*(x.substitute_t_power(n) for x in (self.a, self.b, self.c, self.d)))

    def compose(self, other: "MobiusFamily") -> "MobiusFamily":
        """Matrix product: self after other."""
        return MobiusFamily(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusFamily":
        return MobiusFamily(self.d, -self.b, -self.c, self.a)

    def to_obj(self) -> dict:
        return {k: v.to_string() for k, v in
                (("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d))}


# -- normalization and reduction ------------------------------------------


def normalize_family(f: FamilyMap) -> FamilyMap:
    """Scale by t^(-min valuation) and clear common z-content."""
    vals = f.coeff_valuations()
    if not vals:
        raise ZeroFamily("family has no nonzero coefficient")
    vmin = min(vals)
    num = Poly([c.scale_by_t_power(-vmin) for c in f.num.coeffs])
    den = Poly([c.scale_by_t_power(-vmin) for c in f.den.coeffs])
    if not num.is_zero() and not den.is_zero():
        g = poly_gcd(num, den)
        if g.degree >= 1:
            num = num // g
            den = den // g
    d = max(num.degree, den.degree)
    return FamilyMap(num=num, den=den, degree=d)


@dataclass(frozen=True)
class GoodReductionReport:
    integral: bool
    resultant_valuation: int | None
    explicit_good: bool
    reduction_degree: int
    reduction: RationalMap | None          # degree >= 1 reductions
    constant_value: SpherePoint | None     # degree 0 collapse
    cleared_factor: Poly | None            # common factor of the special fiber
    indeterminacy: list = field(default_factory=list)

    def to_obj(self) -> dict:
        out = {
            "integral": self.integral,
            "resultant_valuation": self.resultant_valuation,
            "explicit_good": self.explicit_good,
            "reduction_degree": self.reduction_degree,
        }
        if self.reduction is not None:
            out["reduction"] = self.reduction.to_obj()
        if self.constant_value is not None:
            out["constant_value"] = self.constant_value.to_string()
        out["indeterminacy"] = [p.to_string(17) for p in self.indeterminacy]
        return out


def reduce_at_zero(f: FamilyMap, prec: int = 160) -> GoodReductionReport:
    """Reduction of the family on the special fiber t = 0."""
    fam = f if f.is_normalized() else normalize_family(f)
    integral = all(v >= 0 for v in fam.coeff_valuations())
    res = fam.resultant()
    res_val = res.valuation()
    d = fam.degree

    num0 = Poly([c.value_at_zero() for c in fam._pad(fam.num)])
    den0 = Poly([c.value_at_zero() for c in fam._pad(fam.den)])

    explicit_good = bool(integral and res_val == 0)
    if num0.is_zero() and den0.is_zero():
        raise ZeroFamily("special fiber vanished after normalization (internal error)")

    if num0.is_zero() or den0.is_zero():
        live = den0 if num0.is_zero() else num0
        if num0.is_zero():
            const = SpherePoint(GaussianRational(0), GaussianRational(1), normalize=False)
        else:
            const = SpherePoint(GaussianRational(1), GaussianRational(0), normalize=False)
        factor = live
        inf_mult = d - live.degree
        return GoodReductionReport(
            integral=integral, resultant_valuation=res_val, explicit_good=False,
            reduction_degree=0, reduction=None, constant_value=const,
            cleared_factor=factor,
            indeterminacy=_factor_roots(factor, inf_mult, prec))

    y_common = min(d - num0.degree, d - den0.degree)
    g = poly_gcd(num0, den0)
    red_degree = d - y_common - g.degree
    num_red = num0 // g if g.degree >= 1 else num0
    den_red = den0 // g if g.degree >= 1 else den0
    indeterminacy = _factor_roots(g, y_common, prec) if (g.degree >= 1 or y_common > 0) else []
    cleared = g if g.degree >= 1 else None

    if red_degree == 0:
        c_num = num_red.coeffs[0] if num_red.coeffs else GaussianRational(0)
        c_den = den_red.coeffs[0] if den_red.coeffs else GaussianRational(0)
        const = SpherePoint(c_num, c_den)
        return GoodReductionReport(
            integral=integral, resultant_valuation=res_val, explicit_good=False,
            reduction_degree=0, reduction=None, constant_value=const,
            cleared_factor=cleared, indeterminacy=indeterminacy)

    red = RationalMap.from_affine(list(num_red.coeffs), list(den_red.coeffs), mode="exact")
    return GoodReductionReport(
        integral=integral, resultant_valuation=res_val,
        explicit_good=explicit_good, reduction_degree=red_degree,
        reduction=red, constant_value=None,
        cleared_factor=cleared, indeterminacy=indeterminacy)


def _factor_roots(factor: Poly, inf_mult: int, prec: int) -> list:
    pts = []
    if factor.degree >= 1:
        for rc in poly_roots(factor, prec):
            pts.extend([SpherePoint.affine(rc.center)] * rc.multiplicity)
    if inf_mult > 0:
        pts.extend([SpherePoint.infinity("mp", prec)] * inf_mult)
    return pts


# -- base change and composition -------------------------------------------


def base_change(f: FamilyMap, n: int) -> FamilyMap:
    """Substitute t = u^n in every coefficient (exact)."""
    if n < 1:
        raise BadInput("base change order must be >= 1")
    return FamilyMap(
        num=Poly([c.substitute_t_power(n) for c in f.num.coeffs]),
        den=Poly([c.substitute_t_power(n) for c in f.den.coeffs]),
        degree=f.degree)


def iterate_family(f: FamilyMap, q: int, budget: int = RESCALING_DEGREE_BUDGET) -> FamilyMap:
    if q < 1:
        raise BadInput("iterate order must be >= 1")
    if f.degree ** q > budget:
        raise BudgetExceeded(f"degree {f.degree ** q} exceeds the rescaling budget {budget}")
    out = None
    base = f
    k = q
    while k:
        if k & 1:
            out = base if out is None else _compose_family(out, base)
        k >>= 1
        if k:
            base = _compose_family(base, base)
    return out


def _compose_family(f: FamilyMap, g: FamilyMap) -> FamilyMap:
    num, den = compose_pair(Poly(f._pad(f.num)), Poly(f._pad(f.den)), f.degree, g.num, g.den)
    return FamilyMap(num=num, den=den, degree=f.degree * g.degree)


def conjugate_family(f: FamilyMap, mob: MobiusFamily) -> FamilyMap:
    num, den = mobius_conjugate_pair(Poly(f._pad(f.num)), Poly(f._pad(f.den)), f.degree,
                                     mob.a, mob.b, mob.c, mob.d)
    if num.is_zero() and den.is_zero():
        raise DegenerateMap("conjugation collapsed the family")
    return normalize_family(FamilyMap(num=num, den=den, degree=max(num.degree, den.degree)))


# -- rescaling limits --------------------------------------------------------


@dataclass(frozen=True)
class RescalingResult:
    degenerate: bool
    limit: RationalMap | None
    indeterminacy: list
    report: GoodReductionReport

    def to_obj(self) -> dict:
        out = {"degenerate": self.degenerate,
               "indeterminacy": [p.to_string(17) for p in self.indeterminacy]}
        if self.limit is not None:
            out["limit"] = self.limit.to_obj()
        out["report"] = self.report.to_obj()
        return out


def rescaling_limit(f: FamilyMap, mob: MobiusFamily, q: int = 1,
                    budget: int = RESCALING_DEGREE_BUDGET) -> RescalingResult:
    """Reduce M^-1 o F^q o M at t = 0.

    Degenerate reductions are results, not errors: the report still
    carries the cleared factor and its vanishing locus.
    """
    fq = iterate_family(f, q, budget=budget)
    h = conjugate_family(fq, mob)
    report = reduce_at_zero(h)
    if report.reduction_degree >= 1:
        return RescalingResult(degenerate=False, limit=report.reduction,
                               indeterminacy=report.indeterminacy, report=report)
    return RescalingResult(degenerate=True, limit=None,
                           indeterminacy=report.indeterminacy, report=report)


# -- Newton polygon -----------------------------------------------------------


def newton_polygon(p) -> list[tuple[Fraction, int]]:
    """Lower convex hull of (i, v(a_i)): list of (slope, horizontal length).

    Convention: a segment of slope s and length L reports L roots of
    t-adic valuation -s (normative example: z^2 - (1+t) z + t has segments
    of slopes -1 and 0, i.e. roots of valuations 1 and 0).
    """
    if isinstance(p, (list, tuple)):
        p = Poly([_tp(c) for c in p])
    pts = [(k, c.valuation()) for k, c in enumerate(p.coeffs)]
    pts = [(k, v) for k, v in pts if v is not None]
    if not pts:
        from ..errors import ZeroPolynomial

        raise ZeroPolynomial("Newton polygon of the zero polynomial")
    hull = [pts[0]]
    for q in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (q[0] - x1) >= (q[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(q)
    out = []
    for (x1, y1), (x2, y2) in zip(hull[:-1], hull[1:]):
        out.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    return out


def root_valuations(p) -> list[tuple[Fraction, int]]:
    """(valuation, count) classes of the roots, from the Newton polygon."""
    return [(-s, l) for s, l in newton_polygon(p)]


# -- Puiseux centers (numeric-assisted, exactly verified) ---------------------


def _segment_char_poly(p: Poly, slope: Fraction) -> Poly:
    """Characteristic polynomial of a Newton-polygon segment.

    For roots z ~ c t^beta with beta = -slope, collect the exponents i on
    the segment line and form sum lead(a_i) c^(i - i0).
    """
    pts = [(k, c.valuation()) for k, c in enumerate(p.coeffs) if c.valuation() is not None]
    on_line = []
    i0, v0 = None, None
    best = None
    for k, v in pts:
        key = v - slope * k
        if best is None or key < best:
            best = key
    for k, v in pts:
        if v - slope * k == best:
            on_line.append(k)
    i0 = min(on_line)
    deg = max(on_line) - i0
    coeffs = [GaussianRational(0)] * (deg + 1)
    for k, v in pts:
        if v - slope * k == best:
            coeffs[k - i0] = p.coeffs[k].leading_coeff()
    return Poly(coeffs)


def _exact_roots_qi(p: Poly, prec: int = 192, denom_bound: int = 10 ** 8):
    """Roots of a Q(i)-polynomial that lie in Q(i), with multiplicity.

    Degrees 1 and 2 are solved exactly; beyond that roots are found
    numerically, snapped to bounded-denominator Gaussian rationals and
    verified by exact substitution (non-Q(i) roots are dropped).
    """
    out = []
    if p.degree == 1:
        out.append((-p.coeffs[0] / p.coeffs[1], 1))
        return out
    if p.degree == 2:
        a, b, c = p.coeffs[2], p.coeffs[1], p.coeffs[0]
        disc = b * b - GaussianRational(4) * a * c
        root = disc.sqrt_exact()
        if root is None:
            return []
        two_a = GaussianRational(2) * a
        r1 = (-b + root) / two_a
        r2 = (-b - root) / two_a
        if r1 == r2:
            return [(r1, 2)]
        return [(r1, 1), (r2, 1)]
    for rc in poly_roots(p, prec):
        re = Fraction(float(rc.center.re)).limit_denominator(denom_bound)
        im = Fraction(float(rc.center.im)).limit_denominator(denom_bound)
        cand = GaussianRational(re, im)
        if p.evaluate(cand).is_zero():
            out.append((cand, rc.multiplicity))
    return out


def puiseux_branches(p: Poly, depth: int = 3, positive_only: bool = False):
    """Branch expansions z = sum c_j t^(e_j) of the roots of p over Q(i)((t)).

    Only integer exponents are expanded (run after base change);
    fractional-valuation classes are reported as (None, denominator) stubs
    so callers can surface base-change hints.  Exact-polynomial arithmetic
    throughout; leading coefficients outside Q(i) terminate a branch.
    """
    branches = []
    hints = set()
    if p.is_zero():
        return branches, hints
    k0 = 0
    while k0 < len(p.coeffs) and p.coeffs[k0].is_zero():
        k0 += 1
    if k0 == len(p.coeffs):
        return branches, hints
    if k0 > 0:
        branches.append([])          # z = 0 exact root (k0-fold)
        p = Poly(p.coeffs[k0:])
    if p.degree < 1:
        return branches, hints
    for slope, length in newton_polygon(p):
        beta = -slope
        if positive_only and beta <= 0:
            continue
        if beta.denominator != 1:
            hints.add(beta.denominator)
            continue
        char = _segment_char_poly(p, slope)
        for c, mult in _exact_roots_qi(char):
            if c.is_zero():
                continue
            term = (int(beta), c)
            if depth <= 1:
                branches.append([term])
                continue
            shifted = _substitute_branch(p, int(beta), c)
            sub_branches, sub_hints = puiseux_branches(shifted, depth - 1, positive_only=True)
            hints |= sub_hints
            if not sub_branches:
                branches.append([term])
            for sb in sub_branches:
                branches.append([term] + [(e + int(beta), cc) for e, cc in sb])
    return branches, hints


def _substitute_branch(p: Poly, beta: int, c: GaussianRational) -> Poly:
    """p(t^beta (c + y)) as a polynomial in y, normalized by t^(-min val)."""
    tb = TParam.t_power(beta)
    shift = Poly([TParam.constant(c) * tb, tb])
    q = p.compose(shift)
    vals = [co.valuation() for co in q.coeffs if co.valuation() is not None]
    if not vals:
        return Poly([])
    vmin = min(vals)
    return Poly([co.scale_by_t_power(-vmin) for co in q.coeffs])


# -- rescaling proposals ------------------------------------------------------


@dataclass(frozen=True)
class RescalingProposal:
    base_change_order: int
    mobius: MobiusFamily
    limit: RationalMap
    indeterminacy: list

    def to_obj(self) -> dict:
        return {
            "base_change_order": self.base_change_order,
            "mobius": self.mobius.to_obj(),
            "limit": self.limit.to_obj(),
            "indeterminacy": [p.to_string(17) for p in self.indeterminacy],
        }


def propose_rescalings(f: FamilyMap, q: int = 1, max_denominator: int = 6,
                       depth: int = 3,
                       budget: int = RESCALING_DEGREE_BUDGET) -> list[RescalingProposal]:
    """Search centering/scaling families M(z) = c(t) + t^e z for degree >= 2 limits.

    Candidate centers are truncated Puiseux expansions of the fixed points
    of F^q; candidate scale exponents come from sibling-root separations
    and from the Newton polygons (in z) of the recentered coordinates.
    Candidates are validated through rescaling_limit; only validated
    proposals are returned.  Raises NoCandidates (carrying base-change
    hints) when nothing validates.
    """
    fq = iterate_family(f, q, budget=budget)
    hints: set[int] = set()
    proposals: list[RescalingProposal] = []
    seen: set[tuple] = set()

    fixpoly = fq.fixed_point_polynomial()
    if not fixpoly.is_zero():
        for val, _count in root_valuations(fixpoly):
            if val.denominator != 1 and val.denominator <= max_denominator:
                hints.add(val.denominator)

    orders = [1] + sorted(h for h in hints if 1 < h <= max_denominator)
    for n in orders:
        fn = base_change(f, n) if n > 1 else f
        fqn = iterate_family(fn, q, budget=budget)
        fixpoly_n = fqn.fixed_point_polynomial()
        branches, more_hints = ([], set()) if fixpoly_n.is_zero() else puiseux_branches(fixpoly_n, depth)
        hints |= {n * h for h in more_hints if n * h <= max_denominator}
        centers = [[]]
        for br in branches:
            for cut in range(1, len(br) + 1):
                centers.append(br[:cut])
        dedup_centers = []
        center_keys = set()
        for ctr in centers:
            key = tuple(ctr)
            if key not in center_keys:
                center_keys.add(key)
                dedup_centers.append(ctr)
        for ctr in dedup_centers:
            center = _center_tparam(ctr)
            exps = _candidate_exponents(fn, fqn, branches, ctr, max_denominator, hints)
            for e in sorted(exps):
                key = (n, e, center.to_string())
                if key in seen:
                    continue
                seen.add(key)
                mob = MobiusFamily.affine(center, TParam.t_power(e))
                try:
                    res = rescaling_limit(fn, mob, q, budget=budget)
                except (DegenerateMap, ZeroFamily, BudgetExceeded):
                    continue
                if not res.degenerate and res.limit is not None and res.limit.degree >= 2:
                    proposals.append(RescalingProposal(
                        base_change_order=n, mobius=mob, limit=res.limit,
                        indeterminacy=res.indeterminacy))
    if not proposals:
        raise NoCandidates(hints=sorted(h for h in hints if h > 1))
    proposals.sort(key=lambda p: (p.base_change_order,
                                  p.mobius.a.valuation() or 0,
                                  p.mobius.b.to_string()))
    return proposals


def _center_tparam(center_terms) -> TParam:
    acc = TParam.zero()
    for e, c in center_terms:
        acc = acc + TParam.constant(c) * TParam.t_power(e)
    return acc


def _candidate_exponents(fn: FamilyMap, fqn: FamilyMap, branches, center_terms,
                         max_denominator: int, hints: set) -> set[int]:
    """Scale exponents: the next branch exponent, sibling separations, and
    the z-Newton-polygon valuations of the recentered map coordinates."""
    exps = {0}
    center = _center_tparam(center_terms)
    # sibling separations: valuations of (center - other branch)
    for other in branches:
        diff_val = _difference_valuation(center_terms, other)
        if diff_val is not None:
            if diff_val.denominator == 1:
                exps.add(int(diff_val))
            elif diff_val.denominator <= max_denominator:
                hints.add(diff_val.denominator)
    # next exponent of the branch itself
    for br in branches:
        if br[: len(center_terms)] == list(center_terms) and len(br) > len(center_terms):
            exps.add(br[len(center_terms)][0])
    # tropical breakpoints of the recentered coordinates
    shift = Poly([center, TParam.one()])
    for coord in (fn.num, fn.den, fqn.fixed_point_polynomial()):
        if coord.is_zero():
            continue
        shifted = coord.compose(shift)
        if shifted.is_zero():
            continue
        for val, _cnt in root_valuations(shifted):
            if val.denominator == 1:
                exps.add(int(val))
            elif val.denominator <= max_denominator:
                hints.add(val.denominator)
    return exps


def _difference_valuation(center_terms, other_branch):
    """Valuation of (center - other branch expansion), None if identical."""
    a = dict()
    for e, c in center_terms:
        a[e] = c
    for e, c in other_branch:
        if e in a:
            if (a[e] - c).is_zero():
                del a[e]
            else:
                a[e] = a[e] - c
        else:
            a[e] = -c
    if not a:
        return None
    return Fraction(min(a.keys()))
