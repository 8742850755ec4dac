"""Horseshoes from homoclinic orbits and the Livsic linearity test.

A horseshoe is built from k >= 2 disjoint inverse branches of f^m into a
base disk V = psi(D(0, r)): the pullback components along each homoclinic
orbit plus the central branch through the fixed point (z -> z/lam^m in
chart coordinates).  Symbolic dynamics is the full shift on k letters;
``periodic_words`` locates the unique periodic point for every primitive
word (one Lyndon representative per cycle) by iterating the composed
inverse branches, and ``livsic_linearity_test`` compares the per-step
averages of log|df| across all coded orbits — equal averages (variance
below threshold) are the cohomological signature of a linear repeller.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .algebra import BigComplex
from .errors import BadInput, BranchLost, BranchOverlap
from .homoclinic import (
    BOUNDARY_SAMPLES,
    HomoclinicOrbit,
    KoenigsChart,
    LinearizationDomain,
    _continue_chain,
    good_return_time,
    working_pair,
)
from .ratmap import RationalMap, SpherePoint


@dataclass
class Branch:
    label: int
    kind: str                     # "central" | "orbit"
    center: SpherePoint           # anchor point of the branch disk
    chain: list | None            # reference pullback chain (orbit branches)
    boundary: list                # sampled boundary of the branch disk


@dataclass
class Horseshoe:
    f: RationalMap
    chart: KoenigsChart
    domain: LinearizationDomain
    m: int
    branches: list
    kappa: float                  # measured contraction of branch disks into V

    @property
    def k(self) -> int:
        return len(self.branches)

    def apply_branch(self, label: int, x: SpherePoint,
                     state: list | None = None) -> tuple[SpherePoint, list]:
        """Inverse branch G_label: V -> U_label applied to x.

        ``state`` carries the previous pullback chain of this branch slot
        for fast continuation; pass the returned chain back in.
        """
        br = self.branches[label - 1]
        if br.kind == "central":
            chart = self.chart
            z = chart.psi_inv(x.to_affine())
            if z is None:
                raise BranchLost("point left the chart while applying the central branch")
            return chart.point_at(z / chart.lam ** self.m), state
        ref = state if state is not None else br.chain
        chain = _continue_chain(self.f, ref, x, self.chart.prec,
                                substeps=1 if state is not None else 8)
        return chain[self.m], chain


def build_horseshoe(f: RationalMap, chart: KoenigsChart,
                    orbits: list[HomoclinicOrbit], margin: float = 0.1,
                    m_cap: int = 12) -> Horseshoe:
    """Horseshoe with branches through each orbit plus the central branch.

    All orbits must share the chart's fixed point; a common good return
    time is certified per orbit, branch disks are pulled back at the
    largest one, and disjointness is certified on boundary samples
    (increasing m up to m_cap extra steps on overlap).
    """
    if not orbits:
        raise BadInput("at least one homoclinic orbit is required")
    for orb in orbits:
        if orb.o.chordal(chart.o) > gmpy2.mpfr(2) ** (-(chart.prec // 4)):
            raise BadInput("all orbits must be homoclinic at the chart's fixed point")
    pairs = [working_pair(orb, margin=margin) for orb in orbits]
    radius = min((dom.radius for dom, _ in pairs), key=float)
    domain = LinearizationDomain(chart, radius)
    m0 = 0
    for orb in orbits:
        m0 = max(m0, good_return_time(orb, domain, margin=margin))
    prec = chart.prec

    last_err = None
    for m in range(m0, m0 + m_cap):
        try:
            branches = _build_branches(f, chart, domain, orbits, m)
        except BranchLost as e:
            last_err = e
            continue
        try:
            _certify_disjoint(branches)
        except BranchOverlap as e:
            last_err = e
            continue
        kappa = _measure_kappa(chart, domain, branches)
        return Horseshoe(f=f, chart=chart, domain=domain, m=m,
                         branches=branches, kappa=kappa)
    raise last_err if last_err else BranchOverlap("no disjoint branch system found")


def _build_branches(f, chart, domain, orbits, m):
    prec = chart.prec
    boundary = domain.boundary_points(BOUNDARY_SAMPLES)
    branches = []
    # central branch: exact in chart coordinates
    lam_m = chart.lam ** m
    central_boundary = []
    for p in boundary:
        z = chart.psi_inv(p.to_affine())
        if z is None:
            raise BranchLost("domain boundary fell outside the chart")
        central_boundary.append(chart.point_at(z / lam_m))
    branches.append(Branch(label=1, kind="central", center=chart.o,
                           chain=None, boundary=central_boundary))
    for j, orb in enumerate(orbits):
        orb.extend(m)
        ref = [orb.point(i) for i in range(m + 1)]
        cur = ref
        bnd = []
        for t in boundary:
            cur = _continue_chain(f, cur, t, prec, substeps=8)
            bnd.append(cur[m])
        branches.append(Branch(label=2 + j, kind="orbit", center=orb.point(m),
                               chain=ref, boundary=bnd))
    return branches


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def _affine_xy(points):
    return [(float(p.to_affine().re), float(p.to_affine().im)) for p in points]


def _certify_disjoint(branches):
    """Distinct pullback components are disjoint by definition; this checks
    the sampled polygons do not cross and are not nested (a failed check
    signals an unreliable boundary sample, not actual geometry)."""
    from .homoclinic import _polygon_contains

    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            bi, bj = branches[i], branches[j]
            if _polygon_contains(bi.boundary, bj.center) or _polygon_contains(bj.boundary, bi.center):
                raise BranchOverlap(
                    f"branch disk {bi.label} contains the center of {bj.label}; increase m")
            pi = _affine_xy(bi.boundary)
            pj = _affine_xy(bj.boundary)
            for a, b in zip(pi, pi[1:] + pi[:1]):
                for c, d in zip(pj, pj[1:] + pj[:1]):
                    if _segments_intersect(a, b, c, d):
                        raise BranchOverlap(
                            f"branch boundaries {bi.label} and {bj.label} cross; increase m")


def _measure_kappa(chart, domain, branches) -> float:
    worst = 0.0
    for br in branches:
        for p in br.boundary:
            z = chart.psi_inv(p.to_affine())
            if z is None:
                raise BranchLost("branch boundary left the chart")
            worst = max(worst, float(z.abs() / domain.radius))
    return worst


def lyndon_words(k: int, max_len: int) -> list[tuple[int, ...]]:
    """Lyndon words over {1..k} of length <= max_len, ordered by (length, lex).

    One Lyndon word per primitive necklace = one representative per
    periodic orbit of the full shift.
    """
    out = []
    w = [0]
    while w:
        w[-1] += 1
        out.append(tuple(w))
        period = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - period])
        while w and w[-1] == k:
            w.pop()
    out.sort(key=lambda t: (len(t), t))
    return out


@dataclass(frozen=True)
class CodedOrbit:
    word: tuple
    period: int                   # word length n; point has period n*m under f
    point: SpherePoint
    multiplier: BigComplex        # d(f^(n m)) at the point
    lyapunov_mean: float          # log|multiplier| / (n m)


def periodic_words(h: Horseshoe, f: RationalMap, max_len: int) -> list[CodedOrbit]:
    """The unique coded periodic point for every primitive word, via the
    contraction G_w = G_{w_1} o ... o G_{w_n} on the base disk."""
    prec = h.chart.prec
    stop = gmpy2.mpfr(2) ** (-(prec - 32))
    out = []
    for word in lyndon_words(h.k, max_len):
        n = len(word)
        x = h.chart.o
        states = [None] * n
        q = None
        for _ in range(600):
            y = x
            for pos in range(n - 1, -1, -1):
                y, states[pos] = h.apply_branch(word[pos], y, states[pos])
            if y.chordal(x) <= stop:
                q = y
                break
            x = y
        if q is None:
            raise BranchLost(f"coded fixed point for word {word} did not converge")
        total = n * h.m
        pts = f.orbit(q, total - 1)
        mu = f.multiplier_of_orbit(pts)
        out.append(CodedOrbit(
            word=word, period=n, point=q, multiplier=mu,
            lyapunov_mean=float(gmpy2.log(mu.abs()) / total)))
    return out


@dataclass(frozen=True)
class LivsicReport:
    orbit_means: list             # (word, period, mean log|df| per f-step)
    mean: float
    variance: float
    verdict: str                  # linear-consistent | nonlinear
    threshold: float

    def to_obj(self) -> dict:
        return {
            "orbit_means": [
                {"word": "".join(map(str, w)), "period": n, "mean": mval}
                for w, n, mval in self.orbit_means
            ],
            "mean": self.mean,
            "variance": self.variance,
            "verdict": self.verdict,
            "threshold": self.threshold,
        }


def livsic_linearity_test(h: Horseshoe, f: RationalMap, max_len: int = 3,
                          threshold: float = 1e-12,
                          coded: list | None = None) -> LivsicReport:
    """Variance of per-step log|df| averages over all coded periodic orbits.

    Equality of all averages is the periodic-orbit obstruction from the
    Livsic equation sum phi(f^i x) = nC with phi = log|df|; on a Cantor
    horseshoe a linear-consistent verdict is evidence of exceptionality.
    """
    coded = coded if coded is not None else periodic_words(h, f, max_len)
    if not coded:
        raise BadInput("no coded orbits")
    means = [(c.word, c.period, c.lyapunov_mean) for c in coded]
    vals = [mv for _, _, mv in means]
    mean = sum(vals) / len(vals)
    var = sum((v - mean) ** 2 for v in vals) / len(vals)
    verdict = "linear-consistent" if var <= threshold else "nonlinear"
    return LivsicReport(orbit_means=means, mean=mean, variance=var,
                        verdict=verdict, threshold=threshold)


def expansion_lower_bound(h: Horseshoe, f: RationalMap,
                          coded: list | None = None) -> float:
    """Min over sampled horseshoe points of |d(f^m)|, affine chain product."""
    coded = coded if coded is not None else periodic_words(h, f, 2)
    best = None
    for c in coded:
        pts = f.orbit(c.point, h.m - 1)
        acc = gmpy2.mpfr(1)
        for j, p in enumerate(pts):
            nxt = f.evaluate(p)
            if p.is_infinity() or nxt.is_infinity():
                raise BadInput("horseshoe orbit passes through infinity")
            acc *= f.derivative_at(p, tgt_cochart=not nxt.is_finite_chart()).abs()
        v = float(acc)
        best = v if best is None else min(best, v)
    return best


def cylinder_diameter(h: Horseshoe, f: RationalMap, word: tuple) -> float:
    """Max chordal diameter of the cylinder with the given itinerary,
    measured on pulled-back boundary samples (16 per branch)."""
    samples = h.domain.boundary_points(16)
    states = [None] * len(word)
    imgs = []
    for s in samples:
        y = s
        for pos in range(len(word) - 1, -1, -1):
            y, states[pos] = h.apply_branch(word[pos], y, states[pos])
        imgs.append(y)
    worst = 0.0
    for i in range(len(imgs)):
        for j in range(i + 1, len(imgs)):
            worst = max(worst, float(imgs[i].chordal(imgs[j])))
    return worst
