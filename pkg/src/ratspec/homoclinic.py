"""Linearization charts, homoclinic orbits and adjoint periodic sequences.

The engine at a repelling fixed point o with multiplier lam:

* ``koenigs_chart`` solves f(psi(z)) = psi(lam z) for the normalized
  series psi(z) = o + z + sum c_k z^k (coefficient k is fixed by
  (lam^k - lam) c_k = lower-order data; no resonance since |lam| > 1) and
  certifies an injectivity radius from the coefficient-tail majorant
  together with the univalence bound sum k |c_k| r^(k-1) < 1.
* ``find_homoclinic`` searches backward orbits of a seed preimage until
  one enters the chart, then continues with the unique inverse branch
  fixing o (z -> z/lam in chart coordinates).
* ``good_return_time`` certifies the pair (U, m): the pullback component
  U_m of U along the orbit sits compactly inside U with margin, and f^m
  is injective on it; both are checked on pulled-back boundary samples.
* ``adjoint_sequence`` computes the unique i-periodic point q_i in U_i by
  iterating the branch-tracked inverse of f^i, cross-checked against
  damped Newton on f^i(z) - z, and records mu_i = df^i(q_i).
* ``fit_asymptotics`` extracts the law mu_i ~ lam^i theta0 + offset with
  residuals decaying like 1/|lam|; ``exceptional_criterion`` turns the
  fit into a pass/fail verdict for the exact law mu_i = C lam^i.

Charts are built at finite fixed points only; conjugate the map first
when the interesting fixed point sits at infinity.  The injectivity
radius is a sampled/majorant certificate, not a computer-assisted proof.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import gmpy2

from .algebra import BigComplex, poly_roots
from .algebra.roots import quadratic_roots
from .algebra.scalars import context
from .errors import (
    BadInput,
    BranchLost,
    CriticalCollision,
    DepthExceeded,
    FitUnstable,
    NewtonDisagreement,
    NoReturnFound,
    NotRepelling,
    SeriesDiverged,
)
from .exceptional import ExceptionalVerdict
from .ratmap import RationalMap, SpherePoint

SAFETY_FRACTION = 0.8      # "inside U" means |psi^-1(x)| <= SAFETY * radius
DEFAULT_MARGIN = 0.1
BOUNDARY_SAMPLES = 64
CRIT_EXCLUSION = 1e-8


@dataclass(frozen=True)
class KoenigsChart:
    o: SpherePoint
    lam: BigComplex
    psi_coeffs: list          # c_1..c_N of psi(z) = o + sum c_k z^k, c_1 = 1
    order: int
    r_inj: object             # mpfr
    prec: int

    def psi(self, z: BigComplex) -> BigComplex:
        acc = z * 0
        for c in reversed(self.psi_coeffs):
            acc = (acc + c) * z
        return self.o.to_affine() + acc

    def psi_deriv(self, z: BigComplex) -> BigComplex:
        acc = z * 0
        for k in range(len(self.psi_coeffs), 0, -1):
            acc = acc * z + self.psi_coeffs[k - 1] * k
        return acc

    def psi_inv(self, w: BigComplex) -> BigComplex | None:
        """Invert psi near 0 by Newton; None outside the reliable region."""
        target = w - self.o.to_affine()
        z = target
        tol = gmpy2.mpfr(2) ** (-(self.prec - 16))
        cap = gmpy2.mpfr(2) * self.r_inj
        for _ in range(80):
            fz = self.psi(z) - w
            if fz.abs() <= tol * max(gmpy2.mpfr(1), z.abs()):
                return z if z.abs() <= cap else None
            dz = self.psi_deriv(z)
            if dz.is_zero():
                return None
            z = z - fz / dz
            if z.abs() > cap * 4:
                return None
        return None

    def chart_coord(self, p: SpherePoint, frac: float = 1.0) -> BigComplex | None:
        """psi^-1 of a sphere point if it lies within frac * r_inj, else None."""
        if p.is_infinity():
            return None
        z = self.psi_inv(p.to_affine())
        if z is None or z.abs() > gmpy2.mpfr(frac) * self.r_inj:
            return None
        return z

    def point_at(self, z: BigComplex) -> SpherePoint:
        return SpherePoint.affine(self.psi(z))


@dataclass(frozen=True)
class LinearizationDomain:
    """Paper-style working domain U = psi(D(0, radius)), radius <= r_inj."""

    chart: KoenigsChart
    radius: object  # mpfr

    def boundary_points(self, count: int = BOUNDARY_SAMPLES) -> list[SpherePoint]:
        prec = self.chart.prec
        ctx = context(prec)
        two_pi = 2 * ctx.const_pi()
        out = []
        for k in range(count):
            theta = two_pi * k / count
            z = BigComplex(ctx.mul(self.radius, ctx.cos(theta)),
                           ctx.mul(self.radius, ctx.sin(theta)), prec)
            out.append(self.chart.point_at(z))
        return out


def default_domain(chart: KoenigsChart, safety: float = SAFETY_FRACTION) -> LinearizationDomain:
    return LinearizationDomain(chart, gmpy2.mpfr(safety) * chart.r_inj)


@dataclass
class HomoclinicOrbit:
    f: RationalMap
    chart: KoenigsChart
    points: list              # o_0 = o, o_1, ..., extended on demand
    entry_index: int          # least l with |psi^-1(o_l)| <= SAFETY * r_inj
    entry_coord: BigComplex   # psi^-1(o_entry)
    seed_index: int           # index of the seed preimage a in the orbit

    @property
    def o(self) -> SpherePoint:
        return self.chart.o

    def point(self, i: int) -> SpherePoint:
        if i >= len(self.points):
            self.extend(i)
        return self.points[i]

    def coord(self, i: int) -> BigComplex:
        """Chart coordinate of o_i for i >= entry_index (exact pullback z/lam)."""
        if i < self.entry_index:
            raise BadInput("orbit point before chart entry has no chart coordinate")
        return self.entry_coord / self.chart.lam ** (i - self.entry_index)

    def extend(self, imax: int):
        while len(self.points) <= imax:
            self.points.append(self.chart.point_at(self.coord(len(self.points))))


# -- Koenigs series --------------------------------------------------------


def koenigs_chart(f: RationalMap, o: SpherePoint, order: int = 48,
                  prec: int | None = None) -> KoenigsChart:
    """Build the normalized linearization series at a repelling fixed point."""
    prec = prec or f.prec
    if f.mode == "exact":
        f = RationalMap.from_affine([c.to_bigcomplex(prec) for c in f.num.coeffs],
                                    [c.to_bigcomplex(prec) for c in f.den.coeffs],
                                    mode="mp", prec=prec)
    if o.is_infinity():
        raise BadInput("conjugate the map so the fixed point is finite before building a chart")
    lam = f.derivative_at(o)
    if lam.abs() <= 1 + gmpy2.mpfr(2) ** (-16):
        raise NotRepelling(f"multiplier modulus {float(lam.abs()):.6f} is not > 1")
    oz = o.to_affine()
    fo = f.evaluate(o)
    if fo.is_infinity() or (fo.to_affine() - oz).abs() > gmpy2.mpfr(2) ** (-(prec // 2)):
        raise BadInput("point is not fixed at working precision")

    # Taylor expansion of F(z) = f(o + z) - o around 0
    a = f.num.taylor_shift(oz)
    b = f.den.taylor_shift(oz)
    fhat = _series_div(a.coeffs, b.coeffs, order + 1, prec)
    fhat[0] = fhat[0] * 0

    one = BigComplex(1, 0, prec)
    psi = [one]                       # c_1 = 1; psi_hat = z + c_2 z^2 + ...
    lam_k = lam                       # lam^k tracker
    for k in range(2, order + 1):
        lam_k = lam_k * lam
        comp = _series_compose(fhat, psi, k)
        c_k = comp[k] / (lam_k - lam)
        psi.append(c_k)

    r_inj = _injectivity_radius(psi, prec)
    bound = gmpy2.mpfr(2) ** (-(prec // 2))
    for _ in range(12):
        chart = KoenigsChart(o=o, lam=lam, psi_coeffs=psi, order=order, r_inj=r_inj, prec=prec)
        if _max_residual(f, chart, 32) <= bound:
            return chart
        r_inj = r_inj * gmpy2.mpfr("0.75")
    raise SeriesDiverged("functional-equation residual will not meet 2^(-prec/2); escalate the order")


def _series_div(a, b, n, prec):
    """First n coefficients of a/b as power series (b[0] a unit)."""
    zero = BigComplex(0, 0, prec)
    a = [c if isinstance(c, BigComplex) else BigComplex(c, 0, prec) for c in a]
    b = [c if isinstance(c, BigComplex) else BigComplex(c, 0, prec) for c in b]
    if not b or b[0].is_zero():
        raise BadInput("series division needs a unit constant term (pole at the fixed point?)")
    out = []
    for k in range(n):
        acc = a[k] if k < len(a) else zero
        for j in range(1, k + 1):
            if j < len(b) and not out[k - j].is_zero():
                acc = acc - b[j] * out[k - j]
        out.append(acc / b[0])
    return out


def _series_compose(outer, inner_c1_up, n):
    """outer(g(z)) mod z^(n+1), g(z) = sum_{k>=1} inner[k-1] z^k, by Horner."""
    zero = outer[0] * 0
    g = [zero] + list(inner_c1_up[:n])
    g += [zero] * (n + 1 - len(g))
    acc = [zero] * (n + 1)
    for c in reversed(outer[: n + 1]):
        new = [zero] * (n + 1)
        for i, ai in enumerate(acc):
            if ai.is_zero():
                continue
            for j, gj in enumerate(g):
                if i + j > n:
                    break
                if not gj.is_zero():
                    new[i + j] = new[i + j] + ai * gj
        new[0] = new[0] + c
        acc = new
    return acc


def _injectivity_radius(psi, prec):
    """Largest r <= 1 with sum_k k|c_k| r^(k-1) + tail(r) < 1.

    The bound |psi_hat'(z) - 1| < 1 on |z| <= r forces Re psi_hat' > 0 and
    hence univalence on the disk; the tail beyond the computed order is
    majorized geometrically through R = min |c_k|^(-1/(k-1)).
    """
    mags = [c.abs() for c in psi]     # mags[k-1] = |c_k|
    n = len(mags)
    ratios = [mags[k] ** (gmpy2.mpfr(-1) / k) for k in range(1, n) if mags[k] > 0]
    cap = gmpy2.mpfr(1)
    if not ratios:
        return cap                    # psi = identity
    big_r = min(ratios)
    hi = min(cap, big_r * gmpy2.mpfr("0.999"))
    lo = hi * 0

    def deriv_excess(r):
        s = gmpy2.mpfr(0)
        for k in range(1, n):         # coefficient c_{k+1} contributes (k+1)|c_{k+1}| r^k
            s += (k + 1) * mags[k] * r ** k
        x = r / big_r
        if x < 1:
            nn = gmpy2.mpfr(n)
            s += (x ** n) * (nn + 1 - nn * x) / ((1 - x) * (1 - x))
        else:
            s += gmpy2.mpfr(10)
        return s

    for _ in range(60):
        mid = (lo + hi) / 2
        if deriv_excess(mid) < gmpy2.mpfr("0.95"):
            lo = mid
        else:
            hi = mid
    return lo


def _max_residual(f: RationalMap, chart: KoenigsChart, samples: int):
    prec = chart.prec
    ctx = context(prec)
    two_pi = 2 * ctx.const_pi()
    r = chart.r_inj / chart.lam.abs()
    worst = gmpy2.mpfr(0)
    for k in range(samples):
        theta = two_pi * k / samples
        z = BigComplex(ctx.mul(r, ctx.cos(theta)), ctx.mul(r, ctx.sin(theta)), prec)
        lhs = f.evaluate(SpherePoint.affine(chart.psi(z)))
        if lhs.is_infinity():
            return gmpy2.mpfr(1)
        d = (lhs.to_affine() - chart.psi(z * chart.lam)).abs()
        if d > worst:
            worst = d
    return worst


# -- preimages -------------------------------------------------------------


def preimages(f: RationalMap, target: SpherePoint, prec: int | None = None) -> list[SpherePoint]:
    """All d preimages of a point, with multiplicity (infinity included)."""
    prec = prec or f.prec
    form = f.num.scale(target.y) - f.den.scale(target.x)
    if form.is_zero():
        raise BadInput("pullback divisor vanished; degenerate input")
    if form.coeffs and not isinstance(form.coeffs[0], BigComplex):
        form = _to_mp_poly(form, prec)
    out = []
    if form.degree == 1:
        out.append(SpherePoint.affine(-form.coeffs[0] / form.coeffs[1]))
    elif form.degree == 2:
        out.extend(SpherePoint.affine(z) for z in quadratic_roots(*form.coeffs))
    elif form.degree >= 3:
        for rc in poly_roots(form, prec):
            out.extend([SpherePoint.affine(rc.center)] * rc.multiplicity)
    deficit = f.degree - max(form.degree, 0)
    out.extend([SpherePoint.infinity("mp", prec)] * deficit)
    return out


def _to_mp_poly(p, prec):
    from .algebra import Poly

    return Poly([c.to_bigcomplex(prec) for c in p.coeffs])


# -- homoclinic search -----------------------------------------------------


def find_homoclinic(f: RationalMap, chart: KoenigsChart, seed: SpherePoint,
                    depth_cap: int = 24, imax: int | None = None,
                    crit_exclusion: float = CRIT_EXCLUSION) -> HomoclinicOrbit:
    """Best-first backward search from the seed preimage into the chart.

    The seed must satisfy f^m0(seed) = o for some m0 >= 1 and seed != o.
    Raises DepthExceeded when no backward orbit of the seed enters the
    linearization domain within depth_cap pullbacks, CriticalCollision
    when the orbit passes within crit_exclusion of a critical point.
    """
    prec = chart.prec
    o = chart.o
    hit_tol = gmpy2.mpfr(2) ** (-(prec // 2))
    if seed.chordal(o) <= hit_tol:
        raise BadInput("seed preimage must differ from the fixed point")

    prefix = [seed]                   # forward orbit: seed -> ... -> o
    for _ in range(64):
        nxt = f.evaluate(prefix[-1])
        prefix.append(nxt)
        if nxt.chordal(o) <= hit_tol:
            break
    else:
        raise BadInput("seed is not a preimage of the fixed point (within 64 steps)")
    prefix[-1] = o
    prefix.reverse()                  # o_0 .. o_m0 = seed
    m0 = len(prefix) - 1

    nodes = {0: (seed, None)}         # id -> (point, parent id)
    heap = [(float(seed.chordal(o)), 0, 0)]
    next_id = 1
    entry_id, entry_coord = None, None
    depth_of = {0: 0}
    seen: list[SpherePoint] = []
    expansion_cap = 4000 * f.degree
    while heap:
        if next_id > expansion_cap:
            raise DepthExceeded(f"backward search expanded {expansion_cap} nodes without entering the chart")
        _, _, nid = heapq.heappop(heap)
        pt = nodes[nid][0]
        depth = depth_of[nid]
        if depth > 0:
            z = chart.chart_coord(pt, frac=SAFETY_FRACTION)
            if z is not None:
                entry_id, entry_coord = nid, z
                break
        if depth >= depth_cap:
            continue
        for pre in preimages(f, pt, prec):
            if pre.chordal(o) <= hit_tol:
                continue              # the constant branch through o never converges from outside
            if any(pre.chordal(s) <= hit_tol for s in seen):
                continue
            nodes[next_id] = (pre, nid)
            depth_of[next_id] = depth + 1
            heapq.heappush(heap, (float(pre.chordal(o)), next_id, next_id))
            seen.append(pre)
            next_id += 1
    if entry_id is None:
        raise DepthExceeded(f"no backward orbit entered the chart within depth {depth_cap}")

    chain = []                        # entry ... seed
    cursor = entry_id
    while cursor is not None:
        chain.append(nodes[cursor][0])
        cursor = nodes[cursor][1]
    chain.reverse()                   # seed ... entry
    points = prefix + chain[1:]
    entry_index = len(points) - 1

    orbit = HomoclinicOrbit(f=f, chart=chart, points=points,
                            entry_index=entry_index, entry_coord=entry_coord,
                            seed_index=m0)
    orbit.extend(imax if imax is not None else entry_index + 48)
    _check_orbit(orbit, crit_exclusion)
    return orbit


def _check_orbit(orbit: HomoclinicOrbit, crit_exclusion: float):
    f = orbit.f
    prec = orbit.chart.prec
    tol = gmpy2.mpfr(2) ** (-(prec // 4))
    for i in range(1, len(orbit.points)):
        if f.evaluate(orbit.points[i]).chordal(orbit.points[i - 1]) > tol:
            raise BranchLost(f"backward orbit inconsistent at index {i}")
    excl = gmpy2.mpfr(crit_exclusion)
    for cp, _ in f.critical_points():
        for i in range(1, len(orbit.points)):
            if orbit.points[i].chordal(cp) < excl:
                raise CriticalCollision(
                    f"orbit point {i} within {crit_exclusion} of a critical point; choose another seed")


# -- branch-tracked pullbacks ----------------------------------------------


def _continue_chain(f: RationalMap, ref: list[SpherePoint], target: SpherePoint,
                    prec: int, substeps: int) -> list[SpherePoint]:
    """Pull the target back through m = len(ref)-1 inverse steps of f.

    ref = [x_0, .., x_m] with f(x_{j+1}) = x_j anchors the branch; the
    target is joined to x_0 by an affine segment walked in substeps, each
    step taking the preimage closest to the current reference chain.
    Ambiguous branch choices (closest and second-closest preimage within a
    factor 2) raise BranchLost rather than silently wrapping.
    """
    m = len(ref) - 1
    if ref[0].is_infinity() or target.is_infinity():
        raise BranchLost("boundary tracking through infinity is unsupported; shrink the domain")
    a0 = ref[0].to_affine()
    a1 = target.to_affine()
    chain = ref
    for s in range(1, substeps + 1):
        w = a0 + (a1 - a0) * s / substeps if substeps > 1 else a1
        new_chain = [SpherePoint.affine(w)]
        for j in range(1, m + 1):
            best, second, arg = None, None, None
            for q in preimages(f, new_chain[-1], prec):
                d = q.chordal(chain[j])
                if best is None or d < best:
                    second = best
                    best, arg = d, q
                elif second is None or d < second:
                    second = d
            if second is not None and best * 2 > second:
                raise BranchLost(
                    f"inverse branch ambiguous at step {j}; refine the path or shrink the domain")
            new_chain.append(arg)
        chain = new_chain
    return chain


def _polygon_contains(samples: list[SpherePoint], p: SpherePoint) -> bool:
    """Winding-number point-in-polygon on affine samples (False at infinity)."""
    import math

    if p.is_infinity() or any(s.is_infinity() for s in samples):
        return False
    px, py = float(p.to_affine().re), float(p.to_affine().im)
    pts = [(float(s.to_affine().re), float(s.to_affine().im)) for s in samples]
    total = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        a1 = math.atan2(y1 - py, x1 - px)
        a2 = math.atan2(y2 - py, x2 - px)
        d = a2 - a1
        while d > math.pi:
            d -= 2 * math.pi
        while d < -math.pi:
            d += 2 * math.pi
        total += d
    return abs(total) > math.pi


def _entry_for_radius(orbit: HomoclinicOrbit, domain: LinearizationDomain) -> int:
    lam_abs = orbit.chart.lam.abs()
    i = orbit.entry_index
    z = orbit.entry_coord.abs()
    bound = gmpy2.mpfr(SAFETY_FRACTION) * domain.radius
    while z > bound:
        i += 1
        z = z / lam_abs
    return i


def good_return_time(orbit: HomoclinicOrbit, domain: LinearizationDomain | None = None,
                     margin: float = DEFAULT_MARGIN, m_cap: int = 40,
                     boundary_samples: int = BOUNDARY_SAMPLES,
                     m_start: int | None = None) -> int:
    """Least certified good return time for the orbit and working domain.

    Certificate at candidate m: the 64 pulled-back boundary samples of U
    land within (1 - margin) * radius in chart coordinates (compact
    containment of U_m), and no critical point lies inside any pullback
    component U_j, 1 <= j <= m (injectivity of f^m on U_m).  A critical
    point inside some U_j blocks every m >= j, so that raises
    NoReturnFound immediately (shrink the domain and retry).  ``m_start``
    restricts the search to candidates >= m_start.
    """
    if margin <= 0:
        raise BadInput("margin must be positive")
    chart = orbit.chart
    f = orbit.f
    domain = domain or default_domain(chart)
    prec = chart.prec
    entry = _entry_for_radius(orbit, domain)
    if m_start is not None:
        entry = max(entry, m_start)
    crit = f.critical_points()
    boundary = domain.boundary_points(boundary_samples)
    limit = gmpy2.mpfr(1 - margin) * domain.radius

    for m in range(entry, entry + m_cap):
        orbit.extend(m)
        ref = [orbit.point(j) for j in range(m + 1)]
        try:
            chains = []
            cur_ref = ref
            for t in boundary:
                cur_ref = _continue_chain(f, cur_ref, t, prec, substeps=8)
                chains.append(cur_ref)
        except BranchLost:
            continue
        contained = True
        for chain in chains:
            z = chart.psi_inv(chain[m].to_affine()) if not chain[m].is_infinity() else None
            if z is None or z.abs() > limit:
                contained = False
                break
        if not contained:
            continue
        for j in range(1, m + 1):
            poly_j = [chain[j] for chain in chains]
            for cp, _ in crit:
                if _polygon_contains(poly_j, cp):
                    raise NoReturnFound(
                        f"critical point inside pullback component U_{j}; shrink the working domain")
        return m
    raise NoReturnFound(f"no good return time found in [{entry}, {entry + m_cap})")


def working_pair(orbit: HomoclinicOrbit, margin: float = DEFAULT_MARGIN,
                 shrink_rounds: int = 6) -> tuple[LinearizationDomain, int]:
    """Search a (domain, m) pair, shrinking the working radius when blocked."""
    radius = gmpy2.mpfr(SAFETY_FRACTION) * orbit.chart.r_inj
    last = None
    for _ in range(shrink_rounds):
        domain = LinearizationDomain(orbit.chart, radius)
        try:
            return domain, good_return_time(orbit, domain, margin=margin)
        except NoReturnFound as e:
            last = e
            radius = radius * gmpy2.mpfr("0.6")
    raise last


# -- adjoint sequences -----------------------------------------------------


@dataclass(frozen=True)
class AdjointSequence:
    orbit: HomoclinicOrbit
    m: int
    radius: object             # working linearization radius
    indices: list[int]
    points: list               # q_i aligned with indices
    multipliers: list          # mu_i = df^i(q_i)

    def mu(self, i: int) -> BigComplex:
        return self.multipliers[self.indices.index(i)]

    def q(self, i: int) -> SpherePoint:
        return self.points[self.indices.index(i)]


def adjoint_sequence(f: RationalMap, orbit: HomoclinicOrbit, m: int, imax: int,
                     domain: LinearizationDomain | None = None) -> AdjointSequence:
    """q_i for i = m..imax, each the unique fixed point of the inverse branch
    of f^i on U; contraction iteration seeded at o_i is cross-checked with
    damped Newton on f^i(z) - z and the Newton value (full precision) wins."""
    if imax < m + 8:
        raise BadInput("imax must be at least m + 8")
    chart = orbit.chart
    domain = domain or default_domain(chart)
    prec = chart.prec
    orbit.extend(imax)
    # contraction only needs to certify agreement at the matching radius
    agree_tol = gmpy2.mpfr(2) ** (-(prec // 4))
    stop_tol = agree_tol / 65536
    idxs, qs, mus = [], [], []
    for i in range(m, imax + 1):
        chain = [orbit.point(j) for j in range(i + 1)]
        x = orbit.point(i)
        q_contr = None
        for _ in range(400):
            chain = _continue_chain(f, chain, x, prec, substeps=1)
            nxt = chain[i]
            if nxt.chordal(x) <= stop_tol:
                q_contr = nxt
                break
            x = nxt
        if q_contr is None:
            raise BranchLost(f"inverse-branch contraction did not converge for i={i}")
        q_newton = _newton_fixed_point(f, i, q_contr, prec)
        if q_newton is None or q_contr.chordal(q_newton) > agree_tol:
            raise NewtonDisagreement(f"contraction and Newton disagree at i={i}")
        pts = f.orbit(q_newton, i - 1)
        mu = f.multiplier_of_orbit(pts)
        idxs.append(i)
        qs.append(q_newton)
        mus.append(mu)
    return AdjointSequence(orbit=orbit, m=m, radius=domain.radius,
                           indices=idxs, points=qs, multipliers=mus)


def _newton_fixed_point(f: RationalMap, n: int, start: SpherePoint, prec: int):
    """Damped Newton on f^n(z) - z from start (pointwise iterate evaluation)."""
    if start.is_infinity():
        return None
    z = start
    tol = gmpy2.mpfr(2) ** (-(prec - 24))
    for _ in range(80):
        orbit = f.orbit(z, n)
        if orbit[-1].is_infinity():
            return None
        val = orbit[-1].to_affine() - z.to_affine()
        dfn = f.multiplier_of_orbit(orbit[:-1])
        denom = dfn - 1
        if denom.is_zero():
            return None
        step = val / denom
        nz = SpherePoint.affine(z.to_affine() - step)
        for _ in range(10):
            img = nz
            for _k in range(n):
                img = f.evaluate(img)
            if not img.is_infinity() and (img.to_affine() - nz.to_affine()).abs() <= val.abs():
                break
            step = step / 2
            nz = SpherePoint.affine(z.to_affine() - step)
        moved = (nz.to_affine() - z.to_affine()).abs()
        z = nz
        if moved <= tol * max(gmpy2.mpfr(1), z.to_affine().abs()):
            return z
    return z


# -- asymptotic fit and the exceptionality criterion ------------------------


def fit_asymptotics(seq: AdjointSequence, window: int = 6) -> dict:
    """(theta0, offset, error_decay_ratio) for mu_i ~ lam^i theta0 + offset.

    Fits the exact three-term model mu_i = lam^i t0 + b + c lam^(-i) on the
    trailing triple (a generalized Richardson limit of mu_i / lam^i); the
    residual against the two-term law then decays like 1/|lam|.
    """
    if len(seq.indices) < max(window, 6):
        raise BadInput("need at least 6 consecutive multipliers")
    lam = seq.orbit.chart.lam
    prec = seq.orbit.chart.prec
    floor = gmpy2.mpfr(2) ** (-(prec - 48))

    def solve3(i0):
        triple = (i0, i0 + 1, i0 + 2)
        rows = [[lam ** i, BigComplex(1, 0, prec), 1 / lam ** i] for i in triple]
        return _solve3x3(rows, [seq.mu(i) for i in triple])

    last = seq.indices[-1]
    t0, b, c = solve3(last - 2)
    t0_alt, _, _ = solve3(last - 3)
    stable = (t0 - t0_alt).abs() <= gmpy2.mpfr("1e-6") * max(gmpy2.mpfr(1), t0.abs())

    lam_abs = lam.abs()
    residuals = [(seq.mu(i) - lam ** i * t0 - b).abs() for i in seq.indices[-window:]]
    res_scale = max(gmpy2.mpfr(1), t0.abs()) * lam_abs ** seq.indices[-window]
    exact_law = all(r <= floor * res_scale for r in residuals)
    ratios = [r1 / r0 for r0, r1 in zip(residuals, residuals[1:])
              if r0 > floor * res_scale and r1 > floor * res_scale]
    if not exact_law:
        for r0, r1 in zip(residuals, residuals[1:]):
            if r0 > floor * res_scale and r1 > r0 * 2:
                raise FitUnstable("residuals do not decay monotonically over the window")
    decay = float(sum(ratios, gmpy2.mpfr(0)) / len(ratios)) if ratios else 0.0
    return {
        "theta0": t0,
        "offset": b,
        "curvature": c,
        "error_decay_ratio": decay,
        "exact_law": exact_law,
        "stable": bool(stable),
        "residuals": residuals,
    }


def _solve3x3(a, rhs):
    m = [row[:] + [r] for row, r in zip(a, rhs)]
    n = 3
    for col in range(n):
        piv = max(range(col, n), key=lambda r: m[r][col].abs())
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for r in range(col + 1, n):
            fct = m[r][col] / p
            for cc in range(col, n + 1):
                m[r][cc] = m[r][cc] - fct * m[col][cc]
    out = [None] * n
    for r in range(n - 1, -1, -1):
        acc = m[r][n]
        for cc in range(r + 1, n):
            acc = acc - m[r][cc] * out[cc]
        out[r] = acc / m[r][r]
    return out


def exceptional_criterion(seq: AdjointSequence, tol: float = 1e-20,
                          window: int = 6) -> ExceptionalVerdict:
    """Pass iff mu_i = C lam^i on the trailing window with C = theta0 and the
    fitted offset indistinguishable from 0; fail carries the first bad index
    or the offset magnitude.  A pass is evidence, never a certificate."""
    fit = fit_asymptotics(seq, window=window)
    lam = seq.orbit.chart.lam
    t = gmpy2.mpfr(tol)
    c0 = fit["theta0"]
    offset_small = fit["offset"].abs() <= t * max(gmpy2.mpfr(1), c0.abs())
    first_bad = None
    for i in seq.indices[-window:]:
        dev = (seq.mu(i) - c0 * lam ** i).abs()
        if dev > t * lam.abs() ** i:
            first_bad = (i, float(dev / lam.abs() ** i))
            break
    detail = {
        "C": c0.to_string(40),
        "offset_abs": float(fit["offset"].abs()),
        "error_decay_ratio": fit["error_decay_ratio"],
    }
    if first_bad is None and offset_small:
        return ExceptionalVerdict(verdict="pass", periods_checked=seq.indices[-1], detail=detail)
    witness = {"offset_abs": float(fit["offset"].abs())}
    if first_bad is not None:
        witness.update({"index": first_bad[0], "relative_deviation": first_bad[1]})
    return ExceptionalVerdict(verdict="fail", periods_checked=seq.indices[-1],
                              witness=witness, detail=detail)
