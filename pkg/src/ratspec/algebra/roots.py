"""Simultaneous root finding for dense polynomials at arbitrary precision.

The solver runs the Ehrlich-Aberth iteration on raw gmpy2 values (initial
points from the upper convex hull of coefficient magnitudes, which keeps
iteration counts low for polynomials with widely spread coefficients),
polishes each root with Newton steps, then merges numerically coincident
roots into multiplicity clusters.

Post-conditions enforced here:
* residual |p(center)| <= 2^(-prec/2) * max|coeff| * max(1, |center|)^deg,
  with automatic precision escalation (up to 4x) when the bound fails;
* cluster multiplicities sum to the degree;
* output sorted by (Re, Im) of the centers, so results are deterministic
  at fixed input and precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from ..errors import NonConvergence, ZeroPolynomial
from .poly import Poly
from .scalars import BigComplex, GaussianRational, working_precision


@dataclass(frozen=True)
class RootCluster:
    center: BigComplex
    multiplicity: int
    radius: object  # mpfr, certified cluster radius

    def __repr__(self):
        return f"RootCluster({self.center.to_string(17)}, mult={self.multiplicity}, r={float(self.radius):.3e})"


def poly_roots(p: Poly, prec_bits: int = 256) -> list[RootCluster]:
    """All complex roots of p, clustered by multiplicity.

    Raises ZeroPolynomial for p == 0 and NonConvergence if the iteration
    stalls even after precision escalation.
    """
    if p.is_zero():
        raise ZeroPolynomial("cannot extract roots of the zero polynomial")
    coeffs = [_to_mpc(c, prec_bits) for c in p.coeffs]
    if len(coeffs) - 1 < 1:
        return []
    last_err = None
    for factor in (1, 2, 4):
        work = prec_bits * factor
        try:
            clusters = _solve(coeffs, prec_bits, work)
        except NonConvergence as e:
            last_err = e
            continue
        if clusters is not None:
            return clusters
    if last_err is not None:
        raise last_err
    raise NonConvergence(f"residual bound not met after precision escalation x4 at {prec_bits} bits")


def _to_mpc(c, prec):
    if isinstance(c, BigComplex):
        return gmpy2.mpc(c.val, precision=(prec, prec))
    if isinstance(c, GaussianRational):
        return c.to_bigcomplex(prec).val
    with working_precision(prec):
        return gmpy2.mpc(c)


def quadratic_roots(c0: BigComplex, c1: BigComplex, c2: BigComplex) -> list[BigComplex]:
    """Roots of c2 z^2 + c1 z + c0 (c2 != 0), cancellation-safe closed form."""
    prec = max(c0.prec, c1.prec, c2.prec)
    disc = (c1 * c1 - c0 * c2 * 4).sqrt()
    u = -c1
    t1 = u + disc
    t2 = u - disc
    t = t1 if t1.abs() >= t2.abs() else t2
    if t.is_zero():
        z = BigComplex(0, 0, prec)
        return [z, z]
    r1 = t / (c2 * 2)
    r2 = (c0 / c2) / r1
    return [r1, r2]


def _solve(coeffs, prec_bits, work_prec):
    """One root-finding pass; returns clusters or None if residuals fail."""
    with working_precision(work_prec + 64):
        cs = [gmpy2.mpc(c) for c in coeffs]
        # exact zero roots: strip common z^k
        k0 = 0
        while k0 < len(cs) - 1 and cs[k0] == 0:
            k0 += 1
        cs = cs[k0:]
        n = len(cs) - 1
        roots = _aberth(cs, n, work_prec) if n > 0 else []
        roots = [_newton_polish(cs, z) for z in roots]
        clusters = _cluster(roots, prec_bits)
        if k0:
            clusters.append((gmpy2.mpc(0), k0, gmpy2.mpfr(0)))
        # residual check at target precision
        maxc = max(abs(c) for c in coeffs)
        bound_base = gmpy2.mpfr(2) ** (-(prec_bits // 2))
        deg = len(coeffs) - 1
        out = []
        for center, mult, radius in clusters:
            val = _horner(coeffs, center)
            scale = max(gmpy2.mpfr(1), abs(center)) ** deg
            if abs(val) > bound_base * maxc * scale:
                return None
            out.append(RootCluster(BigComplex.from_mpc(gmpy2.mpc(center, precision=(prec_bits, prec_bits)), prec_bits), mult, radius))
    out.sort(key=lambda rc: (rc.center.re, rc.center.im))
    total = sum(rc.multiplicity for rc in out)
    if total != deg:
        return None
    return out


def _horner(cs, z):
    acc = cs[-1]
    for c in reversed(cs[:-1]):
        acc = acc * z + c
    return acc


def _initial_points(cs, n):
    """Aberth starting points from the upper hull of (i, log|c_i|)."""
    logs = []
    for i, c in enumerate(cs):
        a = abs(c)
        logs.append((i, math.log(float(a)) if a > 0 and gmpy2.is_finite(a) else None))
    pts = [(i, v) for i, v in logs if v is not None]
    if len(pts) < 2:
        pts = [(0, 0.0), (n, 0.0)]
    hull = [pts[0]]
    for q in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (q[0] - x1) <= (q[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(q)
    out = []
    phase0 = 0.39996322972865332  # fixed stagger, keeps runs deterministic
    seg = 0
    for (x1, y1), (x2, y2) in zip(hull[:-1], hull[1:]):
        count = x2 - x1
        r = math.exp((y1 - y2) / count)
        r = min(max(r, 1e-12), 1e12)
        for k in range(count):
            ang = 2 * math.pi * (k + 0.5) / count + phase0 * (seg + 1)
            out.append(gmpy2.mpc(r * math.cos(ang), r * math.sin(ang)))
        seg += 1
    while len(out) < n:
        out.append(gmpy2.mpc(1, 1))
    return out[:n]


def _aberth(cs, n, prec_bits, max_iter=400):
    dcs = [c * k for k, c in enumerate(cs)][1:]
    abs_cs = [abs(c) for c in cs]
    z = _initial_points(cs, n)
    tol = gmpy2.mpfr(2) ** (-(prec_bits + 16))
    eps = gmpy2.mpfr(2) ** (-(prec_bits + 56))
    one = gmpy2.mpc(1)
    frozen = [False] * n
    for _ in range(max_iter):
        max_step = gmpy2.mpfr(0)
        scale = max(max(abs(x) for x in z), gmpy2.mpfr(1))
        new_z = list(z)
        for k in range(n):
            if frozen[k]:
                continue
            zk = z[k]
            pv = _horner(cs, zk)
            if pv == 0:
                frozen[k] = True
                continue
            # backward-stable residual: freeze (handles multiple roots, which
            # converge only linearly and never meet a step-size criterion)
            azk = abs(zk)
            cond = abs_cs[-1]
            for c in reversed(abs_cs[:-1]):
                cond = cond * azk + c
            if abs(pv) <= eps * cond * 16:
                frozen[k] = True
                continue
            dv = _horner(dcs, zk)
            if dv == 0:
                # nudge off a critical point deterministically
                new_z[k] = zk + gmpy2.mpc(tol * scale * 1048576, 0)
                continue
            nk = pv / dv
            s = gmpy2.mpc(0)
            for j in range(n):
                if j != k:
                    d = zk - z[j]
                    if d == 0:
                        d = gmpy2.mpc(tol * scale, 0)
                    s += one / d
            den = one - nk * s
            w = nk if den == 0 else nk / den
            new_z[k] = zk - w
            aw = abs(w)
            if aw > max_step:
                max_step = aw
        z = new_z
        if all(frozen) or max_step < tol * scale:
            return z
    raise NonConvergence(f"Aberth iteration did not converge in {max_iter} sweeps")


def _newton_polish(cs, z, steps=4):
    dcs = [c * k for k, c in enumerate(cs)][1:]
    for _ in range(steps):
        pv = _horner(cs, z)
        if pv == 0:
            return z
        dv = _horner(dcs, z)
        if dv == 0:
            return z
        step = pv / dv
        # multiple roots make plain Newton overshoot-prone; accept only improving steps
        z2 = z - step
        if abs(_horner(cs, z2)) <= abs(pv):
            z = z2
        else:
            return z
    return z


def _cluster(roots, prec_bits):
    """Union-find merge of roots closer than the clustering radius."""
    if not roots:
        return []
    merge_tol = gmpy2.mpfr(2) ** (-(prec_bits // 4))
    n = len(roots)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(gmpy2.mpfr(1), abs(roots[i]))
            if abs(roots[i] - roots[j]) < merge_tol * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(roots[i])
    out = []
    for members in groups.values():
        m = len(members)
        center = sum(members, gmpy2.mpc(0)) / m
        radius = max(abs(x - center) for x in members) if m > 1 else gmpy2.mpfr(0)
        out.append((center, m, radius))
    return out
