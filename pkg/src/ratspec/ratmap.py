"""Rational maps on the Riemann sphere.

A map is a pair of coprime polynomials (num, den) of common projective
degree d, in either multiprecision ('mp') or exact Gaussian-rational
('exact') coefficients.  Points live in homogeneous coordinates [x : y]
normalized so that the larger coordinate is 1; evaluation, derivatives and
multipliers are computed chart-wise (w = 1/z at infinity) so cycles
through infinity need no special casing downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .algebra import (
    BigComplex,
    GaussianRational,
    Poly,
    compose_pair,
    poly_gcd,
    poly_roots,
    resultant_homogeneous,
    scalar_from_string,
)
from .algebra.poly import mobius_conjugate_pair
from .algebra.scalars import context
from .errors import BadInput, DegenerateMap, EmptyInput

# resultant verification is skipped above this composite degree (cost grows
# like (2d)^3 multiprecision operations; degree consistency is still checked)
RESULTANT_VERIFY_MAX_DEGREE = 24


class SpherePoint:
    """Point of P^1 as a normalized homogeneous pair [x : y]."""

    __slots__ = ("x", "y")

    def __init__(self, x, y, normalize: bool = True):
        if normalize:
            x, y = _normalize_pair(x, y)
        self.x = x
        self.y = y

    @staticmethod
    def affine(z) -> "SpherePoint":
        one = z * 0 + 1
        return SpherePoint(z, one, normalize=True)

    @staticmethod
    def infinity(mode: str = "mp", prec: int = 256) -> "SpherePoint":
        if mode == "exact":
            return SpherePoint(GaussianRational(1), GaussianRational(0), normalize=False)
        return SpherePoint(BigComplex(1, 0, prec), BigComplex(0, 0, prec), normalize=False)

    def is_infinity(self) -> bool:
        return self.y.is_zero()

    def is_finite_chart(self) -> bool:
        """True when the canonical representative is (z, 1)."""
        return not self.y.is_zero() and _is_one(self.y)

    def to_affine(self):
        if self.is_infinity():
            raise BadInput("point at infinity has no affine value")
        return self.x / self.y

    def cochart(self):
        """w = 1/z value; valid when x != 0."""
        if self.x.is_zero():
            raise BadInput("origin has no 1/z chart value")
        return self.y / self.x

    def chordal(self, other: "SpherePoint"):
        """Chordal distance |x1 y2 - x2 y1| / (|p1| |p2|) as an mpfr."""
        cross = self.x * other.y - self.y * other.x
        if isinstance(cross, GaussianRational):
            cross = cross.to_bigcomplex()
        return cross.abs() / (_point_norm(self) * _point_norm(other))

    def to_string(self, digits=None) -> str:
        if self.is_infinity():
            return "inf"
        z = self.to_affine()
        return z.to_string(digits) if digits else z.to_string()

    def __repr__(self):
        return f"SpherePoint({self.to_string()})"


def _point_norm(p: SpherePoint):
    x = p.x.to_bigcomplex() if isinstance(p.x, GaussianRational) else p.x
    y = p.y.to_bigcomplex() if isinstance(p.y, GaussianRational) else p.y
    return context(max(x.prec, y.prec)).sqrt(x.abs2() + y.abs2())


def _is_one(s) -> bool:
    return (s - (s * 0 + 1)).is_zero()


def _normalize_pair(x, y):
    if x.is_zero() and y.is_zero():
        raise BadInput("[0 : 0] is not a point of P^1")
    if isinstance(x, GaussianRational):
        if not y.is_zero() and y.norm() >= x.norm():
            return x / y, GaussianRational(1)
        return GaussianRational(1), y / x
    ax, ay = x.abs(), y.abs()
    if not y.is_zero() and ay >= ax:
        return x / y, y * 0 + 1
    return x * 0 + 1, y / x


class Mobius:
    """Invertible z -> (a z + b) / (c z + d); det normalized to 1 in mp mode."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, normalize: bool = True):
        det = a * d - b * c
        if det.is_zero():
            raise DegenerateMap("Mobius determinant vanishes")
        if normalize and isinstance(a, BigComplex):
            s = det.sqrt()
            a, b, c, d = a / s, b / s, c / s, d / s
        self.a, self.b, self.c, self.d = a, b, c, d

    @staticmethod
    def identity(mode="mp", prec=256):
        one, zero = _one_zero(mode, prec)
        return Mobius(one, zero, zero, one, normalize=False)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a, normalize=False)

    def apply(self, p: SpherePoint) -> SpherePoint:
        return SpherePoint(self.a * p.x + self.b * p.y, self.c * p.x + self.d * p.y)

    def __call__(self, p: SpherePoint) -> SpherePoint:
        return self.apply(p)

    def compose(self, other: "Mobius") -> "Mobius":
        # matrix product: self after other
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            normalize=False,
        )


def _one_zero(mode, prec):
    if mode == "exact":
        return GaussianRational(1), GaussianRational(0)
    return BigComplex(1, 0, prec), BigComplex(0, 0, prec)


@dataclass(frozen=True)
class RationalMap:
    num: Poly
    den: Poly
    degree: int
    mode: str
    prec: int

    @property
    def d(self) -> int:
        return self.degree

    # -- construction -------------------------------------------------

    @staticmethod
    def from_affine(num_coeffs, den_coeffs, mode: str = "mp", prec: int = 256,
                    clear_gcd: bool | None = None) -> "RationalMap":
        """Build from affine coefficient lists (lowest degree first).

        Coefficients may be scalars, ints, Fractions or strings.  Exact mode
        clears the polynomial gcd by default (a shared factor in mp mode is
        not well posed and raises DegenerateMap via the resultant check).
        """
        if not list(num_coeffs) or not list(den_coeffs):
            raise EmptyInput("empty coefficient list")
        num = Poly([_coerce_scalar(c, mode, prec) for c in num_coeffs])
        den = Poly([_coerce_scalar(c, mode, prec) for c in den_coeffs])
        if num.is_zero() and den.is_zero():
            raise DegenerateMap("both coordinates vanish identically")
        if clear_gcd is None:
            clear_gcd = mode == "exact"
        if clear_gcd and mode == "exact" and not num.is_zero() and not den.is_zero():
            g = poly_gcd(num, den)
            if g.degree >= 1:
                num = num // g
                den = den // g
        return _finalize(num, den, mode, prec)

    @staticmethod
    def from_json(text_or_obj) -> "RationalMap":
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
        try:
            mode = obj.get("mode", "mp")
            prec = int(obj.get("prec_bits", 256))
            num = obj["num"]
            den = obj["den"]
        except (KeyError, AttributeError, TypeError) as e:
            raise BadInput(f"map JSON must carry num/den lists: {e}") from e
        return RationalMap.from_affine(num, den, mode=mode, prec=prec)

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True)

    def to_obj(self) -> dict:
        return {
            "mode": self.mode,
            "prec_bits": self.prec,
            "num": [c.to_string() for c in self.num.coeffs],
            "den": [c.to_string() for c in self.den.coeffs],
        }

    # -- homogeneous coefficient views ---------------------------------

    def num_pad(self) -> list:
        z = self._zero()
        return list(self.num.coeffs) + [z] * (self.degree - self.num.degree)

    def den_pad(self) -> list:
        z = self._zero()
        return list(self.den.coeffs) + [z] * (self.degree - self.den.degree)

    def _zero(self):
        base = self.num.coeffs[0] if self.num.coeffs else self.den.coeffs[0]
        return base * 0

    def _one(self):
        return self._zero() + 1

    # -- evaluation ----------------------------------------------------

    def evaluate(self, p: SpherePoint) -> SpherePoint:
        np_, dp_ = self.num_pad(), self.den_pad()
        d = self.degree
        xs = [self._one()]
        ys = [self._one()]
        for _ in range(d):
            xs.append(xs[-1] * p.x)
            ys.append(ys[-1] * p.y)
        nx = self._zero()
        dx = self._zero()
        for i in range(d + 1):
            m = xs[i] * ys[d - i]
            if not np_[i].is_zero():
                nx = nx + np_[i] * m
            if not dp_[i].is_zero():
                dx = dx + dp_[i] * m
        return SpherePoint(nx, dx)

    def orbit(self, p: SpherePoint, n: int) -> list[SpherePoint]:
        out = [p]
        for _ in range(n):
            out.append(self.evaluate(out[-1]))
        return out

    # -- derivatives and multipliers ------------------------------------

    def derivative_at(self, p: SpherePoint, tgt_cochart: bool | None = None):
        """Chart derivative at p (w = 1/z chart at infinity on either side).

        For fixed points this is the multiplier.  ``tgt_cochart`` overrides
        the chart used on the image side; chain products over a cycle must
        pin it to the stored chart of the next point, otherwise a chart tie
        at |z| = 1 can break the telescoping (see multiplier_of_orbit).
        """
        if tgt_cochart is None:
            tgt_cochart = not self.evaluate(p).is_finite_chart()
        if p.is_finite_chart():
            z = p.to_affine()
            a, b = (self.den, self.num) if tgt_cochart else (self.num, self.den)
            return _rational_derivative(a, b, z)
        w = p.cochart() if not p.is_infinity() else self._zero()
        rn = self.num.reversed(self.degree)
        rd = self.den.reversed(self.degree)
        a, b = (rd, rn) if tgt_cochart else (rn, rd)
        return _rational_derivative(a, b, w)

    def multiplier_of_orbit(self, points: list[SpherePoint]):
        """Chain product of chart derivatives along a closed orbit.

        The target chart of each step is pinned to the stored chart of the
        next orbit point (cyclically), which makes the product telescope to
        the true multiplier of the cycle independently of chart ties.
        """
        acc = self._one()
        n = len(points)
        for k, q in enumerate(points):
            nxt = points[(k + 1) % n]
            acc = acc * self.derivative_at(q, tgt_cochart=not nxt.is_finite_chart())
        return acc

    # -- algebraic operations -------------------------------------------

    def compose(self, other: "RationalMap", verify: bool | None = None) -> "RationalMap":
        """self after other."""
        _check_same_mode(self, other)
        num, den = compose_pair(
            Poly(self.num_pad()), Poly(self.den_pad()), self.degree,
            other.num, other.den,
        )
        target = self.degree * other.degree
        return _finalize(num, den, self.mode, self.prec, expected_degree=target, verify=verify)

    def iterate(self, n: int, verify: bool | None = None) -> "RationalMap":
        """n-th iterate by repeated squaring of composition."""
        if n < 1:
            raise BadInput("iterate needs n >= 1")
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result.compose(base, verify=verify)
            n >>= 1
            if n:
                base = base.compose(base, verify=verify)
        return result

    def conjugate(self, mob: Mobius, verify: bool | None = True) -> "RationalMap":
        """M^-1 o f o M."""
        new_num, new_den = mobius_conjugate_pair(
            Poly(self.num_pad()), Poly(self.den_pad()), self.degree,
            mob.a, mob.b, mob.c, mob.d)
        return _finalize(new_num, new_den, self.mode, self.prec,
                         expected_degree=self.degree, verify=verify)

    # -- critical points --------------------------------------------------

    def wronskian(self) -> Poly:
        """num' den - num den' (affine); infinity carries the degree deficit."""
        return self.num.derivative() * self.den - self.num * self.den.derivative()

    def critical_points(self, prec: int | None = None) -> list[tuple[SpherePoint, int]]:
        """Critical points with multiplicities; total count 2d - 2."""
        if self.degree < 2:
            raise BadInput("critical points need degree >= 2")
        prec = prec or self.prec
        w = self.wronskian()
        total = 2 * self.degree - 2
        out = []
        if not w.is_zero():
            for rc in poly_roots(w, prec):
                out.append((SpherePoint.affine(rc.center), rc.multiplicity))
            deficit = total - w.degree
        else:
            deficit = total
        if deficit > 0:
            out.append((SpherePoint.infinity(self.mode, prec), deficit))
        return out

    def resultant(self):
        return resultant_homogeneous(self.num_pad(), self.den_pad(), self.degree)

    def __repr__(self):
        return f"RationalMap(d={self.degree}, mode={self.mode}, num={self.num.coeffs}, den={self.den.coeffs})"


def _coerce_scalar(c, mode, prec):
    if isinstance(c, GaussianRational):
        return c if mode == "exact" else c.to_bigcomplex(prec)
    if isinstance(c, BigComplex):
        if mode == "exact":
            raise BadInput("BigComplex coefficients are not allowed in exact mode")
        return c
    if isinstance(c, str):
        return scalar_from_string(c, mode, prec)
    if isinstance(c, (int, Fraction)):
        return GaussianRational(c) if mode == "exact" else BigComplex(c, 0, prec)
    if isinstance(c, (float, complex)):
        if mode == "exact":
            raise BadInput("float coefficients are not allowed in exact mode")
        return BigComplex(c.real, c.imag, prec) if isinstance(c, complex) else BigComplex(c, 0, prec)
    raise BadInput(f"cannot coerce coefficient of type {type(c).__name__}")


def _rational_derivative(a: Poly, b: Poly, z):
    """(a/b)'(z) = (a' b - a b')(z) / b(z)^2."""
    bv = b.evaluate(z)
    top = a.derivative().evaluate(z) * bv - a.evaluate(z) * b.derivative().evaluate(z)
    return top / (bv * bv)


def _check_same_mode(f: RationalMap, g: RationalMap):
    if f.mode != g.mode:
        raise BadInput("mixed exact/mp composition is not supported")


def _finalize(num: Poly, den: Poly, mode: str, prec: int,
              expected_degree: int | None = None, verify: bool | None = None) -> RationalMap:
    """Normalize, fix the degree and verify nondegeneracy."""
    if num.is_zero() and den.is_zero():
        raise DegenerateMap("map collapsed to [0 : 0]")
    d = max(num.degree, den.degree)
    if d < 1:
        raise DegenerateMap("projective degree fell below 1")
    if expected_degree is not None and d != expected_degree:
        raise DegenerateMap(f"degree dropped from {expected_degree} to {d}")
    if mode == "mp":
        lead = num.lead() if num.degree == d else den.lead()
        num = num.scale(lead * 0 + 1) if lead.is_zero() else Poly([c / lead for c in num.coeffs])
        den = Poly([c / lead for c in den.coeffs])
    else:
        num, den = _clear_content(num, den)
    if verify is None:
        verify = d <= RESULTANT_VERIFY_MAX_DEGREE
    if verify:
        zpad_n = list(num.coeffs) + [num.coeffs[0] * 0 if num.coeffs else den.coeffs[0] * 0] * (d - num.degree)
        zpad_d = list(den.coeffs) + [den.coeffs[0] * 0 if den.coeffs else num.coeffs[0] * 0] * (d - den.degree)
        res = resultant_homogeneous(zpad_n, zpad_d, d)
        if mode == "exact":
            if res.is_zero():
                raise DegenerateMap("resultant vanishes (shared projective root)")
        else:
            thresh = gmpy2.mpfr(2) ** (-(prec // 2))
            if res.abs() <= thresh:
                raise DegenerateMap("resultant below threshold; escalate precision or input is degenerate")
    return RationalMap(num=num, den=den, degree=d, mode=mode, prec=prec)


def _gauss_int_gcd(a: complex, b: complex):
    """gcd in Z[i] on (re, im) integer pairs via Euclidean division."""
    a = complex(a)
    b = complex(b)
    while b != 0:
        q = a / b
        qr = complex(round(q.real), round(q.imag))
        a, b = b, a - qr * b
    return a


def _clear_content(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Exact-mode canonical form: Gaussian-integer coefficients, content 1,
    leading unit fixed (positive real part, or positive imaginary on the axis)."""
    from math import gcd as _int_gcd

    coeffs = list(num.coeffs) + list(den.coeffs)
    denlcm = 1
    for c in coeffs:
        denlcm = denlcm * c.re.denominator // _int_gcd(denlcm, c.re.denominator)
        denlcm = denlcm * c.im.denominator // _int_gcd(denlcm, c.im.denominator)
    scaled = [c * denlcm for c in coeffs]
    g = None
    for c in scaled:
        if c.is_zero():
            continue
        zi = complex(int(c.re), int(c.im))
        g = zi if g is None else _gauss_int_gcd(g, zi)
    if g is None:
        raise DegenerateMap("map collapsed to [0 : 0]")
    gg = GaussianRational(Fraction(int(round(g.real))), Fraction(int(round(g.imag))))
    out = [c / gg for c in scaled]
    lead = next(c for c in reversed(out) if not c.is_zero())
    # fix the unit: multiply by i^k so the leading coefficient has re > 0, or re == 0 and im > 0
    unit = GaussianRational(1)
    cand = lead
    for _ in range(4):
        if cand.re > 0 or (cand.re == 0 and cand.im > 0):
            break
        cand = cand * GaussianRational(0, 1)
        unit = unit * GaussianRational(0, 1)
    out = [c * unit for c in out]
    k = len(num.coeffs)
    return Poly(out[:k]), Poly(out[k:])
