"""Dense univariate polynomials over any of the library's scalar backends.

Coefficients are stored lowest degree first.  The zero polynomial has an
empty coefficient list and degree -1.  Scalars must support +, -, *, /,
``is_zero()`` and multiplication by Python ints; this covers BigComplex,
GaussianRational and the rational-function scalars of the degeneration
module, so the same arithmetic (including composition and resultants)
serves all of them.
"""

from __future__ import annotations

from ..errors import ZeroPolynomial


class Poly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all((a - b).is_zero() for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def coeff(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self._zero()

    def _zero(self):
        if self.coeffs:
            return self.coeffs[0] * 0
        raise ZeroPolynomial("zero polynomial has no scalar to derive 0 from")

    def lead(self):
        if not self.coeffs:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] = out[k] + c
        return Poly(out)

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for k in range(n):
            if k < len(self.coeffs) and k < len(other.coeffs):
                out.append(self.coeffs[k] - other.coeffs[k])
            elif k < len(self.coeffs):
                out.append(self.coeffs[k])
            else:
                out.append(-other.coeffs[k])
        return Poly(out)

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return Poly([])
        z = self.coeffs[0] * 0
        out = [z] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    def scale(self, s):
        return Poly([c * s for c in self.coeffs])

    def shift_up(self, k: int) -> "Poly":
        """Multiply by z^k."""
        if self.is_zero() or k == 0:
            return self if k == 0 else Poly(self.coeffs)
        z = self._zero()
        return Poly([z] * k + self.coeffs)

    def derivative(self) -> "Poly":
        return Poly([c * k for k, c in enumerate(self.coeffs)][1:])

    def evaluate(self, x):
        """Horner evaluation; x is a scalar of a compatible backend."""
        if self.is_zero():
            return x * 0
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def reversed(self, degree: int | None = None) -> "Poly":
        """Coefficient reversal z^d * p(1/z), padded to the given degree."""
        d = self.degree if degree is None else degree
        if d < self.degree:
            raise ValueError("reversal degree below actual degree")
        z = self._zero()
        padded = list(self.coeffs) + [z] * (d - self.degree)
        return Poly(list(reversed(padded)))

    def compose(self, inner: "Poly") -> "Poly":
        """p(inner(z)) by Horner on polynomials."""
        if self.is_zero():
            return Poly([])
        acc = Poly([self.coeffs[-1]])
        for c in reversed(self.coeffs[:-1]):
            acc = acc * inner + Poly([c])
        return acc

    def taylor_shift(self, c) -> "Poly":
        """p(z + c)."""
        one = _one_like(c)
        return self.compose(Poly([c, one]))

    def divmod(self, other: "Poly"):
        """Exact-field division with remainder."""
        if other.is_zero():
            raise ZeroPolynomial("division by the zero polynomial")
        if self.degree < other.degree:
            return Poly([]), Poly(self.coeffs)
        rem = list(self.coeffs)
        q = [self._zero()] * (self.degree - other.degree + 1)
        dlead = other.lead()
        for k in range(len(q) - 1, -1, -1):
            top = rem[k + other.degree]
            if top.is_zero():
                continue
            f = top / dlead
            q[k] = f
            for j, c in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - f * c
        return Poly(q), Poly(rem[: other.degree])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.lead()
        return Poly([c / lead for c in self.coeffs])

    def __repr__(self):
        return f"Poly({self.coeffs!r})"


def _one_like(c):
    """Multiplicative unit in the scalar backend of c."""
    return c * 0 + 1


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over an exact coefficient field (Euclid)."""
    x, y = Poly(a.coeffs), Poly(b.coeffs)
    while not y.is_zero():
        x, y = y, x % y
    return x.monic() if not x.is_zero() else x


def homogeneous_eval(coeffs, d: int, x, y):
    """Evaluate sum_i c_i x^i y^(d-i) for a coefficient list padded conceptually to degree d."""
    acc = x * 0
    xp = x * 0 + 1
    ypows = [y * 0 + 1]
    for _ in range(d):
        ypows.append(ypows[-1] * y)
    for i in range(d + 1):
        c = coeffs[i] if i < len(coeffs) else None
        if c is not None and not c.is_zero():
            acc = acc + c * xp * ypows[d - i]
        xp = xp * x
    return acc


def mobius_conjugate_pair(num: Poly, den: Poly, d: int, a, b, c, dd):
    """Coordinates of M^-1 o f o M for M = (a z + b)/(c z + dd).

    f is the degree-d pair (num, den) padded conceptually to degree d;
    substitutes (x, y) -> (a x + b y, c x + dd y) and applies the adjugate
    [dd, -b; -c, a] on the left.  Exact over any coefficient field.
    """
    sub_n = Poly([b, a])
    sub_d = Poly([dd, c])
    pn, pd = compose_pair(num, den, d, sub_n, sub_d)
    return pn.scale(dd) - pd.scale(b), pd.scale(a) - pn.scale(c)


def compose_pair(num_f: Poly, den_f: Poly, d_f: int, num_g: Poly, den_g: Poly):
    """Coordinates of f(g(z)) as a rational pair, degrees multiplying.

    f is given by affine numerator/denominator padded to common degree d_f;
    returns the unnormalized pair (num_f "evaluated homogeneously" at
    (num_g, den_g), same for den_f).
    """
    powers_n = [None] * (d_f + 1)
    powers_d = [None] * (d_f + 1)
    one = Poly([_one_like(num_g.coeffs[0] if num_g.coeffs else den_g.coeffs[0])])
    powers_n[0] = one
    powers_d[0] = one
    for i in range(1, d_f + 1):
        powers_n[i] = powers_n[i - 1] * num_g
        powers_d[i] = powers_d[i - 1] * den_g

    def binary_form(p: Poly) -> Poly:
        acc = Poly([])
        for i in range(d_f + 1):
            c = p.coeff(i) if i <= p.degree else None
            if c is None or c.is_zero():
                continue
            acc = acc + (powers_n[i] * powers_d[d_f - i]).scale(c)
        return acc

    return binary_form(num_f), binary_form(den_f)
