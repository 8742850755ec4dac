"""Scalar backends: arbitrary-precision complex numbers and exact Gaussian rationals.

Two interchangeable coefficient types drive the whole library:

* :class:`BigComplex` — a gmpy2 ``mpc`` wrapper carrying its precision in
  bits.  Arithmetic rounds at the maximum precision of the operands, so a
  computation never silently loses precision relative to its inputs.
* :class:`GaussianRational` — an exact element of Q(i) built on
  :class:`fractions.Fraction`, used wherever valuations or resultants must
  be computed with zero tolerance.

Equality on BigComplex is bitwise identity of the underlying values;
numeric closeness goes through :meth:`BigComplex.close_to` so that no code
path ever compares rounded values by accident.
"""

from __future__ import annotations

import re as _re
from contextlib import contextmanager
from fractions import Fraction
from math import isqrt

import gmpy2

from ..errors import BadInput

MIN_PREC = 64

_CTX_CACHE: dict[int, "gmpy2.context"] = {}


def context(prec_bits: int) -> "gmpy2.context":
    """Cached gmpy2 context at the given precision (for functional ops)."""
    ctx = _CTX_CACHE.get(prec_bits)
    if ctx is None:
        ctx = gmpy2.context(precision=prec_bits)
        _CTX_CACHE[prec_bits] = ctx
    return ctx


@contextmanager
def working_precision(prec_bits: int):
    """Temporarily make prec_bits the thread-default gmpy2 precision.

    A fresh context object is installed each time, so nesting is safe.
    """
    old = gmpy2.get_context()
    gmpy2.set_context(gmpy2.context(precision=prec_bits))
    try:
        yield
    finally:
        gmpy2.set_context(old)


def decimal_digits(prec_bits: int) -> int:
    return int(prec_bits * 0.30103) + 3


class BigComplex:
    """Immutable arbitrary-precision complex scalar.

    ``prec`` is at least :data:`MIN_PREC`; results of binary operations
    carry ``max(prec_left, prec_right)``.
    """

    __slots__ = ("val", "prec")

    def __init__(self, re=0, im=0, prec: int | None = None):
        if isinstance(re, BigComplex):
            prec = prec or re.prec
            self.val = gmpy2.mpc(re.val, precision=(prec, prec))
            self.prec = prec
            return
        if isinstance(re, gmpy2.mpc):
            if im == 0 and prec is None:
                self.val = re
                self.prec = max(re.precision)
                return
            prec = max(prec or max(re.precision), MIN_PREC)
            self.val = gmpy2.mpc(re, precision=(prec, prec))
            self.prec = prec
            return
        prec = max(prec or MIN_PREC, MIN_PREC)
        rr = _to_mpfr(re, prec)
        ii = _to_mpfr(im, prec)
        self.val = gmpy2.mpc(rr, ii, (prec, prec))
        self.prec = prec

    @staticmethod
    def from_mpc(val, prec: int) -> "BigComplex":
        out = object.__new__(BigComplex)
        out.val = val
        out.prec = prec
        return out

    @property
    def re(self):
        return self.val.real

    @property
    def im(self):
        return self.val.imag

    def is_zero(self) -> bool:
        return self.val == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, BigComplex):
            return other
        if isinstance(other, (int, Fraction, float, gmpy2.mpfr, gmpy2.mpc)):
            return BigComplex(other, 0, self.prec)
        if isinstance(other, GaussianRational):
            return other.to_bigcomplex(self.prec)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = max(self.prec, o.prec)
        return BigComplex.from_mpc(context(p).add(self.val, o.val), p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = max(self.prec, o.prec)
        return BigComplex.from_mpc(context(p).sub(self.val, o.val), p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = max(self.prec, o.prec)
        return BigComplex.from_mpc(context(p).sub(o.val, self.val), p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = max(self.prec, o.prec)
        return BigComplex.from_mpc(context(p).mul(self.val, o.val), p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = max(self.prec, o.prec)
        return BigComplex.from_mpc(context(p).div(self.val, o.val), p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = max(self.prec, o.prec)
        return BigComplex.from_mpc(context(p).div(o.val, self.val), p)

    def __neg__(self):
        # unary minus must round at our precision, not the thread default
        return BigComplex.from_mpc(context(self.prec).minus(self.val), self.prec)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        return BigComplex.from_mpc(context(self.prec).pow(self.val, n), self.prec)

    def __eq__(self, other):
        # Bitwise identity of values; tolerance comparisons use close_to().
        if isinstance(other, BigComplex):
            return self.val == other.val
        if isinstance(other, (int, float)):
            return self.val == other
        return NotImplemented

    def __hash__(self):
        return hash(self.val)

    def conj(self) -> "BigComplex":
        ctx = context(self.prec)
        return BigComplex.from_mpc(gmpy2.mpc(self.val.real, ctx.minus(self.val.imag), (self.prec, self.prec)), self.prec)

    def abs(self):
        """Modulus as an mpfr."""
        return context(self.prec).abs(self.val)

    def abs2(self):
        ctx = context(self.prec)
        return ctx.fma(self.val.real, self.val.real, ctx.mul(self.val.imag, self.val.imag))

    def sqrt(self) -> "BigComplex":
        return BigComplex.from_mpc(context(self.prec).sqrt(self.val), self.prec)

    def close_to(self, other, tol) -> bool:
        o = self._coerce(other)
        return (self - o).abs() <= tol

    def with_prec(self, prec: int) -> "BigComplex":
        return BigComplex.from_mpc(gmpy2.mpc(self.val, precision=(prec, prec)), prec)

    def __complex__(self):
        return complex(self.val)

    def __repr__(self):
        return f"BigComplex({self.to_string()}, prec={self.prec})"

    def to_string(self, digits: int | None = None) -> str:
        """Serialize as ``re±im i`` decimal strings."""
        digits = digits or decimal_digits(self.prec)
        rs = _fmt_mpfr(self.val.real, digits)
        if self.val.imag == 0:
            return rs
        im_s = _fmt_mpfr(self.val.imag, digits)
        if im_s.startswith("-"):
            return f"{rs}-{im_s[1:]}i"
        return f"{rs}+{im_s}i"

    @staticmethod
    def from_string(s: str, prec: int = 256) -> "BigComplex":
        re_s, im_s = _split_complex_string(s)
        return BigComplex(_parse_real(re_s, prec), _parse_real(im_s, prec), prec)


def _to_mpfr(x, prec):
    if isinstance(x, gmpy2.mpfr):
        return x
    if isinstance(x, Fraction):
        ctx = context(prec)
        return ctx.div(gmpy2.mpfr(x.numerator, prec), gmpy2.mpfr(x.denominator, prec))
    if isinstance(x, str):
        return _parse_real(x, prec)
    return gmpy2.mpfr(x, prec)


def _parse_real(s: str, prec: int):
    s = s.strip()
    if "/" in s:
        return _to_mpfr(Fraction(s), prec)
    return gmpy2.mpfr(s if s not in ("", "+") else "1" if s == "+" else "0", prec)


def _fmt_mpfr(x, digits: int) -> str:
    """Scientific-notation string; gmpy2's __format__ is unreliable, so build from digits()."""
    if x == 0:
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    mant, exp, _ = x.digits(10, digits)
    neg = mant.startswith("-")
    if neg:
        mant = mant[1:]
    body = mant[0] + "." + mant[1:] if len(mant) > 1 else mant[0]
    return ("-" if neg else "") + body + "e" + ("+" if exp - 1 >= 0 else "") + str(exp - 1)


_NUM_RE = _re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?")


def _split_complex_string(s: str) -> tuple[str, str]:
    """Split ``re±im i`` into the two real-part strings."""
    t = s.strip().replace(" ", "")
    if not t:
        raise BadInput("empty scalar string")
    if not t.endswith("i"):
        return t, "0"
    body = t[:-1]
    if body in ("", "+"):
        return "0", "1"
    if body == "-":
        return "0", "-1"
    # find the split point: last +/- not at position 0 and not after e/E
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE/":
            re_part, im_part = body[:k], body[k:]
            if im_part in ("+", "-"):
                im_part += "1"
            return re_part, im_part
    return "0", body


class GaussianRational:
    """Exact element of Q(i): ``re + im*i`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return GaussianRational(1) / self ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """Field norm re^2 + im^2 (exact)."""
        return self.re * self.re + self.im * self.im

    def sqrt_exact(self):
        """Exact square root in Q(i), or None when it does not exist."""
        if self.is_zero():
            return GaussianRational(0)
        n = _fraction_sqrt(self.norm())
        if n is None:
            return None
        # (x+yi)^2 = re+im*i  =>  x^2 = (re + |z|)/2, y = im/(2x)
        x2 = (self.re + n) / 2
        x = _fraction_sqrt(x2)
        if x is None or x == 0:
            if self.im == 0 and self.re < 0:
                y = _fraction_sqrt(-self.re)
                return GaussianRational(0, y) if y is not None else None
            return None
        y = self.im / (2 * x)
        cand = GaussianRational(x, y)
        return cand if cand * cand == self else None

    def to_bigcomplex(self, prec: int = 256) -> BigComplex:
        return BigComplex(self.re, self.im, prec)

    def __repr__(self):
        return f"GaussianRational({self.to_string()})"

    def to_string(self) -> str:
        """Serialize as exact ``p/q±r/s i`` strings."""
        if self.im == 0:
            return _fmt_fraction(self.re)
        if self.re == 0:
            return _fmt_fraction_i(self.im)
        sign = "+" if self.im > 0 else "-"
        return f"{_fmt_fraction(self.re)}{sign}{_fmt_fraction_i(abs(self.im))}"

    @staticmethod
    def from_string(s: str) -> "GaussianRational":
        re_s, im_s = _split_complex_string(s)
        return GaussianRational(Fraction(re_s), Fraction(im_s))


def _fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _fmt_fraction_i(f: Fraction) -> str:
    if f == 1:
        return "i"
    if f == -1:
        return "-i"
    return _fmt_fraction(f) + "i"


def _fraction_sqrt(f: Fraction):
    """Exact square root of a nonnegative Fraction, or None."""
    if f < 0:
        return None
    if f == 0:
        return Fraction(0)
    rn = isqrt(f.numerator)
    rd = isqrt(f.denominator)
    if rn * rn == f.numerator and rd * rd == f.denominator:
        return Fraction(rn, rd)
    return None


def scalar_from_string(s: str, mode: str, prec: int = 256):
    """Parse a scalar string in the given mode ('exact' or 'mp')."""
    if mode == "exact":
        return GaussianRational.from_string(s)
    return BigComplex.from_string(s, prec)
