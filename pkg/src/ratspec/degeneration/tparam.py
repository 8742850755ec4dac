"""Exact rational functions of t over the Gaussian rationals.

TParam is the coefficient field for 1-parameter families: num/den with
den monic and gcd cleared, all arithmetic exact.  The t-adic valuation
ord_0(num) - ord_0(den) and the Laurent leading coefficient are the two
quantities everything downstream (reduction at t=0, Newton polygons,
rescaling searches) is built on.

A small recursive-descent parser accepts strings like "t", "1/t",
"t^2+1", "(1+2i)t", "3/2-1/2i", "t^-3" with implicit multiplication.
"""

from __future__ import annotations

from fractions import Fraction

from ..algebra import GaussianRational, Poly
from ..algebra.poly import poly_gcd
from ..errors import BadInput

_GR_ZERO = GaussianRational(0)
_GR_ONE = GaussianRational(1)


def tpoly(coeffs) -> Poly:
    """Polynomial in t over Q(i) from ints/Fractions/GaussianRationals."""
    out = []
    for c in coeffs:
        if isinstance(c, GaussianRational):
            out.append(c)
        else:
            out.append(GaussianRational(c))
    return Poly(out)


def _ord(p: Poly) -> int | None:
    """Order of vanishing at t = 0; None for the zero polynomial."""
    if p.is_zero():
        return None
    for k, c in enumerate(p.coeffs):
        if not c.is_zero():
            return k
    return None


class TParam:
    """Element of Q(i)(t) in canonical form (monic denominator, gcd 1)."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce: bool = True):
        if not isinstance(num, Poly):
            num = tpoly(num if isinstance(num, (list, tuple)) else [num])
        if den is None:
            den = tpoly([1])
        elif not isinstance(den, Poly):
            den = tpoly(den if isinstance(den, (list, tuple)) else [den])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in Q(i)(t)")
        if num.is_zero():
            self.num = Poly([])
            self.den = tpoly([1])
            return
        if reduce:
            g = poly_gcd(num, den)
            if g.degree >= 1:
                num = num // g
                den = den // g
            lead = den.lead()
            if not (lead - _GR_ONE).is_zero():
                num = Poly([c / lead for c in num.coeffs])
                den = Poly([c / lead for c in den.coeffs])
        self.num = num
        self.den = den

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero() -> "TParam":
        return TParam(tpoly([]))

    @staticmethod
    def one() -> "TParam":
        return TParam(tpoly([1]))

    @staticmethod
    def t_power(k: int) -> "TParam":
        """t^k for any integer k."""
        if k >= 0:
            return TParam(tpoly([0] * k + [1]))
        return TParam(tpoly([1]), tpoly([0] * (-k) + [1]))

    @staticmethod
    def constant(c) -> "TParam":
        return TParam(tpoly([c]))

    # -- ring/field structure ---------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, TParam):
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return TParam.constant(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return TParam(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return TParam(self.num * o.den - o.num * self.den, self.den * o.den)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return TParam(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.is_zero():
            raise ZeroDivisionError("division by zero in Q(i)(t)")
        return TParam(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return TParam(-self.num, self.den, reduce=False)

    def __pow__(self, k: int):
        if k < 0:
            return TParam.one() / self ** (-k)
        out = TParam.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).is_zero()

    def __hash__(self):
        return hash((tuple(self.num.coeffs), tuple(self.den.coeffs)))

    # -- t-adic structure --------------------------------------------------

    def valuation(self) -> int | None:
        """ord_0(num) - ord_0(den); None for the zero element (+infinity)."""
        if self.is_zero():
            return None
        return _ord(self.num) - _ord(self.den)

    def leading_coeff(self) -> GaussianRational:
        """Coefficient of t^valuation in the Laurent expansion at 0."""
        if self.is_zero():
            return _GR_ZERO
        return self.num.coeffs[_ord(self.num)] / self.den.coeffs[_ord(self.den)]

    def value_at_zero(self) -> GaussianRational:
        v = self.valuation()
        if v is None or v > 0:
            return _GR_ZERO
        if v < 0:
            raise BadInput("pole at t = 0; normalize the family first")
        return self.leading_coeff()

    def scale_by_t_power(self, k: int) -> "TParam":
        if self.is_zero():
            return self
        if k >= 0:
            return TParam(self.num.shift_up(k), self.den)
        return TParam(self.num, self.den.shift_up(-k))

    def substitute_t_power(self, n: int) -> "TParam":
        """t -> t^n (exact base change)."""
        if n < 1:
            raise BadInput("base change order must be >= 1")
        return TParam(_spread(self.num, n), _spread(self.den, n))

    def evaluate(self, x):
        """Evaluate at a scalar value of t (same backend as x)."""
        return self.num.evaluate(x) / self.den.evaluate(x)

    # -- serialization ------------------------------------------------------

    def to_string(self) -> str:
        if self.is_zero():
            return "0"
        ns = _poly_string(self.num)
        if self.den.degree == 0 and (self.den.coeffs[0] - _GR_ONE).is_zero():
            return ns
        ds = _poly_string(self.den)
        ns_wrapped = f"({ns})" if _needs_parens(self.num) else ns
        ds_wrapped = f"({ds})" if _needs_parens(self.den) else ds
        return f"{ns_wrapped}/{ds_wrapped}"

    @staticmethod
    def from_string(s: str) -> "TParam":
        return parse_tparam(s)

    def __repr__(self):
        return f"TParam({self.to_string()})"


def _spread(p: Poly, n: int) -> Poly:
    if p.is_zero():
        return p
    out = [_GR_ZERO] * (p.degree * n + 1)
    for k, c in enumerate(p.coeffs):
        out[k * n] = c
    return Poly(out)


def _needs_parens(p: Poly) -> bool:
    nonzero = sum(1 for c in p.coeffs if not c.is_zero())
    if nonzero > 1:
        return True
    k, c = next((k, c) for k, c in enumerate(p.coeffs) if not c.is_zero())
    if k == 0:
        return "/" in c.to_string() or (c.re != 0 and c.im != 0)
    return not (c == _GR_ONE)


def _monomial_string(c: GaussianRational, k: int) -> str:
    if k == 0:
        return c.to_string()
    t = "t" if k == 1 else f"t^{k}"
    if c == _GR_ONE:
        return t
    if c == GaussianRational(-1):
        return f"-{t}"
    cs = c.to_string()
    if (c.re != 0 and c.im != 0) or "/" in cs:
        return f"({cs}){t}"
    return f"{cs}{t}"


def _poly_string(p: Poly) -> str:
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeff(k)
        if c.is_zero():
            continue
        s = _monomial_string(c, k)
        if parts and not s.startswith("-"):
            parts.append("+" + s)
        else:
            parts.append(s)
    return "".join(parts) or "0"


# -- parser ------------------------------------------------------------------


class _Tok:
    def __init__(self, kind, value=None):
        self.kind = kind
        self.value = value


def _lex(s: str):
    toks = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(s) and s[j].isdigit():
                j += 1
            toks.append(_Tok("int", int(s[i:j])))
            i = j
            continue
        if ch == "i":
            toks.append(_Tok("i"))
            i += 1
            continue
        if ch in ("t", "u"):
            toks.append(_Tok("t"))
            i += 1
            continue
        if ch in "+-*/^()":
            toks.append(_Tok(ch))
            i += 1
            continue
        raise BadInput(f"unexpected character {ch!r} in t-expression {s!r}")
    toks.append(_Tok("end"))
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind and tok.kind != kind:
            raise BadInput(f"expected {kind}, found {tok.kind}")
        self.pos += 1
        return tok

    def parse(self) -> TParam:
        v = self.expr()
        if self.peek().kind != "end":
            raise BadInput("trailing input in t-expression")
        return v

    def expr(self) -> TParam:
        v = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self) -> TParam:
        v = self.unary()
        while True:
            k = self.peek().kind
            if k in ("*", "/"):
                op = self.take().kind
                rhs = self.unary()
                v = v * rhs if op == "*" else v / rhs
            elif k in ("int", "i", "t", "("):
                v = v * self.unary()      # implicit multiplication
            else:
                return v

    def unary(self) -> TParam:
        if self.peek().kind == "-":
            self.take()
            return -self.unary()
        if self.peek().kind == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> TParam:
        base = self.atom()
        if self.peek().kind == "^":
            self.take()
            sign = 1
            if self.peek().kind == "-":
                self.take()
                sign = -1
            e = sign * self.take("int").value
            return base ** e
        return base

    def atom(self) -> TParam:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            return TParam.constant(tok.value)
        if tok.kind == "i":
            self.take()
            return TParam.constant(GaussianRational(0, 1))
        if tok.kind == "t":
            self.take()
            return TParam.t_power(1)
        if tok.kind == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        raise BadInput(f"unexpected token {tok.kind} in t-expression")


def parse_tparam(s: str) -> TParam:
    return _Parser(_lex(s)).parse()
