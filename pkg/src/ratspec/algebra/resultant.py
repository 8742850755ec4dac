"""Resultants via Sylvester determinants.

Sign convention (documented and fixed): with p of degree m and q of degree
n, Res(p, q) = det(Syl(p, q)) where the first n rows carry the
coefficients of p (descending) and the last m rows those of q.  This is
the classical normalization

    Res(p, q) = lc(p)^n * lc(q)^m * prod_{i,j} (alpha_i - beta_j),

so Res(z, z-1) = -1 and Res(p, q) = (-1)^(mn) Res(q, p).

Exact coefficient fields (Gaussian rationals, rational functions in t) go
through fraction-free-style Gaussian elimination with exact arithmetic;
multiprecision input uses partial-pivot elimination in BigComplex.
"""

from __future__ import annotations

from ..errors import ZeroPolynomial
from .poly import Poly
from .scalars import BigComplex


def sylvester_matrix(pc: list, qc: list, m: int, n: int):
    """Sylvester matrix rows from low-first coefficient lists padded to degrees m, n."""
    size = m + n
    zero = (pc[0] if pc else qc[0]) * 0
    p_desc = [pc[m - k] if m - k < len(pc) else zero for k in range(m + 1)]
    q_desc = [qc[n - k] if n - k < len(qc) else zero for k in range(n + 1)]
    rows = []
    for r in range(n):
        row = [zero] * size
        for k, c in enumerate(p_desc):
            row[r + k] = c
        rows.append(row)
    for r in range(m):
        row = [zero] * size
        for k, c in enumerate(q_desc):
            row[r + k] = c
        rows.append(row)
    return rows


def _det_exact(rows):
    """Gaussian elimination over an exact field; exact-zero pivot tests."""
    n = len(rows)
    if n == 0:
        raise ZeroPolynomial("empty determinant")
    det_sign = 1
    acc_num = None
    rows = [list(r) for r in rows]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not rows[r][col].is_zero():
                piv = r
                break
        if piv is None:
            return rows[0][0] * 0
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det_sign = -det_sign
        pivot = rows[col][col]
        acc_num = pivot if acc_num is None else acc_num * pivot
        for r in range(col + 1, n):
            f = rows[r][col] / pivot
            if f.is_zero():
                continue
            for c in range(col, n):
                rows[r][c] = rows[r][c] - f * rows[col][c]
    return acc_num * det_sign if det_sign < 0 else acc_num


def _det_mp(rows):
    """Partial-pivot elimination for BigComplex entries."""
    n = len(rows)
    rows = [list(r) for r in rows]
    sign = 1
    acc = None
    for col in range(n):
        piv, piv_abs = None, None
        for r in range(col, n):
            a = rows[r][col].abs()
            if piv is None or a > piv_abs:
                piv, piv_abs = r, a
        if piv_abs == 0:
            return rows[0][0] * 0
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            sign = -sign
        pivot = rows[col][col]
        acc = pivot if acc is None else acc * pivot
        for r in range(col + 1, n):
            if rows[r][col].is_zero():
                continue
            f = rows[r][col] / pivot
            for c in range(col, n):
                rows[r][c] = rows[r][c] - f * rows[col][c]
    return acc * sign if sign < 0 else acc


def _det(rows):
    return _det_mp(rows) if isinstance(rows[0][0], BigComplex) else _det_exact(rows)


def resultant(p: Poly, q: Poly):
    """Res(p, q) at the natural degrees of p and q."""
    if p.is_zero() or q.is_zero():
        raise ZeroPolynomial("resultant of the zero polynomial is undefined")
    m, n = p.degree, q.degree
    if m == 0:
        return p.coeffs[0] ** n
    if n == 0:
        return q.coeffs[0] ** m
    return _det(sylvester_matrix(p.coeffs, q.coeffs, m, n))


def resultant_homogeneous(pc: list, qc: list, d: int):
    """Resultant of two degree-d binary forms given by affine coefficient lists.

    The lists may be shorter than d+1 (zero leading coefficients encode
    roots at infinity); the Sylvester matrix is built at formal degree d
    in both arguments, which is exactly the resultant of the forms.
    """
    if not pc or not qc:
        raise ZeroPolynomial("zero coordinate in homogeneous resultant")
    if d == 0:
        raise ZeroPolynomial("homogeneous resultant needs positive degree")
    return _det(sylvester_matrix(pc, qc, d, d))
