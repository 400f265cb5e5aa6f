"""Truncated multivariate Taylor series.

A :class:`Series` is a polynomial in ``nvars`` local variables truncated at a
total degree ``order``.  Arithmetic propagates derivatives forward, so a
smooth function written with ordinary operators (plus the helpers at the
bottom of this module) can be evaluated on ``Series.variables(...)`` to
obtain all its partial derivatives at a point.  Coefficients may be floats or
:class:`fractions.Fraction`; exact inputs stay exact under ``+ - *`` and
division by exact constants.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from numbers import Number
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Series",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "power",
    "det2",
    "det3",
    "cross",
    "dot",
    "constant_of",
]


def _zero_key(n: int) -> tuple:
    return (0,) * n


def _monomials(nvars: int, order: int):
    for k in product(range(order + 1), repeat=nvars):
        if sum(k) <= order:
            yield k


class Series:
    __slots__ = ("nvars", "order", "coeffs")
    # numpy scalars must defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, coeffs: dict, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Series":
        return cls({_zero_key(nvars): value}, nvars, order)

    @classmethod
    def variable(cls, value, index: int, nvars: int, order: int) -> "Series":
        key = [0] * nvars
        key[index] = 1
        c = {_zero_key(nvars): value}
        if order >= 1:
            c[tuple(key)] = 1
        return cls(c, nvars, order)

    @classmethod
    def variables(cls, point: Sequence, order: int) -> list["Series"]:
        """Independent variables centred at ``point``."""
        n = len(point)
        return [cls.variable(p, i, n, order) for i, p in enumerate(point)]

    @classmethod
    def from_derivatives(cls, derivs: dict, nvars: int, order: int) -> "Series":
        """Build from partial derivatives keyed by multi-index."""
        c = {}
        for k, d in derivs.items():
            if sum(k) <= order:
                c[tuple(k)] = d / math.prod(math.factorial(i) for i in k)
        return cls(c, nvars, order)

    # -- access ---------------------------------------------------------
    @property
    def value(self):
        return self.coeffs.get(_zero_key(self.nvars), 0)

    def coeff(self, key: Sequence[int]):
        return self.coeffs.get(tuple(key), 0)

    def deriv(self, key: Sequence[int]):
        """Partial derivative at the centre for multi-index ``key``."""
        key = tuple(key)
        if sum(key) > self.order:
            raise ValueError(f"derivative {key} exceeds series order {self.order}")
        c = self.coeffs.get(key, 0)
        f = math.prod(math.factorial(i) for i in key)
        return c * f

    def gradient(self) -> list:
        out = []
        for i in range(self.nvars):
            k = [0] * self.nvars
            k[i] = 1
            out.append(self.deriv(k))
        return out

    def diff(self, index: int) -> "Series":
        """Series of the partial derivative in variable ``index`` (order drops by one)."""
        c = {}
        for k, v in self.coeffs.items():
            if k[index] == 0 or sum(k) > self.order:
                continue
            nk = list(k)
            nk[index] -= 1
            c[tuple(nk)] = v * k[index]
        return Series(c, self.nvars, max(self.order - 1, 0))

    def truncate(self, order: int) -> "Series":
        order = min(order, self.order)
        return Series({k: v for k, v in self.coeffs.items() if sum(k) <= order}, self.nvars, order)

    def shift(self) -> "Series":
        """Copy with the constant term removed."""
        c = dict(self.coeffs)
        c.pop(_zero_key(self.nvars), None)
        return Series(c, self.nvars, self.order)

    def map(self, fn: Callable) -> "Series":
        return Series({k: fn(v) for k, v in self.coeffs.items()}, self.nvars, self.order)

    def to_float(self) -> "Series":
        return self.map(float)

    def is_constant(self) -> bool:
        z = _zero_key(self.nvars)
        return all(k == z or v == 0 for k, v in self.coeffs.items())

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}: {v}" for k, v in sorted(self.coeffs.items()) if v != 0)
        return f"Series(nvars={self.nvars}, order={self.order}, {{{terms}}})"

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Series):
            if other.nvars != self.nvars:
                raise ValueError("series variable counts differ")
            return other
        return Series.constant(other, self.nvars, self.order)

    def __add__(self, other):
        if not isinstance(other, Series):
            c = dict(self.coeffs)
            z = _zero_key(self.nvars)
            c[z] = c.get(z, 0) + other
            return Series(c, self.nvars, self.order)
        other = self._coerce(other)
        order = min(self.order, other.order)
        c = {k: v for k, v in self.coeffs.items() if sum(k) <= order}
        for k, v in other.coeffs.items():
            if sum(k) <= order:
                c[k] = c.get(k, 0) + v
        return Series(c, self.nvars, order)

    __radd__ = __add__

    def __neg__(self):
        return Series({k: -v for k, v in self.coeffs.items()}, self.nvars, self.order)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series({k: v * other for k, v in self.coeffs.items()}, self.nvars, self.order)
        other = self._coerce(other)
        order = min(self.order, other.order)
        c: dict = {}
        left = [(k, sum(k), v) for k, v in self.coeffs.items() if v != 0 and sum(k) <= order]
        right = [(k, sum(k), v) for k, v in other.coeffs.items() if v != 0 and sum(k) <= order]
        for k1, d1, v1 in left:
            for k2, d2, v2 in right:
                if d1 + d2 > order:
                    continue
                key = tuple(a + b for a, b in zip(k1, k2))
                c[key] = c.get(key, 0) + v1 * v2
        return Series(c, self.nvars, order)

    __rmul__ = __mul__

    def reciprocal(self) -> "Series":
        c0 = self.value
        if c0 == 0:
            raise ZeroDivisionError("reciprocal of a series with zero constant term")
        inv = 1 / c0 if not isinstance(c0, int) else Fraction(1, c0)
        h = self.shift() * inv
        # 1/(c0 (1+h)) = inv * sum (-h)^k
        result = Series.constant(1, self.nvars, self.order)
        term = Series.constant(1, self.nvars, self.order)
        for _ in range(self.order):
            term = term * (-h)
            result = result + term
        return result * inv

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.reciprocal()
        if isinstance(other, int) and all(isinstance(v, (int, Fraction)) for v in self.coeffs.values()):
            other = Fraction(other)
        return Series({k: v / other for k, v in self.coeffs.items()}, self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            result = Series.constant(1, self.nvars, self.order)
            base = self
            while p:
                if p & 1:
                    result = result * base
                base = base * base
                p >>= 1
            return result
        if isinstance(p, int):
            return (self ** (-p)).reciprocal()
        return power(self, p)

    # -- composition ------------------------------------------------------
    def compose(self, inputs: Sequence) -> "Series | Number":
        """Evaluate the truncated polynomial at ``inputs`` (one per variable).

        Inputs are offsets from the centre; series inputs should have a zero
        (or small) constant term for the result to be a faithful Taylor
        expansion.
        """
        if len(inputs) != self.nvars:
            raise ValueError("wrong number of inputs")
        pows = []
        for x in inputs:
            row = [1]
            for _ in range(self.order):
                row.append(row[-1] * x)
            pows.append(row)
        total = 0
        for k, v in self.coeffs.items():
            if v == 0 or sum(k) > self.order:
                continue
            term = v
            for i, e in enumerate(k):
                if e:
                    term = term * pows[i][e]
            total = total + term
        return total


def constant_of(x):
    """Constant term of a series, or ``x`` itself for plain numbers."""
    return x.value if isinstance(x, Series) else x


def _apply_univariate(x: Series, derivs: Sequence) -> Series:
    """f(x) given f^(k)(x0) for k = 0..order."""
    h = x.shift()
    result = Series.constant(derivs[0], x.nvars, x.order)
    term = Series.constant(1, x.nvars, x.order)
    for k in range(1, x.order + 1):
        term = term * h
        result = result + term * (derivs[k] / math.factorial(k))
    return result


def _scalar(fn_math, fn_np, x):
    if isinstance(x, (int, float, Fraction)):
        return fn_math(x)
    return fn_np(x)


def exp(x):
    if isinstance(x, Series):
        e = math.exp(x.value)
        return _apply_univariate(x, [e] * (x.order + 1))
    return _scalar(math.exp, np.exp, x)


def log(x):
    if isinstance(x, Series):
        c = float(x.value)
        d = [math.log(c)] + [(-1) ** (k - 1) * math.factorial(k - 1) / c**k for k in range(1, x.order + 1)]
        return _apply_univariate(x, d)
    return _scalar(math.log, np.log, x)


def sin(x):
    if isinstance(x, Series):
        c = float(x.value)
        cyc = [math.sin(c), math.cos(c), -math.sin(c), -math.cos(c)]
        return _apply_univariate(x, [cyc[k % 4] for k in range(x.order + 1)])
    return _scalar(math.sin, np.sin, x)


def cos(x):
    if isinstance(x, Series):
        c = float(x.value)
        cyc = [math.cos(c), -math.sin(c), -math.cos(c), math.sin(c)]
        return _apply_univariate(x, [cyc[k % 4] for k in range(x.order + 1)])
    return _scalar(math.cos, np.cos, x)


def power(x, p):
    if isinstance(x, Series):
        c = float(x.value)
        d = []
        coef = 1.0
        for k in range(x.order + 1):
            d.append(coef * c ** (p - k))
            coef *= p - k
        return _apply_univariate(x, d)
    return x**p


def sqrt(x):
    if isinstance(x, Series):
        return power(x, 0.5)
    return _scalar(math.sqrt, np.sqrt, x)


# -- small generic linear algebra (works on numbers and series) -------------

def det2(a, b, c, d):
    """Determinant of [[a, b], [c, d]]."""
    return a * d - b * c


def det3(m: Sequence[Sequence]):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def cross(x: Sequence, y: Sequence) -> list:
    return [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]


def dot(x: Iterable, y: Iterable):
    total = 0
    for a, b in zip(x, y):
        total = total + a * b
    return total
