"""Exact rational numbers and the rational-function field Q(k).

Every coefficient, weight and exponent in the package is a
:class:`KappaRational`: a reduced fraction of univariate polynomials in the
formal parameter ``k`` (kappa) with rational coefficients and a monic
denominator.  Constants take a fast path through :mod:`gmpy2`; genuine
polynomials are handled by :mod:`flint`.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC

import flint
from gmpy2 import mpq

__all__ = [
    "KappaRational",
    "PoleError",
    "K",
    "ZERO",
    "ONE",
    "as_krat",
    "krat_arith",
    "krat_eval",
    "central_charge",
    "weight_hrs",
    "weight_hrho",
]


class PoleError(ZeroDivisionError):
    """A denominator vanished at a specialization of k."""


def _to_fmpq(q):
    return flint.fmpq(int(q.numerator), int(q.denominator))


def _from_fmpq(q):
    return mpq(int(q.p), int(q.q))


class KappaRational:
    """Canonical element of Q(k).

    Constants are stored as a single ``mpq``; anything else as a pair of
    ``fmpq_poly`` with ``gcd(num, den) == 1`` and ``den`` monic.  Instances
    are immutable and hashable, and equality is structural.
    """

    __slots__ = ("_c", "_n", "_d", "_h")

    def __init__(self, value=0):
        if isinstance(value, KappaRational):
            self._c, self._n, self._d, self._h = value._c, value._n, value._d, value._h
            return
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, float):
            raise TypeError("floats are not exact; pass a Fraction or string")
        self._c = mpq(value)
        self._n = self._d = None
        self._h = None

    # -- construction -----------------------------------------------------
    @classmethod
    def _const(cls, c):
        obj = object.__new__(cls)
        obj._c = c
        obj._n = obj._d = None
        obj._h = None
        return obj

    @classmethod
    def from_polys(cls, num, den=None):
        """Build from ``fmpq_poly`` numerator and denominator and normalize."""
        if den is None:
            den = flint.fmpq_poly([1])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in Q(k)")
        if num.is_zero():
            return ZERO
        if den.degree() > 0:
            g = num.gcd(den)
            if g.degree() > 0:
                num = num / g
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        if den.degree() == 0 and num.degree() == 0:
            return cls._const(_from_fmpq(num.coeffs()[0]))
        obj = object.__new__(cls)
        obj._c = None
        obj._n = num
        obj._d = den
        obj._h = None
        return obj

    @classmethod
    def from_coeffs(cls, num, den=(1,)):
        """Build from ascending coefficient lists of rationals (or strings)."""
        n = flint.fmpq_poly([_to_fmpq(mpq(Fraction(c) if isinstance(c, str) else c)) for c in num])
        d = flint.fmpq_poly([_to_fmpq(mpq(Fraction(c) if isinstance(c, str) else c)) for c in den])
        return cls.from_polys(n, d)

    def _polys(self):
        if self._c is not None:
            return flint.fmpq_poly([_to_fmpq(self._c)]), flint.fmpq_poly([1])
        return self._n, self._d

    # -- queries -----------------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return self._c is not None

    def constant(self) -> Fraction:
        """The value as a :class:`fractions.Fraction`; fails for non-constants."""
        if self._c is None:
            raise ValueError(f"{self} depends on k")
        return Fraction(int(self._c.numerator), int(self._c.denominator))

    def num_coeffs(self) -> list[Fraction]:
        n, _ = self._polys()
        return [Fraction(int(c.p), int(c.q)) for c in n.coeffs()] or [Fraction(0)]

    def den_coeffs(self) -> list[Fraction]:
        _, d = self._polys()
        return [Fraction(int(c.p), int(c.q)) for c in d.coeffs()]

    def __bool__(self):
        return self._c is None or self._c != 0

    def is_integer(self) -> bool:
        return self._c is not None and self._c.denominator == 1

    def poly_part_constant(self) -> Fraction:
        """Constant term of the polynomial part of num/den (used for mod-Z reps)."""
        if self._c is not None:
            return self.constant()
        q = self._n // self._d
        cs = q.coeffs()
        return Fraction(int(cs[0].p), int(cs[0].q)) if cs else Fraction(0)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, KappaRational):
            other = as_krat(other)
        if self._c is not None and other._c is not None:
            return KappaRational._const(self._c + other._c)
        n1, d1 = self._polys()
        n2, d2 = other._polys()
        if d1 == d2:
            return KappaRational.from_polys(n1 + n2, d1)
        return KappaRational.from_polys(n1 * d2 + n2 * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        if self._c is not None:
            return KappaRational._const(-self._c)
        obj = object.__new__(KappaRational)
        obj._c = None
        obj._n = -self._n
        obj._d = self._d
        obj._h = None
        return obj

    def __pos__(self):
        return self

    def __sub__(self, other):
        if not isinstance(other, KappaRational):
            other = as_krat(other)
        if self._c is not None and other._c is not None:
            return KappaRational._const(self._c - other._c)
        return self + (-other)

    def __rsub__(self, other):
        return as_krat(other) - self

    def __mul__(self, other):
        if not isinstance(other, KappaRational):
            other = as_krat(other)
        if self._c is not None and other._c is not None:
            return KappaRational._const(self._c * other._c)
        if (self._c is not None and self._c == 0) or (other._c is not None and other._c == 0):
            return ZERO
        n1, d1 = self._polys()
        n2, d2 = other._polys()
        return KappaRational.from_polys(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, KappaRational):
            other = as_krat(other)
        if not other:
            raise ZeroDivisionError("division by zero in Q(k)")
        if self._c is not None and other._c is not None:
            return KappaRational._const(self._c / other._c)
        n1, d1 = self._polys()
        n2, d2 = other._polys()
        return KappaRational.from_polys(n1 * d2, d1 * n2)

    def __rtruediv__(self, other):
        return as_krat(other) / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("only integer powers are defined in Q(k)")
        if e < 0:
            return ONE / (self ** (-e))
        if self._c is not None:
            return KappaRational._const(self._c ** e)
        return KappaRational.from_polys(self._n ** e, self._d ** e)

    def inverse(self):
        return ONE / self

    # -- comparison / hashing ---------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, KappaRational):
            if isinstance(other, (int, Fraction, _RationalABC)) or type(other) is type(mpq()):
                other = as_krat(other)
            else:
                return NotImplemented
        if self._c is not None:
            return other._c is not None and self._c == other._c
        if other._c is not None:
            return False
        return self._n == other._n and self._d == other._d

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self._h is None:
            if self._c is not None:
                self._h = hash(self._c)
            else:
                self._h = hash((tuple((int(c.p), int(c.q)) for c in self._n.coeffs()),
                                tuple((int(c.p), int(c.q)) for c in self._d.coeffs())))
        return self._h

    def sort_key(self):
        """Deterministic total order used for canonical term layouts."""
        if self._c is not None:
            return (0, (Fraction(int(self._c.numerator), int(self._c.denominator)),), ())
        return (1, tuple(self.num_coeffs()), tuple(self.den_coeffs()))

    # -- evaluation --------------------------------------------------------
    def evaluate(self, k0) -> "KappaRational":
        """Substitute ``k = k0``; raises :class:`PoleError` at a pole."""
        if self._c is not None:
            return self
        k0 = _to_fmpq(mpq(k0 if not isinstance(k0, KappaRational) else k0.constant()))
        dv = self._d(k0)
        if dv == 0:
            raise PoleError(f"pole at specialization k={k0} of {self}")
        return KappaRational._const(_from_fmpq(self._n(k0) / dv))

    # -- printing / serialization -----------------------------------------
    def __repr__(self):
        return f"KappaRational({str(self)!r})"

    def __str__(self):
        if self._c is not None:
            return str(Fraction(int(self._c.numerator), int(self._c.denominator)))
        num = _poly_str(self.num_coeffs())
        den = self.den_coeffs()
        if len(den) == 1:
            return num
        dstr = _poly_str(den)
        if _is_compound(self.num_coeffs()):
            num = f"({num})"
        if _is_compound(den):
            dstr = f"({dstr})"
        return f"{num}/{dstr}"

    def to_json(self) -> dict:
        return {"num": [str(c) for c in self.num_coeffs()],
                "den": [str(c) for c in self.den_coeffs()]}

    @classmethod
    def from_json(cls, obj: dict) -> "KappaRational":
        return cls.from_coeffs(obj["num"], obj["den"])


def _is_compound(coeffs) -> bool:
    nz = [c for c in coeffs if c != 0]
    if len(nz) > 1:
        return True
    return len(nz) == 1 and coeffs.index(nz[0]) > 0 and nz[0] != 1 and nz[0] != -1


def _poly_str(coeffs) -> str:
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        mono = "" if i == 0 else ("k" if i == 1 else f"k^{i}")
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = str(mag)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


ZERO = KappaRational._const(mpq(0))
ONE = KappaRational._const(mpq(1))
K = KappaRational.from_polys(flint.fmpq_poly([0, 1]))


def as_krat(value) -> KappaRational:
    if isinstance(value, KappaRational):
        return value
    if isinstance(value, int):
        return KappaRational._const(mpq(value))
    return KappaRational(value)


def krat_arith(a, b, op: str) -> KappaRational:
    a, b = as_krat(a), as_krat(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def krat_eval(a, k0) -> KappaRational:
    k0 = as_krat(k0)
    if k0.constant() <= 0:
        raise ValueError("specialization requires k0 > 0")
    return as_krat(a).evaluate(k0.constant())


def central_charge(kappa=K) -> KappaRational:
    """c(k) = 13 - 6 k/4 - 6 4/k."""
    kappa = as_krat(kappa)
    if not kappa:
        raise ZeroDivisionError("c(k) is undefined at k = 0")
    return 13 - 6 * kappa / 4 - 6 * 4 / kappa


def weight_hrs(kappa, r: int, s: int) -> KappaRational:
    """Kac weight h_{r,s}(k)."""
    kappa = as_krat(kappa)
    if not kappa:
        raise ZeroDivisionError("h_{r,s} is undefined at k = 0")
    return kappa / 16 * (r * r - 1) - Fraction(r * s - 1, 2) + (s * s - 1) / kappa


def weight_hrho(kappa, rho) -> KappaRational:
    """Weight rho (rho + 4 - k) / (4 k) of the field at a passive point."""
    kappa, rho = as_krat(kappa), as_krat(rho)
    if not kappa:
        raise ZeroDivisionError("h(rho) is undefined at k = 0")
    return rho * (rho + 4 - kappa) / (4 * kappa)
