"""Virasoro enveloping algebra, Verma modules and singular vectors.

Monomials are stored as *words*: tuples of signed mode indices already in
Poincare-Birkhoff-Witt order.  The order puts lowering modes first with the
largest lowering index leftmost (so ``L_{-3}L_{-1}L_{-1}`` is ``(-3, -1, -1)``),
then powers of ``L_0``, then raising modes with the largest index leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .kappa import ONE, ZERO, KappaRational, as_krat, central_charge, weight_hrs
from .linalg import nullspace

__all__ = [
    "PBWMonomial",
    "UEAElement",
    "VermaVector",
    "VermaStructure",
    "SingularVectorError",
    "GradeCapError",
    "normal_order",
    "uea_mul",
    "dagger",
    "verma_act",
    "singular_vector",
    "partition_p",
    "partitions",
    "verma_basis",
    "character_quotient",
    "classify_verma",
    "generator",
]

DEFAULT_GRADE_CAP = 8


class SingularVectorError(ValueError):
    """The annihilation system has no normalized one-dimensional solution."""


class GradeCapError(ValueError):
    """A requested grade exceeds the configured cap."""


def _key(a: int):
    if a < 0:
        return (0, a)
    if a == 0:
        return (1, 0)
    return (2, -a)


def is_ordered(word) -> bool:
    return all(_key(word[i]) <= _key(word[i + 1]) for i in range(len(word) - 1))


def word_grade(word) -> int:
    return -sum(word)


@dataclass(frozen=True)
class PBWMonomial:
    """PBW monomial ``L_{-n_k}...L_{-n_1} L_0^z L_{m_1}...L_{m_j}``.

    ``negative`` is (n_1 <= ... <= n_k) and ``positive`` is (m_1 >= ... >= m_j).
    """

    negative: tuple = ()
    zero_power: int = 0
    positive: tuple = ()

    def __post_init__(self):
        if any(n < 1 for n in self.negative) or list(self.negative) != sorted(self.negative):
            raise ValueError("negative part must be non-decreasing positive integers")
        if any(m < 1 for m in self.positive) or list(self.positive) != sorted(self.positive, reverse=True):
            raise ValueError("positive part must be non-increasing positive integers")
        if self.zero_power < 0:
            raise ValueError("L_0 power must be non-negative")

    @property
    def grade(self) -> int:
        return sum(self.negative) - sum(self.positive)

    @property
    def word(self) -> tuple:
        return tuple(-n for n in reversed(self.negative)) + (0,) * self.zero_power + self.positive

    @classmethod
    def from_word(cls, word) -> "PBWMonomial":
        if not is_ordered(word):
            raise ValueError(f"word {word} is not in PBW order")
        neg = tuple(sorted(-a for a in word if a < 0))
        pos = tuple(a for a in word if a > 0)
        return cls(neg, sum(1 for a in word if a == 0), pos)


def _word_str(word) -> str:
    if not word:
        return "1"
    out = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        e = j - i
        out.append(f"L_{{{word[i]}}}" + (f"^{e}" if e > 1 else ""))
        i = j
    return " ".join(out)


def _coeff_prefix(cf: KappaRational, first: bool) -> str:
    s = str(cf)
    neg = s.startswith("-") and cf.is_constant
    mag = s[1:] if neg else s
    if not cf.is_constant:
        mag = f"({s})"
        neg = False
    sign = ("-" if neg else "") if first else (" - " if neg else " + ")
    return sign, mag


class UEAElement:
    """Finite combination of PBW monomials with coefficients in Q(k)."""

    __slots__ = ("terms", "c")

    def __init__(self, terms: dict, c):
        self.c = as_krat(c)
        self.terms = {w: v for w, v in terms.items() if v}

    # -- algebra -----------------------------------------------------------
    def _check(self, other):
        if self.c != other.c:
            raise ValueError("central charges differ")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for w, v in other.terms.items():
            out[w] = out.get(w, ZERO) + v
        return UEAElement(out, self.c)

    def __neg__(self):
        return UEAElement({w: -v for w, v in self.terms.items()}, self.c)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        s = as_krat(s)
        return UEAElement({w: v * s for w, v in self.terms.items()}, self.c)

    def __mul__(self, other):
        if isinstance(other, UEAElement):
            return uea_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, UEAElement):
            return NotImplemented
        return self.c == other.c and self.terms == other.terms

    def __hash__(self):
        return hash((self.c, frozenset(self.terms.items())))

    # -- queries -------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (word_grade(t[0]), t[0]))

    def grades(self) -> set:
        return {word_grade(w) for w in self.terms}

    def coefficient(self, word) -> KappaRational:
        return self.terms.get(tuple(word), ZERO)

    def is_negative_part(self) -> bool:
        return all(all(a < 0 for a in w) for w in self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        ordered = sorted(self.terms.items(), key=lambda t: (word_grade(t[0]), tuple(-a for a in t[0])))
        for i, (w, cf) in enumerate(ordered):
            sign, mag = _coeff_prefix(cf, i == 0)
            body = _word_str(w)
            if mag == "1":
                parts.append(f"{sign}{body}")
            elif not w:
                parts.append(f"{sign}{mag}")
            else:
                parts.append(f"{sign}{mag}*{body}")
        return "".join(parts)

    def __repr__(self):
        return f"UEAElement({str(self)!r})"

    def to_json(self) -> list:
        return [{"monomial": list(w), "coeff": v.to_json()} for w, v in self.sorted_terms()]

    @classmethod
    def from_json(cls, obj: list, c) -> "UEAElement":
        terms = {}
        for t in obj:
            w = tuple(t["monomial"])
            if not is_ordered(w):
                raise ValueError(f"monomial {w} is not in PBW order")
            terms[w] = terms.get(w, ZERO) + KappaRational.from_json(t["coeff"])
        return cls(terms, c)


def generator(n: int, c) -> UEAElement:
    return UEAElement({(n,): ONE}, c)


# -- normal ordering ------------------------------------------------------------

_LEFT_CACHES: dict = {}


def _left_mul(a: int, mono: tuple, c: KappaRational, cache: dict) -> dict:
    """Normal-ordered expansion of L_a times an ordered monomial."""
    key = (a, mono)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if not mono or _key(a) <= _key(mono[0]):
        res = {(a,) + mono: ONE}
    else:
        g, rest = mono[0], mono[1:]
        res = {}
        for w, cf in _left_mul(a, rest, c, cache).items():
            for w2, cf2 in _left_mul(g, w, c, cache).items():
                _acc(res, w2, cf * cf2)
        if a != g:
            f = as_krat(a - g)
            for w, cf in _left_mul(a + g, rest, c, cache).items():
                _acc(res, w, f * cf)
        if a + g == 0 and a * a != 1:
            _acc(res, rest, c * Fraction(a ** 3 - a, 12))
        res = {w: v for w, v in res.items() if v}
    cache[key] = res
    return res


def _acc(d: dict, k, v):
    nv = d.get(k)
    d[k] = v if nv is None else nv + v


def _cache_for(c) -> dict:
    return _LEFT_CACHES.setdefault(c, {})


def _left_mul_elem(a: int, terms: dict, c, cache) -> dict:
    out = {}
    for w, cf in terms.items():
        for w2, cf2 in _left_mul(a, w, c, cache).items():
            _acc(out, w2, cf * cf2)
    return {w: v for w, v in out.items() if v}


def normal_order(word, c) -> UEAElement:
    """Rewrite the product ``L_{word[0]} L_{word[1]} ...`` in PBW order."""
    c = as_krat(c)
    cache = _cache_for(c)
    terms = {(): ONE}
    for a in reversed(tuple(word)):
        terms = _left_mul_elem(int(a), terms, c, cache)
    return UEAElement(terms, c)


def uea_mul(a: UEAElement, b: UEAElement) -> UEAElement:
    a._check(b)
    cache = _cache_for(a.c)
    out = {}
    for wa, ca in a.terms.items():
        terms = dict(b.terms)
        for g in reversed(wa):
            terms = _left_mul_elem(g, terms, a.c, cache)
        for w, v in terms.items():
            _acc(out, w, ca * v)
    return UEAElement(out, a.c)


def dagger(a: UEAElement) -> UEAElement:
    """Anti-involution sending L_n to L_{-n} and reversing products."""
    out = UEAElement({}, a.c)
    for w, v in a.terms.items():
        out = out + normal_order([-g for g in reversed(w)], a.c).scale(v)
    return out


# -- Verma modules --------------------------------------------------------------

@dataclass
class VermaVector:
    """Vector of the Verma module with highest weight ``h``.

    ``coeffs`` maps lowering words (negative PBW monomials) to coefficients.
    A vector may mix grades; ``grade`` is defined only when it does not.
    """

    h: KappaRational
    c: KappaRational
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.h = as_krat(self.h)
        self.c = as_krat(self.c)
        self.coeffs = {w: v for w, v in self.coeffs.items() if v}

    @classmethod
    def highest(cls, h, c) -> "VermaVector":
        return cls(h, c, {(): ONE})

    @property
    def grade(self) -> int:
        gs = {word_grade(w) for w in self.coeffs}
        if len(gs) > 1:
            raise ValueError("vector is not homogeneous")
        return gs.pop() if gs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for w, v in other.coeffs.items():
            _acc(out, w, v)
        return VermaVector(self.h, self.c, out)

    def scale(self, s):
        s = as_krat(s)
        return VermaVector(self.h, self.c, {w: v * s for w, v in self.coeffs.items()})

    def __eq__(self, other):
        return (isinstance(other, VermaVector) and self.h == other.h and self.c == other.c
                and self.coeffs == other.coeffs)

    def to_json(self) -> dict:
        return {"h": self.h.to_json(),
                "terms": [{"monomial": list(w), "coeff": v.to_json()}
                          for w, v in sorted(self.coeffs.items(), key=lambda t: (word_grade(t[0]), t[0]))]}


_VERMA_CACHES: dict = {}


def _gen_act(n: int, w: tuple, h, c, cache) -> dict:
    """L_n applied to the vector ``w . v_h`` (w a lowering word)."""
    key = (n, w)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if n == 0:
        res = {w: h + word_grade(w)}
    elif n < 0:
        if not w or n <= w[0]:
            res = {(n,) + w: ONE}
        else:
            g, rest = w[0], w[1:]
            res = {}
            for w1, c1 in _gen_act(n, rest, h, c, cache).items():
                for w2, c2 in _gen_act(g, w1, h, c, cache).items():
                    _acc(res, w2, c1 * c2)
            f = as_krat(n - g)
            for w1, c1 in _gen_act(n + g, rest, h, c, cache).items():
                _acc(res, w1, f * c1)
    else:
        if not w:
            res = {}
        else:
            g, rest = w[0], w[1:]
            res = {}
            for w1, c1 in _gen_act(n, rest, h, c, cache).items():
                for w2, c2 in _gen_act(g, w1, h, c, cache).items():
                    _acc(res, w2, c1 * c2)
            f = as_krat(n - g)
            for w1, c1 in _gen_act(n + g, rest, h, c, cache).items():
                _acc(res, w1, f * c1)
            if n + g == 0 and n != 1:
                _acc(res, rest, c * Fraction(n ** 3 - n, 12))
    res = {k: v for k, v in res.items() if v}
    cache[key] = res
    return res


def _apply_word(word, coeffs: dict, h, c) -> dict:
    cache = _VERMA_CACHES.setdefault((h, c), {})
    vec = coeffs
    for g in reversed(word):
        out = {}
        for w, cf in vec.items():
            for w2, c2 in _gen_act(g, w, h, c, cache).items():
                _acc(out, w2, cf * c2)
        vec = {k: v for k, v in out.items() if v}
        if not vec:
            break
    return vec


def verma_act(u: UEAElement, v: VermaVector) -> VermaVector:
    """Action of an enveloping-algebra element on a Verma module vector."""
    if u.c != v.c:
        raise ValueError("central charges differ")
    out = {}
    for word, cf in u.terms.items():
        for w, x in _apply_word(word, v.coeffs, v.h, v.c).items():
            _acc(out, w, cf * x)
    return VermaVector(v.h, v.c, out)


# -- partitions and characters --------------------------------------------------

@lru_cache(maxsize=None)
def partition_p(m: int) -> int:
    """Number of integer partitions of m (zero for negative m)."""
    if m < 0:
        return 0
    table = [1] + [0] * m
    for part in range(1, m + 1):
        for i in range(part, m + 1):
            table[i] += table[i - part]
    return table[m]


def partitions(m: int, largest: int | None = None):
    """Partitions of m as non-increasing tuples, in reverse lexicographic order."""
    if largest is None:
        largest = m
    if m == 0:
        yield ()
        return
    for first in range(min(m, largest), 0, -1):
        for rest in partitions(m - first, first):
            yield (first,) + rest


def verma_basis(m: int) -> list:
    """Lowering words spanning grade m of a Verma module."""
    return [tuple(-n for n in part) for part in partitions(m)]


def character_quotient(r: int, s: int, n: int) -> list:
    """Coefficients p(m) - p(m - rs) for m = 0..n."""
    if r < 1 or s < 1 or n < 0:
        raise ValueError("need r, s >= 1 and n >= 0")
    return [partition_p(m) - partition_p(m - r * s) for m in range(n + 1)]


# -- singular vectors ---------------------------------------------------------------

def singular_vector(kappa, r: int, s: int, grade_cap: int = DEFAULT_GRADE_CAP) -> UEAElement:
    """Singular vector of grade rs at weight h_{r,s}, normalized on L_{-1}^{rs}."""
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    g = r * s
    if g > grade_cap:
        raise GradeCapError(f"grade {g} exceeds cap {grade_cap}")
    kappa = as_krat(kappa)
    c = central_charge(kappa)
    h = weight_hrs(kappa, r, s)
    basis = verma_basis(g)
    columns = []
    for w in basis:
        col = {}
        for n in (1, 2):
            for w2, v in _apply_word((n,), {w: ONE}, h, c).items():
                col[(n, w2)] = v
        columns.append(col)
    null = nullspace(columns, key_order=lambda k: (k[0], k[1]))
    if len(null) != 1:
        raise SingularVectorError(
            f"annihilation system at grade {g} has a {len(null)}-dimensional solution space")
    sol = null[0]
    lead = sol.get(basis.index((-1,) * g))
    if not lead:
        raise SingularVectorError("solution has no L_{-1}^%d component" % g)
    return UEAElement({basis[j]: v / lead for j, v in sol.items()}, c)


# -- chain / braid classification -----------------------------------------------

@dataclass
class VermaStructure:
    kind: str
    grades: list
    p: int | None = None
    q: int | None = None
    deeper: str | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "grades": list(self.grades)}
        if self.p is not None:
            out["p"] = self.p
            out["q"] = self.q
        if self.deeper is not None:
            out["deeper"] = self.deeper
        return out


def _kac_solutions(p: int, q: int, d: int, cutoff: int) -> list:
    """Grades r's' <= cutoff with r'p - s'q = +-d, r', s' >= 1."""
    grades = set()
    for rr in range(1, cutoff + 1):
        for sign in (1, -1):
            num = rr * p - sign * d
            if num % q == 0:
                ss = num // q
                if ss >= 1 and rr * ss <= cutoff:
                    grades.add(rr * ss)
    return sorted(grades)


def classify_verma(kappa, r: int, s: int, cutoff: int = 40) -> VermaStructure:
    """Chain/braid kind of the Verma module at weight h_{r,s}(k).

    For k = 4p/q the module has singular vectors exactly at grades r's'
    solving r'p - s'q = +-(rp - sq).  Chain modules list those grades up to
    ``cutoff``; braid modules report only the two lowest grades.
    """
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    kappa = as_krat(kappa)
    if not kappa.is_constant:
        return VermaStructure("single-singular", [r * s])
    k0 = kappa.constant()
    if k0 <= 0:
        raise ValueError("kappa must be positive")
    ratio = k0 / 4
    p, q = ratio.numerator, ratio.denominator
    d = r * p - s * q
    grades = _kac_solutions(p, q, d, max(cutoff, r * s))
    if not grades:
        return VermaStructure("irreducible", [], p, q)
    if r % q == 0 or s % p == 0:
        return VermaStructure("chain", grades, p, q)
    return VermaStructure("braid", grades[:2], p, q, deeper="not computed")
