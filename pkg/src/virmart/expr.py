"""Exact functions of marked points and Taylor coefficients.

An :class:`Expression` is a finite sum of terms

    coeff * prod(diff_i ** e_i) * free ** j * prod(a_l ** n_l) * prod(log(diff_i) ** k_i)

written in fixed coordinates so that equal functions have equal storage:

* no passive point: no differences, the free point is ``x``;
* one passive point ``y``: the difference ``u = x - y`` and the free point ``y``;
* two passive points: ``u1 = x - y1``, ``u2 = x - y2``, ``w = y1 - y2`` and the
  free point ``y2``.  Since ``u2 = u1 + w`` these are not independent, so
  every term is rewritten into the partial-fraction basis

      u1^(r1 + a) u2^(r2) w^e    or    u1^(r1) u2^(r2 - b) w^e   (b >= 1)

  where ``r1``, ``r2`` are fixed representatives of the exponents mod Z.

Exponents live in Q(k); logs of the differences are independent symbols.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .kappa import ONE, ZERO, KappaRational, as_krat

__all__ = ["VariableSet", "Expression", "ACutoffError"]


class ACutoffError(ValueError):
    """An operation would create a Taylor coefficient a_l beyond the cutoff."""


_SHIFT_CACHE: dict = {}


def exponent_shift(e: KappaRational) -> int:
    """Integer n such that e - n is the class representative of e mod Z."""
    n = _SHIFT_CACHE.get(e)
    if n is None:
        n = math.ceil(e.poly_part_constant())
        _SHIFT_CACHE[e] = n
    return n


def _acc(d, k, v):
    nv = d.get(k)
    if nv is None:
        if v:
            d[k] = v
    else:
        nv = nv + v
        if nv:
            d[k] = nv
        else:
            del d[k]


def _amono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for l, e in b:
        d[l] = d.get(l, 0) + e
    return tuple(sorted(d.items()))


class VariableSet:
    """Point symbols and the Taylor-coefficient cutoff of a computation."""

    def __init__(self, passive=("y",), a_cutoff: int = 12, active: str = "x"):
        passive = tuple(passive)
        if len(passive) > 2:
            raise ValueError("at most two passive points are supported")
        names = (active,) + passive
        if len(set(names)) != len(names):
            raise ValueError("point symbols must be distinct")
        if a_cutoff < 2:
            raise ValueError("a-cutoff must be at least 2")
        self.active = active
        self.passive = passive
        self.points = names
        self.a_cutoff = a_cutoff
        k = len(passive)
        self.ncoords = (0, 1, 3)[k]
        if k == 0:
            self.pairs = ()
            self.free = active
            self._dcoord = {active: ()}
        elif k == 1:
            y = passive[0]
            self.pairs = ((active, y),)
            self.free = y
            self._dcoord = {active: (1,), y: (-1,)}
        else:
            y1, y2 = passive
            self.pairs = ((active, y1), (active, y2), (y1, y2))
            self.free = y2
            self._dcoord = {active: (1, 1, 0), y1: (-1, 0, 1), y2: (0, -1, -1)}
        self._expand_cache: dict = {}
        self._zero_exps = (ZERO,) * self.ncoords
        self._zero_logs = (0,) * self.ncoords

    def __eq__(self, other):
        return (isinstance(other, VariableSet) and self.points == other.points
                and self.a_cutoff == other.a_cutoff)

    def __hash__(self):
        return hash((self.points, self.a_cutoff))

    def __repr__(self):
        return f"VariableSet(points={self.points}, a_cutoff={self.a_cutoff})"

    # -- canonical coordinates --------------------------------------------------
    def canon_exps(self, exps) -> list:
        """Rewrite a product of difference powers into basis form."""
        if self.ncoords != 3:
            return [(ONE, exps)]
        hit = self._expand_cache.get(exps)
        if hit is not None:
            return hit
        e1, e2, e3 = exps
        a = exponent_shift(e1)
        b = exponent_shift(e2)
        if b == 0 or (a == 0 and b < 0):
            res = [(ONE, exps)]
        else:
            out: dict = {}
            if b > 0:
                # u2 = u1 + w
                parts = [(ONE, (e1 + 1, e2 - 1, e3)), (ONE, (e1, e2 - 1, e3 + 1))]
            elif a > 0:
                # u1 = u2 - w
                parts = [(ONE, (e1 - 1, e2 + 1, e3)), (-ONE, (e1 - 1, e2, e3 + 1))]
            else:
                # 1/(u1 u2) = (1/u1 - 1/u2)/w
                parts = [(ONE, (e1, e2 + 1, e3 - 1)), (-ONE, (e1 + 1, e2, e3 - 1))]
            for c, ex in parts:
                for c2, ex2 in self.canon_exps(ex):
                    _acc(out, ex2, c * c2)
            res = list(out.items())
            res = [(v, k) for k, v in res]
        self._expand_cache[exps] = res
        return res

    # -- constructors -------------------------------------------------------------
    def _key(self, exps=None, j=0, amono=(), logs=None):
        return (exps if exps is not None else self._zero_exps, j, amono,
                logs if logs is not None else self._zero_logs)

    def const(self, c) -> "Expression":
        return Expression(self, {self._key(): as_krat(c)} if as_krat(c) else {})

    @property
    def one(self) -> "Expression":
        return self.const(1)

    @property
    def zero(self) -> "Expression":
        return Expression(self, {})

    def pair_index(self, p: str, q: str):
        """Index of the ordered difference p - q and the orientation sign."""
        for i, pr in enumerate(self.pairs):
            if pr == (p, q):
                return i, 1
            if pr == (q, p):
                return i, -1
        raise KeyError(f"no difference between {p!r} and {q!r} in {self}")

    def diff_power(self, p: str, q: str, exponent=1) -> "Expression":
        """(p - q)^exponent; reversed pairs are allowed only for integer powers."""
        e = as_krat(exponent)
        i, sign = self.pair_index(p, q)
        coeff = ONE
        if sign < 0:
            if not e.is_integer():
                raise ValueError("non-integer power of a reversed difference")
            if e.constant() % 2:
                coeff = -ONE
        exps = list(self._zero_exps)
        exps[i] = e
        out = {}
        for c, ex in self.canon_exps(tuple(exps)):
            _acc(out, self._key(ex), coeff * c)
        return Expression(self, out)

    def log(self, p: str, q: str) -> "Expression":
        i, sign = self.pair_index(p, q)
        if sign < 0:
            raise ValueError("log is only defined for the ordered difference")
        logs = list(self._zero_logs)
        logs[i] = 1
        return Expression(self, {self._key(logs=tuple(logs)): ONE})

    def point(self, name: str) -> "Expression":
        """A point symbol written in canonical coordinates."""
        if name == self.free:
            return Expression(self, {self._key(j=1): ONE})
        if name not in self.points:
            raise KeyError(name)
        if len(self.passive) == 1:
            return self.diff_power(self.active, self.free) + self.point(self.free)
        y1, y2 = self.passive
        if name == y1:
            return self.diff_power(y1, y2) + self.point(y2)
        return self.diff_power(self.active, y2) + self.point(y2)

    def a(self, l: int) -> "Expression":
        if l < 2:
            raise ValueError("Taylor coefficients start at a_2")
        if l > self.a_cutoff:
            raise ACutoffError(f"a_{l} exceeds cutoff {self.a_cutoff}")
        return Expression(self, {self._key(amono=((l, 1),)): ONE})

    def term(self, coeff, exps=None, j=0, amono=(), logs=None) -> "Expression":
        """A single canonicalized term from raw coordinate data."""
        exps = tuple(as_krat(e) for e in exps) if exps is not None else self._zero_exps
        logs = tuple(logs) if logs is not None else self._zero_logs
        out = {}
        for c, ex in self.canon_exps(exps):
            _acc(out, (ex, j, tuple(sorted(amono)), logs), c * as_krat(coeff))
        return Expression(self, out)


class Expression:
    """Canonical sum of terms over a :class:`VariableSet`; treat as immutable."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: VariableSet, terms: dict):
        self.ctx = ctx
        self.terms = terms

    # -- ring operations ------------------------------------------------------------
    def _check(self, other):
        if self.ctx is not other.ctx and self.ctx != other.ctx:
            raise ValueError("expressions live in different variable sets")

    def _coerce(self, other):
        if isinstance(other, Expression):
            self._check(other)
            return other
        return self.ctx.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other, self
        else:
            big, small = self, other
        out = dict(big.terms)
        for k, v in small.terms.items():
            _acc(out, k, v)
        return Expression(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return Expression(self.ctx, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, s) -> "Expression":
        s = as_krat(s)
        if not s:
            return Expression(self.ctx, {})
        if s == ONE:
            return self
        return Expression(self.ctx, {k: v * s for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Expression):
            return self.scale(other)
        self._check(other)
        ctx = self.ctx
        out: dict = {}
        three = ctx.ncoords == 3
        for (e1, j1, m1, l1), c1 in self.terms.items():
            for (e2, j2, m2, l2), c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2)) if e1 else e1
                logs = tuple(a + b for a, b in zip(l1, l2)) if l1 else l1
                am = _amono_mul(m1, m2)
                c = c1 * c2
                if three:
                    for cc, ex in ctx.canon_exps(exps):
                        _acc(out, (ex, j1 + j2, am, logs), c * cc)
                else:
                    _acc(out, (exps, j1 + j2, am, logs), c)
        return Expression(ctx, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Expression):
            return self * other.inverse()
        return self.scale(ONE / as_krat(other))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            if len(self.terms) == 1 and isinstance(n, int):
                return self.inverse() ** (-n)
            raise ValueError("only non-negative integer powers of sums")
        out = self.ctx.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> "Expression":
        """Reciprocal of a single invertible term (difference powers and constant)."""
        if len(self.terms) != 1:
            raise ValueError("only single terms are invertible")
        (exps, j, am, logs), c = next(iter(self.terms.items()))
        if j or am or any(logs):
            raise ValueError("term is not invertible in this function space")
        return self.ctx.term(ONE / c, tuple(-e for e in exps))

    # -- calculus -------------------------------------------------------------------
    def diff(self, var) -> "Expression":
        """Partial derivative by a point name or by ``("a", l)`` / ``"a<l>"``."""
        if isinstance(var, str) and var.startswith("a") and var[1:].isdigit():
            var = ("a", int(var[1:]))
        if isinstance(var, tuple):
            return self._diff_a(var[1])
        return self._diff_point(var)

    def _diff_a(self, l: int) -> "Expression":
        out: dict = {}
        for (exps, j, am, logs), c in self.terms.items():
            for idx, (ll, e) in enumerate(am):
                if ll == l:
                    nam = am[:idx] + (((l, e - 1),) if e > 1 else ()) + am[idx + 1:]
                    _acc(out, (exps, j, nam, logs), c * e)
                    break
        return Expression(self.ctx, out)

    def _diff_point(self, p: str) -> "Expression":
        ctx = self.ctx
        dco = ctx._dcoord.get(p)
        if dco is None:
            raise KeyError(f"unknown point {p!r}")
        is_free = p == ctx.free
        out: dict = {}
        three = ctx.ncoords == 3
        for (exps, j, am, logs), c in self.terms.items():
            if is_free and j:
                _acc(out, (exps, j - 1, am, logs), c * j)
            for i, s in enumerate(dco):
                if not s:
                    continue
                e = exps[i]
                k = logs[i]
                if not e and not k:
                    continue
                nex = exps[:i] + (e - 1,) + exps[i + 1:]
                if e:
                    cands = [(c * e * s, logs)]
                else:
                    cands = []
                if k:
                    cands.append((c * (k * s), logs[:i] + (k - 1,) + logs[i + 1:]))
                if three:
                    canon = ctx.canon_exps(nex)
                    for cc, nl in cands:
                        for c2, ex in canon:
                            _acc(out, (ex, j, am, nl), cc * c2)
                else:
                    for cc, nl in cands:
                        _acc(out, (nex, j, am, nl), cc)
        return Expression(ctx, out)

    # -- grading ------------------------------------------------------------------------
    @staticmethod
    def key_degree(key) -> KappaRational:
        exps, j, am, _ = key
        d = as_krat(j + sum(l * e for l, e in am))
        for e in exps:
            if e:
                d = d + e
        return d

    def degree_split(self) -> dict:
        out: dict = {}
        for k, v in self.terms.items():
            out.setdefault(self.key_degree(k), {})[k] = v
        return {d: Expression(self.ctx, t) for d, t in out.items()}

    def degrees(self) -> set:
        return {self.key_degree(k) for k in self.terms}

    def degree(self) -> KappaRational:
        ds = self.degrees()
        if len(ds) != 1:
            raise ValueError("expression is not homogeneous")
        return ds.pop()

    def max_log(self) -> int:
        return max((sum(k[3]) for k in self.terms), default=0)

    def max_a(self) -> int:
        return max((l for k in self.terms for l, _ in k[2]), default=0)

    def a_indices(self) -> set:
        return {l for k in self.terms for l, _ in k[2]}

    def log_layer(self, n: int) -> "Expression":
        """Terms carrying exactly n log factors in total."""
        return Expression(self.ctx, {k: v for k, v in self.terms.items() if sum(k[3]) == n})

    # -- specialization ---------------------------------------------------------------
    def specialize(self, k0) -> "Expression":
        """Substitute k = k0 everywhere and re-merge terms."""
        from .kappa import PoleError

        ctx = self.ctx
        out: dict = {}
        for key, c in self.terms.items():
            exps, j, am, logs = key
            try:
                nc = c.evaluate(k0)
                nex = tuple(e.evaluate(k0) for e in exps)
            except PoleError as err:
                raise PoleError(f"pole at k={k0} in term {self._term_str(key, c)}") from err
            for cc, ex in ctx.canon_exps(nex):
                _acc(out, (ex, j, am, logs), nc * cc)
        return Expression(ctx, out)

    # -- comparison / queries ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Expression):
            return self.ctx == other.ctx and self.terms == other.terms
        if isinstance(other, (int, Fraction, KappaRational)):
            return self == self.ctx.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def proportional_to(self, other: "Expression"):
        """Scalar s with self == s * other, or None."""
        if not other.terms:
            return ZERO if not self.terms else None
        k0, v0 = next(iter(other.terms.items()))
        s = self.terms.get(k0, ZERO) / v0
        return s if self == other.scale(s) else None

    def sort_key(self, key):
        exps, j, am, logs = key
        return (self.key_degree(key).sort_key(), tuple(e.sort_key() for e in exps), j, am, logs)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: self.sort_key(kv[0]))

    # -- printing ----------------------------------------------------------------------
    def _factor_strs(self, key):
        exps, j, am, logs = key
        ctx = self.ctx
        fs = []
        for (p, q), e in zip(ctx.pairs, exps):
            if e:
                es = str(e)
                fs.append(f"({p}-{q})" + ("" if e == ONE else f"^({es})" if not e.is_constant or "/" in es or es.startswith("-") else f"^{es}"))
        if j:
            fs.append(ctx.free + (f"^{j}" if j > 1 else ""))
        for l, e in am:
            fs.append(f"a{l}" + (f"^{e}" if e > 1 else ""))
        for (p, q), k in zip(ctx.pairs, logs):
            if k:
                fs.append(f"log({p}-{q})" + (f"^{k}" if k > 1 else ""))
        return fs

    def _term_str(self, key, c):
        fs = self._factor_strs(key)
        cs = str(c)
        if not c.is_constant:
            cs = f"({cs})"
        if not fs:
            return cs
        if c == ONE:
            return "*".join(fs)
        if c == -ONE:
            return "-" + "*".join(fs)
        return cs + "*" + "*".join(fs)

    def __str__(self):
        if not self.terms:
            return "0"
        out = ""
        for i, (k, c) in enumerate(self.sorted_terms()):
            s = self._term_str(k, c)
            if i == 0:
                out = s
            elif s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out

    def __repr__(self):
        return f"Expression({str(self)!r})"

    # -- serialization -----------------------------------------------------------------
    def to_json(self) -> list:
        ctx = self.ctx
        out = []
        for (exps, j, am, logs), c in self.sorted_terms():
            out.append({
                "coeff": c.to_json(),
                "points": [[ctx.free, j]] if j else [],
                "as": [[l, e] for l, e in am],
                "diffs": [[list(p), e.to_json()] for p, e in zip(ctx.pairs, exps) if e],
                "logs": [[list(p), k] for p, k in zip(ctx.pairs, logs) if k],
            })
        return out

    @classmethod
    def from_json(cls, ctx: VariableSet, obj: list) -> "Expression":
        """Rebuild an expression; point powers of any symbol are accepted."""
        total = ctx.zero
        for t in obj:
            term = ctx.const(KappaRational.from_json(t["coeff"]))
            for sym, pw in t.get("points", []):
                term = term * ctx.point(sym) ** int(pw)
            for l, e in t.get("as", []):
                term = term * ctx.a(int(l)) ** int(e)
            for pair, e in t.get("diffs", []):
                term = term * ctx.diff_power(pair[0], pair[1], KappaRational.from_json(e))
            for pair, k in t.get("logs", []):
                term = term * ctx.log(pair[0], pair[1]) ** int(k)
            total = total + term
        return total
