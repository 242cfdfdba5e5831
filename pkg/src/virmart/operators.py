"""Differential operators on :class:`~virmart.expr.Expression`.

The Virasoro generators L_n act on functions of the marked points and the
Taylor coefficients a_l of the Loewner map at infinity.  Modes with
|n| <= 2 are explicit first-order operators; higher modes are nested
commutators, evaluated by expanding ``ad^k`` into compositions so that no
truncation of the a-variables is ever needed.

The SLE generator A is obtained by conjugating the Ito generator of the
driving process with the partition function Z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .expr import Expression, VariableSet
from .kappa import ONE, ZERO, KappaRational, as_krat, central_charge, weight_hrho, weight_hrs
from .uea import GradeCapError

__all__ = [
    "VariantConfig",
    "LinearOperator",
    "FirstOrderOperator",
    "ComposedOperator",
    "CombinationOperator",
    "AdPowerOperator",
    "ConjugatedOperator",
    "GradeCapError",
    "build_ln",
    "nested_commutator_ln",
    "first_order_commutator",
    "build_generator",
    "build_ito_generator",
    "loewner_drift_coefficient",
    "apply",
    "op_commutator",
    "apply_word",
    "apply_uea",
]

DEFAULT_GRADE_CAP = 8


# -- configurations -------------------------------------------------------------------

@dataclass
class VariantConfig:
    """An SLE variant: kappa, marked points, partition function and weights."""

    kappa: KappaRational
    ctx: VariableSet
    Z: Expression
    weights: dict
    rhos: dict = field(default_factory=dict)
    grade_cap: int = DEFAULT_GRADE_CAP

    @property
    def c(self) -> KappaRational:
        return central_charge(self.kappa)

    @property
    def total_weight(self) -> KappaRational:
        return sum(self.weights.values(), ZERO)

    @property
    def h_Z(self) -> KappaRational:
        """L_0 eigenvalue of the partition function."""
        return self.Z.degree() + self.total_weight

    @classmethod
    def chordal(cls, kappa, a_cutoff: int = 12, grade_cap: int = DEFAULT_GRADE_CAP):
        kappa = as_krat(kappa)
        ctx = VariableSet((), a_cutoff)
        return cls(kappa, ctx, ctx.one, {"x": weight_hrs(kappa, 1, 2)}, {}, grade_cap)

    @classmethod
    def with_rhos(cls, kappa, rhos, names=None, a_cutoff: int = 12,
                  grade_cap: int = DEFAULT_GRADE_CAP):
        """Variant with passive points carrying the given rho values.

        Z = prod (x - y_j)^(rho_j/k) * prod_{i<j} (y_i - y_j)^(rho_i rho_j / (2k)).
        """
        kappa = as_krat(kappa)
        rhos = [as_krat(r) for r in rhos]
        if names is None:
            names = ("y",) if len(rhos) == 1 else tuple(f"y{i + 1}" for i in range(len(rhos)))
        ctx = VariableSet(tuple(names), a_cutoff)
        Z = ctx.one
        for name, rho in zip(names, rhos):
            Z = Z * ctx.diff_power("x", name, rho / kappa)
        for i in range(len(rhos)):
            for j in range(i + 1, len(rhos)):
                Z = Z * ctx.diff_power(names[i], names[j], rhos[i] * rhos[j] / (2 * kappa))
        weights = {"x": weight_hrs(kappa, 1, 2)}
        for name, rho in zip(names, rhos):
            weights[name] = weight_hrho(kappa, rho)
        return cls(kappa, ctx, Z, weights, dict(zip(names, rhos)), grade_cap)

    @classmethod
    def with_partition_function(cls, kappa, ctx: VariableSet, Z: Expression,
                                grade_cap: int = DEFAULT_GRADE_CAP):
        """Variant given an explicit single-term Z.

        The weight of each passive point is h(rho_j) with rho_j read off as
        k times the exponent of (x - y_j) in Z.
        """
        kappa = as_krat(kappa)
        if len(Z.terms) != 1:
            raise ValueError("partition function must be a single term")
        (exps, j, am, logs), _ = next(iter(Z.terms.items()))
        if j or am or any(logs):
            raise ValueError("partition function must be a product of difference powers")
        weights = {ctx.active: weight_hrs(kappa, 1, 2)}
        rhos = {}
        for name in ctx.passive:
            i, _sign = ctx.pair_index(ctx.active, name)
            rho = kappa * exps[i]
            rhos[name] = rho
            weights[name] = weight_hrho(kappa, rho)
        return cls(kappa, ctx, Z, weights, rhos, grade_cap)


# -- operator classes -------------------------------------------------------------------

class LinearOperator:
    """Linear map on expressions with a fixed effect on degree."""

    shift: KappaRational = ZERO

    def apply(self, phi: Expression) -> Expression:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, phi: Expression) -> Expression:
        return self.apply(phi)

    def dump(self) -> list:
        raise NotImplementedError(f"{type(self).__name__} has no explicit coefficient form")


class FirstOrderOperator(LinearOperator):
    """sum_p C_p d_p + sum_l C_l d_{a_l} + sum_p S_p d_p^2 + M.

    ``a_coeff`` is a function l -> Expression (or None for zero) so the
    sum over all a_l is evaluated only on the a_l actually present.
    """

    def __init__(self, ctx, shift=0, points=None, a_coeff=None, second=None, mult=None, name=""):
        self.ctx = ctx
        self.shift = as_krat(shift)
        self.points = {p: e for p, e in (points or {}).items() if e}
        self.second = {p: e for p, e in (second or {}).items() if e}
        self._a_coeff = a_coeff
        self._a_cache: dict = {}
        self.mult = mult if mult else None
        self.name = name

    def a_coeff(self, l: int):
        if self._a_coeff is None:
            return None
        hit = self._a_cache.get(l)
        if hit is None:
            hit = self._a_coeff(l)
            self._a_cache[l] = hit
        return hit

    def apply(self, phi: Expression) -> Expression:
        out = phi.ctx.zero
        for p, coef in self.second.items():
            out = out + coef * phi.diff(p).diff(p)
        for p, coef in self.points.items():
            out = out + coef * phi.diff(p)
        if self._a_coeff is not None:
            for l in sorted(phi.a_indices()):
                coef = self.a_coeff(l)
                if coef:
                    out = out + coef * phi.diff(("a", l))
        if self.mult is not None:
            out = out + self.mult * phi
        return out

    def derive(self, f: Expression) -> Expression:
        """The first-order (derivation) part applied to a coefficient function."""
        if self.second:
            raise ValueError("second-order part present")
        out = f.ctx.zero
        if not f:
            return out
        for p, coef in self.points.items():
            out = out + coef * f.diff(p)
        if self._a_coeff is not None:
            for l in sorted(f.a_indices()):
                coef = self.a_coeff(l)
                if coef:
                    out = out + coef * f.diff(("a", l))
        return out

    def dump(self) -> list:
        """Coefficient form; the a-part is listed up to the a-cutoff."""
        rows = []
        for p, coef in sorted(self.second.items()):
            rows.append({"derivative": [[p, 2]], "coeff": coef.to_json()})
        for p, coef in sorted(self.points.items()):
            rows.append({"derivative": [[p, 1]], "coeff": coef.to_json()})
        if self._a_coeff is not None:
            for l in range(2, self.ctx.a_cutoff + 1):
                try:
                    coef = self.a_coeff(l)
                except ValueError:
                    break
                if coef:
                    rows.append({"derivative": [[f"a{l}", 1]], "coeff": coef.to_json()})
        if self.mult is not None:
            rows.append({"derivative": [], "coeff": self.mult.to_json()})
        return rows


class EulerL0(LinearOperator):
    """L_0 = sum l a_l d_{a_l} + sum_p p d_p + sum_p h_p, via homogeneity.

    On a term the operator multiplies by (degree + total weight) and, for each
    log factor, adds the term with that log power lowered by one.
    """

    def __init__(self, cfg: VariantConfig):
        self.cfg = cfg
        self.shift = ZERO
        self.H = cfg.total_weight

    def apply(self, phi):
        out: dict = {}
        H = self.H
        for key, c in phi.terms.items():
            exps, j, am, logs = key
            v = c * (Expression.key_degree(key) + H)
            _acc(out, key, v)
            for i, k in enumerate(logs):
                if k:
                    _acc(out, (exps, j, am, logs[:i] + (k - 1,) + logs[i + 1:]), c * k)
        return Expression(phi.ctx, out)


def _acc(d, k, v):
    if not v:
        return
    nv = d.get(k)
    if nv is None:
        d[k] = v
    else:
        nv = nv + v
        if nv:
            d[k] = nv
        else:
            del d[k]


class ComposedOperator(LinearOperator):
    """Composition ops[0] o ops[1] o ... (rightmost applied first)."""

    def __init__(self, *ops):
        self.ops = ops
        self.shift = sum((o.shift for o in ops), ZERO)

    def apply(self, phi):
        for op in reversed(self.ops):
            phi = op.apply(phi)
        return phi


class CombinationOperator(LinearOperator):
    """Linear combination sum_i s_i op_i (optionally plus a scalar)."""

    def __init__(self, parts, scalar=ZERO):
        self.parts = [(as_krat(s), op) for s, op in parts]
        self.scalar = as_krat(scalar)
        self.shift = self.parts[0][1].shift if self.parts else ZERO

    def apply(self, phi):
        out = phi.scale(self.scalar)
        for s, op in self.parts:
            out = out + op.apply(phi).scale(s)
        return out


class AdPowerOperator(LinearOperator):
    """scale * ad_A^k(B) evaluated as sum_i C(k,i) (-1)^i A^(k-i) B A^i."""

    def __init__(self, A, B, k: int, scale=ONE):
        self.A, self.B, self.k = A, B, k
        self.scale = as_krat(scale)
        self.shift = B.shift + k * A.shift

    def apply(self, phi):
        out = phi.ctx.zero
        cur = phi
        for i in range(self.k + 1):
            term = self.B.apply(cur)
            for _ in range(self.k - i):
                term = self.A.apply(term)
            coef = comb(self.k, i) * (-1) ** i
            out = out + term.scale(coef)
            if i < self.k:
                cur = self.A.apply(cur)
        return out.scale(self.scale)


class ConjugatedOperator(LinearOperator):
    """Z o G o Z^{-1} for a single invertible term Z."""

    def __init__(self, Z: Expression, G: LinearOperator):
        self.Z = Z
        self.Zinv = Z.inverse()
        self.G = G
        self.shift = G.shift

    def apply(self, phi):
        return self.Z * self.G.apply(self.Zinv * phi)


def first_order_commutator(p: FirstOrderOperator, q: FirstOrderOperator, scale=ONE,
                           name: str = "") -> FirstOrderOperator:
    """s [p, q] as explicit coefficients; both operators must be first order.

    For D = V + M with V a derivation, [D1, D2] = (V1 V2 - V2 V1) + V1(M2) - V2(M1),
    and the bracket of derivations has coefficients V1(C2) - V2(C1).
    """
    ctx = p.ctx
    s = as_krat(scale)
    zero = ctx.zero

    def bracket(c1, c2):
        return (p.derive(c2 or zero) - q.derive(c1 or zero)).scale(s)

    points = {v: bracket(p.points.get(v), q.points.get(v)) for v in set(p.points) | set(q.points)}

    def a_coeff(l):
        c = bracket(p.a_coeff(l), q.a_coeff(l))
        return c if c else None

    mult = bracket(p.mult, q.mult)
    return FirstOrderOperator(ctx, p.shift + q.shift, points=points, a_coeff=a_coeff,
                              mult=mult, name=name)


def apply(op: LinearOperator, phi: Expression) -> Expression:
    return op.apply(phi)


def op_commutator(p: LinearOperator, q: LinearOperator) -> LinearOperator:
    """[p, q] = p o q - q o p."""
    return CombinationOperator([(ONE, ComposedOperator(p, q)), (-ONE, ComposedOperator(q, p))])


# -- the Virasoro realization ------------------------------------------------------------

def _a_sum(ctx, total: int, parts: int) -> Expression:
    """Sum over ordered (m_1..m_parts), m_i >= 2, sum = total of a_{m_1}...a_{m_parts}."""
    if parts == 0:
        return ctx.one if total == 0 else ctx.zero
    out = ctx.zero
    for m in range(2, total - 2 * (parts - 1) + 1):
        rest = _a_sum(ctx, total - m, parts - 1)
        if rest:
            out = out + ctx.a(m) * rest
    return out


_LN_CACHE: dict = {}


def build_ln(n: int, cfg: VariantConfig) -> LinearOperator:
    """The operator L_n on functions for the variant ``cfg``."""
    if abs(n) > cfg.grade_cap:
        raise GradeCapError(f"|n| = {abs(n)} exceeds the grade cap {cfg.grade_cap}")
    key = (id(cfg), n)
    hit = _LN_CACHE.get(key)
    if hit is not None and hit[0] is cfg:
        return hit[1]
    op = _build_ln(n, cfg)
    _LN_CACHE[key] = (cfg, op)
    return op


def _build_ln(n: int, cfg: VariantConfig) -> LinearOperator:
    ctx = cfg.ctx
    pts = ctx.points
    pexpr = {p: ctx.point(p) for p in pts}
    h = cfg.weights
    if n == 2:
        def a2(l):
            if l == 2:
                return ctx.const(-1)
            if l >= 4:
                return ctx.a(l - 2).scale(l - 3)
            return None
        return FirstOrderOperator(ctx, -2, a_coeff=a2, name="L_2")
    if n == 1:
        def a1(l):
            return ctx.a(l - 1).scale(l - 2) if l >= 3 else None
        return FirstOrderOperator(ctx, -1, points={p: ctx.one for p in pts}, a_coeff=a1, name="L_1")
    if n == 0:
        return EulerL0(cfg)
    if n == -1:
        def am1(l):
            return ctx.a(l + 1).scale(l + 2) + _a_sum(ctx, l + 1, 2)
        mult = ctx.zero
        for p in pts:
            mult = mult + pexpr[p].scale(2 * h[p])
        points = {p: pexpr[p] * pexpr[p] - ctx.a(2).scale(3) for p in pts}
        return FirstOrderOperator(ctx, 1, points=points, a_coeff=am1, mult=mult, name="L_-1")
    if n == -2:
        def am2(l):
            return (ctx.a(l + 2).scale(l + 4) - (ctx.a(2) * ctx.a(l)).scale(4)
                    + _a_sum(ctx, l + 2, 2).scale(3) + _a_sum(ctx, l + 2, 3))
        mult = ctx.a(2).scale(-cfg.c / 2)
        points = {}
        for p in pts:
            x = pexpr[p]
            points[p] = x * x * x - (x * ctx.a(2)).scale(4) - ctx.a(3).scale(5)
            mult = mult + (x * x).scale(3 * h[p]) - ctx.a(2).scale(4 * h[p])
        return FirstOrderOperator(ctx, 2, points=points, a_coeff=am2, mult=mult, name="L_-2")
    # nested commutators, one level at a time:
    # L_n = -[L_1, L_{n-1}]/(n-2) and L_{-n} = [L_{-1}, L_{-(n-1)}]/(n-2)
    k = abs(n) - 2
    if n > 2:
        return first_order_commutator(build_ln(1, cfg), build_ln(n - 1, cfg),
                                      Fraction(-1, k), name=f"L_{n}")
    return first_order_commutator(build_ln(-1, cfg), build_ln(n + 1, cfg),
                                  Fraction(1, k), name=f"L_{n}")


def nested_commutator_ln(n: int, cfg: VariantConfig) -> LinearOperator:
    """L_n for |n| > 2 as the expanded ad-power (-1)^k/k! ad_{L_1}^k L_2 (resp.
    1/k! ad_{L_-1}^k L_-2), applied by composition.  Slower; kept as a
    second route for cross-checks."""
    k = abs(n) - 2
    if k < 1:
        raise ValueError("only |n| > 2")
    if n > 0:
        return AdPowerOperator(build_ln(1, cfg), build_ln(2, cfg), k,
                               Fraction((-1) ** k, factorial(k)))
    return AdPowerOperator(build_ln(-1, cfg), build_ln(-2, cfg), k, Fraction(1, factorial(k)))


def apply_word(word, phi: Expression, cfg: VariantConfig) -> Expression:
    """Apply L_{word[0]} L_{word[1]} ... to phi (rightmost first)."""
    for n in reversed(tuple(word)):
        phi = build_ln(n, cfg).apply(phi)
    return phi


def apply_uea(u, phi: Expression, cfg: VariantConfig) -> Expression:
    """Action of an enveloping-algebra element through the realization.

    Words sharing a right factor reuse the partial results.
    """
    cache = {(): phi}

    def act(word):
        hit = cache.get(word)
        if hit is None:
            hit = build_ln(word[0], cfg).apply(act(word[1:]))
            cache[word] = hit
        return hit

    out = phi.ctx.zero
    for word, coef in u.terms.items():
        out = out + act(tuple(word)).scale(coef)
    return out


# -- SLE generators ------------------------------------------------------------------------

def loewner_drift_coefficient(ctx: VariableSet, active: str, l: int) -> Expression:
    """Coefficient of d/d a_l in the drift of the Taylor coefficients.

    2 sum_{m, r} act^m (-1)^r (m+r)!/(m! r!) sum_{k_1..k_r >= 2, sum = l-m-2} a_k1...a_kr
    """
    act = ctx.point(active)
    out = ctx.zero
    power = ctx.one
    for m in range(0, l - 1):
        rest = l - m - 2
        inner = ctx.zero
        for r in range(0, rest // 2 + 1):
            s = _a_sum(ctx, rest, r)
            if s:
                inner = inner + s.scale((-1) ** r * comb(m + r, r))
        if inner:
            out = out + power * inner
        power = power * act
    return out.scale(2)


def build_ito_generator(cfg: VariantConfig, active: str | None = None, kappa_active=None,
                        Z: Expression | None = None) -> FirstOrderOperator:
    """(k/2) d_act^2 + k (d_act log Z) d_act + sum_p 2/(p - act) d_p + a-drift."""
    ctx = cfg.ctx
    active = active or ctx.active
    kap = as_krat(kappa_active) if kappa_active is not None else cfg.kappa
    if kap.is_constant and kap.constant() <= 0:
        raise ValueError("kappa of the active point must be positive")
    Z = cfg.Z if Z is None else Z
    logder = Z.diff(active) * Z.inverse()
    points = {active: logder.scale(kap)}
    for p in ctx.points:
        if p != active:
            points[p] = ctx.diff_power(p, active, -1).scale(2)
    return FirstOrderOperator(
        ctx, -2, points=points, second={active: ctx.const(kap / 2)},
        a_coeff=lambda l: loewner_drift_coefficient(ctx, active, l), name=f"G[{active}]")


def build_generator(cfg: VariantConfig, active: str | None = None, kappa_active=None,
                    Z: Expression | None = None) -> LinearOperator:
    """A = Z o G o Z^{-1}; the local martingales are the kernel of A."""
    Z = cfg.Z if Z is None else Z
    G = build_ito_generator(cfg, active, kappa_active, Z)
    return ConjugatedOperator(Z, G)
