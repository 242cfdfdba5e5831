"""Independent sympy implementation of the explicit operators, for cross-checks.

Only the one-passive-point and chordal settings are covered.  Everything
here is written from the displayed formulas, not from the package code.
"""

from __future__ import annotations

import sympy as sp

from virmart.kappa import KappaRational

k, x, y, y1, y2 = sp.symbols("k x y y1 y2")
u = sp.Symbol("u", positive=True)


def a(l):
    return sp.Symbol(f"a{l}")


def krat(v):
    num = sum(sp.Rational(str(c)) * k ** i for i, c in enumerate(v.num_coeffs()))
    den = sum(sp.Rational(str(c)) * k ** i for i, c in enumerate(v.den_coeffs()))
    return num / den


def expr(e):
    """Expression -> sympy, using its JSON form (point names are kept)."""
    names = {"x": x, "y": y, "y1": y1, "y2": y2}
    out = sp.Integer(0)
    for t in e.to_json():
        term = krat(KappaRational.from_json(t["coeff"]))
        for sym, pw in t["points"]:
            term *= names[sym] ** pw
        for l, pw in t["as"]:
            term *= a(l) ** pw
        for (p, q), ej in t["diffs"]:
            term *= (names[p] - names[q]) ** krat(KappaRational.from_json(ej))
        for (p, q), n in t["logs"]:
            term *= sp.log(names[p] - names[q]) ** n
        out += term
    return out


def a_levels(f):
    return sorted(int(s.name[1:]) for s in f.free_symbols if s.name.startswith("a") and s.name[1:].isdigit())


def _msum(total, parts):
    """Sum over ordered tuples (m_1..m_parts), each >= 2, adding to total."""
    if parts == 0:
        return sp.Integer(1) if total == 0 else sp.Integer(0)
    out = sp.Integer(0)
    for m in range(2, total - 2 * (parts - 1) + 1):
        out += a(m) * _msum(total - m, parts - 1)
    return out


def L(n, f, hx, hy, c, points=(x, y)):
    """Displayed L_n for n in -2..2; a-sums run over the a_l present in f."""
    levels = a_levels(f)
    out = sp.Integer(0)
    hs = {x: hx, y: hy}
    if n == 2:
        out += -sp.diff(f, a(2))
        for l in levels:
            if l >= 4:
                out += (l - 3) * a(l - 2) * sp.diff(f, a(l))
        return out
    if n == 1:
        for l in levels:
            if l >= 3:
                out += (l - 2) * a(l - 1) * sp.diff(f, a(l))
        return out + sum(sp.diff(f, p) for p in points)
    if n == 0:
        for l in levels:
            out += l * a(l) * sp.diff(f, a(l))
        return out + sum(p * sp.diff(f, p) + hs[p] * f for p in points)
    if n == -1:
        for l in levels:
            out += ((l + 2) * a(l + 1) + _msum(l + 1, 2)) * sp.diff(f, a(l))
        return out + sum((p ** 2 - 3 * a(2)) * sp.diff(f, p) + 2 * p * hs[p] * f for p in points)
    if n == -2:
        for l in levels:
            coef = (l + 4) * a(l + 2) - 4 * a(2) * a(l) + 3 * _msum(l + 2, 2) + _msum(l + 2, 3)
            out += coef * sp.diff(f, a(l))
        for p in points:
            out += (p ** 3 - 4 * p * a(2) - 5 * a(3)) * sp.diff(f, p)
            out += (3 * p ** 2 - 4 * a(2)) * hs[p] * f
        return out - c / 2 * a(2) * f
    raise ValueError(n)


def A(f, kap, rho):
    """The displayed one-passive-point generator."""
    out = kap / 2 * sp.diff(f, x, 2) + 2 / (y - x) * sp.diff(f, y)
    out -= rho * (rho + 4 - kap) / (2 * kap) / (y - x) ** 2 * f
    for l in a_levels(f):
        inner = sp.Integer(0)
        for m in range(0, l - 1):
            for r in range(0, (l - 2 - m) // 2 + 1):
                inner += x ** m * (-1) ** r * sp.factorial(m + r) / (sp.factorial(m) * sp.factorial(r)) \
                    * _msum(l - m - 2, r)
        out += 2 * inner * sp.diff(f, a(l))
    return out


def same(f, g) -> bool:
    d = sp.expand((f - g).subs(y, x - u))
    d = sp.expand(sp.powsimp(sp.expand_log(d, force=True), force=True))
    return sp.simplify(d) == 0


def agree_numerically(f, g, kappa=None, samples=3, digits=40) -> bool:
    """Compare at rational sample points with x > y (> y1 > y2) and small a_l."""
    syms = sorted((f - g).free_symbols, key=str)
    for i in range(samples):
        point = {x: sp.Rational(7 + i, 3), y: sp.Rational(1, 5 + i),
                 y1: sp.Rational(1, 2 + i), y2: -sp.Rational(3, 4 + i)}
        if kappa is not None:
            point[k] = kappa
        elif k in syms:
            point[k] = sp.Rational(13 + i, 5)
        for s in syms:
            if s.name.startswith("a") and s.name[1:].isdigit():
                point[s] = sp.Rational(int(s.name[1:]) + i, 11)
        d = sp.N((f - g).subs(point), digits)
        scale = sp.N(abs(f.subs(point)) + abs(g.subs(point)) + 1, digits)
        if abs(d) > scale * sp.Float(10) ** (-digits + 10):
            return False
    return True
