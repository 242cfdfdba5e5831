"""Graded kernels of SLE generators and the Virasoro structure they carry.

Everything here is exact linear algebra on finite graded pieces: kernels
of A inside a prefactor x polynomial x log ansatz, submodules generated by
the realized L_n, singular vectors, L_0 Jordan data, logarithmic partners
and couplings, and the contragredient pairing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .expr import Expression, VariableSet
from .kappa import ONE, ZERO, KappaRational, as_krat, weight_hrs
from .linalg import Echelon, nullspace
from .operators import VariantConfig, apply_uea, build_generator, build_ln
from .uea import UEAElement, dagger, partitions, word_grade

__all__ = [
    "AnsatzSpec",
    "ModuleSnapshot",
    "StaggeredReport",
    "KernelError",
    "NoSolutionError",
    "ansatz_basis",
    "graded_kernel",
    "generated_submodule",
    "find_singulars",
    "jordan_structure",
    "solve_log_partner",
    "log_coupling",
    "contragredient_action",
    "dual_functional",
    "pair",
    "staggered_grade0_action",
    "naive_fusion",
    "rho_solutions",
    "double_kernel",
    "commutator_multiplier",
    "staggered_report",
    "expr_key_order",
]


class KernelError(ValueError):
    """A vector expected in the kernel of a generator is not annihilated."""


class NoSolutionError(ValueError):
    """The logarithmic-partner system is inconsistent within the ansatz."""


_ORDER_CACHE: dict = {}


def expr_key_order(key):
    hit = _ORDER_CACHE.get(key)
    if hit is None:
        exps, j, am, logs = key
        hit = (tuple(e.sort_key() for e in exps), j, am, logs)
        _ORDER_CACHE[key] = hit
    return hit


def _vec(e: Expression) -> dict:
    return e.terms


# -- ansatz -------------------------------------------------------------------------------

@dataclass
class AnsatzSpec:
    """Prefactor class, Laurent offset, log cap and grade range of an ansatz.

    ``base`` holds one exponent per difference coordinate of the variable
    set (empty in the chordal case); grade m means total degree
    ``sum(base) + m``.
    """

    base: tuple = ()
    laurent: int = 0
    log_cap: int = 1
    max_grade: int = 8

    @classmethod
    def for_config(cls, cfg: VariantConfig, laurent: int = 0, log_cap: int = 1,
                   max_grade: int = 8, extra=None):
        (exps, _j, _am, _logs), _ = next(iter(cfg.Z.terms.items()))
        base = tuple(exps)
        if extra is not None:
            base = tuple(b + as_krat(e) for b, e in zip(base, extra))
        return cls(base, laurent, log_cap, max_grade)

    @property
    def base_degree(self) -> KappaRational:
        return sum(self.base, ZERO)


def _amonos(d: int):
    out = []
    for part in partitions(d):
        if part and min(part) < 2:
            continue
        counts: dict = {}
        for p in part:
            counts[p] = counts.get(p, 0) + 1
        out.append(tuple(sorted(counts.items())))
    return out


def _log_vectors(n: int, cap: int):
    for total in range(cap + 1):
        for combo in itertools.product(range(total + 1), repeat=n):
            if sum(combo) == total:
                yield combo


def ansatz_basis(ctx: VariableSet, spec: AnsatzSpec, m: int) -> list:
    """Canonical monomials spanning the grade-m piece of the ansatz."""
    if m > spec.max_grade:
        raise ValueError(f"grade {m} exceeds the ansatz range {spec.max_grade}")
    n = ctx.ncoords
    if len(spec.base) != n:
        raise ValueError("ansatz base does not match the variable set")
    M = spec.laurent
    keys = []
    if n == 0:
        for j in range(m + 1):
            for am in _amonos(m - j):
                keys.append(((), j, am, ()))
    else:
        logs_all = list(_log_vectors(n, spec.log_cap))
        span = m + n * M
        for shifts in itertools.product(range(-M, span + 1), repeat=n):
            rest = m - sum(shifts)
            if rest < 0:
                continue
            exps = tuple(b + s for b, s in zip(spec.base, shifts))
            canon = ctx.canon_exps(exps)
            if len(canon) != 1 or canon[0][1] != exps or canon[0][0] != ONE:
                continue
            for j in range(rest + 1):
                for am in _amonos(rest - j):
                    for logs in logs_all:
                        keys.append((exps, j, am, tuple(logs)))
    keys.sort(key=expr_key_order)
    return [Expression(ctx, {k: ONE}) for k in keys]


def _coords_to_expr(ctx, basis, coords: dict) -> Expression:
    out = ctx.zero
    for i, v in coords.items():
        out = out + basis[i].scale(v)
    return out


def graded_kernel(cfg: VariantConfig, spec: AnsatzSpec, m: int, generators=None):
    """Kernel of A (and any extra annihilators) on the grade-m ansatz piece."""
    gens = generators if generators is not None else [build_generator(cfg)]
    basis = ansatz_basis(cfg.ctx, spec, m)
    if not basis:
        return [], 0
    columns = []
    for b in basis:
        col = {}
        for gi, A in enumerate(gens):
            for k, v in A.apply(b).terms.items():
                col[(gi, k)] = v
        columns.append(col)
    null = nullspace(columns, key_order=lambda k: (k[0], expr_key_order(k[1])))
    vecs = [_coords_to_expr(cfg.ctx, basis, v) for v in null]
    for v in vecs:
        for A in gens:
            if A.apply(v):
                raise KernelError("kernel re-verification failed")
    return vecs, len(vecs)


def double_kernel(cfg_a: VariantConfig, cfg_b: VariantConfig, spec: AnsatzSpec, m: int,
                  gen_a=None, gen_b=None):
    """Intersection of the kernels of two generators at grade m."""
    if cfg_a.ctx != cfg_b.ctx:
        raise ValueError("configurations use different variable sets")
    A = gen_a or build_generator(cfg_a)
    B = gen_b or build_generator(cfg_b)
    return graded_kernel(cfg_a, spec, m, generators=[A, B])


# -- generated submodules ------------------------------------------------------------------

class GradedPiece:
    """Independent expressions of one grade together with their echelon form."""

    def __init__(self):
        self.ech = Echelon(expr_key_order)
        self.elems: list = []

    def add(self, e: Expression) -> bool:
        if self.ech.add(_vec(e)):
            self.elems.append(e)
            return True
        return False

    def express(self, e: Expression):
        return self.ech.express(_vec(e))

    def __len__(self):
        return len(self.elems)


class ModuleSnapshot:
    """Graded pieces of U.seeds up to a top grade, with cached L_n matrices."""

    def __init__(self, cfg: VariantConfig, base_degree: KappaRational, pieces: dict,
                 top: int):
        self.cfg = cfg
        self.base_degree = base_degree
        self.h = base_degree + cfg.total_weight
        self.top = top
        self.pieces = pieces
        self._mat: dict = {}

    def basis(self, g: int) -> list:
        piece = self.pieces.get(g)
        return [] if piece is None else piece.elems

    def dim(self, g: int) -> int:
        return len(self.basis(g))

    def character(self) -> list:
        return [self.dim(g) for g in range(self.top + 1)]

    def express(self, g: int, e: Expression):
        """Coordinates of e in the grade-g basis (None if e is outside)."""
        if not e:
            return {}
        piece = self.pieces.get(g)
        if piece is None:
            return None
        return piece.express(e)

    def contains(self, g: int, e: Expression) -> bool:
        return self.express(g, e) is not None

    def vector(self, g: int, coords: dict) -> Expression:
        return _coords_to_expr(self.cfg.ctx, self.basis(g), coords)

    def matrix(self, n: int, g: int) -> list:
        """Columns: coordinates of L_n b_j (b_j basis of grade g) at grade g - n."""
        key = (n, g)
        hit = self._mat.get(key)
        if hit is not None:
            return hit
        op = build_ln(n, self.cfg)
        cols = []
        for b in self.basis(g):
            img = op.apply(b)
            tg = g - n
            if not img:
                cols.append({})
                continue
            if tg < 0 or tg > self.top:
                raise ValueError(f"L_{n} leaves the snapshot range from grade {g}")
            c = self.express(tg, img)
            if c is None:
                raise KernelError(f"L_{n} image at grade {tg} is outside the module")
            cols.append(c)
        self._mat[key] = cols
        return cols


def generated_submodule(seeds, cfg: VariantConfig, top: int, verify: bool = True,
                        generators=None) -> ModuleSnapshot:
    """U.seeds up to grade ``top`` (grades counted from the lowest degree reached).

    Seeds are first closed under L_0, L_1, L_2; the result is then raised by
    L_{-1} and L_{-2}, which spans U^- U^0 U^+ .seeds.
    """
    if top > cfg.grade_cap:
        raise ValueError(f"grade {top} exceeds the cap {cfg.grade_cap}")
    gens = generators if generators is not None else [build_generator(cfg)]
    seeds = [s for s in seeds if s]
    for s in seeds:
        for A in gens:
            if A.apply(s):
                raise KernelError("seed is not annihilated by the generator")
    by_degree: dict = {}

    def add(e):
        return by_degree.setdefault(e.degree(), GradedPiece()).add(e)

    todo = []
    for s in seeds:
        for piece in s.degree_split().values():
            if add(piece):
                todo.append(piece)
    lowering = [build_ln(n, cfg) for n in (0, 1, 2)]
    while todo:
        e = todo.pop()
        for op in lowering:
            img = op.apply(e)
            if img and add(img):
                todo.append(img)
    degs = list(by_degree)
    base = degs[0]
    for d in degs[1:]:
        diff = d - base
        if not diff.is_integer():
            raise ValueError("seeds lie in different degree classes mod Z")
        if diff.constant() < 0:
            base = d
    pieces = {}
    for d, piece in by_degree.items():
        g = int((d - base).constant())
        if g <= top:
            pieces[g] = piece
    Lm1, Lm2 = build_ln(-1, cfg), build_ln(-2, cfg)
    for g in range(top + 1):
        piece = pieces.setdefault(g, GradedPiece())
        sources = []
        if g >= 1:
            sources += [(Lm1, b) for b in pieces[g - 1].elems]
        if g >= 2:
            sources += [(Lm2, b) for b in pieces[g - 2].elems]
        for op, b in sources:
            img = op.apply(b)
            if img:
                piece.add(img)
    snap = ModuleSnapshot(cfg, base, pieces, top)
    if verify:
        for g in range(top + 1):
            for b in snap.basis(g):
                for A in gens:
                    if A.apply(b):
                        raise KernelError(f"generated element at grade {g} left the kernel")
    return snap


def find_singulars(snap: ModuleSnapshot, m: int) -> list:
    """L_0 eigenvectors at grade m annihilated by L_1 and L_2."""
    basis = snap.basis(m)
    if not basis:
        return []
    eta = snap.h + m
    L0, L1, L2 = (build_ln(n, snap.cfg) for n in (0, 1, 2))
    cols = []
    for b in basis:
        col = {}
        for tag, img in ((0, L0.apply(b) - b.scale(eta)), (1, L1.apply(b)), (2, L2.apply(b))):
            for k, v in img.terms.items():
                col[(tag, k)] = v
        cols.append(col)
    null = nullspace(cols, key_order=lambda k: (k[0], expr_key_order(k[1])))
    return [_coords_to_expr(snap.cfg.ctx, basis, v) for v in null]


def jordan_structure(snap: ModuleSnapshot, grade: int):
    """(rank, nilpotency) of L_0 - eta on the grade piece."""
    basis = snap.basis(grade)
    if not basis:
        return 0, 0
    eta = snap.h + grade
    L0 = build_ln(0, snap.cfg)
    vecs = list(basis)
    rank = None
    power = 0
    while True:
        ech = Echelon(expr_key_order)
        for v in vecs:
            ech.add(_vec(v))
        r = len(ech)
        if power == 1:
            rank = r
        if r == 0:
            return (rank if rank is not None else 0), power
        vecs = [L0.apply(v) - v.scale(eta) for v in vecs]
        power += 1


# -- logarithmic partners ----------------------------------------------------------------------

def solve_log_partner(cfg: VariantConfig, xi: Expression, chi: UEAElement, spec: AnsatzSpec,
                      generators=None, submodule: ModuleSnapshot | None = None):
    """Logarithmic partner of chi.xi inside the ansatz.

    Solves (L_0 - h - l) L = chi.xi, A L = 0 for every generator, and
    L_1 L, L_2 L in U.xi.  The solution is made unique by reducing it
    against the grade-l piece of U.xi; a remaining ambiguity raises.
    Returns (partner, report dict).
    """
    gens = generators if generators is not None else [build_generator(cfg)]
    grades = chi.grades()
    if len(grades) != 1:
        raise ValueError("chi must be homogeneous")
    ell = grades.pop()
    target = apply_uea(chi, xi, cfg)
    if not target:
        raise NoSolutionError("chi annihilates the seed")
    if submodule is None:
        submodule = generated_submodule([xi], cfg, ell, generators=gens)
    sub_base = submodule.base_degree
    xi_grade = int((xi.degree() - sub_base).constant())
    g_l = xi_grade + ell
    h_l = xi.degree() + cfg.total_weight + ell
    spec_m = int((xi.degree() + ell - spec.base_degree).constant())
    basis = ansatz_basis(cfg.ctx, spec, spec_m)
    L0, L1, L2 = (build_ln(n, cfg) for n in (0, 1, 2))
    cols = []
    for b in basis:
        col = {}
        for k, v in (L0.apply(b) - b.scale(h_l)).terms.items():
            col[("L0", k)] = v
        for gi, A in enumerate(gens):
            for k, v in A.apply(b).terms.items():
                col[("A", gi, k)] = v
        for n, op in ((1, L1), (2, L2)):
            for k, v in op.apply(b).terms.items():
                col[("L", n, k)] = v
        cols.append(col)
    nb = len(cols)
    for n in (1, 2):
        for s in submodule.basis(g_l - n) if g_l - n >= 0 else []:
            cols.append({("L", n, k): -v for k, v in s.terms.items()})
    rhs = {("L0", k): v for k, v in target.terms.items()}

    def order(key):
        return (key[0], key[1] if key[0] != "L0" else 0, expr_key_order(key[-1]))

    ech = Echelon(order)
    index_of = []
    for j, col in enumerate(cols):
        if ech.add(col):
            index_of.append(j)
    coords = ech.express(rhs)
    if coords is None:
        raise NoSolutionError("no logarithmic partner in this ansatz")
    sol = {index_of[i]: v for i, v in coords.items() if index_of[i] < nb}
    partner = _coords_to_expr(cfg.ctx, basis, sol)
    # homogeneous solutions restricted to the ansatz coordinates
    homog = []
    for vec in nullspace(cols, key_order=order):
        part = {j: v for j, v in vec.items() if j < nb}
        if part:
            homog.append(_coords_to_expr(cfg.ctx, basis, part))
    sub_piece = submodule.basis(g_l)
    red = Echelon(expr_key_order)
    for s in sub_piece:
        red.add(_vec(s))
    extra = [h for h in homog if not red.contains(_vec(h))]
    extra_ech = Echelon(expr_key_order)
    for s in sub_piece:
        extra_ech.add(_vec(s))
    n_extra = 0
    for h in extra:
        if extra_ech.add(_vec(h)):
            n_extra += 1
    res, _ = red.reduce(_vec(partner))
    partner = Expression(cfg.ctx, res)
    info = {"grade": ell, "h_right": h_l, "ansatz_size": nb,
            "extra_homogeneous": n_extra}
    if n_extra:
        res, _ = extra_ech.reduce(_vec(partner))
        partner = Expression(cfg.ctx, res)
    return partner, info


def log_coupling(chi: UEAElement, partner: Expression, xi: Expression,
                 cfg: VariantConfig) -> KappaRational:
    """beta with chi^dagger . partner = beta . xi."""
    img = apply_uea(dagger(chi), partner, cfg)
    beta = img.proportional_to(xi)
    if beta is None:
        raise ValueError("chi^dagger applied to the partner is not proportional to the seed")
    return beta


# -- contragredient pairing --------------------------------------------------------------------

def dual_functional(snap: ModuleSnapshot, g: int, values) -> dict:
    """Dual coordinates of the functional taking ``values[i][1]`` on ``values[i][0]``.

    The listed vectors must span the grade-g piece.
    """
    basis = snap.basis(g)
    rows = []
    for vec, val in values:
        c = snap.express(g, vec)
        if c is None:
            raise ValueError("vector outside the module")
        rows.append((c, as_krat(val)))
    # solve sum_i f_i c_k[i] = val_k for f
    cols = []
    for i in range(len(basis)):
        cols.append({k: c.get(i, ZERO) for k, (c, _) in enumerate(rows) if c.get(i)})
    from .linalg import solve
    rhs = {k: v for k, (_, v) in enumerate(rows) if v}
    f = solve(cols, rhs)
    if f is None:
        raise ValueError("inconsistent functional values")
    return f


def _dual_gen(snap: ModuleSnapshot, n: int, g: int, vec: dict):
    """L_n on a dual vector at grade g; <L_n v*, v> = <v*, L_{-n} v>."""
    tg = g - n
    if tg < 0 or tg > snap.top:
        return tg, {}
    cols = snap.matrix(-n, tg)  # L_{-n}: grade tg -> g
    out = {}
    for j, col in enumerate(cols):
        s = ZERO
        for i, v in col.items():
            w = vec.get(i)
            if w is not None:
                s = s + w * v
        if s:
            out[j] = s
    return tg, out


def contragredient_action(snap: ModuleSnapshot, u: UEAElement, grade: int, dualvec: dict) -> dict:
    """Action of u on a homogeneous dual vector; returns {grade: coords}."""
    out: dict = {}
    for word, coef in u.terms.items():
        g, vec = grade, dict(dualvec)
        for n in reversed(word):
            g, vec = _dual_gen(snap, n, g, vec)
            if not vec:
                break
        if vec:
            acc = out.setdefault(g, {})
            for i, v in vec.items():
                acc[i] = acc.get(i, ZERO) + v * coef
    return {g: {i: v for i, v in c.items() if v} for g, c in out.items()}


def pair(dual: dict, coords: dict) -> KappaRational:
    s = ZERO
    for i, v in coords.items():
        w = dual.get(i)
        if w is not None:
            s = s + v * w
    return s


def staggered_grade0_action(element: UEAElement, h_left, ell: int = 1):
    """Action of a grade-0 element on eta* of an abstract staggered module.

    The module has a highest-weight vector xi* of weight ``h_left`` and a
    partner eta* at grade 1 with L_0 eta* = h_right eta* + L_{-1} xi*,
    L_1 eta* = beta xi*, L_n eta* = 0 for n >= 2.  Returns the pair
    (a, (b0, b1)) meaning element.eta* = a eta* + (b0 + b1 beta) L_{-1} xi*.
    """
    if ell != 1:
        raise NotImplementedError("only grade-one partners are supported")
    h_left = as_krat(h_left)
    h_right = h_left + 1
    a = ZERO
    b0 = ZERO
    b1 = ZERO
    for word, coef in element.terms.items():
        if word_grade(word) != 0:
            raise ValueError("element must have grade 0")
        neg = [n for n in word if n < 0]
        pos = [n for n in word if n > 0]
        k = sum(1 for n in word if n == 0)
        if not neg and not pos:
            a = a + coef * h_right ** k
            b0 = b0 + coef * (k * h_right ** (k - 1) if k else 0)
        elif neg == [-1] and pos == [1]:
            b1 = b1 + coef * h_left ** k
    return a, (b0, b1)


# -- naive fusion --------------------------------------------------------------------------------

def naive_fusion(kappa, rho):
    """The two roots h+ and h- of the naive fusion quadratic."""
    k = as_krat(kappa)
    r = as_krat(rho)
    if not k:
        raise ZeroDivisionError("kappa must be nonzero")
    hp = (r * r + 8 * r - r * k + 12 - 2 * k) / (4 * k)
    hm = (r * r - r * k - 4 + 2 * k) / (4 * k)
    return hp, hm


def rho_solutions(kappa, r: int, s: int):
    """rho values with h+ = h_{r,s} (two) and h- = h_{r,s} + rs (two)."""
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    k = as_krat(kappa)
    plus = [(k * r - 4 * s + k - 8) / 2, (-k * r + 4 * s + k - 8) / 2]
    minus = [(k * r + 4 * s + k) / 2, (-k * r - 4 * s + k) / 2]
    target_p = weight_hrs(k, r, s)
    target_m = target_p + r * s
    for rho in plus:
        if naive_fusion(k, rho)[0] != target_p:
            raise ArithmeticError("back-substitution failed for h+")
    for rho in minus:
        if naive_fusion(k, rho)[1] != target_m:
            raise ArithmeticError("back-substitution failed for h-")
    return {"plus": plus, "minus": minus}


# -- the multipliers q_n ----------------------------------------------------------------------

def commutator_multiplier(cfg: VariantConfig, n: int, spec: AnsatzSpec, grades=range(0, 4)):
    """Try to find q_n with [L_n, A] = q_n A on the ansatz; None when no probe works."""
    A = build_generator(cfg)
    L = build_ln(n, cfg)
    probes = []
    for m in grades:
        probes.extend(ansatz_basis(cfg.ctx, spec, m))
    q = None
    for b in probes:
        Ab = A.apply(b)
        if len(Ab.terms) == 1:
            (exps, j, am, logs), _ = next(iter(Ab.terms.items()))
            if not j and not am and not any(logs):
                q = (L.apply(Ab) - A.apply(L.apply(b))) * Ab.inverse()
                break
    if q is None:
        return None
    for b in probes:
        comm = L.apply(A.apply(b)) - A.apply(L.apply(b))
        if comm != q * A.apply(b):
            return None
    return q


# -- reports ---------------------------------------------------------------------------------

@dataclass
class StaggeredReport:
    variant: str
    kappa: KappaRational
    h_left: KappaRational
    h_right: KappaRational
    ell: int
    beta: KappaRational | None
    full: list
    sub: list
    quotient: list
    jordan: list = field(default_factory=list)
    singulars: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "kappa": self.kappa.to_json(),
            "h_left": self.h_left.to_json(),
            "h_right": self.h_right.to_json(),
            "ell": self.ell,
            "beta": self.beta.to_json() if self.beta is not None else None,
            "characters": {"full": self.full, "sub": self.sub, "quotient": self.quotient},
            "jordan": self.jordan,
            "singulars": self.singulars,
            "notes": self.notes,
        }


def staggered_report(variant: str, cfg: VariantConfig, xi: Expression, chi: UEAElement,
                     partner: Expression, top: int, generators=None) -> StaggeredReport:
    """Characters, Jordan data and coupling of U.partner over U.xi."""
    ell = chi.grades().pop()
    full = generated_submodule([partner], cfg, top, generators=generators)
    sub = generated_submodule([xi], cfg, top, generators=generators)
    shift = int((sub.base_degree - full.base_degree).constant())
    sub_char = [0] * shift + sub.character()
    sub_char = sub_char[: top + 1]
    full_char = full.character()
    xi_grade = int((xi.degree() - full.base_degree).constant())
    qstart = xi_grade + ell
    quotient = [full_char[g] - sub_char[g] for g in range(qstart, top + 1)]
    notes = []
    for g in range(qstart):
        if full_char[g] != sub_char[g]:
            notes.append(f"grade {g}: module larger than U.xi below the partner grade")
    jordan = []
    for g in range(top + 1):
        r, nil = jordan_structure(full, g)
        jordan.append({"grade": g, "rank": r, "nilpotency": nil})
    beta = None
    if ell > 0 and any(j["nilpotency"] > 1 for j in jordan):
        beta = log_coupling(chi, partner, xi, cfg)
    h_left = xi.degree() + cfg.total_weight
    sing = []
    for g in range(1, min(top, 3) + 1):
        for v in find_singulars(sub, g):
            sing.append({"grade": g + shift, "vector": v.to_json()})
    return StaggeredReport(variant, cfg.kappa, h_left, h_left + ell, ell, beta,
                           full_char, sub_char, quotient, jordan, sing, notes)
