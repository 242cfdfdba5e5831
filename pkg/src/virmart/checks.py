"""The reproduction catalog: named exact checks grouped by topic.

A check is a function taking a :class:`CheckContext`.  It returns a short
detail string on success and raises :class:`CheckFailure` otherwise.
``run_checks`` times each one and collects :class:`CheckResult` rows.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass
from fractions import Fraction

from . import corpus
from .closed_forms import forward_generator, reverse_generator
from .kappa import K, as_krat, weight_hrs
from .operators import VariantConfig, apply_uea, build_generator, build_ln
from .structure import (AnsatzSpec, ansatz_basis, contragredient_action, dual_functional,
                        generated_submodule, graded_kernel, log_coupling, naive_fusion, pair,
                        solve_log_partner, staggered_grade0_action)
from .uea import (classify_verma, dagger, normal_order, partition_p,
                  singular_vector, uea_mul)

__all__ = [
    "CheckFailure",
    "CheckContext",
    "CheckResult",
    "Check",
    "CATALOG",
    "TOPICS",
    "FAULTS",
    "run_checks",
]

F = Fraction

FAULTS = {
    "lambda-b": "add 1 to the b coefficient of the rho = -2 partner",
}


class CheckFailure(AssertionError):
    pass


@dataclass
class CheckContext:
    faults: frozenset = frozenset()
    expensive: bool = False
    budget: float = 120.0


@dataclass
class CheckResult:
    name: str
    topic: str
    status: str
    detail: str
    elapsed: float

    def to_json(self) -> dict:
        return {"name": self.name, "topic": self.topic, "status": self.status,
                "detail": self.detail}


@dataclass(frozen=True)
class Check:
    name: str
    topic: str
    run: object
    expensive: bool = False


class NotComputed(Exception):
    """Raised by opt-in checks that were skipped or ran out of budget."""


def expect(cond: bool, message: str):
    if not cond:
        raise CheckFailure(message)


def expect_equal(got, want, what: str):
    if got != want:
        raise CheckFailure(f"{what}: got {got}, expected {want}")


CATALOG: list = []


def check(name: str, topic: str, expensive: bool = False):
    def register(fn):
        CATALOG.append(Check(name, topic, fn, expensive))
        return fn
    return register


# -- shared fixtures ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _single_site():
    return corpus.single_site()


@functools.lru_cache(maxsize=None)
def _two_point():
    return corpus.two_point()


@functools.lru_cache(maxsize=None)
def _rho_config(kappa, rho):
    return VariantConfig.with_rhos(kappa, [rho])


@functools.lru_cache(maxsize=None)
def _solved_partner(kappa, rho, r, s):
    """Solver route: the partner of chi_{r,s} Z for the variant (kappa, rho)."""
    cfg = _rho_config(kappa, rho)
    chi = singular_vector(kappa, r, s) if (r, s) != (1, 1) else normal_order([-1], cfg.c)
    spec = AnsatzSpec.for_config(cfg, 0, 1)
    lam, _info = solve_log_partner(cfg, cfg.Z, chi, spec)
    return cfg, chi, lam


@functools.lru_cache(maxsize=None)
def _percolation_log(top=7):
    cfg, chi, lam = _solved_partner(as_krat(6), as_krat(-2), 1, 1)
    full = generated_submodule([lam], cfg, top)
    sub = generated_submodule([cfg.Z], cfg, top)
    return cfg, chi, lam, full, sub


def _characters(kappa, rho, partner, top):
    cfg = _rho_config(as_krat(kappa), as_krat(rho))
    lam = partner(cfg)
    full = generated_submodule([lam], cfg, top).character()
    sub = generated_submodule([cfg.Z], cfg, top).character()
    return full, sub


# -- Verma modules -----------------------------------------------------------------------------

@check("chi12-closed-form", "verma")
def _chi12(ctx):
    expect_equal(singular_vector(K, 1, 2), corpus.chi_12_closed(), "chi_{1,2}")
    return str(corpus.chi_12_closed())


@check("chi21-closed-form", "verma")
def _chi21(ctx):
    expect_equal(singular_vector(K, 2, 1), corpus.chi_21_closed(), "chi_{2,1}")
    return str(corpus.chi_21_closed())


@check("chi14-chi32-reference-coefficients", "verma")
def _chi_reference(ctx):
    expect_equal(singular_vector(6, 1, 4), corpus.chi_14_reference(), "chi_{1,4}")
    expect_equal(singular_vector(6, 3, 2), corpus.chi_32_reference(), "chi_{3,2}")
    return "nullspace solutions equal the typed-in words"


@check("classify-kappa6-braid", "verma")
def _classify(ctx):
    st = classify_verma(6, 1, 2)
    expect_equal((st.kind, st.p, st.q), ("braid", 3, 2), "kappa=6 (1,2)")
    return f"{st.kind} p/q = {st.p}/{st.q}, grades {st.grades}"


# -- chordal kernel ----------------------------------------------------------------------------

def _chordal_dims(kappa):
    cfg = VariantConfig.chordal(kappa)
    spec = AnsatzSpec((), 0, 0, 8)
    got = [graded_kernel(cfg, spec, m)[1] for m in range(7)]
    want = [partition_p(m) - partition_p(m - 2) for m in range(7)]
    expect_equal(got, want, f"kernel dims at kappa={kappa}")
    expect_equal(want, [1, 1, 1, 2, 3, 4, 6], "p(m) - p(m-2)")
    return str(got)


@check("chordal-kernel-dims-symbolic", "chordal")
def _chordal_sym(ctx):
    return _chordal_dims(K)


@check("chordal-kernel-dims-kappa6", "chordal")
def _chordal_6(ctx):
    return _chordal_dims(6)


@check("chordal-xi-nulls", "chordal")
def _xi_nulls(ctx):
    cfg = VariantConfig.chordal(6)
    xi = cfg.ctx.point("x")
    expect_equal(build_ln(1, cfg)(xi), cfg.Z, "L_1 Xi")
    expect(not build_ln(2, cfg)(xi), "L_2 Xi != 0")
    expect_equal(build_ln(0, cfg)(xi), xi, "L_0 Xi")
    expect(not apply_uea(corpus.chi_14_reference(), xi, cfg), "chi_{1,4} Xi != 0")
    expect(not apply_uea(corpus.chi_32_reference(), xi, cfg), "chi_{3,2} Xi != 0")
    return "chi_{1,4} Xi = chi_{3,2} Xi = 0"


@check("chordal-xi-module-character", "chordal")
def _xi_character(ctx):
    cfg = VariantConfig.chordal(6)
    got = generated_submodule([cfg.ctx.point("x")], cfg, 7).character()
    p = partition_p
    above = [p(k) - p(k - 4) - p(k - 6) for k in range(7)]
    expect_equal(got[1:], above, "grades 1..7 of U Xi")
    expect_equal(got, [p(m) - p(m - 2) for m in range(8)], "U Xi against the full kernel")
    return str(got)


# -- generators --------------------------------------------------------------------------------

@check("generator-equivalence", "generators")
def _gen_equiv(ctx):
    rhos = [-2, 2, (K - 4) / 2, K - 6, -(K + 4) / 2, K / 3 + 1]
    count = 0
    for rho in rhos:
        cfg = VariantConfig.with_rhos(K, [rho])
        spec = AnsatzSpec.for_config(cfg, 2, 1)
        built, closed = build_generator(cfg), forward_generator(cfg, rho)
        rcfg = VariantConfig.with_partition_function(
            K, cfg.ctx, cfg.ctx.diff_power("x", "y", -2 * weight_hrs(K, 1, 2)))
        rbuilt, rclosed = build_generator(rcfg, "y"), reverse_generator(rcfg)
        for m in range(7):
            for b in ansatz_basis(cfg.ctx, spec, m):
                count += 1
                expect(built(b) == closed(b), f"A differs on {b} (rho={rho})")
                expect(rbuilt(b) == rclosed(b), f"A^rev differs on {b} (rho={rho})")
    return f"{count} basis elements, {len(rhos)} values of rho, grades 0..6"


# -- staggered modules at generic kappa ---------------------------------------------------------

@check("generic-partner", "staggered")
def _generic(ctx):
    cfg = _rho_config(K, (K - 4) / 2)
    lam = corpus.generic_partner(cfg)
    expect(not build_generator(cfg)(lam), "A Lambda != 0")
    expect_equal(build_ln(0, cfg)(lam) - lam.scale(cfg.h_Z), cfg.Z, "(L_0 - h_Z) Lambda")
    for n in (1, 2):
        expect(not build_ln(n, cfg)(lam), f"L_{n} Lambda != 0")
    return "A Lambda = 0, (L_0 - h) Lambda = Z"


@check("rho-minus2-b-coefficient", "staggered")
def _b_coefficient(ctx):
    cfg = _rho_config(K, as_krat(-2))
    b = (4 - K) / 8
    if "lambda-b" in ctx.faults:
        b = b + 1
    lam = corpus.rho_minus2_partner(cfg, b)
    res = build_generator(cfg)(lam)
    expect(not res, f"A Lambda = {res} with b = {b}")
    lm1z = build_ln(-1, cfg)(cfg.Z)
    expect_equal(build_ln(0, cfg)(lam) - lam, lm1z, "(L_0 - 1) Lambda")
    return f"b = {b}"


@check("rho-minus2-beta", "staggered")
def _beta_rm2(ctx):
    cfg, chi, lam = _solved_partner(K, as_krat(-2), 1, 1)
    beta = log_coupling(chi, lam, cfg.Z, cfg)
    expect_equal(beta, 1 - K / 4, "beta from the solved partner")
    typed = corpus.rho_minus2_partner(cfg)
    expect_equal(build_ln(1, cfg)(typed), cfg.Z.scale(1 - K / 4), "L_1 of the typed partner")
    return f"beta = {beta}"


@check("grade2-singular-coefficient", "staggered")
def _grade2_sing(ctx):
    cfg = _rho_config(K, -(K + 4) / 2)
    got = apply_uea(corpus.chi_21_closed(), cfg.Z, cfg)
    want = cfg.ctx.diff_power("x", "y", F(3, 2) - 2 / K).scale(corpus.grade2_singular_coefficient())
    expect_equal(got, want, "chi Z")
    return str(corpus.grade2_singular_coefficient())


@check("grade2-beta", "staggered")
def _grade2_beta(ctx):
    want = -(K - 4) * (K - 2) * (K + 4) / 16
    cfg, chi, lam = _solved_partner(K, -(K + 4) / 2, 2, 1)
    expect_equal(log_coupling(chi, lam, cfg.Z, cfg), want, "beta from the solved partner")
    typed = corpus.grade2_partner(cfg)
    expect(not build_generator(cfg)(typed), "A Lambda != 0 for the typed partner")
    h = (3 * K + 24) / 16
    expect_equal(build_ln(0, cfg)(typed) - typed.scale(h), apply_uea(chi, cfg.Z, cfg),
                 "(L_0 - h) Lambda")
    dual = dagger(chi)
    expect_equal(apply_uea(dual, typed, cfg), cfg.Z.scale(want), "chi^dagger Lambda")
    return f"beta = {want}"


@check("naive-fusion-rho-minus2", "staggered")
def _naive(ctx):
    hp, hm = naive_fusion(K, -2)
    expect_equal((hp, hm), (as_krat(0), as_krat(1)), "h+, h-")
    return "h+ = 0, h- = 1"


# -- kappa = 8 ---------------------------------------------------------------------------------

@check("kappa8-rho2-characters", "kappa8")
def _k8_r2(ctx):
    full, sub = _characters(8, 2, corpus.generic_partner, 6)
    expect_equal(full, [2, 1, 3, 3, 6, 7, 12], "U Lambda")
    expect_equal(sub, [1, 0, 1, 1, 2, 2, 4], "U Z")
    return f"{full} / {sub}"


@check("kappa8-rho-minus2-characters", "kappa8")
def _k8_rm2(ctx):
    full, sub = _characters(8, -2, lambda cfg: _solved_partner(as_krat(8), as_krat(-2), 1, 1)[2], 6)
    expect_equal(full, [1, 2, 3, 4, 7, 10, 14], "U Lambda")
    expect_equal(sub, [1, 1, 2, 2, 4, 5, 8], "U Z")
    return f"{full} / {sub}"


@check("kappa8-beta", "kappa8")
def _k8_beta(ctx):
    cfg, chi, lam = _solved_partner(as_krat(8), as_krat(-2), 1, 1)
    beta = log_coupling(chi, lam, cfg.Z, cfg)
    expect_equal(beta, as_krat(-1), "beta at kappa = 8")
    expect_equal((1 - K / 4).evaluate(8), -1, "symbolic beta at kappa = 8")
    return "beta = -1"


# -- kappa = 6, rho = 0 ------------------------------------------------------------------------

@check("theta-nulls", "fusion")
def _theta(ctx):
    s = _single_site()
    cfg = s.cfg
    expect(not build_ln(1, cfg)(s.Theta), "L_1 Theta != 0")
    expect_equal(build_ln(2, cfg)(s.Theta), s.Z, "L_2 Theta")
    expect_equal(build_ln(0, cfg)(s.Theta), s.Theta.scale(2), "L_0 Theta")
    expect(not apply_uea(corpus.theta_null_3(), s.Theta, cfg), "grade 3 null")
    expect(not apply_uea(corpus.theta_null_5(), s.Theta, cfg), "grade 5 null")
    return "grade 3 and 5 nulls vanish"


@check("ztilde-null", "fusion")
def _ztilde(ctx):
    s = _single_site()
    cfg = s.cfg
    expect(not build_generator(cfg)(s.Ztilde), "A Z~ != 0")
    for n in (1, 2):
        expect(not build_ln(n, cfg)(s.Ztilde), f"L_{n} Z~ != 0")
    expect_equal(build_ln(0, cfg)(s.Ztilde), s.Ztilde.scale(F(1, 3)), "L_0 Z~")
    expect(not apply_uea(corpus.ztilde_null_3(), s.Ztilde, cfg), "grade 3 null")
    return "highest weight 1/3, grade 3 null vanishes"


@check("upsilon-identities", "fusion")
def _upsilon(ctx):
    s = _single_site()
    cfg = s.cfg
    up = s.Upsilon
    expect(not build_generator(cfg)(up), "A Upsilon != 0")
    expect(not build_ln(2, cfg)(up), "L_2 Upsilon != 0")
    expect_equal(build_ln(0, cfg)(up), up.scale(F(10, 3)), "L_0 Upsilon")
    expect_equal(build_ln(3, cfg)(up), s.Ztilde, "L_3 Upsilon")
    expect_equal(build_ln(1, cfg)(up), apply_uea(corpus.upsilon_l1_image(), s.Ztilde, cfg),
                 "L_1 Upsilon")
    return "L_1 Upsilon = (-45/14 L_{-1}^2 + 39/7 L_{-2}) Z~"


@check("upsilon-l1-consistency", "fusion")
def _upsilon_consistency(ctx):
    # L_2 L_1 Upsilon = L_3 Upsilon = Z~ pins the L_{-1}^2 coefficient inside the Verma module
    c = as_krat(0)
    l2 = normal_order([2], c)
    h = F(1, 3)
    coefficients = {}
    for label, alpha in (("derived", F(-45, 14)), ("suspect", F(-45, 7))):
        e = uea_mul(l2, corpus.upsilon_l1_image(alpha))
        coefficients[label] = e.coefficient(()) + e.coefficient((0,)) * h
    expect_equal(coefficients["derived"], as_krat(1), "derived coefficient")
    expect(coefficients["suspect"] != 1, "suspect coefficient unexpectedly consistent")
    return f"L_2 U v_(1/3): derived {coefficients['derived']}, suspect {coefficients['suspect']}"


@check("double-kernel", "fusion")
def _double(ctx):
    s = _single_site()
    cfg = s.cfg
    rcfg = VariantConfig.with_partition_function(
        6, cfg.ctx, cfg.ctx.diff_power("x", "y", -2 * weight_hrs(6, 1, 2)))
    a, arev = build_generator(cfg), build_generator(rcfg, "y")
    for name, v in (("Z", s.Z), ("Theta", s.Theta)):
        expect(not a(v) and not arev(v), f"{name} not in both kernels")
    X = cfg.ctx
    expect_equal(arev(s.Xi), X.diff_power("x", "y", -1).scale(2), "A^rev Xi")
    expect_equal(arev(s.Upsilon), X.diff_power("x", "y", F(4, 3)).scale(F(20, 7)), "A^rev Upsilon")
    return "Z, Theta in both; Xi, Upsilon excluded"


# -- kappa = 6, rho = -2 -----------------------------------------------------------------------

@check("percolation-log-characters", "percolation-log")
def _perc_chars(ctx):
    _cfg, _chi, _lam, full, sub = _percolation_log()
    fc, sc = full.character(), sub.character()
    expect_equal(fc, [1, 2, 2, 4, 6, 8, 12, 17], "U Lambda")
    expect_equal(sc, [1, 1, 1, 2, 3, 4, 6, 8], "U Z")
    quotient = [fc[g] - sc[g] for g in range(1, 8)]
    expect_equal(quotient, [1, 1, 2, 3, 4, 6, 9], "quotient")
    return f"{fc} / {sc} / {quotient}"


@check("percolation-log-beta", "percolation-log")
def _perc_beta(ctx):
    cfg, chi, lam = _solved_partner(as_krat(6), as_krat(-2), 1, 1)
    expect_equal(log_coupling(chi, lam, cfg.Z, cfg), as_krat(F(-1, 2)), "beta")
    return "beta = -1/2"


@check("contraction-abstract", "percolation-log")
def _contraction_abstract(ctx):
    chi = singular_vector(6, 3, 2)
    a, (b0, b1) = staggered_grade0_action(uea_mul(dagger(chi), chi), 0)
    expect_equal(a, as_krat(0), "Lambda coefficient")
    expect_equal((b0, b1), (as_krat(F(17248000, 243)), as_krat(F(-17248000, 81))),
                 "generic-beta intermediate")
    beta = F(-1, 2)
    value = (b0 + b1 * beta) * beta
    expect_equal(value, as_krat(F(-21560000, 243)), "contraction")
    return f"({b0} + ({b1}) beta) beta = {value}"


@check("contraction-concrete", "percolation-log")
def _contraction_concrete(ctx):
    cfg, _chi1, lam, full, _sub = _percolation_log()
    chi = singular_vector(6, 3, 2)
    beta = log_coupling(normal_order([-1], cfg.c), lam, cfg.Z, cfg)
    lm1z = build_ln(-1, cfg)(cfg.Z)
    target = full.express(7, apply_uea(chi, lam, cfg))
    values = []
    for t in (0, 1):
        eta = dual_functional(full, 1, [(lam, t), (lm1z, beta)])
        values.append(pair(contragredient_action(full, chi, 1, eta)[7], target))
    expect(values[0] == values[1], f"depends on the free value: {values}")
    expect_equal(values[0], as_krat(F(-21560000, 243)), "contraction")
    return str(values[0])


# -- two passive points ------------------------------------------------------------------------

@check("two-point-annihilation", "two-point")
def _tp_kill(ctx):
    tp = _two_point()
    expect_equal(tp.Z, tp.cfg.Z, "typed partition function")
    labels = ("A", "A^(y1)", "A^(y2)")
    for name, v in (("Z", tp.Z), ("F", tp.F), ("Lambda", tp.Lambda)):
        for label, g in zip(labels, tp.generators):
            expect(not g(v), f"{label} does not annihilate {name}")
    return "three generators annihilate Z, F, Lambda"


@check("two-point-relations", "two-point")
def _tp_rel(ctx):
    tp = _two_point()
    cfg = tp.cfg
    lm1 = build_ln(-1, cfg)
    expect_equal(lm1(tp.F), tp.Z.scale(F(1, 2)), "L_{-1} F")
    expect(not apply_uea(corpus.chi_12_closed(6), tp.F, cfg), "grade 2 null of F")
    expect_equal(build_ln(1, cfg)(tp.Lambda), tp.F.scale(F(1, 3)), "L_1 Lambda")
    expect_equal(build_ln(0, cfg)(tp.Lambda) - tp.Lambda, lm1(tp.F), "(L_0 - 1) Lambda")
    return "L_{-1} F = Z/2, L_1 Lambda = F/3"


@check("two-point-beta", "two-point")
def _tp_beta(ctx):
    tp = _two_point()
    cfg = tp.cfg
    chi = normal_order([-1], cfg.c)
    spec = AnsatzSpec.for_config(cfg, 2, 1)
    gens = list(tp.generators[:2])
    lam, _info = solve_log_partner(cfg, tp.F, chi, spec, generators=gens)
    expect_equal(log_coupling(chi, lam, tp.F, cfg), as_krat(F(1, 3)), "beta")
    sub = generated_submodule([tp.F], cfg, 1, generators=gens)
    expect(sub.contains(1, lam - tp.Lambda), "solved partner differs from the typed one outside U F")
    return "beta = 1/3"


@check("two-point-quotient-structure", "two-point", expensive=True)
def _tp_quotient(ctx):
    if not ctx.expensive:
        raise NotComputed("opt-in; pass --expensive")
    tp = _two_point()
    cfg = tp.cfg
    gens = list(tp.generators[:2])
    start = time.monotonic()
    full = None
    for top in range(1, 8):
        if time.monotonic() - start > ctx.budget:
            raise NotComputed(f"budget of {ctx.budget:g}s exhausted before grade {top}")
        full = generated_submodule([tp.Lambda], cfg, top, generators=gens)
    sub = generated_submodule([tp.F], cfg, 7, generators=gens)
    got = [full.dim(g) - sub.dim(g) for g in range(1, 8)]
    want = [partition_p(n) - partition_p(n - 6) for n in range(7)]
    expect_equal(got, want, "quotient character")
    level4 = apply_uea(corpus.chi_14_reference(), tp.Lambda, cfg)
    expect(not sub.contains(5, level4), "level 4 singular vanishes in the quotient")
    for n in (1, 2):
        expect(sub.contains(5 - n, build_ln(n, cfg)(level4)),
               f"L_{n} of the level 4 vector leaves U F")
    level6 = apply_uea(corpus.chi_32_reference(), tp.Lambda, cfg)
    expect(sub.contains(7, level6), "level 6 vector is not null in the quotient")
    return f"quotient {got}; level 4 singular nonzero, level 6 null"


TOPICS = sorted({c.topic for c in CATALOG})


def run_checks(topics=None, names=None, context: CheckContext | None = None):
    """Run the selected checks in catalog order and return their results."""
    ctx = context or CheckContext()
    out = []
    for c in CATALOG:
        if topics and c.topic not in topics:
            continue
        if names and c.name not in names:
            continue
        start = time.monotonic()
        try:
            detail = c.run(ctx)
            status = "pass"
        except NotComputed as exc:
            status, detail = "not computed", str(exc)
        except CheckFailure as exc:
            status, detail = "fail", str(exc)
        except Exception as exc:  # noqa: BLE001 - a crash is reported as a named failure
            status, detail = "fail", f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(c.name, c.topic, status, detail, time.monotonic() - start))
    return out
