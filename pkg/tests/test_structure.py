from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from virmart import corpus
from virmart.kappa import K, ONE, ZERO, as_krat, weight_hrho, weight_hrs
from virmart.operators import VariantConfig, apply_uea, build_generator, build_ln
from virmart.structure import (AnsatzSpec, KernelError, NoSolutionError, commutator_multiplier,
                               contragredient_action, double_kernel, dual_functional,
                               find_singulars, generated_submodule, graded_kernel,
                               jordan_structure, log_coupling, naive_fusion, pair,
                               rho_solutions, solve_log_partner, staggered_report)
from virmart.uea import normal_order, partition_p, singular_vector

from strategies import CONFIGS, expressions, small_fraction

LM1 = normal_order([-1], 0)


def rho_cfg(kappa, rho):
    return VariantConfig.with_rhos(kappa, [rho])


def solved(kappa, rho, chi):
    cfg = rho_cfg(kappa, rho)
    lam, info = solve_log_partner(cfg, cfg.Z, chi, AnsatzSpec.for_config(cfg))
    return cfg, lam, info


# -- kernels ------------------------------------------------------------------------------

def test_chordal_kernel_small_grades_and_reverification():
    cfg = VariantConfig.chordal(K)
    A = build_generator(cfg)
    for m in range(5):
        basis, dim = graded_kernel(cfg, AnsatzSpec((), 0, 0), m)
        assert dim == partition_p(m) - partition_p(m - 2)
        assert all(A(b).is_zero() for b in basis)


def test_generic_rho_grade0_kernel_holds_z_and_partner():
    cfg = rho_cfg(K, (K - 4) / 2)
    spec = AnsatzSpec.for_config(cfg, 0, 1)
    assert spec.base == ((K - 4) / (2 * K),)
    basis, dim = graded_kernel(cfg, spec, 0)
    assert dim == 2
    lam = corpus.generic_partner(cfg)
    snap = generated_submodule(basis, cfg, 0)
    assert snap.contains(0, cfg.Z) and snap.contains(0, lam)


def test_theta_in_grade2_kernel():
    s = corpus.single_site()
    basis, _dim = graded_kernel(s.cfg, AnsatzSpec.for_config(s.cfg, 0, 0), 2)
    snap = generated_submodule(basis, s.cfg, 2)
    assert snap.contains(2, s.Theta)


def test_seed_outside_kernel_is_rejected():
    cfg = rho_cfg(K, -2)
    with pytest.raises(KernelError):
        generated_submodule([cfg.ctx.point("x") * cfg.Z], cfg, 2)


def test_empty_ansatz_component():
    cfg = VariantConfig.chordal(6)
    assert graded_kernel(cfg, AnsatzSpec((), 0, 0), -1) == ([], 0)


@pytest.mark.parametrize("k0", [6, 8])
def test_special_kappa_kernel_never_smaller(k0):
    for rho in (as_krat(-2), as_krat(0)):
        sym = rho_cfg(K, rho)
        spec_sym = AnsatzSpec.for_config(sym, 0, 1)
        special = rho_cfg(k0, rho)
        spec_special = AnsatzSpec.for_config(special, 0, 1)
        for m in range(4):
            assert graded_kernel(special, spec_special, m)[1] >= graded_kernel(sym, spec_sym, m)[1]


# -- singulars and Jordan data ---------------------------------------------------------------

def assert_annihilated(cfg, v):
    for n in range(1, 5):
        assert build_ln(n, cfg)(v).is_zero()


def test_singulars_rho_minus2():
    cfg = rho_cfg(K, -2)
    snap = generated_submodule([cfg.Z], cfg, 2)
    sing = find_singulars(snap, 1)
    assert len(sing) == 1
    want = cfg.ctx.diff_power("x", "y", 1 - 2 / K).scale((4 - K) / K)
    assert sing[0].proportional_to(want) is not None
    assert_annihilated(cfg, sing[0])


def test_singulars_kappa6_rho_minus2():
    cfg = rho_cfg(6, -2)
    snap = generated_submodule([cfg.Z], cfg, 3)
    sing = find_singulars(snap, 1)
    z4 = rho_cfg(6, 4).Z
    assert len(sing) == 1 and sing[0].proportional_to(z4) is not None
    assert build_ln(-1, cfg)(cfg.Z) == z4.scale(F(-1, 3))
    for g in range(1, 4):
        for v in find_singulars(snap, g):
            assert_annihilated(cfg, v)


def test_singulars_two_point():
    tp = corpus.two_point()
    snap = generated_submodule([tp.F], tp.cfg, 1, generators=list(tp.generators))
    sing = find_singulars(snap, 1)
    assert len(sing) == 1 and sing[0].proportional_to(tp.Z) is not None
    assert build_ln(-1, tp.cfg)(tp.F) == tp.Z.scale(F(1, 2))
    assert_annihilated(tp.cfg, sing[0])


def test_jordan_data():
    ch = VariantConfig.chordal(6)
    snap = generated_submodule([ch.ctx.point("x")], ch, 4)
    for g in range(5):
        assert jordan_structure(snap, g) == (0, 1)
    cfg = rho_cfg(K, (K - 4) / 2)
    snap = generated_submodule([corpus.generic_partner(cfg)], cfg, 1)
    assert jordan_structure(snap, 0) == (1, 2)
    cfg6, lam, _ = solved(6, -2, LM1)
    snap = generated_submodule([lam], cfg6, 2)
    assert jordan_structure(snap, 1) == (1, 2)
    assert build_ln(0, cfg6)(lam) - lam == build_ln(-1, cfg6)(cfg6.Z)


# -- partners and couplings -----------------------------------------------------------------

def test_rho_minus2_partner_matches_reference_up_to_submodule():
    cfg, lam, info = solved(K, -2, normal_order([-1], rho_cfg(K, -2).c))
    typed = corpus.rho_minus2_partner(cfg)
    sub = generated_submodule([cfg.Z], cfg, 1)
    assert sub.contains(1, lam - typed)
    assert info["grade"] == 1 and info["h_right"] == ONE
    assert log_coupling(normal_order([-1], cfg.c), lam, cfg.Z, cfg) == 1 - K / 4


def test_grade2_partner_matches_reference_up_to_submodule():
    chi = singular_vector(K, 2, 1)
    cfg, lam, _ = solved(K, -(K + 4) / 2, chi)
    typed = corpus.grade2_partner(cfg)
    sub = generated_submodule([cfg.Z], cfg, 2)
    assert sub.contains(2, lam - typed)
    assert log_coupling(chi, lam, cfg.Z, cfg) == -(K - 4) * (K - 2) * (K + 4) / 16


def test_two_point_partner_matches_reference_up_to_submodule():
    tp = corpus.two_point()
    gens = list(tp.generators[:2])
    lam, _ = solve_log_partner(tp.cfg, tp.F, normal_order([-1], 0),
                               AnsatzSpec.for_config(tp.cfg, 2, 1), generators=gens)
    sub = generated_submodule([tp.F], tp.cfg, 1, generators=gens)
    assert sub.contains(1, lam - tp.Lambda)


def test_no_partner_when_chi_kills_seed():
    cfg = rho_cfg(K, 0)
    with pytest.raises(NoSolutionError):
        solve_log_partner(cfg, cfg.Z, normal_order([-1], cfg.c), AnsatzSpec.for_config(cfg))


def test_no_partner_outside_ansatz():
    # the rho = 2 variant at generic kappa has a nonzero L_{-1} Z but no log partner
    cfg = rho_cfg(K, 2)
    with pytest.raises(NoSolutionError):
        solve_log_partner(cfg, cfg.Z, normal_order([-1], cfg.c), AnsatzSpec.for_config(cfg))


@settings(max_examples=15)
@given(st.sampled_from(["rho-2", "grade2", "kappa6"]), st.lists(small_fraction, min_size=2,
                                                               max_size=2))
def test_beta_invariant_under_submodule_shifts(case, weights):
    if case == "rho-2":
        kappa, rho, chi = K, as_krat(-2), None
    elif case == "grade2":
        kappa, rho, chi = K, -(K + 4) / 2, singular_vector(K, 2, 1)
    else:
        kappa, rho, chi = as_krat(6), as_krat(-2), None
    cfg = rho_cfg(kappa, rho)
    chi = chi or normal_order([-1], cfg.c)
    _, lam, info = solved(kappa, rho, chi)
    ell = info["grade"]
    sub = generated_submodule([cfg.Z], cfg, ell)
    shift = cfg.ctx.zero
    for w, b in zip(weights, sub.basis(ell)):
        shift = shift + b.scale(w)
    base = log_coupling(chi, lam, cfg.Z, cfg)
    assert log_coupling(chi, lam + shift, cfg.Z, cfg) == base


@pytest.mark.parametrize("k0", [6, 8])
def test_specialization_consistency_of_couplings(k0):
    for rho, chi_sym, chi_at in (
            (lambda k: as_krat(-2), None, None),
            (lambda k: -(k + 4) / 2, singular_vector(K, 2, 1), singular_vector(k0, 2, 1))):
        cfg = rho_cfg(K, rho(K))
        c_sym = chi_sym or normal_order([-1], cfg.c)
        _, lam, _ = solved(K, rho(K), c_sym)
        beta_sym = log_coupling(c_sym, lam, cfg.Z, cfg)
        cfg0 = rho_cfg(k0, rho(as_krat(k0)))
        c0 = chi_at or normal_order([-1], cfg0.c)
        _, lam0, _ = solved(as_krat(k0), rho(as_krat(k0)), c0)
        assert log_coupling(c0, lam0, cfg0.Z, cfg0) == beta_sym.evaluate(k0)
        # the solved partner specializes to a valid partner at k0
        spec_lam = lam.specialize(k0)
        assert build_generator(cfg0)(spec_lam).is_zero()


@settings(max_examples=10)
@given(st.sampled_from(["rho-zero", "rho-third"]).flatmap(
    lambda n: expressions(CONFIGS[n], max_terms=2)), st.sampled_from([6, 8]),
    st.integers(-3, 3))
def test_specialization_consistency_of_operators(phi, k0, n):
    sym_cfg = CONFIGS["rho-zero"] if phi.ctx == CONFIGS["rho-zero"].ctx else CONFIGS["rho-third"]
    rho = sym_cfg.rhos["y"]
    cfg0 = rho_cfg(k0, rho.evaluate(k0))
    try:
        phi0 = phi.specialize(k0)
    except ZeroDivisionError:
        return
    assert build_ln(n, sym_cfg)(phi).specialize(k0) == build_ln(n, cfg0)(phi0)
    assert build_generator(sym_cfg)(phi).specialize(k0) == build_generator(cfg0)(phi0)


# -- reports ---------------------------------------------------------------------------------

def test_staggered_report_characters_add_up():
    cfg, lam, _ = solved(8, -2, normal_order([-1], rho_cfg(8, -2).c))
    rep = staggered_report("test", cfg, cfg.Z, normal_order([-1], cfg.c), lam, 5)
    assert rep.h_right == rep.h_left + rep.ell
    for g in range(rep.ell, 6):
        assert rep.full[g] == rep.sub[g] + rep.quotient[g - rep.ell]
    assert rep.beta == as_krat(-1)
    assert any(j["nilpotency"] == 2 for j in rep.jordan)
    doc = rep.to_json()
    assert doc["characters"]["full"] == rep.full


def test_report_without_jordan_block_has_no_beta():
    ch = VariantConfig.chordal(6)
    xi = ch.ctx.point("x")
    rep = staggered_report("chordal", ch, ch.Z, normal_order([-1], ch.c), xi, 4)
    assert rep.beta is None
    assert all(j["nilpotency"] <= 1 for j in rep.jordan)


def test_commutator_multiplier():
    for rho in (as_krat(-2), (K - 4) / 2, as_krat(0)):
        cfg = rho_cfg(K, rho)
        spec = AnsatzSpec.for_config(cfg)
        for n in (1, 2, 3):
            assert commutator_multiplier(cfg, n, spec) == cfg.ctx.zero
        assert commutator_multiplier(cfg, 0, spec) == cfg.ctx.const(-2)
        q = commutator_multiplier(cfg, -1, spec)
        assert q == cfg.ctx.point("x").scale(-4)
        phi = cfg.Z * (cfg.ctx.point("x") ** 2 + cfg.ctx.a(2))
        A, L = build_generator(cfg), build_ln(-1, cfg)
        assert L(A(phi)) - A(L(phi)) == q * A(phi)


# -- fusion weights and double kernels ---------------------------------------------------------

def test_naive_fusion():
    hp, hm = naive_fusion(K, (K - 4) / 2)
    assert hp == hm
    assert naive_fusion(K, 0) == ((6 - K) / (2 * K), (K - 2) / (2 * K))
    assert naive_fusion(K, -2) == (ZERO, ONE)
    assert naive_fusion(K, -2) == (weight_hrs(K, 1, 1), weight_hrs(K, 1, 1) + 1)


@given(st.lists(small_fraction, min_size=2, max_size=2))
def test_naive_fusion_roots_are_shifted_rho_weights(coeffs):
    # h+ and h- factor as the passive-point weights at rho + 2 and rho - 2
    rho = coeffs[0] + coeffs[1] * K
    hp, hm = naive_fusion(K, rho)
    assert hp == weight_hrho(K, rho + 2)
    assert hm == weight_hrho(K, rho - 2)
    assert hp - hm == (2 * rho + 4 - K) / K


@pytest.mark.parametrize("r", [1, 2, 3])
def test_rho_solutions(r):
    sol = rho_solutions(K, r, 1)
    assert -2 + K / 2 * (1 - r) in sol["plus"] + sol["minus"]
    for rho in sol["plus"]:
        assert naive_fusion(K, rho)[0] == weight_hrs(K, r, 1)
    for rho in sol["minus"]:
        assert naive_fusion(K, rho)[1] == weight_hrs(K, r, 1) + r


def test_rho_minus2_among_solutions():
    assert as_krat(-2) in rho_solutions(K, 1, 1)["plus"]


def test_double_kernel_kappa6():
    s = corpus.single_site()
    cfg = s.cfg
    rcfg = VariantConfig.with_partition_function(
        6, cfg.ctx, cfg.ctx.diff_power("x", "y", -2 * weight_hrs(6, 1, 2)))
    spec = AnsatzSpec.for_config(cfg, 0, 0)
    arev = build_generator(rcfg, "y")
    b0, d0 = double_kernel(cfg, rcfg, spec, 0, gen_b=arev)
    assert d0 == 1 and b0[0].proportional_to(s.Z) is not None
    b1, _d1 = double_kernel(cfg, rcfg, spec, 1, gen_b=arev)
    snap1 = generated_submodule(b1, cfg, 1, verify=False) if b1 else None
    assert snap1 is None or not snap1.contains(1, s.Xi)
    b2, _d2 = double_kernel(cfg, rcfg, spec, 2, gen_b=arev)
    assert generated_submodule(b2, cfg, 2, verify=False).contains(2, s.Theta)


# -- contragredient ---------------------------------------------------------------------------

def test_contragredient_generic_partner():
    cfg = rho_cfg(K, (K - 4) / 2)
    lam = corpus.generic_partner(cfg)
    snap = generated_submodule([lam], cfg, 1)
    # in the dual the roles swap: eta* pairs with Z, xi* with the partner
    eta = dual_functional(snap, 0, [(lam, 0), (cfg.Z, 1)])
    xi = dual_functional(snap, 0, [(lam, 1), (cfg.Z, 0)])
    u = normal_order([0], cfg.c) - normal_order([], cfg.c).scale(cfg.h_Z)
    assert contragredient_action(snap, u, 0, eta) == {0: xi}
    assert contragredient_action(snap, u, 0, xi) == {0: {}}
    assert pair(eta, snap.express(0, cfg.Z)) == ONE
