"""Named functions and Virasoro words used by the checks, tests and CLI.

Each entry is typed in from its closed form, never produced by a solver,
so that solver output can be compared against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import Expression
from .kappa import K, as_krat, central_charge
from .operators import VariantConfig, build_generator
from .uea import UEAElement, normal_order

__all__ = [
    "words",
    "chi_12_closed",
    "chi_21_closed",
    "chi_14_reference",
    "chi_32_reference",
    "theta_null_3",
    "theta_null_5",
    "ztilde_null_3",
    "upsilon_l1_image",
    "SingleSite",
    "single_site",
    "generic_partner",
    "rho_minus2_partner",
    "grade2_partner",
    "grade2_singular_coefficient",
    "TwoPoint",
    "two_point",
]

F = Fraction


def words(pairs, c=None) -> UEAElement:
    """Sum of coefficient * word, each word normal ordered first."""
    c = central_charge() if c is None else as_krat(c)
    out = UEAElement({}, c)
    for coef, word in pairs:
        out = out + normal_order(list(word), c).scale(as_krat(coef))
    return out


def chi_12_closed(kappa=K) -> UEAElement:
    k = as_krat(kappa)
    return words([(1, (-1, -1)), (-4 / k, (-2,))], central_charge(k))


def chi_21_closed(kappa=K) -> UEAElement:
    k = as_krat(kappa)
    return words([(1, (-1, -1)), (-k / 4, (-2,))], central_charge(k))


def chi_14_reference() -> UEAElement:
    """Grade 4 null at c = 0, weight 1."""
    return words([
        (1, (-1,) * 4), (F(-20, 3), (-2, -1, -1)), (4, (-2, -2)),
        (4, (-3, -1)), (-4, (-4,)),
    ], 0)


def chi_32_reference() -> UEAElement:
    """Grade 6 null at c = 0, weight 1."""
    return words([
        (1, (-1,) * 6), (-14, (-2, -1, -1, -1, -1)), (F(112, 3), (-2, -2, -1, -1)),
        (F(-512, 27), (-2, -2, -2)), (14, (-3, -1, -1, -1)), (F(-40, 3), (-3, -2, -1)),
        (F(-208, 9), (-3, -3)), (-48, (-4, -1, -1)), (F(688, 9), (-4, -2)),
        (F(88, 9), (-5, -1)), (F(80, 3), (-6,)),
    ], 0)


def theta_null_3() -> UEAElement:
    return words([(1, (-1, -1, -1)), (-6, (-2, -1)), (6, (-3,))], 0)


def theta_null_5() -> UEAElement:
    return words([
        (1, (-1,) * 5), (F(-40, 3), (-2, -1, -1, -1)), (F(256, 9), (-2, -2, -1)),
        (F(52, 3), (-3, -1, -1)), (F(-256, 9), (-3, -2)), (F(-104, 3), (-4, -1)),
        (F(208, 9), (-5,)),
    ], 0)


def ztilde_null_3() -> UEAElement:
    return words([(1, (-1, -1, -1)), (F(-8, 3), (-2, -1)), (F(4, 9), (-3,))], 0)


def upsilon_l1_image(l1_squared_coefficient=F(-45, 14)) -> UEAElement:
    """The word U with L_1 Upsilon = U Z~.

    The default L_{-1}^2 coefficient is the one forced by L_2 L_1 = L_3 on
    Upsilon (see the decisions ledger); pass -45/7 for the uncorrected value.
    """
    return words([(l1_squared_coefficient, (-1, -1)), (F(39, 7), (-2,))], 0)


@dataclass(frozen=True)
class SingleSite:
    """The kappa = 6, rho = 0 variant and the functions living in its kernel."""
    cfg: VariantConfig
    Z: Expression
    Xi: Expression
    Theta: Expression
    Ztilde: Expression
    Upsilon: Expression


def single_site() -> SingleSite:
    cfg = VariantConfig.with_rhos(6, [0])
    X = cfg.ctx
    x, y = X.point("x"), X.point("y")
    zt = X.diff_power("x", "y", F(1, 3))
    theta = X.diff_power("x", "y", 2).scale(F(1, 5)) - X.a(2)
    upsilon = zt * (x ** 3 * F(2, 21) + x * x * y * F(1, 7) + x * y * y * F(3, 7) - X.a(3))
    return SingleSite(cfg, cfg.Z, x, theta, zt, upsilon)


def generic_partner(cfg: VariantConfig) -> Expression:
    """Z log(x - y), the partner of Z when rho = (kappa - 4)/2."""
    return cfg.Z * cfg.ctx.log("x", "y")


def rho_minus2_partner(cfg: VariantConfig, b=None) -> Expression:
    """Partner of L_{-1} Z at rho = -2; ``b`` defaults to (4 - kappa)/8."""
    X = cfg.ctx
    k = cfg.kappa
    b = (4 - k) / 8 if b is None else as_krat(b)
    log_part = (X.diff_power("x", "y", 1 - 2 / k) * X.log("x", "y")).scale((4 - k) / k)
    return log_part + (X.diff_power("x", "y", -2 / k) * (X.point("x") + X.point("y"))).scale(b)


def grade2_singular_coefficient(kappa=K):
    k = as_krat(kappa)
    return (k - 4) * (k - 2) * (k + 4) / (2 * k * k)


def grade2_partner(cfg: VariantConfig) -> Expression:
    """Partner of the grade 2 singular at rho = -(kappa + 4)/2."""
    X = cfg.ctx
    k = cfg.kappa
    x, y = X.point("x"), X.point("y")
    log_part = X.diff_power("x", "y", (3 * k - 4) / (2 * k)) * X.log("x", "y")
    poly = (x * x).scale(4 * k) - (y * y).scale(4 * k + k * k)
    rest = X.diff_power("x", "y", (-k - 4) / (2 * k)) * poly.scale(F(1, 16))
    return (log_part + rest).scale(grade2_singular_coefficient(k))


@dataclass(frozen=True)
class TwoPoint:
    """kappa = 6 with passive points y1, y2 (rho = -3, -3) and its generators."""
    cfg: VariantConfig
    Z: Expression
    F: Expression
    Lambda: Expression
    generators: tuple


def two_point() -> TwoPoint:
    cfg = VariantConfig.with_rhos(6, [-3, -3])
    W = cfg.ctx
    x, y1, y2 = W.point("x"), W.point("y1"), W.point("y2")
    denom = (W.diff_power("x", "y1", F(-1, 2)) * W.diff_power("x", "y2", F(-1, 2))
             * W.diff_power("y1", "y2", F(-5, 4)))
    z = W.diff_power("y1", "y2", F(3, 4)) * W.diff_power("x", "y1", F(-1, 2)) \
        * W.diff_power("x", "y2", F(-1, 2))
    f = (y1 + y2 - x * 2) * denom
    lam = (x * (y1 + y2 - x * 2) * 2
           + W.diff_power("y1", "y2", 2) * W.log("y1", "y2") * 3) * denom.scale(F(1, 6))
    gens = (build_generator(cfg),
            build_generator(cfg, "y1", F(8, 3)),
            build_generator(cfg, "y2", F(8, 3)))
    return TwoPoint(cfg, z, f, lam, gens)
