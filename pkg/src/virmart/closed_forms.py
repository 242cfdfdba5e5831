"""Closed-form SLE generators with one passive point, typed in directly.

These are independent of :func:`virmart.operators.build_generator`: the
potential terms are written out by hand instead of being produced by
conjugation with Z.  They serve as oracles for the conjugation route.
"""

from __future__ import annotations

from .kappa import as_krat, weight_hrs
from .operators import FirstOrderOperator, VariantConfig, loewner_drift_coefficient

__all__ = ["forward_generator", "reverse_generator"]


def forward_generator(cfg: VariantConfig, rho) -> FirstOrderOperator:
    """(k/2) d_x^2 + 2/(y-x) d_y - [rho(rho+4-k)/(2k)]/(y-x)^2 + a-drift at x."""
    ctx = cfg.ctx
    if len(ctx.passive) != 1:
        raise ValueError("closed form needs exactly one passive point")
    x, y = ctx.active, ctx.passive[0]
    k = cfg.kappa
    rho = as_krat(rho)
    pot = ctx.diff_power(y, x, -2).scale(-(rho * (rho + 4 - k) / (2 * k)))
    return FirstOrderOperator(
        ctx, -2,
        second={x: ctx.const(k / 2)},
        points={y: ctx.diff_power(y, x, -1).scale(2)},
        a_coeff=lambda l: loewner_drift_coefficient(ctx, x, l),
        mult=pot, name="A_closed")


def reverse_generator(cfg: VariantConfig) -> FirstOrderOperator:
    """(k/2) d_y^2 + 2/(x-y) d_x - 2 h_{1,2}/(x-y)^2 + a-drift at y."""
    ctx = cfg.ctx
    if len(ctx.passive) != 1:
        raise ValueError("closed form needs exactly one passive point")
    x, y = ctx.active, ctx.passive[0]
    k = cfg.kappa
    pot = ctx.diff_power(x, y, -2).scale(-2 * weight_hrs(k, 1, 2))
    return FirstOrderOperator(
        ctx, -2,
        second={y: ctx.const(k / 2)},
        points={x: ctx.diff_power(x, y, -1).scale(2)},
        a_coeff=lambda l: loewner_drift_coefficient(ctx, y, l),
        mult=pot, name="Arev_closed")
