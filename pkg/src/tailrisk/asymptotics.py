"""Closed-form asymptotics for sums of ``n`` shifted-Pareto increments.

``U(x) = n P(Z > x)`` approximates ``P(S_n > x)``; its inverse gives the
anchor level ``u_p = (n / (1 - p))^(1/alpha) - 1`` used for the change of
measure. The ``phi`` functions bound the normalised second moment
``E w^2 I{X > c lam} / P(X > lam)^2`` for large ``lam``.
"""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .dist import HeavyTailDistribution
from .samplers import Algorithm, MixtureConfig


class DivergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class AsymptoticContext:
    d: HeavyTailDistribution
    n: int
    mix: MixtureConfig | None = None

    def __post_init__(self):
        if self.mix is not None and self.mix.n != self.n:
            raise ValueError(f"mixture config has n={self.mix.n}, context has n={self.n}")

    @property
    def alpha(self) -> float:
        return self.d.alpha

    def _mixture(self) -> MixtureConfig:
        if self.mix is None or self.mix.algorithm is Algorithm.STANDARD:
            raise ValueError("a mixture configuration is required")
        return self.mix


def tail_approx_U(ctx: AsymptoticContext, x: float) -> float:
    return min(1.0, ctx.n * ctx.d.tail(x))


def asymptotic_quantile(ctx: AsymptoticContext, p: float) -> float:
    """``(n / (1 - p))^(1/alpha) - 1``, the inverse of ``1 - U`` at ``p``.

    For positive increments ``P(S_n > x) > n P(Z > x)``, so this always lies
    below the true quantile.
    """
    if not 0 < p < 1:
        raise ValueError(f"level p must lie in (0, 1), got {p!r}")
    return (ctx.n / (1.0 - p)) ** (1.0 / ctx.alpha) - 1.0


def _prefix_products(mix_p: Sequence[float]) -> np.ndarray:
    """``P[i] = prod_{j < i} 1 / p_j`` for ``i = 0..n-1`` (zero-based)."""
    inv = 1.0 / np.asarray(mix_p, dtype=float)
    return np.concatenate(([1.0], np.cumprod(inv)))


def phi_conditional(ctx: AsymptoticContext, c: float) -> float:
    """Second-moment bound of the conditional mixture:

    ``c^-alpha (a^-alpha sum_{i<n} P_i / q_i + P_n)`` with ``P_i = prod_{j<i} 1/p_j``.
    """
    alpha = ctx.alpha
    if ctx.n == 1:
        return c ** (-alpha)
    mix = ctx._mixture()
    if c < 1:
        warnings.warn("phi_conditional is only a valid bound for c >= 1", RuntimeWarning, stacklevel=2)
    pre = _prefix_products(mix.mix_p)
    q = 1.0 - np.asarray(mix.mix_p, dtype=float)
    body = mix.a ** (-alpha) * float(np.sum(pre[:-1] / q)) + float(pre[-1])
    return c ** (-alpha) * body


def slowly_varying_part(alpha: float, x: float) -> float:
    """``L`` with ``f(x) = x^(-alpha-1) L(x)`` for the shifted Pareto density."""
    return alpha * (x / (1.0 + x)) ** (alpha + 1.0)


def _scaling_integral(alpha: float, c: float, lam: float) -> float:
    # integrand alpha / (lam^alpha L(y/lam)) * alpha y^(-alpha-1)
    #   = alpha lam^-alpha (lam + y)^(alpha+1) y^(-2 alpha - 2), evaluated in logs
    def integrand(y):
        return math.exp(
            math.log(alpha) - alpha * math.log(lam) + (alpha + 1.0) * math.log(lam + y)
            - (2.0 * alpha + 2.0) * math.log(y)
        )

    pieces = []
    split = max(c, lam)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if split > c:
                pieces.append(integrate.quad(integrand, c, split, epsabs=0.0, epsrel=1e-10, limit=200)[0])
            pieces.append(integrate.quad(integrand, split, math.inf, epsabs=0.0, epsrel=1e-10, limit=200)[0])
        except integrate.IntegrationWarning as exc:
            warnings.warn(f"scaling-mixture integral did not converge: {exc}", DivergenceWarning, stacklevel=3)
            return math.inf
    total = math.fsum(pieces)
    if not math.isfinite(total):
        warnings.warn("scaling-mixture integral diverges", DivergenceWarning, stacklevel=3)
    return total


def phi_scaling(ctx: AsymptoticContext, c: float, lam: float) -> float:
    """Second-moment bound of the scaling mixture, evaluated at finite ``lam``.

    ``sum_{i=1}^n P_i / q_i * integral_c^inf alpha / (lam^alpha L(y/lam)) alpha y^(-alpha-1) dy``
    with ``q_n = 1``. The integral does not depend on ``i``.
    """
    if c <= 0 or lam <= 0:
        raise ValueError("c and lam must be positive")
    alpha = ctx.alpha
    if ctx.n == 1:
        coef = 1.0
    else:
        mix = ctx._mixture()
        pre = _prefix_products(mix.mix_p)
        q = np.concatenate((1.0 - np.asarray(mix.mix_p, dtype=float), [1.0]))
        coef = float(np.sum(pre / q))
    return coef * _scaling_integral(alpha, c, lam)


def var_ratio_bound(ctx: AsymptoticContext, lam: float | None = None) -> float:
    """``(phi(1) - 1) / alpha^2``, the limit bound on ``sigma_p^2 / VaR_p^2``.

    The scaling mixture needs ``lam`` (defaults to the mixture's anchor).
    """
    if ctx.mix is not None and ctx.mix.algorithm is Algorithm.SCALING:
        phi1 = phi_scaling(ctx, 1.0, ctx.mix.lam if lam is None else lam)
    else:
        phi1 = phi_conditional(ctx, 1.0)
    return (phi1 - 1.0) / ctx.alpha**2


def es_ratio_bound(alpha: float, K: float) -> float:
    """``(2 K (alpha - 1) / (alpha - 2) - 1) / alpha^2``; requires ``alpha > 2``."""
    if not alpha > 2:
        raise ValueError(f"expected-shortfall bound requires alpha > 2, got {alpha}")
    if not K > 0:
        raise ValueError(f"K must be positive, got {K}")
    return (2.0 * K * (alpha - 1.0) / (alpha - 2.0) - 1.0) / alpha**2


def relative_error(estimates: Sequence[float]) -> float:
    """Sample standard deviation (divisor ``m - 1``) over the sample mean.

    Returns ``nan`` with a warning when the mean is zero.
    """
    x = [float(v) for v in estimates]
    if len(x) < 2:
        raise ValueError("relative error needs at least two replications")
    mean = statistics.fmean(x)
    if mean == 0.0:
        warnings.warn("relative error undefined for zero mean", RuntimeWarning, stacklevel=2)
        return math.nan
    # statistics.stdev works in exact rationals: constant input gives exactly 0
    return statistics.stdev(x) / abs(mean)
