"""Regularly varying increment laws.

Only the shifted Pareto law ``P(Z > x) = (1 + x)^(-alpha)`` is provided; the
sampling kernels are specialised to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class HeavyTailDistribution:
    """Interface for an increment law with regularly varying tail index ``alpha``."""

    alpha: float
    kind: str = "abstract"

    def tail(self, x):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def quantile(self, p):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-transform draw(s): ``quantile(U)`` with ``U = rng.random()``."""
        u = rng.random(size)
        return self._inverse(u)

    def _inverse(self, u):
        raise NotImplementedError


@dataclass(frozen=True)
class ParetoShifted(HeavyTailDistribution):
    """Pareto law shifted to start at zero.

    ``tail(x) = (1 + x)^(-alpha)`` for ``x >= 0`` and ``1`` for ``x < 0``;
    ``density(x) = alpha (1 + x)^(-alpha - 1)`` on ``[0, inf)``.

    Scalars are evaluated with Python floats so that results agree bit for
    bit with the compiled sampling kernels; arrays go through numpy.
    """

    alpha: float
    kind: str = "pareto_shifted"

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha!r}")

    def tail(self, x):
        if np.ndim(x) == 0:
            x = float(x)
            return 1.0 if x < 0 else (1.0 + x) ** (-self.alpha)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, np.power(1.0 + np.maximum(x, 0.0), -self.alpha))

    def log_tail(self, x):
        if np.ndim(x) == 0:
            x = float(x)
            return 0.0 if x < 0 else -self.alpha * math.log1p(x)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, -self.alpha * np.log1p(np.maximum(x, 0.0)))

    def density(self, x):
        a = self.alpha
        if np.ndim(x) == 0:
            x = float(x)
            return 0.0 if x < 0 else a * (1.0 + x) ** (-a - 1.0)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, a * np.power(1.0 + np.maximum(x, 0.0), -a - 1.0))

    def log_density(self, x):
        a = self.alpha
        if np.ndim(x) == 0:
            x = float(x)
            return -math.inf if x < 0 else math.log(a) - (a + 1.0) * math.log1p(x)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x < 0, -np.inf, math.log(a) - (a + 1.0) * np.log1p(np.maximum(x, 0.0)))

    def quantile(self, p):
        """Return ``x`` with ``tail(x) = 1 - p``; ``p`` must lie in (0, 1)."""
        p_arr = np.asarray(p, dtype=float)
        if np.any(~((p_arr > 0) & (p_arr < 1))):
            raise ValueError(f"quantile level must lie in (0, 1), got {p!r}")
        return self._inverse(p)

    def _inverse(self, u):
        if np.ndim(u) == 0:
            return (1.0 - float(u)) ** (-1.0 / self.alpha) - 1.0
        u = np.asarray(u, dtype=float)
        return np.power(1.0 - u, -1.0 / self.alpha) - 1.0

    def conditional_mean_above(self, b: float) -> float:
        """``E[Z | Z > b]`` for ``b >= 0``; finite only when ``alpha > 1``."""
        if self.alpha <= 1:
            return math.inf
        return (1.0 + b) * self.alpha / (self.alpha - 1.0) - 1.0

    @property
    def mean(self) -> float:
        return 1.0 / (self.alpha - 1.0) if self.alpha > 1 else math.inf
