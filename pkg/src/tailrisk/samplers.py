"""Weighted samples of ``X = Z_1 + ... + Z_n`` under plain and importance sampling.

Three algorithms share one interface:

``standard``
    Plain Monte Carlo; every weight is exactly 1.
``conditional``
    Conditional mixture: while the running sum ``s`` is at most ``lam``,
    step ``i < n`` draws from ``f`` with probability ``p_i`` and otherwise
    from ``f`` conditioned on exceeding ``a (lam - s)``; the last step is
    conditioned on exceeding ``lam - s``.
``scaling``
    Scaling mixture: the big-jump component multiplies a draw from ``f`` by
    ``sigma * lam``; the last step uses it alone while
    ``s <= lam - lam (1 - a)^(n - 1)``.

Each sample carries the path likelihood ratio ``dmu/dnu`` as its weight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .dist import HeavyTailDistribution, ParetoShifted


class ConfigError(ValueError):
    """Invalid sampler configuration."""


class Algorithm(str, enum.Enum):
    STANDARD = "standard"
    CONDITIONAL = "conditional"
    SCALING = "scaling"

    @classmethod
    def parse(cls, name: "str | Algorithm") -> "Algorithm":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {"mc": "standard", "dlw": "conditional", "sm": "scaling"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ConfigError(f"unknown algorithm {name!r}") from None


DEFAULT_A = 0.95
DEFAULT_SIGMA = 1.0


def default_mix_p(n: int) -> tuple[float, ...]:
    """Per-step probability of drawing from ``f``: ``p_i = (n - i) / (n - i + 1)``.

    With this schedule each of the ``n`` steps is equally likely to carry the
    big jump, which balances the weights of the single-jump paths.
    """
    return tuple((n - i) / (n - i + 1) for i in range(1, n))


@dataclass(frozen=True)
class MixtureConfig:
    algorithm: Algorithm
    n: int
    lam: float = 1.0
    a: float = DEFAULT_A
    sigma: float = DEFAULT_SIGMA
    mix_p: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm.parse(self.algorithm))
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.algorithm is Algorithm.STANDARD:
            return
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError(f"lam must be positive, got {self.lam!r}")
        if not 0 < self.a < 1:
            raise ConfigError(f"a must lie in (0, 1), got {self.a!r}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma!r}")
        mix = default_mix_p(self.n) if self.mix_p is None else tuple(float(x) for x in self.mix_p)
        if len(mix) != self.n - 1:
            raise ConfigError(f"mix_p must have n - 1 = {self.n - 1} entries, got {len(mix)}")
        if any(not 0 < x < 1 for x in mix):
            raise ConfigError("every mix_p entry must lie strictly in (0, 1)")
        object.__setattr__(self, "mix_p", mix)

    @property
    def uniforms_per_path(self) -> int:
        return self.n if self.algorithm is Algorithm.STANDARD else 2 * self.n

    def with_lam(self, lam: float) -> "MixtureConfig":
        return MixtureConfig(self.algorithm, self.n, lam, self.a, self.sigma, self.mix_p)


@dataclass(frozen=True)
class WeightedSample:
    value: float
    weight: float


@dataclass
class WeightedSampleSet:
    """Column storage for ``N`` weighted samples."""

    values: np.ndarray
    weights: np.ndarray
    config: MixtureConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.values.shape != self.weights.shape or self.values.ndim != 1:
            raise ValueError("values and weights must be 1-d arrays of equal length")

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self) -> Iterator[WeightedSample]:
        for v, w in zip(self.values.tolist(), self.weights.tolist()):
            yield WeightedSample(v, w)

    def __getitem__(self, k: int) -> WeightedSample:
        return WeightedSample(float(self.values[k]), float(self.weights[k]))

    def contributions(self, t: float) -> np.ndarray:
        """Per-sample terms ``w I{X > t}`` of the tail-probability estimator."""
        return np.where(self.values > t, self.weights, 0.0)

    def tail_probability(self, t: float) -> float:
        c = self.contributions(t)
        # shifted compensated mean: exact when every contribution is equal
        return float(c[0]) + math.fsum((c - c[0]).tolist()) / c.size

    @classmethod
    def concat(cls, parts: Sequence["WeightedSampleSet"]) -> "WeightedSampleSet":
        return cls(
            np.concatenate([p.values for p in parts]),
            np.concatenate([p.weights for p in parts]),
            parts[0].config if parts else None,
        )


def _check_dist(d: HeavyTailDistribution) -> float:
    if not isinstance(d, ParetoShifted):
        raise NotImplementedError(f"sampling kernels support ParetoShifted only, got {type(d).__name__}")
    return d.alpha


def simulate_from_uniforms(
    d: HeavyTailDistribution, cfg: MixtureConfig, u, backend: str | None = None
) -> WeightedSampleSet:
    """Run the configured algorithm on an explicit ``(N, k)`` uniform matrix.

    ``k`` is ``cfg.uniforms_per_path``; see :mod:`tailrisk.kernels` for the
    column layout.
    """
    alpha = _check_dist(d)
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[1] != cfg.uniforms_per_path:
        raise ConfigError(f"expected {cfg.uniforms_per_path} uniforms per path, got {u.shape[1]}")
    if cfg.algorithm is Algorithm.STANDARD:
        val, w = kernels.standard_paths(u, alpha, backend)
    elif cfg.algorithm is Algorithm.CONDITIONAL:
        val, w = kernels.conditional_paths(u, alpha, cfg.lam, cfg.a, cfg.mix_p, backend)
    else:
        val, w = kernels.scaling_paths(u, alpha, cfg.lam, cfg.a, cfg.sigma, cfg.mix_p, backend)
    return WeightedSampleSet(val, w, cfg)


def batch(
    d: HeavyTailDistribution,
    cfg: MixtureConfig,
    N: int,
    rng: np.random.Generator,
    backend: str | None = None,
) -> WeightedSampleSet:
    """Draw ``N`` independent weighted samples.

    Uniforms are drawn row by row, so ``batch(N)`` yields the same samples as
    ``N`` consecutive single-sample calls on the same generator.
    """
    if N < 1:
        raise ConfigError(f"N must be at least 1, got {N}")
    u = rng.random((int(N), cfg.uniforms_per_path))
    return simulate_from_uniforms(d, cfg, u, backend)


def _one(d, cfg, rng, backend) -> WeightedSample:
    return batch(d, cfg, 1, rng, backend)[0]


def sample_standard(d: HeavyTailDistribution, n: int, rng: np.random.Generator, backend=None) -> WeightedSample:
    return _one(d, MixtureConfig(Algorithm.STANDARD, n), rng, backend)


def sample_conditional_mixture(d, cfg: MixtureConfig, rng, backend=None) -> WeightedSample:
    if cfg.algorithm is not Algorithm.CONDITIONAL:
        raise ConfigError(f"expected a conditional-mixture config, got {cfg.algorithm.value}")
    return _one(d, cfg, rng, backend)


def sample_scaling_mixture(d, cfg: MixtureConfig, rng, backend=None) -> WeightedSample:
    if cfg.algorithm is not Algorithm.SCALING:
        raise ConfigError(f"expected a scaling-mixture config, got {cfg.algorithm.value}")
    return _one(d, cfg, rng, backend)
