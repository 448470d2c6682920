"""Importance-sampling tail e.d.f., its quantile inverse and expected shortfall.

For weighted samples ``(x_i, w_i)``, ``i = 1..N``, the tail function is

    T(t) = (1/N) * sum_i w_i I{x_i > t}

VaR at level ``p`` is ``inf{x : T(x) <= 1 - p}`` and expected shortfall is
the average of that quantile function over ``(p, 1)``. Both are evaluated
exactly on the step function.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .samplers import WeightedSampleSet


class MassDeficitWarning(RuntimeWarning):
    """Total weighted mass is at most ``1 - p``; the quantile was clamped."""


@dataclass(frozen=True)
class WeightedTailEdf:
    """Step function ``T`` stored at its distinct jump points.

    ``tail_mass[k] = T(points[k])``; ``total_mass = T(-inf)``.
    """

    points: np.ndarray
    tail_mass: np.ndarray
    total_mass: float
    n_samples: int

    def tail(self, t):
        """Evaluate ``T(t)``; ``t`` may be an array."""
        idx = np.searchsorted(self.points, t, side="right") - 1
        ext = np.concatenate(([self.total_mass], self.tail_mass))
        out = ext[np.asarray(idx) + 1]
        return float(out) if np.ndim(out) == 0 else out

    def to_csv(self, path) -> None:
        """Write ``value,tail_mass`` rows; the first data row is ``-inf`` -> ``T(-inf)``."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# n_samples={self.n_samples}\n")
            wr = csv.writer(fh)
            wr.writerow(["value", "tail_mass"])
            wr.writerow(["-inf", repr(float(self.total_mass))])
            for x, m in zip(self.points.tolist(), self.tail_mass.tolist()):
                wr.writerow([repr(x), repr(m)])

    @classmethod
    def from_csv(cls, path) -> "WeightedTailEdf":
        text = Path(path).read_text().splitlines()
        n_samples = 0
        if text and text[0].startswith("#"):
            n_samples = int(text[0].split("=", 1)[1])
            text = text[1:]
        rows = list(csv.DictReader(text))
        total = float(rows[0]["tail_mass"])
        pts = np.array([float(r["value"]) for r in rows[1:]])
        mass = np.array([float(r["tail_mass"]) for r in rows[1:]])
        return cls(pts, mass, total, n_samples)


@dataclass(frozen=True)
class RiskEstimate:
    var_p: float
    es_p: float
    level_p: float
    warnings: tuple[str, ...] = field(default=())


def build(samples: WeightedSampleSet, n: int | None = None) -> WeightedTailEdf:
    """Aggregate ties and accumulate weights in one descending pass.

    ``n`` overrides the normaliser (defaults to the sample count).
    """
    if len(samples) < 1:
        raise ValueError("at least one sample is required")
    n = len(samples) if n is None else int(n)
    pts, inv = np.unique(samples.values, return_inverse=True)
    agg = np.bincount(inv.ravel(), weights=samples.weights, minlength=pts.size)
    above = np.cumsum(agg[::-1])[::-1]  # sum of weights at or above each point
    tail = np.empty_like(above)
    tail[:-1] = above[1:]
    tail[-1] = 0.0
    w = samples.weights
    # shifted compensated sum: T(-inf) is exact when all weights are equal
    total = float(w[0]) * (w.size / n) + math.fsum((w - w[0]).tolist()) / n
    return WeightedTailEdf(pts, tail / n, total, n)


def _quantile_index(edf: WeightedTailEdf, p: float) -> tuple[int, bool]:
    if not 0 < p < 1:
        raise ValueError(f"level p must lie in (0, 1), got {p!r}")
    r = 1.0 - p
    deficit = edf.total_mass <= r
    # tail_mass is non-increasing, so -tail_mass is sorted ascending
    k = int(np.searchsorted(-edf.tail_mass, -r, side="left"))
    return (0 if deficit else k), deficit


def var_estimate(edf: WeightedTailEdf, p: float) -> float:
    """Smallest jump point ``x`` with ``T(x) <= 1 - p``."""
    k, deficit = _quantile_index(edf, p)
    if deficit:
        warnings.warn(f"weighted mass {edf.total_mass:.6g} <= 1 - p; VaR clamped to the minimum sample",
                      MassDeficitWarning, stacklevel=2)
    return float(edf.points[k])


def _es(edf: WeightedTailEdf, p: float) -> tuple[float, bool]:
    if not 0 < p < 1:
        raise ValueError(f"level p must lie in (0, 1), got {p!r}")
    r = 1.0 - p
    # The quantile function equals points[k] for tail levels in
    # [T(points[k]), T(points[k-1])); clip both ends at r.
    upper = np.minimum(np.concatenate(([edf.total_mass], edf.tail_mass[:-1])), r)
    lower = np.minimum(edf.tail_mass, r)
    lengths = upper - lower
    nz = lengths > 0
    terms = (edf.points[nz] * lengths[nz]).tolist()
    deficit = edf.total_mass < r
    if deficit:
        terms.append(float(edf.points[0]) * (r - edf.total_mass))
    return math.fsum(terms) / r, bool(edf.total_mass <= r)


def es_estimate(edf: WeightedTailEdf, p: float) -> float:
    """``(1/(1-p)) * integral_p^1 q(u) du`` for the step quantile function ``q``."""
    value, deficit = _es(edf, p)
    if deficit:
        warnings.warn(f"weighted mass {edf.total_mass:.6g} <= 1 - p; quantile clamped below",
                      MassDeficitWarning, stacklevel=2)
    return value


def risk_estimate(edf: WeightedTailEdf, p: float) -> RiskEstimate:
    k, deficit = _quantile_index(edf, p)
    es, _ = _es(edf, p)
    flags = ("mass_deficit",) if deficit else ()
    return RiskEstimate(float(edf.points[k]), es, p, flags)


def empirical_rho(samples: WeightedSampleSet, tail_fn: Callable[[float], float], x: float, y: float) -> float:
    """Sample version of ``N Cov(T(x), T(y)) = E w^2 I{X > max(x, y)} - F(x) F(y)``.

    ``tail_fn`` supplies the reference tail ``P(X > t)``.
    """
    m = max(x, y)
    second = float(np.mean(np.where(samples.values > m, samples.weights**2, 0.0)))
    return second - tail_fn(x) * tail_fn(y)


def _ratio_terms(samples, c, lam, tail_fn):
    if c <= 0 or lam <= 0:
        raise ValueError("c and lambda must be positive")
    ref = tail_fn(lam)
    return np.where(samples.values > c * lam, samples.weights**2, 0.0) / ref**2


def second_moment_ratio(samples: WeightedSampleSet, c: float, lam: float, tail_fn) -> float:
    """Monte Carlo estimate of ``E w^2 I{X > c lam} / P(X > lam)^2``."""
    return float(np.mean(_ratio_terms(samples, c, lam, tail_fn)))


def second_moment_ratio_se(samples: WeightedSampleSet, c: float, lam: float, tail_fn) -> float:
    """Standard error of :func:`second_moment_ratio`."""
    terms = _ratio_terms(samples, c, lam, tail_fn)
    if terms.size < 2:
        return math.inf
    return float(np.std(terms, ddof=1) / math.sqrt(terms.size))
