"""Path-generation kernels for random walks with shifted-Pareto increments.

Every kernel turns a matrix of uniforms into ``(values, weights)``. Two
implementations exist per algorithm:

* ``*_nb``: per-path loops compiled with ``numba.njit``;
* ``*_np``: the same recursion vectorised across paths with numpy.

The backend is chosen by the ``TAILRISK_BACKEND`` environment variable
(``numba`` or ``numpy``), read at import time. Without numba installed the
numpy path is used. Both backends consume identical uniforms, so they agree
up to last-bit differences in ``pow``/``log``/``exp``.

Uniform layout per path (one row of ``u``):

* standard Monte Carlo: ``n`` columns, one increment uniform per step;
* mixtures: ``2 n`` columns; step ``i`` reads its branch selector from
  column ``2 i`` and its increment uniform from column ``2 i + 1``. The
  selector is consumed even when unused, so the layout never shifts.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _default_backend() -> str:
    env = os.environ.get("TAILRISK_BACKEND", "").strip().lower()
    if env in ("numpy", "python", "0", "off"):
        return "numpy"
    if env not in ("", "numba", "1", "on"):
        raise ValueError(f"TAILRISK_BACKEND must be 'numba' or 'numpy', got {env!r}")
    return "numba" if HAVE_NUMBA else "numpy"


DEFAULT_BACKEND = _default_backend()


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# ---------------------------------------------------------------- numba path


@_njit
def standard_paths_nb(u, alpha, out_value, out_weight):
    inv = -1.0 / alpha
    n_paths, n = u.shape
    for k in range(n_paths):
        s = 0.0
        for i in range(n):
            s += (1.0 - u[k, i]) ** inv - 1.0
        out_value[k] = s
        out_weight[k] = 1.0


@_njit
def conditional_paths_nb(u, alpha, lam, a, p, out_value, out_weight):
    inv = -1.0 / alpha
    n_paths = u.shape[0]
    n = u.shape[1] // 2
    for k in range(n_paths):
        s = 0.0
        logw = 0.0
        for i in range(n - 1):
            sel = u[k, 2 * i]
            v = (1.0 - u[k, 2 * i + 1]) ** inv
            if s > lam:
                s += v - 1.0
                continue
            t = a * (lam - s)
            if sel < p[i]:
                z = v - 1.0
            else:
                z = (1.0 + t) * v - 1.0
            if z > t:
                tail_t = (1.0 + t) ** (-alpha)
                logw += math.log(tail_t / (p[i] * tail_t + (1.0 - p[i])))
            else:
                logw -= math.log(p[i])
            s += z
        v = (1.0 - u[k, 2 * n - 1]) ** inv
        last = 1.0
        if s > lam:
            s += v - 1.0
        else:
            t = lam - s
            s += (1.0 + t) * v - 1.0
            last = (1.0 + t) ** (-alpha)
        out_value[k] = s
        out_weight[k] = math.exp(logw) * last


@_njit
def scaling_paths_nb(u, alpha, lam, a, sigma, p, out_value, out_weight):
    inv = -1.0 / alpha
    scale = sigma * lam
    log_scale = math.log(scale)
    ap1 = alpha + 1.0
    n_paths = u.shape[0]
    n = u.shape[1] // 2
    gate = lam - lam * (1.0 - a) ** (n - 1)
    for k in range(n_paths):
        s = 0.0
        logw = 0.0
        for i in range(n - 1):
            sel = u[k, 2 * i]
            zf = (1.0 - u[k, 2 * i + 1]) ** inv - 1.0
            if s > lam:
                s += zf
                continue
            z = zf
            if sel >= p[i] and zf > 0.0:
                z = scale * zf
            if z > 0.0:
                # g(z) / f(z) for the scaled component
                ratio = math.exp(-log_scale - ap1 * (math.log1p(z / scale) - math.log1p(z)))
                logw -= math.log(p[i] + (1.0 - p[i]) * ratio)
            s += z
        zf = (1.0 - u[k, 2 * n - 1]) ** inv - 1.0
        if s <= gate and zf > 0.0:
            z = scale * zf
            logw += log_scale + ap1 * (math.log1p(z / scale) - math.log1p(z))
            s += z
        else:
            s += zf
        out_value[k] = s
        out_weight[k] = math.exp(logw)


# ---------------------------------------------------------------- numpy path


def standard_paths_np(u, alpha, out_value, out_weight):
    n = u.shape[1]
    s = np.zeros(u.shape[0])
    for i in range(n):
        s += np.power(1.0 - u[:, i], -1.0 / alpha) - 1.0
    out_value[:] = s
    out_weight[:] = 1.0


def conditional_paths_np(u, alpha, lam, a, p, out_value, out_weight):
    inv = -1.0 / alpha
    n_paths = u.shape[0]
    n = u.shape[1] // 2
    s = np.zeros(n_paths)
    logw = np.zeros(n_paths)
    for i in range(n - 1):
        sel = u[:, 2 * i]
        v = np.power(1.0 - u[:, 2 * i + 1], inv)
        active = s <= lam
        t = np.where(active, a * (lam - s), 0.0)
        big = active & (sel >= p[i])
        z = np.where(big, (1.0 + t) * v - 1.0, v - 1.0)
        tail_t = np.power(1.0 + t, -alpha)
        jump = np.log(tail_t / (p[i] * tail_t + (1.0 - p[i])))
        logw += np.where(active, np.where(z > t, jump, -math.log(p[i])), 0.0)
        s += z
    v = np.power(1.0 - u[:, 2 * n - 1], inv)
    active = s <= lam
    t = np.where(active, lam - s, 0.0)
    last = np.where(active, np.power(1.0 + t, -alpha), 1.0)
    out_value[:] = s + (1.0 + t) * v - 1.0
    out_weight[:] = np.exp(logw) * last


def scaling_paths_np(u, alpha, lam, a, sigma, p, out_value, out_weight):
    inv = -1.0 / alpha
    scale = sigma * lam
    log_scale = math.log(scale)
    ap1 = alpha + 1.0
    n_paths = u.shape[0]
    n = u.shape[1] // 2
    gate = lam - lam * (1.0 - a) ** (n - 1)
    s = np.zeros(n_paths)
    logw = np.zeros(n_paths)
    for i in range(n - 1):
        sel = u[:, 2 * i]
        zf = np.power(1.0 - u[:, 2 * i + 1], inv) - 1.0
        active = s <= lam
        z = np.where(active & (sel >= p[i]) & (zf > 0.0), scale * zf, zf)
        log_ratio = -log_scale - ap1 * (np.log1p(z / scale) - np.log1p(z))
        step = -np.log(p[i] + (1.0 - p[i]) * np.exp(log_ratio))
        logw += np.where(active & (z > 0.0), step, 0.0)
        s += z
    zf = np.power(1.0 - u[:, 2 * n - 1], inv) - 1.0
    inside = (s <= gate) & (zf > 0.0)
    z = np.where(inside, scale * zf, zf)
    logw += np.where(inside, log_scale + ap1 * (np.log1p(z / scale) - np.log1p(z)), 0.0)
    out_value[:] = s + z
    out_weight[:] = np.exp(logw)


_KERNELS = {
    "numba": (standard_paths_nb, conditional_paths_nb, scaling_paths_nb),
    "numpy": (standard_paths_np, conditional_paths_np, scaling_paths_np),
}


def _prepare(u, n_cols_per_step):
    u = np.ascontiguousarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] % n_cols_per_step or u.shape[1] == 0:
        raise ValueError(f"uniform matrix has incompatible shape {u.shape}")
    return u, np.empty(u.shape[0]), np.empty(u.shape[0])


def standard_paths(u, alpha, backend=None):
    u, val, w = _prepare(u, 1)
    _KERNELS[resolve_backend(backend)][0](u, float(alpha), val, w)
    return val, w


def conditional_paths(u, alpha, lam, a, p, backend=None):
    u, val, w = _prepare(u, 2)
    p = np.ascontiguousarray(p, dtype=np.float64)
    _KERNELS[resolve_backend(backend)][1](u, float(alpha), float(lam), float(a), p, val, w)
    return val, w


def scaling_paths(u, alpha, lam, a, sigma, p, backend=None):
    u, val, w = _prepare(u, 2)
    p = np.ascontiguousarray(p, dtype=np.float64)
    _KERNELS[resolve_backend(backend)][2](
        u, float(alpha), float(lam), float(a), float(sigma), p, val, w
    )
    return val, w
