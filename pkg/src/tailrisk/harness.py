"""Replicated VaR / ES / tail-probability experiments and brute-force oracles."""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .asymptotics import AsymptoticContext, asymptotic_quantile
from .dist import ParetoShifted
from .edf import build, risk_estimate
from .samplers import Algorithm, ConfigError, MixtureConfig, batch
from .streams import substream

REFERENCE_N = 50_000
REFERENCE_REPS = 100


class Mode(str, enum.Enum):
    VAR = "VaR"
    ES = "ES"
    TAIL_PROB = "TailProb"

    @classmethod
    def parse(cls, name: "str | Mode") -> "Mode":
        if isinstance(name, cls):
            return name
        for m in cls:
            if m.value.lower() == str(name).strip().lower():
                return m
        raise ConfigError(f"unknown mode {name!r}; choose from {[m.value for m in cls]}")


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float
    n: int
    levels: tuple[float, ...]
    algorithm: Algorithm = Algorithm.CONDITIONAL
    N: int = 10_000
    reps: int = 100
    seed: int = 0
    mode: Mode = Mode.VAR
    a: float | None = None
    sigma: float | None = None
    mix_p: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm.parse(self.algorithm))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "levels", tuple(float(p) for p in self.levels))
        if self.mix_p is not None:
            object.__setattr__(self, "mix_p", tuple(float(x) for x in self.mix_p))
        if self.reps < 1 or self.N < 1:
            raise ConfigError("reps and N must be at least 1")
        if not self.levels or any(not 0 < p < 1 for p in self.levels):
            raise ConfigError("levels must be a non-empty list of values in (0, 1)")
        self.mixture(1.0)  # validates mixture parameters

    @property
    def dist(self) -> ParetoShifted:
        return ParetoShifted(self.alpha)

    def mixture(self, lam: float) -> MixtureConfig:
        kw = {}
        if self.a is not None:
            kw["a"] = self.a
        if self.sigma is not None:
            kw["sigma"] = self.sigma
        return MixtureConfig(self.algorithm, self.n, lam=lam, mix_p=self.mix_p, **kw)

    def anchor(self, p: float) -> float:
        """Change-of-measure level ``u_p`` for level ``p``."""
        return asymptotic_quantile(AsymptoticContext(self.dist, self.n), p)

    def replace(self, **changes) -> "ExperimentConfig":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(changes)
        return ExperimentConfig(**d)


@dataclass(frozen=True)
class LevelResult:
    p: float
    anchor: float
    mean: float
    std: float
    avg_time_s: float
    values: tuple[float, ...]
    mass_deficits: int = 0

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(len(self.values)) if len(self.values) > 1 else math.nan


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    levels: tuple[LevelResult, ...]

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_csv(self, timing: bool = False) -> str:
        """One row per level; ``values`` holds every replication, space separated.

        Wall-clock timing is opt-in so that a fixed config and seed always
        produce identical bytes.
        """
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        head = ["p", "one_minus_p", "anchor", "mean", "std", "reps", "mass_deficits", "values"]
        if timing:
            head.insert(5, "avg_time_s")
        wr.writerow(head)
        for r in self.levels:
            row = [repr(r.p), repr(1.0 - r.p), repr(r.anchor), repr(r.mean), repr(r.std),
                   len(r.values), r.mass_deficits, " ".join(repr(v) for v in r.values)]
            if timing:
                row.insert(5, repr(r.avg_time_s))
            wr.writerow(row)
        return buf.getvalue()

    def to_table(self) -> str:
        c = self.config
        lines = [
            f"alpha={c.alpha:g} n={c.n} algorithm={c.algorithm.value} mode={c.mode.value} "
            f"N={c.N} reps={c.reps} seed={c.seed}",
            f"{'1-p':>10} {'anchor':>12} {'Avg. est.':>12} {'(Std. dev.)':>12} {'[Avg. time (s)]':>16}",
        ]
        for r in self.levels:
            lines.append(
                f"{1.0 - r.p:>10.0e} {r.anchor:>12.5g} {r.mean:>12.5g} {'(' + format(r.std, '.4g') + ')':>12} "
                f"{'[' + format(r.avg_time_s, '.3f') + ']':>16}"
            )
        return "\n".join(lines)


def parse_report_csv(text: str) -> list[dict]:
    """Inverse of :meth:`ExperimentReport.to_csv` (numeric fields only)."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({
            "p": float(row["p"]),
            "one_minus_p": float(row["one_minus_p"]),
            "anchor": float(row["anchor"]),
            "mean": float(row["mean"]),
            "std": float(row["std"]),
            "avg_time_s": float(row["avg_time_s"]) if "avg_time_s" in row else math.nan,
            "reps": int(row["reps"]),
            "mass_deficits": int(row["mass_deficits"]),
            "values": tuple(float(v) for v in row["values"].split()),
        })
    return rows


def _replicate(cfg: ExperimentConfig, level_idx: int, rep: int, backend):
    p = cfg.levels[level_idx]
    d = cfg.dist
    lam = cfg.anchor(p)
    rng = substream(cfg.seed, level_idx, rep)
    t0 = time.perf_counter()
    samples = batch(d, cfg.mixture(lam), cfg.N, rng, backend)
    edf = build(samples)
    if cfg.mode is Mode.TAIL_PROB:
        value, deficit = edf.tail(lam), False
    else:
        est = risk_estimate(edf, p)
        value = est.var_p if cfg.mode is Mode.VAR else est.es_p
        deficit = bool(est.warnings)
    return value, time.perf_counter() - t0, deficit


def run_experiment(cfg: ExperimentConfig, workers: int = 1, backend: str | None = None) -> ExperimentReport:
    """Run ``reps`` independent replications per level and aggregate.

    Replication ``r`` at level index ``j`` draws from ``substream(seed, j, r)``,
    so results do not depend on ``workers``.
    """
    tasks = [(j, r) for j in range(len(cfg.levels)) for r in range(cfg.reps)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda jr: _replicate(cfg, jr[0], jr[1], backend), tasks))
    else:
        results = [_replicate(cfg, j, r, backend) for j, r in tasks]
    by_task = dict(zip(tasks, results))

    levels = []
    for j, p in enumerate(cfg.levels):
        vals = [by_task[(j, r)][0] for r in range(cfg.reps)]
        times = [by_task[(j, r)][1] for r in range(cfg.reps)]
        deficits = sum(by_task[(j, r)][2] for r in range(cfg.reps))
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        levels.append(LevelResult(
            p=p, anchor=cfg.anchor(p), mean=statistics.fmean(vals), std=std,
            avg_time_s=statistics.fmean(times), values=tuple(vals), mass_deficits=deficits,
        ))
    return ExperimentReport(cfg, tuple(levels))


def reference_value(
    cfg: ExperimentConfig,
    N: int = REFERENCE_N,
    reps: int = REFERENCE_REPS,
    workers: int = 1,
    backend: str | None = None,
) -> float:
    """Mean of ``reps`` conditional-mixture estimates with ``N`` samples each.

    Uses ``cfg``'s level (exactly one), mode, mixture parameters and seed;
    the algorithm is always the conditional mixture.
    """
    if len(cfg.levels) != 1:
        raise ConfigError("reference_value expects a config with exactly one level")
    ref = cfg.replace(algorithm=Algorithm.CONDITIONAL, N=N, reps=reps)
    return run_experiment(ref, workers=workers, backend=backend).levels[0].mean


# -------------------------------------------------------------------- oracles


class OracleError(RuntimeError):
    pass


def oracle_tail_n2(d: ParetoShifted, lam: float, rtol: float = 1e-9) -> float:
    """``P(Z_1 + Z_2 > lam) = integral_0^lam f(z) P(Z > lam - z) dz + P(Z > lam)`` by quadrature."""
    if lam <= 0:
        return 1.0

    def integrand(z):
        return d.density(z) * d.tail(lam - z)

    parts = []
    # mass concentrates near both ends; split at the midpoint
    for lo, hi in ((0.0, lam / 2), (lam / 2, lam)):
        val, err = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol / 10, limit=500)
        if not math.isfinite(val) or err > rtol * abs(val):
            raise OracleError(f"quadrature did not converge on [{lo}, {hi}] (err={err:.3g})")
        parts.append(val)
    return math.fsum(parts) + d.tail(lam)


def oracle_quantile_n2(d: ParetoShifted, p: float, rtol: float = 1e-12) -> float:
    """Invert :func:`oracle_tail_n2` by bisection."""
    if not 0 < p < 1:
        raise ValueError(f"level p must lie in (0, 1), got {p!r}")
    target = 1.0 - p
    # S_2 > x forces max(Z_1, Z_2) > x/2, so P(S_2 > hi) <= 2 P(Z > hi/2) = target
    hi = 2.0 * d.quantile(1.0 - target / 2.0)
    g = lambda x: oracle_tail_n2(d, x) - target  # noqa: E731
    if g(0.0) < 0 or g(hi) > 0:
        raise OracleError("failed to bracket the quantile")
    if g(hi) == 0:
        return hi
    return optimize.bisect(g, 0.0, hi, xtol=1e-300, rtol=rtol, maxiter=2000)


# --------------------------------------------------------------- table layout


@dataclass(frozen=True)
class TableLayout:
    alpha: float
    mode: Mode
    ns: tuple[int, ...] = (10, 30)
    tail_levels: tuple[float, ...] = (1e-2, 1e-3, 1e-5)


TABLES = {
    1: TableLayout(2.0, Mode.VAR),
    2: TableLayout(3.0, Mode.VAR),
    3: TableLayout(2.0, Mode.ES),
    4: TableLayout(3.0, Mode.ES),
}

TABLE_COLUMNS = (
    "n", "one_minus_p", "true_value", "approx", "sm_mean", "sm_std",
    "dlw_mean", "dlw_std", "mc_mean", "mc_std", "avg_time_s",
)


@dataclass
class TableRow:
    n: int
    one_minus_p: float
    true_value: float
    approx: float
    sm_mean: float
    sm_std: float
    dlw_mean: float
    dlw_std: float
    mc_mean: float
    mc_std: float
    avg_time_s: float
    times: dict = field(default_factory=dict, compare=False)

    def as_csv_row(self) -> list[str]:
        return [str(self.n)] + [repr(float(getattr(self, c))) for c in TABLE_COLUMNS[1:]]


def table_cell_config(table_id: int, n: int, tail_level: float, algorithm, N: int, reps: int, seed: int,
                      **mixture) -> ExperimentConfig:
    layout = TABLES[table_id]
    return ExperimentConfig(
        alpha=layout.alpha, n=n, levels=(1.0 - tail_level,), algorithm=algorithm,
        N=N, reps=reps, seed=seed, mode=layout.mode, **mixture,
    )


def reproduce_table(
    table_id: int,
    N: int = 10_000,
    reps: int = 100,
    seed: int = 0,
    reference_N: int = REFERENCE_N,
    reference_reps: int = REFERENCE_REPS,
    workers: int = 1,
    backend: str | None = None,
    with_reference: bool = True,
) -> list[TableRow]:
    """Fill every cell of one table layout: reference, approximation, SM, DLW, MC."""
    if table_id not in TABLES:
        raise ConfigError(f"unknown table id {table_id}; choose from {sorted(TABLES)}")
    layout = TABLES[table_id]
    rows = []
    for n in layout.ns:
        for r in layout.tail_levels:
            out = {}
            for tag, alg in (("sm", Algorithm.SCALING), ("dlw", Algorithm.CONDITIONAL), ("mc", Algorithm.STANDARD)):
                cfg = table_cell_config(table_id, n, r, alg, N, reps, seed)
                out[tag] = run_experiment(cfg, workers=workers, backend=backend).levels[0]
            if with_reference:
                ref_cfg = table_cell_config(table_id, n, r, Algorithm.CONDITIONAL, N, reps, seed ^ 0x5EED)
                true_value = reference_value(ref_cfg, reference_N, reference_reps, workers, backend)
            else:
                true_value = math.nan
            approx = cfg.anchor(1.0 - r) if layout.mode is Mode.VAR else math.nan
            times = {k: v.avg_time_s for k, v in out.items()}
            rows.append(TableRow(
                n=n, one_minus_p=r, true_value=true_value, approx=approx,
                sm_mean=out["sm"].mean, sm_std=out["sm"].std,
                dlw_mean=out["dlw"].mean, dlw_std=out["dlw"].std,
                mc_mean=out["mc"].mean, mc_std=out["mc"].std,
                avg_time_s=statistics.fmean(times.values()), times=times,
            ))
    return rows


def table_to_csv(rows: Sequence[TableRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(TABLE_COLUMNS)
    for row in rows:
        wr.writerow(row.as_csv_row())
    return buf.getvalue()


def parse_table_csv(text: str) -> list[TableRow]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        vals = {c: float(rec[c]) for c in TABLE_COLUMNS[1:]}
        out.append(TableRow(n=int(rec["n"]), **vals))
    return out


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "-"
    return f"{x:.5g}" if abs(x) >= 1e-4 else f"{x:.3e}"


def table_to_text(table_id: int, rows: Sequence[TableRow]) -> str:
    """Aligned text in the layout ``n | 1-p | True | Approx. | SM | DLW | MC``."""
    layout = TABLES[table_id]
    head = ["n", "1-p", "True", "Approx.", "SM", "DLW", "MC", ""]
    widths = [4, 7, 10, 10, 10, 10, 10, 16]
    fmt_row = lambda cells: " ".join(str(c).rjust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    title = (f"Table {table_id}: {'VaR' if layout.mode is Mode.VAR else 'ES'} of S_n, "
             f"P(Z > x) = (1 + x)^-{layout.alpha:g}")
    lines = [title, fmt_row(head), "-" * (sum(widths) + len(widths) - 1)]
    for row in rows:
        lines.append(fmt_row([row.n, f"{row.one_minus_p:.0e}", _fmt(row.true_value), _fmt(row.approx),
                              _fmt(row.sm_mean), _fmt(row.dlw_mean), _fmt(row.mc_mean), "Avg. est."]))
        lines.append(fmt_row(["", "", "", "", f"({row.sm_std:.4g})", f"({row.dlw_std:.4g})",
                              f"({row.mc_std:.4g})", "(Std. dev.)"]))
        if row.times:
            lines.append(fmt_row(["", "", "", "", *(f"[{row.times[k]:.3f}]" for k in ("sm", "dlw", "mc")),
                                  "[Avg. time (s)]"]))
    return "\n".join(lines)


def default_workers() -> int:
    return os.cpu_count() or 1


def config_as_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["algorithm"] = cfg.algorithm.value
    d["mode"] = cfg.mode.value
    d["levels"] = list(cfg.levels)
    return d
