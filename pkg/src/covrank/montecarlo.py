"""Seeded Monte Carlo drivers: rank-law sweeps, full-rank frequencies, and
the shifted-kernel condition-number comparison.

Per-trial randomness comes from derived Philox streams, so results are
independent of the degree of parallelism: trial t of a size-k experiment
with master seed q always uses stream ``(k << 32) | t`` of q (auxiliary
draws such as forward-model weights set the top stream bit).  Aggregation
is by trial index.

Rows serialize to CSV and JSON lines with stable column order; floats are
written with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .kernels import Kernel, UnclassifiedKernelError, theoretical_rank
from .manifold import Euclidean, UnitSphere
from .numrank import DEFAULT_TOLERANCE, Tolerance, rank_report
from .tensor import assemble_Y, assemble_Z, outer_field, recover, sigma_field

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "RankLawRow",
    "RecoveryTrial",
    "fullrank_probability",
    "rank_law_sweep",
    "condition_sweep",
    "alpha_recommendation",
    "recovery_experiment",
    "rows_to_csv",
    "rows_to_jsonl",
    "fmt17",
    "sample_stream",
    "aux_stream",
]

# stream-index namespaces; the sample of trial t at size k uses (k << 32) | t
# and auxiliary draws of the same trial set the top bit
_AUX_STREAM_BIT = 1 << 63


def sample_stream(k: int, trial: int) -> int:
    if k >= 1 << 31 or trial >= 1 << 32:
        raise ValueError("k or trial index too large for stream derivation")
    return (k << 32) | trial


def aux_stream(k: int, trial: int) -> int:
    return _AUX_STREAM_BIT | sample_stream(k, trial)


def _map_trials(fn, trials: int, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(trials)))
    return [fn(t) for t in range(trials)]


@dataclass(frozen=True)
class ExperimentConfig:
    manifold: Euclidean | UnitSphere
    kernel: Kernel | None
    k_values: tuple[int, ...]
    trials: int
    seed: int
    tolerance: Tolerance = DEFAULT_TOLERANCE
    region: object = None  # Euclidean sampling box, None = unit cube
    threads: int = 1

    def __post_init__(self):
        ks = tuple(int(k) for k in self.k_values)
        object.__setattr__(self, "k_values", ks)
        if not ks or any(k < 1 for k in ks):
            raise ValueError("k_values must be non-empty with every k >= 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass(frozen=True)
class SweepRow:
    """One (k, alpha) cell of a condition sweep, aggregated over trials.

    Condition numbers are the raw spectral ratios sigma_1 / sigma_min; cells
    far past the double-precision cliff simply report huge ratios the way a
    condition-number table does, while fullrank/borderline fractions carry
    the tolerance-aware verdicts.
    """

    k: int
    alpha: float
    mean_cond: float
    min_cond: float
    max_cond: float
    mean_log_abs_det: float
    fullrank_fraction: float
    borderline_fraction: float


@dataclass(frozen=True)
class RankLawRow:
    """Observed numerical-rank distribution of one system size."""

    system: str
    k: int
    trials: int
    bound: int | None
    expected_rank: int | None
    rank_min: int
    rank_max: int
    equality_fraction: float | None  # among non-borderline trials
    fullrank_fraction: float
    borderline_fraction: float


@dataclass(frozen=True)
class RecoveryTrial:
    trial: int
    k: int
    rel_error: float
    residual: float
    rank_Y: int
    rank_augmented: int
    unique: bool


def fullrank_probability(cfg: ExperimentConfig, k: int) -> float:
    """Fraction of trials whose k x k kernel matrix has numerical rank k."""
    if cfg.kernel is None:
        raise ValueError("config needs a kernel for kernel-matrix experiments")

    def one(trial: int) -> bool:
        sample = cfg.manifold.sample_uniform(
            k, cfg.seed, stream=sample_stream(k, trial), region=cfg.region
        )
        report = rank_report(cfg.kernel.matrix(sample).entries, cfg.tolerance)
        return report.numerical_rank == k

    hits = _map_trials(one, cfg.trials, cfg.threads)
    return float(np.mean(hits))


def _system_bound(cfg: ExperimentConfig, system: str):
    """Upper rank bound and per-k expected generic rank for a system kind."""
    if system in ("Y", "Z"):
        if not isinstance(cfg.manifold, Euclidean):
            raise ValueError("Y/Z rank laws are stated for Euclidean samples only")
        n = cfg.manifold.n
        bound = (n + 1) * (n + 2) // 2 if system == "Y" else n * (n + 2)
        return bound, lambda k: min(k, bound)
    if system == "kernel":
        if cfg.kernel is None:
            raise ValueError("config needs a kernel for kernel-matrix experiments")
        try:
            rc = theoretical_rank(cfg.kernel)
        except UnclassifiedKernelError:
            return None, lambda k: None
        if rc.finite:
            return rc.rank, lambda k: min(k, rc.rank)
        return None, lambda k: k
    raise ValueError(f"unknown system {system!r}; expected 'kernel', 'Y' or 'Z'")


def rank_law_sweep(cfg: ExperimentConfig, system: str = "kernel") -> list[RankLawRow]:
    """Measure numerical ranks across cfg.k_values for one system kind.

    Proven upper bounds are enforced, not just recorded: a trial exceeding
    its bound raises immediately.  Equality with the generic expected rank is
    reported as a fraction of the non-borderline trials.
    """
    bound, expected_for = _system_bound(cfg, system)
    rows = []
    for k in cfg.k_values:

        def one(trial: int, k: int = k):
            sample = cfg.manifold.sample_uniform(
                k, cfg.seed, stream=sample_stream(k, trial), region=cfg.region
            )
            if system == "kernel":
                matrix = cfg.kernel.matrix(sample).entries
            else:
                field = outer_field(cfg.manifold, sample)
                matrix = assemble_Y(field) if system == "Y" else assemble_Z(field)
            report = rank_report(matrix, cfg.tolerance)
            full = report.numerical_rank == min(matrix.shape)
            return report.numerical_rank, report.borderline, full

        results = _map_trials(one, cfg.trials, cfg.threads)
        ranks = np.array([r for r, _, _ in results])
        borderline = np.array([b for _, b, _ in results])
        full = np.array([f for _, _, f in results])
        if bound is not None and ranks.max() > bound:
            raise RuntimeError(
                f"{system} system exceeded its proven rank bound: "
                f"rank {ranks.max()} > {bound} at k={k}"
            )
        expected = expected_for(k)
        solid = ~borderline
        equality = None
        if expected is not None and solid.any():
            equality = float(np.mean(ranks[solid] == expected))
        rows.append(
            RankLawRow(
                system=system,
                k=k,
                trials=cfg.trials,
                bound=bound,
                expected_rank=expected,
                rank_min=int(ranks.min()),
                rank_max=int(ranks.max()),
                equality_fraction=equality,
                fullrank_fraction=float(np.mean(full)),
                borderline_fraction=float(np.mean(borderline)),
            )
        )
    return rows


def condition_sweep(
    manifold: Euclidean | UnitSphere,
    alphas: Sequence[float],
    k_values: Sequence[int],
    trials: int,
    seed: int,
    tolerance: Tolerance = DEFAULT_TOLERANCE,
    region=None,
    threads: int = 1,
) -> list[SweepRow]:
    """Condition statistics of the shifted squared-distance matrices (d - alpha)^2.

    All alphas are evaluated on the same per-trial samples, so rows differing
    only in alpha are paired comparisons.  Row order: alphas outer, k inner.
    """
    alphas = [float(a) for a in alphas]
    k_values = [int(k) for k in k_values]
    if not alphas or not k_values:
        raise ValueError("need at least one alpha and one k")

    def one(args):
        k, trial = args
        sample = manifold.sample_uniform(k, seed, stream=sample_stream(k, trial), region=region)
        dist = manifold.distance_matrix(sample.points, sample.points)
        np.fill_diagonal(dist, 0.0)
        cell = {}
        for alpha in alphas:
            entries = (dist - alpha) ** 2
            s = np.linalg.svd(entries, compute_uv=False)
            tol = tolerance.threshold(entries.shape, float(s[0]))
            cond = float("inf") if s[-1] == 0.0 else float(s[0] / s[-1])
            logdet = float("-inf") if s[-1] == 0.0 else float(np.sum(np.log(s)))
            rank = int(np.count_nonzero(s > tol))
            borderline = bool(tol > 0 and np.any((s > tol / 10) & (s < tol * 10)))
            cell[alpha] = (cond, logdet, rank == k, borderline)
        return cell

    per_k = {}
    for k in k_values:
        results = _map_trials(lambda t, k=k: one((k, t)), trials, threads)
        per_k[k] = results

    rows = []
    for alpha in alphas:
        for k in k_values:
            conds = np.array([cell[alpha][0] for cell in per_k[k]])
            logdets = np.array([cell[alpha][1] for cell in per_k[k]])
            full = np.array([cell[alpha][2] for cell in per_k[k]])
            borderline = np.array([cell[alpha][3] for cell in per_k[k]])
            rows.append(
                SweepRow(
                    k=k,
                    alpha=alpha,
                    mean_cond=float(np.mean(conds)),
                    min_cond=float(np.min(conds)),
                    max_cond=float(np.max(conds)),
                    mean_log_abs_det=float(np.mean(logdets)),
                    fullrank_fraction=float(np.mean(full)),
                    borderline_fraction=float(np.mean(borderline)),
                )
            )
    return rows


def alpha_recommendation(
    manifold: Euclidean | UnitSphere, trials: int, seed: int, region=None
) -> float:
    """Estimated E d(X, Y) for uniform X, Y: the shift minimizing E (d - alpha)^2.

    On the unit sphere the exact value is pi/2 in every dimension.
    """
    return manifold.expected_distance(trials, seed, region=region)


def recovery_experiment(
    manifold: Euclidean | UnitSphere,
    k: int,
    trials: int,
    seed: int,
    tolerance: Tolerance = DEFAULT_TOLERANCE,
    region=None,
    threads: int = 1,
) -> list[RecoveryTrial]:
    """Forward-generate f0 ~ Unif[0,1]^k, build its covariance field, solve back."""
    from .manifold import rng_stream

    def one(trial: int) -> RecoveryTrial:
        sample = manifold.sample_uniform(k, seed, stream=sample_stream(k, trial), region=region)
        f0 = rng_stream(seed, aux_stream(k, trial)).random(k)
        field = outer_field(manifold, sample)
        result = recover(field, sigma_field(field, f0), tolerance)
        rel = float(np.linalg.norm(result.f_hat - f0) / np.linalg.norm(f0))
        return RecoveryTrial(
            trial=trial,
            k=k,
            rel_error=rel,
            residual=result.residual,
            rank_Y=result.rank_Y,
            rank_augmented=result.rank_augmented,
            unique=result.unique,
        )

    return _map_trials(one, trials, threads)


# --- row serialization -------------------------------------------------


def fmt17(value) -> str:
    """Render one scalar for CSV: 17 significant digits for floats."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(value)


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "NaN"  # json module convention, round-trips via json.loads
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return f"{x:.17g}"
    return json.dumps(value)


def _row_items(row):
    return [(f.name, getattr(row, f.name)) for f in fields(row)]


def rows_to_csv(rows: Iterable) -> str:
    rows = list(rows)
    if not rows:
        return ""
    header = ",".join(name for name, _ in _row_items(rows[0]))
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt17(v) for _, v in _row_items(row)))
    return "\n".join(lines) + "\n"


def rows_to_jsonl(rows: Iterable) -> str:
    lines = []
    for row in rows:
        body = ", ".join(f'"{name}": {_json_scalar(v)}' for name, v in _row_items(row))
        lines.append("{" + body + "}")
    return "\n".join(lines) + ("\n" if lines else "")
