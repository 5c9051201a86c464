"""SVD-based rank, conditioning, and minimum-norm least-squares measurements.

Numerical rank counts singular values above a tolerance.  The default policy
is the usual relative one, tau = max(m, n) * eps * sigma_1; an absolute
threshold is available for callers that know their scale.  Reports flag
decisions as borderline when any singular value lands within a factor of 10
of the threshold, so experiment drivers can report ambiguity instead of
silently misclassifying.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Tolerance",
    "RankReport",
    "LeastSquaresSolution",
    "rank_report",
    "solve_least_squares",
]


@dataclass(frozen=True)
class Tolerance:
    """Threshold policy for deciding which singular values count as nonzero."""

    mode: str = "relative"
    value: float | None = None  # relative factor (None = max(m,n)*eps) or absolute tau

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise ValueError("mode must be 'relative' or 'absolute'")
        if self.mode == "absolute" and (self.value is None or self.value <= 0):
            raise ValueError("absolute mode needs a positive tau")
        if self.mode == "relative" and self.value is not None and self.value <= 0:
            raise ValueError("relative factor must be positive")

    @classmethod
    def relative(cls, factor: float | None = None) -> "Tolerance":
        return cls(mode="relative", value=factor)

    @classmethod
    def absolute(cls, tau: float) -> "Tolerance":
        return cls(mode="absolute", value=tau)

    def threshold(self, shape: tuple[int, int], sigma1: float) -> float:
        if self.mode == "absolute":
            return float(self.value)
        factor = self.value if self.value is not None else max(shape) * np.finfo(float).eps
        return float(factor * sigma1)


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True)
class RankReport:
    """Singular values of one matrix and the decisions drawn from them.

    condition_number is sigma_1 / sigma_min, reported as inf when the matrix
    is numerically singular under the policy.  log_abs_det is the sum of log
    singular values for square matrices (None otherwise) and is the usable
    determinant diagnostic at scales where |det| itself underflows.
    """

    singular_values: np.ndarray
    numerical_rank: int
    tolerance_used: float
    condition_number: float
    log_abs_det: float | None
    borderline: bool

    def __post_init__(self):
        self.singular_values.setflags(write=False)

    @property
    def spectral_ratio(self) -> float:
        """Raw sigma_1 / sigma_min, ignoring the tolerance policy."""
        s = self.singular_values
        if s[-1] == 0.0:
            return float("inf")
        return float(s[0] / s[-1])


def _validated(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a non-empty 2-d matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def rank_report(matrix, policy: Tolerance = DEFAULT_TOLERANCE) -> RankReport:
    """Measure numerical rank, conditioning, and log-determinant in one SVD."""
    a = _validated(matrix)
    s = np.linalg.svd(a, compute_uv=False)
    tol = policy.threshold(a.shape, float(s[0]))
    rank = int(np.count_nonzero(s > tol))
    if rank < s.size:
        cond = float("inf")
    else:
        cond = float(s[0] / s[-1])
    log_abs_det = None
    if a.shape[0] == a.shape[1]:
        log_abs_det = float("-inf") if s[-1] == 0.0 else float(np.sum(np.log(s)))
    borderline = bool(tol > 0 and np.any((s > tol / 10) & (s < tol * 10)))
    return RankReport(
        singular_values=s,
        numerical_rank=rank,
        tolerance_used=tol,
        condition_number=cond,
        log_abs_det=log_abs_det,
        borderline=borderline,
    )


class LeastSquaresSolution(NamedTuple):
    x: np.ndarray
    residual_norm: float
    rank: int
    unique: bool


def solve_least_squares(A, b, policy: Tolerance = DEFAULT_TOLERANCE) -> LeastSquaresSolution:
    """Minimum-norm least-squares solution of A x = b under the same tolerance policy.

    unique means the solution of the least-squares problem is unique, i.e.
    A has full numerical column rank.
    """
    A = _validated(A)
    b = np.asarray(b, dtype=float)
    if b.shape != (A.shape[0],):
        raise ValueError(f"b must have shape ({A.shape[0]},), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side has non-finite entries")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    tol = policy.threshold(A.shape, float(s[0]))
    keep = s > tol
    rank = int(np.count_nonzero(keep))
    coeff = np.zeros_like(s)
    coeff[keep] = (U.T @ b)[keep] / s[keep]
    x = Vt.T @ coeff
    residual = float(np.linalg.norm(A @ x - b))
    return LeastSquaresSolution(x=x, residual_norm=residual, rank=rank, unique=rank == A.shape[1])
