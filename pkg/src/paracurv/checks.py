"""Sampled residual checks shared by the geometry and theorem modules."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9
# identities that contract the curvature twice lose about a digit
CONTRACTED_TOL = 1e-8


@dataclass(frozen=True)
class CheckReport:
    """Result of one sampled identity check.

    ``max_rel`` uses ``|a - b| / max(1, |a|, |b|)`` per component and decides
    ``passed``; ``max_abs`` is the raw magnitude of the worst difference.
    """

    name: str
    passed: bool
    max_rel: float
    max_abs: float
    mean_rel: float
    tol: float
    n_points: int
    worst_point: tuple[float, ...] | None = None
    worst_index: tuple[int, ...] | None = None
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_rel": self.max_rel,
            "max_abs": self.max_abs,
            "mean_rel": self.mean_rel,
            "tol": self.tol,
            "n_points": self.n_points,
            "worst_point": list(self.worst_point) if self.worst_point is not None else None,
            "worst_index": list(self.worst_index) if self.worst_index is not None else None,
            "note": self.note,
        }


def compare(name: str, lhs, rhs, points: np.ndarray, tol: float = DEFAULT_TOL, note: str = "") -> CheckReport:
    """Compare sampled arrays of shape ``(n_points, ...)``; ``rhs`` may broadcast."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
    diff = np.abs(lhs - rhs)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    rel = diff / scale
    if rel.size == 0:
        return CheckReport(name, True, 0.0, 0.0, 0.0, tol, len(points), note=note)
    if not np.all(np.isfinite(rel)):
        rel = np.where(np.isfinite(rel), rel, np.inf)
    flat = int(np.argmax(rel))
    idx = np.unravel_index(flat, rel.shape)
    max_rel = float(rel[idx])
    return CheckReport(
        name=name,
        passed=bool(max_rel <= tol),
        max_rel=max_rel,
        max_abs=float(diff[idx]),
        mean_rel=float(rel.mean()),
        tol=tol,
        n_points=int(lhs.shape[0]),
        worst_point=tuple(float(v) for v in points[idx[0]]),
        worst_index=tuple(int(i) for i in idx[1:]),
        note=note,
    )


def zero_check(name: str, values, points: np.ndarray, tol: float = DEFAULT_TOL, note: str = "") -> CheckReport:
    return compare(name, values, 0.0, points, tol, note)


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)
