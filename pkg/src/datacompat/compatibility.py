"""Data-compatibility certificates.

The proximity function measures weighted violation of a constraint family,

    prox(x) = 1/2 * sum_i w_i ||P_{C_i}(x) - x||^2,

and a point is gamma-compatible when prox(x) <= gamma.  The solution
concept certified here is two-sided: a point x is (tau, L)-compatible with
respect to a reference set S of constrained minimizers when

    dist(x, S) <= tau   and   f(x) <= min_S f + tau * L,

where L is an upper bound on subgradient norms of f over the ambient box.
``out_index`` reports the first iterate of an orbit satisfying both — the
finite index at which a run may stop with a certificate in hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import ConstraintFamily

__all__ = [
    "prox_value",
    "gamma_compatible",
    "CompatCriteria",
    "tau_L_compatible",
    "out_index",
    "CompatReport",
]


def prox_value(family: ConstraintFamily, x):
    """Weighted mean-square projection residual; supports (n,) and (N, n)."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for w, s in zip(family.weights, family.sets):
        diff = s.project(x) - x
        total = total + 0.5 * w * np.sum(diff * diff, axis=-1)
    return float(total) if np.ndim(total) == 0 else total


def gamma_compatible(family: ConstraintFamily, x, gamma: float) -> bool:
    """Whether the proximity value of x stays within the violation budget."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return bool(prox_value(family, x) <= gamma)


@dataclass(frozen=True, eq=False)
class CompatCriteria:
    """Frozen acceptance data for (tau, L)-compatibility checks.

    ``reference`` holds representative points of the constrained-solution
    set (one per row) and ``ref_min_value`` the minimum objective value
    over them; distances to the solution set are evaluated against these
    representatives.
    """

    gamma: float
    tau: float
    l_bar: float
    reference: np.ndarray
    ref_min_value: float

    def __post_init__(self):
        ref = np.asarray(self.reference, dtype=float)
        if ref.ndim != 2 or ref.shape[0] < 1:
            raise ValueError("reference must be a nonempty (N, n) array")
        ref.flags.writeable = False
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "l_bar", float(self.l_bar))
        object.__setattr__(self, "ref_min_value", float(self.ref_min_value))
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.l_bar <= 0:
            raise ValueError("l_bar must be positive")

    @property
    def dim(self) -> int:
        return self.reference.shape[1]

    def distance(self, x) -> float:
        """Euclidean distance from x to the nearest reference point."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(self.reference - x, axis=1).min())


def tau_L_compatible(x, criteria: CompatCriteria, f):
    """(ok, dist, f_gap) for the two-sided compatibility test at x."""
    dist = criteria.distance(x)
    f_gap = float(f.value(x) - criteria.ref_min_value)
    ok = dist <= criteria.tau and f_gap <= criteria.tau * criteria.l_bar
    return bool(ok), dist, f_gap


def out_index(points, criteria: CompatCriteria, f):
    """First row index of ``points`` passing the compatibility test, or None."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be an (N, n) array")
    for k, x in enumerate(points):
        ok, _, _ = tau_L_compatible(x, criteria, f)
        if ok:
            return k
    return None


@dataclass(frozen=True)
class CompatReport:
    """Certificate summary for one orbit: stop index and its diagnostics.

    ``out_index`` is None when no iterate in the inspected range passed the
    test; the diagnostic fields then describe the final iterate.
    """

    out_index: int | None
    dist_to_S: float
    f_gap: float
    prox: float
