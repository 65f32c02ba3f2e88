"""Brute-force ground truth for desk-scale instances.

An exhaustive grid sweep over the ambient box supplies the quantities the
compatibility certificate needs but no closed form provides in general:
the minimum of the proximity function (gamma_star) with its argmin points,
and a representative set of constrained minimizers with the minimum
objective value.  The sweep is deliberately capped at dimension 3; above
that no ground truth is produced.

``build_criteria`` assembles the acceptance data for a problem instance.
The feasible region it minimizes over depends on the operator being
iterated: a single-set projection constrains to that set's proximity,
a string average to the whole family's, and a simultaneous projection to
the proximity minimizers themselves — which exist, and serve as the
constraint surrogate, even for inconsistent families.

Results are cacheable in a JSON sidecar keyed by a content hash of the
instance data (sets, weights, objective, box, grid resolution), so
repeated runs skip the sweep.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .compatibility import CompatCriteria, prox_value
from .errors import InfeasibleReferenceError
from .sets import Box, ConstraintFamily

__all__ = [
    "GridSpec",
    "grid_minimize",
    "grid_prox_min",
    "lipschitz_estimate",
    "default_grid_h",
    "content_key",
    "OracleCache",
    "build_criteria",
]

MAX_GRID_DIM = 3
MAX_GRID_POINTS = 10**8

# representative sets keep only points numerically tied with the minimum
_REFERENCE_VALUE_TOL = 1e-9

# slack added to gamma_star when it defines the feasible region
_GAMMA_STAR_SLACK = 1e-9

_CHUNK = 1 << 20

_DEFAULT_H = {1: 1e-3, 2: 1e-2, 3: 5e-2}


def default_grid_h(dimension: int) -> float:
    """Grid resolution giving sub-second sweeps per dimension."""
    if dimension not in _DEFAULT_H:
        raise ValueError(f"grid sweeps support dimensions 1..{MAX_GRID_DIM}, got {dimension}")
    return _DEFAULT_H[dimension]


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Regular grid over a box; axis endpoints always lie on the grid."""

    box: Box
    h: float

    def __post_init__(self):
        object.__setattr__(self, "h", float(self.h))
        if self.h <= 0:
            raise ValueError("grid resolution h must be positive")
        if self.box.dim > MAX_GRID_DIM:
            raise ValueError(
                f"grid sweeps support dimensions 1..{MAX_GRID_DIM}, got {self.box.dim}"
            )
        axes = []
        for lo, hi in zip(self.box.lo, self.box.hi):
            span = hi - lo
            num = int(round(span / self.h)) + 1 if span > 0 else 1
            axes.append(np.linspace(lo, hi, num))
        total = 1
        for ax in axes:
            total *= ax.size
        if total > MAX_GRID_POINTS:
            raise ValueError(f"grid would have {total} points, cap is {MAX_GRID_POINTS}")
        object.__setattr__(self, "axes", tuple(axes))
        object.__setattr__(self, "shape", tuple(ax.size for ax in axes))
        object.__setattr__(self, "point_count", total)

    def iter_chunks(self, chunk: int = _CHUNK):
        """Yield the grid as (M, n) arrays; exhaustive and deterministic."""
        n = self.box.dim
        for start in range(0, self.point_count, chunk):
            flat = np.arange(start, min(start + chunk, self.point_count))
            multi = np.unravel_index(flat, self.shape)
            yield np.column_stack([self.axes[d][multi[d]] for d in range(n)])


def grid_minimize(f, feasible_test, grid: GridSpec, value_tol: float | None = None):
    """Grid minimum of f over feasible points, with near-tied argmin set.

    ``feasible_test`` maps an (M, n) batch to an (M,) boolean mask.  The
    returned points are all feasible grid points whose value lies within
    ``value_tol`` of the minimum; the default tolerance h * L converts the
    grid resolution into function-value resolution via the objective's
    Lipschitz bound on the box.
    """
    if value_tol is None:
        value_tol = grid.h * f.lipschitz_bound(grid.box)
    best = np.inf
    feasible_seen = False
    for pts in grid.iter_chunks():
        mask = np.asarray(feasible_test(pts), dtype=bool)
        if mask.any():
            feasible_seen = True
            vals = np.atleast_1d(f.value(pts[mask]))
            best = min(best, float(vals.min()))
    if not feasible_seen:
        raise InfeasibleReferenceError(
            "no feasible grid point: the representative set is empty"
        )
    keep = []
    for pts in grid.iter_chunks():
        mask = np.asarray(feasible_test(pts), dtype=bool)
        if mask.any():
            cand = pts[mask]
            vals = np.atleast_1d(f.value(cand))
            keep.append(cand[vals <= best + value_tol])
    return best, np.concatenate(keep, axis=0)


def grid_prox_min(family: ConstraintFamily, grid: GridSpec, value_tol: float = 1e-9):
    """Minimum of the proximity function over the grid, with its argmins."""
    best = np.inf
    for pts in grid.iter_chunks():
        vals = np.atleast_1d(prox_value(family, pts))
        best = min(best, float(vals.min()))
    keep = []
    for pts in grid.iter_chunks():
        vals = np.atleast_1d(prox_value(family, pts))
        mask = vals <= best + value_tol
        if mask.any():
            keep.append(pts[mask])
    return best, np.concatenate(keep, axis=0)


def lipschitz_estimate(f, box: Box, samples: int, seed: int) -> float:
    """Empirical max of |f(z1)-f(z2)| / ||z1-z2|| over sampled pairs.

    Box corners are always part of the sample (convex functions attain
    extremes there), so the estimate presses against the analytic bound.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    parts = [rng.uniform(box.lo, box.hi, size=(samples, box.dim))]
    if box.dim <= 16:
        parts.append(box.corners())
    pts = np.concatenate(parts, axis=0)
    vals = np.atleast_1d(f.value(pts))

    if pts.shape[0] <= 1500:
        dv = np.abs(vals[:, None] - vals[None, :])
        dx = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    else:
        idx = rng.integers(0, pts.shape[0], size=(5 * samples, 2))
        dv = np.abs(vals[idx[:, 0]] - vals[idx[:, 1]])
        dx = np.linalg.norm(pts[idx[:, 0]] - pts[idx[:, 1]], axis=-1)
    mask = dx > 0
    if not mask.any():
        return 0.0
    return float((dv[mask] / dx[mask]).max())


def content_key(family: ConstraintFamily, objective, box: Box, h: float) -> str:
    """Content hash of the sweep inputs; stable across runs and processes."""
    payload = {
        "sets": [s.to_dict() for s in family.sets],
        "weights": family.weights.tolist(),
        "objective": objective.to_dict(),
        "box": box.to_dict(),
        "h": float(h),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


class OracleCache:
    """JSON sidecar of sweep results, keyed by instance content hash.

    Each entry stores gamma_star and, per feasibility signature, the
    constrained minimum with its representative points.  JSON float
    round-tripping is exact, so cached and freshly computed criteria
    coincide bitwise.
    """

    def __init__(self, path: str, read_only: bool = False):
        self.path = path
        self.read_only = read_only
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                self._data = json.load(fh)
        else:
            self._data = {}

    def lookup(self, key: str, sig: str):
        entry = self._data.get(key)
        if entry is None or sig not in entry.get("solutions", {}):
            return None
        sol = entry["solutions"][sig]
        return (
            float(entry["gamma_star"]),
            float(sol["min_value"]),
            np.asarray(sol["points"], dtype=float),
        )

    def store(self, key: str, sig: str, gamma_star: float, min_value: float,
              points: np.ndarray) -> None:
        if self.read_only:
            return
        entry = self._data.setdefault(key, {"gamma_star": gamma_star, "solutions": {}})
        entry["gamma_star"] = gamma_star
        entry["solutions"][sig] = {
            "min_value": min_value,
            "points": np.asarray(points, dtype=float).tolist(),
        }
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self._data, fh, sort_keys=True)


def _feasibility_sig(instance) -> str:
    if instance.operator_kind == "projection":
        return f"projection:{instance.set_index}:gamma={instance.gamma!r}"
    if instance.operator_kind == "string_avg":
        return f"family:gamma={instance.gamma!r}"
    return "prox-argmin"


def build_criteria(instance, cache: OracleCache | None = None):
    """Oracle-backed (criteria, gamma_star) for a problem instance.

    The reference solution set is the grid argmin of the objective over
    the operator-appropriate feasible region; its value tolerance is tight
    (numerical ties only), so for the strictly convex instances used in
    acceptance the representatives approximate the true solution set
    within one grid cell.
    """
    h = instance.grid_h if instance.grid_h is not None else default_grid_h(instance.dim)
    key = content_key(instance.family, instance.objective, instance.box, h)
    sig = _feasibility_sig(instance)
    l_bar = instance.objective.lipschitz_bound(instance.box)

    hit = cache.lookup(key, sig) if cache is not None else None
    if hit is not None:
        gamma_star, min_value, reps = hit
    else:
        grid = GridSpec(instance.box, h)
        gamma_star, _ = grid_prox_min(instance.family, grid)
        if instance.operator_kind == "projection":
            sub = ConstraintFamily((instance.family.sets[instance.set_index],), [1.0])
            gamma = instance.gamma

            def feasible(pts, _sub=sub, _g=gamma):
                return np.atleast_1d(prox_value(_sub, pts)) <= _g
        elif instance.operator_kind == "string_avg":
            gamma = instance.gamma

            def feasible(pts, _fam=instance.family, _g=gamma):
                return np.atleast_1d(prox_value(_fam, pts)) <= _g
        else:
            bound = gamma_star + _GAMMA_STAR_SLACK

            def feasible(pts, _fam=instance.family, _b=bound):
                return np.atleast_1d(prox_value(_fam, pts)) <= _b

        min_value, reps = grid_minimize(
            instance.objective, feasible, grid, value_tol=_REFERENCE_VALUE_TOL
        )
        if cache is not None:
            cache.store(key, sig, gamma_star, min_value, reps)

    criteria = CompatCriteria(
        gamma=instance.gamma,
        tau=instance.tau,
        l_bar=l_bar,
        reference=reps,
        ref_min_value=min_value,
    )
    return criteria, gamma_star
