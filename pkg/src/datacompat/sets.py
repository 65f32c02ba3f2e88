"""Constraint sets with exact metric projections.

Four closed convex set variants are supported, each with a closed-form
orthogonal projection: halfspaces a.x <= b, axis-aligned boxes, Euclidean
balls, and hyperplanes a.x = b.  A ``ConstraintFamily`` bundles a list of
sets with normalized nonnegative weights.

``project`` accepts either a single point of shape ``(n,)`` or a batch of
shape ``(N, n)`` and preserves the input's shape.  All set objects are
immutable after construction and safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Halfspace",
    "Box",
    "Ball",
    "Hyperplane",
    "ConstraintFamily",
    "set_from_dict",
]

_WEIGHT_SUM_TOL = 1e-12


def _as_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    arr.flags.writeable = False
    return arr


def _check_dim(x: np.ndarray, dim: int) -> None:
    if x.shape[-1] != dim:
        raise ValueError(f"dimension mismatch: point has {x.shape[-1]} entries, set has {dim}")


@dataclass(frozen=True, eq=False)
class Halfspace:
    """Closed halfspace {x : a.x <= b}; ``a`` is kept unnormalized."""

    a: np.ndarray
    b: float
    _inv_sq_norm: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "a", _as_array(self.a, "a"))
        object.__setattr__(self, "b", float(self.b))
        sq = float(self.a @ self.a)
        if sq == 0.0:
            raise ValueError("halfspace normal a must be nonzero")
        object.__setattr__(self, "_inv_sq_norm", 1.0 / sq)

    @property
    def dim(self) -> int:
        return self.a.size

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        slack = x @ self.a - self.b
        excess = np.maximum(slack, 0.0)
        return x - np.multiply.outer(excess * self._inv_sq_norm, self.a)

    def contains(self, x, tol: float = 0.0) -> bool:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        return bool(x @ self.a <= self.b + tol)

    def distance(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.project(x)))

    def to_dict(self) -> dict:
        return {"type": "halfspace", "a": self.a.tolist(), "b": self.b}


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box [lo, hi]; degenerate axes (lo_j == hi_j) are allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_array(self.lo, "lo"))
        object.__setattr__(self, "hi", _as_array(self.hi, "hi"))
        if self.lo.size != self.hi.size:
            raise ValueError("lo and hi must have the same dimension")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")

    @property
    def dim(self) -> int:
        return self.lo.size

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        return np.clip(x, self.lo, self.hi)

    def contains(self, x, tol: float = 0.0) -> bool:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def distance(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.project(x)))

    def corners(self) -> np.ndarray:
        """All 2^n corner points, as an array of shape (2^n, n)."""
        grids = np.meshgrid(*[(lo, hi) for lo, hi in zip(self.lo, self.hi)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def to_dict(self) -> dict:
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball of positive radius around ``center``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        diff = x - self.center
        dist = np.linalg.norm(diff, axis=-1)
        if x.ndim == 1:
            # interior points come back bitwise unchanged
            if dist <= self.radius:
                return x.copy()
            return self.center + (self.radius / dist) * diff
        outside = dist > self.radius
        scale = np.ones_like(dist)
        scale[outside] = self.radius / dist[outside]
        out = self.center + diff * scale[..., np.newaxis]
        out[~outside] = x[~outside]
        return out

    def contains(self, x, tol: float = 0.0) -> bool:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def distance(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.project(x)))

    def to_dict(self) -> dict:
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Hyperplane {x : a.x = b}; ``a`` is kept unnormalized."""

    a: np.ndarray
    b: float
    _inv_sq_norm: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "a", _as_array(self.a, "a"))
        object.__setattr__(self, "b", float(self.b))
        sq = float(self.a @ self.a)
        if sq == 0.0:
            raise ValueError("hyperplane normal a must be nonzero")
        object.__setattr__(self, "_inv_sq_norm", 1.0 / sq)

    @property
    def dim(self) -> int:
        return self.a.size

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        offset = x @ self.a - self.b
        return x - np.multiply.outer(offset * self._inv_sq_norm, self.a)

    def contains(self, x, tol: float = 0.0) -> bool:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = np.asarray(x, dtype=float)
        _check_dim(x, self.dim)
        return bool(abs(x @ self.a - self.b) <= tol)

    def distance(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.project(x)))

    def to_dict(self) -> dict:
        return {"type": "hyperplane", "a": self.a.tolist(), "b": self.b}


ConvexSet = Halfspace | Box | Ball | Hyperplane


@dataclass(frozen=True, eq=False)
class ConstraintFamily:
    """A list of constraint sets with nonnegative weights summing to one."""

    sets: tuple
    weights: np.ndarray

    def __post_init__(self):
        sets = tuple(self.sets)
        if len(sets) < 1:
            raise ValueError("constraint family needs at least one set")
        dims = {s.dim for s in sets}
        if len(dims) != 1:
            raise ValueError(f"all sets must share one dimension, got {sorted(dims)}")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(sets),):
            raise ValueError(f"weights must have length {len(sets)}, got shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        w.flags.writeable = False
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.sets[0].dim

    def __len__(self) -> int:
        return len(self.sets)

    @staticmethod
    def uniform(sets) -> "ConstraintFamily":
        sets = tuple(sets)
        return ConstraintFamily(sets, np.full(len(sets), 1.0 / len(sets)))


def set_from_dict(d: dict) -> ConvexSet:
    """Build a set from its tagged-dict form, e.g. {"type": "box", ...}."""
    kind = d.get("type")
    if kind == "halfspace":
        return Halfspace(d["a"], d["b"])
    if kind == "box":
        return Box(d["lo"], d["hi"])
    if kind == "ball":
        return Ball(d["center"], d["radius"])
    if kind == "hyperplane":
        return Hyperplane(d["a"], d["b"])
    raise ValueError(f"unknown set type {kind!r}")
