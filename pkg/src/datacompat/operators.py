"""Nonexpansive operators built from metric projections.

The solver iterates operators of three shapes:

* ``ProjectionOperator``     T = P_C for a single set,
* ``StringAverageOperator``  T = sum_t w_t F_t, where each string operator
  F_t applies the projections of an index string left to right,
* ``SimultaneousProjection`` T = sum_i w_i P_{C_i}.

``ClampToBox`` composes any of these with a final projection onto the
ambient box, which keeps orbits bounded without changing fixed points
inside the box.  ``power_orbit`` iterates an operator exactly;
``inexact_orbit`` perturbs every step by at most a prescribed error
magnitude, reproducibly, to exercise stability of the iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import Box, ConstraintFamily

__all__ = [
    "ProjectionOperator",
    "StringOperator",
    "StringAverageOperator",
    "SimultaneousProjection",
    "ClampToBox",
    "power_orbit",
    "inexact_orbit",
    "residual",
    "check_fit",
]


@dataclass(frozen=True, eq=False)
class ProjectionOperator:
    """Metric projection onto one constraint set."""

    target: object

    def __call__(self, x) -> np.ndarray:
        return self.target.project(x)

    @property
    def dim(self) -> int:
        return self.target.dim


@dataclass(frozen=True, eq=False)
class StringOperator:
    """Composition of projections along one index string, first index first."""

    sets: tuple
    indices: tuple

    def __post_init__(self):
        sets = tuple(self.sets)
        indices = tuple(int(i) for i in self.indices)
        if len(indices) < 1:
            raise ValueError("a string needs at least one index")
        for i in indices:
            if not 0 <= i < len(sets):
                raise ValueError(f"string index {i} out of range for {len(sets)} sets")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "indices", indices)

    def __call__(self, x) -> np.ndarray:
        y = np.asarray(x, dtype=float)
        for i in self.indices:
            y = self.sets[i].project(y)
        return y

    @property
    def dim(self) -> int:
        return self.sets[0].dim


@dataclass(frozen=True, eq=False)
class StringAverageOperator:
    """Convex combination of string operators over a shared set list."""

    family: ConstraintFamily
    strings: tuple
    string_weights: np.ndarray

    def __post_init__(self):
        strings = tuple(tuple(int(i) for i in s) for s in self.strings)
        if len(strings) < 1:
            raise ValueError("need at least one string")
        w = np.asarray(self.string_weights, dtype=float)
        if w.shape != (len(strings),):
            raise ValueError(f"string weights must have length {len(strings)}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("string weights must be nonnegative and sum to 1")
        w.flags.writeable = False
        object.__setattr__(self, "strings", strings)
        object.__setattr__(self, "string_weights", w)
        object.__setattr__(
            self,
            "_ops",
            tuple(StringOperator(self.family.sets, s) for s in strings),
        )

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, op in zip(self.string_weights, self._ops):
            out += w * op(x)
        return out

    @property
    def dim(self) -> int:
        return self.family.dim


@dataclass(frozen=True, eq=False)
class SimultaneousProjection:
    """Weighted average of all family projections applied at once."""

    family: ConstraintFamily

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, s in zip(self.family.weights, self.family.sets):
            out += w * s.project(x)
        return out

    @property
    def dim(self) -> int:
        return self.family.dim


@dataclass(frozen=True, eq=False)
class ClampToBox:
    """Apply an inner operator, then project the result onto the ambient box."""

    inner: object
    box: Box

    def __post_init__(self):
        if self.inner.dim != self.box.dim:
            raise ValueError("operator and box dimensions must match")

    def __call__(self, x) -> np.ndarray:
        return self.box.project(self.inner(x))

    @property
    def dim(self) -> int:
        return self.box.dim


def power_orbit(op, x0, n: int) -> np.ndarray:
    """Iterates x, T(x), T^2(x), ..., T^n(x) as an array of shape (n+1, dim)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(x0, dtype=float)
    out = np.empty((n + 1, x.size))
    out[0] = x
    for k in range(n):
        x = op(x)
        out[k + 1] = x
    return out


def inexact_orbit(op, x0, errors, seed: int, magnitude: str = "full") -> np.ndarray:
    """Orbit with ||x^{i+1} - T(x^i)|| <= errors[i] at each step.

    Perturbation directions are drawn from a generator seeded with ``seed``
    so that runs are reproducible.  With ``magnitude="full"`` each error has
    norm exactly errors[i]; with ``"uniform"`` the norm is drawn uniformly
    from [0, errors[i]].  With all-zero errors the orbit coincides bitwise
    with ``power_orbit``.
    """
    if magnitude not in ("full", "uniform"):
        raise ValueError(f"unknown magnitude mode {magnitude!r}")
    errors = np.asarray(errors, dtype=float)
    if np.any(errors < 0):
        raise ValueError("errors must be nonnegative")
    x = np.asarray(x0, dtype=float)
    rng = np.random.default_rng(seed)
    out = np.empty((errors.size + 1, x.size))
    out[0] = x
    for i, mu in enumerate(errors):
        x = op(x)
        if mu > 0.0:
            direction = rng.standard_normal(x.size)
            norm = np.linalg.norm(direction)
            if norm > 0:
                radius = mu if magnitude == "full" else mu * rng.uniform()
                x = x + (radius / norm) * direction
        out[i + 1] = x
    return out


def residual(op, x) -> float:
    """||x - T(x)||, zero exactly on fixed points."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - op(x)))


def check_fit(strings, m: int) -> bool:
    """Whether every set index 0..m-1 appears in at least one string."""
    seen = set()
    for s in strings:
        seen.update(int(i) for i in s)
    return set(range(m)).issubset(seen)
