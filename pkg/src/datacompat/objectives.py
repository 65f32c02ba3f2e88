"""Convex objective functions with subgradient selection.

Each objective exposes ``value`` (batch-capable), ``subgradient`` — which
returns the value, one subgradient, and a flag telling whether 0 is a
subgradient at that point — and ``lipschitz_bound``, an analytic upper
bound on the subgradient norms over a given box.

Variants:

* ``Quadratic``   f(x) = 1/2 x.Q.x + c.x + d with Q symmetric PSD,
* ``Linear``      f(x) = c.x + d,
* ``NormDistance`` f(x) = ||x - p||,
* ``AffineMax``   f(x) = max_j (a_j.x + b_j).

For the nonsmooth variants the returned subgradient is deterministic: the
norm-distance picks the zero vector exactly at p, and the max picks the
gradient of the lowest-index row attaining the maximum.  Zero-subgradient
detection for ``AffineMax`` solves a small feasibility LP (is 0 in the
convex hull of the active gradients?) in low dimension and falls back to a
conservative single-row test otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import Box

__all__ = [
    "SubgradientResult",
    "Quadratic",
    "Linear",
    "NormDistance",
    "AffineMax",
    "objective_from_dict",
]

# below this bound the minimum-norm floor keeps step directions well scaled
_LIPSCHITZ_FLOOR = 1.0 + 1e-6

# activity tolerance when collecting argmax rows of AffineMax
_ACTIVE_TOL = 1e-12

# hull-membership LPs stay cheap only in low dimension
_LP_MAX_DIM = 3


@dataclass(frozen=True)
class SubgradientResult:
    """Value, one subgradient, and whether 0 is in the subdifferential."""

    value: float
    subgrad: np.ndarray
    zero_flag: bool


def _vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    arr.flags.writeable = False
    return arr


def _floor(bound: float) -> float:
    return float(max(bound, _LIPSCHITZ_FLOOR))


@dataclass(frozen=True, eq=False)
class Quadratic:
    """f(x) = 1/2 x.Q.x + c.x + d, differentiable with gradient Qx + c."""

    Q: np.ndarray
    c: np.ndarray
    d: float = 0.0

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if not np.all(np.isfinite(Q)):
            raise ValueError("Q must have finite entries")
        if not np.allclose(Q, Q.T, atol=1e-12, rtol=1e-12):
            raise ValueError("Q must be symmetric")
        scale = max(float(np.abs(Q).max()), 1.0)
        eigs = np.linalg.eigvalsh(Q)
        if eigs.min() < -1e-9 * scale:
            raise ValueError(f"Q must be positive semidefinite, min eigenvalue {eigs.min()}")
        Q.flags.writeable = False
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", _vector(self.c, "c"))
        object.__setattr__(self, "d", float(self.d))
        if self.c.size != Q.shape[0]:
            raise ValueError("c must match the dimension of Q")

    @property
    def dim(self) -> int:
        return self.c.size

    def value(self, x):
        x = np.asarray(x, dtype=float)
        quad = 0.5 * np.sum((x @ self.Q) * x, axis=-1)
        out = quad + x @ self.c + self.d
        return float(out) if out.ndim == 0 else out

    def subgradient(self, x) -> SubgradientResult:
        x = np.asarray(x, dtype=float)
        g = self.Q @ x + self.c
        return SubgradientResult(self.value(x), g, bool(np.all(g == 0.0)))

    def lipschitz_bound(self, box: Box) -> float:
        if box.dim != self.dim:
            raise ValueError("box dimension must match objective dimension")
        if self.dim <= 16:
            grads = box.corners() @ self.Q + self.c
            return _floor(float(np.linalg.norm(grads, axis=1).max()))
        # ||Qx + c|| <= ||Q|| * max ||x|| + ||c|| over the box
        radius = float(np.linalg.norm(np.maximum(np.abs(box.lo), np.abs(box.hi))))
        op_norm = float(np.linalg.norm(self.Q, 2))
        return _floor(op_norm * radius + float(np.linalg.norm(self.c)))

    def to_dict(self) -> dict:
        return {"type": "quadratic", "Q": self.Q.tolist(), "c": self.c.tolist(), "d": self.d}


@dataclass(frozen=True, eq=False)
class Linear:
    """f(x) = c.x + d with constant gradient c."""

    c: np.ndarray
    d: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", _vector(self.c, "c"))
        object.__setattr__(self, "d", float(self.d))

    @property
    def dim(self) -> int:
        return self.c.size

    def value(self, x):
        out = np.asarray(x, dtype=float) @ self.c + self.d
        return float(out) if np.ndim(out) == 0 else out

    def subgradient(self, x) -> SubgradientResult:
        x = np.asarray(x, dtype=float)
        return SubgradientResult(self.value(x), self.c.copy(), bool(np.all(self.c == 0.0)))

    def lipschitz_bound(self, box: Box) -> float:
        if box.dim != self.dim:
            raise ValueError("box dimension must match objective dimension")
        return _floor(float(np.linalg.norm(self.c)))

    def to_dict(self) -> dict:
        return {"type": "linear", "c": self.c.tolist(), "d": self.d}


@dataclass(frozen=True, eq=False)
class NormDistance:
    """f(x) = ||x - p||, nonsmooth exactly at p where 0 is a subgradient."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _vector(self.p, "p"))

    @property
    def dim(self) -> int:
        return self.p.size

    def value(self, x):
        out = np.linalg.norm(np.asarray(x, dtype=float) - self.p, axis=-1)
        return float(out) if out.ndim == 0 else out

    def subgradient(self, x) -> SubgradientResult:
        x = np.asarray(x, dtype=float)
        diff = x - self.p
        dist = float(np.linalg.norm(diff))
        if dist == 0.0:
            return SubgradientResult(0.0, np.zeros(self.dim), True)
        return SubgradientResult(dist, diff / dist, False)

    def lipschitz_bound(self, box: Box) -> float:
        if box.dim != self.dim:
            raise ValueError("box dimension must match objective dimension")
        return _floor(1.0)

    def to_dict(self) -> dict:
        return {"type": "norm_distance", "p": self.p.tolist()}


def _zero_in_hull(rows: np.ndarray) -> bool:
    """Whether 0 is a convex combination of the given gradient rows."""
    from scipy.optimize import linprog

    k, n = rows.shape
    # feasibility LP: lambda >= 0, sum lambda = 1, rows^T lambda = 0
    a_eq = np.vstack([rows.T, np.ones((1, k))])
    b_eq = np.concatenate([np.zeros(n), [1.0]])
    res = linprog(np.zeros(k), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
    return bool(res.status == 0)


@dataclass(frozen=True, eq=False)
class AffineMax:
    """f(x) = max_j (a_j.x + b_j) over the rows of (A, b)."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or A.shape[0] < 1:
            raise ValueError(f"A must be a nonempty matrix, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise ValueError("b must have one entry per row of A")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must have finite entries")
        A.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.max(x @ self.A.T + self.b, axis=-1)
        return float(out) if out.ndim == 0 else out

    def subgradient(self, x) -> SubgradientResult:
        x = np.asarray(x, dtype=float)
        vals = x @ self.A.T + self.b
        top = float(vals.max())
        active = np.flatnonzero(vals >= top - _ACTIVE_TOL)
        g = self.A[active[0]].copy()
        rows = self.A[active]
        if self.dim <= _LP_MAX_DIM:
            zero = _zero_in_hull(rows)
        else:
            # conservative in high dimension: certify only the trivial case
            zero = bool(np.any(np.all(rows == 0.0, axis=1)))
        return SubgradientResult(top, g, zero)

    def lipschitz_bound(self, box: Box) -> float:
        if box.dim != self.dim:
            raise ValueError("box dimension must match objective dimension")
        return _floor(float(np.linalg.norm(self.A, axis=1).max()))

    def to_dict(self) -> dict:
        return {"type": "affine_max", "A": self.A.tolist(), "b": self.b.tolist()}


Objective = Quadratic | Linear | NormDistance | AffineMax


def objective_from_dict(d: dict) -> Objective:
    """Build an objective from its tagged-dict form."""
    kind = d.get("type")
    if kind == "quadratic":
        return Quadratic(d["Q"], d["c"], d.get("d", 0.0))
    if kind == "linear":
        return Linear(d["c"], d.get("d", 0.0))
    if kind == "norm_distance":
        return NormDistance(d["p"])
    if kind == "affine_max":
        return AffineMax(d["A"], d["b"])
    raise ValueError(f"unknown objective type {kind!r}")
