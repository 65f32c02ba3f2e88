"""Hybrid subgradient methods over fixed-point sets.

One iteration moves from x^k to T(x^k - alpha_k s^k/||s^k||), where s^k is
a subgradient of the objective at x^k and T a nonexpansive operator built
from projections; when 0 is a subgradient the iteration applies T alone.
Three named entry points share this loop and differ only in which operator
shape they insist on:

* ``hsm_run``    any operator,
* ``hsasm_run``  string-averaging operator whose strings cover every set,
* ``hspsm_run``  simultaneous projection (constraints may be inconsistent).

Runs stop at the first iterate that passes the (tau, L)-compatibility test
— the OUT index — or when the iteration budget is exhausted, in which case
the result carries ``out_index=None``.  ``descent_check`` evaluates the
per-step decrease inequality that drives finite termination:

    ||y - x_bar||^2 <= ||x - x_bar||^2 - 2 alpha (4 L)^-1 Delta + alpha^2

for y = T(x - alpha v/||v||), a subgradient v at x, and any constrained
minimizer x_bar with f(x) > f(x_bar) + Delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compatibility import CompatCriteria, CompatReport, prox_value, tau_L_compatible
from .errors import ConfigError, PreconditionError
from .objectives import Objective
from .operators import (
    ClampToBox,
    ProjectionOperator,
    SimultaneousProjection,
    StringAverageOperator,
    check_fit,
)
from .sets import Box, ConstraintFamily

__all__ = [
    "PowerSchedule",
    "ExplicitSchedule",
    "ProblemInstance",
    "TraceRow",
    "RunResult",
    "hsm_step",
    "hsm_run",
    "hsasm_run",
    "hspsm_run",
    "descent_check",
]

OPERATOR_KINDS = ("projection", "string_avg", "simultaneous")

DEFAULT_MAX_ITER = 10**6

# slack allowed when comparing the two sides of the descent inequality
_DESCENT_TOL = 1e-9


@dataclass(frozen=True)
class PowerSchedule:
    """Diminishing steps alpha_k = a * (k+1)^(-p) with a, p in (0, 1].

    The constraint p <= 1 keeps the step series divergent, which the
    finite-termination results require; a <= 1 keeps every step in (0, 1].
    """

    a: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise ValueError(f"schedule coefficient a must be in (0, 1], got {self.a}")
        if not 0 < self.p <= 1:
            raise ValueError(f"schedule exponent p must be in (0, 1], got {self.p}")

    def __call__(self, k: int) -> float:
        if k < 0:
            raise ValueError("iteration index must be nonnegative")
        return self.a * float(k + 1) ** (-self.p)


@dataclass(frozen=True, eq=False)
class ExplicitSchedule:
    """Steps taken verbatim from a list; past the end the last value repeats."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise ValueError("explicit schedule needs at least one step")
        if any(not 0 < v <= 1 for v in vals):
            raise ValueError("explicit steps must lie in (0, 1]")
        object.__setattr__(self, "values", vals)

    def __call__(self, k: int) -> float:
        if k < 0:
            raise ValueError("iteration index must be nonnegative")
        return self.values[min(k, len(self.values) - 1)]


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Everything one run needs: data, operator shape, schedule, tolerances.

    ``operator_kind`` selects how the iterated operator is assembled from
    the family: "projection" (onto set ``set_index``), "string_avg"
    (strings of 0-based set indices with ``string_weights``), or
    "simultaneous".  The ambient box bounds every iterate: the assembled
    operator ends with a projection onto it.
    """

    family: ConstraintFamily
    objective: Objective
    box: Box
    operator_kind: str
    schedule: object
    gamma: float
    tau: float
    seed: int
    max_iter: int = DEFAULT_MAX_ITER
    grid_h: float | None = None
    x0: np.ndarray | None = None
    set_index: int | None = None
    strings: tuple | None = None
    string_weights: np.ndarray | None = None

    def __post_init__(self):
        n = self.family.dim
        if self.objective.dim != n:
            raise ConfigError("objective dimension must match the constraint family")
        if self.box.dim != n:
            raise ConfigError("ambient box dimension must match the constraint family")
        if self.operator_kind not in OPERATOR_KINDS:
            raise ConfigError(f"operator kind must be one of {OPERATOR_KINDS}, got {self.operator_kind!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        if self.gamma < 0:
            raise ConfigError("gamma must be nonnegative")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must lie in (0, 1)")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be nonnegative")
        if self.grid_h is not None:
            object.__setattr__(self, "grid_h", float(self.grid_h))
            if self.grid_h <= 0:
                raise ConfigError("grid_h must be positive")
        if not callable(self.schedule):
            raise ConfigError("schedule must be callable on the iteration index")

        if self.operator_kind == "projection":
            if self.set_index is None:
                raise ConfigError("projection operator needs a set index")
            object.__setattr__(self, "set_index", int(self.set_index))
            if not 0 <= self.set_index < len(self.family):
                raise ConfigError(
                    f"set index {self.set_index} out of range for {len(self.family)} sets"
                )
        elif self.operator_kind == "string_avg":
            if self.strings is None or self.string_weights is None:
                raise ConfigError("string-averaging operator needs strings and string weights")
            strings = tuple(tuple(int(i) for i in s) for s in self.strings)
            w = np.asarray(self.string_weights, dtype=float)
            object.__setattr__(self, "strings", strings)
            object.__setattr__(self, "string_weights", w)
            for s in strings:
                if len(s) < 1:
                    raise ConfigError("every string must contain at least one set index")
                for i in s:
                    if not 0 <= i < len(self.family):
                        raise ConfigError(f"string index {i} out of range for {len(self.family)} sets")
            if w.shape != (len(strings),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ConfigError("string weights must be nonnegative and sum to 1")
            if not check_fit(strings, len(self.family)):
                raise ConfigError("strings must jointly cover every set index")

        if self.x0 is not None:
            x0 = np.asarray(self.x0, dtype=float)
            if x0.shape != (n,):
                raise ConfigError(f"x0 must have shape ({n},), got {x0.shape}")
            if not self.box.contains(x0, 0.0):
                raise ConfigError("x0 must lie inside the ambient box")
            x0.flags.writeable = False
            object.__setattr__(self, "x0", x0)

    @property
    def dim(self) -> int:
        return self.family.dim

    def build_operator(self):
        """Assemble the iterated operator, clamped to the ambient box."""
        if self.operator_kind == "projection":
            inner = ProjectionOperator(self.family.sets[self.set_index])
        elif self.operator_kind == "string_avg":
            inner = StringAverageOperator(self.family, self.strings, self.string_weights)
        else:
            inner = SimultaneousProjection(self.family)
        return ClampToBox(inner, self.box)

    def initial_point(self) -> np.ndarray:
        """x0 from the instance, else a seed-determined point of the box."""
        if self.x0 is not None:
            return np.array(self.x0)
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.box.lo, self.box.hi)


@dataclass(frozen=True)
class TraceRow:
    """One iteration record: the iterate and its per-step diagnostics.

    ``residual`` is ||x^k - T(x^{k-1})||, the distance between the realized
    iterate and a plain operator application from the previous one; it is
    0 at k=0 and bounded by alpha_{k-1} for exact runs.
    """

    k: int
    x: np.ndarray
    f: float
    prox: float
    residual: float
    alpha: float


@dataclass(frozen=True, eq=False)
class RunResult:
    """Trace rows, the compatibility report, and the number of steps taken."""

    rows: tuple
    report: CompatReport
    iterations_used: int

    @property
    def out_index(self) -> int | None:
        return self.report.out_index

    @property
    def final_x(self) -> np.ndarray:
        return self.rows[-1].x


def hsm_step(x, k: int, op, f: Objective, schedule) -> np.ndarray:
    """One hybrid step from x at iteration k.

    Applies the operator directly when 0 is a subgradient at x; otherwise
    first moves by alpha_k along the negated unit subgradient.
    """
    x = np.asarray(x, dtype=float)
    alpha = schedule(k)
    res = f.subgradient(x)
    if res.zero_flag:
        return op(x)
    norm = float(np.linalg.norm(res.subgrad))
    if norm == 0.0:
        raise RuntimeError("nonzero subdifferential reported but selected subgradient is zero")
    return op(x - (alpha / norm) * res.subgrad)


def _run(instance: ProblemInstance, criteria: CompatCriteria, operator, *,
         max_iter: int | None, stop_on_out: bool) -> RunResult:
    if max_iter is None:
        max_iter = instance.max_iter
    if max_iter < 0:
        raise ValueError("max_iter must be nonnegative")
    f = instance.objective
    schedule = instance.schedule
    family = instance.family

    x = instance.initial_point()
    rows = []
    k_out = None
    diag = None          # (dist, f_gap, prox) at the OUT point, else last iterate
    prev_t = None        # T(x^{k-1}), reused for both residual and zero branch

    for k in range(max_iter + 1):
        step_residual = 0.0 if prev_t is None else float(np.linalg.norm(x - prev_t))
        alpha = float(schedule(k))
        px = prox_value(family, x)
        ok, dist, f_gap = tau_L_compatible(x, criteria, f)
        rows.append(TraceRow(k, x.copy(), f.value(x), px, step_residual, alpha))
        if k_out is None:
            diag = (dist, f_gap, px)
            if ok:
                k_out = k
                if stop_on_out:
                    break
        if k == max_iter:
            break
        prev_t = operator(x)
        res = f.subgradient(x)
        if res.zero_flag:
            x = prev_t.copy()
        else:
            norm = float(np.linalg.norm(res.subgrad))
            if norm == 0.0:
                raise RuntimeError(
                    "nonzero subdifferential reported but selected subgradient is zero"
                )
            x = operator(x - (alpha / norm) * res.subgrad)

    report = CompatReport(out_index=k_out, dist_to_S=diag[0], f_gap=diag[1], prox=diag[2])
    return RunResult(tuple(rows), report, rows[-1].k)


def hsm_run(instance: ProblemInstance, criteria: CompatCriteria, *,
            max_iter: int | None = None, stop_on_out: bool = True) -> RunResult:
    """Run the hybrid subgradient method with the instance's operator."""
    return _run(instance, criteria, instance.build_operator(),
                max_iter=max_iter, stop_on_out=stop_on_out)


def hsasm_run(instance: ProblemInstance, criteria: CompatCriteria, *,
              max_iter: int | None = None, stop_on_out: bool = True) -> RunResult:
    """String-averaging specialization; requires covering strings."""
    if instance.operator_kind != "string_avg":
        raise ConfigError("hsasm requires a string-averaging operator")
    return hsm_run(instance, criteria, max_iter=max_iter, stop_on_out=stop_on_out)


def hspsm_run(instance: ProblemInstance, criteria: CompatCriteria, *,
              max_iter: int | None = None, stop_on_out: bool = True) -> RunResult:
    """Simultaneous-projection specialization; tolerates inconsistency."""
    if instance.operator_kind != "simultaneous":
        raise ConfigError("hspsm requires a simultaneous-projection operator")
    return hsm_run(instance, criteria, max_iter=max_iter, stop_on_out=stop_on_out)


def descent_check(x, x_bar, delta: float, alpha: float, f: Objective, op,
                  l_bar: float, m_radius: float | None = None):
    """Evaluate the per-step decrease inequality at one configuration.

    Returns (holds, lhs, rhs) with lhs = ||y - x_bar||^2 for the hybrid
    step y from x, and rhs = ||x - x_bar||^2 - 2 alpha (4 l_bar)^-1 delta
    + alpha^2.  The guarantee applies when x_bar is a fixed point of the
    operator minimizing f over its fixed-point set; callers violating the
    stated preconditions get a PreconditionError, never a vacuous pass.
    """
    x = np.asarray(x, dtype=float)
    x_bar = np.asarray(x_bar, dtype=float)
    if not 0 < delta <= 1:
        raise PreconditionError(f"delta must lie in (0, 1], got {delta}")
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    if l_bar <= 1:
        raise PreconditionError(f"l_bar must exceed 1, got {l_bar}")
    if f.value(x) <= f.value(x_bar) + delta:
        raise PreconditionError("need f(x) > f(x_bar) + delta")
    if m_radius is not None:
        if np.linalg.norm(x_bar) > m_radius:
            raise PreconditionError("x_bar must lie within the stated radius bound")
        if np.linalg.norm(x) > 3.0 * m_radius + 2.0:
            raise PreconditionError("x must satisfy ||x|| <= 3*m_radius + 2")
    res = f.subgradient(x)
    if res.zero_flag or float(np.linalg.norm(res.subgrad)) == 0.0:
        raise PreconditionError("subgradient at x vanishes, but f(x) exceeds the minimum")
    v = res.subgrad
    y = op(x - (alpha / float(np.linalg.norm(v))) * v)
    lhs = float(np.sum((y - x_bar) ** 2))
    rhs = float(np.sum((x - x_bar) ** 2) - 2.0 * alpha * delta / (4.0 * l_bar) + alpha**2)
    return bool(lhs <= rhs + _DESCENT_TOL), lhs, rhs
