"""Instance configuration: JSON parsing, validation, and building.

A config file fully describes one problem instance.  Set indices in the
operator section are 1-based (matching how constraint systems are usually
written down); the library converts them to 0-based internally.  Example:

    {
      "dimension": 1,
      "box": {"lo": [-2], "hi": [2]},
      "sets": [{"type": "box", "lo": [0], "hi": [1]}],
      "objective": {"type": "quadratic", "Q": [[2]], "c": [-6], "d": 9},
      "operator": {"type": "projection", "set": 1},
      "tau": 0.05,
      "seed": 7
    }

Optional fields and defaults: "weights" (uniform), "schedule" ({"a": 1,
"p": 1}, or {"values": [...]} for explicit steps), "gamma" (0), "max_iter"
(10^6), "x0" (seed-determined point of the box), "grid_h" (resolution of
the ground-truth sweep, defaulted per dimension).

Every validation failure raises ``ConfigError`` naming the violated
invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .objectives import objective_from_dict
from .sets import Box, ConstraintFamily, set_from_dict
from .solvers import DEFAULT_MAX_ITER, ExplicitSchedule, PowerSchedule, ProblemInstance

__all__ = ["InstanceConfig", "parse_config", "load_config"]

_KNOWN_KEYS = {
    "dimension", "box", "sets", "weights", "objective", "operator",
    "schedule", "gamma", "tau", "seed", "max_iter", "x0", "grid_h",
}
_REQUIRED_KEYS = {"dimension", "box", "sets", "objective", "operator", "tau", "seed"}

OVERRIDABLE_KEYS = ("gamma", "tau", "seed", "max_iter")


def _number(data, key, *, required=False, default=None):
    if key not in data:
        if required:
            raise ConfigError(f"missing required config field {key!r}")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config field {key!r} must be a number, got {type(v).__name__}")
    return float(v)


def _integer(data, key, *, required=False, default=None):
    if key not in data:
        if required:
            raise ConfigError(f"missing required config field {key!r}")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"config field {key!r} must be an integer, got {type(v).__name__}")
    return int(v)


def _vector(data, key, n, *, required=False):
    if key not in data:
        if required:
            raise ConfigError(f"missing required config field {key!r}")
        return None
    v = data[key]
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(f"config field {key!r} must be a list of {n} numbers")
    for e in v:
        if isinstance(e, bool) or not isinstance(e, (int, float)):
            raise ConfigError(f"config field {key!r} must contain numbers only")
    return np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class InstanceConfig:
    """Validated, normalized form of a config file (indices 0-based)."""

    dimension: int
    box: Box
    family: ConstraintFamily
    objective: object
    operator_kind: str
    set_index: int | None
    strings: tuple | None
    string_weights: np.ndarray | None
    schedule: object
    gamma: float
    tau: float
    seed: int
    max_iter: int
    x0: np.ndarray | None
    grid_h: float | None

    def build(self) -> ProblemInstance:
        return ProblemInstance(
            family=self.family,
            objective=self.objective,
            box=self.box,
            operator_kind=self.operator_kind,
            schedule=self.schedule,
            gamma=self.gamma,
            tau=self.tau,
            seed=self.seed,
            max_iter=self.max_iter,
            grid_h=self.grid_h,
            x0=self.x0,
            set_index=self.set_index,
            strings=self.strings,
            string_weights=self.string_weights,
        )


def _parse_operator(op, m):
    if not isinstance(op, dict) or "type" not in op:
        raise ConfigError("config field 'operator' must be an object with a 'type'")
    kind = op["type"]
    if kind == "projection":
        extra = set(op) - {"type", "set"}
        if extra:
            raise ConfigError(f"unknown operator field(s) {sorted(extra)}")
        idx = op.get("set")
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise ConfigError("projection operator needs an integer 'set' (1-based)")
        if not 1 <= idx <= m:
            raise ConfigError(f"operator set index {idx} out of range 1..{m}")
        return "projection", idx - 1, None, None
    if kind == "string_avg":
        extra = set(op) - {"type", "strings", "weights"}
        if extra:
            raise ConfigError(f"unknown operator field(s) {sorted(extra)}")
        raw = op.get("strings")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("string_avg operator needs a nonempty 'strings' list")
        strings = []
        for t, s in enumerate(raw):
            if not isinstance(s, list) or not s:
                raise ConfigError(f"string {t + 1} must be a nonempty list of set indices")
            for i in s:
                if isinstance(i, bool) or not isinstance(i, int) or not 1 <= i <= m:
                    raise ConfigError(f"string {t + 1} has index {i!r} out of range 1..{m}")
            strings.append(tuple(i - 1 for i in s))
        w = op.get("weights")
        if not isinstance(w, list) or len(w) != len(strings):
            raise ConfigError("string_avg operator needs one weight per string")
        return "string_avg", None, tuple(strings), np.asarray(w, dtype=float)
    if kind == "simultaneous":
        extra = set(op) - {"type"}
        if extra:
            raise ConfigError(f"unknown operator field(s) {sorted(extra)}")
        return "simultaneous", None, None, None
    raise ConfigError(f"unknown operator type {kind!r}")


def _parse_schedule(data):
    sched = data.get("schedule", {"a": 1.0, "p": 1.0})
    if not isinstance(sched, dict):
        raise ConfigError("config field 'schedule' must be an object")
    try:
        if "values" in sched:
            extra = set(sched) - {"values"}
            if extra:
                raise ConfigError(f"unknown schedule field(s) {sorted(extra)}")
            return ExplicitSchedule(tuple(sched["values"]))
        extra = set(sched) - {"a", "p"}
        if extra:
            raise ConfigError(f"unknown schedule field(s) {sorted(extra)}")
        return PowerSchedule(float(sched.get("a", 1.0)), float(sched.get("p", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid schedule: {exc}") from exc


def parse_config(data: dict) -> InstanceConfig:
    """Validate a parsed JSON object and normalize it into an InstanceConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s) {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(data)
    if missing:
        raise ConfigError(f"missing required config field(s) {sorted(missing)}")

    n = _integer(data, "dimension", required=True)
    if n < 1:
        raise ConfigError("dimension must be at least 1")

    box_data = data["box"]
    if not isinstance(box_data, dict):
        raise ConfigError("config field 'box' must be an object with 'lo' and 'hi'")
    lo = _vector(box_data, "lo", n, required=True)
    hi = _vector(box_data, "hi", n, required=True)
    try:
        box = Box(lo, hi)
    except ValueError as exc:
        raise ConfigError(f"invalid ambient box: {exc}") from exc

    raw_sets = data["sets"]
    if not isinstance(raw_sets, list) or not raw_sets:
        raise ConfigError("config field 'sets' must be a nonempty list")
    sets = []
    for i, sd in enumerate(raw_sets):
        try:
            s = set_from_dict(sd)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid set {i + 1}: {exc}") from exc
        if s.dim != n:
            raise ConfigError(f"set {i + 1} has dimension {s.dim}, expected {n}")
        sets.append(s)

    weights = _vector(data, "weights", len(sets))
    try:
        if weights is None:
            family = ConstraintFamily.uniform(sets)
        else:
            family = ConstraintFamily(tuple(sets), weights)
    except ValueError as exc:
        raise ConfigError(f"invalid weights: {exc}") from exc

    try:
        objective = objective_from_dict(data["objective"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid objective: {exc}") from exc
    if objective.dim != n:
        raise ConfigError(f"objective has dimension {objective.dim}, expected {n}")

    kind, set_index, strings, string_weights = _parse_operator(data["operator"], len(sets))
    schedule = _parse_schedule(data)

    gamma = _number(data, "gamma", default=0.0)
    tau = _number(data, "tau", required=True)
    seed = _integer(data, "seed", required=True)
    max_iter = _integer(data, "max_iter", default=DEFAULT_MAX_ITER)
    x0 = _vector(data, "x0", n)
    grid_h = _number(data, "grid_h")

    cfg = InstanceConfig(
        dimension=n, box=box, family=family, objective=objective,
        operator_kind=kind, set_index=set_index, strings=strings,
        string_weights=string_weights, schedule=schedule, gamma=gamma,
        tau=tau, seed=seed, max_iter=max_iter, x0=x0, grid_h=grid_h,
    )
    cfg.build()  # surface every remaining invariant violation at parse time
    return cfg


def load_config(path: str) -> InstanceConfig:
    """Read and validate a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)
