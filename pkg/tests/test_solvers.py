"""Solver loop behavior: schedules, stepping, budgets, and the descent check."""

import numpy as np
import pytest

from datacompat import (
    Box,
    ClampToBox,
    CompatCriteria,
    ConfigError,
    ConstraintFamily,
    ExplicitSchedule,
    Halfspace,
    NormDistance,
    PowerSchedule,
    PreconditionError,
    ProblemInstance,
    ProjectionOperator,
    Quadratic,
    descent_check,
    hsasm_run,
    hsm_run,
    hsm_step,
    hspsm_run,
)


def make_1d_instance(**overrides):
    kwargs = dict(
        family=ConstraintFamily((Box([0.0], [1.0]),), [1.0]),
        objective=Quadratic([[2.0]], [-6.0], 9.0),  # (x-3)^2
        box=Box([-2.0], [2.0]),
        operator_kind="projection",
        schedule=PowerSchedule(),
        gamma=0.0,
        tau=0.05,
        seed=7,
        max_iter=1000,
        x0=np.array([-2.0]),
        set_index=0,
    )
    kwargs.update(overrides)
    return ProblemInstance(**kwargs)


CRIT_1D = CompatCriteria(gamma=0.0, tau=0.05, l_bar=10.0,
                         reference=[[1.0]], ref_min_value=4.0)


def test_power_schedule_values():
    sched = PowerSchedule()
    assert sched(0) == 1.0
    assert sched(3) == pytest.approx(0.25)
    half = PowerSchedule(a=0.5, p=0.5)
    assert half(3) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        PowerSchedule(a=0.0)
    with pytest.raises(ValueError):
        PowerSchedule(p=1.5)
    with pytest.raises(ValueError):
        sched(-1)


def test_power_schedule_divergence_proxy():
    rng = np.random.default_rng(51)
    ks = np.arange(10**6, dtype=float)
    for _ in range(5):
        a, p = rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)
        sched = PowerSchedule(a=a, p=p)
        partial = np.sum(a * (ks + 1.0) ** (-p))
        assert partial > 10.0
        steps = [sched(k) for k in range(100)]
        assert all(0 < s <= 1 for s in steps)
        assert all(s1 >= s2 for s1, s2 in zip(steps, steps[1:]))


def test_explicit_schedule_repeats_last():
    sched = ExplicitSchedule((0.5, 0.25))
    assert sched(0) == 0.5 and sched(1) == 0.25 and sched(10) == 0.25
    with pytest.raises(ValueError):
        ExplicitSchedule(())
    with pytest.raises(ValueError):
        ExplicitSchedule((0.5, 1.5))


def test_hsm_step_example():
    op = ClampToBox(ProjectionOperator(Box([0.0], [1.0])), Box([-2.0], [2.0]))
    f = Quadratic([[2.0]], [-6.0], 9.0)
    out = hsm_step(np.array([0.0]), 0, op, f, PowerSchedule())
    assert out[0] == pytest.approx(1.0)


def test_hsm_step_zero_subgradient_branch():
    op = ProjectionOperator(Box([0.0], [1.0]))
    f = NormDistance([2.0])
    out = hsm_step(np.array([2.0]), 0, op, f, PowerSchedule())
    assert out[0] == pytest.approx(1.0)  # T applied directly at the minimizer


def test_hsm_run_known_trajectory():
    inst = make_1d_instance()
    res = hsm_run(inst, CRIT_1D)
    xs = [r.x[0] for r in res.rows]
    assert xs == pytest.approx([-2.0, 0.0, 0.5, 5.0 / 6.0, 1.0])
    assert res.out_index == 4
    assert res.iterations_used == 4
    assert res.report.dist_to_S == 0.0


def test_step_residual_bound():
    inst = make_1d_instance()
    res = hsm_run(inst, CRIT_1D, stop_on_out=False, max_iter=200)
    for prev, row in zip(res.rows, res.rows[1:]):
        assert row.residual <= prev.alpha + 1e-12


def test_iterates_stay_in_box():
    inst = make_1d_instance()
    res = hsm_run(inst, CRIT_1D, stop_on_out=False, max_iter=100)
    for row in res.rows[1:]:
        assert inst.box.contains(row.x, tol=0.0)


def test_out_at_start_with_loose_tau():
    crit = CompatCriteria(gamma=0.0, tau=0.9, l_bar=10.0,
                          reference=[[1.0]], ref_min_value=4.0)
    inst = make_1d_instance(tau=0.9, x0=np.array([0.5]))
    res = hsm_run(inst, crit, max_iter=0)
    assert res.out_index == 0
    assert len(res.rows) == 1


def test_budget_exhaustion_is_undefined():
    inst = make_1d_instance(x0=np.array([-2.0]))
    res = hsm_run(inst, CRIT_1D, max_iter=1)
    assert res.out_index is None
    assert len(res.rows) == 2
    assert res.report.dist_to_S > 0


def test_max_iter_zero_records_start_only():
    inst = make_1d_instance()
    res = hsm_run(inst, CRIT_1D, max_iter=0)
    assert res.out_index is None
    assert len(res.rows) == 1
    assert res.rows[0].x[0] == -2.0


def test_run_deterministic_without_x0():
    inst = make_1d_instance(x0=None)
    a = hsm_run(inst, CRIT_1D, stop_on_out=False, max_iter=50)
    b = hsm_run(inst, CRIT_1D, stop_on_out=False, max_iter=50)
    for ra, rb in zip(a.rows, b.rows):
        assert np.array_equal(ra.x, rb.x)
    other = make_1d_instance(x0=None, seed=8)
    c = hsm_run(other, CRIT_1D, stop_on_out=False, max_iter=50)
    assert not np.array_equal(a.rows[0].x, c.rows[0].x)


def test_persistence_past_out():
    inst = make_1d_instance()
    res = hsm_run(inst, CRIT_1D, stop_on_out=False, max_iter=100)
    k = res.out_index
    assert k == 4
    h = 1e-3
    for row in res.rows[k:]:
        dist = abs(row.x[0] - 1.0)
        assert dist <= CRIT_1D.tau + h
        assert row.f <= 4.0 + (CRIT_1D.tau + h) * CRIT_1D.l_bar


def test_specialized_runners_enforce_operator_kind():
    inst = make_1d_instance()
    with pytest.raises(ConfigError):
        hsasm_run(inst, CRIT_1D)
    with pytest.raises(ConfigError):
        hspsm_run(inst, CRIT_1D)


def test_single_string_reduces_to_sequential_projections():
    fam = ConstraintFamily((Halfspace([1.0], 1.0), Halfspace([-1.0], 0.0)), [0.5, 0.5])
    crit = CompatCriteria(gamma=0.0, tau=0.1, l_bar=3.0, reference=[[0.0]], ref_min_value=0.0)
    base = dict(
        family=fam, objective=Quadratic([[2.0]], [0.0]), box=Box([-2.0], [2.0]),
        schedule=PowerSchedule(), gamma=0.0, tau=0.1, seed=3, max_iter=100,
        x0=np.array([1.8]),
    )
    avg = ProblemInstance(operator_kind="string_avg", strings=((0, 1),),
                          string_weights=[1.0], **base)
    res_avg = hsasm_run(avg, crit, stop_on_out=False, max_iter=30)
    # same dynamics by hand: one string visiting both sets in order
    op = avg.build_operator()
    x = np.array([1.8])
    f = base["objective"]
    for row in res_avg.rows:
        assert np.allclose(row.x, x)
        x = hsm_step(x, row.k, op, f, base["schedule"])


def test_instance_validation():
    with pytest.raises(ConfigError):
        make_1d_instance(tau=1.0)
    with pytest.raises(ConfigError):
        make_1d_instance(gamma=-0.5)
    with pytest.raises(ConfigError):
        make_1d_instance(max_iter=-1)
    with pytest.raises(ConfigError):
        make_1d_instance(x0=np.array([5.0]))  # outside ambient box
    with pytest.raises(ConfigError):
        make_1d_instance(operator_kind="string_avg")  # missing strings
    with pytest.raises(ConfigError):
        make_1d_instance(set_index=3)
    with pytest.raises(ConfigError):
        ProblemInstance(
            family=ConstraintFamily((Box([0.0], [1.0]), Box([2.0], [3.0])), [0.5, 0.5]),
            objective=Quadratic([[2.0]], [0.0]),
            box=Box([-2.0], [4.0]),
            operator_kind="string_avg",
            strings=((0,),),  # set 1 never visited: not a covering layout
            string_weights=[1.0],
            schedule=PowerSchedule(),
            gamma=0.0, tau=0.1, seed=1, max_iter=10,
        )


def test_descent_check_hand_example():
    op = ProjectionOperator(Box([-1.0], [1.0]))
    f = Quadratic([[2.0]], [0.0])  # x^2
    holds, lhs, rhs = descent_check([1.0], [0.0], 0.5, 0.1, f, op, l_bar=4.0)
    assert holds
    assert lhs == pytest.approx(0.81)
    assert rhs == pytest.approx(1.0 - 0.00625 + 0.01)


def test_descent_check_preconditions():
    op = ProjectionOperator(Box([-1.0], [1.0]))
    f = Quadratic([[2.0]], [0.0])
    with pytest.raises(PreconditionError):
        descent_check([1.0], [0.0], 0.5, 0.0, f, op, l_bar=4.0)  # alpha = 0
    with pytest.raises(PreconditionError):
        descent_check([0.0], [0.0], 0.5, 0.1, f, op, l_bar=4.0)  # x = x_bar
    with pytest.raises(PreconditionError):
        descent_check([1.0], [0.0], 1.5, 0.1, f, op, l_bar=4.0)  # delta > 1
    with pytest.raises(PreconditionError):
        descent_check([1.0], [0.0], 0.5, 0.1, f, op, l_bar=0.5)  # bound not > 1
    with pytest.raises(PreconditionError):
        # radius bound violated: ||x|| > 3*m_radius + 2
        descent_check([20.0], [0.0], 0.5, 0.1, Quadratic([[2.0]], [0.0]),
                      ProjectionOperator(Box([-30.0], [30.0])), l_bar=100.0, m_radius=1.0)
