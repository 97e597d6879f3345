import pytest
from hypothesis import given, settings, strategies as st

from cpsched import Model, Status, UnsupportedModel, build_model, build_naive_fjsp_model, check, evaluate, solve
from cpsched.engine import Precedence
from cpsched.formulation import model_horizon

from generators import random_fjsp, random_instance
from oracle import brute_force


def one_task():
    model = Model()
    machine = model.add_machine()
    model.add_mode(model.add_task(job=model.add_job()), machine, 5)
    return model.data()


def test_single_task_shape():
    em = build_model(one_task())
    assert len(em.task_intervals) == 1
    assert len(em.mode_intervals) == 1
    assert len(em.arcs) == 1
    matrix = em.arcs[0]
    assert len(matrix) * len(matrix[0]) == 4
    assert em.store.propagate()
    assert em.store.lb[em.presence[0]] == 1


def test_single_task_both_formulations():
    data = one_task()
    assert solve(data).objective == solve(data, formulation="naive-fjsp").objective == 5


def test_different_resources_implication():
    model = Model()
    m0, m1 = model.add_machine(), model.add_machine()
    a, b = model.add_task(), model.add_task()
    on_m0 = model.add_mode(a, m0, 2)
    on_m1 = model.add_mode(a, m1, 2)
    model.add_mode(b, m0, 2)
    model.add_different_resources(a, b)
    em = build_model(model.data())
    assert em.store.propagate()
    assert em.store.ub[em.presence[on_m0]] == 0
    assert em.store.lb[em.presence[on_m1]] == 1


def test_identical_resources_implication():
    model = Model()
    m0, m1 = model.add_machine(), model.add_machine()
    a, b = model.add_task(), model.add_task()
    model.add_mode(a, m0, 2)
    a_m1 = model.add_mode(a, m1, 2)
    model.add_mode(b, m1, 2)
    model.add_identical_resources(a, b)
    em = build_model(model.data())
    assert em.store.propagate()
    assert em.store.lb[em.presence[a_m1]] == 1


def _consecutive_pair(shared: bool):
    model = Model()
    m0, m1 = model.add_machine(), model.add_machine()
    a, b = model.add_task(), model.add_task()
    model.add_mode(a, m0, 2)
    model.add_mode(b, m0 if shared else m1, 3)
    return model


def test_consecutive_without_shared_machine_posts_nothing():
    plain = build_model(_consecutive_pair(False).data()).propagator_counts()
    model = _consecutive_pair(False)
    model.add_consecutive(0, 1)
    assert build_model(model.data()).propagator_counts() == plain


def test_consecutive_with_shared_machine_posts_implication():
    plain = build_model(_consecutive_pair(True).data()).propagator_counts()
    model = _consecutive_pair(True)
    model.add_consecutive(0, 1)
    counts = build_model(model.data()).propagator_counts()
    assert counts["Implication"] == plain["Implication"] + 1


def test_counts_are_a_function_of_the_data():
    data = random_instance(5)
    assert build_model(data).propagator_counts() == build_model(data).propagator_counts()
    assert build_model(data).store.num_vars == build_model(data).store.num_vars


def test_naive_pairwise_precedences():
    model = Model()
    machines = [model.add_machine() for _ in range(2)]
    job = model.add_job()
    first, second = model.add_task(job=job), model.add_task(job=job)
    for task in (first, second):
        for machine in machines:
            model.add_mode(task, machine, 2)
    model.add_end_before_start(first, second)
    em = build_naive_fjsp_model(model.data())
    assert sum(type(p) is Precedence for p in em.store.propagators) == 4
    assert em.task_intervals == []


@pytest.mark.parametrize(
    "change",
    [
        lambda m: m.add_renewable(2),
        lambda m: m.set_objective(total_flow_time=1),
        lambda m: m.add_setup_time(0, 1, 0, 2),
        lambda m: m.add_start_before_start(0, 1),
    ],
)
def test_naive_rejects_non_fjsp(change):
    model = Model()
    machine = model.add_machine()
    job = model.add_job(due_date=3)
    for _ in range(2):
        model.add_mode(model.add_task(job=job), machine, 1)
    change(model)
    with pytest.raises(UnsupportedModel):
        build_naive_fjsp_model(model.data())


def test_no_setup_means_zero_lag():
    model = Model()
    machine = model.add_machine()
    for d in (2, 3, 4):
        model.add_mode(model.add_task(), machine, d)
    assert solve(model.data()).objective == 9


def test_setup_is_respected():
    model = Model()
    machine = model.add_machine()
    a, b = model.add_task(), model.add_task()
    model.add_mode(a, machine, 2)
    model.add_mode(b, machine, 3)
    model.add_end_before_start(a, b)
    model.add_setup_time(a, b, machine, 4)
    result = solve(model.data())
    assert result.objective == 9
    assert result.best.tasks[b].start == 6


def test_absent_modes_leave_no_usage():
    model = Model()
    m0, m1 = model.add_machine(), model.add_machine()
    a, b = model.add_task(), model.add_task()
    model.add_mode(a, m0, 5)
    model.add_mode(a, m1, 5)
    model.add_mode(b, m0, 5)
    result = solve(model.data())
    assert result.objective == 5
    assert result.best.tasks[a].mode == 1
    assert not check(result.best, model.data())


def _fixed(starts_durations, **objective):
    """Tasks pinned to given start times, each on its own machine and job."""
    model = Model()
    for start, duration, job_kwargs in starts_durations:
        machine = model.add_machine()
        job = model.add_job(**job_kwargs)
        task = model.add_task(job=job, earliest_start=start, latest_start=start)
        model.add_mode(task, machine, duration)
    model.set_objective(**objective)
    return model.data()


def test_objective_makespan():
    data = _fixed([(0, 4, {}), (3, 6, {})], makespan=1)
    assert solve(data).objective == 9


def test_objective_weighted_tardiness():
    data = _fixed([(4, 6, {"due_date": 7, "weight": 2})], total_tardiness=1)
    assert solve(data).objective == 6


def test_objective_mixed_sum():
    data = _fixed([(0, 4, {"due_date": 5}), (3, 6, {"due_date": 8})], makespan=2, tardy_jobs=3)
    assert solve(data).objective == 2 * 9 + 3 * 1


def test_horizon_extends_for_earliness():
    model = Model()
    machine = model.add_machine()
    job = model.add_job(due_date=40)
    model.add_mode(model.add_task(job=job), machine, 2)
    model.set_objective(total_earliness=1)
    data = model.data()
    assert model_horizon(data) >= 40
    result = solve(data)
    assert (result.status, result.objective) == (Status.OPTIMAL, 0)
    assert result.best.tasks[0].end == 40


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_decoded_solutions_pass_the_checker(seed):
    data = random_instance(seed)
    result = solve(data, time_limit=5, node_limit=400)
    assert result.lower_bound is None or result.objective is None or result.lower_bound <= result.objective
    if result.best is not None:
        assert check(result.best, data) == []
        assert evaluate(result.best, data) == result.objective


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_formulations_agree_with_oracle_on_fjsp(seed):
    data = random_fjsp(seed)
    standard = solve(data, time_limit=10)
    naive = solve(data, time_limit=10, formulation="naive-fjsp")
    assert standard.status == naive.status == Status.OPTIMAL
    assert standard.objective == naive.objective
    assert not check(naive.best, data)
    horizon_data = data.replace(horizon=model_horizon(data))
    assert brute_force(horizon_data)[0] == standard.objective
