import random

import pytest
from hypothesis import given, settings, strategies as st

from cpsched import Model, Objective, Solution, check, evaluate, evaluate_flagged, solve
from cpsched.solution import Result, TaskData, dumps_solution, loads_solution, objective_terms

from generators import random_instance
from oracle import feasible


def two_on_machine(starts):
    model = Model()
    machine = model.add_machine()
    job = model.add_job()
    for d in (3, 4):
        model.add_mode(model.add_task(job=job), machine, d)
    data = model.data()
    return data, Solution.from_starts(data, [0, 1], starts)


def kinds(violations):
    return [v.kind for v in violations]


def test_back_to_back_is_feasible():
    data, sol = two_on_machine([0, 3])
    assert check(sol, data) == []


def test_machine_overlap_measured():
    data, sol = two_on_machine([0, 2])
    violations = check(sol, data)
    assert kinds(violations) == ["MachineOverlap"]
    assert violations[0].measurement == 1


def test_renewable_peak_excess():
    model = Model()
    res = model.add_renewable(2)
    for _ in range(3):
        model.add_mode(model.add_task(), res, 5, {res: 1})
    data = model.data()
    violations = check(Solution.from_starts(data, [0, 1, 2], [0, 0, 0]), data)
    assert kinds(violations) == ["CapacityExceeded"]
    assert violations[0].measurement == 1


def test_non_renewable_budget():
    model = Model()
    machine, budget = model.add_machine(), model.add_non_renewable(5)
    for _ in range(2):
        model.add_mode(model.add_task(), [machine, budget], 1, {budget: 3})
    data = model.data()
    violations = check(Solution.from_starts(data, [0, 1], [0, 1]), data)
    assert kinds(violations) == ["CapacityExceeded"]
    assert violations[0].measurement == 1


def test_every_measurement_positive():
    model = Model()
    machine = model.add_machine()
    job = model.add_job(release=2, deadline=6)
    a, b = model.add_task(job=job), model.add_task(job=job, latest_end=4)
    model.add_mode(a, machine, 3)
    model.add_mode(b, machine, 3)
    model.add_end_before_start(a, b, 1)
    model.add_setup_time(a, b, machine, 2)
    model.add_consecutive(b, a)
    data = model.data()
    violations = check(Solution.from_starts(data, [0, 1], [0, 2]), data)
    assert {"Release", "LatestEnd", "MachineOverlap", "EndBeforeStart"} <= set(kinds(violations))
    assert all(v.measurement > 0 for v in violations)


def test_timing_semantics_with_negative_delay():
    model = Model()
    m0, m1 = model.add_machine(), model.add_machine()
    a, b = model.add_task(), model.add_task()
    model.add_mode(a, m0, 4)
    model.add_mode(b, m1, 4)
    model.add_start_before_start(a, b, -2)  # start_a - 2 <= start_b
    data = model.data()
    assert check(Solution.from_starts(data, [0, 1], [3, 1]), data) == []
    assert kinds(check(Solution.from_starts(data, [0, 1], [4, 1]), data)) == ["StartBeforeStart"]


def test_setup_only_between_neighbours():
    model = Model()
    machine = model.add_machine()
    tasks = [model.add_task() for _ in range(3)]
    for t in tasks:
        model.add_mode(t, machine, 2)
    model.add_setup_time(tasks[0], tasks[2], machine, 5)
    data = model.data()
    # task 1 sits between 0 and 2, so the 0 -> 2 setup does not apply
    assert check(Solution.from_starts(data, [0, 1, 2], [0, 2, 4]), data) == []
    violations = check(Solution.from_starts(data, [0, 1, 2], [0, 9, 3]), data)
    assert kinds(violations) == ["SetupTime"]
    assert violations[0].measurement == 4


def test_consecutive_needs_no_task_in_between():
    model = Model()
    machine = model.add_machine()
    tasks = [model.add_task() for _ in range(3)]
    for t in tasks:
        model.add_mode(t, machine, 2)
    model.add_consecutive(tasks[0], tasks[1])
    data = model.data()
    assert check(Solution.from_starts(data, [0, 1, 2], [0, 3, 6]), data) == []
    assert kinds(check(Solution.from_starts(data, [0, 1, 2], [0, 4, 2]), data)) == ["Consecutive"]


def test_identical_and_different_resources():
    model = Model()
    m0, m1 = model.add_machine(), model.add_machine()
    a, b = model.add_task(), model.add_task()
    for t in (a, b):
        model.add_mode(t, m0, 1)
        model.add_mode(t, m1, 1)
    model.add_identical_resources(a, b)
    data = model.data()
    assert kinds(check(Solution.from_starts(data, [0, 3], [0, 0]), data)) == ["IdenticalResources"]
    model.add_different_resources(a, b)
    data = model.data()
    assert "DifferentResources" in kinds(check(Solution.from_starts(data, [0, 2], [0, 1]), data))


def test_duration_and_mode_structure():
    data, _ = two_on_machine([0, 3])
    bad_duration = Solution([TaskData(0, 0, 2), TaskData(1, 3, 7)])
    assert "Duration" in kinds(check(bad_duration, data))
    wrong_mode = Solution([TaskData(1, 0, 4), TaskData(1, 4, 8)])
    assert "ModeNotOfTask" in kinds(check(wrong_mode, data))
    assert kinds(check(Solution([TaskData(0, 0, 3)]), data)) == ["Structure"]


# objectives


def _pinned(ends_and_jobs, **objective):
    """One task per job on its own machine, with the given job attributes."""
    model = Model()
    starts, modes = [], []
    for (start, duration), job_kwargs in ends_and_jobs:
        machine = model.add_machine()
        task = model.add_task(job=model.add_job(**job_kwargs))
        modes.append(model.add_mode(task, machine, duration))
        starts.append(start)
    model.set_objective(**objective)
    data = model.data()
    return data, Solution.from_starts(data, modes, starts)


def test_evaluate_makespan():
    data, sol = _pinned([((0, 4), {}), ((3, 6), {})], makespan=1)
    assert evaluate(sol, data) == 9


def test_evaluate_weighted_flow_time():
    data, sol = _pinned([((2, 10), {"release": 2, "weight": 3})], total_flow_time=1)
    assert evaluate(sol, data) == 30


def test_evaluate_max_lateness():
    jobs = [((0, 8), {"due_date": 10, "weight": 1}), ((0, 9), {"due_date": 6, "weight": 2})]
    data, sol = _pinned(jobs, max_lateness=1)
    assert evaluate(sol, data) == 6


def test_max_lateness_can_be_negative():
    data, sol = _pinned([((0, 3), {"due_date": 10})], max_lateness=1)
    assert evaluate(sol, data) == -7


def test_evaluate_flags_infeasible():
    data, sol = two_on_machine([0, 1])
    value, ok = evaluate_flagged(sol, data)
    assert (value, ok) == (5, False)
    data, sol = two_on_machine([0, 3])
    assert evaluate_flagged(sol, data) == (7, True)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(1, 9), st.integers(0, 30)), min_size=1, max_size=5))
def test_tardiness_is_positive_lateness(jobs):
    for start, duration, due in jobs:
        one, one_sol = _pinned([((start, duration), {"due_date": due})], max_lateness=1)
        terms = objective_terms(one_sol, one)
        assert terms[Objective.TOTAL_TARDINESS] == max(terms[Objective.MAX_LATENESS], 0)


# serialisation


def test_solution_round_trip():
    data, sol = two_on_machine([0, 3])
    text = dumps_solution(sol, data)
    assert loads_solution(text) == sol
    assert '"jobs"' in text


def test_result_round_trip():
    data, _ = two_on_machine([0, 3])
    result = solve(data)
    again = Result.from_dict(result.to_dict(data))
    assert again.best == result.best
    assert (again.status, again.objective, again.lower_bound) == (result.status, result.objective, result.lower_bound)


def test_loads_rejects_garbage():
    with pytest.raises(ValueError):
        loads_solution('{"tasks": [{"mode": 0}]}')


# checker against the independent feasibility oracle


def _perturb(sol, data, rng):
    tasks = list(sol.tasks)
    t = rng.randrange(len(tasks))
    item = tasks[t]
    choice = rng.random()
    if choice < 0.7:
        shift = rng.choice((-2, -1, 1, 2))
        tasks[t] = TaskData(item.mode, item.start + shift, item.end + shift)
    else:
        mode = rng.choice(data.tasks[t].modes)
        tasks[t] = TaskData(mode, item.start, item.start + data.modes[mode].duration)
    return Solution(tasks)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_checker_agrees_with_oracle_on_perturbations(instance_seed, seed):
    data = random_instance(instance_seed)
    result = solve(data, time_limit=5, node_limit=300)
    if result.best is None:
        return
    assert feasible(data, result.best)
    rng = random.Random(seed)
    for _ in range(5):
        mutated = _perturb(result.best, data, rng)
        assert (check(mutated, data) == []) == feasible(data, mutated)
