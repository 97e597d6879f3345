import random

from hypothesis import given, settings, strategies as st

from cpsched.engine import (
    Circuit,
    CumulativeTimetable,
    Disjunctive,
    LinkStartEnd,
    MaxEndEnergy,
    MaxOf,
    Precedence,
    Search,
    SearchParams,
    Status,
    Store,
    SumPresenceEq,
)
from cpsched.formulation import build_model

from generators import random_instance


def present(store, start, duration, horizon=100, name=""):
    iv = store.new_interval(start, (0, horizon), duration, name=name)
    store.post(LinkStartEnd(iv))
    return iv


def optional(store, start, duration, horizon=100, name=""):
    iv = store.new_interval(start, (0, horizon), duration, optional=True, name=name)
    store.post(LinkStartEnd(iv))
    return iv


# fixpoint examples


def test_precedence_pushes_successor():
    store = Store()
    a = present(store, (0, 10), 5)
    b = present(store, (0, 50), 2)
    store.post(Precedence(a.end, b.start))
    assert store.propagate()
    assert store.lb[b.start] == 5


def test_exactly_one_presence():
    store = Store()
    p1, p2 = store.new_bool(), store.new_bool()
    store.post(SumPresenceEq([p1, p2], 1))
    store.fix(p1, 0)
    assert store.propagate()
    assert store.lb[p2] == store.ub[p2] == 1


def test_disjunctive_overload_fails():
    store = Store()
    ivs = [present(store, (0, 4), 6, horizon=10) for _ in range(2)]
    store.post(Disjunctive(ivs))
    assert not store.propagate()


def test_propagation_is_idempotent():
    store = Store()
    ivs = [present(store, (0, 10), d, horizon=20) for d in (3, 4, 5)]
    store.post(Disjunctive(ivs))
    store.post(Precedence(ivs[0].end, ivs[1].start))
    assert store.propagate()
    before = store.snapshot()
    store.enqueue_all()
    assert store.propagate()
    assert store.snapshot() == before


# disjunctive


def test_disjunctive_two_tasks_tight_horizon():
    store = Store()
    a = present(store, (0, 7), 3, horizon=7)
    b = present(store, (0, 7), 4, horizon=7)
    makespan = store.new_var(0, 7)
    store.post(MaxOf(makespan, [(1, a.end, 0, None), (1, b.end, 0, None)]))
    store.post(MaxEndEnergy(makespan, [a, b]))
    store.post(Disjunctive([a, b]))
    assert store.propagate()
    assert store.lb[makespan] == 7
    # either order: the first starts at 0, the other at its predecessor's duration
    for first, second in ((a, b), (b, a)):
        mark = store.mark()
        store.fix(first.start, 0)
        assert store.propagate()
        assert store.lb[second.start] == store.ub[second.start] == store.lb[first.end]
        store.backtrack(mark)


def test_model_root_bound_two_tasks_one_machine():
    from cpsched import Model

    model = Model()
    machine = model.add_machine()
    for d in (3, 4):
        model.add_mode(model.add_task(), machine, d)
    em = build_model(model.data())
    assert em.store.propagate()
    assert em.store.lb[em.objective.var] == 7


def test_disjunctive_ignores_absent():
    store = Store()
    a = optional(store, (0, 10), 5)
    b = present(store, (0, 10), 5)
    store.fix(a.start, 0)
    store.fix(a.presence, 0)
    store.post(Disjunctive([a, b]))
    assert store.propagate()
    assert (store.lb[b.start], store.ub[b.start]) == (0, 10)


def test_disjunctive_mandatory_parts_overlap_fails():
    store = Store()
    a = present(store, (2, 2), 3)
    b = present(store, (4, 4), 2)
    store.post(Disjunctive([a, b]))
    assert not store.propagate()


# cumulative


def test_cumulative_fits():
    store = Store()
    ivs = [present(store, (0, 0), 3), present(store, (1, 1), 3)]
    store.post(CumulativeTimetable(ivs, [1, 1], 2))
    assert store.propagate()


def test_cumulative_overload_fails():
    store = Store()
    ivs = [present(store, (0, 0), 3), present(store, (1, 1), 3)]
    store.post(CumulativeTimetable(ivs, [2, 1], 2))
    assert not store.propagate()


def test_cumulative_slides_over_profile():
    store = Store()
    fixed = present(store, (0, 0), 5)
    moving = present(store, (0, 9), 3)
    store.post(CumulativeTimetable([fixed, moving], [2, 2], 3))
    assert store.propagate()
    assert store.lb[moving.start] == 5


# circuit


def arc_matrix(store, n):
    return [[store.new_bool(f"b{u}{v}") for v in range(n)] for u in range(n)]


def test_circuit_completes_hamiltonian_cycle():
    store = Store()
    arcs = arc_matrix(store, 3)
    store.post(Circuit(arcs))
    store.fix(arcs[0][1], 1)
    store.fix(arcs[1][2], 1)
    assert store.propagate()
    assert store.lb[arcs[2][0]] == 1
    assert store.ub[arcs[2][1]] == 0


def test_circuit_self_loop_excludes_node():
    store = Store()
    arcs = arc_matrix(store, 3)
    store.post(Circuit(arcs))
    store.fix(arcs[1][1], 1)
    assert store.propagate()
    for v in (0, 2):
        assert store.ub[arcs[1][v]] == 0
        assert store.ub[arcs[v][1]] == 0


def test_circuit_dummy_self_loop_forces_all():
    store = Store()
    arcs = arc_matrix(store, 4)
    store.post(Circuit(arcs))
    store.fix(arcs[0][0], 1)
    assert store.propagate()
    for u in range(1, 4):
        assert store.lb[arcs[u][u]] == 1


def test_circuit_enumerates_exactly_the_tours():
    """Solutions over 4 nodes: every subset of {1,2,3} visited in every order."""
    store = Store()
    arcs = arc_matrix(store, 4)
    store.post(Circuit(arcs))
    flat = [var for row in arcs for var in row]
    found = set()

    def dfs():
        if not store.propagate():
            return
        free = [v for v in flat if store.lb[v] != store.ub[v]]
        if not free:
            chosen = tuple(v for v in flat if store.lb[v] == 1)
            found.add(chosen)
            return
        for value in (0, 1):
            mark = store.mark()
            store.fix(free[0], value)
            dfs()
            store.backtrack(mark)

    dfs()
    # 1 empty tour + 3 singletons + 3*2 pairs + 3! triples
    assert len(found) == 1 + 3 + 6 + 6


# search


def test_search_single_interval():
    store = Store()
    iv = present(store, (0, 20), 5, horizon=20)
    result = Search(store, iv.end, [], [iv]).run()
    assert (result.status, result.objective, result.lower_bound) == (Status.OPTIMAL, 5, 5)


def test_search_two_on_machine():
    store = Store()
    ivs = [present(store, (0, 20), d, horizon=20) for d in (3, 4)]
    makespan = store.new_var(0, 20)
    store.post(MaxOf(makespan, [(1, iv.end, 0, None) for iv in ivs]))
    store.post(Disjunctive(ivs))
    result = Search(store, makespan, [], ivs).run()
    assert (result.status, result.objective) == (Status.OPTIMAL, 7)


def test_search_latest_end_infeasible():
    store = Store()
    iv = store.new_interval((0, 3), (0, 3), 5)
    store.post(LinkStartEnd(iv))
    result = Search(store, iv.end, [], [iv]).run()
    assert result.status == Status.INFEASIBLE
    assert result.objective is None


def test_search_node_limit_without_incumbent():
    store = Store()
    ivs = [present(store, (0, 60), d, horizon=60) for d in (3, 4, 5)]
    makespan = store.new_var(0, 60)
    store.post(MaxOf(makespan, [(1, iv.end, 0, None) for iv in ivs]))
    store.post(Disjunctive(ivs))
    result = Search(store, makespan, [], ivs, params=SearchParams(node_limit=1)).run()
    assert result.status == Status.UNKNOWN


# properties


def _decisions(em, rng):
    """Random decisions (var, lb, ub) over the branching variables."""
    out = []
    intervals = em.branch_intervals
    for _ in range(rng.randint(1, 8)):
        if em.branch_bools and rng.random() < 0.5:
            var = rng.choice(em.branch_bools)
            out.append((var, value := rng.randint(0, 1), value))
        else:
            iv = rng.choice(intervals)
            lo = rng.randint(0, 6)
            out.append((iv.start, lo, lo + rng.randint(0, 6)))
    return out


def _apply(store, var, lo, hi) -> bool:
    from cpsched.engine import Inconsistent

    try:
        store.set_lb(var, lo)
        store.set_ub(var, hi)
    except Inconsistent:
        store.clear_queue()
        return False
    return store.propagate()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_trail_restores_exactly(instance_seed, seed):
    rng = random.Random(seed)
    em = build_model(random_instance(instance_seed))
    store = em.store
    if not store.propagate():
        return
    snapshots = []
    for decision in _decisions(em, rng):
        snapshots.append((store.mark(), store.snapshot()))
        if not _apply(store, *decision):
            break
    while snapshots:
        mark, snap = snapshots.pop(rng.randrange(len(snapshots)))
        store.backtrack(mark)
        assert store.snapshot() == snap
        snapshots = [item for item in snapshots if item[0] <= mark]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_backtracked_state_matches_fresh_propagation(instance_seed, seed):
    rng = random.Random(seed)
    data = random_instance(instance_seed)
    em = build_model(data)
    store = em.store
    if not store.propagate():
        return
    decisions = _decisions(em, rng)
    marks = []
    for decision in decisions:
        marks.append(store.mark())
        if not _apply(store, *decision):
            decisions = decisions[: len(marks)]
            break
    keep = rng.randint(0, len(marks) - 1)
    store.backtrack(marks[keep])

    fresh = build_model(data).store
    assert fresh.propagate()
    for decision in decisions[:keep]:
        assert _apply(fresh, *decision)
    assert store.snapshot() == fresh.snapshot()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_propagators_never_widen(instance_seed, seed):
    rng = random.Random(seed)
    em = build_model(random_instance(instance_seed))
    store = em.store
    widened = []

    for prop in store.propagators:
        inner = prop.propagate

        def wrapped(s, inner=inner, prop=prop):
            lb, ub = s.lb[:], s.ub[:]
            try:
                inner(s)
            finally:
                n = len(lb)
                if any(s.lb[i] < lb[i] or s.ub[i] > ub[i] for i in range(n)):
                    widened.append(prop)

        prop.propagate = wrapped

    if store.propagate():
        for decision in _decisions(em, rng):
            if not _apply(store, *decision):
                break
    assert not widened
