import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actsim.partition import (FuseReason, build_plan, evaluated_nodes,
                              kernighan_refine, mffc_plan, n_active_words,
                              plan_active_layout, pre_group, singleton_groups)
from actsim.partition import SupernodePlan
from actsim.randgen import GenParams, random_circuit

from helpers import (acyclic, brute_force_min_cut, hanging_pair_graph, graph, load_text, names_of,
                     two_cliques)


def test_brute_force_oracle_on_two_cliques():
    assert brute_force_min_cut(two_cliques(), 4) == 1


def test_kernighan_reaches_optimal_cut_from_greedy_start():
    g = two_cliques()
    plan = kernighan_refine(g, singleton_groups(g), 4)
    assert plan.cut_size(g) == brute_force_min_cut(g, 4) == 1


def test_kernighan_repairs_interleaved_start():
    g = two_cliques()
    bad = {}
    for c in "ab":
        for i in range(4):
            bad[g.by_name(f"{c}{i}").id] = 0 if i < 2 else 1
    start = kernighan_refine(g, singleton_groups(g), 4, initial=bad, refine=False)
    assert start.cut_size(g) > 1
    plan = kernighan_refine(g, singleton_groups(g), 4, initial=bad)
    assert plan.cut_size(g) == 1
    assert len({plan.node_to_sn[g.by_name(f"a{i}").id] for i in range(4)}) == 1


def test_single_group_single_supernode():
    g = graph([("a", []), ("b", ["a"]), ("c", ["b"])])
    plan = kernighan_refine(g, pre_group(g, 8), 8)
    assert len(plan) == 1 and plan.cut_size(g) == 0


# pre_group -------------------------------------------------------------------

def test_chain_fuses_into_one_group():
    g = graph([("a", []), ("b", ["a"]), ("c", ["b"])])
    groups = pre_group(g, 8)
    assert len(groups) == 1
    assert sorted(g[n].name for n in groups[0].members) == ["a", "b", "c"]


def test_fanout_children_fuse_toward_parent():
    g = graph([("a", []), ("b", ["a"]), ("c", ["a"]), ("o1", ["b", "c"])])
    g2 = graph([("a", []), ("b", ["a"]), ("c", ["a"])])
    groups = pre_group(g2, 8)
    assert len(groups) == 1
    groups = pre_group(g, 8)
    sn = {n: i for i, pg in enumerate(groups) for n in pg.members}
    assert sn[g.by_name("b").id] == sn[g.by_name("a").id] == sn[g.by_name("c").id]


def test_chain_respects_cap():
    g = graph([("a", []), ("b", ["a"]), ("c", ["b"])])
    groups = pre_group(g, 2)
    assert [sorted(g[n].name for n in pg.members) for pg in groups] == [["a", "b"], ["c"]]


def test_pre_group_protects_out_degree_one_pair():
    g = hanging_pair_graph()
    groups = pre_group(g, 4)
    pair = [pg for pg in groups if g.by_name("x").id in pg.members][0]
    assert g.by_name("y").id in pair.members
    assert pair.reason is FuseReason.OUT_DEGREE_ONE
    protected = build_plan(g, 4, use_pre_group=True)
    plain = build_plan(g, 4, use_pre_group=False)
    assert names_of(g, protected, "x") == names_of(g, protected, "y")
    assert names_of(g, plain, "x") != names_of(g, plain, "y")
    # the plain plan is the edge-cut optimum, the protected one pays for grouping
    assert plain.cut_size(g) == brute_force_min_cut(g, 4)
    assert protected.cut_size(g) > plain.cut_size(g)


def test_oversized_pre_group_rejected():
    g = graph([("a", []), ("b", ["a"]), ("c", ["b"])])
    with pytest.raises(ValueError):
        kernighan_refine(g, pre_group(g, 8), 2)


# layout ------------------------------------------------------------------------

def _plan_of(n):
    return SupernodePlan({i: i for i in range(n)}, [[i] for i in range(n)])


def test_layout_seventy_supernodes():
    plan = _plan_of(70)
    lay = plan_active_layout(plan)
    assert n_active_words(plan) == 2
    assert all(lay[i][0] == 0 for i in range(64))
    assert lay[64] == (1, 0)


def test_layout_single_and_empty():
    assert plan_active_layout(_plan_of(1)) == [(0, 0)]
    assert n_active_words(_plan_of(0)) == 0


def test_mffc_plan_groups_fanout_free_cones():
    g = graph([("a", []), ("b", ["a"]), ("c", ["a"]), ("d", ["b", "c"])])
    plan = mffc_plan(g)
    assert names_of(g, plan, "b") == names_of(g, plan, "d")
    assert names_of(g, plan, "c") == names_of(g, plan, "d")


# invariants ----------------------------------------------------------------------

def _check_plan(g, plan, max_size):
    nodes = evaluated_nodes(g)
    seen = [n for m in plan.members for n in m]
    assert sorted(seen) == sorted(nodes)
    assert all(len(m) <= max_size for m in plan.members)
    assert acyclic(g, plan.node_to_sn)
    pos = {n: i for i, n in enumerate(g.topo_order())}
    for m in plan.members:
        assert [pos[n] for n in m] == sorted(pos[n] for n in m)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2, 5, 10, 35]),
       st.booleans(), st.booleans())
def test_plans_are_valid(seed, max_size, use_pre, use_kl):
    g = load_text(random_circuit(seed, GenParams(nodes=50)))
    plan = build_plan(g, max_size, use_pre, use_kl)
    _check_plan(g, plan, max_size)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_refinement_never_worsens_cut(seed):
    g = load_text(random_circuit(seed, GenParams(nodes=50)))
    groups = pre_group(g, 10)
    start = kernighan_refine(g, groups, 10, refine=False)
    done = kernighan_refine(g, groups, 10)
    assert done.cut_size(g) <= start.cut_size(g)
