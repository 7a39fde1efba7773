from __future__ import annotations

import itertools

from oracles import isomorphic_configs

from qdas import load_corpus, parse_model
from qdas.ctg import (
    CALL,
    QUEUE,
    TASK,
    WAIT,
    Configuration,
    Ctg,
    Edge,
    ParikhImage,
    Vertex,
    canonical_key,
    covers,
    dequeue,
    enqueue,
    head,
    initial_config,
    letwait,
    parikh,
    remove,
    step,
    successors,
    tail,
    well_formed,
)
from qdas.explorer import ExploreLimits, explore

QUEUES = """
qdas qs {
  domain { 0, 1 }
  vars { x, y }
  cqueue q1;
  squeue q2;
  block main { states s, t, f; init s; final f; s -> t : x == 0; t -> f : dispatch_s(q2, g2); }
  block g1 { states a, b; init a; final b; a -> b : true; }
  block g2 { states a, b; init a; final b; a -> b : y <- 1; }
}
"""


def qs():
    return parse_model(QUEUES)


def relabel(c: Configuration, perm: dict[int, int]) -> Configuration:
    g = c.graph
    vertices = tuple(sorted(Vertex(perm[v.id], v.kind, v.block, v.queue, v.state) for v in g.vertices))
    edges = frozenset(Edge(perm[e.src], perm[e.dst], e.kind, e.queue) for e in g.edges)
    return Configuration(Ctg(vertices, edges, max(perm.values()) + 1), c.valuation)


def test_initial_config():
    m = qs()
    c = initial_config(m)
    assert len(c.graph.vertices) == 1 and not c.graph.edges
    (v,) = c.graph.vertices
    assert (v.kind, v.block, v.state) == (TASK, "main", "s")
    assert c.values == {"x": "0", "y": "0"}


def test_enqueue_on_empty_queue_adds_no_edge():
    m = qs()
    g, vid = enqueue(m, initial_config(m).graph, "q1", "g1")
    assert g.vertex(vid).kind == CALL and not g.edges


def test_enqueue_links_to_tail():
    m = qs()
    g, a = enqueue(m, initial_config(m).graph, "q1", "g1")
    g, b = enqueue(m, g, "q1", "g2")
    g, c = enqueue(m, g, "q1", "g1")
    assert Edge(c, b, QUEUE, "q1") in g.edges
    assert head(g, "q1").id == a and tail(g, "q1").id == c


def test_enqueue_on_serial_queue_links_to_running_task():
    m = qs()
    g, a = enqueue(m, initial_config(m).graph, "q2", "g2")
    g = dequeue(m, g, "q2")
    assert g.vertex(a).kind == TASK
    g, b = enqueue(m, g, "q2", "g2")
    assert g.edges == {Edge(b, a, QUEUE, "q2")}


def test_dequeue_empty_queue_is_undefined():
    m = qs()
    assert dequeue(m, initial_config(m).graph, "q1") is None


def test_dequeue_blocked_serial_head_is_undefined():
    m = qs()
    g, a = enqueue(m, initial_config(m).graph, "q2", "g2")
    g = dequeue(m, g, "q2")
    g, b = enqueue(m, g, "q2", "g2")
    assert dequeue(m, g, "q2") is None
    g = remove(g, a)
    g = dequeue(m, g, "q2")
    assert g.vertex(b).kind == TASK


def test_concurrent_dequeue_drops_fifo_edge():
    m = qs()
    g, a = enqueue(m, initial_config(m).graph, "q1", "g1")
    g, b = enqueue(m, g, "q1", "g1")
    g = dequeue(m, g, "q1")
    assert not g.edges and head(g, "q1").id == b


def test_step_in_two_tasks_gives_two_graphs():
    m = qs()
    g, a = enqueue(m, initial_config(m).graph, "q1", "g1")
    g, b = enqueue(m, g, "q1", "g1")
    g = dequeue(m, dequeue(m, g, "q1"), "q1")
    results = step(g, "g1", "a", "b")
    assert sorted(v for v, _ in results) == [a, b]
    assert results[0][1] != results[1][1]


def test_step_needs_an_unblocked_task_at_src():
    m = qs()
    g = initial_config(m).graph
    assert step(g, "main", "t", "f") == []
    g2, v = enqueue(m, g, "q1", "g1")
    g2 = letwait(g2, 0, v)
    assert step(g2, "main", "s", "t") == []


def test_letwait():
    m = qs()
    g, v = enqueue(m, initial_config(m).graph, "q1", "g1")
    assert letwait(g, None, v) == g
    g2 = letwait(g, 0, v)
    assert g2.edges == {Edge(0, v, WAIT)}
    assert well_formed(m, g2) == []


def test_test_action_gives_single_successor():
    m = qs()
    (succ,) = successors(m, initial_config(m))
    move, c = succ
    assert move.kind == "step" and move.dst == "t"
    assert [v.state for v in c.graph.vertices] == ["t"]


def test_final_unblocked_task_can_be_removed():
    m = qs()
    c = initial_config(m)
    c = Configuration(Ctg((Vertex(0, TASK, "main", "ı", "f"),), frozenset(), 1), c.valuation)
    moves = [mv for mv, _ in successors(m, c)]
    assert any(mv.kind == "remove" for mv in moves)
    assert any(not c2.graph.vertices for mv, c2 in successors(m, c) if mv.kind == "remove")


def test_serial_dequeue_links_next_call_to_new_task():
    m = qs()
    g, a = enqueue(m, initial_config(m).graph, "q2", "g2")
    g, b = enqueue(m, g, "q2", "g2")
    g = dequeue(m, g, "q2")
    assert g.edges == {Edge(b, a, QUEUE, "q2")}
    assert well_formed(m, g) == []


def test_sync_dispatch_blocks_caller():
    m = qs()
    c = successors(m, initial_config(m))[0][1]
    (move, c2), = successors(m, c)
    assert move.action is not None
    callee = [v for v in c2.graph.vertices if v.block == "g2"][0]
    assert Edge(0, callee.id, WAIT) in c2.graph.edges


def figure2_like() -> tuple:
    """main running at s; q2 (serial) holds g2 g2 g2, q1 (concurrent) holds g1 g2."""
    m = qs()
    g = initial_config(m).graph
    for _ in range(3):
        g, _ = enqueue(m, g, "q2", "g2")
    g, _ = enqueue(m, g, "q1", "g1")
    g, _ = enqueue(m, g, "q1", "g2")
    return m, g


def test_parikh_of_queue_contents():
    m, g = figure2_like()
    img = parikh(g)
    assert img["g2.a"] == 4 and img["g1.a"] == 1 and img["main.s"] == 1
    assert well_formed(m, g) == []


def test_parikh_basics():
    assert dict(parikh(Ctg())) == {}
    m = qs()
    g = initial_config(m).graph
    g2, _ = enqueue(m, g, "q1", "g1")
    before, after = parikh(g), parikh(g2)
    assert after["g1.a"] == before["g1.a"] + 1


def test_covers():
    assert covers(ParikhImage.of({"s": 1}), {})
    assert not covers(ParikhImage.of({"s": 1}), {"s": 2})
    assert covers(ParikhImage.of({"s": 3, "t": 1}), {"s": 2, "t": 0})


def test_mutual_exclusion_target_on_matmul():
    m = load_corpus("matmul")
    res = explore(m, ExploreLimits(), lambda c: covers(parikh(c.graph), {"increase.crit": 2}))
    assert res.verdict == "exhaustedComplete"


def test_canonical_key_ignores_vertex_ids():
    m, g = figure2_like()
    c = Configuration(g, initial_config(m).valuation)
    ids = [v.id for v in g.vertices]
    for shift in (1, 3):
        perm = {i: ids[(k + shift) % len(ids)] + 10 for k, i in enumerate(ids)}
        assert canonical_key(relabel(c, perm)) == canonical_key(c)


def test_canonical_key_sees_extra_task():
    m = qs()
    g, _ = enqueue(m, initial_config(m).graph, "q1", "g1")
    c1 = Configuration(g, initial_config(m).valuation)
    g2, _ = enqueue(m, g, "q1", "g1")
    c2 = Configuration(dequeue(m, g2, "q1"), initial_config(m).valuation)
    assert canonical_key(c1) != canonical_key(c2)


def test_keys_distinct_iff_non_isomorphic_on_matmul_layers():
    m = load_corpus("matmul")
    seen: list[Configuration] = []
    frontier = [initial_config(m)]
    for _ in range(12):
        nxt = []
        for c in frontier:
            nxt += [c2 for _, c2 in successors(m, c) if len(c2.graph.vertices) <= 6]
        seen += nxt
        frontier = nxt[:30]
    sample = seen[:80]
    for a, b in itertools.combinations(sample, 2):
        assert (a.key == b.key) == isomorphic_configs(a, b)


def test_two_tasks_on_serial_queue_violate_condition_4():
    m = qs()
    g = Ctg(
        (
            Vertex(0, TASK, "main", "ı", "s"),
            Vertex(1, TASK, "g2", "q2", "a"),
            Vertex(2, TASK, "g2", "q2", "a"),
        ),
        frozenset(),
        3,
    )
    assert any("serial queue q2" in p for p in well_formed(m, g))


def test_branching_queue_violates_condition_3():
    m = qs()
    g = Ctg(
        (
            Vertex(0, TASK, "main", "ı", "s"),
            Vertex(1, CALL, "g1", "q1", "a"),
            Vertex(2, CALL, "g1", "q1", "a"),
            Vertex(3, CALL, "g1", "q1", "a"),
        ),
        frozenset({Edge(2, 1, QUEUE, "q1"), Edge(3, 1, QUEUE, "q1")}),
        4,
    )
    assert any("single path" in p for p in well_formed(m, g))
