"""Call-task graphs, configurations and the one-step transition relation.

A configuration is a call-task graph (CTG) together with a valuation of
the global variables.  Vertices are either *calls* (blocks waiting in a
queue) or *tasks* (running blocks).  Edges come in two kinds:

* ``queue`` edges, tagged with their queue, always leave a call vertex.
  Between two calls they encode FIFO order (newer call -> older call, so
  the head is the call without an outgoing queue edge).  For serial
  queues a queue edge may also link the head call to the task currently
  running from that queue, which keeps the head blocked.
* ``wait`` edges leave a task that waits for another vertex (synchronous
  dispatch and fork/join; the caller points to the callee).

A vertex is *unblocked* iff it has no outgoing edge; only unblocked
tasks act.  All operations are pure and return new graphs.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import Iterator, Mapping

from .model import (
    PSEUDO_QUEUE,
    STAR,
    Action,
    Assign,
    DispatchA,
    DispatchS,
    ForkJoin,
    Qdas,
    Test,
    render_action,
)

CALL = "call"
TASK = "task"
WAIT = "wait"
QUEUE = "queue"


class SemanticsDefect(AssertionError):
    """Internal misuse of a graph operation (never caused by user input)."""


@dataclass(frozen=True, order=True)
class Vertex:
    id: int
    kind: str
    block: str
    queue: str
    state: str

    @property
    def location(self) -> str:
        return f"{self.block}.{self.state}"


@dataclass(frozen=True, order=True)
class Edge:
    src: int
    dst: int
    kind: str
    queue: str = ""


@dataclass(frozen=True)
class Ctg:
    vertices: tuple[Vertex, ...] = ()
    edges: frozenset[Edge] = frozenset()
    next_id: int = 0

    @functools.cached_property
    def _index(self) -> dict[int, Vertex]:
        return {v.id: v for v in self.vertices}

    @functools.cached_property
    def _out(self) -> dict[int, tuple[Edge, ...]]:
        out: dict[int, list[Edge]] = {v.id: [] for v in self.vertices}
        for e in sorted(self.edges):
            out.setdefault(e.src, []).append(e)
        return {k: tuple(v) for k, v in out.items()}

    @functools.cached_property
    def _in(self) -> dict[int, tuple[Edge, ...]]:
        inc: dict[int, list[Edge]] = {v.id: [] for v in self.vertices}
        for e in sorted(self.edges):
            inc.setdefault(e.dst, []).append(e)
        return {k: tuple(v) for k, v in inc.items()}

    def vertex(self, vid: int) -> Vertex:
        return self._index[vid]

    def out_edges(self, vid: int) -> tuple[Edge, ...]:
        return self._out.get(vid, ())

    def in_edges(self, vid: int) -> tuple[Edge, ...]:
        return self._in.get(vid, ())

    def unblocked(self, vid: int) -> bool:
        return not self.out_edges(vid)

    def calls(self, queue: str) -> list[Vertex]:
        return [v for v in self.vertices if v.kind == CALL and v.queue == queue]

    def tasks(self, queue: str | None = None) -> list[Vertex]:
        return [v for v in self.vertices if v.kind == TASK and (queue is None or v.queue == queue)]

    def __len__(self) -> int:
        return len(self.vertices)


def _with(g: Ctg, vertices=None, edges=None, next_id=None) -> Ctg:
    return Ctg(
        tuple(sorted(vertices)) if vertices is not None else g.vertices,
        frozenset(edges) if edges is not None else g.edges,
        g.next_id if next_id is None else next_id,
    )


# ---------------------------------------------------------------------------
# Queue accessors and the four graph operations


def head(g: Ctg, queue: str) -> Vertex | None:
    """Oldest call of ``queue``: the call vertex without an outgoing queue edge."""
    for v in g.calls(queue):
        if not any(e.kind == QUEUE for e in g.out_edges(v.id)):
            return v
    return None


def tail(g: Ctg, queue: str) -> Vertex | None:
    """Newest call of ``queue``: the call vertex without an incoming queue edge."""
    for v in g.calls(queue):
        if not any(e.kind == QUEUE for e in g.in_edges(v.id)):
            return v
    return None


def enqueue(model: Qdas, g: Ctg, queue: str, block: str) -> tuple[Ctg, int]:
    """Append a call to ``block`` at the tail of ``queue``; return the graph and the new id."""
    vid = g.next_id
    fresh = Vertex(vid, CALL, block, queue, model.block(block).initial)
    new_edges = set(g.edges)
    last = tail(g, queue)
    if last is not None:
        new_edges.add(Edge(vid, last.id, QUEUE, queue))
    elif model.is_serial(queue):
        running = g.tasks(queue)
        if running:
            new_edges.add(Edge(vid, running[0].id, QUEUE, queue))
    return _with(g, g.vertices + (fresh,), new_edges, vid + 1), vid


def dequeue(model: Qdas, g: Ctg, queue: str) -> Ctg | None:
    """Turn the head call of ``queue`` into a task; ``None`` if no unblocked head exists.

    For a concurrent queue the FIFO edge from the next call to the new task
    is dropped so that the next call becomes the head.  For a serial queue
    the edge is kept: it is exactly the link that keeps the next call
    waiting for the task that was just started.
    """
    h = head(g, queue)
    if h is None or not g.unblocked(h.id):
        return None
    vertices = [replace(v, kind=TASK) if v.id == h.id else v for v in g.vertices]
    edges = g.edges
    if not model.is_serial(queue):
        edges = frozenset(e for e in edges if not (e.kind == QUEUE and e.dst == h.id))
    return _with(g, vertices, edges)


def step(g: Ctg, block: str, src: str, dst: str) -> list[tuple[int, Ctg]]:
    """Fire a ``src -> dst`` transition of ``block`` in every unblocked task that can."""
    results = []
    for v in g.vertices:
        if v.kind == TASK and v.block == block and v.state == src and g.unblocked(v.id):
            vertices = [replace(u, state=dst) if u.id == v.id else u for u in g.vertices]
            results.append((v.id, _with(g, vertices)))
    return results


def letwait(g: Ctg, v: int | None, target: int, kind: str = WAIT, queue: str = "") -> Ctg:
    """Add an edge ``v -> target`` (``v`` must be unblocked); identity when ``v`` is ``None``."""
    if v is None:
        return g
    if not g.unblocked(v):
        raise SemanticsDefect(f"letwait from blocked vertex {v}")
    if target not in g._index:
        raise SemanticsDefect(f"letwait to unknown vertex {target}")
    return _with(g, edges=g.edges | {Edge(v, target, kind, queue)})


def remove(g: Ctg, vid: int) -> Ctg:
    return _with(
        g,
        [v for v in g.vertices if v.id != vid],
        [e for e in g.edges if vid not in (e.src, e.dst)],
    )


# ---------------------------------------------------------------------------
# Parikh images


@dataclass(frozen=True)
class ParikhImage(Mapping[str, int]):
    """Finite-support map from qualified locations to counts (absent = 0)."""

    items_: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def of(counts: Mapping[str, int] | None = None) -> "ParikhImage":
        counts = counts or {}
        for k, n in counts.items():
            if n < 0:
                raise ValueError(f"negative count for {k}")
        return ParikhImage(tuple(sorted((k, n) for k, n in counts.items() if n > 0)))

    def __getitem__(self, key: str) -> int:
        for k, n in self.items_:
            if k == key:
                return n
        return 0

    def __iter__(self) -> Iterator[str]:
        return (k for k, _ in self.items_)

    def __len__(self) -> int:
        return len(self.items_)

    def __contains__(self, key: object) -> bool:
        return any(k == key for k, _ in self.items_)

    def covers(self, target: Mapping[str, int]) -> bool:
        return covers(self, target)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}: {n}" for k, n in self.items_) + "}"


def parikh(g: Ctg) -> ParikhImage:
    counts: dict[str, int] = {}
    for v in g.vertices:
        counts[v.location] = counts.get(v.location, 0) + 1
    return ParikhImage.of(counts)


def covers(image: Mapping[str, int], target: Mapping[str, int]) -> bool:
    """Pointwise comparison ``target <= image``."""
    return all(image.get(s, 0) >= n for s, n in target.items())


# ---------------------------------------------------------------------------
# Configurations


@dataclass(frozen=True)
class Configuration:
    graph: Ctg
    valuation: tuple[tuple[str, str], ...]

    @property
    def values(self) -> dict[str, str]:
        return dict(self.valuation)

    @functools.cached_property
    def key(self) -> tuple:
        return canonical_key(self)


def initial_config(model: Qdas) -> Configuration:
    main = model.block(model.main)
    g = Ctg((Vertex(0, TASK, main.name, PSEUDO_QUEUE, main.initial),), frozenset(), 1)
    return Configuration(g, tuple(model.initial_valuation().items()))


@dataclass(frozen=True)
class Move:
    """Label of one step of the semantics (scheduler moves have kind remove/dequeue)."""

    kind: str  # "step", "remove" or "dequeue"
    block: str = ""
    src: str = ""
    dst: str = ""
    action: Action | None = None
    queue: str = ""
    forked: int | None = None  # chosen count for a '*' forkjoin

    @property
    def is_scheduler(self) -> bool:
        return self.kind != "step"

    def render(self) -> str:
        if self.kind == "remove":
            return f"ε remove {self.block}.{self.src}"
        if self.kind == "dequeue":
            return f"ε dequeue {self.queue} ({self.block})"
        text = f"{self.block}.{self.src} -> {self.block}.{self.dst} : {render_action(self.action)}"
        if self.forked is not None:
            text += f" [n={self.forked}]"
        return text


_RULE_ORDER = (DispatchA, DispatchS, ForkJoin, Test, Assign)


def successors(
    model: Qdas,
    c: Configuration,
    *,
    star_bound: int = 3,
    atomic_sync: bool = False,
) -> list[tuple[Move, Configuration]]:
    """All one-step successors of ``c`` in a fixed rule order, without duplicates.

    Two successors are duplicates when they carry the same label and are
    isomorphic; only the first is kept.  ``atomic_sync`` fuses a synchronous
    dispatch with the scheduling of the dispatched call whenever that call
    can be scheduled at once.
    """
    g = c.graph
    vals = c.values
    out: list[tuple[Move, Configuration]] = []
    seen: set[tuple[Move, tuple]] = set()

    def emit(move: Move, graph: Ctg, valuation: tuple[tuple[str, str], ...]) -> None:
        nxt = Configuration(graph, valuation)
        token = (move, nxt.key)
        if token not in seen:
            seen.add(token)
            out.append((move, nxt))

    for kind in _RULE_ORDER:
        for block, _, tr in model.actions():
            a = tr.action
            if not isinstance(a, kind):
                continue
            if isinstance(a, Test) and not a.guard.holds(vals):
                continue
            fired = step(g, block.name, tr.src, tr.dst)
            if not fired:
                continue
            move = Move("step", block.name, tr.src, tr.dst, a)
            for vid, g2 in fired:
                if isinstance(a, DispatchA):
                    g3, _ = enqueue(model, g2, a.queue, a.block)
                    emit(move, g3, c.valuation)
                elif isinstance(a, DispatchS):
                    g3, fresh = enqueue(model, g2, a.queue, a.block)
                    g3 = letwait(g3, vid, fresh)
                    if atomic_sync:
                        h = head(g3, a.queue)
                        if h is not None and h.id == fresh:
                            g3 = dequeue(model, g3, a.queue) or g3
                    emit(move, g3, c.valuation)
                elif isinstance(a, ForkJoin):
                    counts = range(star_bound + 1) if a.param == STAR else (a.param,)
                    for n in counts:
                        g3 = g2
                        for _ in range(n):
                            g3, fresh = enqueue(model, g3, a.queue, a.block)
                            # The forker is blocked after the first child, so
                            # the remaining wait edges are added directly.
                            g3 = _with(g3, edges=g3.edges | {Edge(vid, fresh, WAIT)})
                        labelled = replace(move, forked=n) if a.param == STAR else move
                        emit(labelled, g3, c.valuation)
                elif isinstance(a, Test):
                    emit(move, g2, c.valuation)
                elif isinstance(a, Assign):
                    new_vals = tuple((x, a.value if x == a.variable else d) for x, d in c.valuation)
                    emit(move, g2, new_vals)

    for v in g.vertices:
        if v.kind == TASK and g.unblocked(v.id) and v.state == model.block(v.block).final:
            emit(Move("remove", v.block, v.state), remove(g, v.id), c.valuation)

    for q in model.queues:
        h = head(g, q)
        g2 = dequeue(model, g, q)
        if g2 is not None:
            # For serial queues the link from the new head to the started
            # task is the FIFO edge kept by dequeue, so the letwait of the
            # serial scheduler rule adds nothing further.
            emit(Move("dequeue", h.block, queue=q), g2, c.valuation)
    return out


# ---------------------------------------------------------------------------
# Well-formedness


def well_formed(model: Qdas, g: Ctg) -> list[str]:
    """Violations of the CTG well-formedness conditions (empty = well formed)."""
    problems: list[str] = []
    ids = {v.id for v in g.vertices}
    if len(ids) != len(g.vertices):
        problems.append("duplicate vertex ids")
    for e in g.edges:
        if e.src not in ids or e.dst not in ids:
            problems.append(f"edge {e.src}->{e.dst} has a dangling endpoint")
            return problems

    # (1) states belong to the vertex's block; calls sit at the initial state.
    for v in g.vertices:
        if not model.has_block(v.block):
            problems.append(f"vertex {v.id}: unknown block {v.block}")
            continue
        block = model.block(v.block)
        if v.state not in block.states:
            problems.append(f"vertex {v.id}: state {v.state} not in block {v.block}")
        if v.kind == CALL and v.state != block.initial:
            problems.append(f"call vertex {v.id} is not at the initial state of {v.block}")
        if v.kind == CALL and v.queue not in model.queues:
            problems.append(f"call vertex {v.id} sits in undeclared queue {v.queue}")
        if (v.block == model.main) != (v.queue == PSEUDO_QUEUE):
            problems.append(f"vertex {v.id}: only the main task belongs to {PSEUDO_QUEUE}")
        if v.block == model.main and v.kind != TASK:
            problems.append(f"vertex {v.id}: main is never a call")

    # Edge-kind sanity.
    for e in sorted(g.edges):
        src, dst = g.vertex(e.src), g.vertex(e.dst)
        if e.kind == QUEUE:
            if src.kind != CALL or src.queue != e.queue or dst.queue != e.queue:
                problems.append(f"queue edge {e.src}->{e.dst} does not stay inside queue {e.queue}")
        elif e.kind == WAIT:
            if src.kind != TASK:
                problems.append(f"wait edge {e.src}->{e.dst} does not leave a task")
        else:
            problems.append(f"edge {e.src}->{e.dst} has unknown kind {e.kind}")

    # (2) degree bounds.
    for v in g.vertices:
        out = g.out_edges(v.id)
        inc = g.in_edges(v.id)
        in_wait = sum(1 for e in inc if e.kind == WAIT)
        in_queue = sum(1 for e in inc if e.kind == QUEUE)
        if v.kind == CALL:
            if len(out) > 1:
                problems.append(f"call vertex {v.id} has {len(out)} outgoing edges")
            if in_wait > 1:
                problems.append(f"call vertex {v.id} has {in_wait} incoming wait edges")
            if in_queue > 1:
                problems.append(f"call vertex {v.id} has {in_queue} incoming queue edges")
        else:
            forker = model.extended and len(out) > 1 and all(e.kind == WAIT for e in out)
            if len(out) > 1 and not forker:
                problems.append(f"task vertex {v.id} has {len(out)} outgoing edges")
            if in_wait > 1:
                problems.append(f"task vertex {v.id} has {in_wait} incoming wait edges")

    # (3) each queue's calls form one simple FIFO path.
    for q in model.queues:
        calls = g.calls(q)
        call_ids = {v.id for v in calls}
        fifo = [e for e in g.edges if e.kind == QUEUE and e.queue == q and e.dst in call_ids]
        links = [e for e in g.edges if e.kind == QUEUE and e.queue == q and e.dst not in call_ids]
        if calls:
            older = {e.src: e.dst for e in fifo}
            heads = [v for v in calls if v.id not in older]
            if len(fifo) != len(calls) - 1 or len(heads) != 1:
                problems.append(f"queue {q}: calls do not form a single path")
            else:
                seen = {heads[0].id}
                newer = {e.dst: e.src for e in fifo}
                cur = heads[0].id
                while cur in newer:
                    cur = newer[cur]
                    if cur in seen:
                        break
                    seen.add(cur)
                if seen != call_ids:
                    problems.append(f"queue {q}: calls do not form a single path")
                for e in links:
                    if e.src != heads[0].id:
                        problems.append(f"queue {q}: task link does not start at the head")
        if links and not model.is_serial(q):
            problems.append(f"concurrent queue {q} links a call to a task")
        if len(links) > 1:
            problems.append(f"queue {q}: more than one call-to-task link")

    # (4) serial queues run at most one task.
    for q in model.squeues:
        n = len(g.tasks(q))
        if n > 1:
            problems.append(f"serial queue {q} has {n} running tasks")
    return problems


# ---------------------------------------------------------------------------
# Canonical form


def _call_order(g: Ctg, queue: str) -> list[Vertex]:
    calls = g.calls(queue)
    call_ids = {v.id for v in calls}
    newer = {}
    for e in g.edges:
        if e.kind == QUEUE and e.queue == queue and e.src in call_ids and e.dst in call_ids:
            newer[e.dst] = e.src
    h = [v for v in calls if v.id not in {e.src for e in g.edges if e.kind == QUEUE and e.dst in call_ids}]
    if len(h) != 1:
        return sorted(calls)
    order = [h[0].id]
    while order[-1] in newer and newer[order[-1]] not in order:
        order.append(newer[order[-1]])
    if len(order) != len(calls):
        return sorted(calls)
    return [g.vertex(i) for i in order]


def canonical_key(c: Configuration) -> tuple:
    """Isomorphism-invariant fingerprint of a configuration.

    Calls are identified by (queue, position from the head), and a task is
    identified by its queue whenever it is the only task of that queue
    (this covers ``main`` and serial tasks).  The remaining tasks form a
    forest along wait edges (each has at most one incoming wait edge and
    wait edges always point to younger vertices); each tree is encoded
    bottom-up with sorted children.
    """
    g = c.graph
    anchors: dict[int, tuple] = {}
    queues = sorted({v.queue for v in g.vertices})
    for q in queues:
        for pos, v in enumerate(_call_order(g, q)):
            anchors[v.id] = ("c", q, pos)
        tasks = g.tasks(q)
        if len(tasks) == 1:
            anchors[tasks[0].id] = ("t", q)

    def label(v: Vertex) -> tuple:
        return (v.kind, v.block, v.queue, v.state)

    anchored = tuple(sorted((anchors[v.id], label(v)) for v in g.vertices if v.id in anchors))
    anchored_edges = []
    children: dict[int, list[int]] = {}
    targets: dict[int, list[tuple]] = {}
    root_anchor: dict[int, tuple] = {}
    for e in sorted(g.edges):
        s_anch, d_anch = anchors.get(e.src), anchors.get(e.dst)
        if s_anch is not None and d_anch is not None:
            anchored_edges.append((s_anch, d_anch, e.kind, e.queue))
        elif s_anch is None and d_anch is None:
            children.setdefault(e.src, []).append(e.dst)
        elif s_anch is None:
            targets.setdefault(e.src, []).append((d_anch, e.kind, e.queue))
        else:
            root_anchor[e.dst] = (s_anch, e.kind, e.queue)

    free = [v for v in g.vertices if v.id not in anchors]
    has_parent = {d for ds in children.values() for d in ds}
    memo: dict[int, tuple] = {}

    def encode(vid: int, depth: int = 0) -> tuple:
        if vid in memo:
            return memo[vid]
        if depth > len(g.vertices):
            raise SemanticsDefect("cycle among wait edges of unanchored tasks")
        enc = (
            label(g.vertex(vid)),
            tuple(sorted(encode(ch, depth + 1) for ch in children.get(vid, ()))),
            tuple(sorted(targets.get(vid, ()))),
        )
        memo[vid] = enc
        return enc

    roots = tuple(sorted((root_anchor.get(v.id, ()), encode(v.id)) for v in free if v.id not in has_parent))
    return (anchored, tuple(sorted(anchored_edges)), roots, c.valuation)


# ---------------------------------------------------------------------------
# Rendering


def render_config(c: Configuration) -> str:
    """Compact, deterministic one-line dump of a configuration."""
    g = c.graph
    parts = []
    for v in g.vertices:
        outs = ",".join(f"{'w' if e.kind == WAIT else 'q'}{e.dst}" for e in g.out_edges(v.id))
        mark = "[]" if v.kind == CALL else "()"
        parts.append(f"{v.id}{mark[0]}{v.location}@{v.queue}{mark[1]}" + (f"->{outs}" if outs else ""))
    vals = " ".join(f"{x}={d}" for x, d in c.valuation)
    return f"{' '.join(parts) or '∅'} | {vals}".rstrip(" |")


def to_dot(g: Ctg) -> str:
    """DOT text: calls are boxes, tasks ellipses; queue edges solid, wait edges dashed."""
    lines = ["digraph ctg {"]
    for v in g.vertices:
        shape = "box" if v.kind == CALL else "ellipse"
        lines.append(f'  v{v.id} [shape={shape}, label="{v.block}\\n{v.state}\\n{v.queue}"];')
    for e in sorted(g.edges):
        style = "dashed" if e.kind == WAIT else "solid"
        lines.append(f"  v{e.src} -> v{e.dst} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
