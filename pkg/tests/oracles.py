"""Brute-force reference implementations used only by the tests.

They deliberately share no code with the algorithms under test beyond the
net/model data structures and their firing rules.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Mapping, Optional, Sequence

import networkx as nx

from qdas.petri import OMEGA, PetriNet


def _fire(net: PetriNet, m, k, omega_count=None):
    t = net.transitions[k]
    m = list(m)
    for p, w in t.inputs:
        m[net.index[p]] -= w
    if any(x < 0 for x in m):
        return None
    for p, w in t.outputs:
        m[net.index[p]] += (omega_count if w == OMEGA else w)
    return tuple(m)


def _ge(a, b) -> bool:
    return all(x >= y for x, y in zip(a, b))


def cover_forward(net: PetriNet, target: Mapping[str, int], cap: int = 6, omega_cap: int = 0) -> Optional[bool]:
    """Forward BFS over markings with every place at most ``cap`` (larger markings are pruned).

    ω arcs add any count in ``0..omega_cap``.  Returns True when a covering
    marking is found, False when the capped space was explored without
    pruning (exact), and None when pruning made a negative answer
    inconclusive.
    """
    goal = tuple(target.get(p, 0) for p in net.places)
    start = tuple(net.initial)
    seen = {start}
    work = deque([start])
    pruned = False
    while work:
        m = work.popleft()
        if _ge(m, goal):
            return True
        for k, t in enumerate(net.transitions):
            counts = range(omega_cap + 1) if t.has_omega else (0,)
            for n in counts:
                m2 = _fire(net, m, k, n)
                if m2 is None:
                    continue
                if max(m2, default=0) > cap:
                    pruned = True
                    continue
                if m2 not in seen:
                    seen.add(m2)
                    work.append(m2)
    return None if pruned else False


def cover_lossy(net: PetriNet, target: Mapping[str, int], cap: int = 6) -> Optional[bool]:
    """Reachability of ``target`` exactly, by runs interleaved with single-token losses."""
    goal = tuple(target.get(p, 0) for p in net.places)
    start = tuple(net.initial)
    seen = {start}
    work = deque([start])
    pruned = False
    while work:
        m = work.popleft()
        if m == goal:
            return True
        nxt = []
        for k in range(len(net.transitions)):
            m2 = _fire(net, m, k)
            if m2 is not None:
                nxt.append(m2)
        for i, x in enumerate(m):
            if x > 0:
                nxt.append(m[:i] + (x - 1,) + m[i + 1 :])
        for m2 in nxt:
            if max(m2, default=0) > cap:
                pruned = True
                continue
            if m2 not in seen:
                seen.add(m2)
                work.append(m2)
    return None if pruned else False


def karp_miller_cover(net: PetriNet, target: Mapping[str, int]) -> bool:
    """Classic Karp–Miller tree (ω-free nets): is ``target`` covered by some node?"""
    goal = tuple(target.get(p, 0) for p in net.places)
    inf = float("inf")
    root = tuple(net.initial)
    stack = [(root, [root])]
    while stack:
        m, anc = stack.pop()
        if _ge(m, goal):
            return True
        for k, t in enumerate(net.transitions):
            m2 = _fire(net, m, k)
            if m2 is None:
                continue
            m2 = tuple(m2)
            for a in anc:
                if _ge(m2, a) and m2 != a:
                    m2 = tuple(inf if y > x else y for x, y in zip(a, m2))
            if any(a == m2 for a in anc):
                continue
            stack.append((m2, anc + [m2]))
    return False


def terminates_capped(net: PetriNet, cap: int = 8, omega_cap: int = 0) -> Optional[bool]:
    """Termination by brute force over the capped reachability graph.

    Non-terminating if the graph has a reachable cycle or some marking
    reaches a strictly larger one (a pumpable segment).  Terminating if the
    space was fully enumerated without pruning and neither happens.
    Otherwise inconclusive (None).
    """
    start = tuple(net.initial)
    g = nx.DiGraph()
    g.add_node(start)
    work = deque([start])
    pruned = False
    while work:
        m = work.popleft()
        for k, t in enumerate(net.transitions):
            for n in (range(omega_cap + 1) if t.has_omega else (0,)):
                m2 = _fire(net, m, k, n)
                if m2 is None:
                    continue
                if max(m2, default=0) > cap:
                    pruned = True
                    continue
                if m2 not in g:
                    work.append(m2)
                g.add_edge(m, m2)
    if not nx.is_directed_acyclic_graph(g):
        return False
    maxima: dict = {}
    for m in reversed(list(nx.topological_sort(g))):
        below: list = []
        for s in g.successors(m):
            below.extend([s] + maxima[s])
        keep = []
        for x in sorted(set(below), key=lambda v: -sum(v)):
            if not any(_ge(y, x) for y in keep):
                keep.append(x)
        maxima[m] = keep
        if any(_ge(x, m) for x in keep):
            return False
    return None if pruned else True


# ---------------------------------------------------------------------------
# Graph isomorphism for canonical-key tests


def isomorphic_configs(c1, c2) -> bool:
    """Brute-force labelled isomorphism of two small configurations."""
    if c1.valuation != c2.valuation:
        return False
    g1, g2 = c1.graph, c2.graph
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return False

    def lab(v):
        return (v.kind, v.block, v.queue, v.state)

    v1 = list(g1.vertices)
    e1 = {(e.src, e.dst, e.kind, e.queue) for e in g1.edges}
    e2 = {(e.src, e.dst, e.kind, e.queue) for e in g2.edges}
    for perm in itertools.permutations(g2.vertices):
        if any(lab(a) != lab(b) for a, b in zip(v1, perm)):
            continue
        mapping = {a.id: b.id for a, b in zip(v1, perm)}
        if {(mapping[s], mapping[d], k, q) for s, d, k, q in e1} == e2:
            return True
    return False


def words(alphabet: Sequence[str], max_len: int):
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


# ---------------------------------------------------------------------------
# Pushdown systems


def pds_reachable(p, depth: int) -> set:
    """Configurations ``(control, stack)`` reachable in at most ``depth`` steps (data-free PDS)."""
    start = (p.initial, ())
    seen = {start}
    layer = [start]
    for _ in range(depth):
        nxt = []
        for state, stack in layer:
            for r in p.rules:
                if r.src != state:
                    continue
                if r.kind == "push":
                    c = (r.dst, (r.symbol,) + stack)
                elif r.kind == "pop":
                    if not stack or stack[0] != r.symbol:
                        continue
                    c = (r.dst, stack[1:])
                elif r.kind == "empty?":
                    if stack:
                        continue
                    c = (r.dst, ())
                else:
                    c = (r.dst, stack)
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        layer = nxt
    return seen


def at_least(word, f: Mapping[str, int]) -> bool:
    return all(sum(1 for a in word if a == s) >= n for s, n in f.items())
