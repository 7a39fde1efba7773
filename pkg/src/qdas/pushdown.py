"""Pushdown systems for the synchronous fragment.

In a synchronous model every reachable call-task graph is a single wait
chain with one running vertex at its end, so a configuration is faithfully
described by a pushdown configuration: the control state is the state of
the running vertex and the stack holds the return states of the blocked
callers (top = most recent caller).  This module builds that pushdown
system, expands its data into the control, computes ``post*`` by
saturation, and decides Parikh coverability (product with a counting
automaton over the stack) and termination (cycle search in the head graph
with same-level summaries).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional

import networkx as nx

from .model import (
    Assign,
    DataDomain,
    DispatchA,
    DispatchS,
    ForkJoin,
    Guard,
    Qdas,
    Test,
    classify,
)

PUSH, POP, INTERNAL, EMPTY_TEST, GUARD, ASSIGN = "push", "pop", "internal", "empty?", "guard", "assign"
SINK = "ε"


class NotSynchronous(ValueError):
    pass


@dataclass(frozen=True)
class PdsRule:
    src: Hashable
    kind: str
    dst: Hashable
    symbol: Hashable = None
    guard: Optional[Guard] = None
    assign: Optional[Assign] = None

    def render(self) -> str:
        if self.kind in (PUSH, POP):
            what = f"{self.kind}({_show(self.symbol)})"
        elif self.kind == GUARD:
            atoms = " && ".join(f"{a.variable} {'==' if a.op == 'eq' else '!='} {a.value}" for a in self.guard.atoms)
            what = atoms or "true"
        elif self.kind == ASSIGN:
            what = f"{self.assign.variable} <- {self.assign.value}"
        else:
            what = self.kind
        return f"{_show(self.src)} --{what}--> {_show(self.dst)}"


def _show(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(_show(y) for y in x) + ")"
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(map(str, x))) + "}"
    return str(x)


@dataclass(frozen=True)
class Pds:
    """A pushdown system, optionally with guard/assignment rules over finite data.

    ``state_label`` and ``symbol_label`` map controls and stack symbols to
    the model location they stand for (``None`` = no location); they are
    what Parikh images are computed from.
    """

    states: tuple
    initial: Hashable
    alphabet: tuple
    rules: tuple[PdsRule, ...]
    state_label: Mapping[Hashable, Optional[str]]
    symbol_label: Mapping[Hashable, Optional[str]]
    variables: tuple[str, ...] = ()
    domain: Optional[DataDomain] = None

    @property
    def has_data(self) -> bool:
        return any(r.kind in (GUARD, ASSIGN) for r in self.rules)

    def rules_from(self, state) -> list[PdsRule]:
        return self._by_src.get(state, [])

    @property
    def _by_src(self) -> dict:
        cached = self.__dict__.get("_by_src_cache")
        if cached is None:
            cached = {}
            for r in self.rules:
                cached.setdefault(r.src, []).append(r)
            object.__setattr__(self, "_by_src_cache", cached)
        return cached

    def dump(self) -> str:
        lines = [f"initial {_show(self.initial)}", f"states {len(self.states)}", f"symbols {len(self.alphabet)}"]
        lines += sorted(r.render() for r in self.rules)
        return "\n".join(lines) + "\n"

    def parikh(self, state, stack: Iterable) -> dict[str, int]:
        counts: dict[str, int] = {}
        for loc in [self.state_label.get(state)] + [self.symbol_label.get(a) for a in stack]:
            if loc is not None:
                counts[loc] = counts.get(loc, 0) + 1
        return counts


# ---------------------------------------------------------------------------
# Synchronous model -> pushdown system


def _require_sync(model: Qdas) -> None:
    verdict = classify(model)
    if model.extended or verdict.dispatch_tag != "synchronous":
        raise NotSynchronous("the pushdown route requires a synchronous (or dispatch-free) model")


def from_sync_qdas(model: Qdas) -> Pds:
    """Pushdown system with data simulating a synchronous model.

    Without serial queues the construction is the direct one: controls are
    model locations, ``dispatch_s`` pushes the caller's return location and
    jumps to the callee's initial state, any final location pops a return
    location, and main's final location may take the empty-stack test.

    With serial queues the control additionally records which serial
    queues currently have a running task (and each stack symbol records
    the set in force before the call).  A synchronous dispatch into a
    busy serial queue can never be scheduled: the caller deadlocks.  This
    is modelled by a control without rules whose location is the callee's
    initial state (the pending call).
    """
    _require_sync(model)
    locations = model.all_states()
    finals = {b.qualified(b.final) for b in model.blocks}
    main = model.block(model.main)
    f_main = main.qualified(main.final)

    def base_rules(loc: str):
        """(kind, payload, dst) for the local moves of a location."""
        block_name, _, state = loc.partition(".")
        block = model.block(block_name)
        for tr in block.transitions:
            if tr.src != state:
                continue
            a = tr.action
            dst = block.qualified(tr.dst)
            if isinstance(a, Test):
                yield GUARD, a, dst
            elif isinstance(a, Assign):
                yield ASSIGN, a, dst
            elif isinstance(a, DispatchS):
                yield PUSH, a, dst
            elif isinstance(a, (DispatchA, ForkJoin)):  # excluded by the precondition
                raise NotSynchronous(f"unexpected action {a!r}")

    if not model.squeues:
        rules: list[PdsRule] = []
        for loc in locations:
            for kind, a, dst in base_rules(loc):
                if kind == GUARD:
                    rules.append(PdsRule(loc, GUARD, dst, guard=a.guard))
                elif kind == ASSIGN:
                    rules.append(PdsRule(loc, ASSIGN, dst, assign=a))
                else:
                    callee = model.block(a.block)
                    rules.append(PdsRule(loc, PUSH, callee.qualified(callee.initial), symbol=dst))
            if loc in finals:
                for sym in locations:
                    rules.append(PdsRule(loc, POP, sym, symbol=sym))
            if loc == f_main:
                rules.append(PdsRule(loc, EMPTY_TEST, SINK))
        states = tuple(locations) + (SINK,)
        labels = {s: s for s in locations}
        labels[SINK] = None
        return Pds(
            states,
            main.qualified(main.initial),
            tuple(locations),
            tuple(rules),
            labels,
            {s: s for s in locations},
            model.variables,
            model.domain,
        )

    # Serial-queue tracking: controls (location, busy) or ("stuck", location).
    start = (main.qualified(main.initial), frozenset())
    rules = []
    controls = [start]
    seen = {start}
    symbols: dict = {}
    work = deque([start])
    pending_pops: dict[str, list] = {}  # final location -> controls at it

    def add_control(ctrl) -> None:
        if ctrl not in seen:
            seen.add(ctrl)
            controls.append(ctrl)
            work.append(ctrl)

    while work:
        ctrl = work.popleft()
        if ctrl[0] == "stuck":
            continue
        loc, busy = ctrl
        for kind, a, dst in base_rules(loc):
            if kind == GUARD:
                rules.append(PdsRule(ctrl, GUARD, (dst, busy), guard=a.guard))
                add_control((dst, busy))
            elif kind == ASSIGN:
                rules.append(PdsRule(ctrl, ASSIGN, (dst, busy), assign=a))
                add_control((dst, busy))
            else:
                callee = model.block(a.block)
                entry = callee.qualified(callee.initial)
                sym = (dst, busy)
                symbols[sym] = dst
                if model.is_serial(a.queue) and a.queue in busy:
                    target = ("stuck", entry)
                else:
                    target = (entry, busy | {a.queue} if model.is_serial(a.queue) else busy)
                rules.append(PdsRule(ctrl, PUSH, target, symbol=sym))
                add_control(target)
                # pops back into this symbol from every final control seen so far
                for fctrl in pending_pops.get("*", []):
                    rules.append(PdsRule(fctrl, POP, sym, symbol=sym))
                    add_control(sym)
        if loc in finals:
            pending_pops.setdefault("*", []).append(ctrl)
            for sym in list(symbols):
                rules.append(PdsRule(ctrl, POP, sym, symbol=sym))
                add_control(sym)
        if loc == f_main:
            rules.append(PdsRule(ctrl, EMPTY_TEST, SINK))
    states = tuple(controls) + (SINK,)
    state_label = {c: c[1] if c[0] == "stuck" else c[0] for c in controls}
    state_label[SINK] = None
    return Pds(
        states,
        start,
        tuple(symbols),
        tuple(dict.fromkeys(rules)),
        state_label,
        dict(symbols),
        model.variables,
        model.domain,
    )


def expand_data(p: Pds) -> Pds:
    """Fold the finite data into the control: states become (state, valuation)."""
    if not p.variables:
        valuations = [()]
    else:
        valuations = [tuple(zip(p.variables, combo)) for combo in itertools.product(p.domain.values, repeat=len(p.variables))]
    rules: list[PdsRule] = []
    for r in p.rules:
        for val in valuations:
            src = (r.src, val)
            if r.kind == GUARD:
                if r.guard.holds(dict(val)):
                    rules.append(PdsRule(src, INTERNAL, (r.dst, val)))
            elif r.kind == ASSIGN:
                new = tuple((x, r.assign.value if x == r.assign.variable else d) for x, d in val)
                rules.append(PdsRule(src, INTERNAL, (r.dst, new)))
            else:
                rules.append(PdsRule(src, r.kind, (r.dst, val), symbol=r.symbol))
    initial_val = tuple((x, p.domain.initial) for x in p.variables) if p.variables else ()
    states = tuple((s, val) for s in p.states for val in valuations)
    return Pds(
        states,
        (p.initial, initial_val),
        p.alphabet,
        tuple(rules),
        {(s, val): p.state_label.get(s) for s, val in states},
        p.symbol_label,
    )


# ---------------------------------------------------------------------------
# post* saturation

FINAL = ("⊤final",)


@dataclass
class PAutomaton:
    """Automaton over stack words; configuration (p, w) is accepted iff p -w-> FINAL."""

    edges: set = field(default_factory=set)  # (src, symbol, dst)
    eps: set = field(default_factory=set)  # (src, dst)

    def eps_closure(self, states: Iterable) -> set:
        out = set(states)
        work = list(out)
        succ: dict = {}
        for s, d in self.eps:
            succ.setdefault(s, []).append(d)
        while work:
            s = work.pop()
            for d in succ.get(s, ()):
                if d not in out:
                    out.add(d)
                    work.append(d)
        return out

    def accepts(self, state, word: Iterable) -> bool:
        current = self.eps_closure([state])
        for a in word:
            current = self.eps_closure({d for s, b, d in self.edges if s in current and b == a})
        return FINAL in current


def post_star(p: Pds) -> PAutomaton:
    """Saturation computing all configurations reachable from ``(initial, ε)``.

    Data rules must have been expanded; guards/assignments are rejected.
    """
    if p.has_data:
        raise ValueError("expand data before saturation")
    aut = PAutomaton()
    aut.eps.add((p.initial, FINAL))
    eps_succ: dict = {}
    sym_succ: dict = {}

    def add_eps(s, d) -> bool:
        if (s, d) in aut.eps:
            return False
        aut.eps.add((s, d))
        eps_succ.setdefault(s, set()).add(d)
        return True

    def add_sym(s, a, d) -> bool:
        if (s, a, d) in aut.edges:
            return False
        aut.edges.add((s, a, d))
        sym_succ.setdefault(s, set()).add((a, d))
        return True

    eps_succ.setdefault(p.initial, set()).add(FINAL)

    def closure(s) -> set:
        out = {s}
        work = [s]
        while work:
            x = work.pop()
            for d in eps_succ.get(x, ()):
                if d not in out:
                    out.add(d)
                    work.append(d)
        return out

    changed = True
    while changed:
        changed = False
        for r in p.rules:
            reach = closure(r.src)
            # only configurations with control r.src matter; skip unreachable controls
            if len(reach) == 1 and not sym_succ.get(r.src):
                continue
            if r.kind == PUSH:
                changed |= add_sym(r.dst, r.symbol, r.src)
            elif r.kind == INTERNAL:
                changed |= add_eps(r.dst, r.src)
            elif r.kind == POP:
                for x in reach:
                    for a, y in list(sym_succ.get(x, ())):
                        if a == r.symbol:
                            changed |= add_eps(r.dst, y)
            elif r.kind == EMPTY_TEST:
                if FINAL in reach:
                    changed |= add_eps(r.dst, FINAL)
    return aut


def reachable_configs(p: Pds) -> PAutomaton:
    return post_star(expand_data(p) if p.has_data else p)


# ---------------------------------------------------------------------------
# Counting automaton


@dataclass(frozen=True)
class CountingAutomaton:
    """Deterministic automaton accepting words that contain each ``s`` at least ``f(s)`` times.

    States are the vectors ``q <= f`` (one remaining-count per support
    symbol); reading ``s`` decrements the entry of ``s`` while positive.
    """

    symbols: tuple[str, ...]
    start: tuple[int, ...]

    @property
    def final(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.symbols)

    def states(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(n + 1) for n in self.start)))

    def step(self, q: tuple[int, ...], symbol: Optional[str]) -> tuple[int, ...]:
        if symbol is None or symbol not in self.symbols:
            return q
        i = self.symbols.index(symbol)
        if q[i] == 0:
            return q
        return q[:i] + (q[i] - 1,) + q[i + 1 :]

    def run(self, word: Iterable[str]) -> tuple[int, ...]:
        q = self.start
        for s in word:
            q = self.step(q, s)
        return q

    def accepts(self, word: Iterable[str]) -> bool:
        return self.run(word) == self.final


def build_counting_automaton(f: Mapping[str, int]) -> CountingAutomaton:
    support = tuple(sorted(s for s, n in f.items() if n > 0))
    return CountingAutomaton(support, tuple(f[s] for s in support))


# ---------------------------------------------------------------------------
# Parikh coverability


@dataclass
class SyncCoverResult:
    coverable: bool
    control: Hashable = None
    stack: tuple = ()
    method: str = "saturation"

    def describe(self, p: Pds | None = None) -> str:
        if not self.coverable:
            return "not coverable"
        return f"covered at control {_show(self.control)} with stack {_show(self.stack)}"


def _cover_saturation(p: Pds, f: Mapping[str, int]) -> SyncCoverResult:
    aut = post_star(p)
    counter = build_counting_automaton(f)
    succ: dict = {}
    for s, a, d in sorted(aut.edges, key=repr):
        succ.setdefault(s, []).append((a, d))
    for s, d in sorted(aut.eps, key=repr):
        succ.setdefault(s, []).append((None, d))
    controls = [c for c in p.states if c in succ]
    parents: dict = {}
    work: deque = deque()
    for c in controls:
        node = (c, counter.step(counter.start, p.state_label.get(c)))
        if node not in parents:
            parents[node] = (None, c)
            work.append(node)
    while work:
        node = work.popleft()
        state, q = node
        if state == FINAL and q == counter.final:
            word = []
            cur = node
            while parents[cur][0] is not None:
                prev, a = parents[cur]
                if a is not None:
                    word.append(a)
                cur = prev
            return SyncCoverResult(True, parents[cur][1], tuple(reversed(word)))
        for a, d in succ.get(state, ()):
            nq = counter.step(q, p.symbol_label.get(a)) if a is not None else q
            nxt = (d, nq)
            if nxt not in parents:
                parents[nxt] = (node, a)
                work.append(nxt)
    return SyncCoverResult(False)


def _explicit_successors(p: Pds, state, stack: tuple):
    for r in p.rules_from(state):
        if r.kind == INTERNAL:
            yield r, r.dst, stack
        elif r.kind == PUSH:
            yield r, r.dst, (r.symbol,) + stack
        elif r.kind == POP:
            if stack and stack[0] == r.symbol:
                yield r, r.dst, stack[1:]
        elif r.kind == EMPTY_TEST:
            if not stack:
                yield r, r.dst, stack


def _cover_bounded_stack(p: Pds, f: Mapping[str, int], height: int) -> SyncCoverResult:
    start = (p.initial, ())
    seen = {start}
    work = deque([start])
    while work:
        state, stack = work.popleft()
        counts = p.parikh(state, stack)
        if all(counts.get(s, 0) >= n for s, n in f.items()):
            return SyncCoverResult(True, state, stack, "bounded-stack")
        for _, d, st in _explicit_successors(p, state, stack):
            if len(st) > height:
                raise AssertionError(f"stack height {len(st)} exceeds the serial bound {height}")
            if (d, st) not in seen:
                seen.add((d, st))
                work.append((d, st))
    return SyncCoverResult(False, method="bounded-stack")


def check_parikh_cover_sync(model: Qdas, f: Mapping[str, int], *, method: str = "auto") -> SyncCoverResult:
    """Decide whether the Parikh target ``f`` is coverable in a synchronous model.

    ``method`` is ``"saturation"`` (post* plus counting-automaton product),
    ``"bounded-stack"`` (explicit search; only valid for serial-synchronous
    models, whose stack height is at most the number of serial queues plus
    one) or ``"auto"`` (bounded-stack for serial-synchronous models,
    saturation otherwise).
    """
    _require_sync(model)
    p = expand_data(from_sync_qdas(model))
    serial_only = not model.cqueues
    if method == "auto":
        method = "bounded-stack" if serial_only else "saturation"
    if method == "bounded-stack":
        if not serial_only:
            raise ValueError("bounded-stack search needs a model without concurrent queues")
        return _cover_bounded_stack(p, f, len(model.squeues) + 1)
    return _cover_saturation(p, f)


# ---------------------------------------------------------------------------
# Termination

EMPTY, NONEMPTY = "empty", "nonempty"


def _same_level(p: Pds):
    """Same-level reachability with derivations recorded in discovery order.

    ``parent[(x, y)]`` is ``None`` for ``x == y`` or ``(z, edge)`` where
    ``(x, z)`` was discovered earlier and ``edge`` is an internal rule
    ``z -> y`` or a summary ``(push, callee, ret, pop)`` whose inner pair
    ``(callee, ret)`` was discovered earlier still.
    """
    internal: dict = {}
    pushes: list[PdsRule] = []
    pops: dict = {}
    for r in p.rules:
        if r.kind == INTERNAL:
            internal.setdefault(r.src, []).append(r)
        elif r.kind == PUSH:
            pushes.append(r)
        elif r.kind == POP:
            pops.setdefault((r.src, r.symbol), []).append(r)
    reach: dict = {s: [s] for s in p.states}
    parent: dict = {(s, s): None for s in p.states}
    summaries: dict = {}  # src -> list of (dst, summary)
    summary_seen: set = set()
    while True:
        # close every source under internal edges and known summaries
        for x in p.states:
            work = deque(reach[x])
            while work:
                z = work.popleft()
                edges = [(r.dst, r) for r in internal.get(z, ())] + summaries.get(z, [])
                for y, edge in edges:
                    if (x, y) not in parent:
                        parent[(x, y)] = (z, edge)
                        reach[x].append(y)
                        work.append(y)
        added = False
        for push in pushes:
            for ret in reach[push.dst]:
                for pop in pops.get((ret, push.symbol), ()):
                    summary = (push, push.dst, ret, pop)
                    if summary not in summary_seen:
                        summary_seen.add(summary)
                        summaries.setdefault(push.src, []).append((pop.dst, summary))
                        added = True
        if not added:
            return reach, parent, summaries


def _expand_same_level(parent: dict, x, y) -> list[PdsRule]:
    out: list[PdsRule] = []
    stack = [(x, y)]
    # iterative expansion to stay clear of the recursion limit
    pending: list = []
    while stack:
        item = stack.pop()
        if isinstance(item, PdsRule):
            out.append(item)
            continue
        a, b = item
        entry = parent[(a, b)]
        if entry is None:
            continue
        z, edge = entry
        if isinstance(edge, PdsRule):
            pending = [(a, z), edge]
        else:
            push, callee, ret, pop = edge
            pending = [(a, z), push, (callee, ret), pop]
        stack.extend(reversed(pending))
    return out


@dataclass
class SyncTerminationResult:
    terminating: bool
    prefix: tuple[PdsRule, ...] = ()
    cycle: tuple[PdsRule, ...] = ()

    def render(self) -> list[str]:
        if self.terminating:
            return []
        return [r.render() for r in self.prefix] + ["== cycle:"] + [r.render() for r in self.cycle]


def _head_graph(p: Pds):
    _, parent, summaries = _same_level(p)
    g = nx.DiGraph()
    labels: dict = {}
    start = (p.initial, EMPTY)
    g.add_node(start)
    work = deque([start])
    seen = {start}

    def add(src, dst, how):
        if not g.has_edge(src, dst):
            g.add_edge(src, dst)
            labels[(src, dst)] = how
        if dst not in seen:
            seen.add(dst)
            work.append(dst)

    while work:
        node = work.popleft()
        state, base = node
        for r in p.rules_from(state):
            if r.kind == INTERNAL:
                add(node, (r.dst, base), [r])
            elif r.kind == EMPTY_TEST and base == EMPTY:
                add(node, (r.dst, base), [r])
            elif r.kind == PUSH:
                add(node, (r.dst, NONEMPTY), [r])
        for dst, summary in summaries.get(state, ()):
            add(node, (dst, base), ("summary", summary))
    return g, labels, parent, start


def _edge_rules(how, parent) -> list[PdsRule]:
    if isinstance(how, list):
        return how
    _, (push, callee, ret, pop) = how
    return [push] + _expand_same_level(parent, callee, ret) + [pop]


def replay_rules(p: Pds, rules: Iterable[PdsRule], state=None, stack: tuple = ()) -> tuple:
    """Execute a rule sequence from ``(state, stack)``; raise if some rule is not enabled."""
    state = p.initial if state is None else state
    for r in rules:
        if r.src != state:
            raise AssertionError(f"rule {r.render()} not applicable in control {_show(state)}")
        if r.kind == PUSH:
            stack = (r.symbol,) + stack
        elif r.kind == POP:
            if not stack or stack[0] != r.symbol:
                raise AssertionError(f"rule {r.render()} cannot pop")
            stack = stack[1:]
        elif r.kind == EMPTY_TEST and stack:
            raise AssertionError("empty test on a non-empty stack")
        state = r.dst
    return state, stack


def check_termination_sync(model: Qdas) -> SyncTerminationResult:
    """Decide whether every run of a synchronous model is finite.

    A run is infinite iff the head graph (controls paired with an
    empty/non-empty flag for the stack below the current level; edges for
    internal moves, never-returning pushes, and push/return summaries)
    has a cycle reachable from the initial control.  The witness is
    expanded into a rule sequence and checked by replay.
    """
    _require_sync(model)
    p = expand_data(from_sync_qdas(model))
    g, labels, parent, start = _head_graph(p)
    try:
        cycle = nx.find_cycle(g, source=start)
    except nx.NetworkXNoCycle:
        return SyncTerminationResult(True)
    entry = cycle[0][0]
    path = nx.shortest_path(g, start, entry)
    prefix = [r for a, b in zip(path, path[1:]) for r in _edge_rules(labels[(a, b)], parent)]
    loop = [r for a, b in cycle for r in _edge_rules(labels[(a, b)], parent)]
    state, stack = replay_rules(p, prefix)
    after1 = replay_rules(p, loop, state, stack)
    after2 = replay_rules(p, loop, *after1)
    if after1[0] != state or after2[0] != state or after1[1][len(after1[1]) - len(stack):] != stack:
        raise AssertionError("non-termination witness failed replay")
    return SyncTerminationResult(False, tuple(prefix), tuple(loop))
