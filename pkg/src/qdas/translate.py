"""Model-to-model constructions.

Abstractions into Petri nets:

* :func:`qdas_to_pn` — asynchronous concurrent models; one place per
  location and per (variable, value) pair.
* :func:`eqdas_to_pn_times` — fork/join models without ``*``; a fork
  puts ``n`` tokens on the child's entry and one on a waiting place, the
  join consumes the waiting token and ``n`` tokens from the child's exit.
* :func:`eqdas_to_pn_star` — ``*`` forks become ω arcs and their joins
  simply advance.

Gadget generators (models that encode other machines):

* :func:`pn_to_qdas` — Petri net coverability as Parikh coverability;
* :func:`fifo_to_qdas` — control-state reachability of a one-channel
  FIFO system via one serial queue;
* :func:`two_counter_to_qdas` — two-counter reachability via wait chains
  and rendezvous over shared variables.

Generated locations carry the line number of the pseudo-code they stem
from (``L14``, ``L8``, ...), so encodings can refer to them.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .ctg import Configuration, Move, parikh
from .model import (
    STAR,
    Assign,
    Atom,
    Block,
    DataDomain,
    DispatchA,
    DispatchS,
    ForkJoin,
    Guard,
    Qdas,
    Test,
    Transition,
    render_action,
    validate,
)
from .petri import OMEGA, PetriNet, PnTransition


class TranslationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# QDAS -> Petri net


def var_place(x: str, d: str) -> str:
    return f"{x}={d}"


@dataclass(frozen=True)
class PnAbstraction:
    """A net together with the bookkeeping that relates it to its model."""

    net: PetriNet
    model: Qdas
    waiting: Mapping[str, tuple[str, ...]] = field(default_factory=dict)  # location -> waiting places

    def target_markings(self, target: Mapping[str, int]) -> list[dict[str, int]]:
        """Markings whose upward closure is the image of a Parikh target.

        A forker that waits for its children sits at the fork's target
        location in the model but on a waiting place in the net, so a
        requirement on such a location may be met by any split over the
        location and its waiting places.
        """
        choices = []
        for loc, n in sorted(target.items()):
            if n <= 0:
                continue
            if loc not in self.net.index:
                raise TranslationError(f"location {loc} has no place in the net")
            aliases = (loc,) + tuple(self.waiting.get(loc, ()))
            splits = []
            for combo in itertools.product(range(n + 1), repeat=len(aliases)):
                if sum(combo) == n:
                    splits.append({a: k for a, k in zip(aliases, combo) if k})
            choices.append(splits)
        out = []
        for parts in itertools.product(*choices):
            merged: dict[str, int] = {}
            for part in parts:
                for p, k in part.items():
                    merged[p] = merged.get(p, 0) + k
            out.append(merged)
        return out or [{}]


def _check_async_concurrent(model: Qdas, *, allow_fork: bool) -> None:
    if model.squeues:
        raise TranslationError("the net abstraction needs a model without serial queues")
    for block, _, tr in model.actions():
        if isinstance(tr.action, DispatchS):
            raise TranslationError("the net abstraction needs a model without synchronous dispatch")
        if isinstance(tr.action, ForkJoin) and not allow_fork:
            raise TranslationError("forkjoin requires an eQDAS abstraction")
    if model.extended and not allow_fork:
        raise TranslationError("extended models are translated with eqdas_to_pn_times/eqdas_to_pn_star")


def _local_transitions(model: Qdas, block: Block, index: int, tr: Transition) -> list[PnTransition]:
    src, dst = block.qualified(tr.src), block.qualified(tr.dst)
    base = f"{block.name}.{index}"
    a = tr.action
    if isinstance(a, DispatchA):
        callee = model.block(a.block)
        return [PnTransition(base, ((src, 1),), _merge((dst, 1), (callee.qualified(callee.initial), 1)))]
    if isinstance(a, Test):
        variables = a.guard.variables()
        out = []
        for combo in itertools.product(model.domain.values, repeat=len(variables)):
            val = dict(zip(variables, combo))
            if not a.guard.holds(val):
                continue
            reads = tuple((var_place(x, d), 1) for x, d in val.items())
            suffix = "[" + ",".join(f"{x}={d}" for x, d in val.items()) + "]" if val else ""
            out.append(PnTransition(base + suffix, ((src, 1),) + reads, _merge((dst, 1), *reads)))
        return out
    if isinstance(a, Assign):
        out = []
        for d in model.domain.values:
            old, new = var_place(a.variable, d), var_place(a.variable, a.value)
            out.append(PnTransition(f"{base}[{a.variable}={d}]", ((src, 1), (old, 1)), _merge((dst, 1), (new, 1))))
        return out
    raise TranslationError(f"unexpected action {render_action(a)}")


def _merge(*arcs) -> tuple:
    merged: dict = {}
    for p, w in arcs:
        merged[p] = OMEGA if OMEGA in (w, merged.get(p, 0)) else merged.get(p, 0) + w
    return tuple(merged.items())


def _net_skeleton(model: Qdas):
    places = list(model.all_states()) + [var_place(x, d) for x in model.variables for d in model.domain.values]
    initial = {model.block(model.main).qualified(model.block(model.main).initial): 1}
    for x in model.variables:
        initial[var_place(x, model.domain.initial)] = 1
    return places, initial


def _ends(model: Qdas) -> list[PnTransition]:
    return [PnTransition(f"end:{b.name}", ((b.qualified(b.final), 1),), ()) for b in model.blocks]


def _to_pn(model: Qdas, fork_mode: Optional[str]) -> PnAbstraction:
    places, initial = _net_skeleton(model)
    transitions: list[PnTransition] = []
    waiting: dict[str, list[str]] = {}
    for block, index, tr in model.actions():
        a = tr.action
        if not isinstance(a, ForkJoin):
            transitions.extend(_local_transitions(model, block, index, tr))
            continue
        src, dst = block.qualified(tr.src), block.qualified(tr.dst)
        child = model.block(a.block)
        w = f"wait:{block.name}.{index}"
        places.append(w)
        waiting.setdefault(dst, []).append(w)
        entry, exit_ = child.qualified(child.initial), child.qualified(child.final)
        if a.param == STAR:
            transitions.append(PnTransition(f"fork:{block.name}.{index}", ((src, 1),), ((entry, OMEGA), (w, 1))))
            transitions.append(PnTransition(f"join:{block.name}.{index}", ((w, 1),), ((dst, 1),)))
        else:
            n = a.param
            transitions.append(PnTransition(f"fork:{block.name}.{index}", ((src, 1),), _merge((entry, n), (w, 1))))
            transitions.append(PnTransition(f"join:{block.name}.{index}", _merge((w, 1), (exit_, n)), ((dst, 1),)))
    transitions.extend(_ends(model))
    net = PetriNet(tuple(places), tuple(transitions), tuple(initial.get(p, 0) for p in places))
    return PnAbstraction(net, model, {k: tuple(v) for k, v in waiting.items()})


def qdas_to_pn(model: Qdas) -> PnAbstraction:
    """Net simulating an asynchronous concurrent model (no serial queue, no ``dispatch_s``)."""
    _check_async_concurrent(model, allow_fork=False)
    return _to_pn(model, None)


def eqdas_to_pn_times(model: Qdas) -> PnAbstraction:
    """Fork/join net for a ``*``-free extended model (join consumes ``n`` exit tokens)."""
    if not model.extended:
        raise TranslationError("expected an extended (eqdas) model")
    _check_async_concurrent(model, allow_fork=True)
    if any(isinstance(tr.action, ForkJoin) and tr.action.param == STAR for _, _, tr in model.actions()):
        raise TranslationError("model has '*' forks; use eqdas_to_pn_star")
    return _to_pn(model, "times")


def eqdas_to_pn_star(model: Qdas) -> PnAbstraction:
    """Net with ω arcs for ``*`` forks (their joins advance unconditionally)."""
    if not model.extended:
        raise TranslationError("expected an extended (eqdas) model")
    _check_async_concurrent(model, allow_fork=True)
    return _to_pn(model, "star")


def move_to_transition(abstraction: PnAbstraction, move: Move, valuation: Mapping[str, str]) -> Optional[str]:
    """Net transition simulating one model step (``None`` for steps the net does not see).

    Dequeues are invisible: call and task share a place.  Only defined for
    fork-free models.
    """
    model = abstraction.model
    if model.extended:
        raise TranslationError("step mapping is only defined for fork-free models")
    if move.kind == "dequeue":
        return None
    if move.kind == "remove":
        return f"end:{move.block}"
    block = model.block(move.block)
    index = block.transitions.index(Transition(move.src, move.action, move.dst))
    base = f"{block.name}.{index}"
    a = move.action
    if isinstance(a, DispatchA):
        return base
    if isinstance(a, Test):
        val = {x: valuation[x] for x in a.guard.variables()}
        return base + ("[" + ",".join(f"{x}={d}" for x, d in val.items()) + "]" if val else "")
    if isinstance(a, Assign):
        return f"{base}[{a.variable}={valuation[a.variable]}]"
    raise TranslationError(f"no net transition for {move.render()}")


# ---------------------------------------------------------------------------
# Petri net -> QDAS (pseudo-code with line-tagged locations)


def _ident(name: str) -> str:
    return re.sub(r"\W", "_", name)


@dataclass(frozen=True)
class PnEncoding:
    """Relates configurations of a generated model to markings of its source net."""

    net: PetriNet
    model: Qdas
    place_block: Mapping[str, str]
    place_var: Mapping[str, str]

    trans_loop = "trans.L14"
    main_idle = "main.L8"

    def place_entry(self, p: str) -> str:
        return f"{self.place_block[p]}.L11"

    def encodes(self, c: Configuration, m: Mapping[str, int]) -> bool:
        """Exact encoding: main idles, trans is at its loop head, place blocks match ``m`` exactly."""
        img = parikh(c.graph)
        if img[self.trans_loop] != 1 or img[self.main_idle] != 1:
            return False
        for p, b in self.place_block.items():
            if img[f"{b}.L11"] != m.get(p, 0):
                return False
            if img[f"{b}.L12"] or img[f"{b}.fin"]:
                return False
        return True

    def cover_target(self, m: Mapping[str, int]) -> dict[str, int]:
        """Parikh target reading a covered marking: at least ``m(p)`` idle ``p`` blocks."""
        target = {self.trans_loop: 1, self.main_idle: 1}
        for p, k in m.items():
            if k:
                target[self.place_entry(p)] = k
        return target


def pn_to_qdas(net: PetriNet, name: str = "pn") -> PnEncoding:
    """Concurrent asynchronous model whose Parikh coverability encodes coverability in ``net``."""
    if not net.is_01:
        raise TranslationError("pn_to_qdas needs a net whose arc weights are all 0 or 1")
    place_block = {}
    place_var = {}
    used: set[str] = set()
    for i, p in enumerate(net.places):
        ident = _ident(p)
        if f"p_{ident}" in used:
            ident = f"{ident}_{i}"
        used.add(f"p_{ident}")
        place_block[p] = f"p_{ident}"
        place_var[p] = f"v_{ident}"
    C = "C"

    # main: lines 1-8
    main_tr: list[Transition] = []
    main_states = ["L1"]
    prev = "L1"
    for p, m0 in zip(net.places, net.initial):
        v, b = place_var[p], place_block[p]
        l3, l4 = f"L3_{_ident(b)}", f"L4_{_ident(b)}"
        main_states += [l3, l4]
        main_tr.append(Transition(prev, Test(Guard(())), l3))
        main_tr.append(Transition(l3, Assign(v, "0"), l4))
        ends = []
        for k in range(m0 + 1):
            chain = [f"L6_{_ident(b)}_{k}_{i}" for i in range(k + 1)]
            main_states += chain
            main_tr.append(Transition(l4, Test(Guard(())), chain[0]))
            for a, c in zip(chain, chain[1:]):
                main_tr.append(Transition(a, DispatchA(C, b), c))
            ends.append(chain[-1])
        join = f"L5_{_ident(b)}_done"
        main_states.append(join)
        for e in ends:
            main_tr.append(Transition(e, Test(Guard(())), join))
        prev = join
    main_states += ["L7", "L8", "fin"]
    main_tr.append(Transition(prev, Test(Guard(())), "L7"))
    main_tr.append(Transition("L7", DispatchA(C, "trans"), "L8"))
    main_tr.append(Transition("L8", Test(Guard(())), "L8"))
    blocks = [Block("main", tuple(main_states), "L1", "fin", tuple(main_tr))]

    # place blocks: lines 11-12
    for p in net.places:
        v = place_var[p]
        blocks.append(
            Block(
                place_block[p],
                ("L11", "L12", "fin"),
                "L11",
                "fin",
                (
                    Transition("L11", Test(Guard((Atom(v, "eq", "0"),))), "L11"),
                    Transition("L11", Test(Guard((Atom(v, "eq", "1"),))), "L12"),
                    Transition("L12", Assign(v, "0"), "fin"),
                ),
            )
        )

    # trans: lines 14-20
    t_states = ["L14"]
    t_tr: list[Transition] = []
    all_zero = Guard(tuple(Atom(place_var[p], "eq", "0") for p in net.places))
    for k, t in enumerate(net.transitions):
        tag = f"{k}_{_ident(t.name)}"
        ins = [p for p, _ in t.inputs]
        outs = [p for p, _ in t.outputs]
        chain = [f"L16_{tag}_{j}" for j in range(len(ins))] + [f"L18_{tag}"]
        t_states += chain
        t_tr.append(Transition("L14", Test(Guard(())), chain[0]))
        for j, p in enumerate(ins):
            t_tr.append(Transition(chain[j], Assign(place_var[p], "1"), chain[j + 1]))
        l18 = chain[-1]
        for p in net.places:
            t_tr.append(Transition(l18, Test(Guard((Atom(place_var[p], "eq", "1"),))), l18))
        out_chain = [f"L20_{tag}_{j}" for j in range(len(outs))] + ["L14"]
        t_states += out_chain[:-1]
        t_tr.append(Transition(l18, Test(all_zero), out_chain[0]))
        for j, p in enumerate(outs):
            t_tr.append(Transition(out_chain[j], DispatchA(C, place_block[p]), out_chain[j + 1]))
    t_states.append("fin")
    blocks.append(Block("trans", tuple(t_states), "L14", "fin", tuple(dict.fromkeys(t_tr))))

    model = Qdas(
        name,
        DataDomain(("0", "1")),
        tuple(place_var[p] for p in net.places),
        (C,),
        (),
        tuple(blocks),
    )
    _assert_valid(model)
    return PnEncoding(net, model, place_block, place_var)


def _assert_valid(model: Qdas) -> None:
    problems = validate(model)
    if problems:
        raise AssertionError("generated model is invalid: " + "; ".join(map(str, problems)))


# ---------------------------------------------------------------------------
# FIFO systems


@dataclass(frozen=True)
class FifoTransition:
    src: str
    op: str  # "send", "recv" or "eps"
    message: str
    dst: str


@dataclass(frozen=True)
class FifoSystem:
    name: str
    states: tuple[str, ...]
    initial: str
    messages: tuple[str, ...]
    transitions: tuple[FifoTransition, ...]

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise TranslationError(f"initial state {self.initial} is not declared")
        for t in self.transitions:
            for s in (t.src, t.dst):
                if s not in self.states:
                    raise TranslationError(f"state {s} is not declared")
            if t.op != "eps" and t.message not in self.messages:
                raise TranslationError(f"message {t.message} is not declared")

    def reachable(self, max_channel: int = 6) -> set[str]:
        """Control states reachable with channel contents of length ≤ ``max_channel``."""
        start = (self.initial, ())
        seen = {start}
        work = [start]
        while work:
            s, w = work.pop()
            for t in self.transitions:
                if t.src != s:
                    continue
                if t.op == "send":
                    nxt = (t.dst, w + (t.message,))
                elif t.op == "recv":
                    if not w or w[0] != t.message:
                        continue
                    nxt = (t.dst, w[1:])
                else:
                    nxt = (t.dst, w)
                if len(nxt[1]) <= max_channel and nxt not in seen:
                    seen.add(nxt)
                    work.append(nxt)
        return {s for s, _ in seen}


_HEADER = re.compile(r"^\s*(fifo|counters)\s+(\w+)\s*\{(.*)\}\s*$", re.S)


def _statements(text: str, kind: str):
    text = re.sub(r"//[^\n]*", "", text)
    m = _HEADER.match(text)
    if m is None or m.group(1) != kind:
        raise TranslationError(f"expected '{kind} NAME {{ ... }}'")
    return m.group(2), [s.strip() for s in m.group(3).split(";") if s.strip()]


def _names(rest: str) -> tuple[str, ...]:
    items = tuple(x.strip() for x in rest.split(","))
    if not all(re.fullmatch(r"\w+", x) for x in items):
        raise TranslationError(f"malformed name list '{rest}'")
    return items


def parse_fifo(text: str) -> FifoSystem:
    """``fifo NAME { states ...; init s; messages ...; s -> t : !m | ?m | eps; }``"""
    name, stmts = _statements(text, "fifo")
    states: tuple = ()
    messages: tuple = ()
    initial = None
    trs = []
    for st in stmts:
        head, _, rest = st.partition(" ")
        if head == "states":
            states += _names(rest)
        elif head == "messages":
            messages += _names(rest)
        elif head == "init":
            initial = rest.strip()
        else:
            m = re.fullmatch(r"(\w+)\s*->\s*(\w+)\s*:\s*(!\s*\w+|\?\s*\w+|eps)", st)
            if m is None:
                raise TranslationError(f"malformed statement '{st}'")
            op = m.group(3).replace(" ", "")
            if op == "eps":
                trs.append(FifoTransition(m.group(1), "eps", "", m.group(2)))
            else:
                trs.append(FifoTransition(m.group(1), "send" if op[0] == "!" else "recv", op[1:], m.group(2)))
    if initial is None:
        raise TranslationError("missing 'init'")
    return FifoSystem(name, states, initial, messages, tuple(trs))


def print_fifo(f: FifoSystem) -> str:
    ops = {"send": "!", "recv": "?"}
    lines = [f"fifo {f.name} {{", f"  states {', '.join(f.states)};", f"  init {f.initial};"]
    if f.messages:
        lines.append(f"  messages {', '.join(f.messages)};")
    for t in f.transitions:
        op = "eps" if t.op == "eps" else ops[t.op] + t.message
        lines.append(f"  {t.src} -> {t.dst} : {op};")
    return "\n".join(lines + ["}"]) + "\n"


EPS_MSG = "eps"


def fifo_block(message: str | None) -> str:
    return "msg_eps" if message is None else f"msg_{message}"


def fifo_goal_targets(f: FifoSystem) -> list[dict[str, int]]:
    """Alternative Parikh targets, one per message block, each asking for one task at line 21."""
    return [{f"{fifo_block(m)}.L21": 1} for m in [None, *f.messages]]


def fifo_to_qdas(f: FifoSystem, goal: str) -> Qdas:
    """Serial asynchronous model in which some message block reaches line 21 iff ``goal`` is reachable."""
    if goal not in f.states:
        raise TranslationError(f"goal {goal} is not a state of the FIFO system")
    sv = {s: f"s_{s}" for s in f.states}
    mv = {m: f"m_{m}" for m in f.messages}
    domain = (EPS_MSG,) + tuple(mv.values()) + tuple(sv.values())
    q = "q"
    main = Block(
        "main",
        ("L5", "L6", "L7", "L8", "fin"),
        "L5",
        "fin",
        (
            Transition("L5", Assign("state", sv[f.initial]), "L6"),
            Transition("L6", Assign("head", EPS_MSG), "L7"),
            Transition("L7", DispatchA(q, fifo_block(None)), "L8"),
            Transition("L8", Test(Guard(())), "L8"),
        ),
    )
    blocks = [main]
    for m in [None, *f.messages]:
        value = EPS_MSG if m is None else mv[m]
        states = ["L10", "L12", "L13"]
        trs = [
            Transition("L10", Test(Guard((Atom("head", "neq", value),))), "L20"),
            Transition("L10", Test(Guard((Atom("head", "eq", value),))), "L12"),
            Transition("L12", Test(Guard((Atom("state", "eq", sv[goal]),))), "L21"),
            Transition("L12", Test(Guard((Atom("state", "neq", sv[goal]),))), "L13"),
        ]
        for i, t in enumerate(f.transitions):
            l14, l15 = f"L14_{i}", f"L15_{i}"
            states += [l14, l15]
            trs.append(Transition("L13", Test(Guard(())), l14))
            trs.append(Transition(l14, Test(Guard((Atom("state", "neq", sv[t.src]),))), "L20"))
            trs.append(Transition(l14, Test(Guard((Atom("state", "eq", sv[t.src]),))), l15))
            if t.op == "eps":
                trs.append(Transition(l15, Assign("state", sv[t.dst]), "L12"))
            elif t.op == "send":
                l16 = f"L16_{i}"
                states.append(l16)
                trs.append(Transition(l15, Assign("state", sv[t.dst]), l16))
                trs.append(Transition(l16, DispatchA(q, fifo_block(t.message)), "L12"))
            else:
                l18 = f"L18_{i}"
                states.append(l18)
                trs.append(Transition(l15, Assign("state", sv[t.dst]), l18))
                trs.append(Transition(l18, Assign("head", mv[t.message]), "fin"))
        states += ["L20", "L21", "fin"]
        trs.append(Transition("L20", Test(Guard(())), "L20"))
        trs.append(Transition("L21", Test(Guard(())), "L21"))
        blocks.append(Block(fifo_block(m), tuple(states), "L10", "fin", tuple(trs)))
    model = Qdas(f"{f.name}_qdas", DataDomain(domain), ("state", "head"), (), (q,), tuple(blocks))
    _assert_valid(model)
    return model


# ---------------------------------------------------------------------------
# Two-counter systems


@dataclass(frozen=True)
class CounterTransition:
    src: str
    op: str  # "incr", "decr" or "zerotest"
    counter: int
    dst: str


@dataclass(frozen=True)
class TwoCounterSystem:
    name: str
    states: tuple[str, ...]
    initial: str
    transitions: tuple[CounterTransition, ...]

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise TranslationError(f"initial state {self.initial} is not declared")
        for t in self.transitions:
            if t.counter not in (1, 2):
                raise TranslationError("counter index must be 1 or 2")
            if t.op not in ("incr", "decr", "zerotest"):
                raise TranslationError(f"unknown counter operation {t.op}")
            for s in (t.src, t.dst):
                if s not in self.states:
                    raise TranslationError(f"state {s} is not declared")

    def reachable(self, max_value: int = 8) -> set[str]:
        start = (self.initial, 0, 0)
        seen = {start}
        work = [start]
        while work:
            s, a, b = work.pop()
            for t in self.transitions:
                if t.src != s:
                    continue
                vals = [a, b]
                v = vals[t.counter - 1]
                if t.op == "incr":
                    v += 1
                elif t.op == "decr":
                    if v == 0:
                        continue
                    v -= 1
                elif v != 0:
                    continue
                vals[t.counter - 1] = v
                nxt = (t.dst, vals[0], vals[1])
                if max(vals) <= max_value and nxt not in seen:
                    seen.add(nxt)
                    work.append(nxt)
        return {s for s, _, _ in seen}


def parse_counters(text: str) -> TwoCounterSystem:
    """``counters NAME { states ...; init s; s -> t : incr(1) | decr(2) | zerotest(1); }``"""
    name, stmts = _statements(text, "counters")
    states: tuple = ()
    initial = None
    trs = []
    for st in stmts:
        head, _, rest = st.partition(" ")
        if head == "states":
            states += _names(rest)
        elif head == "init":
            initial = rest.strip()
        else:
            m = re.fullmatch(r"(\w+)\s*->\s*(\w+)\s*:\s*(incr|decr|zerotest)\s*\(\s*([12])\s*\)", st)
            if m is None:
                raise TranslationError(f"malformed statement '{st}'")
            trs.append(CounterTransition(m.group(1), m.group(3), int(m.group(4)), m.group(2)))
    if initial is None:
        raise TranslationError("missing 'init'")
    return TwoCounterSystem(name, states, initial, tuple(trs))


def print_counters(cs: TwoCounterSystem) -> str:
    lines = [f"counters {cs.name} {{", f"  states {', '.join(cs.states)};", f"  init {cs.initial};"]
    for t in cs.transitions:
        lines.append(f"  {t.src} -> {t.dst} : {t.op}({t.counter});")
    return "\n".join(lines + ["}"]) + "\n"


def _send(i: int, message: str, start: str, end: str, tag: str) -> tuple[list[str], list[Transition]]:
    """Sender side of a rendezvous on channel ``i`` (5 steps, one interleaving)."""
    l1, l2, x = f"l1_{i}", f"l2_{i}", f"x_{i}"
    mids = [f"{tag}_{k}" for k in range(1, 5)]
    path = [start, *mids, end]
    actions = [
        Test(Guard((Atom(l1, "eq", "1"),))),
        Assign(x, message),
        Assign(l2, "1"),
        Test(Guard((Atom(l1, "eq", "0"),))),
        Assign(l2, "0"),
    ]
    return mids, [Transition(a, act, b) for a, act, b in zip(path, actions, path[1:])]


def _recv(i: int, message: str, start: str, end: str, tag: str) -> tuple[list[str], list[Transition]]:
    """Receiver side of a rendezvous on channel ``i``."""
    l1, l2, x = f"l1_{i}", f"l2_{i}", f"x_{i}"
    mids = [f"{tag}_{k}" for k in range(1, 5)]
    path = [start, *mids, end]
    actions = [
        Assign(l1, "1"),
        Test(Guard((Atom(l2, "eq", "1"),))),
        Test(Guard((Atom(x, "eq", message),))),
        Assign(l1, "0"),
        Test(Guard((Atom(l2, "eq", "0"),))),
    ]
    return mids, [Transition(a, act, b) for a, act, b in zip(path, actions, path[1:])]


def counter_goal_target() -> dict[str, int]:
    return {"main.GOAL": 1}


def two_counter_to_qdas(cs: TwoCounterSystem, goal: str) -> Qdas:
    """Concurrent model with both dispatch kinds in which ``main.GOAL`` is coverable iff ``goal`` is reachable."""
    if goal not in cs.states:
        raise TranslationError(f"goal {goal} is not a state of the counter system")
    sv = {s: f"s_{s}" for s in cs.states}
    domain = ("0", "1", "incr", "decr", "zerotest", "ack") + tuple(sv.values())
    variables = ("state",) + tuple(f"{v}_{i}" for i in (1, 2) for v in ("l1", "l2", "x"))
    q = "q"
    blocks = []

    # main
    states = ["M0", "M1", "M2", "M3", "M4", "LOOP", "GOAL", "fin"]
    trs = [
        Transition("M0", DispatchA(q, "null_1"), "M1"),
        Transition("M2", DispatchA(q, "null_2"), "M3"),
    ]
    for i, (a, b) in ((1, ("M1", "M2")), (2, ("M3", "M4"))):
        mids, part = _recv(i, "ack", a, b, f"R{i}")
        states += mids
        trs += part
    trs.append(Transition("M4", Assign("state", sv[cs.initial]), "LOOP"))
    for k, t in enumerate(cs.transitions):
        tk, ak, bk = f"T{k}", f"A{k}", f"B{k}"
        states += [tk, ak, bk]
        trs.append(Transition("LOOP", Test(Guard((Atom("state", "eq", sv[t.src]),))), tk))
        mids, part = _send(t.counter, t.op, tk, ak, f"S{k}")
        states += mids
        trs += part
        mids, part = _recv(t.counter, "ack", ak, bk, f"K{k}")
        states += mids
        trs += part
        trs.append(Transition(bk, Assign("state", sv[t.dst]), "LOOP"))
    trs.append(Transition("LOOP", Test(Guard((Atom("state", "eq", sv[goal]),))), "GOAL"))
    blocks.append(Block("main", tuple(states), "M0", "fin", tuple(trs)))

    # counter blocks
    for i in (1, 2):
        for kind in ("null", "eins"):
            states = ["N1", "N2", "N4", "N5", "N3", "Nf"]
            trs = []
            for tag, (a, b) in (("P1", ("N1", "N4")), ("P2", ("N2", "N4"))):
                mids, part = _send(i, "ack", a, b, tag)
                states += mids
                trs += part
            mids, part = _recv(i, "incr", "N4", "N5", "Rin")
            states += mids
            trs += part
            trs.append(Transition("N5", DispatchS(q, f"eins_{i}"), "N2"))
            if kind == "null":
                mids, part = _recv(i, "zerotest", "N4", "N3", "Rzt")
                states += mids
                trs += part
                mids, part = _send(i, "ack", "N3", "N4", "P3")
                states += mids
                trs += part
            else:
                mids, part = _recv(i, "decr", "N4", "Nf", "Rde")
                states += mids
                trs += part
            blocks.append(Block(f"{kind}_{i}", tuple(states), "N1", "Nf", tuple(trs)))
    model = Qdas(f"{cs.name}_qdas", DataDomain(domain), variables, (q,), (), tuple(blocks))
    _assert_valid(model)
    return model


def counter_values(c: Configuration) -> tuple[int, int]:
    """Number of running (task) ``eins`` blocks per counter: the encoded counter values."""
    counts = [0, 0]
    for v in c.graph.vertices:
        if v.kind == "task" and v.block in ("eins_1", "eins_2"):
            counts[int(v.block[-1]) - 1] += 1
    return counts[0], counts[1]
