"""Petri nets with weighted arcs and ω output arcs.

* :func:`coverable` — backward search over minimal bases of upward-closed
  sets, with witness reconstruction;
* :func:`terminates` — a depth-first Karp–Miller style tree that looks for
  a repeatable segment (self-covering path);
* :func:`deomegaize` — replaces every ω arc by a pumping loop.

Markings are tuples aligned with ``net.places``; ω is ``math.inf``.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

OMEGA = math.inf
Weight = Union[int, float]  # float only for OMEGA


class PetriError(ValueError):
    pass


@dataclass(frozen=True)
class PnTransition:
    name: str
    inputs: tuple[tuple[str, int], ...] = ()
    outputs: tuple[tuple[str, Weight], ...] = ()

    @property
    def has_omega(self) -> bool:
        return any(w == OMEGA for _, w in self.outputs)


@dataclass(frozen=True)
class PetriNet:
    places: tuple[str, ...]
    transitions: tuple[PnTransition, ...]
    initial: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.initial) != len(self.places):
            raise PetriError("initial marking does not match the places")
        if len(set(self.places)) != len(self.places):
            raise PetriError("duplicate place")
        if len({t.name for t in self.transitions}) != len(self.transitions):
            raise PetriError("duplicate transition name")
        known = set(self.places)
        for t in self.transitions:
            for p, w in t.inputs + t.outputs:
                if p not in known:
                    raise PetriError(f"transition {t.name} uses unknown place {p}")
            for p, w in t.inputs:
                if w == OMEGA or w < 0:
                    raise PetriError(f"transition {t.name}: input weights must be finite and non-negative")
            for p, w in t.outputs:
                if w != OMEGA and w < 0:
                    raise PetriError(f"transition {t.name}: negative output weight")

    # -- construction helpers ---------------------------------------------------
    @staticmethod
    def build(
        places: Sequence[str],
        transitions: Iterable[tuple[str, Mapping[str, int], Mapping[str, Weight]]],
        initial: Mapping[str, int] | None = None,
    ) -> "PetriNet":
        initial = initial or {}
        trs = tuple(
            PnTransition(
                name,
                tuple((p, w) for p, w in ins.items() if w),
                tuple((p, w) for p, w in outs.items() if w),
            )
            for name, ins, outs in transitions
        )
        return PetriNet(tuple(places), trs, tuple(initial.get(p, 0) for p in places))

    @property
    def index(self) -> dict[str, int]:
        cached = self.__dict__.get("_index")
        if cached is None:
            cached = {p: i for i, p in enumerate(self.places)}
            object.__setattr__(self, "_index", cached)
        return cached

    def vectors(self) -> list[tuple[tuple[int, ...], tuple[Weight, ...]]]:
        """Per transition: (input vector, output vector)."""
        cached = self.__dict__.get("_vectors")
        if cached is None:
            n = len(self.places)
            cached = []
            for t in self.transitions:
                i = [0] * n
                o: list[Weight] = [0] * n
                for p, w in t.inputs:
                    i[self.index[p]] += w
                for p, w in t.outputs:
                    o[self.index[p]] = OMEGA if w == OMEGA else o[self.index[p]] + w
                cached.append((tuple(i), tuple(o)))
            object.__setattr__(self, "_vectors", cached)
        return cached

    def marking(self, counts: Mapping[str, int]) -> tuple[int, ...]:
        for p in counts:
            if p not in self.index:
                raise PetriError(f"unknown place {p}")
        return tuple(counts.get(p, 0) for p in self.places)

    def as_dict(self, m: Sequence[Weight]) -> dict[str, Weight]:
        return {p: n for p, n in zip(self.places, m) if n}

    def transition(self, name: str) -> int:
        for k, t in enumerate(self.transitions):
            if t.name == name:
                return k
        raise PetriError(f"unknown transition {name}")

    @property
    def has_omega(self) -> bool:
        return any(t.has_omega for t in self.transitions)

    @property
    def is_01(self) -> bool:
        return all(w in (0, 1) for t in self.transitions for _, w in t.inputs + t.outputs) and all(
            len({p for p, _ in t.inputs}) == len(t.inputs) and len({p for p, _ in t.outputs}) == len(t.outputs)
            for t in self.transitions
        )

    # -- firing -------------------------------------------------------------
    def enabled(self, m: Sequence[Weight], t: int) -> bool:
        i, _ = self.vectors()[t]
        return all(a >= b for a, b in zip(m, i))

    def fire(self, m: Sequence[Weight], t: int, omega_count: Optional[int] = None) -> tuple:
        """Fire transition ``t``; an ω output adds ``omega_count`` tokens (ω if ``None``)."""
        if not self.enabled(m, t):
            raise PetriError(f"transition {self.transitions[t].name} is not enabled")
        i, o = self.vectors()[t]
        out = []
        for a, b, c in zip(m, i, o):
            if c == OMEGA:
                c = OMEGA if omega_count is None else omega_count
            out.append(a - b + c)
        return tuple(out)

    def enabled_names(self, m: Sequence[Weight]) -> list[str]:
        return [t.name for k, t in enumerate(self.transitions) if self.enabled(m, k)]


def leq(a: Sequence[Weight], b: Sequence[Weight]) -> bool:
    return all(x <= y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Text format

_TRANS_RE = re.compile(r"^trans\s+(\S+)\s+in\b(.*?)\bout\b(.*)$")


def parse_net(text: str) -> PetriNet:
    """Parse the line-based net format (``place``/``trans`` lines, ``#`` comments)."""
    places: list[str] = []
    init: dict[str, int] = {}
    transitions: list[PnTransition] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "place":
                if len(words) not in (2, 4) or (len(words) == 4 and words[2] != "init"):
                    raise PetriError("expected 'place <name> [init <k>]'")
                places.append(words[1])
                if len(words) == 4:
                    init[words[1]] = int(words[3])
            elif words[0] == "trans":
                m = _TRANS_RE.match(line)
                if m is None:
                    raise PetriError("expected 'trans <name> in <p:w ...> out <p:w|omega ...>'")
                ins = tuple(_arc(a, False) for a in m.group(2).split())
                outs = tuple(_arc(a, True) for a in m.group(3).split())
                transitions.append(PnTransition(m.group(1), ins, outs))
            else:
                raise PetriError(f"unknown directive '{words[0]}'")
        except (PetriError, ValueError) as exc:
            raise PetriError(f"line {lineno}: {exc}") from None
    net = PetriNet(tuple(places), tuple(transitions), tuple(init.get(p, 0) for p in places))
    return net


def _arc(text: str, allow_omega: bool) -> tuple[str, Weight]:
    place, sep, weight = text.rpartition(":")
    if not sep:
        return text, 1
    if weight == "omega":
        if not allow_omega:
            raise PetriError("ω is only allowed on output arcs")
        return place, OMEGA
    return place, int(weight)


def print_net(net: PetriNet) -> str:
    lines = []
    for p, k in zip(net.places, net.initial):
        lines.append(f"place {p}" + (f" init {k}" if k else ""))
    for t in net.transitions:
        ins = " ".join(f"{p}:{w}" for p, w in t.inputs)
        outs = " ".join(f"{p}:{'omega' if w == OMEGA else w}" for p, w in t.outputs)
        lines.append(f"trans {t.name} in {ins} out {outs}".replace("  ", " ").rstrip())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Coverability (backward)


@dataclass
class CoverResult:
    coverable: bool
    sequence: tuple[str, ...] = ()
    reached: tuple[int, ...] = ()
    basis: tuple[tuple[int, ...], ...] = ()
    iterations: int = 0


def _minimal(items: Iterable[tuple[int, ...]]) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for x in sorted(set(items), key=lambda v: (sum(v), v)):
        if not any(leq(y, x) for y in out):
            out.append(x)
    return out


def coverable(
    net: PetriNet,
    target: Mapping[str, int] | Sequence[Mapping[str, int]],
    *,
    check_antichain: bool = False,
) -> CoverResult:
    """Decide whether some reachable marking covers ``target``.

    ``target`` may be a single marking or a list of alternatives (the
    upward closure of their union is searched).  A positive answer carries
    a firing sequence from the initial marking, replayed before returning.
    """
    if net.has_omega:
        raise PetriError("net has ω arcs; apply deomegaize() before the coverability check")
    targets = [target] if isinstance(target, Mapping) else list(target)
    vecs = net.vectors()
    basis = _minimal(net.marking(t) for t in targets)
    origin: dict[tuple[int, ...], Optional[tuple[int, tuple[int, ...]]]] = {b: None for b in basis}
    work = deque(basis)
    iterations = 0
    m0 = net.initial
    while True:
        hit = next((b for b in basis if leq(b, m0)), None)
        if hit is not None:
            seq = []
            m = m0
            cur = hit
            while origin[cur] is not None:
                k, nxt = origin[cur]
                m = net.fire(m, k)
                seq.append(net.transitions[k].name)
                if not leq(nxt, m):
                    raise AssertionError("coverability witness failed replay")
                cur = nxt
            return CoverResult(True, tuple(seq), m, tuple(basis), iterations)
        if not work:
            return CoverResult(False, (), (), tuple(basis), iterations)
        b = work.popleft()
        if b not in basis:
            continue  # superseded by a smaller element
        iterations += 1
        for k, (i, o) in enumerate(vecs):
            pre = tuple(max(x - y, 0) + z for x, y, z in zip(b, o, i))
            if any(leq(c, pre) for c in basis):
                continue
            basis = [c for c in basis if not leq(pre, c)] + [pre]
            basis.sort(key=lambda v: (sum(v), v))
            origin[pre] = (k, b)
            work.append(pre)
            if check_antichain:
                for x in basis:
                    for y in basis:
                        if x != y and leq(x, y):
                            raise AssertionError("basis is not an antichain")


# ---------------------------------------------------------------------------
# Termination


@dataclass
class TerminationResult:
    terminating: bool
    prefix: tuple[str, ...] = ()
    loop: tuple[str, ...] = ()
    replayed: bool = False
    nodes: int = 0


def _omega_targets(net: PetriNet, k: int) -> set[int]:
    _, o = net.vectors()[k]
    return {p for p, w in enumerate(o) if w == OMEGA}


def _finite_delta(net: PetriNet, seq: Sequence[int]) -> list[int]:
    n = len(net.places)
    delta = [0] * n
    for k in seq:
        i, o = net.vectors()[k]
        for p in range(n):
            delta[p] += (0 if o[p] == OMEGA else o[p]) - i[p]
    return delta


def terminates(net: PetriNet, *, max_nodes: int = 2_000_000) -> TerminationResult:
    """Decide whether every firing sequence of ``net`` is finite.

    Depth-first exploration of the (ω-)reachability tree.  When a new node
    ``m'`` covers an ancestor ``m`` via the segment ``σ``:

    * if ``σ`` can be repeated forever — every place either has a
      non-negative finite effect or receives an ω arc inside ``σ`` — an
      infinite run exists;
    * otherwise, if ``m' = m`` the branch is cut, and if ``m' > m`` the
      strictly larger places are accelerated to ω.

    For nets without ω arcs the first case always applies, so this is the
    classical finite reachability tree with the ancestor-domination test.
    """
    plain = not net.has_omega
    vecs = net.vectors()
    m0 = tuple(net.initial)
    safe: set = set()  # fully explored markings without an infinite run (ω-free nets only)
    nodes = 0
    # stack frames: (marking, next transition index)
    path: list[tuple[tuple, int]] = [(m0, 0)]
    moves: list[int] = []
    while path:
        m, k = path[-1]
        if k >= len(vecs):
            path.pop()
            if plain:
                safe.add(m)
            if moves:
                moves.pop()
            continue
        path[-1] = (m, k + 1)
        if not net.enabled(m, k):
            continue
        m2 = net.fire(m, k)
        nodes += 1
        if nodes > max_nodes:
            raise RuntimeError("termination search exceeded its node budget")
        if plain and m2 in safe:
            continue
        seq_all = moves + [k]
        action = None
        for depth in range(len(path) - 1, -1, -1):
            anc = path[depth][0]
            if not leq(anc, m2):
                continue
            sigma = seq_all[depth:]
            omega_places = set().union(*(_omega_targets(net, t) for t in sigma))
            delta = _finite_delta(net, sigma)
            if all(delta[p] >= 0 or p in omega_places for p in range(len(delta))):
                prefix = tuple(seq_all[:depth])
                replayed = _replay_loop(net, prefix, tuple(sigma))
                return TerminationResult(
                    False,
                    tuple(net.transitions[t].name for t in prefix),
                    tuple(net.transitions[t].name for t in sigma),
                    replayed,
                    nodes,
                )
            if anc == m2:
                action = "cut"
                break
            accel = tuple(OMEGA if a < b else b for a, b in zip(anc, m2))
            m2 = accel
            action = "accelerated"
        if action == "cut":
            continue
        path.append((m2, 0))
        moves.append(k)
    return TerminationResult(True, nodes=nodes)


def _replay_loop(net: PetriNet, prefix: tuple[int, ...], loop: tuple[int, ...]) -> bool:
    """Replay prefix·loop·loop concretely (ω arcs add a large constant); check self-covering."""
    big = 1 + len(loop) * max([1] + [w for t in net.transitions for _, w in t.inputs])
    try:
        m = tuple(net.initial)
        for k in prefix:
            m = net.fire(m, k, big)
        start = m
        for k in loop:
            m = net.fire(m, k, big)
        if not leq(start, m):
            return False
        for k in loop:
            m = net.fire(m, k, big)
        return True
    except PetriError:
        return False


# ---------------------------------------------------------------------------
# ω arcs


def deomegaize(net: PetriNet) -> PetriNet:
    """Replace each ω arc ``t -> p`` by a control place with a pump and an exit transition."""
    places = list(net.places)
    transitions: list[PnTransition] = []
    initial = list(net.initial)
    extra: list[PnTransition] = []
    for t in net.transitions:
        outs = []
        for p, w in t.outputs:
            if w == OMEGA:
                ctl = f"ctl_{t.name}_{p}"
                places.append(ctl)
                initial.append(0)
                outs.append((ctl, 1))
                extra.append(PnTransition(f"pump_{t.name}_{p}", ((ctl, 1),), ((ctl, 1), (p, 1))))
                extra.append(PnTransition(f"exit_{t.name}_{p}", ((ctl, 1),), ()))
            else:
                outs.append((p, w))
        transitions.append(PnTransition(t.name, t.inputs, tuple(outs)))
    return PetriNet(tuple(places), tuple(transitions + extra), tuple(initial))
