"""Abstract syntax of queue-dispatch asynchronous systems.

A model is a finite set of *blocks*, each a small labeled transition
system, plus concurrent and serial queue names and a set of global
variables ranging over one finite domain.  Extended models additionally
allow ``forkjoin`` actions.

Everything here is an immutable value; the only behaviour lives in
:func:`validate` (static well-formedness) and :func:`classify` (the
subclass taxonomy together with the known decidability results).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

STAR = "*"
"""Parameter of a ``forkjoin`` that forks an unbounded, chosen number of blocks."""

PSEUDO_QUEUE = "ı"
"""Queue identifier attached to the ``main`` task; it cannot be declared."""


@dataclass(frozen=True)
class DataDomain:
    """Finite, ordered set of symbolic values; the first one is the initial value."""

    values: tuple[str, ...]

    @property
    def initial(self) -> str:
        return self.values[0]

    def __contains__(self, value: object) -> bool:
        return value in self.values


@dataclass(frozen=True)
class Atom:
    variable: str
    op: str  # "eq" or "neq"
    value: str

    def holds(self, valuation: Mapping[str, str]) -> bool:
        equal = valuation[self.variable] == self.value
        return equal if self.op == "eq" else not equal


@dataclass(frozen=True)
class Guard:
    """Conjunction of (dis)equality atoms; the empty conjunction is ``true``."""

    atoms: tuple[Atom, ...] = ()

    def holds(self, valuation: Mapping[str, str]) -> bool:
        return all(atom.holds(valuation) for atom in self.atoms)

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for atom in self.atoms:
            seen.setdefault(atom.variable)
        return tuple(seen)


# ---------------------------------------------------------------------------
# Actions


@dataclass(frozen=True)
class DispatchA:
    queue: str
    block: str


@dataclass(frozen=True)
class DispatchS:
    queue: str
    block: str


@dataclass(frozen=True)
class ForkJoin:
    queue: str
    block: str
    param: Union[int, str]  # positive integer or STAR


@dataclass(frozen=True)
class Test:
    guard: Guard


@dataclass(frozen=True)
class Assign:
    variable: str
    value: str


Action = Union[DispatchA, DispatchS, ForkJoin, Test, Assign]


def render_action(action: Action) -> str:
    """Render an action in the surface syntax of the model language."""
    if isinstance(action, DispatchA):
        return f"dispatch_a({action.queue}, {action.block})"
    if isinstance(action, DispatchS):
        return f"dispatch_s({action.queue}, {action.block})"
    if isinstance(action, ForkJoin):
        return f"forkjoin({action.queue}, {action.block}, {action.param})"
    if isinstance(action, Test):
        if not action.guard.atoms:
            return "true"
        parts = []
        for atom in action.guard.atoms:
            rel = "==" if atom.op == "eq" else "!="
            parts.append(f"{atom.variable} {rel} {atom.value}")
        return " && ".join(parts)
    if isinstance(action, Assign):
        return f"{action.variable} <- {action.value}"
    raise TypeError(f"unknown action {action!r}")


@dataclass(frozen=True)
class Transition:
    src: str
    action: Action
    dst: str


@dataclass(frozen=True)
class Block:
    name: str
    states: tuple[str, ...]
    initial: str
    final: str
    transitions: tuple[Transition, ...]

    def qualified(self, state: str) -> str:
        return f"{self.name}.{state}"


@dataclass(frozen=True)
class Qdas:
    name: str
    domain: DataDomain
    variables: tuple[str, ...]
    cqueues: tuple[str, ...]
    squeues: tuple[str, ...]
    blocks: tuple[Block, ...]
    main: str = "main"
    extended: bool = False

    @functools.cached_property
    def _block_index(self) -> dict[str, Block]:
        return {b.name: b for b in self.blocks}

    def block(self, name: str) -> Block:
        return self._block_index[name]

    def has_block(self, name: str) -> bool:
        return name in self._block_index

    @property
    def queues(self) -> tuple[str, ...]:
        return self.cqueues + self.squeues

    def is_serial(self, queue: str) -> bool:
        return queue in self.squeues

    def all_states(self) -> tuple[str, ...]:
        """Qualified names ``block.state`` of every location, in declaration order."""
        return tuple(b.qualified(s) for b in self.blocks for s in b.states)

    def actions(self) -> Iterable[tuple[Block, int, Transition]]:
        for block in self.blocks:
            for index, tr in enumerate(block.transitions):
                yield block, index, tr

    def initial_valuation(self) -> dict[str, str]:
        return {x: self.domain.initial for x in self.variables}


def split_state(qualified: str) -> tuple[str, str]:
    block, _, state = qualified.partition(".")
    return block, state


# ---------------------------------------------------------------------------
# Static validation


@dataclass(frozen=True)
class Diagnostic:
    location: str
    reason: str

    def __str__(self) -> str:
        return f"{self.location}: {self.reason}"


def _duplicates(items: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    dups: list[str] = []
    for item in items:
        if item in seen and item not in dups:
            dups.append(item)
        seen.add(item)
    return dups


def validate(model: Qdas) -> list[Diagnostic]:
    """Return every violated syntactic constraint (empty list = valid model)."""
    diags: list[Diagnostic] = []

    def report(location: str, reason: str) -> None:
        diags.append(Diagnostic(location, reason))

    if not model.domain.values:
        report("domain", "the data domain is empty")
    for v in _duplicates(model.domain.values):
        report("domain", f"value '{v}' is listed twice")
    for x in _duplicates(model.variables):
        report("vars", f"variable '{x}' is declared twice")
    for q in _duplicates(model.queues):
        report("queues", f"queue '{q}' is declared twice")
    for q in set(model.cqueues) & set(model.squeues):
        report("queues", f"queue '{q}' is declared both concurrent and serial")
    for q in model.queues:
        if q == PSEUDO_QUEUE:
            report("queues", f"'{PSEUDO_QUEUE}' is reserved for the main task")
    for b in _duplicates(block.name for block in model.blocks):
        report("blocks", f"block '{b}' is defined twice")
    if not model.has_block(model.main):
        report("main", f"main block '{model.main}' is not defined")
    if model.extended:
        for q in model.squeues:
            report(f"queue {q}", "extended models only admit concurrent queues")

    variables = set(model.variables)
    domain = set(model.domain.values)
    cqueues = set(model.cqueues)
    queues = set(model.queues)

    for block in model.blocks:
        where = f"block {block.name}"
        for s in _duplicates(block.states):
            report(where, f"state '{s}' is declared twice")
        states = set(block.states)
        if block.initial not in states:
            report(where, f"initial state '{block.initial}' is not declared")
        if block.final not in states:
            report(where, f"final state '{block.final}' is not declared")
        seen_transitions: set[Transition] = set()
        for index, tr in enumerate(block.transitions):
            loc = f"{where}, transition {index} ({tr.src} -> {tr.dst})"
            if tr in seen_transitions:
                report(loc, "duplicate transition")
            seen_transitions.add(tr)
            for endpoint in (tr.src, tr.dst):
                if endpoint not in states:
                    report(loc, f"state '{endpoint}' is not declared")
            a = tr.action
            if isinstance(a, (DispatchA, DispatchS, ForkJoin)):
                if a.queue not in queues:
                    report(loc, f"queue '{a.queue}' is not declared")
                if not model.has_block(a.block):
                    report(loc, f"block '{a.block}' is not defined")
                if a.block == model.main:
                    report(loc, "dispatch target is main")
            if isinstance(a, DispatchS) and model.extended:
                report(loc, "synchronous dispatch is replaced by forkjoin in extended models")
            if isinstance(a, ForkJoin):
                if not model.extended:
                    report(loc, "forkjoin is only allowed in extended models")
                if a.queue in queues and a.queue not in cqueues:
                    report(loc, f"forkjoin queue '{a.queue}' must be concurrent")
                if a.param != STAR and not (isinstance(a.param, int) and a.param >= 1):
                    report(loc, f"forkjoin parameter must be a positive integer or '*', got {a.param!r}")
            if isinstance(a, Test):
                for atom in a.guard.atoms:
                    if atom.variable not in variables:
                        report(loc, f"variable '{atom.variable}' is not declared")
                    if atom.value not in domain:
                        report(loc, f"value '{atom.value}' is not in the domain")
                    if atom.op not in ("eq", "neq"):
                        report(loc, f"unknown relation '{atom.op}'")
            if isinstance(a, Assign):
                if a.variable not in variables:
                    report(loc, f"variable '{a.variable}' is not declared")
                if a.value not in domain:
                    report(loc, f"value '{a.value}' is not in the domain")
    return diags


# ---------------------------------------------------------------------------
# Subclass taxonomy

PARIKH = "parikh-coverability"
TERMINATION = "termination"


@dataclass(frozen=True)
class Decidability:
    status: str  # "decidable", "undecidable" or "unknown"
    label: str = ""

    def __str__(self) -> str:
        return f"{self.status} ({self.label})" if self.label else self.status


@dataclass(frozen=True)
class SubclassVerdict:
    tags: frozenset[str]
    decidability: Mapping[str, Decidability] = field(default_factory=dict)
    abstractions: tuple[str, ...] = ()

    @property
    def queue_tag(self) -> str:
        for tag in ("queueless", "concurrent", "serial", "mixed"):
            if tag in self.tags:
                return tag
        raise AssertionError("every verdict carries a queue tag")

    @property
    def dispatch_tag(self) -> str | None:
        for tag in ("synchronous", "asynchronous"):
            if tag in self.tags:
                return tag
        return None


def _queue_tag(model: Qdas) -> str:
    if not model.cqueues and not model.squeues:
        return "queueless"
    if not model.squeues:
        return "concurrent"
    if not model.cqueues:
        return "serial"
    return "mixed"


def classify(model: Qdas) -> SubclassVerdict:
    """Compute subclass tags and the decidability status of both problems."""
    has_async = any(isinstance(tr.action, DispatchA) for _, _, tr in model.actions())
    has_sync = any(isinstance(tr.action, DispatchS) for _, _, tr in model.actions())
    has_star = any(
        isinstance(tr.action, ForkJoin) and tr.action.param == STAR for _, _, tr in model.actions()
    )
    queue_tag = _queue_tag(model)
    tags = {queue_tag}

    if model.extended:
        tags.add("extended")
        if not has_star:
            tags.add("star-free")
        if not has_sync:
            tags.add("asynchronous")
        undecidable = Decidability("undecidable", "extended model")
        abstractions = ("N-times",) if not has_star else ("N-star",)
        return SubclassVerdict(
            frozenset(tags),
            {PARIKH: undecidable, TERMINATION: undecidable},
            abstractions,
        )

    if has_sync and has_async:
        dispatch = None
    elif has_async:
        dispatch = "asynchronous"
    else:
        # No asynchronous dispatch at all (possibly no dispatch whatsoever).
        dispatch = "synchronous"
    if dispatch:
        tags.add(dispatch)

    if queue_tag == "queueless":
        parikh = Decidability("decidable", "PSpace-C")
    elif dispatch == "synchronous":
        parikh = Decidability("decidable", "PSpace-C" if queue_tag == "serial" else "ExpTime-C")
    elif dispatch == "asynchronous" and queue_tag == "concurrent":
        parikh = Decidability("decidable", "ExpSpace-C")
    elif dispatch == "asynchronous" and queue_tag == "serial":
        parikh = Decidability("undecidable", "asynchronous serial")
    elif dispatch == "asynchronous":
        parikh = Decidability("undecidable", "asynchronous with a serial queue (derived)")
    elif queue_tag == "concurrent":
        parikh = Decidability("undecidable", "both dispatch kinds")
    else:
        parikh = Decidability("undecidable", "both dispatch kinds (derived)")

    if dispatch == "synchronous":
        if queue_tag == "serial":
            term = Decidability("decidable", "PSpace-C")
        else:
            term = Decidability("decidable", "in ExpTime, PSpace-hard")
    elif dispatch == "asynchronous" and queue_tag == "concurrent":
        term = Decidability("decidable", "ExpSpace-C")
    elif dispatch == "asynchronous":
        term = Decidability("undecidable", "asynchronous serial")
    else:
        term = Decidability("undecidable", "both dispatch kinds")

    return SubclassVerdict(frozenset(tags), {PARIKH: parikh, TERMINATION: term})
