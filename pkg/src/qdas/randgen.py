"""Seeded random generators for models and nets (test and benchmark corpora)."""

from __future__ import annotations

import random

from .model import (
    Assign,
    Atom,
    Block,
    DataDomain,
    DispatchA,
    DispatchS,
    Guard,
    Qdas,
    Test,
    Transition,
    validate,
)
from .petri import PetriNet, PnTransition


def random_net(
    rng: random.Random,
    *,
    max_places: int = 5,
    max_transitions: int = 6,
    max_init: int = 2,
) -> PetriNet:
    """A net with {0,1} arcs."""
    n = rng.randint(1, max_places)
    places = tuple(f"p{i}" for i in range(n))
    transitions = []
    for k in range(rng.randint(1, max_transitions)):
        ins = tuple((p, 1) for p in places if rng.random() < 0.35)
        outs = tuple((p, 1) for p in places if rng.random() < 0.3)
        transitions.append(PnTransition(f"t{k}", ins, outs))
    initial = tuple(rng.randint(0, max_init) if rng.random() < 0.5 else 0 for _ in places)
    return PetriNet(places, tuple(transitions), initial)


def random_target(rng: random.Random, places, *, max_count: int = 3, max_support: int = 2) -> dict[str, int]:
    places = list(places)
    support = rng.sample(places, min(len(places), rng.randint(1, max_support)))
    return {p: rng.randint(1, max_count) for p in support}


def _random_local(rng: random.Random, variables, values):
    x = rng.choice(variables)
    if rng.random() < 0.5:
        return Assign(x, rng.choice(values))
    atoms = (Atom(x, rng.choice(("eq", "neq")), rng.choice(values)),)
    return Test(Guard(atoms))


def _random_block(rng, name, n_states, make_dispatch, variables, values, dispatch_bias):
    states = tuple(f"s{i}" for i in range(n_states))
    final = states[-1]
    transitions = []
    # a spine guarantees the final state is reachable
    for a, b in zip(states, states[1:]):
        transitions.append(Transition(a, _action(rng, make_dispatch, variables, values, dispatch_bias), b))
    for _ in range(rng.randint(0, n_states)):
        a, b = rng.choice(states), rng.choice(states)
        transitions.append(Transition(a, _action(rng, make_dispatch, variables, values, dispatch_bias), b))
    return Block(name, states, states[0], final, tuple(dict.fromkeys(transitions)))


def _action(rng, make_dispatch, variables, values, bias):
    if make_dispatch is not None and rng.random() < bias:
        return make_dispatch()
    if variables and rng.random() < 0.7:
        return _random_local(rng, variables, values)
    return Test(Guard(()))


def random_model(
    rng: random.Random,
    *,
    kind: str = "general",
    max_blocks: int = 4,
    max_states: int = 4,
    max_vars: int = 2,
    max_queues: int = 2,
    name: str = "rand",
) -> Qdas:
    """A valid random model.

    ``kind`` is ``"sync-serial"`` (only synchronous dispatch, serial
    queues), ``"async-concurrent"`` (only asynchronous dispatch, concurrent
    queues) or ``"general"`` (anything).
    """
    values = ("0", "1")
    variables = tuple(f"x{i}" for i in range(rng.randint(0, max_vars)))
    n_blocks = rng.randint(1, max_blocks)
    names = ["main"] + [f"b{i}" for i in range(1, n_blocks)]
    n_queues = rng.randint(1, max_queues)
    if kind == "sync-serial":
        cqueues, squeues = (), tuple(f"s{i}" for i in range(n_queues))
    elif kind == "async-concurrent":
        cqueues, squeues = tuple(f"c{i}" for i in range(n_queues)), ()
    else:
        cqueues = tuple(f"c{i}" for i in range(rng.randint(0, max_queues)))
        squeues = tuple(f"s{i}" for i in range(rng.randint(0, max_queues)))
    queues = cqueues + squeues
    callees = names[1:]

    def make_dispatch():
        q = rng.choice(queues)
        b = rng.choice(callees)
        if kind == "sync-serial":
            return DispatchS(q, b)
        if kind == "async-concurrent":
            return DispatchA(q, b)
        return rng.choice((DispatchA, DispatchS))(q, b)

    dispatch = make_dispatch if (callees and queues) else None
    blocks = tuple(
        _random_block(rng, b, rng.randint(2, max_states), dispatch, variables, values, 0.35 if b == "main" else 0.2)
        for b in names
    )
    model = Qdas(name, DataDomain(values), variables, cqueues, squeues, blocks)
    problems = validate(model)
    if problems:  # generator bug: never hand out invalid models
        raise AssertionError(problems)
    return model
