"""Bounded explicit-state exploration of the configuration graph.

The search is a layered breadth-first search deduplicated by canonical
keys.  Successor generation for a layer may be spread over worker
threads, but results are merged in frontier order, so verdicts, traces
and statistics never depend on the thread count.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import networkx as nx

from .ctg import Configuration, Move, covers, initial_config, parikh, render_config, successors
from .model import Qdas

FOUND = "found"
COMPLETE = "exhaustedComplete"
BOUNDED = "exhaustedBounded"


@dataclass(frozen=True)
class ExploreLimits:
    max_configs: int = 200_000
    max_vertices: int = 12
    max_depth: int = 10_000
    star_bound: int = 3
    atomic_sync: bool = False

    def __post_init__(self) -> None:
        for name in ("max_configs", "max_vertices", "max_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.star_bound < 0:
            raise ValueError("star_bound must be non-negative")


@dataclass(frozen=True)
class Trace:
    """A run ``c0 a1 c1 ... an cn``."""

    initial: Configuration
    steps: tuple[tuple[Move, Configuration], ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> Configuration:
        return self.steps[-1][1] if self.steps else self.initial

    def configs(self) -> list[Configuration]:
        return [self.initial] + [c for _, c in self.steps]

    def render(self) -> list[str]:
        lines = [f"   {render_config(self.initial)}"]
        for move, c in self.steps:
            lines.append(f"-- {move.render()}")
            lines.append(f"   {render_config(c)}")
        return lines

    def to_json(self) -> list[dict]:
        return [{"action": None, "config": render_config(self.initial)}] + [
            {"action": m.render(), "config": render_config(c)} for m, c in self.steps
        ]


@dataclass
class ExploreStats:
    configs: int = 0
    frontier_peak: int = 0
    depth: int = 0
    truncated_vertices: int = 0
    truncated_configs: int = 0
    truncated_depth: int = 0

    @property
    def truncated(self) -> bool:
        return bool(self.truncated_vertices or self.truncated_configs or self.truncated_depth)

    def as_dict(self) -> dict:
        return {
            "configs": self.configs,
            "frontier_peak": self.frontier_peak,
            "depth": self.depth,
            "truncated_vertices": self.truncated_vertices,
            "truncated_configs": self.truncated_configs,
            "truncated_depth": self.truncated_depth,
        }


@dataclass
class ExploreResult:
    verdict: str
    trace: Optional[Trace] = None
    stats: ExploreStats = field(default_factory=ExploreStats)


class ReplayError(AssertionError):
    pass


Check = Callable[[Configuration, Move, Configuration], None]


def _expand(model: Qdas, limits: ExploreLimits, frontier: list[Configuration], threads: int):
    def succ(c: Configuration):
        out = successors(model, c, star_bound=limits.star_bound, atomic_sync=limits.atomic_sync)
        for _, c2 in out:
            c2.key  # compute keys inside the worker
        return out

    if threads <= 1 or len(frontier) < 2:
        return [succ(c) for c in frontier]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(succ, frontier))


def _walk_back(parents: dict, key, c: Configuration, c0: Configuration) -> Trace:
    steps = []
    while parents[key] is not None:
        parent_key, move, config = parents[key]
        steps.append((move, config))
        key = parent_key
    steps.reverse()
    return Trace(c0, tuple(steps))


def _search(
    model: Qdas,
    limits: ExploreLimits,
    stop: Callable[[Configuration], bool] | None,
    threads: int,
    check: Check | None,
    edges: list | None,
) -> tuple[ExploreResult, dict]:
    c0 = initial_config(model)
    stats = ExploreStats(configs=1, frontier_peak=1)
    parents: dict = {c0.key: None}
    if stop is not None and stop(c0):
        return ExploreResult(FOUND, Trace(c0), stats), parents
    frontier = [c0]
    depth = 0
    while frontier:
        if depth >= limits.max_depth:
            stats.truncated_depth += len(frontier)
            break
        layer = _expand(model, limits, frontier, threads)
        nxt: list[Configuration] = []
        for c, succs in zip(frontier, layer):
            for move, c2 in succs:
                if len(c2.graph) > limits.max_vertices:
                    stats.truncated_vertices += 1
                    continue
                key = c2.key
                if key in parents:
                    if edges is not None:
                        edges.append((c.key, key, move))
                    continue
                if stats.configs >= limits.max_configs:
                    stats.truncated_configs += 1
                    continue
                if check is not None:
                    check(c, move, c2)
                if edges is not None:
                    edges.append((c.key, key, move))
                parents[key] = (c.key, move, c2)
                stats.configs += 1
                if stop is not None and stop(c2):
                    stats.depth = depth + 1
                    trace = _walk_back(parents, key, c2, c0)
                    replay(model, trace, limits)
                    return ExploreResult(FOUND, trace, stats), parents
                nxt.append(c2)
        depth += 1
        if nxt:
            stats.depth = depth
        frontier = nxt
        stats.frontier_peak = max(stats.frontier_peak, len(frontier))
    verdict = BOUNDED if stats.truncated else COMPLETE
    return ExploreResult(verdict, None, stats), parents


def explore(
    model: Qdas,
    limits: ExploreLimits | None = None,
    stop: Callable[[Configuration], bool] | None = None,
    *,
    threads: int = 1,
    check: Check | None = None,
) -> ExploreResult:
    """Breadth-first search from the initial configuration until ``stop`` holds.

    ``check`` is called on every newly discovered transition ``(c, move, c2)``
    and may raise to flag an invariant violation.
    """
    result, _ = _search(model, limits or ExploreLimits(), stop, threads, check, None)
    return result


def check_cover_bounded(
    model: Qdas,
    target: Mapping[str, int],
    limits: ExploreLimits | None = None,
    *,
    threads: int = 1,
) -> ExploreResult:
    """Search for a reachable configuration whose Parikh image covers ``target``."""
    return explore(model, limits, lambda c: covers(parikh(c.graph), target), threads=threads)


def replay(model: Qdas, trace: Trace, limits: ExploreLimits | None = None) -> None:
    """Raise :class:`ReplayError` unless every step of ``trace`` is a successor step."""
    limits = limits or ExploreLimits()
    if trace.initial.key != initial_config(model).key:
        raise ReplayError("trace does not start in the initial configuration")
    current = trace.initial
    for i, (move, c) in enumerate(trace.steps):
        options = successors(model, current, star_bound=limits.star_bound, atomic_sync=limits.atomic_sync)
        if not any(m == move and c2.key == c.key for m, c2 in options):
            raise ReplayError(f"step {i + 1} ({move.render()}) is not a successor")
        current = c


# ---------------------------------------------------------------------------
# Termination


@dataclass(frozen=True)
class Lasso:
    """A finite prefix followed by a cycle that returns to the prefix's last configuration."""

    prefix: Trace
    cycle: tuple[tuple[Move, Configuration], ...]

    def render(self) -> list[str]:
        lines = self.prefix.render()
        lines.append("== cycle:")
        for move, c in self.cycle:
            lines.append(f"-- {move.render()}")
            lines.append(f"   {render_config(c)}")
        return lines

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix.to_json(),
            "cycle": [{"action": m.render(), "config": render_config(c)} for m, c in self.cycle],
        }


@dataclass
class TerminationResult:
    verdict: str  # "nonTerminating", COMPLETE (terminating) or BOUNDED (no cycle found)
    lasso: Optional[Lasso] = None
    stats: ExploreStats = field(default_factory=ExploreStats)

    @property
    def terminating(self) -> bool | None:
        if self.verdict == "nonTerminating":
            return False
        return True if self.verdict == COMPLETE else None


def check_termination_bounded(
    model: Qdas,
    limits: ExploreLimits | None = None,
    *,
    threads: int = 1,
) -> TerminationResult:
    """Look for a reachable cycle of the configuration graph (an infinite run)."""
    limits = limits or ExploreLimits()
    edges: list = []
    result, parents = _search(model, limits, None, threads, None, edges)
    graph = nx.MultiDiGraph()
    c0 = initial_config(model)
    graph.add_node(c0.key)
    moves = {}
    for src, dst, move in edges:
        k = graph.add_edge(src, dst)
        moves[(src, dst, k)] = move
    try:
        cycle = nx.find_cycle(graph, source=c0.key)
    except nx.NetworkXNoCycle:
        return TerminationResult(result.verdict, None, result.stats)

    entry = cycle[0][0]
    configs = {key: entry_ for key, entry_ in ((k, v[2]) for k, v in parents.items() if v is not None)}
    configs[c0.key] = c0
    prefix = _walk_back(parents, entry, configs[entry], c0)
    loop = tuple((moves[(s, d, k)], configs[d]) for s, d, k in cycle)
    lasso = Lasso(prefix, loop)
    verify_lasso(model, lasso, limits)
    return TerminationResult("nonTerminating", lasso, result.stats)


def verify_lasso(model: Qdas, lasso: Lasso, limits: ExploreLimits | None = None) -> None:
    replay(model, lasso.prefix, limits)
    full = Trace(lasso.prefix.initial, lasso.prefix.steps + lasso.cycle)
    replay(model, full, limits)
    if not lasso.cycle or lasso.cycle[-1][1].key != lasso.prefix.final.key:
        raise ReplayError("cycle does not return to its entry configuration")


# ---------------------------------------------------------------------------
# Random walks


def random_walk(
    model: Qdas,
    seed: int,
    steps: int,
    *,
    star_bound: int = 3,
    atomic_sync: bool = False,
) -> Trace:
    """Seeded uniform random walk; stops early in deadlocked configurations."""
    rng = random.Random(seed)
    current = initial_config(model)
    out = []
    for _ in range(steps):
        options = successors(model, current, star_bound=star_bound, atomic_sync=atomic_sync)
        if not options:
            break
        move, current = options[rng.randrange(len(options))]
        out.append((move, current))
    return Trace(initial_config(model), tuple(out))
