"""Command-line front end: ``qdas <command> ...``.

Exit codes: 0 = property holds / target not coverable, 1 = violated /
coverable, 2 = unknown (bounded search inconclusive), 3 = input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .ctg import render_config
from .dsl import DslError, parse_model, parse_target, print_model
from .explorer import (
    BOUNDED,
    COMPLETE,
    FOUND,
    ExploreLimits,
    check_cover_bounded,
    check_termination_bounded,
    explore,
    random_walk,
)
from .model import PARIKH, STAR, TERMINATION, DispatchS, ForkJoin, Qdas, classify
from .petri import PetriError, coverable, deomegaize, parse_net, print_net, terminates
from .pushdown import check_parikh_cover_sync, check_termination_sync, expand_data, from_sync_qdas
from .translate import (
    TranslationError,
    counter_goal_target,
    eqdas_to_pn_star,
    eqdas_to_pn_times,
    fifo_goal_targets,
    fifo_to_qdas,
    parse_counters,
    parse_fifo,
    pn_to_qdas,
    qdas_to_pn,
    two_counter_to_qdas,
)

EXIT_HOLDS, EXIT_VIOLATED, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3
MODES = ("auto", "bounded", "decision")


class InputError(Exception):
    pass


@dataclass
class Query:
    kind: str  # cover, terminate, classify, translate, explore, simulate
    target: dict = field(default_factory=dict)
    limits: ExploreLimits = field(default_factory=ExploreLimits)
    mode: str = "auto"
    threads: int = 1
    to: str = "pn"
    seed: int = 0
    steps: int = 20


@dataclass
class Report:
    data: dict
    lines: list[str]
    exit_code: int = EXIT_HOLDS

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        return "\n".join(self.lines) + "\n"


# ---------------------------------------------------------------------------
# Routing


def _route(model: Qdas, problem: str) -> str:
    """Engine chosen in auto mode: ``pushdown``, ``petri``, ``abstraction`` or ``bounded``."""
    verdict = classify(model)
    if model.extended:
        asynchronous = not any(isinstance(tr.action, DispatchS) for _, _, tr in model.actions())
        return "abstraction" if asynchronous and not model.squeues else "bounded"
    if verdict.decidability[problem].status != "decidable":
        return "bounded"
    return "pushdown" if "synchronous" in verdict.tags else "petri"


def _assert_precondition(model: Qdas, engine: str) -> None:
    tags = classify(model).tags
    if engine == "pushdown":
        assert "synchronous" in tags and not model.extended, "pushdown routing outside synchronous models"
    elif engine == "petri":
        assert {"asynchronous", "concurrent"} <= tags and not model.extended, "net routing outside async-concurrent"
    elif engine == "abstraction":
        assert model.extended and not model.squeues, "abstraction routing outside async-concurrent eqdas"


def _engine(model: Qdas, problem: str, mode: str) -> str:
    routed = _route(model, problem)
    if mode == "bounded":
        return "bounded"
    if mode == "decision" and routed == "bounded":
        reason = classify(model).decidability[problem]
        raise InputError(f"no decision procedure for this model ({problem}: {reason}); use --mode bounded or auto")
    _assert_precondition(model, routed)
    return routed


def _class_data(model: Qdas) -> dict:
    v = classify(model)
    return {
        "tags": sorted(v.tags),
        PARIKH: str(v.decidability[PARIKH]),
        TERMINATION: str(v.decidability[TERMINATION]),
        "abstractions": list(v.abstractions),
    }


def _header(model: Qdas, data: dict) -> list[str]:
    c = data["classification"]
    lines = [
        f"model: {model.name}",
        f"class: {', '.join(c['tags'])}",
        f"  {PARIKH}: {c[PARIKH]}",
        f"  {TERMINATION}: {c[TERMINATION]}",
    ]
    if c["abstractions"]:
        lines.append(f"  abstractions: {', '.join(c['abstractions'])}")
    return lines


BANNER = "!! semi-decision only: bounded exploration; exhaustedBounded means unknown"


def _stats_line(stats: dict) -> str:
    return "stats: " + ", ".join(f"{k}={v}" for k, v in sorted(stats.items()))


# ---------------------------------------------------------------------------
# Commands


def run(query: Query, model: Qdas) -> Report:
    data: dict = {"command": query.kind, "model": model.name, "classification": _class_data(model)}
    lines = _header(model, data)
    if query.kind == "classify":
        return Report(data, lines)
    if query.kind == "cover":
        return _run_cover(query, model, data, lines)
    if query.kind == "terminate":
        return _run_terminate(query, model, data, lines)
    if query.kind == "explore":
        res = explore(model, query.limits, threads=query.threads)
        data.update(verdict=res.verdict, stats=res.stats.as_dict())
        lines += [f"verdict: {res.verdict}", _stats_line(res.stats.as_dict())]
        return Report(data, lines, EXIT_HOLDS if res.verdict == COMPLETE else EXIT_UNKNOWN)
    if query.kind == "simulate":
        trace = random_walk(model, query.seed, query.steps, star_bound=query.limits.star_bound)
        data.update(seed=query.seed, steps=len(trace), trace=trace.to_json())
        lines += [f"seed: {query.seed}", f"steps: {len(trace)}"] + trace.render()
        return Report(data, lines)
    if query.kind == "translate":
        return _run_translate(query, model, data)
    raise InputError(f"unknown query {query.kind}")


def _bounded_cover(query: Query, model: Qdas, data: dict, lines: list[str], reason: str) -> Report:
    res = check_cover_bounded(model, query.target, query.limits, threads=query.threads)
    verdict = {FOUND: "coverable", COMPLETE: "not coverable", BOUNDED: "unknown"}[res.verdict]
    data.update(
        engine="bounded",
        semi_decision=True,
        banner=reason,
        verdict=verdict,
        search=res.verdict,
        stats=res.stats.as_dict(),
        witness=res.trace.to_json() if res.trace else None,
    )
    lines += [BANNER, f"   ({reason})", "engine: bounded explorer", f"verdict: {verdict} ({res.verdict})"]
    if res.trace:
        lines += [f"witness ({len(res.trace)} steps):"] + ["  " + x for x in res.trace.render()]
    lines.append(_stats_line(res.stats.as_dict()))
    code = {FOUND: EXIT_VIOLATED, COMPLETE: EXIT_HOLDS, BOUNDED: EXIT_UNKNOWN}[res.verdict]
    return Report(data, lines, code)


def _run_cover(query: Query, model: Qdas, data: dict, lines: list[str]) -> Report:
    data["target"] = dict(sorted(query.target.items()))
    lines.append("target: " + ", ".join(f"{k}={v}" for k, v in sorted(query.target.items())))
    engine = _engine(model, PARIKH, query.mode)
    if engine == "bounded":
        reason = "forced by --mode bounded" if query.mode == "bounded" else str(classify(model).decidability[PARIKH])
        return _bounded_cover(query, model, data, lines, reason)
    if engine == "pushdown":
        res = check_parikh_cover_sync(model, query.target)
        verdict = "coverable" if res.coverable else "not coverable"
        data.update(
            engine=f"pushdown ({res.method})",
            semi_decision=False,
            verdict=verdict,
            witness=res.describe() if res.coverable else None,
        )
        lines += [f"engine: pushdown ({res.method})", f"verdict: {verdict}"]
        if res.coverable:
            lines.append(f"witness: {res.describe()}")
        return Report(data, lines, EXIT_VIOLATED if res.coverable else EXIT_HOLDS)
    if engine == "petri":
        ab = qdas_to_pn(model)
        res = coverable(ab.net, ab.target_markings(query.target))
        verdict = "coverable" if res.coverable else "not coverable"
        data.update(
            engine="petri (qdas-to-pn, backward coverability)",
            semi_decision=False,
            verdict=verdict,
            witness=list(res.sequence) if res.coverable else None,
        )
        lines += ["engine: petri (qdas-to-pn, backward coverability)", f"verdict: {verdict}"]
        if res.coverable:
            lines.append("witness (net firing sequence): " + (" ".join(res.sequence) or "<empty>"))
        return Report(data, lines, EXIT_VIOLATED if res.coverable else EXIT_HOLDS)
    # over-approximating abstraction: a negative answer is conclusive
    ab, name = _abstraction(model)
    net = deomegaize(ab.net) if ab.net.has_omega else ab.net
    res = coverable(net, ab.target_markings(query.target))
    data.update(abstraction=name, abstraction_coverable=res.coverable)
    lines.append(f"engine: {name} abstraction (over-approximation)")
    if not res.coverable:
        data.update(engine=f"abstraction {name}", semi_decision=False, verdict="not coverable")
        lines.append("verdict: not coverable (not coverable in the abstraction)")
        return Report(data, lines, EXIT_HOLDS)
    lines.append("abstraction covers the target; inconclusive for the model")
    if query.mode == "decision":
        data.update(engine=f"abstraction {name}", semi_decision=False, verdict="unknown")
        lines.append("verdict: unknown")
        return Report(data, lines, EXIT_UNKNOWN)
    return _bounded_cover(query, model, data, lines, f"{name} abstraction inconclusive")


def _abstraction(model: Qdas):
    has_star = any(isinstance(tr.action, ForkJoin) and tr.action.param == STAR for _, _, tr in model.actions())
    return (eqdas_to_pn_star(model), "N-star") if has_star else (eqdas_to_pn_times(model), "N-times")


def _bounded_term(query: Query, model: Qdas, data: dict, lines: list[str], reason: str) -> Report:
    res = check_termination_bounded(model, query.limits, threads=query.threads)
    verdict = {"nonTerminating": "non-terminating", COMPLETE: "terminating", BOUNDED: "unknown"}[res.verdict]
    data.update(
        engine="bounded",
        semi_decision=True,
        banner=reason,
        verdict=verdict,
        search=res.verdict,
        stats=res.stats.as_dict(),
        witness=res.lasso.to_json() if res.lasso else None,
    )
    lines += [BANNER, f"   ({reason})", "engine: bounded explorer", f"verdict: {verdict} ({res.verdict})"]
    if res.lasso:
        lines += ["witness (lasso):"] + ["  " + x for x in res.lasso.render()]
    lines.append(_stats_line(res.stats.as_dict()))
    code = {"nonTerminating": EXIT_VIOLATED, COMPLETE: EXIT_HOLDS, BOUNDED: EXIT_UNKNOWN}[res.verdict]
    return Report(data, lines, code)


def _run_terminate(query: Query, model: Qdas, data: dict, lines: list[str]) -> Report:
    engine = _engine(model, TERMINATION, query.mode)
    if engine == "bounded":
        reason = "forced by --mode bounded" if query.mode == "bounded" else str(classify(model).decidability[TERMINATION])
        return _bounded_term(query, model, data, lines, reason)
    if engine == "pushdown":
        res = check_termination_sync(model)
        verdict = "terminating" if res.terminating else "non-terminating"
        data.update(engine="pushdown (head graph)", semi_decision=False, verdict=verdict, witness=res.render() or None)
        lines += ["engine: pushdown (head graph)", f"verdict: {verdict}"]
        if not res.terminating:
            lines += ["witness (pushdown rules):"] + ["  " + x for x in res.render()]
        return Report(data, lines, EXIT_HOLDS if res.terminating else EXIT_VIOLATED)
    if engine == "petri":
        res = terminates(qdas_to_pn(model).net)
        verdict = "terminating" if res.terminating else "non-terminating"
        witness = None if res.terminating else {"prefix": list(res.prefix), "loop": list(res.loop)}
        data.update(engine="petri (qdas-to-pn, omega tree)", semi_decision=False, verdict=verdict, witness=witness)
        lines += ["engine: petri (qdas-to-pn, omega tree)", f"verdict: {verdict}"]
        if witness:
            lines.append("witness prefix: " + (" ".join(res.prefix) or "<empty>"))
            lines.append("witness loop: " + " ".join(res.loop))
        return Report(data, lines, EXIT_HOLDS if res.terminating else EXIT_VIOLATED)
    ab, name = _abstraction(model)
    res = terminates(ab.net)
    data.update(abstraction=name, abstraction_terminating=res.terminating)
    lines.append(f"engine: {name} abstraction (over-approximation)")
    if res.terminating:
        data.update(engine=f"abstraction {name}", semi_decision=False, verdict="terminating")
        lines.append("verdict: terminating (the abstraction terminates)")
        return Report(data, lines, EXIT_HOLDS)
    lines.append("abstraction has an infinite run; inconclusive for the model")
    if query.mode == "decision":
        data.update(engine=f"abstraction {name}", semi_decision=False, verdict="unknown")
        lines.append("verdict: unknown")
        return Report(data, lines, EXIT_UNKNOWN)
    return _bounded_term(query, model, data, lines, f"{name} abstraction inconclusive")


def _run_translate(query: Query, model: Qdas, data: dict) -> Report:
    if query.to == "pn":
        if model.extended:
            text = print_net(_abstraction(model)[0].net)
        else:
            text = print_net(qdas_to_pn(model).net)
    elif query.to == "pds":
        text = expand_data(from_sync_qdas(model)).dump()
    else:
        raise InputError(f"unknown translation target {query.to}")
    data.update(to=query.to, output=text)
    return Report(data, text.rstrip("\n").split("\n"))


# ---------------------------------------------------------------------------
# Argument parsing


def _limits(args) -> ExploreLimits:
    return ExploreLimits(
        max_configs=args.max_configs,
        max_vertices=args.max_vertices,
        max_depth=args.max_depth,
        star_bound=args.star_bound,
        atomic_sync=args.atomic_sync,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdas", description="Verification tool for queue-dispatch asynchronous systems.")
    parser.add_argument("--version", action="version", version=f"qdas {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="model file in the QDAS DSL ('-' for stdin)")
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--timing", action="store_true", help="add wall-clock time to the report")

    bounded = argparse.ArgumentParser(add_help=False)
    bounded.add_argument("--threads", type=int, default=1)
    bounded.add_argument("--max-configs", type=int, default=ExploreLimits.max_configs)
    bounded.add_argument("--max-vertices", type=int, default=ExploreLimits.max_vertices)
    bounded.add_argument("--max-depth", type=int, default=ExploreLimits.max_depth)
    bounded.add_argument("--star-bound", type=int, default=ExploreLimits.star_bound)
    bounded.add_argument("--atomic-sync", action="store_true", help="fuse synchronous dispatch with its dequeue")

    sub.add_parser("classify", parents=[common], help="subclass and decidability of both problems")
    p = sub.add_parser("check-cover", parents=[common, bounded], help="Parikh coverability")
    p.add_argument("--target", required=True, help='e.g. "block.state=2, other.s=1"')
    p.add_argument("--mode", choices=MODES, default="auto")
    p = sub.add_parser("check-term", parents=[common, bounded], help="termination of every run")
    p.add_argument("--mode", choices=MODES, default="auto")
    sub.add_parser("explore", parents=[common, bounded], help="bounded exploration statistics")
    p = sub.add_parser("translate", parents=[common], help="emit the net or pushdown system")
    p.add_argument("--to", choices=("pn", "pds"), required=True)
    p = sub.add_parser("simulate", parents=[common], help="seeded random walk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--star-bound", type=int, default=ExploreLimits.star_bound)

    gen = sub.add_parser("gen", help="gadget generators (emit DSL text)")
    gsub = gen.add_subparsers(dest="gadget", required=True)
    g = gsub.add_parser("pn2qdas", help="Petri net -> QDAS")
    g.add_argument("input")
    g.add_argument("--target", help='marking to cover, e.g. "p=1, q=2" (printed as a comment)')
    g = gsub.add_parser("fifo2qdas", help="FIFO system -> QDAS")
    g.add_argument("input")
    g.add_argument("--goal", required=True)
    g = gsub.add_parser("2cs2qdas", help="two-counter system -> QDAS")
    g.add_argument("input")
    g.add_argument("--goal", required=True)
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _marking(text: str, places) -> dict[str, int]:
    out = {}
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        name, sep, count = chunk.partition("=")
        if not sep or not count.strip().isdigit() or name.strip() not in places:
            raise InputError(f"malformed marking entry '{chunk}'")
        out[name.strip()] = int(count)
    return out


def _gen(args) -> str:
    text = _read(args.input)
    if args.gadget == "pn2qdas":
        enc = pn_to_qdas(parse_net(text))
        header = ["// generated from a Petri net: a marking m is covered iff the model covers"]
        header.append("// trans.L14=1, main.L8=1 and p_<place>.L11=m(place)")
        if args.target:
            m = _marking(args.target, enc.net.places)
            tgt = enc.cover_target(m)
            header.append("// target: " + ", ".join(f"{k}={v}" for k, v in sorted(tgt.items())))
        return "\n".join(header) + "\n" + print_model(enc.model)
    if args.gadget == "fifo2qdas":
        f = parse_fifo(text)
        model = fifo_to_qdas(f, args.goal)
        targets = " | ".join(f"{k}=1" for t in fifo_goal_targets(f) for k in t)
        return f"// goal {args.goal} reachable iff one of these is coverable: {targets}\n" + print_model(model)
    cs = parse_counters(text)
    model = two_counter_to_qdas(cs, args.goal)
    (loc,) = counter_goal_target()
    return f"// goal {args.goal} reachable iff {loc}=1 is coverable\n" + print_model(model)


def _style(text: str, stream) -> str:
    if os.environ.get("QDAS_COLOR", "1") == "0" or not getattr(stream, "isatty", lambda: False)():
        return text
    out = []
    for line in text.split("\n"):
        if line.startswith("verdict:"):
            line = f"\033[1m{line}\033[0m"
        elif line.startswith("!!"):
            line = f"\033[33m{line}\033[0m"
        out.append(line)
    return "\n".join(out)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            sys.stdout.write(_gen(args))
            return EXIT_HOLDS
        model = parse_model(_read(args.model))
        query = Query(kind={"check-cover": "cover", "check-term": "terminate"}.get(args.command, args.command))
        if hasattr(args, "max_configs"):
            query.limits = _limits(args)
            query.threads = args.threads
        elif hasattr(args, "star_bound"):
            query.limits = ExploreLimits(star_bound=args.star_bound)
        if args.command == "check-cover":
            query.target = parse_target(args.target, model)
        query.mode = getattr(args, "mode", "auto")
        query.to = getattr(args, "to", "pn")
        query.seed = getattr(args, "seed", 0)
        query.steps = getattr(args, "steps", 20)
        started = time.perf_counter()
        report = run(query, model)
        if args.timing:
            elapsed = round(time.perf_counter() - started, 3)
            report.data["timing_seconds"] = elapsed
            report.lines.append(f"time: {elapsed}s")
    except (DslError, InputError, TranslationError, PetriError, ValueError) as exc:
        if getattr(args, "json", False):
            sys.stdout.write(json.dumps({"error": str(exc)}, indent=2, sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    if args.json:
        sys.stdout.write(report.to_json())
    elif args.command == "translate":
        sys.stdout.write(report.data["output"])
    else:
        sys.stdout.write(_style(report.to_text(), sys.stdout))
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
