"""Textual front end: parser and printer for the model language.

Grammar (whitespace and ``// comments`` are insignificant)::

    model   ::= ("qdas" | "eqdas") NAME "{" item* "}"
    item    ::= "domain" "{" NAME ("," NAME)* "}"
              | "vars" "{" [NAME ("," NAME)*] "}"
              | "cqueue" NAME ("," NAME)* ";"
              | "squeue" NAME ("," NAME)* ";"
              | "main" NAME ";"
              | "block" NAME "{" bitem* "}"
    bitem   ::= "states" NAME ("," NAME)* ";"
              | "init" NAME ";"
              | "final" NAME ";"
              | NAME "->" NAME ":" action ";"
    action  ::= "dispatch_a" "(" NAME "," NAME ")"
              | "dispatch_s" "(" NAME "," NAME ")"
              | "forkjoin" "(" NAME "," NAME "," (NUMBER | "*") ")"
              | "true"
              | atom ("&&" atom)*
              | NAME "<-" NAME
    atom    ::= NAME ("==" | "!=") NAME

``eqdas`` marks an extended model (``forkjoin`` allowed).  The first
domain value is the initial value of every variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    Action,
    Assign,
    Atom,
    Block,
    DataDomain,
    Diagnostic,
    DispatchA,
    DispatchS,
    ForkJoin,
    Guard,
    Qdas,
    STAR,
    Test,
    Transition,
    render_action,
    validate,
)


class DslError(Exception):
    """Raised for syntax errors or for models that fail validation."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "punct" or "eof"
    text: str
    line: int
    col: int

    @property
    def where(self) -> str:
        return f"line {self.line}, col {self.col}"


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<punct>->|<-|==|!=|&&|[{}(),;:*])
  | (?P<name>\w+)
    """,
    re.VERBOSE | re.UNICODE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise DslError([Diagnostic(f"line {line}, col {col}", f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("punct", "name"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers -----------------------------------------------------
    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def error(self, message: str, token: Token | None = None) -> DslError:
        token = token or self.current
        found = "end of input" if token.kind == "eof" else repr(token.text)
        return DslError([Diagnostic(token.where, f"{message}, found {found}")])

    def accept(self, text: str) -> Token | None:
        if self.current.text == text and self.current.kind != "eof":
            token = self.current
            self.pos += 1
            return token
        return None

    def expect(self, text: str) -> Token:
        token = self.accept(text)
        if token is None:
            raise self.error(f"expected '{text}'")
        return token

    def name(self, what: str = "a name") -> str:
        if self.current.kind != "name":
            raise self.error(f"expected {what}")
        text = self.current.text
        self.pos += 1
        return text

    def names(self, what: str) -> list[str]:
        items = [self.name(what)]
        while self.accept(","):
            items.append(self.name(what))
        return items

    # -- grammar -----------------------------------------------------------
    def model(self) -> Qdas:
        head = self.current
        if head.text not in ("qdas", "eqdas"):
            raise self.error("expected 'qdas' or 'eqdas'")
        self.pos += 1
        extended = head.text == "eqdas"
        name = self.name("a model name")
        self.expect("{")
        domain: list[str] | None = None
        variables: list[str] = []
        cqueues: list[str] = []
        squeues: list[str] = []
        main = "main"
        blocks: list[Block] = []
        while not self.accept("}"):
            tok = self.current
            if self.accept("domain"):
                if domain is not None:
                    raise self.error("duplicate domain declaration", tok)
                self.expect("{")
                domain = self.names("a domain value")
                self.expect("}")
            elif self.accept("vars"):
                self.expect("{")
                if not self.accept("}"):
                    variables.extend(self.names("a variable"))
                    self.expect("}")
            elif self.accept("cqueue"):
                cqueues.extend(self.names("a queue name"))
                self.expect(";")
            elif self.accept("squeue"):
                squeues.extend(self.names("a queue name"))
                self.expect(";")
            elif self.accept("main"):
                main = self.name("a block name")
                self.expect(";")
            elif self.accept("block"):
                blocks.append(self.block())
            else:
                raise self.error("expected 'domain', 'vars', 'cqueue', 'squeue', 'main', 'block' or '}'")
        if self.current.kind != "eof":
            raise self.error("expected end of input")
        if domain is None:
            raise DslError([Diagnostic(head.where, f"model '{name}' has no domain declaration")])
        return Qdas(
            name=name,
            domain=DataDomain(tuple(domain)),
            variables=tuple(variables),
            cqueues=tuple(cqueues),
            squeues=tuple(squeues),
            blocks=tuple(blocks),
            main=main,
            extended=extended,
        )

    def block(self) -> Block:
        start = self.current
        name = self.name("a block name")
        self.expect("{")
        states: list[str] = []
        initial: str | None = None
        final: str | None = None
        transitions: list[Transition] = []
        problems: list[Diagnostic] = []
        while not self.accept("}"):
            tok = self.current
            if self.accept("states"):
                states.extend(self.names("a state name"))
                self.expect(";")
            elif self.accept("init"):
                if initial is not None:
                    problems.append(Diagnostic(tok.where, f"block '{name}' declares init twice"))
                initial = self.name("a state name")
                self.expect(";")
            elif self.accept("final"):
                if final is not None:
                    problems.append(Diagnostic(tok.where, f"block '{name}' declares final twice"))
                final = self.name("a state name")
                self.expect(";")
            elif tok.kind == "name":
                src = self.name()
                self.expect("->")
                dst = self.name("a target state")
                self.expect(":")
                action = self.action()
                self.expect(";")
                transitions.append(Transition(src, action, dst))
            else:
                raise self.error("expected 'states', 'init', 'final', a transition or '}'")
        if initial is None:
            problems.append(Diagnostic(start.where, f"block '{name}' has no initial state"))
        if final is None:
            problems.append(Diagnostic(start.where, f"block '{name}' has no final state"))
        if problems:
            raise DslError(problems)
        return Block(name, tuple(states), initial, final, tuple(transitions))

    def action(self) -> Action:
        tok = self.current
        if tok.text in ("dispatch_a", "dispatch_s", "forkjoin") and self.peek().text == "(":
            self.pos += 2
            queue = self.name("a queue name")
            self.expect(",")
            block = self.name("a block name")
            if tok.text == "forkjoin":
                self.expect(",")
                if self.accept("*"):
                    param: int | str = STAR
                else:
                    ptok = self.current
                    raw = self.name("a positive integer or '*'")
                    if not raw.isdigit():
                        raise self.error("expected a positive integer or '*'", ptok)
                    param = int(raw)
                self.expect(")")
                return ForkJoin(queue, block, param)
            self.expect(")")
            return DispatchA(queue, block) if tok.text == "dispatch_a" else DispatchS(queue, block)
        if tok.text == "true" and self.peek().text in (";", "&&"):
            self.pos += 1
            if self.current.text == "&&":
                raise self.error("'true' cannot be combined with other atoms")
            return Test(Guard(()))
        variable = self.name("an action")
        if self.accept("<-"):
            return Assign(variable, self.name("a domain value"))
        atoms = [self.atom_rest(variable)]
        while self.accept("&&"):
            atoms.append(self.atom_rest(self.name("a variable")))
        return Test(Guard(tuple(atoms)))

    def atom_rest(self, variable: str) -> Atom:
        if self.accept("=="):
            return Atom(variable, "eq", self.name("a domain value"))
        if self.accept("!="):
            return Atom(variable, "neq", self.name("a domain value"))
        raise self.error("expected '==', '!=' or '<-'")


def parse_model(text: str, *, check: bool = True) -> Qdas:
    """Parse model text; with ``check`` the result must also pass :func:`validate`."""
    model = _Parser(text).model()
    if check:
        diagnostics = validate(model)
        if diagnostics:
            raise DslError(diagnostics)
    return model


def print_model(model: Qdas) -> str:
    """Deterministic pretty-printer; its output parses back to an equal model."""
    out = [f"{'eqdas' if model.extended else 'qdas'} {model.name} {{"]
    out.append(f"  domain {{ {', '.join(model.domain.values)} }}")
    out.append(f"  vars {{ {', '.join(model.variables)} }}" if model.variables else "  vars { }")
    for q in model.cqueues:
        out.append(f"  cqueue {q};")
    for q in model.squeues:
        out.append(f"  squeue {q};")
    if model.main != "main":
        out.append(f"  main {model.main};")
    for block in model.blocks:
        out.append(f"  block {block.name} {{")
        if block.states:
            out.append(f"    states {', '.join(block.states)};")
        out.append(f"    init {block.initial};")
        out.append(f"    final {block.final};")
        for tr in block.transitions:
            out.append(f"    {tr.src} -> {tr.dst} : {render_action(tr.action)};")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


def parse_target(text: str, model: Qdas) -> dict[str, int]:
    """Parse ``"block.state=2, other.s=1"`` into a Parikh target over qualified states."""
    target: dict[str, int] = {}
    known = set(model.all_states())
    for chunk in (part.strip() for part in text.split(",")):
        if not chunk:
            continue
        name, sep, count = chunk.partition("=")
        name, count = name.strip(), count.strip()
        if not sep or not count.isdigit():
            raise DslError([Diagnostic("target", f"malformed entry '{chunk}' (expected block.state=N)")])
        if name not in known:
            raise DslError([Diagnostic("target", f"unknown location '{name}'")])
        target[name] = target.get(name, 0) + int(count)
    return target
