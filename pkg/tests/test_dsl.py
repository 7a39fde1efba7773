from __future__ import annotations

import random

import pytest

from qdas import load_corpus
from qdas.dsl import DslError, parse_model, parse_target, print_model
from qdas.model import Assign, Atom, DispatchS, ForkJoin, Guard
from qdas import model as qm
from qdas.randgen import random_model


SAMPLE = """
// comment
qdas sample {
  domain { 0, 1 }
  vars { x, y }
  cqueue c;
  squeue s;
  block main {
    states a, b, c, f;
    init a;
    final f;
    a -> b : x == 1 && y != 0;
    b -> c : y <- 1;
    c -> f : dispatch_s(s, w);
  }
  block w { states p, q; init p; final q; p -> q : true; }
}
"""


def test_parse_actions():
    m = parse_model(SAMPLE)
    main = m.block("main")
    assert main.transitions[0].action == qm.Test(Guard((Atom("x", "eq", "1"), Atom("y", "neq", "0"))))
    assert main.transitions[1].action == Assign("y", "1")
    assert main.transitions[2].action == DispatchS("s", "w")
    assert m.cqueues == ("c",) and m.squeues == ("s",)
    assert m.block("w").transitions[0].action == qm.Test(Guard(()))


def test_parse_is_newline_insensitive():
    assert parse_model(" ".join(SAMPLE.replace("// comment", "").split())) == parse_model(SAMPLE)


def test_round_trip_sample_and_corpus():
    for m in (parse_model(SAMPLE), load_corpus("matmul"), load_corpus("matmul_fork")):
        assert parse_model(print_model(m)) == m


def test_forkjoin_syntax():
    m = load_corpus("matmul_fork")
    assert m.extended
    assert m.block("main").transitions[0].action == ForkJoin("workqueue", "one_cell", 2)


def test_missing_final_state_names_block():
    text = "qdas t { domain {0} vars {} block main { states s; init s; s -> s : true; } }"
    with pytest.raises(DslError) as exc:
        parse_model(text)
    assert "main" in str(exc.value)
    assert exc.value.diagnostics[0].location.startswith("line 1")


def test_syntax_errors_are_positioned():
    text = "qdas t {\n domain {0}\n vars {x}\n block main { states s; init s; final s; s -> s : x = 1; } }"
    with pytest.raises(DslError) as exc:
        parse_model(text)
    assert exc.value.diagnostics[0].location.startswith("line 4")


def test_validation_errors_surface_as_diagnostics():
    text = "qdas t { domain {0} vars {} block main { states s, f; init s; final f; s -> f : dispatch_a(q, main); } }"
    with pytest.raises(DslError) as exc:
        parse_model(text)
    reasons = [d.reason for d in exc.value.diagnostics]
    assert "queue 'q' is not declared" in reasons
    assert "dispatch target is main" in reasons


def test_targets():
    m = load_corpus("matmul")
    assert parse_target("increase.crit=2", m) == {"increase.crit": 2}
    assert parse_target("increase.crit=1, main.fin=1", m) == {"increase.crit": 1, "main.fin": 1}
    assert parse_target("", m) == {}
    with pytest.raises(DslError):
        parse_target("increase.nowhere=1", m)
    with pytest.raises(DslError):
        parse_target("increase.crit", m)


def test_random_models_round_trip():
    rng = random.Random(7)
    for _ in range(50):
        m = random_model(rng)
        assert parse_model(print_model(m)) == m
