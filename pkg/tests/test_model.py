from __future__ import annotations

from qdas import classify, load_corpus, parse_model, validate
from qdas.model import PARIKH, TERMINATION


def model(body: str, queues: str = "", header: str = "qdas", domain: str = "0, 1", vars_: str = "x") -> str:
    return f"{header} t {{ domain {{ {domain} }} vars {{ {vars_} }} {queues} {body} }}"


TRIVIAL_B = "block b { states s, f; init s; final f; s -> f : true; }"


def test_dispatch_to_main_is_rejected():
    text = model(
        "block main { states s, f; init s; final f; s -> f : dispatch_a(q, main); }",
        "cqueue q;",
    )
    diags = validate(parse_model(text, check=False))
    assert any("dispatch target is main" in d.reason for d in diags)


def test_forkjoin_on_serial_queue_is_rejected():
    text = model(
        "block main { states s, f; init s; final f; s -> f : forkjoin(q, b, 2); }" + TRIVIAL_B,
        "squeue q;",
        header="eqdas",
    )
    diags = validate(parse_model(text, check=False))
    assert any("concurrent" in d.reason for d in diags)


def test_forkjoin_outside_extended_models_is_rejected():
    text = model("block main { states s, f; init s; final f; s -> f : forkjoin(q, b, 1); }" + TRIVIAL_B, "cqueue q;")
    diags = validate(parse_model(text, check=False))
    assert any("forkjoin is only allowed" in d.reason for d in diags)


def test_corpus_models_validate():
    assert validate(load_corpus("matmul")) == []
    assert validate(load_corpus("matmul_fork")) == []


def test_undeclared_names_are_reported():
    text = model("block main { states s, f; init s; final g; s -> h : y <- 2; }")
    reasons = [d.reason for d in validate(parse_model(text, check=False))]
    assert "final state 'g' is not declared" in reasons
    assert "state 'h' is not declared" in reasons
    assert "variable 'y' is not declared" in reasons
    assert "value '2' is not in the domain" in reasons


def test_sync_concurrent_is_exptime():
    text = model("block main { states s, f; init s; final f; s -> f : dispatch_s(q, b); }" + TRIVIAL_B, "cqueue q;")
    v = classify(parse_model(text))
    assert v.tags == {"synchronous", "concurrent"}
    assert v.decidability[PARIKH].status == "decidable"
    assert v.decidability[PARIKH].label == "ExpTime-C"
    assert v.decidability[TERMINATION].label == "in ExpTime, PSpace-hard"


def test_sync_serial_is_pspace():
    text = model("block main { states s, f; init s; final f; s -> f : dispatch_s(q, b); }" + TRIVIAL_B, "squeue q;")
    v = classify(parse_model(text))
    assert v.tags == {"synchronous", "serial"}
    assert v.decidability[PARIKH].label == "PSpace-C"
    assert v.decidability[TERMINATION].label == "PSpace-C"


def test_async_serial_is_undecidable():
    text = model("block main { states s, f; init s; final f; s -> f : dispatch_a(q, b); }" + TRIVIAL_B, "squeue q;")
    v = classify(parse_model(text))
    assert v.tags == {"asynchronous", "serial"}
    assert v.decidability[PARIKH].status == "undecidable"
    assert v.decidability[TERMINATION].status == "undecidable"


def test_async_concurrent_is_expspace():
    text = model("block main { states s, f; init s; final f; s -> f : dispatch_a(q, b); }" + TRIVIAL_B, "cqueue q;")
    v = classify(parse_model(text))
    assert v.decidability[PARIKH].label == "ExpSpace-C"
    assert v.decidability[TERMINATION].label == "ExpSpace-C"


def test_queueless_is_pspace():
    text = model("block main { states s, f; init s; final f; s -> f : x <- 1; }")
    v = classify(parse_model(text))
    assert "queueless" in v.tags
    assert v.decidability[PARIKH].label == "PSpace-C"


def test_matmul_is_mixed_and_undecidable():
    v = classify(load_corpus("matmul"))
    assert v.tags == {"mixed"}
    assert v.decidability[PARIKH].status == "undecidable"


def test_extended_models_get_an_abstraction():
    v = classify(load_corpus("matmul_fork"))
    assert {"extended", "star-free"} <= v.tags
    assert v.abstractions == ("N-times",)
    text = model(
        "block main { states s, f; init s; final f; s -> f : forkjoin(q, b, *); }" + TRIVIAL_B,
        "cqueue q;",
        header="eqdas",
    )
    v = classify(parse_model(text))
    assert "star-free" not in v.tags
    assert v.abstractions == ("N-star",)
