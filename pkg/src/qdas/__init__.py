"""Verification toolkit for queue-dispatch asynchronous systems (QDAS).

The package executes the call-task-graph semantics of QDAS models,
classifies models into their decidability fragments, and decides Parikh
coverability and termination where possible (pushdown saturation for
synchronous models, Petri-net algorithms for asynchronous concurrent and
fork/join models).  Everything else falls back to bounded search.
"""

from importlib.resources import files

from .model import Qdas, classify, validate
from .dsl import parse_model, print_model

__all__ = ["Qdas", "classify", "validate", "parse_model", "print_model", "load_corpus"]


def load_corpus(name: str) -> Qdas:
    """Parse a bundled corpus model (``matmul`` or ``matmul_fork``)."""
    return parse_model(files(__name__).joinpath("corpus", f"{name}.qdas").read_text(encoding="utf-8"))
__version__ = "0.1.0"
