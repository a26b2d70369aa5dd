"""Python interface to the streamline translator."""

import json

from . import _core
from ._core import Error, ParseError, TypeError, emit, format_program

__all__ = ["Error", "ParseError", "TypeError", "emit", "format_program", "translate", "check", "run"]


def translate(text, buffer_only=False, simplify=True, coeff_range=2, annotations=""):
    """Translate program text.

    Returns a dict with the target program text (``target``), the two-step
    form the derivation talks about (``target_twostep``), the report and the
    derivation JSON text (empty in buffer-only mode).
    """
    return json.loads(_core.translate_json(text, buffer_only, simplify, coeff_range, annotations))


def check(derivation, source="", target=""):
    """Check derivation JSON text, optionally against the source and target programs."""
    return json.loads(_core.check_json(derivation, source, target))


def run(text, inputs):
    """Run a program on an input dict ({"params": {...}, "heap": {...}, "streams": {...}})."""
    return json.loads(_core.run_json(text, json.dumps(inputs)))
