"""Toolkit for iteration-free PDL with program intersection and tests.

Submodules:
    syntax         two-sorted ASTs, parser, printer, substitutions
    semantics      finite Kripke structures, evaluation, witness graphs
    normal_form    cyclic/forward program classification and normalization
    calculus       axiom catalogue and Hilbert-style proof checking
    large_programs programs whose tests carry finite sets of formulas
    model_search   bounded satisfiability / validity / soundness harness
    cli            command-line entry point
"""

from .syntax import (
    Atomic,
    Diamond,
    Formula,
    Inter,
    Not,
    Or,
    ParseError,
    Program,
    Prop,
    Seq,
    Test,
    Union,
    Vocabulary,
    parse_formula,
    parse_program,
    render,
    render_program,
)

__all__ = [
    "Atomic", "Diamond", "Formula", "Inter", "Not", "Or", "ParseError",
    "Program", "Prop", "Seq", "Test", "Union", "Vocabulary",
    "parse_formula", "parse_program", "render", "render_program",
]

__version__ = "0.1.0"
