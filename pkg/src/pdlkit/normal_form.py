"""Classification of programs into cyclic/forward classes and normalization.

The two program classes:

    forward ::= atomic | forward & forward | forward ; cyclic ; forward
    cyclic  ::= test | forward & test

Flattened along compositions, a forward program is an alternating spine
f c f c ... f beginning and ending with forward parts and carrying single
cyclic parts in between.  Membership is decided structurally, modulo
associativity of `;` (a binary tree denotes its flattened spine).

`normalize` rewrites a formula so that every program under a modality belongs
to one of the two classes and every cyclic modality is either eliminated or
reduced to the self-loop form <forward^>...; the applied steps are recorded
in a replayable trace.  Step names refer to the axiom catalogue in
`pdlkit.calculus`; composite names like ";/?" label short derived laws
justified by the named axioms.

Rewriting applies one innermost redex at a time and terminates: union lifting
strictly decreases a polynomial term measure, and every other rule strictly
reduces the count of misplaced tests (tests inside intersection spines,
cyclic parts adjacent to each other or stranded at composition boundaries,
unpadded forward-forward adjacencies).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union as TUnion

from .syntax import (
    TRUE,
    Atomic,
    Diamond,
    Formula,
    Inter,
    Not,
    Or,
    PdlError,
    Path,
    Program,
    Prop,
    Seq,
    Test,
    Union,
    conj,
    flatten_seq,
    replace_at,
    seq_all,
    subterm_at,
)


class ProgramClass(Enum):
    CYCLIC = "cyclic"
    FORWARD = "forward"
    NEITHER = "neither"


def classify(p: Program) -> ProgramClass:
    """Grammar membership for the cyclic/forward classes."""
    if isinstance(p, Atomic):
        return ProgramClass.FORWARD
    if isinstance(p, Test):
        return ProgramClass.CYCLIC
    if isinstance(p, Inter):
        if isinstance(p.right, Test) and classify(p.left) is ProgramClass.FORWARD:
            return ProgramClass.CYCLIC
        if classify(p.left) is ProgramClass.FORWARD and classify(p.right) is ProgramClass.FORWARD:
            return ProgramClass.FORWARD
        return ProgramClass.NEITHER
    if isinstance(p, Seq):
        parts = flatten_seq(p)
        if len(parts) % 2 == 0:
            return ProgramClass.NEITHER
        for i, part in enumerate(parts):
            want = ProgramClass.FORWARD if i % 2 == 0 else ProgramClass.CYCLIC
            if classify(part) is not want:
                return ProgramClass.NEITHER
        return ProgramClass.FORWARD
    if isinstance(p, Union):
        return ProgramClass.NEITHER
    raise TypeError(f"not a program: {p!r}")


def cyc_to_test(p: Program) -> Formula:
    """The test body equivalent to a cyclic program: a bare test yields its
    formula; forward & test yields <forward^>true & formula."""
    if classify(p) is not ProgramClass.CYCLIC:
        raise PdlError(f"not a cyclic program: {p!r}")
    if isinstance(p, Test):
        return p.formula
    assert isinstance(p, Inter) and isinstance(p.right, Test)
    has_loop = Diamond(Inter(p.left, Test(TRUE)), TRUE)
    return conj(has_loop, p.right.formula)


# ---------------------------------------------------------------------------
# Rewriter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RewriteStep:
    axiom: str
    path: Path
    before: TUnion[Formula, Program]
    after: TUnion[Formula, Program]


@dataclass(frozen=True)
class RewriteTrace:
    steps: tuple[RewriteStep, ...]

    def replay(self, start):
        """Re-apply the recorded steps; each must match its recorded redex."""
        cur = start
        for step in self.steps:
            found = subterm_at(cur, step.path)
            if found != step.before:
                raise PdlError(f"trace replay mismatch at {step.path}: {found!r} != {step.before!r}")
            cur = replace_at(cur, step.path, step.after)
        return cur

    def table(self) -> list[tuple[str, str]]:
        return [(s.axiom, ".".join(map(str, s.path)) or "root") for s in self.steps]


def _is_cyc_inter(p: Program) -> bool:
    return isinstance(p, Inter) and isinstance(p.right, Test)


def _spine_has_test(p: Program) -> bool:
    if isinstance(p, Inter):
        return _spine_has_test(p.left) or _spine_has_test(p.right)
    return isinstance(p, Test)


def _rule_at(node, parent_is_seq: bool):
    """One rewrite of the node, or None.  Children are assumed normal."""
    # -- intersections
    if isinstance(node, Inter):
        l, r = node.left, node.right
        if isinstance(r, Union):
            return "D1", Union(Inter(l, r.left), Inter(l, r.right))
        if isinstance(l, Union):
            return "Cm/D1", Union(Inter(l.left, r), Inter(l.right, r))
        if isinstance(l, Test) and isinstance(r, Test):
            return "T/?", Test(conj(l.formula, r.formula))
        if _is_cyc_inter(l) and isinstance(r, Test):
            return "A/T/?", Inter(l.left, Test(conj(l.right.formula, r.formula)))
        if isinstance(r, Inter) and _spine_has_test(node):
            return "A", Inter(Inter(l, r.left), r.right)
        if isinstance(l, Test) and not isinstance(r, Test):
            return "Cm", Inter(r, l)
        if _is_cyc_inter(l) and not isinstance(r, Test):
            return "Cm/A", Inter(Inter(l.left, r), l.right)
        if isinstance(l, Seq) and _boundary_misplaced(flatten_seq(l)):
            parts = flatten_seq(l)
            if isinstance(parts[-1], Test):
                return "T2", Seq(Inter(seq_all(parts[:-1]), r), parts[-1])
            if isinstance(parts[0], Test):
                return "T3", Seq(parts[0], Inter(seq_all(parts[1:]), r))
            if _is_cyc_inter(parts[-1]) and classify(parts[-1]) is ProgramClass.CYCLIC:
                conv = Test(cyc_to_test(parts[-1]))
                return "T", Inter(seq_all(parts[:-1] + [conv]), r)
            if _is_cyc_inter(parts[0]) and classify(parts[0]) is ProgramClass.CYCLIC:
                conv = Test(cyc_to_test(parts[0]))
                return "T", Inter(seq_all([conv] + parts[1:]), r)
        if isinstance(r, Seq) and _boundary_misplaced(flatten_seq(r)):
            return "Cm", Inter(r, l)
        return None
    # -- compositions (spine rules fire at the spine root only)
    if isinstance(node, Seq):
        if isinstance(node.left, Union):
            return "D3", Union(Seq(node.left.left, node.right), Seq(node.left.right, node.right))
        if isinstance(node.right, Union):
            return "D4", Union(Seq(node.left, node.right.left), Seq(node.left, node.right.right))
        if parent_is_seq:
            return None
        parts = flatten_seq(node)
        for i in range(len(parts) - 1):
            x, y = parts[i], parts[i + 1]
            cx, cy = classify(x), classify(y)
            if cx is ProgramClass.CYCLIC and cy is ProgramClass.CYCLIC:
                if _is_cyc_inter(x):
                    return "T", seq_all(parts[:i] + [Test(cyc_to_test(x))] + parts[i + 1:])
                if _is_cyc_inter(y):
                    return "T", seq_all(parts[: i + 1] + [Test(cyc_to_test(y))] + parts[i + 2:])
                merged = Test(conj(x.formula, y.formula))
                return ";/?", seq_all(parts[:i] + [merged] + parts[i + 2:])
            if cx is ProgramClass.FORWARD and cy is ProgramClass.FORWARD:
                return ";", seq_all(parts[: i + 1] + [Test(TRUE)] + parts[i + 1:])
        return None
    # -- modalities
    if isinstance(node, Diamond):
        prog, body = node.program, node.sub
        if isinstance(prog, Union):
            return "D", Or(Diamond(prog.left, body), Diamond(prog.right, body))
        if isinstance(prog, Test):
            return "?", conj(prog.formula, body)
        if _is_cyc_inter(prog) and classify(prog) is ProgramClass.CYCLIC and prog.right != Test(TRUE):
            return "T1", Diamond(Inter(prog.left, Test(TRUE)), conj(prog.right.formula, body))
        if isinstance(prog, Seq):
            parts = flatten_seq(prog)
            if isinstance(parts[0], Test):
                rest = seq_all(parts[1:])
                return ";/?", conj(parts[0].formula, Diamond(rest, body))
            if isinstance(parts[-1], Test):
                rest = seq_all(parts[:-1])
                return ";/?", Diamond(rest, conj(parts[-1].formula, body))
            if _is_cyc_inter(parts[0]) and classify(parts[0]) is ProgramClass.CYCLIC:
                conv = Test(cyc_to_test(parts[0]))
                return "T", Diamond(seq_all([conv] + parts[1:]), body)
            if _is_cyc_inter(parts[-1]) and classify(parts[-1]) is ProgramClass.CYCLIC:
                conv = Test(cyc_to_test(parts[-1]))
                return "T", Diamond(seq_all(parts[:-1] + [conv]), body)
        return None
    return None


def _boundary_misplaced(parts: list[Program]) -> bool:
    return (
        isinstance(parts[0], Test)
        or isinstance(parts[-1], Test)
        or _is_cyc_inter(parts[0])
        or _is_cyc_inter(parts[-1])
    )


def _find_redex(term, path: Path = (), parent_is_seq: bool = False):
    """Innermost-first search for the next rewrite; children before parents."""
    if isinstance(term, Not):
        hit = _find_redex(term.sub, path + (0,))
        if hit:
            return hit
    elif isinstance(term, (Or,)):
        hit = _find_redex(term.left, path + (0,)) or _find_redex(term.right, path + (1,))
        if hit:
            return hit
    elif isinstance(term, Diamond):
        hit = _find_redex(term.program, path + (0,)) or _find_redex(term.sub, path + (1,))
        if hit:
            return hit
    elif isinstance(term, (Seq, Union, Inter)):
        inside_seq = isinstance(term, Seq)
        hit = _find_redex(term.left, path + (0,), inside_seq) or _find_redex(term.right, path + (1,), inside_seq)
        if hit:
            return hit
    elif isinstance(term, Test):
        hit = _find_redex(term.formula, path + (0,))
        if hit:
            return hit
    elif isinstance(term, (Prop, Atomic)):
        return None
    rule = _rule_at(term, parent_is_seq)
    if rule:
        return path, term, rule[0], rule[1]
    return None


def _size(term) -> int:
    if isinstance(term, (Prop, Atomic)):
        return 1
    if isinstance(term, (Not, Test)):
        return 1 + _size(term.sub if isinstance(term, Not) else term.formula)
    if isinstance(term, Diamond):
        return 1 + _size(term.program) + _size(term.sub)
    return 1 + _size(term.left) + _size(term.right)


def _rewrite(term):
    steps = []
    budget = 5000 + 200 * _size(term)
    cur = term
    while True:
        hit = _find_redex(cur)
        if hit is None:
            break
        path, before, name, after = hit
        steps.append(RewriteStep(name, path, before, after))
        cur = replace_at(cur, path, after)
        if len(steps) > budget:
            raise PdlError("normalization exceeded its step budget")
    return cur, RewriteTrace(tuple(steps))


def normalize(f: Formula) -> tuple[Formula, RewriteTrace]:
    """Rewrite every modality program into the cyclic/forward classes.

    In the output, modality programs are forward programs or self-loop forms
    <forward ^>; bare-test and general cyclic modalities are eliminated.
    """
    out, trace = _rewrite(f)
    return out, trace


def normalize_program_in_context(p: Program) -> tuple[Program, RewriteTrace]:
    """Program-level normalization: unions float to the top, tests float out
    of intersections to composition boundaries, adjacent tests merge, interior
    forward pairs get true?-padding.  Boundary tests may remain; they are
    absorbed when the program sits under a modality (see `normalize`)."""
    out, trace = _rewrite(p)
    return out, trace


def modality_programs(f: Formula):
    """All programs appearing under a diamond, including inside tests."""
    out = []

    def wf(n):
        if isinstance(n, Not):
            wf(n.sub)
        elif isinstance(n, Or):
            wf(n.left)
            wf(n.right)
        elif isinstance(n, Diamond):
            out.append(n.program)
            wp(n.program)
            wf(n.sub)

    def wp(n):
        if isinstance(n, (Seq, Union, Inter)):
            wp(n.left)
            wp(n.right)
        elif isinstance(n, Test):
            wf(n.formula)

    wf(f)
    return out


def is_normal(f: Formula) -> bool:
    """Every modality program classifies, and cyclic modalities only appear
    in self-loop form."""
    for prog in modality_programs(f):
        c = classify(prog)
        if c is ProgramClass.NEITHER:
            return False
        if c is ProgramClass.CYCLIC and not (isinstance(prog, Inter) and prog.right == Test(TRUE)):
            return False
    return True
