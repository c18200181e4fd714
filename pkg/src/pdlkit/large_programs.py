"""Programs whose tests carry finite sets of formulas.

A large program is built from atomic programs with intersection and
composition-through-a-test-set (`left ; {f1,..,fk}? ; right`); an ordinary
program instantiates it by picking one formula per test set.  The module
provides the instance relation and its enumeration, the pointwise ordering,
the left/right theory labels of subprogram occurrences, the left/right
context programs of test occurrences inside a loop, the membership-based
consistency checks for labelled transitions and loops, and the saturation gap
(what a maximally consistent completion would still have to add to each test
set; computing such completions is out of scope).

lp/rp results need pure test factors (`true?` and `Φ?` appear as units in
their defining clauses), which the three-constructor grammar cannot express;
the extra `TestSet` variant covers exactly that use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Union as TUnion

from .syntax import (
    TRUE,
    Atomic as AtomicP,
    Diamond,
    Formula,
    Inter as InterP,
    Not,
    Program,
    Seq,
    Test,
    Vocabulary,
    box,
    flatten_seq,
    is_loop,
    parse_formula,
    render,
    seq_all,
)


class ShapeError(ValueError):
    pass


class LargeProgram:
    __slots__ = ()


@dataclass(frozen=True)
class LAtomic(LargeProgram):
    name: str

    def __hash__(self):
        return hash(("LAtomic", self.name))


@dataclass(frozen=True)
class LInter(LargeProgram):
    left: "LargeProgram"
    right: "LargeProgram"

    def __hash__(self):
        return hash(("LInter", self.left, self.right))


@dataclass(frozen=True)
class LSeqTest(LargeProgram):
    left: "LargeProgram"
    tests: frozenset[Formula]
    right: "LargeProgram"

    def __post_init__(self):
        if not self.tests:
            raise ShapeError("test sets must be nonempty")

    def __hash__(self):
        return hash(("LSeqTest", self.left, self.tests, self.right))


@dataclass(frozen=True)
class LTestSet(LargeProgram):
    """A bare set-test factor; appears only in lp/rp context programs."""

    tests: frozenset[Formula]

    def __post_init__(self):
        if not self.tests:
            raise ShapeError("test sets must be nonempty")

    def __hash__(self):
        return hash(("LTestSet", self.tests))


@dataclass(frozen=True)
class LargeLoop:
    body: LargeProgram


@dataclass(frozen=True)
class LabelledTransition:
    left: frozenset[Formula]
    program: LargeProgram
    right: frozenset[Formula]


Path = tuple
TEST_SLOT = "tests"


# ---------------------------------------------------------------------------
# Lifting ordinary programs
# ---------------------------------------------------------------------------

def lift(p: Program) -> LargeProgram:
    """Replace every test f? with the singleton set test {f}?.

    The program must be in the interior-test shape: atomics, intersections,
    and compositions flattening to alternating forward/test spines (use
    true?-padding first where needed)."""
    if isinstance(p, AtomicP):
        return LAtomic(p.name)
    if isinstance(p, InterP):
        return LInter(lift(p.left), lift(p.right))
    if isinstance(p, Seq):
        parts = flatten_seq(p)
        tests = [i for i, part in enumerate(parts) if isinstance(part, Test)]
        if not tests:
            raise ShapeError("composition without an interior test; pad with true?")
        i = tests[0]
        if i == 0 or i == len(parts) - 1:
            raise ShapeError("tests must sit strictly inside a composition")
        return LSeqTest(
            lift(seq_all(parts[:i])),
            frozenset({parts[i].formula}),
            lift(seq_all(parts[i + 1:])),
        )
    if isinstance(p, Test):
        raise ShapeError("a bare test is not a large program")
    raise ShapeError(f"cannot lift {p!r} (unions are outside the large grammar)")


# ---------------------------------------------------------------------------
# Instances and ordering
# ---------------------------------------------------------------------------

def is_instance(p: Program, l: LargeProgram) -> bool:
    """Structural recursion: atomics match by name, intersections
    componentwise, and a set-test composition matches any split of the
    composition spine at a test drawn from the set."""
    if isinstance(l, LAtomic):
        return isinstance(p, AtomicP) and p.name == l.name
    if isinstance(l, LInter):
        return isinstance(p, InterP) and is_instance(p.left, l.left) and is_instance(p.right, l.right)
    if isinstance(l, LTestSet):
        return isinstance(p, Test) and p.formula in l.tests
    if isinstance(l, LSeqTest):
        if not isinstance(p, Seq):
            return False
        parts = flatten_seq(p)
        for i, part in enumerate(parts):
            if 0 < i < len(parts) - 1 and isinstance(part, Test) and part.formula in l.tests:
                left = seq_all(parts[:i])
                right = seq_all(parts[i + 1:])
                if is_instance(left, l.left) and is_instance(right, l.right):
                    return True
        return False
    raise TypeError(f"not a large program: {l!r}")


def loop_is_instance(p: Program, l: LargeLoop) -> bool:
    return is_loop(p) and is_instance(p.left, l.body)


def enumerate_instances(l: LargeProgram) -> list[Program]:
    """All instances; the count is the product of the test-set sizes."""
    if isinstance(l, LAtomic):
        return [AtomicP(l.name)]
    if isinstance(l, LInter):
        return [InterP(x, y) for x, y in product(enumerate_instances(l.left), enumerate_instances(l.right))]
    if isinstance(l, LTestSet):
        return [Test(f) for f in sorted(l.tests, key=render)]
    if isinstance(l, LSeqTest):
        out = []
        for x, f, y in product(
            enumerate_instances(l.left), sorted(l.tests, key=render), enumerate_instances(l.right)
        ):
            out.append(seq_all(flatten_seq(x) + [Test(f)] + flatten_seq(y)))
        return out
    raise TypeError(f"not a large program: {l!r}")


def leq(l1: LargeProgram, l2: LargeProgram) -> bool:
    """Pointwise ordering: identical shape with each test set included in its
    counterpart.  Agrees with instance-set inclusion on finite test sets."""
    if isinstance(l1, LAtomic) and isinstance(l2, LAtomic):
        return l1.name == l2.name
    if isinstance(l1, LInter) and isinstance(l2, LInter):
        return leq(l1.left, l2.left) and leq(l1.right, l2.right)
    if isinstance(l1, LTestSet) and isinstance(l2, LTestSet):
        return l1.tests <= l2.tests
    if isinstance(l1, LSeqTest) and isinstance(l2, LSeqTest):
        return l1.tests <= l2.tests and leq(l1.left, l2.left) and leq(l1.right, l2.right)
    return False


# ---------------------------------------------------------------------------
# Occurrence labelling
# ---------------------------------------------------------------------------

def subprogram_occurrences(l: LargeProgram, path: Path = ()) -> list[tuple[Path, LargeProgram]]:
    out = [(path, l)]
    if isinstance(l, LInter):
        out += subprogram_occurrences(l.left, path + (0,))
        out += subprogram_occurrences(l.right, path + (1,))
    elif isinstance(l, LSeqTest):
        out += subprogram_occurrences(l.left, path + (0,))
        out += subprogram_occurrences(l.right, path + (1,))
    return out


def left_right_sets(t: LabelledTransition) -> dict[Path, tuple[frozenset[Formula], frozenset[Formula]]]:
    """Top-down theory labels: the root gets the transition's end sets, an
    intersection copies both down, and a set-test composition hands its test
    set to the inner boundary of each factor."""
    out: dict[Path, tuple[frozenset, frozenset]] = {}

    def walk(l: LargeProgram, path: Path, lset, rset):
        out[path] = (lset, rset)
        if isinstance(l, LInter):
            walk(l.left, path + (0,), lset, rset)
            walk(l.right, path + (1,), lset, rset)
        elif isinstance(l, LSeqTest):
            walk(l.left, path + (0,), lset, l.tests)
            walk(l.right, path + (1,), l.tests, rset)

    walk(t.program, (), t.left, t.right)
    return out


def occurrences_of_tests(l: LargeProgram, path: Path = ()) -> list[tuple[Path, frozenset[Formula]]]:
    out = []
    if isinstance(l, LInter):
        out += occurrences_of_tests(l.left, path + (0,))
        out += occurrences_of_tests(l.right, path + (1,))
    elif isinstance(l, LSeqTest):
        out.append((path + (TEST_SLOT,), l.tests))
        out += occurrences_of_tests(l.left, path + (0,))
        out += occurrences_of_tests(l.right, path + (1,))
    return out


def loop_left_right_programs(l: LargeLoop, phi: frozenset[Formula]) -> dict[Path, tuple[LargeProgram, LargeProgram]]:
    """Context programs of each test occurrence in a loop body.

    At the top level both contexts are true?; descending into
    left ; X? ; right, the occurrence of X gets
    lp(X) = lp(l) ; l? ; left and rp(X) = right ; r? ; rp(r), where l/r are
    the enclosing boundary sets and lp/rp their context programs."""
    out: dict[Path, tuple[LargeProgram, LargeProgram]] = {}
    unit = LTestSet(frozenset({TRUE}))

    def walk(node: LargeProgram, path: Path, lset, rset, lp_ctx, rp_ctx):
        if isinstance(node, LInter):
            walk(node.left, path + (0,), lset, rset, lp_ctx, rp_ctx)
            walk(node.right, path + (1,), lset, rset, lp_ctx, rp_ctx)
        elif isinstance(node, LSeqTest):
            lp_here = LSeqTest(lp_ctx, lset, node.left)
            rp_here = LSeqTest(node.right, rset, rp_ctx)
            out[path + (TEST_SLOT,)] = (lp_here, rp_here)
            walk(node.left, path + (0,), lset, node.tests, lp_ctx, rp_here)
            walk(node.right, path + (1,), node.tests, rset, lp_here, rp_ctx)

    walk(l.body, (), phi, phi, unit, unit)
    return out


# ---------------------------------------------------------------------------
# Consistency checks
# ---------------------------------------------------------------------------

def forbidden_box(instance: Program, psi: Formula) -> Formula:
    """[instance]~psi, the membership whose presence breaks consistency."""
    return box(instance, Not(psi))


def is_consistent_transition(t: LabelledTransition) -> bool:
    """No occurrence admits an instance whose box of a negated right-label
    already sits in its left label set."""
    labels = left_right_sets(t)
    for path, (lset, rset) in labels.items():
        sub = _at(t.program, path)
        if not rset or not lset:
            continue
        for inst in enumerate_instances(sub):
            for psi in rset:
                if forbidden_box(inst, psi) in lset:
                    return False
    return True


def _at(l: LargeProgram, path: Path) -> LargeProgram:
    node = l
    for step in path:
        node = node.left if step == 0 else node.right
    return node


def _loop_pattern_hits(member: Formula, lp: LargeProgram, rp: LargeProgram,
                       phi: frozenset[Formula]) -> bool:
    """member == [(b1 ; f? ; b2)^]false with b1 an instance of rp, b2 an
    instance of lp and f in phi (composition split modulo associativity)."""
    if not isinstance(member, Not):
        return False
    inner = member.sub
    if not isinstance(inner, Diamond) or inner.sub != TRUE:
        return False
    prog = inner.program
    if not is_loop(prog):
        return False
    parts = flatten_seq(prog.left)
    for i, part in enumerate(parts):
        if 0 < i < len(parts) - 1 and isinstance(part, Test) and part.formula in phi:
            b1 = seq_all(parts[:i])
            b2 = seq_all(parts[i + 1:])
            if is_instance(b1, rp) and is_instance(b2, lp):
                return True
    return False


def is_consistent_loop(l: LargeLoop, phi: frozenset[Formula]) -> bool:
    """Transition consistency at left = right = phi, plus: no test set
    contains a boxed-falsum loop built from its own context programs."""
    if not is_consistent_transition(LabelledTransition(phi, l.body, phi)):
        return False
    if not phi:
        return True  # the loop clause quantifies over members of phi
    contexts = loop_left_right_programs(l, phi)
    for path, tests in occurrences_of_tests(l.body):
        lp, rp = contexts[path]
        for member in tests:
            if _loop_pattern_hits(member, lp, rp, phi):
                return False
    return True


def saturation_gap(t: LabelledTransition) -> dict[Path, frozenset[Formula]]:
    """Formulas each test set still needs before it could be called
    saturated: boxed left-label consequences of the left factor's instances
    and diamond promises of the right factor's instances."""
    labels = left_right_sets(t)
    out: dict[Path, frozenset[Formula]] = {}

    def walk(node: LargeProgram, path: Path):
        if isinstance(node, LInter):
            walk(node.left, path + (0,))
            walk(node.right, path + (1,))
        elif isinstance(node, LSeqTest):
            lset, rset = labels[path]
            demanded: set[Formula] = set()
            left_instances = enumerate_instances(node.left)
            for member in lset:
                for inst in left_instances:
                    m = _match_box(member, inst)
                    if m is not None:
                        demanded.add(m)
            for inst in enumerate_instances(node.right):
                for psi in rset:
                    demanded.add(Diamond(inst, psi))
            out[path + (TEST_SLOT,)] = frozenset(demanded - node.tests)
            walk(node.left, path + (0,))
            walk(node.right, path + (1,))

    walk(t.program, ())
    return out


def _match_box(member: Formula, program: Program) -> Optional[Formula]:
    """If member == [program]f, return f."""
    if isinstance(member, Not) and isinstance(member.sub, Diamond) and isinstance(member.sub.sub, Not):
        if member.sub.program == program:
            return member.sub.sub.sub
    return None


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def large_from_json(data, vocab: Optional[Vocabulary] = None) -> LargeProgram:
    kind = data["kind"]
    if kind == "atomic":
        return LAtomic(data["name"])
    if kind == "inter":
        return LInter(large_from_json(data["left"], vocab), large_from_json(data["right"], vocab))
    if kind == "seqtest":
        return LSeqTest(
            large_from_json(data["left"], vocab),
            frozenset(parse_formula(t, vocab) for t in data["tests"]),
            large_from_json(data["right"], vocab),
        )
    if kind == "testset":
        return LTestSet(frozenset(parse_formula(t, vocab) for t in data["tests"]))
    raise ShapeError(f"unknown large-program kind {kind!r}")


def large_to_json(l: LargeProgram) -> dict:
    if isinstance(l, LAtomic):
        return {"kind": "atomic", "name": l.name}
    if isinstance(l, LInter):
        return {"kind": "inter", "left": large_to_json(l.left), "right": large_to_json(l.right)}
    if isinstance(l, LSeqTest):
        return {
            "kind": "seqtest",
            "left": large_to_json(l.left),
            "tests": sorted(render(t) for t in l.tests),
            "right": large_to_json(l.right),
        }
    if isinstance(l, LTestSet):
        return {"kind": "testset", "tests": sorted(render(t) for t in l.tests)}
    raise TypeError(f"not a large program: {l!r}")


def transition_from_json(data, vocab: Optional[Vocabulary] = None) -> LabelledTransition:
    return LabelledTransition(
        frozenset(parse_formula(t, vocab) for t in data.get("left", [])),
        large_from_json(data["program"], vocab),
        frozenset(parse_formula(t, vocab) for t in data.get("right", [])),
    )
