"""Two-sorted abstract syntax, concrete text grammar, printer and substitutions.

Formulae are built from atomic propositions with negation, disjunction and the
diamond modality; programs from atomic programs with composition, union,
intersection and tests.  Derived connectives (true/false, &, ->, <->, [.],
the loop postfix ^) are expanded into this core at parse time and may be
re-sugared by the printer.

Concrete ASCII syntax (descending binding strength):

    formulas:  ~f   <prog>f   [prog]f     then  &   |   ->   <->
    programs:  f? (test)   p^ (loop)      then  ;   &   +

`&` means conjunction in formula position and intersection in program
position; the sorts are disambiguated by position, never by the symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union as TUnion


class PdlError(Exception):
    """Base class for all library errors."""


class ParseError(PdlError):
    pass


class SortError(PdlError):
    """An identifier was used at the wrong sort under a strict vocabulary."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

class Formula:
    """Base class of formula nodes.  Instances are immutable and hashable."""

    __slots__ = ()

    def __invert__(self) -> "Formula":
        return Not(self)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)


class Program:
    """Base class of program nodes.  Instances are immutable and hashable."""

    __slots__ = ()


def _cached_hash(obj, parts) -> int:
    h = hash(parts)
    object.__setattr__(obj, "_hash", h)
    return h


@dataclass(frozen=True, eq=True)
class Prop(Formula):
    name: str

    def __hash__(self):
        return hash(("Prop", self.name))


@dataclass(frozen=True, eq=True)
class Not(Formula):
    sub: Formula

    def __hash__(self):
        return hash(("Not", self.sub))


@dataclass(frozen=True, eq=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __hash__(self):
        return hash(("Or", self.left, self.right))


@dataclass(frozen=True, eq=True)
class Diamond(Formula):
    program: "Program"
    sub: Formula

    def __hash__(self):
        return hash(("Diamond", self.program, self.sub))


@dataclass(frozen=True, eq=True)
class Atomic(Program):
    name: str

    def __hash__(self):
        return hash(("Atomic", self.name))


@dataclass(frozen=True, eq=True)
class Seq(Program):
    left: Program
    right: Program

    def __hash__(self):
        return hash(("Seq", self.left, self.right))


@dataclass(frozen=True, eq=True)
class Union(Program):
    left: Program
    right: Program

    def __hash__(self):
        return hash(("Union", self.left, self.right))


@dataclass(frozen=True, eq=True)
class Inter(Program):
    left: Program
    right: Program

    def __hash__(self):
        return hash(("Inter", self.left, self.right))


@dataclass(frozen=True, eq=True)
class Test(Program):
    formula: Formula

    __test__ = False  # keep pytest from collecting the AST class

    def __hash__(self):
        return hash(("Test", self.formula))


# ---------------------------------------------------------------------------
# Derived connectives
# ---------------------------------------------------------------------------
#
# true / false are expanded over a designated proposition name.  "true" is kept
# literally equal to Not(false) so that the box/diamond duals line up
# structurally: box(a, FALSE) == Not(Diamond(a, TRUE)).  The witness
# proposition never needs a valuation entry; evaluation treats a missing
# proposition as empty, which makes both constants vocabulary-independent.

TAUT_PROP = "tt"

_TAUT = Or(Prop(TAUT_PROP), Not(Prop(TAUT_PROP)))
FALSE: Formula = Not(_TAUT)
TRUE: Formula = Not(FALSE)

RESERVED_WORDS = frozenset({"true", "false"})


def top() -> Formula:
    return TRUE


def bot() -> Formula:
    return FALSE


def conj(a: Formula, b: Formula) -> Formula:
    return Not(Or(Not(a), Not(b)))


def disj(a: Formula, b: Formula) -> Formula:
    return Or(a, b)


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(implies(a, b), implies(b, a))


def box(alpha: Program, f: Formula) -> Formula:
    return Not(Diamond(alpha, Not(f)))


def diamond(alpha: Program, f: Formula) -> Formula:
    return Diamond(alpha, f)


def test(f: Formula) -> Program:
    return Test(f)


def loop(alpha: Program) -> Program:
    """The self-loop abbreviation: alpha restricted to the identity."""
    return Inter(alpha, Test(TRUE))


def conj_all(fs) -> Formula:
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = conj(out, f)
    return out


def disj_all(fs) -> Formula:
    fs = list(fs)
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def seq_all(ps) -> Program:
    ps = list(ps)
    if not ps:
        raise ValueError("empty sequence")
    out = ps[0]
    for p in ps[1:]:
        out = Seq(out, p)
    return out


def flatten_seq(p: Program) -> list[Program]:
    """Maximal decomposition of a composition spine, left to right."""
    if isinstance(p, Seq):
        return flatten_seq(p.left) + flatten_seq(p.right)
    return [p]


def flatten_inter(p: Program) -> list[Program]:
    if isinstance(p, Inter):
        return flatten_inter(p.left) + flatten_inter(p.right)
    return [p]


def is_loop(p: Program) -> bool:
    return isinstance(p, Inter) and p.right == Test(TRUE)


# Sugar recognisers used by the printer and by structure-sensitive code.

def match_conj(f: Formula) -> Optional[tuple[Formula, Formula]]:
    if (
        isinstance(f, Not)
        and isinstance(f.sub, Or)
        and isinstance(f.sub.left, Not)
        and isinstance(f.sub.right, Not)
    ):
        return f.sub.left.sub, f.sub.right.sub
    return None


def match_implies(f: Formula) -> Optional[tuple[Formula, Formula]]:
    if isinstance(f, Or) and isinstance(f.left, Not):
        return f.left.sub, f.right
    return None


def match_iff(f: Formula) -> Optional[tuple[Formula, Formula]]:
    c = match_conj(f)
    if c is None:
        return None
    i1 = match_implies(c[0])
    i2 = match_implies(c[1])
    if i1 and i2 and i1[0] == i2[1] and i1[1] == i2[0]:
        return i1
    return None


def match_box(f: Formula) -> Optional[tuple[Program, Formula]]:
    if isinstance(f, Not) and isinstance(f.sub, Diamond) and isinstance(f.sub.sub, Not):
        return f.sub.program, f.sub.sub.sub
    return None


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------

def _valid_ident(name: str) -> bool:
    if not name or name in RESERVED_WORDS:
        return False
    if not ("a" <= name[0] <= "z"):
        return False
    return all(c == "_" or c.isdigit() or "a" <= c <= "z" for c in name)


@dataclass(frozen=True)
class Vocabulary:
    """Disjoint finite sets of proposition and atomic-program names."""

    props: frozenset[str]
    programs: frozenset[str]

    def __post_init__(self):
        for name in self.props | self.programs:
            if not _valid_ident(name):
                raise ValueError(f"bad identifier {name!r}")
        if self.props & self.programs:
            clash = sorted(self.props & self.programs)
            raise ValueError(f"proposition/program names must be disjoint: {clash}")

    @staticmethod
    def make(props=(), programs=()) -> "Vocabulary":
        return Vocabulary(frozenset(props), frozenset(programs))

    @staticmethod
    def from_json(data: dict) -> "Vocabulary":
        return Vocabulary.make(data.get("props", []), data.get("programs", []))

    def to_json(self) -> dict:
        return {"props": sorted(self.props), "programs": sorted(self.programs)}


def symbols_of(x: TUnion[Formula, Program]) -> tuple[frozenset[str], frozenset[str]]:
    """All proposition and program names occurring in a formula or program.

    The designated tautology-witness proposition is omitted: it belongs to the
    expansion of true/false, not to any user vocabulary.
    """
    props: set[str] = set()
    progs: set[str] = set()

    def walk(n):
        if isinstance(n, Prop):
            if n.name != TAUT_PROP:
                props.add(n.name)
        elif isinstance(n, Not):
            walk(n.sub)
        elif isinstance(n, Or):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Diamond):
            walk(n.program)
            walk(n.sub)
        elif isinstance(n, Atomic):
            progs.add(n.name)
        elif isinstance(n, (Seq, Union, Inter)):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Test):
            walk(n.formula)
        else:
            raise TypeError(f"not an AST node: {n!r}")

    walk(x)
    return frozenset(props), frozenset(progs)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_PUNCT = ("<->", "<=>", "->", "=>", "~", "&", "|", "<", ">", "[", "]", "(", ")", ";", "+", "?", "^")

_UNICODE_ALIASES = {
    "¬": "~", "∧": "&", "∨": "|", "→": "->", "↔": "<->",
    "∩": "&", "∪": "+", "⊤": "true", "⊥": "false",
    "⟨": "<", "⟩": ">", "⇒": "=>", "⇔": "<=>", "⟲": "^",
}


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "kw", "punct", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    for uni, ascii_ in _UNICODE_ALIASES.items():
        text = text.replace(uni, f" {ascii_} ")
    toks: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if "a" <= c <= "z":
            j = i + 1
            while j < n and (text[j] == "_" or text[j].isdigit() or "a" <= text[j] <= "z"):
                j += 1
            word = text[i:j]
            toks.append(_Token("kw" if word in RESERVED_WORDS else "ident", word, i))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Token("punct", p, i))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r} at position {i}")
    toks.append(_Token("end", "", n))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive descent over the two-sorted grammar.

    Program primaries need one point of backtracking: a parenthesised group or
    identifier is a formula when followed by `?` and a program otherwise.
    """

    def __init__(self, toks: list[_Token], vocab: Optional[Vocabulary]):
        self.toks = toks
        self.i = 0
        self.vocab = vocab

    # -- token helpers

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("punct", "kw") and t.text == text

    def expect(self, text: str) -> None:
        if not self.at(text):
            t = self.peek()
            raise ParseError(f"expected {text!r} at position {t.pos}, found {t.text or 'end of input'!r}")
        self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(f"{msg} at position {t.pos} (found {t.text or 'end of input'!r})")

    # -- formulas (precedence: <-> weakest, then ->, |, &, unary)

    def formula(self) -> Formula:
        out = self.f_imp()
        while self.at("<->"):
            self.next()
            out = iff(out, self.f_imp())
        return out

    def f_imp(self) -> Formula:
        left = self.f_or()
        if self.at("->"):
            self.next()
            return implies(left, self.f_imp())
        return left

    def f_or(self) -> Formula:
        out = self.f_and()
        while self.at("|"):
            self.next()
            out = Or(out, self.f_and())
        return out

    def f_and(self) -> Formula:
        out = self.f_unary()
        while self.at("&"):
            self.next()
            out = conj(out, self.f_unary())
        return out

    def f_unary(self) -> Formula:
        t = self.peek()
        if self.at("~"):
            self.next()
            return Not(self.f_unary())
        if self.at("<"):
            self.next()
            prog = self.program()
            self.expect(">")
            return Diamond(prog, self.f_unary())
        if self.at("["):
            self.next()
            prog = self.program()
            self.expect("]")
            return box(prog, self.f_unary())
        if self.at("("):
            self.next()
            out = self.formula()
            self.expect(")")
            return out
        if t.kind == "kw":
            self.next()
            return TRUE if t.text == "true" else FALSE
        if t.kind == "ident":
            self.next()
            # the tautology-witness proposition is always admissible: it can
            # surface when printing terms built from the true/false constants
            if self.vocab is not None and t.text not in self.vocab.props and t.text != TAUT_PROP:
                raise SortError(f"unknown proposition {t.text!r} at position {t.pos}")
            return Prop(t.text)
        self.fail("expected a formula")

    # -- programs (precedence: + weakest, then &, ;, postfix ^)

    def program(self) -> Program:
        out = self.p_inter()
        while self.at("+"):
            self.next()
            out = Union(out, self.p_inter())
        return out

    def p_inter(self) -> Program:
        out = self.p_seq()
        while self.at("&"):
            self.next()
            out = Inter(out, self.p_seq())
        return out

    def p_seq(self) -> Program:
        out = self.p_postfix()
        while self.at(";"):
            self.next()
            out = Seq(out, self.p_postfix())
        return out

    def p_postfix(self) -> Program:
        out = self.p_primary()
        while self.at("^"):
            self.next()
            out = loop(out)
        return out

    def p_primary(self) -> Program:
        # A test is a unary-level formula followed by `?`; binary formulas
        # must be parenthesised before the `?`.
        mark = self.i
        try:
            f = self.f_unary()
            if self.at("?"):
                self.next()
                return Test(f)
        except (ParseError, SortError):
            pass
        self.i = mark

        t = self.peek()
        if t.kind == "ident":
            self.next()
            if self.vocab is not None and t.text not in self.vocab.programs:
                raise SortError(f"unknown atomic program {t.text!r} at position {t.pos}")
            return Atomic(t.text)
        if self.at("("):
            self.next()
            out = self.program()
            self.expect(")")
            return out
        self.fail("expected a program")


def parse_formula(text: str, vocab: Optional[Vocabulary] = None) -> Formula:
    """Parse the concrete syntax into the core AST.

    With a vocabulary, identifiers are checked against their sort; without
    one, identifiers in formula position become propositions and identifiers
    in program position become atomic programs.
    """
    p = _Parser(_tokenize(text), vocab)
    out = p.formula()
    if p.peek().kind != "end":
        p.fail("trailing input")
    return out


def parse_program(text: str, vocab: Optional[Vocabulary] = None) -> Program:
    p = _Parser(_tokenize(text), vocab)
    out = p.program()
    if p.peek().kind != "end":
        p.fail("trailing input")
    return out


def parse_judgement(text: str, vocab: Optional[Vocabulary] = None) -> tuple[str, Program, Program]:
    """Parse `alpha => beta` or `alpha <=> beta`; returns (kind, left, right)."""
    p = _Parser(_tokenize(text), vocab)
    left = p.program()
    if p.at("=>"):
        kind = "=>"
    elif p.at("<=>"):
        kind = "<=>"
    else:
        p.fail("expected => or <=>")
    p.next()
    right = p.program()
    if p.peek().kind != "end":
        p.fail("trailing input")
    return kind, left, right


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

# Formula precedence levels: IFF < IMP < OR < AND < unary.
_F_IFF, _F_IMP, _F_OR, _F_AND, _F_UNARY = 1, 2, 3, 4, 5
_P_UNION, _P_INTER, _P_SEQ, _P_POST = 1, 2, 3, 4


def render(f: Formula, sugar: bool = True) -> str:
    """Concrete syntax with minimal parentheses; parse(render(f)) == f.

    With sugar disabled only the core connectives (~, |, <>) are used, except
    that the true/false constants always print as literals.
    """
    return _render_f(f, 0, sugar)


def render_program(p: Program, sugar: bool = True) -> str:
    return _render_p(p, 0, sugar)


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _render_f(f: Formula, ctx: int, sugar: bool) -> str:
    if f == TRUE:
        return "true"
    if f == FALSE:
        return "false"
    if sugar:
        m = match_iff(f)
        if m:
            s = f"{_render_f(m[0], _F_IFF, sugar)} <-> {_render_f(m[1], _F_IFF + 1, sugar)}"
            return _paren(s, ctx > _F_IFF)
        m = match_implies(f)
        if m and not (
            # prefer & / <-> / [.] / literal readings of the negated left operand
            isinstance(f, Or)
            and (f.left == FALSE or match_conj(f.left) or match_iff(f.left) or match_box(f.left))
        ):
            # right associative: the consequent reuses the same level
            s = f"{_render_f(m[0], _F_IMP + 1, sugar)} -> {_render_f(m[1], _F_IMP, sugar)}"
            return _paren(s, ctx > _F_IMP)
        m = match_conj(f)
        if m:
            s = f"{_render_f(m[0], _F_AND, sugar)} & {_render_f(m[1], _F_AND + 1, sugar)}"
            return _paren(s, ctx > _F_AND)
        m = match_box(f)
        if m:
            return f"[{_render_p(m[0], 0, sugar)}]{_render_f(m[1], _F_UNARY, sugar)}"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Not):
        return f"~{_render_f(f.sub, _F_UNARY, sugar)}"
    if isinstance(f, Or):
        s = f"{_render_f(f.left, _F_OR, sugar)} | {_render_f(f.right, _F_OR + 1, sugar)}"
        return _paren(s, ctx > _F_OR)
    if isinstance(f, Diamond):
        return f"<{_render_p(f.program, 0, sugar)}>{_render_f(f.sub, _F_UNARY, sugar)}"
    raise TypeError(f"not a formula: {f!r}")


def _unary_printable(f: Formula, sugar: bool) -> bool:
    """True when f prints without a top-level binary operator."""
    if f == TRUE or f == FALSE:
        return True
    if sugar:
        if match_box(f):
            return True
        if match_iff(f) or match_implies(f) or match_conj(f):
            return False
    return isinstance(f, (Prop, Not, Diamond))


def _render_p(p: Program, ctx: int, sugar: bool) -> str:
    if sugar and is_loop(p):
        return f"{_render_p(p.left, _P_POST, sugar)}^"
    if isinstance(p, Atomic):
        return p.name
    if isinstance(p, Test):
        inner = _render_f(p.formula, 0, sugar)
        if _unary_printable(p.formula, sugar):
            return f"{inner}?"
        return f"({inner})?"
    if isinstance(p, Seq):
        s = f"{_render_p(p.left, _P_SEQ, sugar)};{_render_p(p.right, _P_SEQ + 1, sugar)}"
        return _paren(s, ctx > _P_SEQ)
    if isinstance(p, Inter):
        s = f"{_render_p(p.left, _P_INTER, sugar)} & {_render_p(p.right, _P_INTER + 1, sugar)}"
        return _paren(s, ctx > _P_INTER)
    if isinstance(p, Union):
        s = f"{_render_p(p.left, _P_UNION, sugar)} + {_render_p(p.right, _P_UNION + 1, sugar)}"
        return _paren(s, ctx > _P_UNION)
    raise TypeError(f"not a program: {p!r}")


# ---------------------------------------------------------------------------
# Substitution and polarity
# ---------------------------------------------------------------------------

class Polarity(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    def flip(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


Path = tuple[int, ...]


def usub(f: Formula, replacement: Formula, p: str) -> Formula:
    """Uniform substitution: every occurrence of the proposition is replaced,
    including occurrences inside tests inside programs."""

    def wf(n: Formula) -> Formula:
        if isinstance(n, Prop):
            return replacement if n.name == p else n
        if isinstance(n, Not):
            return Not(wf(n.sub))
        if isinstance(n, Or):
            return Or(wf(n.left), wf(n.right))
        if isinstance(n, Diamond):
            return Diamond(wp(n.program), wf(n.sub))
        raise TypeError(f"not a formula: {n!r}")

    def wp(n: Program) -> Program:
        if isinstance(n, Atomic):
            return n
        if isinstance(n, Seq):
            return Seq(wp(n.left), wp(n.right))
        if isinstance(n, Union):
            return Union(wp(n.left), wp(n.right))
        if isinstance(n, Inter):
            return Inter(wp(n.left), wp(n.right))
        if isinstance(n, Test):
            return Test(wf(n.formula))
        raise TypeError(f"not a program: {n!r}")

    return wf(f)


def usub_program(p: Program, replacement: Formula, name: str) -> Program:
    """Uniform substitution applied to a bare program (inside its tests)."""
    return usub(Diamond(p, TRUE), replacement, name).program  # type: ignore[union-attr]


def polarity_of_occurrences(f: Formula, old: Program) -> list[tuple[Path, Polarity]]:
    """All diamond occurrences of a program with their negation parity.

    Parity counts explicit negation nodes above the occurrence.  Negations
    inside test formulas do not contribute to occurrences outside the test,
    and diamonds inside tests are not reported: program substitution never
    rewrites under a test.
    """
    out: list[tuple[Path, Polarity]] = []

    def walk(n: Formula, path: Path, pol: Polarity) -> None:
        if isinstance(n, Prop):
            return
        if isinstance(n, Not):
            walk(n.sub, path + (0,), pol.flip())
        elif isinstance(n, Or):
            walk(n.left, path + (0,), pol)
            walk(n.right, path + (1,), pol)
        elif isinstance(n, Diamond):
            if n.program == old:
                out.append((path, pol))
            walk(n.sub, path + (1,), pol)
        else:
            raise TypeError(f"not a formula: {n!r}")

    walk(f, (), Polarity.POSITIVE)
    return out


def psub(f: Formula, old: Program, new: Program) -> Formula:
    """Replace positive-parity diamond occurrences of `old` by `new`.

    Program equality is structural; negative occurrences and occurrences
    inside tests are left untouched.
    """

    def walk(n: Formula, pol: Polarity) -> Formula:
        if isinstance(n, Prop):
            return n
        if isinstance(n, Not):
            return Not(walk(n.sub, pol.flip()))
        if isinstance(n, Or):
            return Or(walk(n.left, pol), walk(n.right, pol))
        if isinstance(n, Diamond):
            prog = new if (pol is Polarity.POSITIVE and n.program == old) else n.program
            return Diamond(prog, walk(n.sub, pol))
        raise TypeError(f"not a formula: {n!r}")

    return walk(f, Polarity.POSITIVE)


def subterm_at(f: TUnion[Formula, Program], path: Path) -> TUnion[Formula, Program]:
    """Child indexing: Not/Test have child 0; Or/Seq/Union/Inter have 0,1;
    Diamond has program 0 and formula 1."""
    node: TUnion[Formula, Program] = f
    for idx in path:
        if isinstance(node, Not):
            assert idx == 0
            node = node.sub
        elif isinstance(node, (Or, Seq, Union, Inter)):
            node = node.left if idx == 0 else node.right
        elif isinstance(node, Diamond):
            node = node.program if idx == 0 else node.sub
        elif isinstance(node, Test):
            assert idx == 0
            node = node.formula
        else:
            raise ValueError(f"path {path} leaves the term at {node!r}")
    return node


def replace_at(f: TUnion[Formula, Program], path: Path, new: TUnion[Formula, Program]):
    """Return a copy of the term with the subterm at `path` replaced."""
    if not path:
        return new
    idx, rest = path[0], path[1:]
    if isinstance(f, Not):
        return Not(replace_at(f.sub, rest, new))
    if isinstance(f, Or):
        return Or(replace_at(f.left, rest, new), f.right) if idx == 0 else Or(f.left, replace_at(f.right, rest, new))
    if isinstance(f, Diamond):
        if idx == 0:
            return Diamond(replace_at(f.program, rest, new), f.sub)
        return Diamond(f.program, replace_at(f.sub, rest, new))
    if isinstance(f, Seq):
        return Seq(replace_at(f.left, rest, new), f.right) if idx == 0 else Seq(f.left, replace_at(f.right, rest, new))
    if isinstance(f, Union):
        return Union(replace_at(f.left, rest, new), f.right) if idx == 0 else Union(f.left, replace_at(f.right, rest, new))
    if isinstance(f, Inter):
        return Inter(replace_at(f.left, rest, new), f.right) if idx == 0 else Inter(f.left, replace_at(f.right, rest, new))
    if isinstance(f, Test):
        return Test(replace_at(f.formula, rest, new))
    raise ValueError(f"path {path} leaves the term at {f!r}")


def iter_subterms(x: TUnion[Formula, Program], path: Path = ()) -> Iterator[tuple[Path, TUnion[Formula, Program]]]:
    """Preorder traversal of all subterms (crossing the formula/program sort)."""
    yield path, x
    if isinstance(x, (Not,)):
        yield from iter_subterms(x.sub, path + (0,))
    elif isinstance(x, (Or, Seq, Union, Inter)):
        yield from iter_subterms(x.left, path + (0,))
        yield from iter_subterms(x.right, path + (1,))
    elif isinstance(x, Diamond):
        yield from iter_subterms(x.program, path + (0,))
        yield from iter_subterms(x.sub, path + (1,))
    elif isinstance(x, Test):
        yield from iter_subterms(x.formula, path + (0,))
