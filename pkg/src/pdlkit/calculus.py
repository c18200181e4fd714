"""Axiom catalogue and Hilbert-style proof checking.

Proof lines carry either a formula or a program judgement (`alpha => beta`
inclusion, `alpha <=> beta` equivalence).  Justifications: propositional
tautologies certified by truth tables over the line's modal atoms, instances
of the named axiom schemes, the rules MP / Gen / USub / PSub, structural
closure of the judgement layer (reflexivity, transitivity, symmetry,
equivalence splitting, congruence), the test/formula bridge TP, and the
cycle-transfer scheme C.

The structural judgement rules and the two directions of TP are not displayed
in the axiom table; they are admitted explicitly so that chained program
rewriting is expressible.  Scheme matching is structural on the expanded core
syntax; the loop abbreviation in a scheme matches exactly `… & true?`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
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
    Program,
    Prop,
    Seq,
    Test,
    Union,
    Vocabulary,
    box,
    conj,
    flatten_seq,
    iff,
    implies,
    loop,
    parse_formula,
    parse_judgement,
    parse_program,
    psub,
    render,
    render_program,
    seq_all,
    usub,
)


# ---------------------------------------------------------------------------
# Scheme metavariables and matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetaFormula(Formula):
    name: str

    def __hash__(self):
        return hash(("MetaFormula", self.name))


@dataclass(frozen=True)
class MetaProgram(Program):
    name: str

    def __hash__(self):
        return hash(("MetaProgram", self.name))


Binding = dict[str, TUnion[Formula, Program]]


def match(pattern, term, binding: Optional[Binding] = None) -> Optional[Binding]:
    """One-way structural matching; metavariables bind consistently."""
    b = dict(binding) if binding else {}

    def go(p, t) -> bool:
        if isinstance(p, MetaFormula):
            if not isinstance(t, Formula):
                return False
            if p.name in b:
                return b[p.name] == t
            b[p.name] = t
            return True
        if isinstance(p, MetaProgram):
            if not isinstance(t, Program):
                return False
            if p.name in b:
                return b[p.name] == t
            b[p.name] = t
            return True
        if type(p) is not type(t):
            return False
        if isinstance(p, (Prop, Atomic)):
            return p.name == t.name
        if isinstance(p, Not):
            return go(p.sub, t.sub)
        if isinstance(p, (Or, Seq, Union, Inter)):
            return go(p.left, t.left) and go(p.right, t.right)
        if isinstance(p, Diamond):
            return go(p.program, t.program) and go(p.sub, t.sub)
        if isinstance(p, Test):
            return go(p.formula, t.formula)
        raise TypeError(f"bad pattern node {p!r}")

    return b if go(pattern, term) else None


def instantiate(pattern, binding: Binding):
    if isinstance(pattern, MetaFormula):
        return binding[pattern.name]
    if isinstance(pattern, MetaProgram):
        return binding[pattern.name]
    if isinstance(pattern, (Prop, Atomic)):
        return pattern
    if isinstance(pattern, Not):
        return Not(instantiate(pattern.sub, binding))
    if isinstance(pattern, Or):
        return Or(instantiate(pattern.left, binding), instantiate(pattern.right, binding))
    if isinstance(pattern, Diamond):
        return Diamond(instantiate(pattern.program, binding), instantiate(pattern.sub, binding))
    if isinstance(pattern, Seq):
        return Seq(instantiate(pattern.left, binding), instantiate(pattern.right, binding))
    if isinstance(pattern, Union):
        return Union(instantiate(pattern.left, binding), instantiate(pattern.right, binding))
    if isinstance(pattern, Inter):
        return Inter(instantiate(pattern.left, binding), instantiate(pattern.right, binding))
    if isinstance(pattern, Test):
        return Test(instantiate(pattern.formula, binding))
    raise TypeError(f"bad pattern node {pattern!r}")


def metavariables(pattern) -> frozenset[str]:
    out = set()

    def go(p):
        if isinstance(p, (MetaFormula, MetaProgram)):
            out.add(p.name)
        elif isinstance(p, Not):
            go(p.sub)
        elif isinstance(p, (Or, Seq, Union, Inter)):
            go(p.left)
            go(p.right)
        elif isinstance(p, Diamond):
            go(p.program)
            go(p.sub)
        elif isinstance(p, Test):
            go(p.formula)

    go(pattern)
    return frozenset(out)


# ---------------------------------------------------------------------------
# The axiom catalogue
# ---------------------------------------------------------------------------

_P, _Q, _R = MetaFormula("p"), MetaFormula("q"), MetaFormula("r")
_A, _B, _C = MetaProgram("alpha"), MetaProgram("beta"), MetaProgram("gamma")

FORMULA_SCHEMES: dict[str, Formula] = {
    "Dl": iff(box(_A, _P), Not(Diamond(_A, Not(_P)))),
    "?": iff(Diamond(Test(_P), _Q), conj(_P, _Q)),
    "T1": iff(Diamond(Inter(_A, Test(_P)), _Q), Diamond(loop(_A), conj(_P, _Q))),
    ";": iff(box(Seq(_A, _B), _P), box(_A, box(_B, _P))),
    "D": iff(Diamond(Union(_A, _B), _P), Or(Diamond(_A, _P), Diamond(_B, _P))),
    "K": implies(box(_A, implies(_P, _Q)), implies(box(_A, _P), box(_A, _Q))),
    "C1": implies(
        conj(Diamond(loop(_A), _P), Diamond(loop(_B), _Q)),
        Diamond(loop(Seq(_A, _B)), conj(_P, _Q)),
    ),
    "C2": implies(conj(box(loop(_A), _P), box(loop(_B), _P)), box(Seq(loop(_A), loop(_B)), _P)),
    "C3": implies(conj(Diamond(loop(_A), _P), box(loop(_A), _Q)), conj(_P, _Q)),
    "V": iff(
        Diamond(Seq(Seq(_A, Test(Or(_P, _Q))), _B), _R),
        Or(Diamond(Seq(Seq(_A, Test(_P)), _B), _R), Diamond(Seq(Seq(_A, Test(_Q)), _B), _R)),
    ),
}

PROGRAM_SCHEMES: dict[str, tuple[str, Program, Program]] = {
    "Wk": ("=>", Inter(_A, _B), _A),
    "Cm": ("<=>", Inter(_A, _B), Inter(_B, _A)),
    "Ct": ("<=>", Inter(_A, _A), _A),
    "D3": ("<=>", Seq(Union(_A, _B), _C), Union(Seq(_A, _C), Seq(_B, _C))),
    "D4": ("<=>", Seq(_A, Union(_B, _C)), Union(Seq(_A, _B), Seq(_A, _C))),
    "T": ("<=>", Inter(_A, Test(_P)), Test(Diamond(loop(_A), _P))),
    "A": ("<=>", Inter(_A, Inter(_B, _C)), Inter(Inter(_A, _B), _C)),
    "T2": ("<=>", Inter(Seq(_A, Test(_P)), _B), Seq(Inter(_A, _B), Test(_P))),
    "T3": ("<=>", Inter(Seq(Test(_P), _A), _B), Seq(Test(_P), Inter(_A, _B))),
    "D1": ("<=>", Inter(_A, Union(_B, _C)), Union(Inter(_A, _B), Inter(_A, _C))),
    "D2": ("<=>", Union(_A, Inter(_B, _C)), Inter(Union(_A, _B), Union(_A, _C))),
}

FORMULA_AXIOM_ORDER = tuple(FORMULA_SCHEMES)
PROGRAM_AXIOM_ORDER = tuple(PROGRAM_SCHEMES)


@dataclass(frozen=True)
class ProgramJudgement:
    kind: str  # "=>" or "<=>"
    left: Program
    right: Program

    def __post_init__(self):
        if self.kind not in ("=>", "<=>"):
            raise ValueError(f"bad judgement kind {self.kind!r}")

    def render(self) -> str:
        return f"{render_program(self.left)} {self.kind} {render_program(self.right)}"


Statement = TUnion[Formula, ProgramJudgement]


def is_axiom_instance(f: Formula) -> Optional[tuple[str, Binding]]:
    """First formula scheme (in catalogue order) matching f."""
    for name in FORMULA_AXIOM_ORDER:
        b = match(FORMULA_SCHEMES[name], f)
        if b is not None:
            return name, b
    return None


def is_program_axiom_instance(j: ProgramJudgement) -> Optional[tuple[str, Binding]]:
    for name in PROGRAM_AXIOM_ORDER:
        kind, lhs, rhs = PROGRAM_SCHEMES[name]
        if kind != j.kind:
            continue
        b = match(lhs, j.left)
        if b is None:
            continue
        b = match(rhs, j.right, b)
        if b is not None:
            return name, b
    return None


# ---------------------------------------------------------------------------
# Rule C: transfer of a boxed-cycle test along a loop
# ---------------------------------------------------------------------------

def _compact(parts: list[Program]) -> list[Program]:
    """Drop true? unit factors from a flattened composition."""
    kept = [p for p in parts if p != Test(TRUE)]
    return kept or [Test(TRUE)]


def rule_c_patterns(beta1: Program, beta2: Program, beta3: Program, p_formula: Formula):
    """The replaced and replacement factor lists for rule C.

    The test transferred along the cycle is [( b3;b1;b2 )^]p before the move
    and [( b1;b2;b3 )^]p after it; true? factors act as units so that an
    empty cycle remainder can be written as true?.
    """
    def cyc(parts):
        return loop(seq_all(_compact(parts)))

    f1, f2, f3 = flatten_seq(beta1), flatten_seq(beta2), flatten_seq(beta3)
    old_test = Test(box(cyc(f3 + f1 + f2), p_formula))
    new_test = Test(box(cyc(f1 + f2 + f3), p_formula))
    old = _compact(f2) + [old_test] + _compact(f3)
    new = _compact(f2) + _compact(f3) + [new_test]
    return old, new


def rule_c_rewrite(host: Program, beta1: Program, beta2: Program, beta3: Program,
                   p_formula: Formula, first_only: bool = False) -> tuple[Program, int]:
    """Replace occurrences of the rule-C pattern inside a program.

    Occurrences are located in composition spines (matching modulo
    associativity); the rewrite does not descend into test formulas.
    Returns the rewritten program and the number of replacements.
    """
    old, new = rule_c_patterns(beta1, beta2, beta3, p_formula)
    count = 0

    def spine(p: Program) -> Program:
        nonlocal count
        parts = flatten_seq(p)
        out: list[Program] = []
        i = 0
        while i < len(parts):
            if parts[i:i + len(old)] == old and not (first_only and count >= 1):
                out.extend(new)
                count += 1
                i += len(old)
            else:
                out.append(descend(parts[i]))
                i += 1
        return seq_all(out)

    def descend(part: Program) -> Program:
        if isinstance(part, (Inter, Union)):
            return type(part)(spine(part.left), spine(part.right))
        return part  # atomics stay; test formulas are never rewritten

    return spine(host), count


def check_rule_c(j: ProgramJudgement, beta1: Program, beta2: Program, beta3: Program,
                 p_formula: Formula, host: Program, first_only: bool = False) -> bool:
    """j must be host^ => (host with the rule-C pattern transferred)^."""
    if j.kind != "=>":
        return False
    if j.left != loop(host):
        return False
    rewritten, count = rule_c_rewrite(host, beta1, beta2, beta3, p_formula, first_only)
    if count == 0:
        return False
    return j.right == loop(rewritten)


# ---------------------------------------------------------------------------
# Tautology certificates
# ---------------------------------------------------------------------------

MAX_TAUT_ATOMS = 16


def boolean_atoms(f: Formula) -> list[Formula]:
    """Maximal non-boolean subformulas (propositions and diamonds), in
    first-occurrence order."""
    seen: list[Formula] = []

    def go(n):
        if isinstance(n, (Prop, Diamond)):
            if n not in seen:
                seen.append(n)
        elif isinstance(n, Not):
            go(n.sub)
        elif isinstance(n, Or):
            go(n.left)
            go(n.right)
        else:
            raise TypeError(f"not a formula: {n!r}")

    go(f)
    return seen


def is_tautology(f: Formula, atoms: Optional[list[Formula]] = None) -> tuple[bool, str]:
    """Truth-table check of the boolean skeleton over the given atoms."""
    if atoms is None:
        atoms = boolean_atoms(f)
    if len(atoms) > MAX_TAUT_ATOMS:
        return False, f"too many atoms for a truth table ({len(atoms)})"
    index = {a: i for i, a in enumerate(atoms)}

    def ev(n, row) -> bool:
        if n in index:
            return bool(row >> index[n] & 1)
        if isinstance(n, Not):
            return not ev(n.sub, row)
        if isinstance(n, Or):
            return ev(n.left, row) or ev(n.right, row)
        raise KeyError(n)

    for row in range(1 << len(atoms)):
        try:
            value = ev(f, row)
        except KeyError:
            return False, "formula is not a boolean combination of the declared atoms"
        if not value:
            return False, f"falsified by truth-table row {row}"
    return True, ""


# ---------------------------------------------------------------------------
# Proof objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Taut:
    atoms: Optional[tuple[Formula, ...]] = None


@dataclass(frozen=True)
class AxiomFormula:
    name: str
    binding: Optional[Binding] = None


@dataclass(frozen=True)
class AxiomProgram:
    name: str
    binding: Optional[Binding] = None


@dataclass(frozen=True)
class MP:
    premise: int
    implication: int


@dataclass(frozen=True)
class Gen:
    premise: int
    program: Program


@dataclass(frozen=True)
class USub:
    premise: int
    prop: str
    replacement: Formula


@dataclass(frozen=True)
class PSub:
    premise: int
    judgement: int


@dataclass(frozen=True)
class Struct:
    kind: str  # Refl | Trans | SymIff | SplitIff | CongSeqL | CongSeqR | CongInterL | CongInterR | CongUnionL | CongUnionR
    refs: tuple[int, ...] = ()
    program: Optional[Program] = None


@dataclass(frozen=True)
class TP:
    premise: int


Justification = TUnion[Taut, AxiomFormula, AxiomProgram, MP, Gen, USub, PSub, Struct, TP]


@dataclass(frozen=True)
class ProofLine:
    id: int
    statement: Statement
    justification: Justification


@dataclass(frozen=True)
class ProofResult:
    ok: bool
    line_id: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class Theory:
    formulas: frozenset[Formula]


_STRUCT_CONG = {
    "CongSeqL": (Seq, 0), "CongSeqR": (Seq, 1),
    "CongInterL": (Inter, 0), "CongInterR": (Inter, 1),
    "CongUnionL": (Union, 0), "CongUnionR": (Union, 1),
}


def _check_line(line: ProofLine, env: dict[int, ProofLine]) -> Optional[str]:
    stmt, by = line.statement, line.justification

    def formula_stmt() -> Optional[Formula]:
        return stmt if isinstance(stmt, Formula) else None

    def ref(i: int) -> Optional[ProofLine]:
        other = env.get(i)
        if other is None or other.id >= line.id:
            return None
        return other

    if isinstance(by, Taut):
        f = formula_stmt()
        if f is None:
            return "tautology justification on a judgement line"
        ok, why = is_tautology(f, list(by.atoms) if by.atoms else None)
        return None if ok else f"not a tautology: {why}"

    if isinstance(by, AxiomFormula):
        f = formula_stmt()
        if f is None:
            return "formula axiom on a judgement line"
        if by.name not in FORMULA_SCHEMES:
            return f"unknown formula axiom {by.name!r}"
        b = match(FORMULA_SCHEMES[by.name], f)
        if b is None:
            return f"not an instance of axiom ({by.name})"
        if by.binding is not None and any(b.get(k) != v for k, v in by.binding.items()):
            return f"stated binding does not reproduce the line from axiom ({by.name})"
        return None

    if isinstance(by, AxiomProgram):
        if not isinstance(stmt, ProgramJudgement):
            return "program axiom on a formula line"
        if by.name == "C":
            b = by.binding or {}
            needed = {"host", "beta1", "beta2", "beta3", "p"}
            if not needed <= set(b):
                return "rule C needs a binding with host, beta1, beta2, beta3, p"
            ok = check_rule_c(stmt, b["beta1"], b["beta2"], b["beta3"], b["p"], b["host"])
            return None if ok else "rule C pattern does not rewrite the host as stated"
        if by.name not in PROGRAM_SCHEMES:
            return f"unknown program axiom {by.name!r}"
        hit = None
        kind, lhs, rhs = PROGRAM_SCHEMES[by.name]
        if kind == stmt.kind:
            b = match(lhs, stmt.left)
            if b is not None:
                hit = match(rhs, stmt.right, b)
        if hit is None:
            return f"not an instance of program axiom ({by.name})"
        if by.binding is not None and any(hit.get(k) != v for k, v in by.binding.items()):
            return f"stated binding does not reproduce the line from axiom ({by.name})"
        return None

    if isinstance(by, MP):
        f = formula_stmt()
        prem, impl = ref(by.premise), ref(by.implication)
        if f is None or prem is None or impl is None:
            return "modus ponens needs a formula line and two earlier lines"
        if not isinstance(prem.statement, Formula) or not isinstance(impl.statement, Formula):
            return "modus ponens premises must be formula lines"
        if impl.statement != implies(prem.statement, f):
            return "implication line is not premise -> conclusion"
        return None

    if isinstance(by, Gen):
        f = formula_stmt()
        prem = ref(by.premise)
        if f is None or prem is None or not isinstance(prem.statement, Formula):
            return "generalisation needs an earlier formula line"
        if f != box(by.program, prem.statement):
            return "conclusion is not the boxed premise"
        return None

    if isinstance(by, USub):
        f = formula_stmt()
        prem = ref(by.premise)
        if f is None or prem is None or not isinstance(prem.statement, Formula):
            return "substitution needs an earlier formula line"
        if f != usub(prem.statement, by.replacement, by.prop):
            return "conclusion is not the stated substitution instance"
        return None

    if isinstance(by, PSub):
        f = formula_stmt()
        prem, jline = ref(by.premise), ref(by.judgement)
        if f is None or prem is None or jline is None:
            return "program substitution needs two earlier lines"
        if not isinstance(prem.statement, Formula) or not isinstance(jline.statement, ProgramJudgement):
            return "program substitution needs a formula premise and a judgement line"
        j = jline.statement
        if j.kind != "=>":
            return "program substitution needs an inclusion judgement"
        if f != psub(prem.statement, j.left, j.right):
            return "conclusion is not the positive-occurrence rewrite of the premise"
        return None

    if isinstance(by, TP):
        prem = ref(by.premise)
        if prem is None:
            return "test bridge needs an earlier line"
        if isinstance(stmt, ProgramJudgement):
            if stmt.kind != "<=>" or not isinstance(stmt.left, Test) or not isinstance(stmt.right, Test):
                return "test bridge concludes a test equivalence"
            if not isinstance(prem.statement, Formula):
                return "test bridge premise must be a biconditional formula"
            if prem.statement != iff(stmt.left.formula, stmt.right.formula):
                return "premise is not the biconditional of the two test formulas"
            return None
        if isinstance(stmt, Formula):
            if not isinstance(prem.statement, ProgramJudgement) or prem.statement.kind != "<=>":
                return "test bridge premise must be a test equivalence"
            l, r = prem.statement.left, prem.statement.right
            if not isinstance(l, Test) or not isinstance(r, Test):
                return "test bridge premise must relate two tests"
            if stmt != iff(l.formula, r.formula):
                return "conclusion is not the biconditional of the test formulas"
            return None
        return "bad statement"

    if isinstance(by, Struct):
        if not isinstance(stmt, ProgramJudgement):
            return "structural rules conclude judgements"
        kind = by.kind
        if kind == "Refl":
            return None if stmt.left == stmt.right else "reflexivity needs equal sides"
        if kind == "Trans":
            if len(by.refs) != 2:
                return "transitivity needs two references"
            l1, l2 = ref(by.refs[0]), ref(by.refs[1])
            if not l1 or not l2:
                return "transitivity references must be earlier lines"
            j1, j2 = l1.statement, l2.statement
            if not isinstance(j1, ProgramJudgement) or not isinstance(j2, ProgramJudgement):
                return "transitivity needs judgement lines"
            if not (j1.kind == j2.kind == stmt.kind):
                return "transitivity mixes judgement kinds"
            if j1.right != j2.left or stmt.left != j1.left or stmt.right != j2.right:
                return "transitivity sides do not chain"
            return None
        if kind == "SymIff":
            l1 = ref(by.refs[0]) if by.refs else None
            if not l1 or not isinstance(l1.statement, ProgramJudgement):
                return "symmetry needs an earlier judgement line"
            j1 = l1.statement
            if j1.kind != "<=>" or stmt.kind != "<=>":
                return "symmetry applies to equivalences"
            if stmt.left != j1.right or stmt.right != j1.left:
                return "symmetry sides do not swap"
            return None
        if kind == "SplitIff":
            l1 = ref(by.refs[0]) if by.refs else None
            if not l1 or not isinstance(l1.statement, ProgramJudgement):
                return "splitting needs an earlier judgement line"
            j1 = l1.statement
            if j1.kind != "<=>" or stmt.kind != "=>":
                return "splitting turns an equivalence into an inclusion"
            if (stmt.left, stmt.right) not in ((j1.left, j1.right), (j1.right, j1.left)):
                return "split sides do not come from the equivalence"
            return None
        if kind in _STRUCT_CONG:
            ctor, pos = _STRUCT_CONG[kind]
            l1 = ref(by.refs[0]) if by.refs else None
            if not l1 or not isinstance(l1.statement, ProgramJudgement):
                return "congruence needs an earlier judgement line"
            if by.program is None:
                return "congruence needs the constant side program"
            j1 = l1.statement
            if stmt.kind != j1.kind:
                return "congruence preserves the judgement kind"
            if pos == 0:
                want_l, want_r = ctor(j1.left, by.program), ctor(j1.right, by.program)
            else:
                want_l, want_r = ctor(by.program, j1.left), ctor(by.program, j1.right)
            if (stmt.left, stmt.right) != (want_l, want_r):
                return "congruence conclusion does not match"
            return None
        return f"unknown structural rule {kind!r}"

    return f"unknown justification {by!r}"


def check_proof(lines: list[ProofLine]) -> ProofResult:
    """Line-by-line verification; stops at the first failure."""
    env: dict[int, ProofLine] = {}
    last = 0
    for line in lines:
        if line.id <= last:
            return ProofResult(False, line.id, "line ids must be strictly increasing")
        last = line.id
        reason = _check_line(line, env)
        if reason is not None:
            return ProofResult(False, line.id, reason)
        env[line.id] = line
    return ProofResult(True)


def _conjuncts(f: Formula) -> Optional[list[Formula]]:
    """Flatten a conjunction tree built from the derived conjunction."""
    from .syntax import match_conj

    m = match_conj(f)
    if m is None:
        return [f]
    left = _conjuncts(m[0]) or [m[0]]
    right = _conjuncts(m[1]) or [m[1]]
    return left + right


def theory_derives(theory: Theory, f: Formula, proof: list[ProofLine]) -> bool:
    """The proof checks and ends with (/\\ of chosen members) -> f; an empty
    selection is written true -> f (plain f is also accepted)."""
    result = check_proof(proof)
    if not result or not proof:
        return False
    final = proof[-1].statement
    if not isinstance(final, Formula):
        return False
    if final == f:
        return True
    from .syntax import match_implies

    m = match_implies(final)
    if m is None or m[1] != f:
        return False
    antecedent, _ = m
    if antecedent == TRUE:
        return True
    parts = _conjuncts(antecedent)
    return parts is not None and all(part in theory.formulas for part in parts)


# ---------------------------------------------------------------------------
# JSON representation
# ---------------------------------------------------------------------------

def _parse_binding(data: dict, vocab: Optional[Vocabulary]) -> Binding:
    out: Binding = {}
    for key, value in data.items():
        if key in ("p", "q", "r"):
            out[key] = parse_formula(value, vocab)
        elif key in ("alpha", "beta", "gamma", "host", "beta1", "beta2", "beta3"):
            out[key] = parse_program(value, vocab)
        else:
            raise PdlError(f"unknown binding key {key!r}")
    return out


def _render_binding(b: Binding) -> dict:
    out = {}
    for key, value in b.items():
        out[key] = render(value) if isinstance(value, Formula) else render_program(value)
    return out


def justification_from_json(data: dict, vocab: Optional[Vocabulary]) -> Justification:
    if data.get("taut"):
        atoms = data.get("atoms")
        return Taut(tuple(parse_formula(t, vocab) for t in atoms) if atoms else None)
    if "axiom" in data:
        b = _parse_binding(data["bind"], vocab) if "bind" in data else None
        return AxiomFormula(data["axiom"], b)
    if "paxiom" in data:
        b = _parse_binding(data["bind"], vocab) if "bind" in data else None
        return AxiomProgram(data["paxiom"], b)
    if "mp" in data:
        i, j = data["mp"]
        return MP(i, j)
    if "gen" in data:
        i, prog = data["gen"]
        return Gen(i, parse_program(prog, vocab))
    if "usub" in data:
        i, prop, repl = data["usub"]
        return USub(i, prop, parse_formula(repl, vocab))
    if "psub" in data:
        i, j = data["psub"]
        return PSub(i, j)
    if "tp" in data:
        return TP(data["tp"])
    if "struct" in data:
        refs = data.get("of", [])
        if isinstance(refs, int):
            refs = [refs]
        prog = parse_program(data["with"], vocab) if "with" in data else None
        return Struct(data["struct"], tuple(refs), prog)
    raise PdlError(f"unknown justification {data!r}")


def justification_to_json(by: Justification) -> dict:
    if isinstance(by, Taut):
        out: dict = {"taut": True}
        if by.atoms:
            out["atoms"] = [render(a) for a in by.atoms]
        return out
    if isinstance(by, AxiomFormula):
        out = {"axiom": by.name}
        if by.binding is not None:
            out["bind"] = _render_binding(by.binding)
        return out
    if isinstance(by, AxiomProgram):
        out = {"paxiom": by.name}
        if by.binding is not None:
            out["bind"] = _render_binding(by.binding)
        return out
    if isinstance(by, MP):
        return {"mp": [by.premise, by.implication]}
    if isinstance(by, Gen):
        return {"gen": [by.premise, render_program(by.program)]}
    if isinstance(by, USub):
        return {"usub": [by.premise, by.prop, render(by.replacement)]}
    if isinstance(by, PSub):
        return {"psub": [by.premise, by.judgement]}
    if isinstance(by, TP):
        return {"tp": by.premise}
    if isinstance(by, Struct):
        out = {"struct": by.kind}
        if by.refs:
            out["of"] = list(by.refs) if len(by.refs) > 1 else by.refs[0]
        if by.program is not None:
            out["with"] = render_program(by.program)
        return out
    raise PdlError(f"bad justification {by!r}")


def _parse_statement(text: str, vocab: Optional[Vocabulary]) -> Statement:
    if "<=>" in text or "=>" in text.replace("<=>", ""):
        kind, left, right = parse_judgement(text, vocab)
        return ProgramJudgement(kind, left, right)
    return parse_formula(text, vocab)


def proof_from_json(data: dict, vocab: Optional[Vocabulary] = None) -> list[ProofLine]:
    if vocab is None and "vocab" in data:
        vocab = Vocabulary.from_json(data["vocab"])
    lines = []
    for entry in data["lines"]:
        stmt = _parse_statement(entry["stmt"], vocab)
        by = justification_from_json(entry["by"], vocab)
        lines.append(ProofLine(entry["id"], stmt, by))
    return lines


def proof_to_json(lines: list[ProofLine], vocab: Optional[Vocabulary] = None) -> dict:
    out: dict = {"lines": []}
    if vocab is not None:
        out["vocab"] = vocab.to_json()
    for line in lines:
        stmt = line.statement
        text = render(stmt) if isinstance(stmt, Formula) else stmt.render()
        out["lines"].append({"id": line.id, "stmt": text, "by": justification_to_json(line.justification)})
    return out


def load_proof(text: str, vocab: Optional[Vocabulary] = None) -> list[ProofLine]:
    return proof_from_json(json.loads(text), vocab)
