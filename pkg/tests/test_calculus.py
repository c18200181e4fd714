import pytest

from pdlkit.calculus import (
    AxiomFormula, AxiomProgram, Gen, MP, ProgramJudgement, ProofLine, PSub,
    Struct, TP, Taut, Theory, USub, boolean_atoms, check_proof, check_rule_c,
    instantiate, is_axiom_instance, is_program_axiom_instance, is_tautology,
    proof_from_json, proof_to_json, rule_c_rewrite, theory_derives,
    FORMULA_SCHEMES, PROGRAM_SCHEMES, metavariables,
)
from pdlkit.fixtures import (
    CYCLIC_FORMULA, all_single_line_corruptions_fail, corrupt_line,
    refutation_proof, refutation_proof_json,
)
from pdlkit.syntax import (
    FALSE, TRUE, Atomic, Diamond, Inter, Not, Or, Prop, Seq, Test, Union,
    Vocabulary, box, conj, iff, implies, loop, parse_formula, parse_program,
    usub,
)

V = Vocabulary.make(props=["p", "q", "r"], programs=["a", "b", "c"])
p, q, r = Prop("p"), Prop("q"), Prop("r")
a, b, c = Atomic("a"), Atomic("b"), Atomic("c")


# -- axiom matching -----------------------------------------------------------

def test_t1_instance():
    f = parse_formula("<a & p?>q <-> <a^>(p & q)", V)
    name, binding = is_axiom_instance(f)
    assert name == "T1"
    assert binding == {"alpha": a, "p": p, "q": q}


def test_k_instance():
    f = parse_formula("[a](p -> q) -> [a]p -> [a]q", V)
    assert is_axiom_instance(f)[0] == "K"


def test_reflexive_diamond_is_no_axiom():
    assert is_axiom_instance(parse_formula("<a>p <-> <a>p", V)) is None


def test_dl_is_vacuous_in_the_core():
    # [a]p and ~<a>~p share one core form, so Dl instances are reflexive
    f = parse_formula("[a]p <-> ~<a>~p", V)
    assert is_axiom_instance(f)[0] == "Dl"


def test_program_axiom_instances():
    wk = ProgramJudgement("=>", Inter(a, b), a)
    assert is_program_axiom_instance(wk)[0] == "Wk"
    t = ProgramJudgement("<=>", parse_program("a & p?", V), parse_program("(<a^>p)?", V))
    assert is_program_axiom_instance(t)[0] == "T"
    # direction matters
    rev = ProgramJudgement("=>", a, Inter(a, a))
    assert is_program_axiom_instance(rev) is None


def test_usub_preserves_axiom_instances():
    f = instantiate(FORMULA_SCHEMES["?"], {"p": p, "q": Diamond(a, q)})
    assert is_axiom_instance(f)[0] == "?"
    g = usub(f, conj(q, r), "p")
    assert is_axiom_instance(g)[0] == "?"


def test_every_scheme_self_instantiates():
    fresh = {"p": p, "q": q, "r": r, "alpha": a, "beta": b, "gamma": c}
    for name, pattern in FORMULA_SCHEMES.items():
        inst = instantiate(pattern, fresh)
        got = is_axiom_instance(inst)
        assert got is not None, name
    for name, (kind, lhs, rhs) in PROGRAM_SCHEMES.items():
        j = ProgramJudgement(kind, instantiate(lhs, fresh), instantiate(rhs, fresh))
        got = is_program_axiom_instance(j)
        assert got is not None, name


# -- tautologies ---------------------------------------------------------------

def test_tautology_with_modal_atoms():
    f = implies(Diamond(a, p), Diamond(a, p))
    ok, _ = is_tautology(f)
    assert ok
    assert boolean_atoms(f) == [Diamond(a, p)]


def test_non_tautology():
    ok, why = is_tautology(Or(p, q))
    assert not ok and "row" in why


def test_true_constant_is_tautology():
    assert is_tautology(TRUE)[0]
    assert not is_tautology(FALSE)[0]


# -- rule C ---------------------------------------------------------------------

def test_rule_c_worked_instance():
    psi = parse_formula("[(b;a)^]false", V)
    psi2 = parse_formula("[(a;b)^]false", V)
    host = Seq(Seq(a, Test(psi)), b)
    j = ProgramJudgement("=>", loop(host), loop(Seq(Seq(a, b), Test(psi2))))
    assert check_rule_c(j, Test(TRUE), a, b, FALSE, host)


def test_rule_c_requires_occurrence():
    j = ProgramJudgement("=>", loop(a), loop(a))
    assert not check_rule_c(j, Test(TRUE), a, b, FALSE, a)


def test_rule_c_replaces_all_occurrences():
    psi = parse_formula("[(b;a)^]p", V)
    pattern = [a, Test(psi), b]
    host = Seq(Inter(parse_program("a;([(b;a)^]p)?;b", V), c),
               parse_program("a;([(b;a)^]p)?;b", V))
    rewritten, count = rule_c_rewrite(host, Test(TRUE), a, b, p)
    assert count == 2
    # brute-force: rewriting once in each branch gives the same result
    once_each, n2 = rule_c_rewrite(host, Test(TRUE), a, b, p, first_only=True)
    assert n2 == 1
    again, n3 = rule_c_rewrite(once_each, Test(TRUE), a, b, p, first_only=True)
    assert n3 == 1 and again == rewritten


def test_rule_c_single_occurrence_flag():
    psi = parse_formula("[(b;a)^]p", V)
    host = Seq(parse_program("a;([(b;a)^]p)?;b", V),
               parse_program("a;([(b;a)^]p)?;b", V))
    _, count_all = rule_c_rewrite(host, Test(TRUE), a, b, p)
    _, count_one = rule_c_rewrite(host, Test(TRUE), a, b, p, first_only=True)
    assert count_all == 2 and count_one == 1


# -- proof checking -------------------------------------------------------------

def test_three_line_proof():
    ax = instantiate(FORMULA_SCHEMES["?"], {"p": p, "q": q})
    lines = [
        ProofLine(1, ax, AxiomFormula("?")),
        ProofLine(2, implies(ax, implies(Diamond(Test(p), q), p)), Taut()),
        ProofLine(3, implies(Diamond(Test(p), q), p), MP(1, 2)),
    ]
    assert check_proof(lines).ok


def test_gen_and_usub_lines():
    lines = [
        ProofLine(1, TRUE, Taut()),
        ProofLine(2, box(a, TRUE), Gen(1, a)),
        ProofLine(3, implies(p, p), Taut()),
        ProofLine(4, implies(Diamond(b, q), Diamond(b, q)), USub(3, "p", Diamond(b, q))),
    ]
    assert check_proof(lines).ok


def test_psub_respects_polarity():
    prem = implies(Diamond(Inter(a, b), p), Diamond(Inter(a, b), p))
    lines = [
        ProofLine(1, prem, Taut()),
        ProofLine(2, ProgramJudgement("=>", Inter(a, b), a), AxiomProgram("Wk")),
        ProofLine(3, implies(Diamond(Inter(a, b), p), Diamond(a, p)), PSub(1, 2)),
    ]
    assert check_proof(lines).ok
    bad = [
        lines[0], lines[1],
        ProofLine(3, implies(Diamond(a, p), Diamond(a, p)), PSub(1, 2)),
    ]
    out = check_proof(bad)
    assert not out.ok and out.line_id == 3


def test_struct_rules():
    lines = [
        ProofLine(1, ProgramJudgement("<=>", Inter(a, b), Inter(b, a)), AxiomProgram("Cm")),
        ProofLine(2, ProgramJudgement("=>", Inter(a, b), Inter(b, a)), Struct("SplitIff", (1,))),
        ProofLine(3, ProgramJudgement("<=>", Inter(b, a), Inter(a, b)), Struct("SymIff", (1,))),
        ProofLine(4, ProgramJudgement("=>", Inter(b, a), b), AxiomProgram("Wk")),
        ProofLine(5, ProgramJudgement("=>", Inter(a, b), b), Struct("Trans", (2, 4))),
        ProofLine(6, ProgramJudgement("=>", Seq(Inter(a, b), c), Seq(Inter(b, a), c)),
                  Struct("CongSeqL", (2,), c)),
        ProofLine(7, ProgramJudgement("=>", a, a), Struct("Refl")),
    ]
    assert check_proof(lines).ok


def test_tp_bridge_both_directions():
    bic = iff(p, Or(p, p))
    lines = [
        ProofLine(1, bic, Taut()),
        ProofLine(2, ProgramJudgement("<=>", Test(p), Test(Or(p, p))), TP(1)),
        ProofLine(3, bic, TP(2)),
    ]
    assert check_proof(lines).ok


def test_forward_references_rejected():
    lines = [
        ProofLine(1, implies(p, p), MP(2, 3)),
        ProofLine(2, TRUE, Taut()),
    ]
    assert not check_proof(lines).ok


def test_axiom_with_wrong_binding_rejected():
    ax = instantiate(FORMULA_SCHEMES["?"], {"p": p, "q": q})
    good = ProofLine(1, ax, AxiomFormula("?", {"p": p, "q": q}))
    bad = ProofLine(1, ax, AxiomFormula("?", {"p": q, "q": p}))
    assert check_proof([good]).ok
    assert not check_proof([bad]).ok


# -- theory derivation ------------------------------------------------------------

def test_theory_derives_member():
    proof = [ProofLine(1, implies(p, p), Taut())]
    assert theory_derives(Theory(frozenset({p})), p, proof)


def test_theory_derives_modus_ponens_packaged():
    t = Theory(frozenset({p, implies(p, q)}))
    final = implies(conj(p, implies(p, q)), q)
    proof = [ProofLine(1, final, Taut())]
    assert theory_derives(t, q, proof)


def test_empty_theory_uses_true_antecedent():
    inst = instantiate(FORMULA_SCHEMES["Dl"], {"alpha": a, "p": p})
    proof = [
        ProofLine(1, inst, AxiomFormula("Dl")),
        ProofLine(2, implies(inst, implies(TRUE, inst)), Taut()),
        ProofLine(3, implies(TRUE, inst), MP(1, 2)),
    ]
    assert theory_derives(Theory(frozenset()), inst, proof)


def test_theory_rejects_foreign_antecedent():
    proof = [ProofLine(1, implies(q, q), Taut())]
    assert not theory_derives(Theory(frozenset({p})), q, proof)


# -- the shipped refutation --------------------------------------------------------

def test_refutation_checks():
    proof = refutation_proof()
    assert check_proof(proof).ok
    assert proof[-1].statement == implies(CYCLIC_FORMULA, FALSE)


def test_refutation_derives_inconsistency():
    assert theory_derives(Theory(frozenset({CYCLIC_FORMULA})), FALSE, refutation_proof())


def test_refutation_corruptions_all_fail():
    assert all_single_line_corruptions_fail(refutation_proof())


def test_refutation_json_roundtrip():
    data = refutation_proof_json()
    proof = proof_from_json(data)
    assert check_proof(proof).ok
    assert proof_to_json(proof, None)["lines"] == proof_to_json(refutation_proof(), None)["lines"]


def test_spec_style_json_example():
    data = {
        "lines": [
            {"id": 1, "stmt": "<p?>q <-> p & q", "by": {"axiom": "?"}},
            {"id": 2, "stmt": "a & b => a", "by": {"paxiom": "Wk"}},
        ]
    }
    assert check_proof(proof_from_json(data)).ok
