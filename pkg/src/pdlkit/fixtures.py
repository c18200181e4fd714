"""Executable fixtures: the split set, its empty-vocabulary variant, and the
cyclic-test formula with its shipped refutation proof.

The split core `<a>true & <b>true & [a&b]false` demands an a-successor and a
b-successor that no single a∩b-edge reaches.  On its own it already has a
2-world model (u -a-> v with a b-self-loop at u); forcing the two successors
to be genuinely disjoint copies needs the rest of the split set, here pinned
by the no-successor theory.  The pinned variant uses no propositions at all,
so it doubles as the executable core of the empty-vocabulary argument: with
no propositions available the two successor copies cannot be distinguished by
any formula, yet every model must keep them apart.

The cyclic-test formula `<(a ; [(b;a)^]false ? ; b)^>true` is unsatisfiable:
its intermediate state lies on a (b;a)-cycle that its own test forbids.  The
shipped proof derives the negation inside the calculus: the cycle-transfer
scheme moves the test along the loop, a test float (T2) plus the composition
split isolate the transferred test, and the loop axioms force it back at the
starting state, where it denies the loop it rides on.
"""

from __future__ import annotations

from .calculus import (
    FORMULA_SCHEMES,
    AxiomFormula,
    AxiomProgram,
    Gen,
    MP,
    ProgramJudgement,
    ProofLine,
    PSub,
    Struct,
    Taut,
    check_proof,
    instantiate,
    proof_to_json,
    rule_c_rewrite,
)
from .syntax import (
    FALSE,
    TRUE,
    Atomic,
    Diamond,
    Not,
    Prop,
    Seq,
    Test,
    Vocabulary,
    box,
    conj,
    implies,
    loop,
    parse_formula,
)

SPLIT_VOCAB = Vocabulary.make(programs=["a", "b"])

SPLIT_CORE = parse_formula("<a>true & <b>true & [a & b]false", SPLIT_VOCAB)

# the no-successor theory's contribution to the split set, at desk scale
SPLIT_PINNED = parse_formula(
    "<a>true & <b>true & [a & b]false & [a]([a]false & [b]false) & [b]([a]false & [b]false)",
    SPLIT_VOCAB,
)

CYCLIC_FORMULA = parse_formula("<(a ; [ (b;a)^ ] false ? ; b)^> true", SPLIT_VOCAB)


def refutation_proof() -> list[ProofLine]:
    """A checkable derivation of ~CYCLIC_FORMULA, ending with its
    inconsistency `CYCLIC_FORMULA -> false`."""
    a, b = Atomic("a"), Atomic("b")
    psi = box(loop(Seq(b, a)), FALSE)            # the test body inside the cycle
    s = Seq(Seq(a, Test(psi)), b)                # the loop body a;psi?;b
    phi = Diamond(loop(s), TRUE)
    assert phi == CYCLIC_FORMULA

    l_ab = loop(Seq(a, b))
    psi2 = box(l_ab, FALSE)                      # the transferred test body
    s2 = Seq(Seq(a, b), Test(psi2))              # the rewritten body a;b;psi2?
    d1 = Diamond(Seq(l_ab, Test(psi2)), TRUE)    # after floating the test out
    e = Diamond(Test(psi2), TRUE)
    d2 = Diamond(l_ab, Not(Not(e)))
    v0 = Diamond(l_ab, TRUE)
    g = Diamond(l_ab, psi2)
    assert psi2 == Not(v0)  # box/diamond duals align structurally

    lines: list[ProofLine] = []

    def add(statement, justification) -> int:
        lines.append(ProofLine(len(lines) + 1, statement, justification))
        return lines[-1].id

    def axiom(name: str, binding: dict) -> int:
        return add(instantiate(FORMULA_SCHEMES[name], binding), AxiomFormula(name, binding))

    # move the cycle test along the loop: phi -> <(a;b;psi2?)^>true
    start = add(implies(phi, phi), Taut())
    rewritten, count = rule_c_rewrite(s, Test(TRUE), a, b, FALSE)
    assert count == 1 and rewritten == s2
    transfer = add(
        ProgramJudgement("=>", loop(s), loop(s2)),
        AxiomProgram("C", {"host": s, "beta1": Test(TRUE), "beta2": a, "beta3": b, "p": FALSE}),
    )
    moved = add(implies(phi, Diamond(loop(s2), TRUE)), PSub(start, transfer))

    # float the transferred test out of the loop: phi -> <(a;b)^ ; psi2?>true
    float_iff = add(
        ProgramJudgement("<=>", loop(s2), Seq(l_ab, Test(psi2))),
        AxiomProgram("T2", {"alpha": Seq(a, b), "p": psi2, "beta": Test(TRUE)}),
    )
    float_inc = add(ProgramJudgement("=>", loop(s2), Seq(l_ab, Test(psi2))), Struct("SplitIff", (float_iff,)))
    floated = add(implies(phi, d1), PSub(moved, float_inc))

    # split the composition: phi -> <(a;b)^>~~<psi2?>true
    seq_ax = axiom(";", {"alpha": l_ab, "beta": Test(psi2), "p": FALSE})
    split_glue = add(
        implies(lines[seq_ax - 1].statement, implies(implies(phi, d1), implies(phi, d2))), Taut()
    )
    split_step = add(implies(implies(phi, d1), implies(phi, d2)), MP(seq_ax, split_glue))
    at_d2 = add(implies(phi, d2), MP(floated, split_step))

    # the inner test evaluates to its body: <(a;b)^>true -> ~<psi2?>true
    test_ax = axiom("?", {"p": psi2, "q": TRUE})
    deny_glue = add(implies(lines[test_ax - 1].statement, implies(v0, Not(e))), Taut())
    deny = add(implies(v0, Not(e)), MP(test_ax, deny_glue))

    # monotonicity under the loop modality: phi -> <(a;b)^>psi2
    mono_gen = add(box(l_ab, implies(v0, Not(e))), Gen(deny, l_ab))
    mono_k = axiom("K", {"alpha": l_ab, "p": v0, "q": Not(e)})
    mono_boxes = add(implies(box(l_ab, v0), box(l_ab, Not(e))), MP(mono_gen, mono_k))
    mono_glue = add(
        implies(implies(box(l_ab, v0), box(l_ab, Not(e))), implies(d2, g)), Taut()
    )
    mono = add(implies(d2, g), MP(mono_boxes, mono_glue))

    chain_glue = add(implies(implies(phi, d2), implies(implies(d2, g), implies(phi, g))), Taut())
    chain_step = add(implies(implies(d2, g), implies(phi, g)), MP(at_d2, chain_glue))
    at_g = add(implies(phi, g), MP(mono, chain_step))

    # extract psi2 at the loop base via the loop axiom C3 (with q = true)
    top_line = add(TRUE, Taut())
    box_top = add(box(l_ab, TRUE), Gen(top_line, l_ab))
    c3 = axiom("C3", {"alpha": Seq(a, b), "p": psi2, "q": TRUE})
    extract_glue = add(
        implies(
            lines[c3 - 1].statement,
            implies(box(l_ab, TRUE), implies(implies(phi, g), implies(phi, psi2))),
        ),
        Taut(),
    )
    extract1 = add(
        implies(box(l_ab, TRUE), implies(implies(phi, g), implies(phi, psi2))), MP(c3, extract_glue)
    )
    extract2 = add(implies(implies(phi, g), implies(phi, psi2)), MP(box_top, extract1))
    at_psi2 = add(implies(phi, psi2), MP(at_g, extract2))

    # but psi2 denies the very loop that g asserts: psi2 -> ~g
    efq = add(implies(FALSE, v0), Taut())
    efq_box = add(box(l_ab, implies(FALSE, v0)), Gen(efq, l_ab))
    efq_k = axiom("K", {"alpha": l_ab, "p": FALSE, "q": v0})
    deny_g = add(implies(psi2, Not(g)), MP(efq_box, efq_k))

    final_glue = add(
        implies(
            implies(phi, g),
            implies(implies(phi, psi2), implies(implies(psi2, Not(g)), Not(phi))),
        ),
        Taut(),
    )
    f1 = add(implies(implies(phi, psi2), implies(implies(psi2, Not(g)), Not(phi))), MP(at_g, final_glue))
    f2 = add(implies(implies(psi2, Not(g)), Not(phi)), MP(at_psi2, f1))
    negated = add(Not(phi), MP(deny_g, f2))

    # restate as inconsistency of the assumption
    restate = add(implies(Not(phi), implies(phi, FALSE)), Taut())
    add(implies(phi, FALSE), MP(negated, restate))
    return lines


def refutation_proof_json() -> dict:
    return proof_to_json(refutation_proof(), SPLIT_VOCAB)


# ---------------------------------------------------------------------------
# Corruption of proofs
# ---------------------------------------------------------------------------

def corrupt_line(lines: list[ProofLine], index: int) -> list[ProofLine]:
    """Replace line `index` (0-based) with a damaged variant that no
    justification can license: formula statements are conjoined with a fresh
    proposition, judgement statements get a fresh trailing factor."""
    target = lines[index]
    zz = Prop("zz_corrupt")
    if isinstance(target.statement, ProgramJudgement):
        j = target.statement
        bad = ProgramJudgement(j.kind, Seq(j.left, Test(zz)), j.right)
        damaged = ProofLine(target.id, bad, target.justification)
    else:
        damaged = ProofLine(target.id, conj(target.statement, zz), target.justification)
    return lines[:index] + [damaged] + lines[index + 1:]


def all_single_line_corruptions_fail(lines: list[ProofLine]) -> bool:
    for i in range(len(lines)):
        if check_proof(corrupt_line(lines, i)).ok:
            return False
    return True
