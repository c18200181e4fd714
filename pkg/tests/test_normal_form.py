import pytest
from hypothesis import given, settings, strategies as st

from pdlkit.normal_form import (
    ProgramClass, classify, cyc_to_test, is_normal, modality_programs,
    normalize, normalize_program_in_context,
)
from pdlkit.syntax import (
    TRUE, Atomic, Diamond, Inter, Not, Or, Prop, Seq, Test, Union,
    Vocabulary, box, conj, implies, loop, parse_formula, parse_program,
    render, render_program,
)

V = Vocabulary.make(props=["p", "q"], programs=["a", "b"])
p, q = Prop("p"), Prop("q")
a, b = Atomic("a"), Atomic("b")


# -- classification -----------------------------------------------------------

def test_classify_bases():
    assert classify(a) is ProgramClass.FORWARD
    assert classify(Test(p)) is ProgramClass.CYCLIC
    assert classify(Union(a, b)) is ProgramClass.NEITHER


def test_classify_intersections():
    assert classify(Inter(a, b)) is ProgramClass.FORWARD
    assert classify(Inter(a, Test(p))) is ProgramClass.CYCLIC
    assert classify(Inter(Test(p), a)) is ProgramClass.NEITHER  # test on the right only
    assert classify(loop(a)) is ProgramClass.CYCLIC


def test_classify_sequences():
    assert classify(parse_program("a;p?;b", V)) is ProgramClass.FORWARD
    assert classify(parse_program("a;(b & p?);a", V)) is ProgramClass.FORWARD
    assert classify(parse_program("a;b", V)) is ProgramClass.NEITHER
    assert classify(parse_program("a;p?", V)) is ProgramClass.NEITHER
    assert classify(parse_program("a;true?;b;true?;a", V)) is ProgramClass.FORWARD
    # associativity of ; does not matter
    assert classify(Seq(a, Seq(Test(p), b))) is ProgramClass.FORWARD
    assert classify(Seq(Seq(a, Test(p)), b)) is ProgramClass.FORWARD


def test_cyc_to_test():
    assert cyc_to_test(Test(p)) == p
    out = cyc_to_test(Inter(a, Test(p)))
    assert out == conj(Diamond(loop(a), TRUE), p)
    out = cyc_to_test(Inter(Inter(a, b), Test(p)))
    assert out == conj(Diamond(loop(Inter(a, b)), TRUE), p)


# -- program-level rewriting --------------------------------------------------

def test_float_trailing_test_out_of_intersection():
    out, trace = normalize_program_in_context(parse_program("(a;p?) & b", V))
    assert out == parse_program("(a & b);p?", V)
    assert any(s.axiom == "T2" for s in trace.steps)


def test_padding_between_forward_parts():
    out, _ = normalize_program_in_context(parse_program("a;b", V))
    assert out == parse_program("a;true?;b", V)


def test_adjacent_tests_merge():
    out, _ = normalize_program_in_context(parse_program("a;p?;q?;b", V))
    assert out == parse_program("a;(p & q)?;b", V)


def test_union_floats_to_top():
    out, _ = normalize_program_in_context(parse_program("a;(b + a)", V))
    assert out == Union(parse_program("a;true?;b", V), parse_program("a;true?;a", V))


def test_trace_replays_program():
    prog = parse_program("(a;p?) & (b;q?)", V)
    out, trace = normalize_program_in_context(prog)
    assert trace.replay(prog) == out


# -- formula normalization ----------------------------------------------------

def test_test_diamond_becomes_conjunction():
    out, trace = normalize(parse_formula("<p?>q", V))
    assert out == conj(p, q)
    assert trace.steps[-1].axiom == "?"


def test_union_diamond_splits():
    out, trace = normalize(parse_formula("<a + b>p", V))
    assert out == Or(Diamond(a, p), Diamond(b, p))
    assert any(s.axiom == "D" for s in trace.steps)


def test_seq_over_union_distributes():
    out, _ = normalize(parse_formula("<a;(b + a)>p", V))
    assert out == Or(Diamond(parse_program("a;true?;b", V), p),
                     Diamond(parse_program("a;true?;a", V), p))


def test_cyclic_modality_reduces_to_loop_form():
    out, _ = normalize(parse_formula("<a & p?>q", V))
    assert out == Diamond(loop(a), conj(p, q))


def test_loop_modality_is_fixpoint():
    f = Diamond(loop(a), p)
    out, trace = normalize(f)
    assert out == f
    assert trace.steps == ()


def test_normalize_idempotent_on_samples():
    samples = [
        "<(a;p?) & b>q", "<p? ; a>q", "<a;b>p", "[a + b]p",
        "<(a & p?) ; b ; q?>p", "<(p? ; a) & (b ; q?)>true",
        "[(a;[ (b;a)^ ]false?;b)^]p",
    ]
    for text in samples:
        f = parse_formula(text, V)
        out, _ = normalize(f)
        again, trace = normalize(out)
        assert again == out, text
        assert trace.steps == (), text
        assert is_normal(out), text


def test_trace_replays_formula():
    f = parse_formula("<(a;p?) & (b + a)>q", V)
    out, trace = normalize(f)
    assert trace.replay(f) == out


# -- randomized totality ------------------------------------------------------

def _programs(depth):
    base = st.sampled_from([a, b])
    if depth == 0:
        return st.one_of(base, st.builds(Test, _formulas(0)))
    sub = _programs(depth - 1)
    return st.one_of(
        base,
        st.builds(Seq, sub, sub),
        st.builds(Union, sub, sub),
        st.builds(Inter, sub, sub),
        st.builds(Test, _formulas(depth - 1)),
        st.builds(loop, sub),
    )


def _formulas(depth):
    base = st.sampled_from([p, q, TRUE])
    if depth == 0:
        return base
    sub = _formulas(depth - 1)
    return st.one_of(
        base,
        st.builds(Not, sub),
        st.builds(Or, sub, sub),
        st.builds(Diamond, _programs(depth - 1), sub),
        st.builds(box, _programs(depth - 1), sub),
    )


@settings(max_examples=400, deadline=None)
@given(_formulas(3))
def test_normalize_total_and_normal(f):
    out, trace = normalize(f)
    assert is_normal(out)
    assert trace.replay(f) == out
    again, t2 = normalize(out)
    assert again == out
    assert t2.steps == ()
