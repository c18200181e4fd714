import pytest

from pdlkit.semantics import (
    GatewayError, KripkeStructure, PreconditionError, TransitionQuery,
    UnknownSymbolError, WitnessGraph, articulation_nodes, evaluate,
    excise_loop, gateway_split, is_minimal_witness, relation, witness_graphs,
)
from pdlkit.syntax import (
    TRUE, Atomic, Diamond, Inter, Prop, Seq, Test, Union, Vocabulary, conj,
    diamond, loop, parse_formula, parse_program, usub,
)

V = Vocabulary.make(props=["p", "q"], programs=["a", "b", "c", "d"])
a, b, c, d = map(Atomic, "abcd")
p, q = Prop("p"), Prop("q")


def K(worlds, valuation=None, edges=None):
    return KripkeStructure.make(worlds, valuation, edges)


CHAIN = K("uvw", edges={"a": [("u", "v")], "b": [("v", "w")], "c": [], "d": []}, valuation={"p": "v", "q": ""})


# -- evaluation ---------------------------------------------------------------

def test_true_everywhere():
    k = K("u", edges={"a": []})
    assert evaluate(k, "u", TRUE)


def test_split_example_three_worlds():
    k = K("uxy", edges={"a": [("u", "x")], "b": [("u", "y")]})
    f = parse_formula("<a>true & <b>true & [a & b]false", Vocabulary.make(programs=["a", "b"]))
    assert evaluate(k, "u", f)
    assert not evaluate(k, "u", parse_formula("<a & b>true", Vocabulary.make(programs=["a", "b"])))


def test_unknown_symbol_raises():
    k = K("u", edges={"a": []})
    with pytest.raises(UnknownSymbolError):
        evaluate(k, "u", Prop("zz"))


def test_substitution_lemma_hand_case():
    # evaluating f[psi/p] equals evaluating f where p is revalued to [[psi]]
    k = CHAIN
    f = parse_formula("<a>p | p", V)
    psi = parse_formula("<b>true", V)
    lhs = {w: evaluate(k, w, usub(f, psi, "p")) for w in k.worlds}
    revalued = KripkeStructure.make(
        k.worlds,
        {"p": frozenset(w for w in k.worlds if evaluate(k, w, psi)), "q": frozenset()},
        dict(k.edges),
    )
    rhs = {w: evaluate(revalued, w, f) for w in k.worlds}
    assert lhs == rhs


# -- relations ----------------------------------------------------------------

def test_test_relation_is_restricted_identity():
    assert relation(CHAIN, Test(TRUE)) == frozenset({(w, w) for w in "uvw"})
    assert relation(CHAIN, Test(p)) == frozenset({("v", "v")})


def test_composition():
    assert relation(CHAIN, Seq(a, b)) == frozenset({("u", "w")})


def test_algebra_against_membership_oracle():
    k = K("uv", edges={"a": [("u", "v"), ("v", "v")], "b": [("u", "u"), ("u", "v")]})
    progs = [a, b, Seq(a, b), Union(a, b), Inter(a, b), Inter(Seq(a, b), b), Test(TRUE)]
    for x in progs:
        for y in progs:
            assert relation(k, Union(x, y)) == relation(k, x) | relation(k, y)
            assert relation(k, Inter(x, y)) == relation(k, x) & relation(k, y)
            composed = {(s, t) for s, m in relation(k, x) for (m2, t) in relation(k, y) if m2 == m}
            assert relation(k, Seq(x, y)) == frozenset(composed)


# -- witness graphs -----------------------------------------------------------

def test_atomic_witness():
    out = witness_graphs(TransitionQuery(CHAIN, "u", a, "v"))
    assert len(out) == 1
    g = out.graphs[0]
    assert g.nodes == {"u", "v"} and g.edges == {("u", "a", "v")}


def test_test_witness_is_single_node():
    out = witness_graphs(TransitionQuery(CHAIN, "v", Test(p), "v"))
    assert len(out) == 1
    assert out.graphs[0].nodes == {"v"} and not out.graphs[0].edges


def test_union_yields_both_branch_witnesses():
    k = K("uv", edges={"a": [("u", "v")], "b": [("u", "v")]})
    out = witness_graphs(TransitionQuery(k, "u", Union(a, b), "v"))
    assert len(out) == 2


def test_witness_iff_relation_membership():
    k = K("uvw", edges={"a": [("u", "v"), ("v", "w"), ("u", "u")], "b": [("v", "w"), ("w", "u")]})
    progs = [a, b, Seq(a, b), Inter(a, b), Union(Seq(a, b), b), loop(Seq(a, b)), Test(TRUE)]
    for prog in progs:
        rel = relation(k, prog)
        for u in k.worlds:
            for v in k.worlds:
                got = witness_graphs(TransitionQuery(k, u, prog, v))
                assert bool(got) == ((u, v) in rel), (prog, u, v)


def test_minimality():
    q1 = TransitionQuery(CHAIN, "u", a, "v")
    g = witness_graphs(q1).graphs[0]
    assert is_minimal_witness(g, q1)

    # a redundant parallel edge makes a witness non-minimal
    k = K("uv", edges={"a": [("u", "v")], "b": [("u", "v")]})
    q2 = TransitionQuery(k, "u", Union(a, b), "v")
    both = WitnessGraph(frozenset("uv"), frozenset({("u", "a", "v"), ("u", "b", "v")}), ("u", "v"))
    single = WitnessGraph(frozenset("uv"), frozenset({("u", "a", "v")}), ("u", "v"))
    assert not is_minimal_witness(both, q2)
    assert is_minimal_witness(single, q2)


# -- articulation nodes -------------------------------------------------------

def test_chain_articulation():
    g = WitnessGraph(frozenset("uvw"), frozenset({("u", "a", "v"), ("v", "b", "w")}), ("u", "w"))
    assert articulation_nodes(g, "u", "w") == {"v"}


def test_parallel_diamond_has_no_articulation():
    g = WitnessGraph(
        frozenset({"u", "x", "y", "w"}),
        frozenset({("u", "a", "x"), ("x", "b", "w"), ("u", "c", "y"), ("y", "d", "w")}),
        ("u", "w"),
    )
    assert articulation_nodes(g, "u", "w") == frozenset()


def test_theta_shared_midpoint():
    g = WitnessGraph(
        frozenset({"u", "m", "w"}),
        frozenset({("u", "a", "m"), ("u", "c", "m"), ("m", "b", "w"), ("m", "d", "w")}),
        ("u", "w"),
    )
    assert articulation_nodes(g, "u", "w") == {"m"}


# -- gateway splitting --------------------------------------------------------

def test_gateway_base_case():
    prog = parse_program("a;true?;b", V)
    q1 = TransitionQuery(CHAIN, "u", prog, "w")
    g = witness_graphs(q1).graphs[0]
    beta1, beta2 = gateway_split(g, "u", "w", "v", prog, CHAIN)
    assert ("u", "v") in relation(CHAIN, beta1)
    assert ("v", "w") in relation(CHAIN, beta2)


def test_gateway_intersection_recombines():
    # two composition branches sharing the midpoint
    k = K(
        "umw",
        edges={"a": [("u", "m")], "b": [("m", "w")], "c": [("u", "m")], "d": [("m", "w")]},
    )
    prog = Inter(parse_program("a;true?;b", V), parse_program("c;true?;d", V))
    q1 = TransitionQuery(k, "u", prog, "w")
    graphs = [g for g in witness_graphs(q1) if is_minimal_witness(g, q1)]
    assert graphs
    g = graphs[0]
    assert articulation_nodes(g, "u", "w") == {"m"}
    beta1, beta2 = gateway_split(g, "u", "w", "m", prog, k)
    assert isinstance(beta1, Inter) and isinstance(beta2, Inter)
    assert ("u", "m") in relation(k, beta1)
    assert ("m", "w") in relation(k, beta2)


def test_gateway_nested_split():
    k = K(
        "uvxw",
        edges={"a": [("u", "v")], "b": [("v", "x")], "c": [("x", "w")], "d": []},
    )
    prog = parse_program("a;true?;(b;true?;c)", V)
    q1 = TransitionQuery(k, "u", prog, "w")
    g = witness_graphs(q1).graphs[0]
    beta1, beta2 = gateway_split(g, "u", "w", "x", prog, k)
    assert ("u", "x") in relation(k, beta1)
    assert ("x", "w") in relation(k, beta2)


def test_gateway_rejects_non_articulation():
    prog = parse_program("a;true?;b", V)
    q1 = TransitionQuery(CHAIN, "u", prog, "w")
    g = witness_graphs(q1).graphs[0]
    with pytest.raises(GatewayError):
        gateway_split(g, "u", "w", "u", prog, CHAIN)


# -- loop excision ------------------------------------------------------------

def test_excise_loop_chain_with_cycle():
    k = K(
        "uvxw",
        edges={
            "a": [("u", "v")],
            "b": [("v", "x")],
            "c": [("x", "v")],
            "d": [("v", "w")],
        },
    )
    prog = parse_program("a;true?;b;true?;c;true?;d", V)
    q1 = TransitionQuery(k, "u", prog, "w")
    g = witness_graphs(q1).graphs[0]
    region = frozenset({("v", "b", "x"), ("x", "c", "v")})
    out = excise_loop(g, "u", "w", "v", region, prog, k)
    assert relation(k, out) <= relation(k, prog)
    assert ("u", "w") in relation(k, out)
    # the excised program's own witnesses avoid the region
    for h in witness_graphs(TransitionQuery(k, "u", out, "w")):
        assert not (h.edges & region)


def test_excise_loop_rejects_empty_region():
    prog = parse_program("a;true?;b", V)
    q1 = TransitionQuery(CHAIN, "u", prog, "w")
    g = witness_graphs(q1).graphs[0]
    with pytest.raises(PreconditionError):
        excise_loop(g, "u", "w", "v", frozenset(), prog, CHAIN)


def test_excise_loop_rejects_whole_path():
    k = K("u", edges={"a": [("u", "u")], "b": [("u", "u")]})
    prog = parse_program("a;true?;b", V)
    q1 = TransitionQuery(k, "u", prog, "u")
    g = witness_graphs(q1).graphs[0]
    with pytest.raises(PreconditionError):
        excise_loop(g, "u", "u", "u", frozenset(g.edges), prog, k)


# -- exports ------------------------------------------------------------------

def test_json_roundtrip():
    data = CHAIN.to_json()
    assert KripkeStructure.from_json(data) == CHAIN


def test_dot_export():
    g = WitnessGraph(frozenset("uv"), frozenset({("u", "a", "v")}), ("u", "v"))
    dot = g.to_dot()
    assert 'digraph' in dot and '"u" -> "v" [label="a"]' in dot
