"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines
and timing.  PDLKIT_ACCEPT_SCALE (default 1.0) scales the sample counts for
smoke runs; tolerances never change, and 1.0 is the acceptance configuration.
PDLKIT_ACCEPT_JOBS bounds the worker processes used by the exhaustive
4-world scan.
"""

import itertools
import os
import random
import time

import pytest

from pdlkit.calculus import ProgramJudgement, Theory, check_proof, theory_derives
from pdlkit.fixtures import (
    CYCLIC_FORMULA,
    SPLIT_CORE,
    SPLIT_PINNED,
    SPLIT_VOCAB,
    all_single_line_corruptions_fail,
    refutation_proof,
)
from pdlkit.large_programs import (
    LAtomic, LInter, LSeqTest, LabelledTransition, enumerate_instances,
    forbidden_box, is_consistent_transition, left_right_sets, leq,
    subprogram_occurrences,
)
from pdlkit.model_search import (
    InstancePool, ModelFound, NoModelUpTo, SearchBudget, TierPolicy,
    ValidUpTo, check_program_judgement, find_falsifying, find_model,
    soundness_harness,
)
from pdlkit.normal_form import classify, is_normal, normalize, ProgramClass
from pdlkit.semantics import (
    KripkeStructure, TransitionQuery, articulation_nodes, evaluate,
    gateway_split, is_minimal_witness, relation, witness_graphs,
)
from pdlkit.bulk import StructureSpace
from pdlkit.syntax import (
    FALSE, TRUE, Atomic, Diamond, Inter, Not, Or, Polarity, Prop, Seq, Test,
    Union, Vocabulary, box, conj, iff, loop, parse_program,
    polarity_of_occurrences, psub, seq_all, usub,
)

SCALE = float(os.environ.get("PDLKIT_ACCEPT_SCALE", "1.0"))
JOBS = int(os.environ.get("PDLKIT_ACCEPT_JOBS", str(min(2, os.cpu_count() or 1))))


def _n(base: int, minimum: int = 1) -> int:
    return max(minimum, int(base * SCALE))


def _report(num: int, name: str, detail: str, t0: float) -> None:
    print(f"\n[criterion {num}] PASS  {name}: {detail} ({time.time() - t0:.1f}s)")


# ---------------------------------------------------------------------------
# 1. Axiom soundness sweep
# ---------------------------------------------------------------------------

def test_criterion_1_axiom_soundness_sweep():
    t0 = time.time()
    instances = _n(500)
    report = soundness_harness(
        instances_per_scheme=instances,
        pool=InstancePool(props=("p", "q"), progs=("a", "b"), depth=2),
        policy=TierPolicy(max_worlds=3),
        rule_samples=_n(500),
        mutant_instances=_n(80),
    )
    scheme_names = {s["name"] for s in report["schemes"]}
    fig1 = {"Dl", "?", "T1", ";", "D", "K", "C1", "C2", "C3", "V",
            "Wk", "Cm", "Ct", "D3", "D4", "T", "A", "T2", "T3", "D1", "D2", "TP"}
    assert fig1 <= scheme_names, "all 22 schemes must be swept"
    for s in report["schemes"]:
        if s["name"] in fig1:
            assert s["instances"] >= instances, s["name"]
        assert s["counterexamples"] == [], f"scheme {s['name']} has counterexamples"
    for r in report["rules"]:
        assert r["counterexamples"] == [], f"rule {r['name']} broke validity preservation"
    assert len(report["mutants"]) >= 10
    assert report["all_mutants_caught"], "a corrupted scheme went undetected"
    _report(1, "axiom soundness sweep",
            f"{len(fig1)} schemes + C-discipline + 4 rules, {instances}/scheme, "
            f"0 counterexamples, {len(report['mutants'])} mutants all caught", t0)


# ---------------------------------------------------------------------------
# 2. Normal-form contract
# ---------------------------------------------------------------------------

def _random_formula(rng, depth, props=("p", "q"), progs=("a", "b")):
    pool = InstancePool(props=props, progs=progs, depth=depth)
    return pool.random_formula(rng, depth)


def test_criterion_2_normal_form_contract():
    t0 = time.time()
    count = _n(10_000)
    rng = random.Random(2024)
    policy = TierPolicy(max_worlds=3)
    for i in range(count):
        f = _random_formula(rng, 4)
        out, trace = normalize(f)
        assert is_normal(out), f"grammar violation on sample {i}"
        hit = find_falsifying(iff(f, out), policy)
        assert hit is None, f"normalize changed meaning on sample {i}: {hit}"
        again, t2 = normalize(out)
        assert again == out and t2.steps == (), f"not a fixpoint on sample {i}"
    _report(2, "normal-form contract",
            f"{count} random formulas of depth <= 4: grammar, equivalence, fixpoint all 100%", t0)


# ---------------------------------------------------------------------------
# 3. Witness-graph equivalence
# ---------------------------------------------------------------------------

def _witness_program_pool():
    a, b, p = Atomic("a"), Atomic("b"), Prop("p")
    pool = [
        a, b,
        Seq(a, b), Seq(b, a), Seq(a, Seq(b, a)),
        Union(a, b), Union(Seq(a, b), b),
        Inter(a, b), Inter(Seq(a, b), Seq(a, b)),
        Test(p), Test(TRUE), Seq(Seq(a, Test(p)), b),
        loop(a), loop(Seq(a, b)), Inter(Seq(a, b), loop(a)),
        Seq(a, Test(Diamond(b, p))), Union(Inter(a, b), Test(p)),
        Inter(Seq(a, Seq(Test(p), b)), Seq(a, b)),
    ]
    assert all(_depth(x) <= 3 for x in pool)
    return pool


def _depth(x) -> int:
    if isinstance(x, (Atomic, Prop)):
        return 0
    if isinstance(x, Test):
        return 1 + _depth(x.formula)
    if isinstance(x, Not):
        return 1 + _depth(x.sub)
    if isinstance(x, Diamond):
        return 1 + max(_depth(x.program), _depth(x.sub))
    if isinstance(x, Or):
        return 1 + max(_depth(x.left), _depth(x.right))
    return 1 + max(_depth(x.left), _depth(x.right))


def test_criterion_3_witness_graph_equivalence():
    t0 = time.time()
    pool = _witness_program_pool()
    space_small = [StructureSpace(1, ("p",), ("a", "b")), StructureSpace(2, ("p",), ("a", "b"))]
    structures = []
    for sp in space_small:
        structures += [sp.decode(i) for i in range(sp.count)]
    sp3 = StructureSpace(3, ("p",), ("a", "b"))
    rng = random.Random(99)
    structures += [sp3.decode(rng.randrange(sp3.count)) for _ in range(_n(400))]
    checked = 0
    for k in structures:
        for prog in pool:
            rel = relation(k, prog)
            for u in k.worlds:
                for v in k.worlds:
                    has_witness = bool(witness_graphs(TransitionQuery(k, u, prog, v), cap=64))
                    assert has_witness == ((u, v) in rel), (k.to_json(), prog, u, v)
                    checked += 1
    _report(3, "witness-graph equivalence",
            f"relation membership == witness existence on {checked} transition queries "
            f"({len(structures)} structures x {len(pool)} programs)", t0)


# ---------------------------------------------------------------------------
# 4. Split fixture
# ---------------------------------------------------------------------------

def test_criterion_4_split_fixture():
    t0 = time.time()
    found3 = find_model(SPLIT_CORE, SearchBudget.exhaustive(3, SPLIT_VOCAB))
    assert isinstance(found3, ModelFound), "split core must be satisfiable within 3 worlds"
    # the spec's minimum-3 claim actually needs the successor theory pinned
    # (the bare core has the 2-world model below); both facts are exhaustive
    bare_min = find_model(SPLIT_CORE, SearchBudget.exhaustive(2, SPLIT_VOCAB))
    assert isinstance(bare_min, ModelFound) and len(bare_min.structure.worlds) == 2
    assert isinstance(find_model(SPLIT_CORE, SearchBudget.exhaustive(1, SPLIT_VOCAB)), NoModelUpTo)
    assert isinstance(find_model(SPLIT_PINNED, SearchBudget.exhaustive(2, SPLIT_VOCAB)), NoModelUpTo)
    pinned3 = find_model(SPLIT_PINNED, SearchBudget.exhaustive(3, SPLIT_VOCAB))
    assert isinstance(pinned3, ModelFound) and len(pinned3.structure.worlds) == 3
    _report(4, "split fixture",
            "core satisfiable (exhaustive minimum 2 - a documented spec defect); "
            "pinned split set needs exactly 3 worlds (two disjoint copies)", t0)


# ---------------------------------------------------------------------------
# 5. Cyclic-test fixture
# ---------------------------------------------------------------------------

def test_criterion_5_cyclic_test_fixture():
    t0 = time.time()
    bound = 4 if SCALE >= 1.0 else 3
    outcome = find_model(CYCLIC_FORMULA, SearchBudget.exhaustive(bound, SPLIT_VOCAB), jobs=JOBS)
    assert isinstance(outcome, NoModelUpTo) and outcome.bound == bound
    proof = refutation_proof()
    assert check_proof(proof).ok
    assert theory_derives(Theory(frozenset({CYCLIC_FORMULA})), FALSE, proof)
    assert all_single_line_corruptions_fail(proof)
    _report(5, "cyclic-test fixture",
            f"no model up to {bound} worlds (exhaustive, jobs={JOBS}); refutation via C/T2/C3/MP "
            f"checks; all {len(proof)} single-line corruptions fail", t0)


# ---------------------------------------------------------------------------
# 6. Gateway property
# ---------------------------------------------------------------------------

def _gateway_cases(count: int):
    """Minimal witness graphs with an articulation node, over {a,b} and p."""
    rng = random.Random(4242)
    a, b = Atomic("a"), Atomic("b")
    unit = Test(TRUE)
    cases = []
    seen = set()

    def try_case(k, prog):
        for (u, w) in sorted(relation(k, prog)):
            enum = witness_graphs(TransitionQuery(k, u, prog, w), cap=64)
            if enum.truncated:
                continue
            for g in enum:
                if not is_minimal_witness(g, TransitionQuery(k, u, prog, w)):
                    continue
                try:
                    nodes = articulation_nodes(g, u, w)
                except Exception:
                    continue
                for v in sorted(nodes):
                    key = (k, prog, u, w, v, g.nodes, g.edges)
                    if key in seen:
                        continue
                    seen.add(key)
                    cases.append((k, g, u, w, v, prog))
                    if len(cases) >= count:
                        return True
        return False

    # deterministic seed families: chains and shared-midpoint intersections
    chain3 = KripkeStructure.make(
        "uvw", {"p": frozenset("v")},
        {"a": [("u", "v")], "b": [("v", "w")]})
    theta = KripkeStructure.make(
        "umw", {"p": frozenset("m")},
        {"a": [("u", "m"), ("m", "w")], "b": [("u", "m"), ("m", "w")]})
    chain5 = KripkeStructure.make(
        "uvxyw", {"p": frozenset("vx")},
        {"a": [("u", "v"), ("x", "y")], "b": [("v", "x"), ("y", "w")]})
    seeds = [
        (chain3, seq_all([a, unit, b])),
        (chain3, seq_all([a, Test(Prop("p")), b])),
        (theta, Inter(seq_all([a, unit, b]), seq_all([b, unit, a]))),
        (theta, seq_all([a, unit, a])),
        (chain5, seq_all([a, unit, b, unit, a, unit, b])),
    ]
    for k, prog in seeds:
        if try_case(k, prog):
            return cases

    # randomized structures and alternating forward programs
    while len(cases) < count:
        n = rng.randint(3, 5)
        worlds = [f"w{i}" for i in range(n)]
        edges = {"a": set(), "b": set()}
        for _ in range(rng.randint(n, 2 * n)):
            edges[rng.choice("ab")].add((rng.choice(worlds), rng.choice(worlds)))
        val = {"p": frozenset(w for w in worlds if rng.random() < 0.4)}
        k = KripkeStructure.make(worlds, val, edges)
        length = rng.randint(2, 3)
        parts = []
        for i in range(length):
            if i:
                parts.append(unit if rng.random() < 0.7 else Test(Prop("p")))
            atom = rng.choice([a, b, Inter(a, b)])
            parts.append(atom)
        prog = seq_all(parts)
        if classify(prog) is not ProgramClass.FORWARD:
            continue
        try_case(k, prog)
    return cases


def test_criterion_6_gateway_property():
    t0 = time.time()
    count = _n(100)
    cases = _gateway_cases(count)
    assert len(cases) >= count
    checked = 0
    for k, g, u, w, v, prog in cases:
        beta1, beta2 = gateway_split(g, u, w, v, prog, k)
        assert (u, v) in relation(k, beta1), "left membership failed"
        assert (v, w) in relation(k, beta2), "right membership failed"
        composed = Seq(beta1, beta2)
        vocab = Vocabulary.make(["p"], ["a", "b"])
        outcome = check_program_judgement(composed, prog, "=>", SearchBudget.exhaustive(3, vocab))
        assert isinstance(outcome, ValidUpTo), (prog, beta1, beta2, outcome)
        checked += 1
    _report(6, "gateway property",
            f"{checked} minimal witness graphs with articulation nodes split; memberships and "
            f"beta1;beta2 => alpha verified on all structures with <= 3 worlds", t0)


# ---------------------------------------------------------------------------
# 7. Large-program oracle equivalence
# ---------------------------------------------------------------------------

def _leq_pool():
    """Shapes with at most two test positions, sets over {p,q,r} of size <= 3."""
    p, q, r = Prop("p"), Prop("q"), Prop("r")
    subsets = [frozenset(s) for k in (1, 2, 3) for s in itertools.combinations((p, q, r), k)]
    atoms = [LAtomic("a"), LAtomic("b")]
    pool = list(atoms)
    pool.append(LInter(LAtomic("a"), LAtomic("b")))
    for s in subsets:
        pool.append(LSeqTest(LAtomic("a"), s, LAtomic("b")))
        pool.append(LInter(LSeqTest(LAtomic("a"), s, LAtomic("b")), LAtomic("b")))
    for s1 in subsets:
        for s2 in subsets:
            pool.append(LSeqTest(LSeqTest(LAtomic("a"), s1, LAtomic("b")), s2, LAtomic("a")))
    return pool


def test_criterion_7_large_program_oracles():
    t0 = time.time()
    from pdlkit.syntax import render_program

    pool = _leq_pool()
    pairs = 0
    for l1 in pool:
        i1 = {render_program(x) for x in enumerate_instances(l1)}
        for l2 in pool:
            i2 = {render_program(x) for x in enumerate_instances(l2)}
            structural = leq(l1, l2)
            extensional = i1 <= i2
            if structural:
                assert extensional, (l1, l2)
            elif extensional:
                # pointwise ordering is complete on identical shapes
                assert not _same_shape(l1, l2), (l1, l2)
            pairs += 1

    # consistency vs brute-force scan
    rng = random.Random(77)
    p, q, r = Prop("p"), Prop("q"), Prop("r")
    a, b = Atomic("a"), Atomic("b")
    members = [p, q, r, box(a, Not(q)), box(b, Not(p)), box(Seq(Seq(a, Test(p)), b), Not(q)),
               box(Inter(a, b), Not(r)), Diamond(a, q)]
    agreements = 0
    for _ in range(_n(1000)):
        prog = _random_large(rng, 2)
        t = LabelledTransition(
            frozenset(rng.sample(members, rng.randint(0, 5))),
            prog,
            frozenset(rng.sample([p, q, r], rng.randint(0, 3))),
        )
        fast = is_consistent_transition(t)
        slow = _brute_force(t)
        assert fast == slow
        agreements += 1
    _report(7, "large-program oracle equivalence",
            f"pointwise ordering vs instance-set inclusion on {pairs} pairs; consistency vs "
            f"brute-force scan on {agreements} random transitions", t0)


def _same_shape(l1, l2):
    if type(l1) is not type(l2):
        return False
    if isinstance(l1, LAtomic):
        return l1.name == l2.name
    if isinstance(l1, (LInter, LSeqTest)):
        return _same_shape(l1.left, l2.left) and _same_shape(l1.right, l2.right)
    return True


def _random_large(rng, depth):
    p, q, r = Prop("p"), Prop("q"), Prop("r")
    if depth == 0 or rng.random() < 0.4:
        return LAtomic(rng.choice("ab"))
    if rng.random() < 0.5:
        return LInter(_random_large(rng, depth - 1), _random_large(rng, depth - 1))
    tests = frozenset(rng.sample([p, q, r, TRUE], rng.randint(1, 3)))
    return LSeqTest(_random_large(rng, depth - 1), tests, _random_large(rng, depth - 1))


def _brute_force(t):
    labels = left_right_sets(t)
    for path, sub in subprogram_occurrences(t.program):
        lset, rset = labels[path]
        for inst in enumerate_instances(sub):
            for psi in rset:
                if forbidden_box(inst, psi) in lset:
                    return False
    return True


# ---------------------------------------------------------------------------
# 8. Substitution lemmas
# ---------------------------------------------------------------------------

def _random_structure(rng, n, props=("p", "q"), progs=("a", "b")):
    worlds = [f"w{i}" for i in range(n)]
    val = {pr: frozenset(w for w in worlds if rng.random() < 0.5) for pr in props}
    edges = {pg: frozenset((rng.choice(worlds), rng.choice(worlds))
                           for _ in range(rng.randint(0, n * n)))
             for pg in progs}
    return KripkeStructure.make(worlds, val, edges)


def _positive_formula(rng, old, depth):
    """A formula whose occurrences of `old` all sit at positive parity."""
    pool = InstancePool()
    if depth == 0:
        return rng.choice([Prop("p"), Prop("q"), TRUE, Diamond(old, TRUE)])
    pick = rng.randrange(5)
    if pick == 0:
        return Or(_positive_formula(rng, old, depth - 1), _positive_formula(rng, old, depth - 1))
    if pick == 1:
        return conj(_positive_formula(rng, old, depth - 1), _positive_formula(rng, old, depth - 1))
    if pick == 2:
        return Diamond(old, _positive_formula(rng, old, depth - 1))
    if pick == 3:
        # negation over an old-free subformula keeps occurrences positive
        return Not(pool.random_formula(rng, depth - 1))
    return Diamond(pool.random_program(rng, 1), _positive_formula(rng, old, depth - 1))


def test_criterion_8_substitution_lemmas():
    t0 = time.time()
    rng = random.Random(123)
    pool = InstancePool()
    samples = _n(1000)

    # uniform substitution = revaluation of the substituted proposition
    for _ in range(samples):
        k = _random_structure(rng, rng.randint(1, 3))
        f = pool.random_formula(rng, 3)
        psi = pool.random_formula(rng, 2)
        revalued = KripkeStructure.make(
            k.worlds,
            {**k.valuation_map, "p": frozenset(w for w in k.worlds if evaluate(k, w, psi, strict=False))},
            k.edge_map,
        )
        for u in k.worlds:
            assert evaluate(k, u, usub(f, psi, "p"), strict=False) == evaluate(revalued, u, f, strict=False)

    # positive-occurrence rewriting is monotone under relation growth
    checked = 0
    for _ in range(samples):
        k = _random_structure(rng, rng.randint(1, 3))
        old = pool.random_program(rng, 1)
        new = Union(old, pool.random_program(rng, 1))  # relation can only grow
        assert relation(k, old) <= relation(k, new)
        f = _positive_formula(rng, old, 3)
        assert all(pol is Polarity.POSITIVE for _, pol in polarity_of_occurrences(f, old))
        g = psub(f, old, new)
        for u in k.worlds:
            if evaluate(k, u, f, strict=False):
                assert evaluate(k, u, g, strict=False), (k.to_json(), f, old, new, u)
        checked += 1
    _report(8, "substitution lemmas",
            f"valuation-swap law and positive-rewrite monotonicity on {samples} samples each", t0)
