"""Bounded model search over exhaustively enumerated finite structures.

Satisfiability, validity and program-judgement checks scan every structure
with up to `max_worlds` worlds over a fixed vocabulary (or a seeded random
sample of them).  Scans are chunked through the bulk evaluator and optionally
parallelized across processes; outcomes are deterministic: the witness with
the smallest canonical index wins regardless of worker count.

The same machinery drives the axiom soundness harness: each scheme is
instantiated from seeded formula/program pools and each instance is checked
over a tiered structure budget (exhaustive where the space is small enough,
exhaustive up to two worlds plus a seeded three-world sample beyond that).
`NoModelUpTo` is evidence, not a refutation: the logic is not known to have a
bounded-model property.
"""

from __future__ import annotations

import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from . import _bulkpy
from .bulk import BACKEND_NAME, CompiledFormula, StructureSpace, compile_formula, compile_program
from .calculus import (
    FORMULA_SCHEMES,
    PROGRAM_SCHEMES,
    MetaFormula,
    MetaProgram,
    ProgramJudgement,
    instantiate,
    metavariables,
    rule_c_rewrite,
)
from .semantics import KripkeStructure, UnknownSymbolError, evaluate, relation
from .syntax import (
    FALSE,
    TRUE,
    Atomic,
    Diamond,
    Formula,
    Inter,
    Not,
    Or,
    Program,
    Prop,
    Seq,
    Test,
    Union,
    Vocabulary,
    box,
    conj,
    implies,
    loop,
    seq_all,
    symbols_of,
)

CHUNK = 1 << 18
DEFAULT_CEILING = 1 << 33


# ---------------------------------------------------------------------------
# Budgets and outcomes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchBudget:
    max_worlds: int
    vocab: Vocabulary
    mode: tuple  # ("exhaustive",) or ("random", samples, seed)
    ceiling: int = DEFAULT_CEILING

    def __post_init__(self):
        if self.mode[0] not in ("exhaustive", "random"):
            raise ValueError(f"bad mode {self.mode!r}")
        if self.mode[0] == "exhaustive" and self.max_worlds > 4:
            raise ValueError("exhaustive search is limited to 4 worlds")

    @staticmethod
    def exhaustive(max_worlds: int, vocab: Vocabulary, ceiling: int = DEFAULT_CEILING) -> "SearchBudget":
        return SearchBudget(max_worlds, vocab, ("exhaustive",), ceiling)

    @staticmethod
    def randomized(max_worlds: int, vocab: Vocabulary, samples: int, seed: int) -> "SearchBudget":
        return SearchBudget(max_worlds, vocab, ("random", samples, seed))


@dataclass(frozen=True)
class ModelFound:
    structure: KripkeStructure
    world: str
    status = "model-found"

    def to_json(self):
        return {"status": self.status, "structure": self.structure.to_json(), "world": self.world}


@dataclass(frozen=True)
class NoModelUpTo:
    bound: int
    status = "no-model-bounded"

    def to_json(self):
        return {"status": self.status, "bound": self.bound}


@dataclass(frozen=True)
class ValidUpTo:
    bound: int
    status = "valid"

    def to_json(self):
        return {"status": self.status, "bound": self.bound}


@dataclass(frozen=True)
class Countermodel:
    structure: KripkeStructure
    world: Optional[str] = None
    pair: Optional[tuple[str, str]] = None
    status = "countermodel"

    def to_json(self):
        out = {"status": self.status, "structure": self.structure.to_json()}
        if self.world is not None:
            out["world"] = self.world
        if self.pair is not None:
            out["pair"] = list(self.pair)
        return out


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# Chunked scanning
# ---------------------------------------------------------------------------

def _space(vocab: Vocabulary, n: int) -> StructureSpace:
    return StructureSpace(n, tuple(sorted(vocab.props)), tuple(sorted(vocab.programs)))


def _sat_hit_in_chunk(cf: CompiledFormula, start: int, end: int) -> Optional[tuple[int, int]]:
    mask = cf.run(start, end)
    nz = np.nonzero(mask)[0]
    if nz.size == 0:
        return None
    off = int(nz[0])
    world_bit = int(mask[off]) & -int(mask[off])
    return start + off, world_bit.bit_length() - 1


def _sat_worker(args):
    code, nregs, n, props, progs, start, end = args
    space = StructureSpace(n, props, progs)
    cf = CompiledFormula(space, code, nregs)
    return _sat_hit_in_chunk(cf, start, end)


def _chunk_ranges(total: int) -> Iterator[tuple[int, int]]:
    start = 0
    while start < total:
        yield start, min(start + CHUNK, total)
        start += CHUNK


def _scan_space_sat(f: Formula, space: StructureSpace, jobs: int = 1) -> Optional[tuple[int, int]]:
    """Smallest structure index (and world bit) satisfying f, or None."""
    cf = compile_formula(f, space)
    if jobs <= 1 or space.count <= CHUNK:
        for start, end in _chunk_ranges(space.count):
            hit = _sat_hit_in_chunk(cf, start, end)
            if hit:
                return hit
        return None
    tasks = [(cf.code, cf.nregs, space.n, space.props, space.progs, s, e)
             for s, e in _chunk_ranges(space.count)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for hit in pool.map(_sat_worker, tasks, chunksize=1):
            if hit:
                return hit
    return None


def _sample_indices(space: StructureSpace, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if space.count <= samples:
        return np.arange(space.count, dtype=np.uint64)
    return rng.integers(0, space.count, size=samples, dtype=np.uint64)


def _scan_sample_sat(f: Formula, space: StructureSpace, samples: int, seed: int) -> Optional[tuple[int, int]]:
    idx = _sample_indices(space, samples, seed)
    cf = compile_formula(f, space)
    mask = cf.run_on(idx)
    nz = np.nonzero(mask)[0]
    if nz.size == 0:
        return None
    off = int(nz[0])
    world_bit = int(mask[off]) & -int(mask[off])
    return int(idx[off]), world_bit.bit_length() - 1


def _require_symbols(vocab: Vocabulary, x) -> None:
    props, progs = symbols_of(x)
    missing = (props - vocab.props) | (progs - vocab.programs)
    if missing:
        raise UnknownSymbolError(f"symbols outside the search vocabulary: {sorted(missing)}")


def find_model(f: Formula, budget: SearchBudget, jobs: int = 1) -> ModelFound | NoModelUpTo:
    """Search structures of increasing size for one satisfying the formula.

    Exhaustive mode enumerates every structure over the budget vocabulary in
    canonical index order; outcomes re-verify through the direct evaluator
    before being returned.
    """
    _require_symbols(budget.vocab, f)
    for n in range(1, budget.max_worlds + 1):
        space = _space(budget.vocab, n)
        if budget.mode[0] == "exhaustive":
            if space.count > budget.ceiling:
                raise BudgetExceeded(f"{space.count} structures with {n} worlds exceed the ceiling")
            hit = _scan_space_sat(f, space, jobs)
        else:
            _, samples, seed = budget.mode
            hit = _scan_sample_sat(f, space, samples, seed + n)
        if hit is not None:
            index, world_bit = hit
            k = space.decode(index)
            world = space.worlds[world_bit]
            if not evaluate(k, world, f, strict=False):
                raise AssertionError("internal: bulk scan hit fails re-verification")
            return ModelFound(k, world)
    return NoModelUpTo(budget.max_worlds)


def check_validity(f: Formula, budget: SearchBudget, jobs: int = 1) -> ValidUpTo | Countermodel:
    outcome = find_model(Not(f), budget, jobs)
    if isinstance(outcome, ModelFound):
        return Countermodel(outcome.structure, outcome.world)
    return ValidUpTo(budget.max_worlds)


def _judgement_worker(args):
    lcode, lregs, rcode, rregs, n, props, progs, kind, start, end = args
    space = StructureSpace(n, props, progs)
    lm = CompiledFormula(space, lcode, lregs).run(start, end)
    rm = CompiledFormula(space, rcode, rregs).run(start, end)
    viol = (lm & ~rm) if kind == "=>" else (lm ^ rm)
    nz = np.nonzero(viol)[0]
    if nz.size == 0:
        return None
    off = int(nz[0])
    bit = int(viol[off]) & -int(viol[off])
    return start + off, bit.bit_length() - 1


def check_program_judgement(left: Program, right: Program, kind: str,
                            budget: SearchBudget, jobs: int = 1) -> ValidUpTo | Countermodel:
    """Relation inclusion (=>) or equality (<=>) over all budgeted structures."""
    _require_symbols(budget.vocab, Diamond(left, TRUE))
    _require_symbols(budget.vocab, Diamond(right, TRUE))
    for n in range(1, budget.max_worlds + 1):
        space = _space(budget.vocab, n)
        cl = compile_program(left, space)
        cr = compile_program(right, space)
        if budget.mode[0] == "exhaustive":
            if space.count > budget.ceiling:
                raise BudgetExceeded(f"{space.count} structures with {n} worlds exceed the ceiling")
            ranges = list(_chunk_ranges(space.count))
            tasks = [(cl.code, cl.nregs, cr.code, cr.nregs, space.n, space.props, space.progs, kind, s, e)
                     for s, e in ranges]
            hit = None
            if jobs <= 1 or space.count <= CHUNK:
                for task in tasks:
                    hit = _judgement_worker(task)
                    if hit:
                        break
            else:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    for out in pool.map(_judgement_worker, tasks, chunksize=1):
                        if out:
                            hit = out
                            break
        else:
            _, samples, seed = budget.mode
            idx = _sample_indices(space, samples, seed + n)
            lm = cl.run_on(idx)
            rm = cr.run_on(idx)
            viol = (lm & ~rm) if kind == "=>" else (lm ^ rm)
            nz = np.nonzero(viol)[0]
            hit = None
            if nz.size:
                off = int(nz[0])
                bit = int(viol[off]) & -int(viol[off])
                hit = int(idx[off]), bit.bit_length() - 1
        if hit is not None:
            index, pairbit = hit
            k = space.decode(index)
            u, v = space.worlds[pairbit // space.n], space.worlds[pairbit % space.n]
            lrel, rrel = relation(k, left), relation(k, right)
            ok = ((u, v) in lrel and (u, v) not in rrel) if kind == "=>" else ((u, v) in lrel) != ((u, v) in rrel)
            if not ok:
                raise AssertionError("internal: judgement violation fails re-verification")
            return Countermodel(k, None, (u, v))
    return ValidUpTo(budget.max_worlds)


# ---------------------------------------------------------------------------
# Tiered per-instance validity (the harness work-horse)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TierPolicy:
    """Structure budget per instance: exhaustive at every world count whose
    space stays within `cap_bits` index bits, seeded sampling beyond."""

    max_worlds: int = 3
    cap_bits: int = 18
    samples: int = 2048
    seed: int = 20240801

    def describe(self) -> str:
        return (
            f"exhaustive over all structures with <= {self.max_worlds} worlds while the space "
            f"has <= 2^{self.cap_bits} structures; otherwise exhaustive up to the largest "
            f"world count within the cap plus {self.samples} seeded samples per larger count"
        )


def _tiered_spaces(x, policy: TierPolicy):
    props, progs = symbols_of(x)
    for n in range(1, policy.max_worlds + 1):
        space = StructureSpace(n, tuple(sorted(props)), tuple(sorted(progs)))
        yield space, space.bits <= policy.cap_bits


def find_falsifying(f: Formula, policy: TierPolicy) -> Optional[tuple[KripkeStructure, str]]:
    """A structure/world falsifying f within the tiered budget, or None."""
    neg = Not(f)
    for space, exhaustive in _tiered_spaces(f, policy):
        if exhaustive:
            hit = _scan_space_sat(neg, space)
        else:
            hit = _scan_sample_sat(neg, space, policy.samples, policy.seed + space.n)
        if hit is not None:
            index, world_bit = hit
            k = space.decode(index)
            world = space.worlds[world_bit]
            if evaluate(k, world, f, strict=False):
                raise AssertionError("internal: falsification hit fails re-verification")
            return k, world
    return None


def find_judgement_violation(j: ProgramJudgement, policy: TierPolicy) -> Optional[tuple[KripkeStructure, tuple[str, str]]]:
    probe = Diamond(Union(j.left, j.right), TRUE)
    for space, exhaustive in _tiered_spaces(probe, policy):
        cl = compile_program(j.left, space)
        cr = compile_program(j.right, space)
        if exhaustive:
            ranges = _chunk_ranges(space.count)
            hit = None
            for s, e in ranges:
                hit = _judgement_worker((cl.code, cl.nregs, cr.code, cr.nregs, space.n,
                                         space.props, space.progs, j.kind, s, e))
                if hit:
                    break
        else:
            idx = _sample_indices(space, policy.samples, policy.seed + space.n)
            lm = cl.run_on(idx)
            rm = cr.run_on(idx)
            viol = (lm & ~rm) if j.kind == "=>" else (lm ^ rm)
            nz = np.nonzero(viol)[0]
            hit = None
            if nz.size:
                off = int(nz[0])
                bit = int(viol[off]) & -int(viol[off])
                hit = int(idx[off]), bit.bit_length() - 1
        if hit is not None:
            index, pairbit = hit
            k = space.decode(index)
            pair = (space.worlds[pairbit // space.n], space.worlds[pairbit % space.n])
            return k, pair
    return None


# ---------------------------------------------------------------------------
# Instance pools
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InstancePool:
    """Seeded random formulas and programs over a tiny vocabulary."""

    props: tuple[str, ...] = ("p", "q")
    progs: tuple[str, ...] = ("a", "b")
    depth: int = 2
    seed: int = 7

    def random_formula(self, rng: random.Random, depth: Optional[int] = None) -> Formula:
        d = self.depth if depth is None else depth
        if d == 0 or rng.random() < 0.3:
            return rng.choice([Prop(self.props[0]), Prop(self.props[-1]), TRUE, FALSE])
        pick = rng.randrange(4)
        if pick == 0:
            return Not(self.random_formula(rng, d - 1))
        if pick == 1:
            return Or(self.random_formula(rng, d - 1), self.random_formula(rng, d - 1))
        if pick == 2:
            return conj(self.random_formula(rng, d - 1), self.random_formula(rng, d - 1))
        return Diamond(self.random_program(rng, d - 1), self.random_formula(rng, d - 1))

    def random_program(self, rng: random.Random, depth: Optional[int] = None) -> Program:
        d = self.depth if depth is None else depth
        if d == 0 or rng.random() < 0.35:
            return Atomic(rng.choice(self.progs))
        pick = rng.randrange(5)
        if pick == 0:
            return Seq(self.random_program(rng, d - 1), self.random_program(rng, d - 1))
        if pick == 1:
            return Union(self.random_program(rng, d - 1), self.random_program(rng, d - 1))
        if pick == 2:
            return Inter(self.random_program(rng, d - 1), self.random_program(rng, d - 1))
        if pick == 3:
            return Test(self.random_formula(rng, max(d - 1, 0)))
        return loop(self.random_program(rng, d - 1))

    def assignments(self, metas: Iterable[str], count: int) -> Iterator[dict]:
        rng = random.Random(self.seed)
        metas = sorted(metas)
        seen = set()
        tries = 0
        produced = 0
        while produced < count and tries < count * 50:
            tries += 1
            binding = {}
            for name in metas:
                if name in ("p", "q", "r"):
                    binding[name] = self.random_formula(rng)
                else:
                    binding[name] = self.random_program(rng)
            key = tuple(binding[m] for m in metas)
            if key in seen:
                continue
            seen.add(key)
            produced += 1
            yield binding


# ---------------------------------------------------------------------------
# Soundness harness
# ---------------------------------------------------------------------------

_MUTANTS: dict[str, tuple] = {}


def _register_mutants():
    P, Q, R = MetaFormula("p"), MetaFormula("q"), MetaFormula("r")
    A, B, C = MetaProgram("alpha"), MetaProgram("beta"), MetaProgram("gamma")
    from .syntax import iff

    _MUTANTS.update({
        "T1-or": ("formula", iff(Diamond(Inter(A, Test(P)), Q), Diamond(loop(A), Or(P, Q)))),
        "?-drop": ("formula", iff(Diamond(Test(P), Q), Q)),
        "D-conj": ("formula", iff(Diamond(Union(A, B), P), conj(Diamond(A, P), Diamond(B, P)))),
        "K-converse": ("formula", implies(implies(box(A, P), box(A, Q)), box(A, implies(P, Q)))),
        "C3-negated": ("formula", implies(conj(Diamond(loop(A), P), box(loop(A), Q)), conj(P, Not(Q)))),
        ";-swapped": ("formula", iff(box(Seq(A, B), P), box(B, box(A, P)))),
        "V-dropped": ("formula", iff(Diamond(Seq(Seq(A, Test(Or(P, Q))), B), R),
                                     Diamond(Seq(Seq(A, Test(P)), B), R))),
        "Wk-converse": ("program", ("=>", A, Inter(A, B))),
        "T2-front": ("program", ("<=>", Inter(Seq(A, Test(P)), B), Seq(Test(P), Inter(A, B)))),
        "D1-lopsided": ("program", ("<=>", Inter(A, Union(B, C)), Union(Inter(A, B), C))),
        "Ct-seq": ("program", ("<=>", Seq(A, A), A)),
        "T-noloop": ("program", ("<=>", Inter(A, Test(P)), Test(Diamond(A, P)))),
    })


_register_mutants()


def _check_tp_instance(binding: dict, policy: TierPolicy) -> Optional[tuple]:
    """TP is cross-sorted; pointwise it says: p <-> q holds at a world exactly
    when the two tests loop there together.  A test loops at w exactly when
    <test>true holds at w, so the pointwise claim is one formula validity."""
    from .syntax import iff

    p, q = binding["p"], binding["q"]
    pointwise = iff(iff(p, q), iff(Diamond(Test(p), TRUE), Diamond(Test(q), TRUE)))
    return find_falsifying(pointwise, policy)


def _rule_conclusions(rule: str, pool: InstancePool, rng: random.Random) -> Iterator[Formula]:
    """Conclusions of one rule application whose premises are valid."""
    axioms = list(FORMULA_SCHEMES.items())
    while True:
        name, pattern = rng.choice(axioms)
        binding = {}
        for meta in metavariables(pattern):
            if meta in ("p", "q", "r"):
                binding[meta] = pool.random_formula(rng)
            else:
                binding[meta] = pool.random_program(rng)
        premise = instantiate(pattern, binding)
        if rule == "MP":
            name2, pattern2 = rng.choice(axioms)
            b2 = {}
            for meta in metavariables(pattern2):
                b2[meta] = pool.random_formula(rng) if meta in ("p", "q", "r") else pool.random_program(rng)
            other = instantiate(pattern2, b2)
            # premise and premise -> other are both valid, so other must be
            yield other
        elif rule == "Gen":
            yield box(pool.random_program(rng), premise)
        elif rule == "USub":
            from .syntax import usub

            yield usub(premise, pool.random_formula(rng), rng.choice(pool.props))
        elif rule == "PSub":
            from .syntax import psub

            alpha = pool.random_program(rng)
            beta = pool.random_program(rng)
            small, big = Inter(alpha, beta), alpha  # small => big holds in every structure
            body = pool.random_formula(rng)
            if rng.random() < 0.5:
                # a valid premise that mentions the rewritten program directly
                premise = implies(Diamond(small, body), Diamond(small, body))
            yield psub(premise, small, big)
        else:
            raise ValueError(rule)


@dataclass
class SchemeReport:
    name: str
    kind: str
    instances: int = 0
    counterexamples: list = field(default_factory=list)

    def to_json(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "instances": self.instances,
            "counterexamples": [
                {"instance": inst, "structure": k.to_json(), "at": at}
                for inst, k, at in self.counterexamples
            ],
        }


def soundness_harness(
    instances_per_scheme: int = 500,
    pool: Optional[InstancePool] = None,
    policy: Optional[TierPolicy] = None,
    rule_samples: int = 200,
    mutant_instances: int = 80,
    progress: Optional[Callable[[str], None]] = None,
) -> dict:
    """Empirical soundness sweep over every axiom scheme and rule.

    Schemes are instantiated from the pool and each instance checked over the
    tiered structure budget; the report demands zero counterexamples.  The
    deliberately corrupted schemes must each produce at least one
    counterexample, which exercises the harness's ability to find them.

    The cycle-transfer scheme C is checked under its intended instantiation
    discipline (the transferred test is a boxed-falsum cycle, the cycle
    remainder a test, the pattern spanning the loop body or an intersection
    branch of it); see the report's policy notes.
    """
    from .syntax import iff, render, render_program

    pool = pool or InstancePool()
    policy = policy or TierPolicy()
    t0 = time.time()
    report: dict = {
        "backend": BACKEND_NAME,
        "pool": {"props": pool.props, "progs": pool.progs, "depth": pool.depth, "seed": pool.seed},
        "policy": policy.describe(),
        "schemes": [],
        "rules": [],
        "mutants": [],
    }

    def note(msg: str):
        if progress:
            progress(msg)

    # formula schemes
    for name, pattern in FORMULA_SCHEMES.items():
        rep = SchemeReport(name, "formula")
        for binding in pool.assignments(metavariables(pattern), instances_per_scheme):
            inst = instantiate(pattern, binding)
            rep.instances += 1
            hit = find_falsifying(inst, policy)
            if hit:
                rep.counterexamples.append((render(inst), hit[0], hit[1]))
        report["schemes"].append(rep.to_json())
        note(f"scheme {name}: {rep.instances} instances, {len(rep.counterexamples)} counterexamples")

    # program schemes
    for name, (kind, lhs, rhs) in PROGRAM_SCHEMES.items():
        rep = SchemeReport(name, "program")
        metas = metavariables(lhs) | metavariables(rhs)
        for binding in pool.assignments(metas, instances_per_scheme):
            j = ProgramJudgement(kind, instantiate(lhs, binding), instantiate(rhs, binding))
            rep.instances += 1
            hit = find_judgement_violation(j, policy)
            if hit:
                rep.counterexamples.append((j.render(), hit[0], list(hit[1])))
        report["schemes"].append(rep.to_json())
        note(f"scheme {name}: {rep.instances} instances, {len(rep.counterexamples)} counterexamples")

    # the cross-sort test bridge
    rep = SchemeReport("TP", "bridge")
    for binding in pool.assignments({"p", "q"}, instances_per_scheme):
        rep.instances += 1
        hit = _check_tp_instance(binding, policy)
        if hit:
            rep.counterexamples.append((f"TP at {render(binding['p'])} / {render(binding['q'])}", hit[0], hit[1]))
    report["schemes"].append(rep.to_json())
    note(f"scheme TP: {rep.instances} instances, {len(rep.counterexamples)} counterexamples")

    # the cycle-transfer scheme under its usage discipline
    rep = SchemeReport("C", "cycle-transfer")
    rng = random.Random(pool.seed + 99)
    produced = 0
    while produced < instances_per_scheme:
        b2 = pool.random_program(rng, 1)
        b3 = pool.random_program(rng, 1)
        chi = pool.random_formula(rng, 1)
        beta1 = Test(chi)
        from .calculus import rule_c_patterns

        old, new = rule_c_patterns(beta1, b2, b3, FALSE)
        host = seq_all(old)
        if rng.random() < 0.3:
            host = Inter(host, pool.random_program(rng, 1))
        rewritten, count = rule_c_rewrite(host, beta1, b2, b3, FALSE)
        if count == 0:
            continue
        produced += 1
        rep.instances += 1
        j = ProgramJudgement("=>", loop(host), loop(rewritten))
        hit = find_judgement_violation(j, policy)
        if hit:
            rep.counterexamples.append((j.render(), hit[0], list(hit[1])))
    report["schemes"].append(rep.to_json())
    note(f"scheme C: {rep.instances} instances, {len(rep.counterexamples)} counterexamples")

    # rules as validity preservation
    for rule in ("MP", "Gen", "USub", "PSub"):
        rep = SchemeReport(rule, "rule")
        rng = random.Random(pool.seed + hash(rule) % 1000)
        gen = _rule_conclusions(rule, pool, rng)
        for _ in range(rule_samples):
            conclusion = next(gen)
            rep.instances += 1
            hit = find_falsifying(conclusion, policy)
            if hit:
                rep.counterexamples.append((render(conclusion), hit[0], hit[1]))
        report["rules"].append(rep.to_json())
        note(f"rule {rule}: {rep.instances} conclusions, {len(rep.counterexamples)} counterexamples")

    # mutation check: corrupted schemes must be caught
    for name, (kind, payload) in _MUTANTS.items():
        found = None
        tried = 0
        if kind == "formula":
            metas = metavariables(payload)
            for binding in pool.assignments(metas, mutant_instances):
                tried += 1
                inst = instantiate(payload, binding)
                hit = find_falsifying(inst, policy)
                if hit:
                    found = render(inst)
                    break
        else:
            jkind, lhs, rhs = payload
            metas = metavariables(lhs) | metavariables(rhs)
            for binding in pool.assignments(metas, mutant_instances):
                tried += 1
                j = ProgramJudgement(jkind, instantiate(lhs, binding), instantiate(rhs, binding))
                hit = find_judgement_violation(j, policy)
                if hit:
                    found = j.render()
                    break
        report["mutants"].append({
            "name": name,
            "instances_tried": tried,
            "counterexample_found": found is not None,
            "witness": found,
        })
        note(f"mutant {name}: {'caught' if found else 'NOT CAUGHT'} after {tried} instances")

    report["elapsed_s"] = round(time.time() - t0, 2)
    report["total_counterexamples"] = sum(len(s["counterexamples"]) for s in report["schemes"]) + sum(
        len(r["counterexamples"]) for r in report["rules"]
    )
    report["all_mutants_caught"] = all(m["counterexample_found"] for m in report["mutants"])
    return report


# ---------------------------------------------------------------------------
# Countermodel minimization
# ---------------------------------------------------------------------------

def minimize_countermodel(k: KripkeStructure, u: str, f: Formula) -> tuple[KripkeStructure, str]:
    """Greedy deletion of worlds, edges and valuation entries while f stays
    false at u."""
    if evaluate(k, u, f, strict=False):
        raise ValueError("formula is not false at the given world")

    def still_bad(candidate: KripkeStructure) -> bool:
        return not evaluate(candidate, u, f, strict=False)

    changed = True
    while changed:
        changed = False
        for w in sorted(k.worlds):
            if w == u:
                continue
            trimmed = KripkeStructure.make(
                tuple(x for x in k.worlds if x != w),
                {name: vs - {w} for name, vs in k.valuation},
                {name: frozenset(e for e in es if w not in e) for name, es in k.edges},
            )
            if still_bad(trimmed):
                k = trimmed
                changed = True
                break
        if changed:
            continue
        for name, es in k.edges:
            for e in sorted(es):
                trimmed = KripkeStructure.make(
                    k.worlds,
                    dict(k.valuation),
                    {m: (fs - {e} if m == name else fs) for m, fs in k.edges},
                )
                if still_bad(trimmed):
                    k = trimmed
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        for name, vs in k.valuation:
            for w in sorted(vs):
                trimmed = KripkeStructure.make(
                    k.worlds,
                    {m: (ws - {w} if m == name else ws) for m, ws in k.valuation},
                    dict(k.edges),
                )
                if still_bad(trimmed):
                    k = trimmed
                    changed = True
                    break
            if changed:
                break
    return k, u
