"""Command-line entry point.

Every subcommand is a thin adapter over the library: parse/print, evaluate,
program relations, witness graphs, gateway splits, normalization, proof
checking, large-program checks, and bounded model search.

Exit codes: 0 = ok / valid / model found; 1 = countermodel / refuted /
no model within the bound; 2 = usage, parse, or precondition error;
3 = internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .bulk import BACKEND_NAME
from .calculus import check_proof, proof_from_json
from .fixtures import (
    CYCLIC_FORMULA,
    SPLIT_CORE,
    SPLIT_PINNED,
    SPLIT_VOCAB,
    all_single_line_corruptions_fail,
    refutation_proof,
)
from .large_programs import (
    LargeLoop,
    LabelledTransition,
    enumerate_instances,
    is_consistent_loop,
    is_consistent_transition,
    large_from_json,
    saturation_gap,
    transition_from_json,
)
from .model_search import (
    Countermodel,
    InstancePool,
    ModelFound,
    NoModelUpTo,
    SearchBudget,
    TierPolicy,
    ValidUpTo,
    check_program_judgement,
    check_validity,
    find_model,
    minimize_countermodel,
    soundness_harness,
)
from .normal_form import classify, normalize, normalize_program_in_context
from .semantics import (
    KripkeStructure,
    PreconditionError,
    TransitionQuery,
    UnknownSymbolError,
    articulation_nodes,
    evaluate,
    gateway_split,
    is_minimal_witness,
    relation,
    witness_graphs,
)
from .syntax import (
    ParseError,
    PdlError,
    SortError,
    Vocabulary,
    parse_formula,
    parse_judgement,
    parse_program,
    render,
    render_program,
    symbols_of,
)

GRAMMAR_HELP = """\
Concrete syntax (binding tightens downward):

  formulas   f ::= ident | true | false | ~f | <p>f | [p]f
                 | f & f | f | f | f -> f | f <-> f
  programs   p ::= ident | f? | p^ | p;p | p & p | p + p | (p)

  `&` is conjunction between formulas and intersection between programs;
  position decides the sort.  A test applies `?` to a unary-level formula;
  parenthesise binary formulas: (f & g)?.  `p^` abbreviates p & true?.
  Precedence: formulas  & > | > -> > <->   programs  ; > & > +
  Judgements for pjudge/proofs:  p => q  (inclusion),  p <=> q  (equality).
"""


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _vocab_from(args) -> Vocabulary | None:
    if getattr(args, "vocab", None):
        return Vocabulary.from_json(_load_json(args.vocab))
    return None


def _infer_vocab(f) -> Vocabulary:
    props, progs = symbols_of(f)
    return Vocabulary(props, progs)


def _emit(args, report: dict, human: str) -> None:
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(human)


def _jobs(args) -> int:
    if getattr(args, "jobs", None):
        return args.jobs
    return int(os.environ.get("PDLKIT_JOBS", "1"))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_parse(args) -> int:
    vocab = _vocab_from(args)
    if args.program:
        ast = parse_program(args.text, vocab)
        pretty = render_program(ast, sugar=not args.raw)
        cls = classify(ast).value
        _emit(args, {"status": "ok", "kind": "program", "pretty": pretty, "class": cls},
              f"{pretty}\n  class: {cls}")
    else:
        ast = parse_formula(args.text, vocab)
        pretty = render(ast, sugar=not args.raw)
        _emit(args, {"status": "ok", "kind": "formula", "pretty": pretty}, pretty)
    return 0


def cmd_eval(args) -> int:
    k = KripkeStructure.from_json(_load_json(args.model))
    props, progs = k.declared_symbols()
    vocab = Vocabulary(props, progs)
    f = parse_formula(args.text, vocab)
    value = evaluate(k, args.world, f)
    _emit(args, {"status": "ok", "value": value}, "true" if value else "false")
    return 0


def cmd_relation(args) -> int:
    k = KripkeStructure.from_json(_load_json(args.model))
    props, progs = k.declared_symbols()
    prog = parse_program(args.text, Vocabulary(props, progs))
    rel = sorted(relation(k, prog))
    _emit(args, {"status": "ok", "pairs": [list(e) for e in rel]},
          "\n".join(f"{u} -> {v}" for u, v in rel) or "(empty)")
    return 0


def cmd_witness(args) -> int:
    k = KripkeStructure.from_json(_load_json(args.model))
    props, progs = k.declared_symbols()
    prog = parse_program(args.text, Vocabulary(props, progs))
    q = TransitionQuery(k, args.source, prog, args.target)
    out = witness_graphs(q, cap=args.cap)
    payload = {
        "status": "ok" if out else "no-model-bounded",
        "count": len(out),
        "truncated": out.truncated,
        "graphs": [
            {"nodes": sorted(g.nodes), "edges": sorted(map(list, g.edges)),
             "minimal": is_minimal_witness(g, q)}
            for g in out
        ],
    }
    if args.dot and out:
        human = "\n\n".join(g.to_dot(f"w{i}") for i, g in enumerate(out))
    else:
        human = f"{len(out)} witness graph(s)" + (" [truncated]" if out.truncated else "")
        for g in out:
            human += f"\n  nodes={sorted(g.nodes)} edges={sorted(g.edges)}"
    _emit(args, payload, human)
    return 0 if out else 1


def cmd_gateway(args) -> int:
    k = KripkeStructure.from_json(_load_json(args.model))
    props, progs = k.declared_symbols()
    prog = parse_program(args.text, Vocabulary(props, progs))
    q = TransitionQuery(k, args.source, prog, args.target)
    for g in witness_graphs(q, cap=args.cap):
        if not is_minimal_witness(g, q):
            continue
        try:
            if args.via not in articulation_nodes(g, args.source, args.target):
                continue
        except PreconditionError:
            continue
        beta1, beta2 = gateway_split(g, args.source, args.target, args.via, prog, k)
        _emit(args, {
            "status": "ok",
            "beta1": render_program(beta1),
            "beta2": render_program(beta2),
            "witness": {"nodes": sorted(g.nodes), "edges": sorted(map(list, g.edges))},
        }, f"beta1 = {render_program(beta1)}\nbeta2 = {render_program(beta2)}")
        return 0
    raise _Exit(2, "no minimal witness graph has the requested articulation node")


def cmd_normalize(args) -> int:
    vocab = _vocab_from(args)
    if args.program:
        prog = parse_program(args.text, vocab)
        out, trace = normalize_program_in_context(prog)
        pretty = render_program(out)
        cls = classify(out).value
        payload = {"status": "ok", "pretty": pretty, "class": cls}
        human = f"{pretty}\n  class: {cls}"
    else:
        f = parse_formula(args.text, vocab)
        out, trace = normalize(f)
        pretty = render(out)
        payload = {"status": "ok", "pretty": pretty}
        human = pretty
    if args.trace:
        payload["trace"] = [{"axiom": ax, "at": pos} for ax, pos in trace.table()]
        human += "\n" + "\n".join(f"  {ax:<8} at {pos}" for ax, pos in trace.table())
    _emit(args, payload, human)
    return 0


def cmd_check_proof(args) -> int:
    data = _load_json(args.file)
    proof = proof_from_json(data, _vocab_from(args))
    result = check_proof(proof)
    if result.ok:
        _emit(args, {"status": "ok", "lines": len(proof)}, f"ok ({len(proof)} lines)")
        return 0
    _emit(args, {"status": "proof-error", "line": result.line_id, "reason": result.reason},
          f"line {result.line_id}: {result.reason}")
    return 1


def cmd_large(args) -> int:
    vocab = _vocab_from(args)
    if args.action == "instances":
        prog = large_from_json(_load_json(args.file), vocab)
        insts = [render_program(x) for x in enumerate_instances(prog)]
        _emit(args, {"status": "ok", "count": len(insts), "instances": insts}, "\n".join(insts))
        return 0
    if args.action == "check-transition":
        t = transition_from_json(_load_json(args.file), vocab)
        ok = is_consistent_transition(t)
        _emit(args, {"status": "ok" if ok else "countermodel", "consistent": ok},
              "consistent" if ok else "inconsistent")
        return 0 if ok else 1
    if args.action == "check-loop":
        data = _load_json(args.file)
        body = large_from_json(data["body"], vocab)
        phi = frozenset(parse_formula(t, vocab) for t in data.get("phi", []))
        ok = is_consistent_loop(LargeLoop(body), phi)
        _emit(args, {"status": "ok" if ok else "countermodel", "consistent": ok},
              "consistent" if ok else "inconsistent")
        return 0 if ok else 1
    if args.action == "gap":
        t = transition_from_json(_load_json(args.file), vocab)
        gaps = saturation_gap(t)
        payload = {
            "status": "ok",
            "gaps": {"/".join(map(str, path)): sorted(render(f) for f in fs) for path, fs in gaps.items()},
        }
        human = "\n".join(
            f"{'/'.join(map(str, path)) or 'root'}: " + (", ".join(sorted(render(f) for f in fs)) or "(closed)")
            for path, fs in sorted(gaps.items())
        )
        _emit(args, payload, human or "(no test sets)")
        return 0
    raise _Exit(2, f"unknown large action {args.action!r}")


def _search_budget(args, f) -> SearchBudget:
    vocab = _vocab_from(args) or _infer_vocab(f)
    if args.random:
        seed = args.seed if args.seed is not None else int.from_bytes(os.urandom(4), "big")
        print(f"# seed: {seed}", file=sys.stderr)
        return SearchBudget.randomized(args.max_worlds, vocab, args.random, seed)
    return SearchBudget.exhaustive(args.max_worlds, vocab)


def cmd_sat(args) -> int:
    f = parse_formula(args.text, _vocab_from(args))
    budget = _search_budget(args, f)
    outcome = find_model(f, budget, jobs=_jobs(args))
    if isinstance(outcome, ModelFound):
        _emit(args, outcome.to_json(),
              f"model found at world {outcome.world}:\n{json.dumps(outcome.structure.to_json(), indent=2)}")
        return 0
    caveat = "no model within the bound (bounded search is not a refutation)"
    _emit(args, outcome.to_json(), caveat)
    return 1


def cmd_valid(args) -> int:
    f = parse_formula(args.text, _vocab_from(args))
    budget = _search_budget(args, f)
    outcome = check_validity(f, budget, jobs=_jobs(args))
    if isinstance(outcome, ValidUpTo):
        _emit(args, outcome.to_json(), f"valid on all structures with <= {outcome.bound} worlds")
        return 0
    k, w = outcome.structure, outcome.world
    if args.minimize:
        k, w = minimize_countermodel(k, w, f)
    payload = Countermodel(k, w).to_json()
    _emit(args, payload, f"countermodel at world {w}:\n{json.dumps(k.to_json(), indent=2)}")
    return 1


def cmd_pjudge(args) -> int:
    kind, left, right = parse_judgement(args.text, _vocab_from(args))
    probe = parse_formula("true")
    from .syntax import Diamond, Union

    carrier = Diamond(Union(left, right), probe)
    vocab = _vocab_from(args) or _infer_vocab(carrier)
    if args.random:
        seed = args.seed if args.seed is not None else int.from_bytes(os.urandom(4), "big")
        print(f"# seed: {seed}", file=sys.stderr)
        budget = SearchBudget.randomized(args.max_worlds, vocab, args.random, seed)
    else:
        budget = SearchBudget.exhaustive(args.max_worlds, vocab)
    outcome = check_program_judgement(left, right, kind, budget, jobs=_jobs(args))
    if isinstance(outcome, ValidUpTo):
        _emit(args, outcome.to_json(), f"holds on all structures with <= {outcome.bound} worlds")
        return 0
    _emit(args, outcome.to_json(),
          f"violated at pair {outcome.pair}:\n{json.dumps(outcome.structure.to_json(), indent=2)}")
    return 1


def cmd_axioms_test(args) -> int:
    pool = InstancePool(depth=args.depth, seed=args.seed if args.seed is not None else 7)
    policy = TierPolicy(max_worlds=args.max_worlds)
    if args.seed is None:
        print("# seed: 7 (default)", file=sys.stderr)
    report = soundness_harness(
        instances_per_scheme=args.instances,
        pool=pool,
        policy=policy,
        rule_samples=args.rule_samples,
        progress=(lambda msg: print(f"# {msg}", file=sys.stderr)) if args.progress else None,
    )
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, default=lambda o: o.to_json() if hasattr(o, "to_json") else str(o))
    clean = report["total_counterexamples"] == 0 and report["all_mutants_caught"]
    summary = (
        f"schemes: {len(report['schemes'])}, rules: {len(report['rules'])}, "
        f"counterexamples: {report['total_counterexamples']}, "
        f"mutants caught: {report['all_mutants_caught']}, "
        f"elapsed: {report['elapsed_s']}s, backend: {report['backend']}"
    )
    _emit(args, {"status": "ok" if clean else "countermodel", "summary": summary}, summary)
    return 0 if clean else 1


def cmd_fixtures(args) -> int:
    jobs = _jobs(args)
    results: list[tuple[str, bool, str]] = []

    def run(name: str, fn):
        t0 = time.time()
        try:
            ok, detail = fn()
        except Exception as exc:  # pragma: no cover - fixture crash is a failure
            ok, detail = False, f"error: {exc}"
        results.append((name, ok, f"{detail} [{time.time() - t0:.1f}s]"))

    def split_core():
        found = find_model(SPLIT_CORE, SearchBudget.exhaustive(3, SPLIT_VOCAB), jobs)
        small = find_model(SPLIT_CORE, SearchBudget.exhaustive(2, SPLIT_VOCAB), jobs)
        ok = isinstance(found, ModelFound) and isinstance(small, ModelFound)
        return ok, f"satisfiable; true exhaustive minimum is {len(small.structure.worlds)} worlds"

    def split_pinned():
        none2 = find_model(SPLIT_PINNED, SearchBudget.exhaustive(2, SPLIT_VOCAB), jobs)
        found3 = find_model(SPLIT_PINNED, SearchBudget.exhaustive(3, SPLIT_VOCAB), jobs)
        ok = isinstance(none2, NoModelUpTo) and isinstance(found3, ModelFound)
        return ok, "no model with <= 2 worlds; minimal model has 3 (two disjoint successor copies)"

    def cyclic():
        bound = 4 if args.deep else 3
        out = find_model(CYCLIC_FORMULA, SearchBudget.exhaustive(bound, SPLIT_VOCAB), jobs)
        proof = refutation_proof()
        checked = check_proof(proof).ok
        corrupt = all_single_line_corruptions_fail(proof)
        ok = isinstance(out, NoModelUpTo) and checked and corrupt
        return ok, f"no model up to {bound} worlds; refutation checks; all corruptions fail"

    def harness():
        report = soundness_harness(instances_per_scheme=40, rule_samples=40, mutant_instances=40,
                                   policy=TierPolicy(samples=512))
        ok = report["total_counterexamples"] == 0 and report["all_mutants_caught"]
        return ok, f"0 counterexamples across {len(report['schemes'])} schemes; mutants caught"

    run("split-core", split_core)
    run("split-pinned (empty-vocabulary variant)", split_pinned)
    run("cyclic-test", cyclic)
    run("axiom-harness (reduced)", harness)

    all_ok = all(ok for _, ok, _ in results)
    payload = {
        "status": "ok" if all_ok else "countermodel",
        "fixtures": [{"name": n, "pass": ok, "detail": d} for n, ok, d in results],
    }
    human = "\n".join(f"{'PASS' if ok else 'FAIL'}  {n}: {d}" for n, ok, d in results)
    _emit(args, payload, human)
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="pdlkit", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--ascii-help", action="store_true", help="print the concrete grammar and exit")
    sub = top.add_subparsers(dest="command")

    def common(p, text=True, vocab=True):
        if text:
            p.add_argument("text", help="formula or program text")
        if vocab:
            p.add_argument("--vocab", help="vocabulary JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("parse", help="parse and pretty-print")
    common(p)
    p.add_argument("--program", action="store_true", help="parse as a program")
    p.add_argument("--raw", action="store_true", help="print without derived connectives")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("eval", help="evaluate a formula in a model")
    common(p, vocab=False)
    p.add_argument("--model", required=True, help="Kripke structure JSON file")
    p.add_argument("--world", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("relation", help="program denotation in a model")
    common(p, vocab=False)
    p.add_argument("--model", required=True)
    p.set_defaults(fn=cmd_relation)

    p = sub.add_parser("witness", help="enumerate witness graphs for a transition")
    common(p, vocab=False)
    p.add_argument("--model", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--cap", type=int, default=256)
    p.add_argument("--dot", action="store_true", help="emit DOT graphs")
    p.set_defaults(fn=cmd_witness)

    p = sub.add_parser("gateway", help="split a program at an articulation node")
    common(p, vocab=False)
    p.add_argument("--model", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--via", required=True, help="the articulation node")
    p.add_argument("--cap", type=int, default=256)
    p.set_defaults(fn=cmd_gateway)

    p = sub.add_parser("normalize", help="rewrite into the cyclic/forward normal form")
    common(p)
    p.add_argument("--program", action="store_true")
    p.add_argument("--trace", action="store_true", help="print the applied rewrite steps")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("check-proof", help="check a proof JSON file")
    p.add_argument("file")
    p.add_argument("--vocab")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check_proof)

    p = sub.add_parser("large", help="large-program operations")
    p.add_argument("action", choices=["check-transition", "check-loop", "instances", "gap"])
    p.add_argument("file")
    p.add_argument("--vocab")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_large)

    for name, fn in (("sat", cmd_sat), ("valid", cmd_valid)):
        p = sub.add_parser(name, help=f"bounded {name} check")
        common(p)
        p.add_argument("--max-worlds", type=int, default=3)
        p.add_argument("--random", type=int, default=0, help="sample this many structures per size")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        if name == "valid":
            p.add_argument("--minimize", action="store_true", help="shrink the countermodel")
        p.set_defaults(fn=fn)

    p = sub.add_parser("pjudge", help="check a program judgement (=> or <=>)")
    common(p)
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--random", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.set_defaults(fn=cmd_pjudge)

    p = sub.add_parser("axioms-test", help="empirical soundness sweep of the axiom system")
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--rule-samples", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_axioms_test)

    p = sub.add_parser("fixtures", help="run the shipped fixture suite")
    p.add_argument("--deep", action="store_true", help="search the cyclic formula up to 4 worlds")
    p.add_argument("--jobs", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_fixtures)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.ascii_help:
        print(GRAMMAR_HELP)
        return 0
    if not getattr(args, "fn", None):
        parser.print_help()
        return 2
    try:
        return args.fn(args)
    except _Exit as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except (ParseError, SortError, UnknownSymbolError, PreconditionError, FileNotFoundError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PdlError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except AssertionError as exc:  # invariant breach
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
