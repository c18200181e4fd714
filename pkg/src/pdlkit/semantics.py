"""Finite Kripke structures: evaluation, program relations, witness graphs.

A structure carries a finite ordered world set, one world set per proposition
and one edge relation per atomic program.  Formula evaluation and program
denotation are mutually recursive through tests and are memoized per
structure.

Witness graphs certify single program transitions: a transition u -alpha-> v
holds exactly when some sub-structure assembled from atomic edges (plus the
nodes where tests were passed) supports it.  On top of the enumeration this
module provides minimality checking, articulation nodes, and two constructive
operations on minimal witness graphs: splitting a program at an articulation
node into a sequential composition, and excising a loop region into a test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .syntax import (
    TAUT_PROP,
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
    TRUE,
    Union,
    Vocabulary,
    diamond,
    flatten_seq,
    is_loop,
    loop,
    render_program,
    seq_all,
    symbols_of,
)
from .normal_form import classify, ProgramClass

World = str
Edge = tuple[World, str, World]


class UnknownSymbolError(PdlError):
    pass


class PreconditionError(PdlError):
    """A documented operation precondition was violated."""


@dataclass(frozen=True)
class KripkeStructure:
    """Immutable finite structure; worlds keep their given order."""

    worlds: tuple[World, ...]
    valuation: tuple[tuple[str, frozenset[World]], ...]
    edges: tuple[tuple[str, frozenset[tuple[World, World]]], ...]

    def __post_init__(self):
        wset = set(self.worlds)
        if len(self.worlds) != len(wset):
            raise ValueError("duplicate worlds")
        for name, vs in self.valuation:
            if not vs <= wset:
                raise ValueError(f"valuation of {name!r} mentions unknown worlds")
        for name, es in self.edges:
            for u, v in es:
                if u not in wset or v not in wset:
                    raise ValueError(f"edge relation of {name!r} mentions unknown worlds")

    @staticmethod
    def make(worlds: Iterable[World], valuation=None, edges=None) -> "KripkeStructure":
        valuation = valuation or {}
        edges = edges or {}
        return KripkeStructure(
            tuple(worlds),
            tuple(sorted((k, frozenset(v)) for k, v in valuation.items())),
            tuple(sorted((k, frozenset(map(tuple, v))) for k, v in edges.items())),
        )

    # -- accessors

    @property
    def valuation_map(self) -> dict[str, frozenset[World]]:
        return dict(self.valuation)

    @property
    def edge_map(self) -> dict[str, frozenset[tuple[World, World]]]:
        return dict(self.edges)

    def prop_worlds(self, name: str) -> frozenset[World]:
        for k, v in self.valuation:
            if k == name:
                return v
        return frozenset()

    def program_edges(self, name: str) -> frozenset[tuple[World, World]]:
        for k, v in self.edges:
            if k == name:
                return v
        return frozenset()

    def declared_symbols(self) -> tuple[frozenset[str], frozenset[str]]:
        return frozenset(k for k, _ in self.valuation), frozenset(k for k, _ in self.edges)

    # -- JSON

    @staticmethod
    def from_json(data: dict) -> "KripkeStructure":
        return KripkeStructure.make(
            data["worlds"],
            {k: frozenset(v) for k, v in data.get("props", {}).items()},
            {k: frozenset(tuple(e) for e in v) for k, v in data.get("programs", {}).items()},
        )

    def to_json(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "props": {k: sorted(v) for k, v in self.valuation},
            "programs": {k: sorted(map(list, v)) for k, v in self.edges},
        }

    @staticmethod
    def loads(text: str) -> "KripkeStructure":
        return KripkeStructure.from_json(json.loads(text))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# Evaluation and denotation
# ---------------------------------------------------------------------------

# Session-local memo tables keyed by structure identity first, so entries for
# throwaway structures can be dropped with clear_caches().
_REL_CACHE: dict[tuple[int, Program], frozenset] = {}
_SAT_CACHE: dict[tuple[int, Formula], frozenset] = {}
_CACHE_OWNERS: dict[int, KripkeStructure] = {}


def clear_caches() -> None:
    _REL_CACHE.clear()
    _SAT_CACHE.clear()
    _CACHE_OWNERS.clear()


def _check_symbols(k: KripkeStructure, x) -> None:
    props, progs = symbols_of(x)
    have_props, have_progs = k.declared_symbols()
    missing = (props - have_props) | (progs - have_progs)
    if missing:
        raise UnknownSymbolError(f"symbols not interpreted by the structure: {sorted(missing)}")


def sat_worlds(k: KripkeStructure, f: Formula) -> frozenset[World]:
    """The set of worlds satisfying f."""
    key = (id(k), f)
    hit = _SAT_CACHE.get(key)
    if hit is not None:
        return hit
    _CACHE_OWNERS[id(k)] = k
    if isinstance(f, Prop):
        out = k.prop_worlds(f.name)
    elif isinstance(f, Not):
        out = frozenset(k.worlds) - sat_worlds(k, f.sub)
    elif isinstance(f, Or):
        out = sat_worlds(k, f.left) | sat_worlds(k, f.right)
    elif isinstance(f, Diamond):
        rel = relation(k, f.program)
        good = sat_worlds(k, f.sub)
        out = frozenset(u for u, v in rel if v in good)
    else:
        raise TypeError(f"not a formula: {f!r}")
    _SAT_CACHE[key] = out
    return out


def evaluate(k: KripkeStructure, u: World, f: Formula, strict: bool = True) -> bool:
    """Truth of f at world u.  With strict=True, all symbols of f must be
    interpreted by the structure (the tautology witness is always allowed)."""
    if u not in k.worlds:
        raise ValueError(f"unknown world {u!r}")
    if strict:
        _check_symbols(k, f)
    return u in sat_worlds(k, f)


def relation(k: KripkeStructure, p: Program) -> frozenset[tuple[World, World]]:
    """The binary relation denoted by a program."""
    key = (id(k), p)
    hit = _REL_CACHE.get(key)
    if hit is not None:
        return hit
    _CACHE_OWNERS[id(k)] = k
    if isinstance(p, Atomic):
        out = k.program_edges(p.name)
    elif isinstance(p, Test):
        good = sat_worlds(k, p.formula)
        out = frozenset((w, w) for w in good)
    elif isinstance(p, Seq):
        left = relation(k, p.left)
        right = relation(k, p.right)
        by_src: dict[World, set[World]] = {}
        for x, y in right:
            by_src.setdefault(x, set()).add(y)
        out = frozenset((u, w) for u, v in left for w in by_src.get(v, ()))
    elif isinstance(p, Union):
        out = relation(k, p.left) | relation(k, p.right)
    elif isinstance(p, Inter):
        out = relation(k, p.left) & relation(k, p.right)
    else:
        raise TypeError(f"not a program: {p!r}")
    _REL_CACHE[key] = out
    return out


# ---------------------------------------------------------------------------
# Witness graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionQuery:
    structure: KripkeStructure
    source: World
    program: Program
    target: World

    def __post_init__(self):
        if self.source not in self.structure.worlds or self.target not in self.structure.worlds:
            raise ValueError("source/target must be worlds of the structure")


@dataclass(frozen=True)
class WitnessGraph:
    """Nodes plus atomic-labelled edges certifying one transition."""

    nodes: frozenset[World]
    edges: frozenset[Edge]
    endpoints: tuple[World, World]

    def key(self):
        return (tuple(sorted(self.nodes)), tuple(sorted(self.edges)))

    def to_dot(self, name: str = "witness") -> str:
        lines = [f"digraph {name} {{"]
        u, v = self.endpoints
        for w in sorted(self.nodes):
            shape = ' [shape=doublecircle]' if w in (u, v) else ""
            lines.append(f'  "{w}"{shape};')
        for x, a, y in sorted(self.edges):
            lines.append(f'  "{x}" -> "{y}" [label="{a}"];')
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class WitnessEnumeration:
    graphs: tuple[WitnessGraph, ...]
    truncated: bool

    def __iter__(self):
        return iter(self.graphs)

    def __len__(self):
        return len(self.graphs)

    def __bool__(self):
        return bool(self.graphs)


def _merge(a: WitnessGraph, b: WitnessGraph, endpoints) -> WitnessGraph:
    return WitnessGraph(a.nodes | b.nodes, a.edges | b.edges, endpoints)


def _witnesses(k, u, p, v, cap, allowed: Optional[frozenset[Edge]]) -> tuple[list[WitnessGraph], bool]:
    """Inductive enumeration; `allowed` restricts usable atomic edges."""
    truncated = False

    def atomic_ok(x, name, y):
        return allowed is None or (x, name, y) in allowed

    if isinstance(p, Atomic):
        if (u, v) in k.program_edges(p.name) and atomic_ok(u, p.name, v):
            return [WitnessGraph(frozenset({u, v}), frozenset({(u, p.name, v)}), (u, v))], False
        return [], False
    if isinstance(p, Test):
        if u == v and u in sat_worlds(k, p.formula):
            return [WitnessGraph(frozenset({u}), frozenset(), (u, v))], False
        return [], False
    if isinstance(p, Seq):
        out: list[WitnessGraph] = []
        seen = set()
        for w in k.worlds:
            left, tl = _witnesses(k, u, p.left, w, cap, allowed)
            if not left:
                truncated |= tl
                continue
            right, tr = _witnesses(k, w, p.right, v, cap, allowed)
            truncated |= tl or tr
            for g1 in left:
                for g2 in right:
                    g = _merge(g1, g2, (u, v))
                    if g.key() not in seen:
                        seen.add(g.key())
                        out.append(g)
                        if len(out) >= cap:
                            return out, True
        return out, truncated
    if isinstance(p, Inter):
        left, tl = _witnesses(k, u, p.left, v, cap, allowed)
        right, tr = _witnesses(k, u, p.right, v, cap, allowed)
        truncated = tl or tr
        out = []
        seen = set()
        for g1 in left:
            for g2 in right:
                g = _merge(g1, g2, (u, v))
                if g.key() not in seen:
                    seen.add(g.key())
                    out.append(g)
                    if len(out) >= cap:
                        return out, True
        return out, truncated
    if isinstance(p, Union):
        left, tl = _witnesses(k, u, p.left, v, cap, allowed)
        right, tr = _witnesses(k, u, p.right, v, cap, allowed)
        out = []
        seen = set()
        for g in left + right:
            if g.key() not in seen:
                seen.add(g.key())
                out.append(g)
                if len(out) >= cap:
                    return out, True
        return out, tl or tr
    raise TypeError(f"not a program: {p!r}")


def witness_graphs(q: TransitionQuery, cap: int = 256) -> WitnessEnumeration:
    """All witness graphs for the queried transition, deduplicated by node and
    edge sets, in a fixed canonical order; truncation at `cap` is flagged."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    graphs, truncated = _witnesses(q.structure, q.source, q.program, q.target, cap, None)
    graphs.sort(key=WitnessGraph.key)
    return WitnessEnumeration(tuple(graphs), truncated)


def is_witness_graph(g: WitnessGraph, q: TransitionQuery, cap: int = 4096) -> bool:
    target = (frozenset(g.nodes), frozenset(g.edges))
    for h in witness_graphs(q, cap):
        if (h.nodes, h.edges) == target:
            return True
    return False


def _subgraphs(g: WitnessGraph):
    """All proper sub-structures reachable by dropping edges and isolated
    nodes (endpoints always kept)."""
    edges = sorted(g.edges)
    u, v = g.endpoints
    n = len(edges)
    for mask in range(2 ** n - 1, -1, -1):
        kept = frozenset(e for i, e in enumerate(edges) if mask >> i & 1)
        used = {u, v} | {x for x, _, y in kept} | {y for x, _, y in kept}
        isolated = sorted(g.nodes - used)
        m = len(isolated)
        for imask in range(2 ** m):
            nodes = used | {w for i, w in enumerate(isolated) if imask >> i & 1}
            if kept == g.edges and nodes == g.nodes:
                continue
            yield WitnessGraph(frozenset(nodes), kept, g.endpoints)


def is_minimal_witness(g: WitnessGraph, q: TransitionQuery, cap: int = 4096) -> bool:
    """No proper sub-structure of g certifies the same transition.

    Checked against the full enumeration: every sub-witness is itself a
    witness graph, so it suffices to look for an enumerated witness properly
    contained in g.  (This also gives the intended answer on over-full graphs
    that the enumeration itself would never return, such as the union of both
    branch witnesses of a union program.)
    """
    enum = witness_graphs(q, cap)
    if enum.truncated:
        raise PreconditionError("witness enumeration truncated; raise the cap")
    for h in enum:
        if (h.nodes, h.edges) != (g.nodes, g.edges) and h.nodes <= g.nodes and h.edges <= g.edges:
            return False
    return True


# ---------------------------------------------------------------------------
# Articulation nodes
# ---------------------------------------------------------------------------

def _has_positive_path(edges: Iterable[Edge], u: World, w: World) -> bool:
    succ: dict[World, set[World]] = {}
    for x, _, y in edges:
        succ.setdefault(x, set()).add(y)
    frontier = set(succ.get(u, set()))
    seen = set(frontier)
    while frontier:
        if w in frontier:
            return True
        nxt = set()
        for x in frontier:
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    nxt.add(y)
        frontier = nxt
    return False


def articulation_nodes(g: WitnessGraph, u: World, w: World) -> frozenset[World]:
    """Nodes other than the endpoints that lie on every directed path of
    positive length from u to w inside g."""
    if not _has_positive_path(g.edges, u, w):
        raise PreconditionError(f"no positive-length path from {u!r} to {w!r} in the graph")
    out = set()
    for v in g.nodes - {u, w}:
        remaining = [e for e in g.edges if v not in (e[0], e[2])]
        if not _has_positive_path(remaining, u, w):
            out.add(v)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Gateway splitting
# ---------------------------------------------------------------------------

class GatewayError(PreconditionError):
    pass


def _contains_seq(p: Program) -> bool:
    if isinstance(p, Seq):
        return True
    if isinstance(p, (Union, Inter)):
        return _contains_seq(p.left) or _contains_seq(p.right)
    return False


def _witnesses_within(k, u, p, v, g: WitnessGraph, cap: int = 512) -> list[WitnessGraph]:
    graphs, truncated = _witnesses(k, u, p, v, cap, frozenset(g.edges))
    if truncated:
        raise GatewayError("inner witness enumeration truncated")
    graphs.sort(key=WitnessGraph.key)
    return [h for h in graphs if h.nodes <= g.nodes]


def _seq_decompositions(k, parts, u, v, g):
    """Assignments of midpoints and in-graph witnesses to a flattened
    composition; yields lists [(m_{i-1}, part, m_i, witness)]."""
    if len(parts) == 1:
        for h in _witnesses_within(k, u, parts[0], v, g):
            yield [(u, parts[0], v, h)]
        return
    head, rest = parts[0], parts[1:]
    for m in g.nodes:
        heads = _witnesses_within(k, u, head, m, g)
        if not heads:
            continue
        for tail in _seq_decompositions(k, rest, m, v, g):
            for h in heads:
                yield [(u, head, m, h)] + tail


def gateway_split(g: WitnessGraph, u: World, w: World, v: World, alpha: Program,
                  k: KripkeStructure) -> tuple[Program, Program]:
    """Split alpha at an articulation node of its minimal witness graph.

    Returns (beta1, beta2) with (u,v) in the denotation of beta1, (v,w) in the
    denotation of beta2, and beta1;beta2 included in alpha in every structure.
    The construction recurses on the program: compositions split at the
    midpoint or inside one factor; intersections split both branches and
    recombine them componentwise.
    """
    if classify(alpha) is not ProgramClass.FORWARD or not _contains_seq(alpha):
        raise GatewayError("program must be a forward program containing a composition")
    if v in (u, w):
        raise GatewayError("the split node must differ from both endpoints")
    if v not in articulation_nodes(g, u, w):
        raise GatewayError(f"{v!r} is not an articulation node for {u!r} -> {w!r}")
    if not is_minimal_witness(g, TransitionQuery(k, u, alpha, w)):
        raise GatewayError("witness graph is not minimal for the query")
    beta1, beta2 = _split(g, u, w, v, alpha, k)
    if (u, v) not in relation(k, beta1) or (v, w) not in relation(k, beta2):
        raise GatewayError("internal: constructed split violates its contract")
    return beta1, beta2


def _split(g, u, w, v, alpha, k) -> tuple[Program, Program]:
    parts = flatten_seq(alpha)
    if len(parts) > 1:
        for decomposition in _seq_decompositions(k, parts, u, w, g):
            mids = [step[2] for step in decomposition[:-1]]
            # articulation as an explicit midpoint: split the spine there
            for i, m in enumerate(mids):
                if m == v:
                    return seq_all(parts[: i + 1]), seq_all(parts[i + 1:])
            # otherwise recurse into the factor whose witness pinches at v
            for i, (x, part, y, h) in enumerate(decomposition):
                if v not in h.nodes or v in (x, y):
                    continue
                if not _contains_seq(part):
                    continue
                if not _has_positive_path(h.edges, x, y):
                    continue
                if v not in articulation_nodes(h, x, y):
                    continue
                b1, b2 = _split(h, x, y, v, part, k)
                left = parts[:i] + [b1]
                right = [b2] + parts[i + 1:]
                return seq_all(left), seq_all(right)
        raise GatewayError("no composition decomposition isolates the split node")
    if isinstance(alpha, Inter):
        l1 = _witnesses_within(k, u, alpha.left, w, g)
        l2 = _witnesses_within(k, u, alpha.right, w, g)
        for g1 in l1:
            for g2 in l2:
                try:
                    b1l, b2l = _split(g1, u, w, v, alpha.left, k)
                    b1r, b2r = _split(g2, u, w, v, alpha.right, k)
                except GatewayError:
                    continue
                return Inter(b1l, b1r), Inter(b2l, b2r)
        raise GatewayError("no intersection branch decomposition splits at the node")
    raise GatewayError("program has no composition to split")


# ---------------------------------------------------------------------------
# Loop excision
# ---------------------------------------------------------------------------

def excise_loop(g: WitnessGraph, u: World, w: World, v: World,
                region_edges: frozenset[Edge], alpha: Program,
                k: KripkeStructure) -> Program:
    """Replace the part of a composition that loops at v through the given
    edge region by the test `<beta^>true ?`, where beta is the looping part.

    Preconditions: the region is nonempty; alpha flattens to a composition
    that admits a witness decomposition inside g in which the region is
    covered exactly by a block of factors starting and ending at v, and is
    untouched elsewhere.  The result denotes a subrelation of alpha in every
    structure: the excised test asserts precisely that the loop exists.
    """
    if not region_edges:
        raise PreconditionError("region must be a nonempty set of edges")
    if not region_edges <= g.edges:
        raise PreconditionError("region edges must belong to the witness graph")
    parts = flatten_seq(alpha)
    if len(parts) < 2:
        raise PreconditionError("program must be a composition")
    for decomposition in _seq_decompositions(k, parts, u, w, g):
        points = [u] + [step[2] for step in decomposition]
        for i in range(len(parts)):
            if points[i] != v:
                continue
            for j in range(i + 1, len(parts) + 1):
                if points[j] != v:
                    continue
                if i == 0 and j == len(parts):
                    continue  # excising everything would leave no program
                block = decomposition[i:j]
                outside = decomposition[:i] + decomposition[j:]
                block_edges = frozenset().union(*(step[3].edges for step in block)) if block else frozenset()
                outside_edges = frozenset().union(*(step[3].edges for step in outside)) if outside else frozenset()
                if region_edges <= block_edges and not (region_edges & outside_edges):
                    body = seq_all(parts[i:j])
                    guard = Test(diamond(loop(body), TRUE))
                    result = seq_all(parts[:i] + [guard] + parts[j:])
                    if not relation(k, result) <= relation(k, alpha):
                        raise PreconditionError("internal: excision broke relation containment")
                    return result
    raise PreconditionError("no decomposition confines the region to a loop at the node")
