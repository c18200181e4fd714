"""Compilation of formulas/programs to batch instructions over structure spaces.

A `StructureSpace` enumerates every Kripke structure with a fixed world count
over a fixed vocabulary: each structure is one integer index whose bits are
the proposition memberships followed by the edge relations.  Formulas compile
to instruction lists executed by a batch backend over index ranges; the
compiled backend (`pdlkit._bulkcy`) is preferred and a numpy fallback
(`pdlkit._bulkpy`) is selected when it is unavailable or PDLKIT_FORCE_PY is
set.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import _bulkpy
from ._bulkpy import (
    COMPOSE, CONST_EMPTY, DIAMOND, INTER_R, LOAD_REL, LOAD_SET, NOT_S, OR_S,
    TEST_DIAG, UNION_R,
)
from .syntax import (
    Atomic, Diamond as DiamondF, Formula, Inter, Not, Or, Program, Prop, Seq,
    Test, Union, symbols_of,
)
from .semantics import KripkeStructure

if os.environ.get("PDLKIT_FORCE_PY"):
    _backend = _bulkpy
else:
    try:
        from . import _bulkcy as _backend  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - compiled kernel not built
        _backend = _bulkpy

BACKEND_NAME = "cython" if _backend is not _bulkpy else "numpy"


def backend_names() -> list[str]:
    names = ["numpy"]
    if _backend is not _bulkpy:
        names.insert(0, "cython")
    return names


MAX_WORLDS = 4


@dataclass(frozen=True)
class StructureSpace:
    """All structures with exactly `n` worlds over the given symbol lists."""

    n: int
    props: tuple[str, ...]
    progs: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_WORLDS:
            raise ValueError(f"world count must be between 1 and {MAX_WORLDS}")

    @property
    def bits(self) -> int:
        return len(self.props) * self.n + len(self.progs) * self.n * self.n

    @property
    def count(self) -> int:
        return 1 << self.bits

    @property
    def worlds(self) -> tuple[str, ...]:
        return tuple(f"w{i}" for i in range(self.n))

    def arrays(self, idx: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Bit-packed relation/valuation arrays for the given structure indices."""
        idx = idx.astype(np.uint64, copy=False)
        n = self.n
        sets = []
        for i in range(len(self.props)):
            sets.append(((idx >> np.uint64(i * n)) & np.uint64((1 << n) - 1)).astype(np.uint32))
        rels = []
        base = len(self.props) * n
        for j in range(len(self.progs)):
            shift = np.uint64(base + j * n * n)
            rels.append(((idx >> shift) & np.uint64((1 << (n * n)) - 1)).astype(np.uint32))
        return rels, sets

    def chunk_arrays(self, start: int, end: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return self.arrays(np.arange(start, end, dtype=np.uint64))

    def decode(self, index: int) -> KripkeStructure:
        n = self.n
        worlds = self.worlds
        valuation = {}
        for i, name in enumerate(self.props):
            mask = (index >> (i * n)) & ((1 << n) - 1)
            valuation[name] = frozenset(worlds[k] for k in range(n) if mask >> k & 1)
        edges = {}
        base = len(self.props) * n
        for j, name in enumerate(self.progs):
            mask = (index >> (base + j * n * n)) & ((1 << (n * n)) - 1)
            es = set()
            for src in range(n):
                for dst in range(n):
                    if mask >> (src * n + dst) & 1:
                        es.add((worlds[src], worlds[dst]))
            edges[name] = frozenset(es)
        return KripkeStructure.make(worlds, valuation, edges)

    def encode(self, k: KripkeStructure) -> int:
        if k.worlds != self.worlds:
            raise ValueError("structure does not use the space's canonical worlds")
        pos = {w: i for i, w in enumerate(k.worlds)}
        index = 0
        for i, name in enumerate(self.props):
            for w in k.prop_worlds(name):
                index |= 1 << (i * self.n + pos[w])
        base = len(self.props) * self.n
        for j, name in enumerate(self.progs):
            for u, v in k.program_edges(name):
                index |= 1 << (base + j * self.n * self.n + pos[u] * self.n + pos[v])
        return index


# ---------------------------------------------------------------------------
# Compiler
# ---------------------------------------------------------------------------

class _Compiler:
    def __init__(self, space: StructureSpace):
        self.space = space
        self.prop_index = {name: i for i, name in enumerate(space.props)}
        self.prog_index = {name: i for i, name in enumerate(space.progs)}
        self.code: list[tuple[int, int, int, int]] = []
        self.memo: dict = {}
        self.next_reg = 0

    def fresh(self) -> int:
        r = self.next_reg
        self.next_reg += 1
        return r

    def emit(self, op, a1=0, a2=0) -> int:
        dst = self.fresh()
        self.code.append((op, dst, a1, a2))
        return dst

    def formula(self, f: Formula) -> int:
        key = ("f", f)
        if key in self.memo:
            return self.memo[key]
        if isinstance(f, Prop):
            if f.name in self.prop_index:
                r = self.emit(LOAD_SET, self.prop_index[f.name])
            else:
                # uninterpreted proposition (the tautology witness): false
                r = self.emit(CONST_EMPTY)
        elif isinstance(f, Not):
            r = self.emit(NOT_S, self.formula(f.sub))
        elif isinstance(f, Or):
            r = self.emit(OR_S, self.formula(f.left), self.formula(f.right))
        elif isinstance(f, DiamondF):
            r = self.emit(DIAMOND, self.program(f.program), self.formula(f.sub))
        else:
            raise TypeError(f"not a formula: {f!r}")
        self.memo[key] = r
        return r

    def program(self, p: Program) -> int:
        key = ("p", p)
        if key in self.memo:
            return self.memo[key]
        if isinstance(p, Atomic):
            if p.name not in self.prog_index:
                raise ValueError(f"atomic program {p.name!r} not in the space vocabulary")
            r = self.emit(LOAD_REL, self.prog_index[p.name])
        elif isinstance(p, Seq):
            r = self.emit(COMPOSE, self.program(p.left), self.program(p.right))
        elif isinstance(p, Union):
            r = self.emit(UNION_R, self.program(p.left), self.program(p.right))
        elif isinstance(p, Inter):
            r = self.emit(INTER_R, self.program(p.left), self.program(p.right))
        elif isinstance(p, Test):
            r = self.emit(TEST_DIAG, self.formula(p.formula))
        else:
            raise TypeError(f"not a program: {p!r}")
        self.memo[key] = r
        return r


@dataclass
class CompiledFormula:
    space: StructureSpace
    code: list
    nregs: int

    def run(self, start: int, end: int) -> np.ndarray:
        """Mask of satisfying worlds per structure index in [start, end)."""
        rels, sets = self.space.chunk_arrays(start, end)
        return _backend.run_batch(self.code, self.space.n, end - start, rels, sets, self.nregs)

    def run_on(self, idx: np.ndarray) -> np.ndarray:
        rels, sets = self.space.arrays(idx)
        return _backend.run_batch(self.code, self.space.n, len(idx), rels, sets, self.nregs)

    def run_with(self, backend, start: int, end: int) -> np.ndarray:
        rels, sets = self.space.chunk_arrays(start, end)
        return backend.run_batch(self.code, self.space.n, end - start, rels, sets, self.nregs)


def compile_formula(f: Formula, space: StructureSpace) -> CompiledFormula:
    c = _Compiler(space)
    c.formula(f)
    return CompiledFormula(space, c.code, c.next_reg)


def compile_program(p: Program, space: StructureSpace) -> CompiledFormula:
    """Compiled denotation: the result register holds the relation mask."""
    c = _Compiler(space)
    c.program(p)
    return CompiledFormula(space, c.code, c.next_reg)


def space_for(x, extra_props=(), extra_progs=(), n: int = 3) -> StructureSpace:
    """A structure space covering the symbols of a formula or program."""
    props, progs = symbols_of(x)
    return StructureSpace(n, tuple(sorted(props | set(extra_props))), tuple(sorted(progs | set(extra_progs))))
