"""Vectorized batch evaluator over bit-packed structure enumerations.

Relations over n worlds (n <= 4) are n*n-bit masks, world sets are n-bit
masks, and a batch is a numpy array of such masks, one entry per structure.
Composition and the diamond step use per-n lookup tables ("OR of selected
rows"), so a batch instruction costs a handful of fancy-indexing gathers.

This is the pure-python fallback backend; `pdlkit._bulkcy` implements the
same `run_batch` contract in C loops.
"""

from __future__ import annotations

import numpy as np

_ROW_TABLES: dict[int, np.ndarray] = {}


def _or_rows_table(n: int) -> np.ndarray:
    """table[r, mask] = OR of the rows of relation r selected by mask."""
    tab = _ROW_TABLES.get(n)
    if tab is not None:
        return tab
    size = 1 << (n * n)
    rows = np.zeros((size, n), dtype=np.uint32)
    r = np.arange(size, dtype=np.uint32)
    for i in range(n):
        rows[:, i] = (r >> np.uint32(i * n)) & np.uint32((1 << n) - 1)
    tab = np.zeros((size, 1 << n), dtype=np.uint32)
    for mask in range(1 << n):
        acc = np.zeros(size, dtype=np.uint32)
        for i in range(n):
            if mask >> i & 1:
                acc |= rows[:, i]
        tab[:, mask] = acc
    _ROW_TABLES[n] = tab
    return tab


# Instruction opcodes shared with the compiled backend.
LOAD_REL, LOAD_SET, COMPOSE, INTER_R, UNION_R, TEST_DIAG = 0, 1, 2, 3, 4, 5
NOT_S, OR_S, DIAMOND, CONST_EMPTY = 6, 7, 8, 9


def run_batch(code, n: int, batch: int, rels: list[np.ndarray], sets: list[np.ndarray], nregs: int) -> np.ndarray:
    """Execute compiled instructions over a batch; returns the result register.

    `code` is a list of tuples (op, dst, arg1, arg2); registers hold either
    relation masks or set masks (the compiler keeps the sorts straight).
    """
    regs = [None] * nregs
    full_set = np.uint32((1 << n) - 1)
    table = _or_rows_table(n)
    row_mask = np.uint32((1 << n) - 1)
    for op, dst, a1, a2 in code:
        if op == LOAD_REL:
            regs[dst] = rels[a1]
        elif op == LOAD_SET:
            regs[dst] = sets[a1]
        elif op == CONST_EMPTY:
            regs[dst] = np.zeros(batch, dtype=np.uint32)
        elif op == NOT_S:
            regs[dst] = regs[a1] ^ full_set
        elif op == OR_S:
            regs[dst] = regs[a1] | regs[a2]
        elif op == INTER_R:
            regs[dst] = regs[a1] & regs[a2]
        elif op == UNION_R:
            regs[dst] = regs[a1] | regs[a2]
        elif op == COMPOSE:
            r1, r2 = regs[a1], regs[a2]
            out = np.zeros(batch, dtype=np.uint32)
            for i in range(n):
                row = (r1 >> np.uint32(i * n)) & row_mask
                out |= table[r2, row] << np.uint32(i * n)
            regs[dst] = out
        elif op == TEST_DIAG:
            s = regs[a1]
            out = np.zeros(batch, dtype=np.uint32)
            for i in range(n):
                out |= ((s >> np.uint32(i)) & np.uint32(1)) << np.uint32(i * n + i)
            regs[dst] = out
        elif op == DIAMOND:
            r, s = regs[a1], regs[a2]
            out = np.zeros(batch, dtype=np.uint32)
            for i in range(n):
                row = (r >> np.uint32(i * n)) & row_mask
                out |= (((row & s) != 0).astype(np.uint32)) << np.uint32(i)
            regs[dst] = out
        else:
            raise ValueError(f"bad opcode {op}")
    return regs[code[-1][1]]
