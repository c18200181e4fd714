# cython: language_level=3, boundscheck=False, wraparound=False, nonecheck=False
"""Compiled batch evaluator: same run_batch contract as pdlkit._bulkpy.

Relations are n*n-bit masks and world sets n-bit masks over uint32 arrays;
each instruction is a tight C loop over the batch.
"""

import numpy as np

cimport cython
from libc.stdint cimport uint32_t

LOAD_REL, LOAD_SET, COMPOSE, INTER_R, UNION_R, TEST_DIAG = 0, 1, 2, 3, 4, 5
NOT_S, OR_S, DIAMOND, CONST_EMPTY = 6, 7, 8, 9

# OR-of-selected-rows tables, one per world count (built lazily via numpy)
_tables = {}


cdef uint32_t[:, :] _table_for(int n):
    if n not in _tables:
        from pdlkit._bulkpy import _or_rows_table

        _tables[n] = np.ascontiguousarray(_or_rows_table(n))
    return _tables[n]


@cython.cdivision(True)
def run_batch(code, int n, Py_ssize_t batch, list rels, list sets, int nregs):
    regs = [None] * nregs
    cdef uint32_t full_set = <uint32_t>((1 << n) - 1)
    cdef uint32_t row_mask = full_set
    cdef Py_ssize_t k
    cdef int i, j, op, dst, a1, a2
    cdef uint32_t r1v, r2v, sv, acc, row, outv
    cdef uint32_t[:] va, vb, vo
    cdef uint32_t[:, :] table = _table_for(n)
    last_dst = 0
    for instr in code:
        op, dst, a1, a2 = instr
        last_dst = dst
        if op == LOAD_REL:
            regs[dst] = rels[a1]
            continue
        if op == LOAD_SET:
            regs[dst] = sets[a1]
            continue
        if op == CONST_EMPTY:
            regs[dst] = np.zeros(batch, dtype=np.uint32)
            continue
        out = np.empty(batch, dtype=np.uint32)
        vo = out
        if op == NOT_S:
            va = regs[a1]
            for k in range(batch):
                vo[k] = va[k] ^ full_set
        elif op == OR_S or op == UNION_R:
            va = regs[a1]
            vb = regs[a2]
            for k in range(batch):
                vo[k] = va[k] | vb[k]
        elif op == INTER_R:
            va = regs[a1]
            vb = regs[a2]
            for k in range(batch):
                vo[k] = va[k] & vb[k]
        elif op == COMPOSE:
            va = regs[a1]
            vb = regs[a2]
            for k in range(batch):
                r1v = va[k]
                r2v = vb[k]
                acc = 0
                for i in range(n):
                    # OR of the rows of r2 selected by row i of r1
                    acc |= table[r2v, (r1v >> (i * n)) & row_mask] << (i * n)
                vo[k] = acc
        elif op == TEST_DIAG:
            va = regs[a1]
            for k in range(batch):
                sv = va[k]
                acc = 0
                for i in range(n):
                    if sv >> i & 1:
                        acc |= <uint32_t>1 << (i * n + i)
                vo[k] = acc
        elif op == DIAMOND:
            va = regs[a1]
            vb = regs[a2]
            for k in range(batch):
                r1v = va[k]
                sv = vb[k]
                acc = 0
                for i in range(n):
                    if ((r1v >> (i * n)) & row_mask) & sv:
                        acc |= <uint32_t>1 << i
                vo[k] = acc
        else:
            raise ValueError(f"bad opcode {op}")
        regs[dst] = out
    return regs[last_dst]
