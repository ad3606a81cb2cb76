"""Generic matrix helpers over any ring-like elements.

Entries only need +, -, * and truthiness, so the same functions serve
matrices of GradedElement and of truncated Novikov elements.
"""

from __future__ import annotations


def shape(m):
    return (len(m), len(m[0]) if m else 0)


def mzeros(zero, rows, cols):
    return [[zero for _ in range(cols)] for _ in range(rows)]


def midentity(zero, one, n):
    m = mzeros(zero, n, n)
    for i in range(n):
        m[i][i] = one
    return m


def madd(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def msub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mneg(a):
    return [[-x for x in row] for row in a]


def mscale(a, c):
    return [[x * c for x in row] for row in a]


def mmul(a, b, zero):
    rows = len(a)
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = mzeros(zero, rows, cols)
    for i in range(rows):
        for k in range(inner):
            c = a[i][k]
            if not c:
                continue
            for j in range(cols):
                e = b[k][j]
                if e:
                    out[i][j] = out[i][j] + c * e
    return out


def mapply(a, vec, zero):
    """Matrix times column vector."""
    out = [zero for _ in a]
    for i, row in enumerate(a):
        acc = zero
        for c, v in zip(row, vec):
            if c and v:
                acc = acc + c * v
        out[i] = acc
    return out


def mis_zero(a):
    return all(not x for row in a for x in row)


def meq(a, b):
    return shape(a) == shape(b) and all(
        x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )


def block_matrix(blocks, zero, row_sizes, col_sizes):
    """Assemble a matrix from a grid of blocks (None means a zero block)."""
    rows = sum(row_sizes)
    cols = sum(col_sizes)
    out = mzeros(zero, rows, cols)
    r0 = 0
    for bi, rsize in enumerate(row_sizes):
        c0 = 0
        for bj, csize in enumerate(col_sizes):
            blk = blocks[bi][bj]
            if blk is not None:
                for i in range(rsize):
                    for j in range(csize):
                        out[r0 + i][c0 + j] = blk[i][j]
            c0 += csize
        r0 += rsize
    return out


def first_nonzero(a):
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            if x:
                return (i, j, x)
    return None
