"""Dense exact Gaussian elimination over a coefficient field.

Matrices are lists of row lists holding field values.  Sizes here are
window-piece sizes (tens to a few hundred), so dense elimination with
exact arithmetic is the right tool.
"""

from __future__ import annotations


def zeros(field, rows, cols):
    return [[field.zero] * cols for _ in range(rows)]


def identity(field, n):
    m = zeros(field, n, n)
    for i in range(n):
        m[i][i] = field.one
    return m


def mat_mul(field, a, b):
    if not a or not b:
        return []
    rows, inner, cols = len(a), len(b), len(b[0])
    out = zeros(field, rows, cols)
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            c = ai[k]
            if c == field.zero:
                continue
            bk = b[k]
            for j in range(cols):
                if bk[j] != field.zero:
                    oi[j] = field.add(oi[j], field.mul(c, bk[j]))
    return out


def rank(field, matrix) -> int:
    """Row-echelon rank via fraction-free-enough exact elimination."""
    if not matrix or not matrix[0]:
        return 0
    m = [row[:] for row in matrix]
    rows, cols = len(m), len(m[0])
    r = 0
    for col in range(cols):
        pivot = None
        for i in range(r, rows):
            if m[i][col] != field.zero:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = field.inv(m[r][col])
        m[r] = [field.mul(v, inv) for v in m[r]]
        for i in range(rows):
            if i != r and m[i][col] != field.zero:
                f = m[i][col]
                m[i] = [field.sub(a, field.mul(f, b)) for a, b in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def solve(field, a, b):
    """One solution x of A x = b, or None if inconsistent.

    b may be a vector or a matrix (solved column by column); free
    variables are set to zero.
    """
    if not a:
        return None
    vector_rhs = not isinstance(b[0], list)
    rhs = [[v] for v in b] if vector_rhs else [row[:] for row in b]
    rows, cols = len(a), len(a[0])
    width = len(rhs[0])
    aug = [a[i][:] + rhs[i][:] for i in range(rows)]
    pivots = []
    r = 0
    for col in range(cols):
        pivot = None
        for i in range(r, rows):
            if aug[i][col] != field.zero:
                pivot = i
                break
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = field.inv(aug[r][col])
        aug[r] = [field.mul(v, inv) for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][col] != field.zero:
                f = aug[i][col]
                aug[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    for i in range(r, rows):
        if any(v != field.zero for v in aug[i][cols:]):
            return None
    x = zeros(field, cols, width)
    for i, col in enumerate(pivots):
        x[col] = aug[i][cols:]
    if vector_rhs:
        return [row[0] for row in x]
    return x
