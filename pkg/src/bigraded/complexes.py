"""Bounded chain complexes of finitely generated free graded modules.

A FreeComplex stores ranks per level and one differential matrix per
level, acting by left multiplication on column vectors; d_n maps level n
to level n-1 and the composite of consecutive differentials must reduce
to zero in the ring's normal form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import matrices as mx
from .grading import Degree
from .rings import GradedElement, RingInstance


def amplitude(x: GradedElement) -> int:
    """max(|s|,|t|) over the degrees of the homogeneous components; a
    convention of 0 for the zero element."""
    return x.amplitude()


def matrix_amplitude(m) -> int:
    return max((amplitude(e) for row in m for e in row), default=0)


@dataclass
class ValidationReport:
    ok: bool
    message: str = ""
    level: int | None = None
    entry: tuple | None = None


class FreeComplex:
    def __init__(self, ring: RingInstance, lo: int, ranks, diffs):
        """diffs[n] is the matrix of d_n : level n -> level n-1; the lowest
        level has no differential."""
        self.ring = ring
        self.lo = lo
        self.ranks = list(ranks)
        self.diffs = dict(diffs)

    @property
    def hi(self):
        return self.lo + len(self.ranks) - 1

    def levels(self):
        return range(self.lo, self.hi + 1)

    def rank(self, n):
        if self.lo <= n <= self.hi:
            return self.ranks[n - self.lo]
        return 0

    def diff(self, n):
        """Differential matrix at level n (zero-sized when out of range)."""
        if n in self.diffs:
            return self.diffs[n]
        return mx.mzeros(self.ring.zero(), self.rank(n - 1), self.rank(n))

    def zero_vector(self, n):
        return [self.ring.zero() for _ in range(self.rank(n))]

    def basis_vector(self, n, i):
        v = self.zero_vector(n)
        v[i] = self.ring.one()
        return v

    def apply_diff(self, n, vec):
        return mx.mapply(self.diff(n), vec, self.ring.zero())

    def total_rank(self):
        return sum(self.ranks)

    def level_amplitude(self, n) -> int:
        return matrix_amplitude(self.diff(n)) if n in self.diffs else 0

    def shift(self, k: int) -> "FreeComplex":
        """Suspension: level n of the result is level n-k of the input."""
        diffs = {n + k: self.diffs[n] for n in self.diffs}
        if k % 2:
            diffs = {n: mx.mneg(m) for n, m in diffs.items()}
        return FreeComplex(self.ring, self.lo + k, self.ranks, diffs)

    def __repr__(self):
        return f"<complex over {self.ring.name} levels {self.lo}..{self.hi} ranks {self.ranks}>"


def validate(c: FreeComplex) -> ValidationReport:
    """Check rank consistency and d.d = 0; report the first violation."""
    zero = c.ring.zero()
    for n in c.levels():
        m = c.diff(n)
        rows_ok = len(m) == c.rank(n - 1)
        cols_ok = all(len(row) == c.rank(n) for row in m)
        if not (rows_ok and cols_ok):
            return ValidationReport(False, f"shape mismatch at level {n}", n)
    for n in c.levels():
        if n - 1 <= c.lo:
            continue
        square = mx.mmul(c.diff(n - 1), c.diff(n), zero)
        bad = mx.first_nonzero(square)
        if bad:
            i, j, v = bad
            return ValidationReport(
                False, f"d.d != 0 at level {n}: entry ({i},{j}) = {v!r}", n, (i, j))
    return ValidationReport(True)


def zero_complex(ring) -> FreeComplex:
    return FreeComplex(ring, 0, [0], {})


def direct_sum(a: FreeComplex, b: FreeComplex) -> FreeComplex:
    lo = min(a.lo, b.lo)
    hi = max(a.hi, b.hi)
    ranks = [a.rank(n) + b.rank(n) for n in range(lo, hi + 1)]
    zero = a.ring.zero()
    diffs = {}
    for n in range(lo + 1, hi + 1):
        blocks = [[a.diff(n), None], [None, b.diff(n)]]
        diffs[n] = mx.block_matrix(
            blocks, zero, [a.rank(n - 1), b.rank(n - 1)], [a.rank(n), b.rank(n)])
    return FreeComplex(a.ring, lo, ranks, diffs)


class ChainMap:
    def __init__(self, source: FreeComplex, target: FreeComplex, mats):
        """mats[n] : source level n -> target level n."""
        self.source = source
        self.target = target
        self.mats = dict(mats)

    def mat(self, n):
        if n in self.mats:
            return self.mats[n]
        return mx.mzeros(self.source.ring.zero(), self.target.rank(n), self.source.rank(n))

    def is_chain_map(self) -> bool:
        zero = self.source.ring.zero()
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo + 1, hi + 1):
            left = mx.mmul(self.target.diff(n), self.mat(n), zero)
            right = mx.mmul(self.mat(n - 1), self.source.diff(n), zero)
            if not mx.meq(left, right):
                return False
        return True


def scalar_chain_map(c: FreeComplex, z: GradedElement) -> ChainMap:
    """Multiplication by a ring element, as a chain self-map."""
    mats = {}
    for n in c.levels():
        m = mx.mzeros(c.ring.zero(), c.rank(n), c.rank(n))
        for i in range(c.rank(n)):
            m[i][i] = z
        mats[n] = m
    return ChainMap(c, c, mats)


def mapping_cone(f: ChainMap) -> FreeComplex:
    """cone(f) with levels target_n (+) source_{n-1} and differential
    [[d_target, f], [0, -d_source]]."""
    if not f.is_chain_map():
        raise ValueError("mapping_cone needs a chain map")
    src, tgt = f.source, f.target
    ring = src.ring
    zero = ring.zero()
    lo = min(tgt.lo, src.lo + 1)
    hi = max(tgt.hi, src.hi + 1)
    ranks = [tgt.rank(n) + src.rank(n - 1) for n in range(lo, hi + 1)]
    diffs = {}
    for n in range(lo + 1, hi + 1):
        blocks = [
            [tgt.diff(n), f.mat(n - 1)],
            [None, mx.mneg(src.diff(n - 1))],
        ]
        diffs[n] = mx.block_matrix(
            blocks, zero,
            [tgt.rank(n - 1), src.rank(n - 2)],
            [tgt.rank(n), src.rank(n - 1)])
    return FreeComplex(ring, lo, ranks, diffs)


# -- hypercube complexes -------------------------------------------------------


class HyperComplex:
    """An m-fold complex on the unit cube: one free module of fixed rank at
    every position in {0,1}^m and one square edge matrix per direction.

    Edge matrices must commute pairwise so the totalisation squares to
    zero.
    """

    def __init__(self, ring: RingInstance, edges, rank: int = 1):
        self.ring = ring
        self.edges = [e for e in edges]
        self.m = len(self.edges)
        self.rank = rank
        for e in self.edges:
            if mx.shape(e) != (rank, rank):
                raise ValueError("edge matrices must be rank x rank")

    def edges_commute(self) -> bool:
        zero = self.ring.zero()
        for i in range(self.m):
            for j in range(i + 1, self.m):
                ab = mx.mmul(self.edges[i], self.edges[j], zero)
                ba = mx.mmul(self.edges[j], self.edges[i], zero)
                if not mx.meq(ab, ba):
                    return False
        return True


def cube_positions(m):
    out = [()]
    for _ in range(m):
        out = [p + (b,) for p in out for b in (0, 1)]
    return sorted(out, key=lambda p: (sum(p), p))


def totalize(v: HyperComplex, order=None) -> FreeComplex:
    """Totalisation of the cube with Koszul signs; `order` permutes the
    directions before signs are assigned."""
    if not v.edges_commute():
        raise ValueError("edge maps do not commute; totalisation undefined")
    order = list(order) if order is not None else list(range(v.m))
    if sorted(order) != list(range(v.m)):
        raise ValueError("order must be a permutation of the directions")
    edges = [v.edges[i] for i in order]

    positions = cube_positions(v.m)
    index = {}
    ranks = [0] * (v.m + 1)
    for p in positions:
        n = sum(p)
        index[p] = ranks[n]
        ranks[n] += 1

    ring = v.ring
    zero = ring.zero()
    diffs = {}
    for n in range(1, v.m + 1):
        mat = mx.mzeros(zero, ranks[n - 1] * v.rank, ranks[n] * v.rank)
        for p in positions:
            if sum(p) != n:
                continue
            for i in range(v.m):
                if p[i] == 0:
                    continue
                q = p[:i] + (0,) + p[i + 1 :]
                sign = -1 if sum(p[:i]) % 2 else 1
                blk = edges[i] if sign > 0 else mx.mneg(edges[i])
                r0 = index[q] * v.rank
                c0 = index[p] * v.rank
                for a in range(v.rank):
                    for b in range(v.rank):
                        mat[r0 + a][c0 + b] = mat[r0 + a][c0 + b] + blk[a][b]
        diffs[n] = mat
    return FreeComplex(ring, 0, [r * v.rank for r in ranks], diffs)


def totalize_order_signs(v: HyperComplex, order_a, order_b):
    """Signs of the diagonal isomorphism totalize(v, a) -> totalize(v, b).

    Basis positions coincide; only Koszul signs differ.  The sign at a
    position is the sign of the permutation the reordering induces on its
    occupied directions.
    """
    def perm_sign(seq):
        s = 1
        items = list(seq)
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                if items[i] > items[j]:
                    s = -s
        return s

    signs = {}
    pos_a = {i: k for k, i in enumerate(order_a)}
    pos_b = {i: k for k, i in enumerate(order_b)}
    for p in cube_positions(v.m):
        occupied = [i for i in range(v.m) if p[i] == 1]
        sa = perm_sign([pos_a[i] for i in occupied])
        sb = perm_sign([pos_b[i] for i in occupied])
        signs[p] = sa * sb
    return signs


# -- seeded generators ---------------------------------------------------------


def cone_of_identity(ring, rank=1, level=0) -> tuple[FreeComplex, dict]:
    """cone(id) on a rank-`rank` free module, plus its contraction."""
    zero = ring.zero()
    one = ring.one()
    ranks = [rank, rank]
    d = mx.midentity(zero, one, rank)
    c = FreeComplex(ring, level, ranks, {level + 1: d})
    s = {level: mx.midentity(zero, one, rank)}
    return c, s


def random_unimodular(ring, n, rng, steps=4):
    """Product of elementary matrices over the ring, with exact inverse."""
    zero = ring.zero()
    one = ring.one()
    m = mx.midentity(zero, one, n)
    minv = mx.midentity(zero, one, n)
    for _ in range(steps if n > 1 else 0):
        i, j = rng.sample(range(n), 2)
        coeff = ring.constant(rng.randint(-2, 2))
        if rng.random() < 0.5:
            coeff = coeff * _random_small_element(ring, rng)
        e = mx.midentity(zero, one, n)
        e[i][j] = coeff
        einv = mx.midentity(zero, one, n)
        einv[i][j] = -coeff
        m = mx.mmul(m, e, zero)
        minv = mx.mmul(einv, minv, zero)
    return m, minv


def _random_small_element(ring, rng):
    deg = Degree(rng.randint(-1, 1), rng.randint(-1, 1))
    el = ring.sample_homogeneous(deg, rng, terms=1)
    return el if el is not None else ring.one()


def random_contractible_complex(ring, rng: random.Random, rank=1, level=0):
    """A contractible bounded complex with an explicit contraction.

    Built as cone(id) conjugated by random unimodular matrices, so the
    contraction transports along exactly.
    """
    base, s = cone_of_identity(ring, rank, level)
    zero = ring.zero()
    u_by_level = {}
    uinv_by_level = {}
    for n in base.levels():
        u, uinv = random_unimodular(ring, base.rank(n), rng)
        u_by_level[n] = u
        uinv_by_level[n] = uinv
    diffs = {}
    for n in base.levels():
        if n == base.lo:
            continue
        diffs[n] = mx.mmul(u_by_level[n - 1], mx.mmul(base.diff(n), uinv_by_level[n], zero), zero)
    twisted = FreeComplex(ring, base.lo, base.ranks, diffs)
    contraction = {}
    for n, mat in s.items():
        contraction[n] = mx.mmul(u_by_level[n + 1], mx.mmul(mat, uinv_by_level[n], zero), zero)
    return twisted, contraction


def verify_contraction_matrices(c: FreeComplex, s: dict) -> bool:
    """Whether d s + s d = id exactly at every level."""
    zero = c.ring.zero()
    one = c.ring.one()
    for n in c.levels():
        if c.rank(n) == 0:
            continue
        acc = mx.mzeros(zero, c.rank(n), c.rank(n))
        if n in s and c.rank(n + 1) > 0:
            acc = mx.madd(acc, mx.mmul(c.diff(n + 1), s[n], zero))
        if (n - 1) in s and c.rank(n - 1) > 0:
            acc = mx.madd(acc, mx.mmul(s[n - 1], c.diff(n), zero))
        if not mx.meq(acc, mx.midentity(zero, one, c.rank(n))):
            return False
    return True


def random_koszul_complex(ring, rng: random.Random) -> FreeComplex:
    """Three-level complex from two commuting ring elements (ranks 1,2,1)."""
    f = _random_small_element(ring, rng)
    g = _random_small_element(ring, rng)
    v = HyperComplex(ring, [[[f]], [[g]]])
    return totalize(v)
