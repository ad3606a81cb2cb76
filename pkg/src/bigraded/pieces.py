"""Windowed graded pieces of complexes and exact betti numbers.

A SlotComplex is a bounded complex whose level-n module is a direct sum
of "slots": multiplicity-many copies of the span of monomials inside a
lattice region.  Differential entries are matrices of ring elements
between slots.  Pieces are extracted per lattice degree; entries of
mixed degree are handled by flowing the degree window through the
component degrees of the entries, which keeps the projected boundary
squaring to zero.

Only rings with one-dimensional homogeneous components support pieces
(the Laurent instance and its polynomial cone); richer instances are
rejected.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import linalg
from .grading import Degree
from .rings import GradedElement, RingInstance


class UnsupportedRingError(TypeError):
    """Degreewise checks need finite-dimensional components."""


# -- lattice regions -----------------------------------------------------------


class FullPlane:
    def __contains__(self, deg):
        return True

    def to_jsonable(self):
        return {"kind": "full"}


class EmptyRegion:
    def __contains__(self, deg):
        return False

    def to_jsonable(self):
        return {"kind": "empty"}


class HalfPlanes:
    """Intersection of half-planes {(x, y) : nx*x + ny*y >= c}."""

    def __init__(self, constraints):
        self.constraints = tuple((tuple(n), c) for n, c in constraints)

    def __contains__(self, deg):
        x, y = deg[0], deg[1]
        return all(nx * x + ny * y >= c for (nx, ny), c in self.constraints)

    def shifted(self, deg) -> "HalfPlanes":
        """Minkowski shift of the region by a lattice vector."""
        x, y = deg[0], deg[1]
        return HalfPlanes(
            [((nx, ny), c + nx * x + ny * y) for (nx, ny), c in self.constraints])

    def to_jsonable(self):
        return {"kind": "halfplanes", "constraints": [list(n) + [c] for n, c in self.constraints]}


class Box:
    def __init__(self, k):
        self.k = k

    def __contains__(self, deg):
        return abs(deg[0]) <= self.k and abs(deg[1]) <= self.k

    def to_jsonable(self):
        return {"kind": "box", "k": self.k}


# -- slot complexes ------------------------------------------------------------


@dataclass
class Slot:
    region: object
    rank: int = 1
    label: str = ""


class SlotComplex:
    def __init__(self, ring: RingInstance, lo: int, levels, entries):
        """levels[i] is the slot list of chain level lo+i; entries[n] is a
        list of (target_slot, source_slot, matrix of GradedElement) for
        the differential level n -> n-1."""
        if ring.component_dim(Degree(0, 0)) is None:
            raise UnsupportedRingError(
                f"{ring.name} has infinite-dimensional components; "
                "degreewise pieces are unsupported")
        self.ring = ring
        self.lo = lo
        self.levels = [list(slots) for slots in levels]
        self.entries = {n: list(es) for n, es in entries.items()}

    @property
    def hi(self):
        return self.lo + len(self.levels) - 1

    def slots(self, n):
        if self.lo <= n <= self.hi:
            return self.levels[n - self.lo]
        return []

    def entry_shifts(self, n):
        shifts = set()
        for _, _, mat in self.entries.get(n, ()):
            for row in mat:
                for el in row:
                    shifts.update(el.degrees())
        return shifts

    # -- piece extraction -------------------------------------------------

    def degree_sets(self, sigma):
        """Source-degree sets per level: the anchor degree plus everything
        that flows into lower-level sets through the entry shifts."""
        sigma = Degree(*sigma)
        sets = {self.lo: {sigma}}
        for n in range(self.lo + 1, self.hi + 1):
            prev = sets[n - 1]
            cur = {sigma}
            for delta in self.entry_shifts(n):
                cur.update(lam - delta for lam in prev)
            sets[n] = cur
        return sets

    def piece_basis(self, n, degree_set):
        basis = []
        for si, slot in enumerate(self.slots(n)):
            for lam in sorted(degree_set):
                if lam in slot.region and self.ring.has_degree(lam):
                    for copy in range(slot.rank):
                        basis.append((si, copy, lam))
        return basis

    def graded_piece(self, sigma) -> "GradedPiece":
        field = self.ring.field
        sets = self.degree_sets(sigma)
        bases = {n: self.piece_basis(n, sets[n]) for n in range(self.lo, self.hi + 1)}
        index = {
            n: {key: i for i, key in enumerate(basis)} for n, basis in bases.items()
        }
        mats = {}
        for n in range(self.lo + 1, self.hi + 1):
            rows = len(bases[n - 1])
            cols = len(bases[n])
            mat = linalg.zeros(field, rows, cols)
            for ti, si, entry in self.entries.get(n, ()):
                for (s_idx, copy, lam), col in index[n].items():
                    if s_idx != si:
                        continue
                    for r in range(len(entry)):
                        el = entry[r][copy]
                        if not el:
                            continue
                        for delta, comp in el.components().items():
                            target = (ti, r, lam + delta)
                            row = index[n - 1].get(target)
                            if row is None:
                                continue
                            c = _scalar_component(self.ring, comp, lam, lam + delta)
                            mat[row][col] = field.add(mat[row][col], c)
            mats[n] = mat
        dims = [len(bases[n]) for n in range(self.lo, self.hi + 1)]
        return GradedPiece(Degree(*sigma), self.lo, dims, mats, field)


def _scalar_component(ring, comp: GradedElement, lam, target):
    """Scalar of (component) * (basis monomial at lam) against the basis
    monomial at `target`; needs 1-dimensional components."""
    src = ring.component_monomial(lam)
    prod = comp * src
    tgt = ring.component_monomial(target)
    # prod is a scalar multiple of tgt since the component is 1-dim
    if prod.is_zero():
        return ring.field.zero
    (e_t,) = tgt.poly.terms
    return prod.poly.terms.get(e_t, ring.field.zero)


@dataclass
class GradedPiece:
    degree: Degree
    lo: int
    dims: list
    mats: dict
    field: object

    @property
    def hi(self):
        return self.lo + len(self.dims) - 1

    def dim(self, n):
        if self.lo <= n <= self.hi:
            return self.dims[n - self.lo]
        return 0

    def mat(self, n):
        return self.mats.get(n, [])

    def boundary_squares_to_zero(self) -> bool:
        for n in range(self.lo + 2, self.hi + 1):
            prod = linalg.mat_mul(self.field, self.mat(n - 1), self.mat(n))
            if any(v != self.field.zero for row in prod for v in row):
                return False
        return True

    def homology_ranks(self) -> list:
        """Betti numbers per level via exact rank-nullity."""
        ranks = {n: linalg.rank(self.field, self.mat(n)) for n in self.mats}
        betti = []
        for n in range(self.lo, self.hi + 1):
            b = self.dim(n) - ranks.get(n, 0) - ranks.get(n + 1, 0)
            betti.append(b)
        return betti

    def kernel_dim(self, n) -> int:
        return self.dim(n) - linalg.rank(self.field, self.mat(n))

    def euler_characteristic(self) -> int:
        return sum((-1) ** (n - self.lo) * d for n, d in enumerate(self.dims, self.lo))


def homology_ranks(piece: GradedPiece) -> list:
    return piece.homology_ranks()


def from_free_complex(c) -> SlotComplex:
    """View a FreeComplex as a single-slot-per-level SlotComplex."""
    levels = [[Slot(FullPlane(), c.rank(n))] for n in c.levels()]
    entries = {}
    for n in c.levels():
        if n == c.lo:
            continue
        entries[n] = [(0, 0, c.diff(n))]
    return SlotComplex(c.ring, c.lo, levels, entries)


def graded_piece(c, deg) -> GradedPiece:
    """Windowed graded piece of a FreeComplex at one degree."""
    return from_free_complex(c).graded_piece(deg)


def window_degrees(w: int):
    return [Degree(x, y) for x in range(-w, w + 1) for y in range(-w, w + 1)]


def betti_table(sc: SlotComplex, window: int, parallel: bool = False) -> dict:
    """Betti numbers of every graded piece over the window; assembly is
    keyed by degree so parallel evaluation cannot change the result."""
    degs = window_degrees(window)

    def one(sigma):
        return sigma, tuple(sc.graded_piece(sigma).homology_ranks())

    if parallel:
        with ThreadPoolExecutor() as pool:
            results = dict(pool.map(one, degs))
    else:
        results = dict(map(one, degs))
    return {d: results[d] for d in sorted(results)}
