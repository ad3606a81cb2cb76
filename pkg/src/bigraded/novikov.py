"""Truncated arithmetic in the eight Novikov-type completions.

Each region is a vertex completion <<x^{s}, y^{t}>> or an edge completion
[u, u^{-1}]<<w^{s}>> of the graded ring.  A region carries a linear
filtration functional on degrees: the sum of the outward coordinates for
vertex regions, the outward completed coordinate for edge regions.  The
functional is additive under multiplication, bounded below on every ring
element, and strictly raised by every admissible degree shift, which is
what makes truncation at a cutoff well defined and geometric series
finite.

Truncation drops terms beyond the cutoff and records a leak flag, so a
certificate asserting an identity holds "modulo filtration > N" stays
honest about what was discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from . import matrices as mx
from .complexes import FreeComplex
from .grading import Degree, Involution
from .polynomials import Poly
from .rings import GradedElement, InternalConsistencyError, RingInstance


class NotFiltrationRaising(ValueError):
    """The operator cannot be inverted by a geometric series here."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class NovikovRegionSpec:
    """One of the eight completions, tagged by kind and sign pattern.

    kind "vertex": signs = (sx, sy) with +1 for a positively completed
    axis; kind "edge": axis in {"x", "y"} names the completed coordinate
    and sign its direction, the other coordinate staying Laurent.
    """

    kind: str
    signs: tuple = (1, 1)
    axis: str = "x"
    sign: int = 1

    @property
    def name(self) -> str:
        if self.kind == "vertex":
            sx = "x" if self.signs[0] > 0 else "xinv"
            sy = "y" if self.signs[1] > 0 else "yinv"
            return f"nov-{sx}-{sy}"
        w = self.axis if self.sign > 0 else f"{self.axis}inv"
        return f"nov-{w}"

    def filtration(self, deg) -> int:
        x, y = deg[0], deg[1]
        if self.kind == "vertex":
            return self.signs[0] * x + self.signs[1] * y
        return self.sign * (x if self.axis == "x" else y)

    def admissible_shift(self, delta) -> bool:
        """Whether repeated application of a shift by delta stays in the
        region and eventually exceeds any cutoff."""
        x, y = delta[0], delta[1]
        if self.kind == "vertex":
            ox, oy = self.signs[0] * x, self.signs[1] * y
            return ox >= 0 and oy >= 0 and ox + oy >= 1
        return self.filtration(delta) >= 1

    def transform(self, inv: Involution) -> "NovikovRegionSpec":
        """The region spec matching this one after regrading by inv: the
        new filtration of inv(deg) equals the old filtration of deg."""
        back = inv.inverse()
        if self.kind == "vertex":
            rows = (back(Degree(1, 0)), back(Degree(0, 1)))
            sx = self.signs[0] * rows[0][0] + self.signs[1] * rows[0][1]
            sy = self.signs[0] * rows[1][0] + self.signs[1] * rows[1][1]
            return NovikovRegionSpec("vertex", (sx, sy))
        # edge: the functional is sign * coordinate(axis)
        e_x = back(Degree(1, 0))
        e_y = back(Degree(0, 1))
        old = (lambda d: self.sign * (d[0] if self.axis == "x" else d[1]))
        fx, fy = old(e_x), old(e_y)
        if fx != 0:
            return NovikovRegionSpec("edge", axis="x", sign=fx)
        return NovikovRegionSpec("edge", axis="y", sign=fy)

    def normalizing_involution(self) -> Involution:
        """An involution inv with self.transform(inv) the canonical region
        (vertex (+,+), or the positively completed x edge)."""
        if self.kind == "vertex":
            sx, sy = self.signs
            return Involution(((sx, 0), (0, sy)), f"norm{self.name}")
        if self.axis == "x":
            return Involution(((self.sign, 0), (0, 1)), f"norm{self.name}")
        return Involution(((0, self.sign), (1, 0)), f"norm{self.name}")


VERTEX_REGIONS = [NovikovRegionSpec("vertex", (sx, sy))
                  for sx in (1, -1) for sy in (1, -1)]
EDGE_REGIONS = [NovikovRegionSpec("edge", axis=a, sign=s)
                for a in ("x", "y") for s in (1, -1)]
ALL_REGIONS = VERTEX_REGIONS + EDGE_REGIONS
REGION_BY_NAME = {r.name: r for r in ALL_REGIONS}


def region_from_name(name: str) -> NovikovRegionSpec:
    if name not in REGION_BY_NAME:
        raise ValueError(f"unknown Novikov region {name!r}; "
                         f"choose from {sorted(REGION_BY_NAME)}")
    return REGION_BY_NAME[name]


class NovikovElement:
    """A finite truncated series: ring element terms with filtration at
    most the cutoff, plus a leak flag recording dropped terms."""

    __slots__ = ("ring", "region", "cutoff", "poly", "leaked")

    def __init__(self, ring, region, cutoff, poly, leaked=False):
        self.ring = ring
        self.region = region
        self.cutoff = cutoff
        kept, dropped = _filter_poly(ring, region, cutoff, poly)
        self.poly = kept
        self.leaked = leaked or dropped

    def _check(self, other):
        if (other.ring != self.ring or other.region != self.region
                or other.cutoff != self.cutoff):
            raise ValueError("mixed Novikov contexts")

    def __add__(self, other):
        self._check(other)
        return NovikovElement(self.ring, self.region, self.cutoff,
                              self.poly + other.poly, self.leaked or other.leaked)

    def __sub__(self, other):
        self._check(other)
        return NovikovElement(self.ring, self.region, self.cutoff,
                              self.poly - other.poly, self.leaked or other.leaked)

    def __neg__(self):
        return NovikovElement(self.ring, self.region, self.cutoff,
                              -self.poly, self.leaked)

    def __mul__(self, other):
        self._check(other)
        prod = self.ring.normal_form(self.poly * other.poly)
        return NovikovElement(self.ring, self.region, self.cutoff, prod,
                              self.leaked or other.leaked)

    def __bool__(self):
        return bool(self.poly)

    def __eq__(self, other):
        return (isinstance(other, NovikovElement)
                and other.ring == self.ring and other.region == self.region
                and other.cutoff == self.cutoff and other.poly == self.poly)

    def __hash__(self):
        return hash((self.ring, self.region, self.cutoff, self.poly))

    def truncate(self, cutoff: int) -> "NovikovElement":
        if cutoff > self.cutoff:
            raise ValueError("cannot reveal terms beyond the original cutoff")
        return NovikovElement(self.ring, self.region, cutoff, self.poly, self.leaked)

    def graded(self) -> GradedElement:
        return GradedElement(self.ring, self.poly)

    def filtration_floor(self):
        degs = self.graded().degrees()
        if not degs:
            return None
        return min(self.region.filtration(d) for d in degs)

    def terms_below(self, level: int):
        """Homogeneous components with filtration <= level."""
        out = {}
        for deg, comp in self.graded().components().items():
            if self.region.filtration(deg) <= level:
                out[deg] = comp
        return out

    def __repr__(self):
        leak = "+..." if self.leaked else ""
        return f"<nov {self.region.name} N={self.cutoff} {self.poly!r}{leak}>"


def _filter_poly(ring, region, cutoff, poly):
    kept = {}
    dropped = False
    for e, c in poly.terms.items():
        if region.filtration(ring.monomial_weight(e)) <= cutoff:
            kept[e] = c
        else:
            dropped = True
    return Poly(ring.field, ring.arity, kept, normalize=False), dropped


def induce_element(el: GradedElement, region, cutoff) -> NovikovElement:
    return NovikovElement(el.ring, region, cutoff, el.poly)


def nov_zero(ring, region, cutoff):
    return NovikovElement(ring, region, cutoff, Poly.zero(ring.field, ring.arity))


def nov_one(ring, region, cutoff):
    return NovikovElement(ring, region, cutoff, Poly.constant(ring.field, ring.arity, 1))


class NovikovComplex:
    """A free complex with the same differential matrices, read in the
    truncated completion."""

    def __init__(self, ring, region, cutoff, lo, ranks, diffs):
        self.ring = ring
        self.region = region
        self.cutoff = cutoff
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
        if n in self.diffs:
            return self.diffs[n]
        return mx.mzeros(self.zero(), self.rank(n - 1), self.rank(n))

    def zero(self):
        return nov_zero(self.ring, self.region, self.cutoff)

    def one(self):
        return nov_one(self.ring, self.region, self.cutoff)

    def truncate(self, cutoff: int) -> "NovikovComplex":
        diffs = {n: [[e.truncate(cutoff) for e in row] for row in m]
                 for n, m in self.diffs.items()}
        return NovikovComplex(self.ring, self.region, cutoff, self.lo, self.ranks, diffs)


def novikov_induce(c: FreeComplex, region: NovikovRegionSpec, cutoff: int) -> NovikovComplex:
    """Tensor a free complex with a completion, truncated at the cutoff."""
    diffs = {}
    for n, m in c.diffs.items():
        diffs[n] = [[induce_element(e, region, cutoff) for e in row] for row in m]
    return NovikovComplex(c.ring, region, cutoff, c.lo, c.ranks, diffs)


# -- geometric series inverses ---------------------------------------------------


def _shift_witness(region, element):
    """First homogeneous component whose shift is not admissible."""
    for deg in element.graded().degrees():
        if not region.admissible_shift(deg):
            return deg
    return None


def geometric_inverse(op, cutoff: int, max_iter=None):
    """Inverse of (id - op) as the truncated series sum op^k.

    `op` is a Novikov element (multiplication operator) or a square matrix
    of Novikov elements; every homogeneous component of it must be an
    admissible, strictly filtration-raising shift for the region.
    """
    if isinstance(op, NovikovElement):
        return _geometric_inverse_matrix([[op]], cutoff, max_iter)[0][0]
    return _geometric_inverse_matrix(op, cutoff, max_iter)


def _geometric_inverse_matrix(op, cutoff, max_iter=None):
    n = len(op)
    sample = op[0][0]
    ring, region = sample.ring, sample.region
    for row in op:
        for el in row:
            w = _shift_witness(region, el)
            if w is not None:
                raise NotFiltrationRaising(
                    f"component of degree {tuple(w)} does not raise the "
                    f"{region.name} filtration", w)
    zero = nov_zero(ring, region, sample.cutoff)
    one = nov_one(ring, region, sample.cutoff)
    acc = mx.midentity(zero, one, n)
    power = mx.midentity(zero, one, n)
    limit = max_iter if max_iter is not None else cutoff + 2
    for _ in range(limit + 1):
        power = mx.mmul(op, power, zero)
        if mx.mis_zero(power):
            break
        acc = mx.madd(acc, power)
    else:
        raise InternalConsistencyError(
            "geometric series did not terminate within the cutoff bound")
    return acc


def invert_element(z: NovikovElement) -> NovikovElement:
    """Full inverse of a ring element in the truncated completion.

    Splits z as unit * (1 - w) with the unit the filtration-minimal part
    (which must be a single invertible monomial) and w strictly raising.
    Raises NotFiltrationRaising when no such splitting exists.
    """
    ring, region = z.ring, z.region
    if not z:
        raise ZeroDivisionError("inverse of 0")
    comps = z.graded().components()
    floor = min(region.filtration(d) for d in comps)
    min_part = [(d, c) for d, c in comps.items()
                if region.filtration(d) == floor]
    if len(min_part) != 1 or len(min_part[0][1].poly.terms) != 1:
        raise NotFiltrationRaising(
            f"filtration-minimal part of {z!r} is not a single monomial",
            min_part[0][0])
    deg, comp = min_part[0]
    (exps, coeff), = comp.poly.terms.items()
    if not ring.allow_negative and any(exps):
        raise NotFiltrationRaising(
            f"leading monomial of {z!r} is not a unit in {ring.name}", deg)
    unit_inv = ring.monomial(tuple(-e for e in exps), ring.field.inv(coeff))
    # the inverse shifts filtration by -floor, so the series needs that
    # much extra working precision before re-truncating
    work = z.cutoff + max(0, floor)
    u_inv = induce_element(unit_inv, region, work)
    z_work = NovikovElement(ring, region, work, z.poly, z.leaked)
    w = nov_one(ring, region, work) - u_inv * z_work
    witness = _shift_witness(region, w)
    if witness is not None:
        raise NotFiltrationRaising(
            f"{z!r} is not invertible over {region.name}: residual shift "
            f"{tuple(witness)} does not raise the filtration", witness)
    series = geometric_inverse(w, work)
    return (series * u_inv).truncate(z.cutoff)


# -- contraction certificates ------------------------------------------------------


@dataclass
class CertificateResult:
    region: str
    cutoff: int
    ok: bool
    status: str
    witness: object = None
    leaked: bool = False

    def to_jsonable(self):
        return {
            "region": self.region,
            "cutoff": self.cutoff,
            "ok": self.ok,
            "status": self.status,
            "witness": _witness_jsonable(self.witness),
            "leaked": self.leaked,
        }


def _witness_jsonable(w):
    if w is None:
        return None
    if isinstance(w, (tuple, list)):
        return [_witness_jsonable(v) for v in w]
    if isinstance(w, Degree):
        return [w.x, w.y]
    return str(w)


def verify_contraction(nc: NovikovComplex, h: dict, check_cutoff: int) -> CertificateResult:
    """Check that dh + hd - id has no residual term of filtration at most
    check_cutoff.  h maps level n to n+1 as matrices of Novikov elements
    carrying the complex's working cutoff."""
    zero = nc.zero()
    one = nc.one()
    leaked = False
    for n in nc.levels():
        r = nc.rank(n)
        if r == 0:
            continue
        acc = mx.mzeros(zero, r, r)
        if n in h and nc.rank(n + 1) > 0:
            acc = mx.madd(acc, mx.mmul(nc.diff(n + 1), h[n], zero))
        if (n - 1) in h and nc.rank(n - 1) > 0:
            acc = mx.madd(acc, mx.mmul(h[n - 1], nc.diff(n), zero))
        residual = mx.msub(acc, mx.midentity(zero, one, r))
        for i, row in enumerate(residual):
            for j, el in enumerate(row):
                leaked = leaked or el.leaked
                bad = el.terms_below(check_cutoff)
                if bad:
                    deg = sorted(bad)[0]
                    return CertificateResult(
                        nc.region.name, check_cutoff, False, "residual",
                        witness=(n, i, j, deg), leaked=leaked)
    return CertificateResult(nc.region.name, check_cutoff, True, "ok", leaked=leaked)


def margin_for_matrices(region, mats) -> int:
    """Extra working precision needed so one multiplication round by these
    matrices cannot pull dropped terms back under the check cutoff."""
    drop = 0
    for m in mats:
        for row in m:
            for el in row:
                degs = el.degrees() if isinstance(el, GradedElement) else el.graded().degrees()
                for d in degs:
                    drop = max(drop, -region.filtration(d))
    return drop


def reindex_region(region: NovikovRegionSpec, inv: Involution) -> NovikovRegionSpec:
    return region.transform(inv)


def reindex_complex(c: FreeComplex, inv: Involution) -> FreeComplex:
    """The same matrices over the regraded ring."""
    ring = c.ring.reindex(inv)
    diffs = {n: [[GradedElement(ring, e.poly) for e in row] for row in m]
             for n, m in c.diffs.items()}
    return FreeComplex(ring, c.lo, c.ranks, diffs)
