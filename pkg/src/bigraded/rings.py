"""Graded ring instances with homogeneous-component arithmetic.

Four built-in instances over an exact coefficient field:

* ``laurent`` -- K[x^{+-1}, y^{+-1}] with deg x = (1,0), deg y = (0,1);
* ``kbar``    -- K[a,b,c,d]/(ab+cd-1), graded on the x-axis of Z^2 with
  a, c in degree (1,0) and b, d in degree (-1,0);
* ``khat``    -- the twisted square of kbar on eight variables modulo six
  relations, graded by (group-1 weight, group-2 weight);
* ``cone``    -- the polynomial subring K[x,y] of laurent, kept as a
  negative control (it is not strongly graded).

Elements are kept in Groebner normal form, so equality of elements is
equality of dictionaries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .coeffs import QQ, field_from_name
from .grading import Degree, IDENTITY, Involution, ZERO
from .polynomials import Poly, QuotientRingSpec


class RingMismatchError(ValueError):
    """Operands belong to different ring instances."""


class InternalConsistencyError(AssertionError):
    """A verified algebraic identity failed to hold."""


class RingInstance:
    def __init__(self, name, field, var_names, weights, qspec=None,
                 allow_negative=False, grading_rank=2, twist=IDENTITY):
        self.name = name
        self.field = field
        self.var_names = tuple(var_names)
        self.arity = len(var_names)
        # weights are in the final grading; twist records how that grading
        # sits over the base instance's
        self.weights = tuple(Degree(*w) for w in weights)
        self.qspec = qspec
        self.allow_negative = allow_negative
        self.grading_rank = grading_rank
        self.twist = twist

    # -- identity ---------------------------------------------------------

    def _key(self):
        return (self.name, self.field, self.weights)

    def __eq__(self, other):
        return isinstance(other, RingInstance) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        tag = "" if self.twist == IDENTITY else f"@{self.twist.name}"
        return f"<ring {self.name}{tag} over {self.field!r}>"

    def reindex(self, involution: Involution) -> "RingInstance":
        """Same elements, grading composed with the given involution."""
        return RingInstance(
            self.name, self.field, self.var_names,
            [involution(w) for w in self.weights],
            qspec=self.qspec, allow_negative=self.allow_negative,
            grading_rank=self.grading_rank,
            twist=involution.compose(self.twist),
        )

    # -- elements ---------------------------------------------------------

    def normal_form(self, poly: Poly) -> Poly:
        if self.qspec is None:
            return poly
        return self.qspec.normal_form(poly)

    def element(self, poly: Poly) -> "GradedElement":
        return GradedElement(self, self.normal_form(poly))

    def zero(self) -> "GradedElement":
        return GradedElement(self, Poly.zero(self.field, self.arity))

    def one(self) -> "GradedElement":
        return GradedElement(self, Poly.constant(self.field, self.arity, 1))

    def constant(self, c) -> "GradedElement":
        return GradedElement(self, Poly.constant(self.field, self.arity, c))

    def gen(self, name: str) -> "GradedElement":
        i = self.var_names.index(name)
        return self.element(Poly.variable(self.field, self.arity, i))

    def gens(self):
        return {n: self.gen(n) for n in self.var_names}

    def monomial(self, exps, coeff=1) -> "GradedElement":
        if not self.allow_negative and any(e < 0 for e in exps):
            raise ValueError(f"negative exponents not allowed in {self.name}")
        return self.element(Poly.monomial(self.field, self.arity, exps, coeff))

    def monomial_weight(self, exps) -> Degree:
        x = sum(e * w.x for e, w in zip(exps, self.weights))
        y = sum(e * w.y for e, w in zip(exps, self.weights))
        return Degree(x, y)

    # -- component structure ----------------------------------------------

    def has_degree(self, deg) -> bool:
        """Whether the homogeneous component at deg is nonzero."""
        deg = Degree(*deg)
        back = self.twist.inverse()(deg)
        if self.name == "laurent":
            return True
        if self.name == "cone":
            return back.x >= 0 and back.y >= 0
        if self.name == "kbar":
            return back.y == 0
        return True  # khat: every bidegree is hit

    def component_dim(self, deg):
        """K-dimension of the component, or None when infinite."""
        if self.name in ("laurent", "cone"):
            return 1 if self.has_degree(deg) else 0
        return None

    def component_monomial(self, deg) -> "GradedElement":
        """The canonical monomial basis of a 1-dimensional component."""
        if self.component_dim(deg) != 1:
            raise ValueError(f"component at {deg} is not 1-dimensional")
        back = self.twist.inverse()(Degree(*deg))
        return self.monomial((back.x, back.y))

    def sample_homogeneous(self, deg, rng: random.Random, terms=2):
        """A random nonzero homogeneous element of the given degree, or
        None when the component vanishes."""
        deg = Degree(*deg)
        if not self.has_degree(deg):
            return None
        back = self.twist.inverse()(deg)
        for _ in range(40):
            poly = Poly.zero(self.field, self.arity)
            for _ in range(max(1, terms)):
                exps = self._random_monomial(back, rng)
                coeff = self.field.convert(rng.randint(1, 6))
                poly = poly + Poly.monomial(self.field, self.arity, exps, coeff)
            el = self.element(poly)
            if el.poly:
                return el
        return None

    def _random_monomial(self, back, rng):
        if self.name in ("laurent", "cone"):
            return (back.x, back.y)
        if self.name == "kbar":
            # exponents (i,j,k,l) for a,b,c,d with i-j+k-l = back.x
            i = rng.randint(0, 2)
            k = rng.randint(0, 2)
            excess = i + k - back.x
            if excess < 0:
                i += -excess
                excess = 0
            j = rng.randint(0, excess)
            return (i, j, k, excess - j)
        # khat: one kbar-style monomial per tensor factor
        e1 = self._kbar_exps(back.x, rng)
        e2 = self._kbar_exps(back.y, rng)
        return e1 + e2

    @staticmethod
    def _kbar_exps(k, rng):
        i = rng.randint(0, 2)
        c = rng.randint(0, 2)
        excess = i + c - k
        if excess < 0:
            i += -excess
            excess = 0
        j = rng.randint(0, excess)
        return (i, j, c, excess - j)

    # -- strong grading data ------------------------------------------------

    def unit_types(self):
        """The unit partition types that characterise strong grading."""
        if self.grading_rank == 1:
            axes = [Degree(1, 0), Degree(-1, 0)]
        else:
            axes = [Degree(1, 0), Degree(-1, 0), Degree(0, 1), Degree(0, -1)]
        return [self.twist(a) for a in axes]

    def _unit_partition_pairs(self, base_rho):
        """Generator pairs for a unit degree, in untwisted coordinates."""
        if self.name == "laurent":
            exps = (base_rho.x, base_rho.y)
            inv = (-base_rho.x, -base_rho.y)
            return [(self.monomial(exps), self.monomial(inv))]
        if self.name == "kbar":
            if base_rho.y != 0 or abs(base_rho.x) != 1:
                return None
            g = self.gens()
            if base_rho.x == 1:
                return [(g["a"], g["b"]), (g["c"], g["d"])]
            return [(g["b"], g["a"]), (g["d"], g["c"])]
        if self.name == "khat":
            g = self.gens()
            table = {
                Degree(1, 0): [(g["a1"], g["b1"]), (g["c1"], g["d1"])],
                Degree(-1, 0): [(g["b1"], g["a1"]), (g["d1"], g["c1"])],
                Degree(0, 1): [(g["a2"], g["b2"]), (g["c2"], g["d2"])],
                Degree(0, -1): [(g["b2"], g["a2"]), (g["d2"], g["c2"])],
            }
            return table.get(base_rho)
        return None  # cone: no unit partitions


class GradedElement:
    """Finitely supported sum of homogeneous components, in normal form."""

    __slots__ = ("ring", "poly")

    def __init__(self, ring: RingInstance, poly: Poly):
        self.ring = ring
        self.poly = poly

    def _check(self, other):
        if not isinstance(other, GradedElement) or other.ring != self.ring:
            raise RingMismatchError(
                f"cannot combine elements of {getattr(other, 'ring', other)!r} "
                f"with {self.ring!r}")

    def __add__(self, other):
        self._check(other)
        return GradedElement(self.ring, self.poly + other.poly)

    def __sub__(self, other):
        self._check(other)
        return GradedElement(self.ring, self.poly - other.poly)

    def __neg__(self):
        return GradedElement(self.ring, -self.poly)

    def __mul__(self, other):
        if isinstance(other, GradedElement):
            self._check(other)
            return GradedElement(self.ring, self.ring.normal_form(self.poly * other.poly))
        return GradedElement(self.ring, self.poly.scale(other))

    def __rmul__(self, scalar):
        return GradedElement(self.ring, self.poly.scale(scalar))

    def __eq__(self, other):
        return (
            isinstance(other, GradedElement)
            and other.ring == self.ring
            and other.poly == self.poly
        )

    def __hash__(self):
        return hash((self.ring, self.poly))

    def __bool__(self):
        return bool(self.poly)

    def is_zero(self):
        return not self.poly

    def components(self):
        """Split into homogeneous parts: a dict Degree -> GradedElement."""
        buckets = {}
        for e, c in self.poly.terms.items():
            deg = self.ring.monomial_weight(e)
            buckets.setdefault(deg, {})[e] = c
        return {
            deg: GradedElement(self.ring, Poly(self.ring.field, self.ring.arity, t, normalize=False))
            for deg, t in sorted(buckets.items())
        }

    def degrees(self):
        return sorted({self.ring.monomial_weight(e) for e in self.poly.terms})

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def degree(self):
        """Degree of a homogeneous element (zero counts as degree (0,0))."""
        degs = self.degrees()
        if not degs:
            return ZERO
        if len(degs) > 1:
            raise ValueError(f"element is not homogeneous: degrees {degs}")
        return degs[0]

    def component(self, deg) -> "GradedElement":
        deg = Degree(*deg)
        return self.components().get(deg, self.ring.zero())

    def amplitude(self) -> int:
        """max(|s|, |t|) over component degrees; 0 for the zero element."""
        return max((d.amplitude() for d in self.degrees()), default=0)

    def __repr__(self):
        return f"<{self.ring.name} {self.poly!r}>"


# -- instance construction --------------------------------------------------

_INSTANCES = {}

_KHAT_VARS = ("a1", "b1", "c1", "d1", "a2", "b2", "c2", "d2")


def _kbar_relation(field, arity, offset=0, target=None):
    # ab + cd - 1 on the variable block starting at offset
    def mono(i):
        e = [0] * arity
        e[offset + i] = 1
        return e
    ab = [0] * arity
    ab[offset] = 1
    ab[offset + 1] = 1
    cd = [0] * arity
    cd[offset + 2] = 1
    cd[offset + 3] = 1
    p = Poly(field, arity, {tuple(ab): 1, tuple(cd): 1, (0,) * arity: -1})
    return p


def _khat_relations(field):
    arity = 8
    def pair(i, j):
        e = [0] * arity
        e[i] += 1
        e[j] += 1
        return tuple(e)
    rels = [
        _kbar_relation(field, arity, 0),
        _kbar_relation(field, arity, 4),
    ]
    # identify the two degree-0 subrings: ab, ad, cb, cd match across factors
    for (i, j), (k, l) in [((0, 1), (4, 5)), ((0, 3), (4, 7)),
                           ((2, 1), (6, 5)), ((2, 3), (6, 7))]:
        rels.append(Poly(field, arity, {pair(i, j): 1, pair(k, l): -1}))
    return rels


def make_laurent(field=QQ) -> RingInstance:
    key = ("laurent", field)
    if key not in _INSTANCES:
        _INSTANCES[key] = RingInstance(
            "laurent", field, ("x", "y"), [Degree(1, 0), Degree(0, 1)],
            allow_negative=True)
    return _INSTANCES[key]


def make_cone(field=QQ) -> RingInstance:
    key = ("cone", field)
    if key not in _INSTANCES:
        _INSTANCES[key] = RingInstance(
            "cone", field, ("x", "y"), [Degree(1, 0), Degree(0, 1)])
    return _INSTANCES[key]


def make_kbar(field=QQ) -> RingInstance:
    key = ("kbar", field)
    if key not in _INSTANCES:
        qspec = QuotientRingSpec(
            4, [_kbar_relation(field, 4)],
            [(1, 0), (-1, 0), (1, 0), (-1, 0)])
        _INSTANCES[key] = RingInstance(
            "kbar", field, ("a", "b", "c", "d"),
            [Degree(1, 0), Degree(-1, 0), Degree(1, 0), Degree(-1, 0)],
            qspec=qspec, grading_rank=1)
    return _INSTANCES[key]


def make_khat(field=QQ) -> RingInstance:
    key = ("khat", field)
    if key not in _INSTANCES:
        weights = [(1, 0), (-1, 0), (1, 0), (-1, 0),
                   (0, 1), (0, -1), (0, 1), (0, -1)]
        qspec = QuotientRingSpec(8, _khat_relations(field), weights)
        _INSTANCES[key] = RingInstance(
            "khat", field, _KHAT_VARS, [Degree(*w) for w in weights],
            qspec=qspec)
    return _INSTANCES[key]


_FACTORIES = {
    "laurent": make_laurent,
    "kbar": make_kbar,
    "khat": make_khat,
    "cone": make_cone,
}


def make_ring(name: str, field=QQ) -> RingInstance:
    if name not in _FACTORIES:
        raise ValueError(f"unknown ring instance {name!r}")
    return _FACTORIES[name](field)


def ring_from_names(ring_name: str, coeff_name: str) -> RingInstance:
    return make_ring(ring_name, field_from_name(coeff_name))


# -- partitions of unity ------------------------------------------------------


@dataclass(frozen=True)
class PartitionOfUnity:
    rho: Degree
    pairs: tuple

    def verify(self):
        """Re-check the defining identities; raise on failure."""
        if not self.pairs:
            raise InternalConsistencyError("empty partition")
        ring = self.pairs[0][0].ring
        total = ring.zero()
        for u, v in self.pairs:
            if u.degrees() not in ([], [self.rho]):
                raise InternalConsistencyError(
                    f"left factor {u!r} not homogeneous of degree {self.rho}")
            if v.degrees() not in ([], [-self.rho]):
                raise InternalConsistencyError(
                    f"right factor {v!r} not homogeneous of degree {-self.rho}")
            total = total + u * v
        if total != ring.one():
            raise InternalConsistencyError(f"partition sums to {total!r}, not 1")
        return True

    @property
    def ring(self):
        return self.pairs[0][0].ring


def identity_partition(ring) -> PartitionOfUnity:
    return PartitionOfUnity(ZERO, ((ring.one(), ring.one()),))


def compose_partitions(p: PartitionOfUnity, q: PartitionOfUnity) -> PartitionOfUnity:
    """Partition of type p.rho + q.rho built from all cross products."""
    if p.ring != q.ring:
        raise RingMismatchError("partitions over different rings")
    pairs = tuple(
        (u * u2, v2 * v) for u, v in p.pairs for u2, v2 in q.pairs
        if u * u2 and v2 * v
    )
    out = PartitionOfUnity(p.rho + q.rho, pairs)
    out.verify()
    return out


def find_partition(ring: RingInstance, rho) -> PartitionOfUnity | None:
    """A verified partition of unity of type (rho, -rho), or None if the
    instance has none (the explicit failure value, not an exception)."""
    rho = Degree(*rho)
    if rho == ZERO:
        return identity_partition(ring)
    base = ring.twist.inverse()(rho)

    def unit_partition(step):
        pairs = ring._unit_partition_pairs(step)
        if pairs is None:
            return None
        return PartitionOfUnity(ring.twist(step), tuple(pairs))

    current = identity_partition(ring)
    for axis, count in ((Degree(1, 0), base.x), (Degree(0, 1), base.y)):
        if count == 0:
            continue
        step = axis if count > 0 else -axis
        unit = unit_partition(step)
        if unit is None:
            return None
        for _ in range(abs(count)):
            current = compose_partitions(current, unit)
    current.verify()
    return current


@dataclass
class StrongGradingReport:
    ring_name: str
    ok: bool
    partitions: dict
    failures: list

    def to_jsonable(self):
        return {
            "ring": self.ring_name,
            "ok": self.ok,
            "types": {str(tuple(t)): (p is not None) for t, p in self.partitions.items()},
            "failures": [str(tuple(t)) for t in self.failures],
        }


def check_strongly_graded(ring: RingInstance) -> StrongGradingReport:
    """Search for the unit-type partitions that characterise strong grading.

    Failure is a report outcome, never an exception.
    """
    partitions = {}
    failures = []
    for rho in ring.unit_types():
        p = find_partition(ring, rho)
        partitions[rho] = p
        if p is None:
            failures.append(rho)
    return StrongGradingReport(ring.name, not failures, partitions, failures)


# -- the multiplication isomorphism pi and its inverse mu --------------------


class TensorSum:
    """Formal sum of pure tensors over the degree-0 subring.

    Used for elements of R_lambda (x) R_rho.  Equality is decided through
    canonical coordinates with respect to a partition of unity: the pure
    tensor a (x) b is rewritten so the left factor runs over the u_j of the
    partition, which is legal because v_j * a lands in degree 0.
    """

    def __init__(self, ring: RingInstance, terms):
        self.ring = ring
        self.terms = [(a, b) for a, b in terms if a and b]

    def __add__(self, other):
        return TensorSum(self.ring, self.terms + other.terms)

    def __neg__(self):
        return TensorSum(self.ring, [(-a, b) for a, b in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def coordinates(self, partition: PartitionOfUnity):
        """c_j = sum_i (v_j a_i) b_i for each pair (u_j, v_j)."""
        coords = []
        for _, v in partition.pairs:
            c = self.ring.zero()
            for a, b in self.terms:
                c = c + (v * a) * b
            coords.append(c)
        return tuple(coords)

    def eq_modulo(self, other, partition):
        return self.coordinates(partition) == other.coordinates(partition)


def pi_map(tensor: TensorSum) -> GradedElement:
    """Collapse a tensor through multiplication: x (x) y -> xy."""
    total = tensor.ring.zero()
    for a, b in tensor.terms:
        total = total + a * b
    return total


def mu_map(z: GradedElement, partition: PartitionOfUnity) -> TensorSum:
    """Inverse of pi on the (lambda + rho)-component: z -> sum_j u_j (x) v_j z.

    The partition must have type (lambda, -lambda).
    """
    return TensorSum(z.ring, [(u, v * z) for u, v in partition.pairs])
