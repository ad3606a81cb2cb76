"""Incidence posets and Cech complexes over the face poset of a square.

The square S = [-1,1]^2 has nine faces.  Their barrier cones index
subrings R_*[T_F] and shifted modules R_*[kF + T_F]; the diagrams D(k)
assemble those modules with inclusion maps.  Flag posets of stars carry
the completed rings attached to flags.  All degreewise exactness claims
are certified through windowed graded pieces; the constant-diagram
acyclicity is certified by an explicit chain contraction over the ring
itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from . import linalg
from . import matrices as mx
from .complexes import ChainMap, FreeComplex, mapping_cone
from .grading import Degree
from .pieces import Box, FullPlane, HalfPlanes, Slot, SlotComplex, betti_table
from .rings import RingInstance, find_partition, mu_map, pi_map, TensorSum


# -- the face poset of the square ---------------------------------------------

VERTICES = ("v_bl", "v_br", "v_tl", "v_tr")
EDGES = ("e_b", "e_r", "e_t", "e_l")
FACES = VERTICES + EDGES + ("S",)

BARYCENTRE = {
    "v_bl": Degree(-1, -1), "v_br": Degree(1, -1),
    "v_tl": Degree(-1, 1), "v_tr": Degree(1, 1),
    "e_b": Degree(0, -1), "e_t": Degree(0, 1),
    "e_l": Degree(-1, 0), "e_r": Degree(1, 0),
    "S": Degree(0, 0),
}

FACE_DIM = {f: (0 if f in VERTICES else 1 if f in EDGES else 2) for f in FACES}

# T_F = cone of directions from F into the square.
_T_CONSTRAINTS = {
    "v_bl": [((1, 0), 0), ((0, 1), 0)],
    "v_br": [((-1, 0), 0), ((0, 1), 0)],
    "v_tl": [((1, 0), 0), ((0, -1), 0)],
    "v_tr": [((-1, 0), 0), ((0, -1), 0)],
    "e_b": [((0, 1), 0)],
    "e_t": [((0, -1), 0)],
    "e_l": [((1, 0), 0)],
    "e_r": [((-1, 0), 0)],
    "S": [],
}

# Vertices of each edge, and edges of the square, for the order relation.
EDGE_VERTICES = {
    "e_b": ("v_bl", "v_br"),
    "e_r": ("v_br", "v_tr"),
    "e_t": ("v_tr", "v_tl"),
    "e_l": ("v_tl", "v_bl"),
}


def face_leq(f, g):
    """Face inclusion f <= g."""
    if f == g:
        return True
    if g == "S":
        return True
    if g in EDGE_VERTICES and f in EDGE_VERTICES[g]:
        return True
    return False


def barrier_cone(face) -> HalfPlanes:
    return HalfPlanes(_T_CONSTRAINTS[face])


def shifted_cone(face, k: int) -> HalfPlanes:
    """Support region of R_*[kF + T_F] = k p_F + T_F."""
    return barrier_cone(face).shifted(BARYCENTRE[face].scale(k))


# Incidence numbers from the boundary orientations: an edge contributes +1
# at its head vertex and -1 at its tail, and [S : e] = 1 for every edge.
_EDGE_HEAD_TAIL = {
    "e_b": ("v_br", "v_bl"),
    "e_r": ("v_tr", "v_br"),
    "e_t": ("v_tl", "v_tr"),
    "e_l": ("v_bl", "v_tl"),
}


@dataclass
class IncidencePoset:
    elements: tuple
    leq: object                       # callable (x, y) -> bool for x <= y
    rank: dict
    incidence: dict                   # (x, y) -> nonzero integer

    def rank_elements(self, n):
        return [e for e in self.elements if self.rank[e] == n]

    @property
    def max_rank(self):
        return max(self.rank.values()) if self.elements else 0

    def pairs_between(self, z, x):
        return [y for y in self.elements if self.leq(z, y) and self.leq(y, x)
                and y != z and y != x]

    def incidence_number(self, x, y):
        return self.incidence.get((x, y), 0)


@dataclass
class IncidenceReport:
    ok: bool
    axiom: str = ""
    witness: tuple = ()

    def __bool__(self):
        return self.ok


def validate_incidence(p: IncidencePoset) -> IncidenceReport:
    """Exhaustive check of the three incidence axioms."""
    for (x, y), val in p.incidence.items():
        if val == 0:
            continue
        if not (p.leq(y, x) and x != y and p.rank[y] == p.rank[x] - 1):
            return IncidenceReport(False, "DI1", (x, y))
    for x in p.elements:
        for z in p.elements:
            if z == x or not p.leq(z, x) or p.rank[z] != p.rank[x] - 2:
                continue
            total = sum(
                p.incidence_number(x, y) * p.incidence_number(y, z)
                for y in p.pairs_between(z, x)
            )
            if total != 0:
                return IncidenceReport(False, "DI2", (x, z))
    for x in p.elements:
        if p.rank[x] != 1:
            continue
        total = sum(p.incidence_number(x, y) for y in p.elements
                    if p.leq(y, x) and y != x)
        if total != 0:
            return IncidenceReport(False, "DI3", (x,))
    return IncidenceReport(True)


def face_poset() -> IncidencePoset:
    incidence = {}
    for e, (head, tail) in _EDGE_HEAD_TAIL.items():
        incidence[(e, head)] = 1
        incidence[(e, tail)] = -1
    for e in EDGES:
        incidence[("S", e)] = 1
    return IncidencePoset(FACES, face_leq, dict(FACE_DIM), incidence)


FACE_POSET = face_poset()


# -- flag posets of stars -------------------------------------------------------


def star(face):
    return tuple(g for g in FACES if face_leq(face, g))


def flags_of_star(face):
    """All strictly increasing chains of faces containing `face`."""
    st = sorted(star(face), key=lambda f: FACE_DIM[f])
    flags = []

    def extend(chain, rest):
        for i, g in enumerate(rest):
            if not chain or face_leq(chain[-1], g):
                new = chain + (g,)
                flags.append(new)
                extend(new, rest[i + 1 :])

    extend((), st)
    return flags


def flag_poset(face) -> IncidencePoset:
    flags = flags_of_star(face)
    rank = {f: len(f) - 1 for f in flags}
    incidence = {}
    for f in flags:
        if len(f) < 2:
            continue
        for j in range(len(f)):
            sub = f[:j] + f[j + 1 :]
            incidence[(f, sub)] = (-1) ** j

    def leq(a, b):
        return set(a) <= set(b)

    # order: the SMALLER flag has fewer elements; a >= b iff b is a subchain
    return IncidencePoset(tuple(flags), lambda a, b: set(a) <= set(b), rank, incidence)


def flag_support(flag) -> HalfPlanes:
    """Degreewise support of the completed ring attached to a flag: the
    barrier-cone region of the largest face in the flag (completions add
    infinite sums but no new degrees)."""
    top = max(flag, key=lambda f: FACE_DIM[f])
    return barrier_cone(top)


# -- module diagrams and their Cech complexes ----------------------------------


@dataclass
class ModuleDiagram:
    """A poset-indexed diagram of monomial-supported modules.

    regions[x] is the lattice support of the module at x; maps are the
    inclusion maps (coefficient one), weighted by incidence numbers when
    the Cech complex is formed.
    """

    poset: IncidencePoset
    ring: RingInstance
    regions: dict
    rank: int = 1
    label: str = ""

    def validate_functorial(self):
        """Inclusions compose; here that is region containment checked on
        nothing (regions are predicates), so validate incidences instead."""
        return validate_incidence(self.poset)


def cech(diagram: ModuleDiagram) -> SlotComplex:
    """Cech column complex of a module diagram, levels 0, -1, ..., -maxrank."""
    report = validate_incidence(diagram.poset)
    if not report.ok:
        raise ValueError(f"incidence axioms fail: {report.axiom} at {report.witness}")
    p = diagram.poset
    max_rank = p.max_rank
    ring = diagram.ring
    one = ring.one()

    level_elements = {n: p.rank_elements(n) for n in range(max_rank + 1)}
    levels = []
    for n in range(max_rank, -1, -1):
        levels.append([Slot(diagram.regions[x], diagram.rank, label=str(x))
                       for x in level_elements[n]])
    # levels list is indexed from lo = -max_rank upward
    entries = {}
    for n in range(0, max_rank):
        # differential: level -n -> level -(n+1)
        es = []
        for ti, x in enumerate(level_elements[n + 1]):
            for si, y in enumerate(level_elements[n]):
                c = p.incidence_number(x, y)
                if c:
                    mat = mx.mscale(mx.midentity(ring.zero(), one, diagram.rank),
                                    ring.constant(c))
                    es.append((ti, si, mat))
        entries[-n] = es
    return SlotComplex(ring, -max_rank, levels, entries)


def build_Dk(ring: RingInstance, k: int) -> ModuleDiagram:
    """The nine-entry diagram of shifted barrier-cone modules."""
    if k < 0:
        raise ValueError("k must be non-negative")
    regions = {f: shifted_cone(f, k) for f in FACES}
    return ModuleDiagram(FACE_POSET, ring, regions, label=f"D({k})")


def augmented_dk_complex(ring: RingInstance, k: int) -> SlotComplex:
    """Cech complex of D(k) together with the diagonal co-augmentation from
    the box of degrees [-k, k]^2, as one complex on levels -2..1."""
    base = cech(build_Dk(ring, k))
    levels = [list(base.levels[i]) for i in range(len(base.levels))]
    levels.append([Slot(Box(k), 1, label="box")])
    entries = {n: list(es) for n, es in base.entries.items()}
    vertex_level = [s.label for s in base.levels[-1]]
    one_mat = [[ring.one()]]
    entries[1] = [(ti, 0, one_mat) for ti in range(len(vertex_level))]
    return SlotComplex(ring, -2, levels, entries)


@dataclass
class ExactnessReport:
    ok: bool
    betti: dict
    kernel_total: int = 0
    failures: list = dc_field(default_factory=list)

    def to_jsonable(self):
        return {
            "ok": self.ok,
            "kernel_total": self.kernel_total,
            "betti": {f"{d.x},{d.y}": list(b) for d, b in self.betti.items()},
            "failures": [f"{d.x},{d.y}" for d in self.failures],
        }


def cech_exactness(ring: RingInstance, k: int, window: int,
                   parallel: bool = False) -> ExactnessReport:
    """Degreewise exactness of the augmented D(k) complex over the window,
    plus the total kernel dimension at column 0."""
    sc = augmented_dk_complex(ring, k)
    table = betti_table(sc, window, parallel=parallel)
    failures = [d for d, b in table.items() if any(b)]
    kernel = 0
    for d in table:
        piece = sc.graded_piece(d)
        kernel += piece.kernel_dim(0)  # column 0 sits at level 0
    return ExactnessReport(not failures, table, kernel, failures)


# -- adjoint isomorphism certificates -------------------------------------------


@dataclass
class AdjointReport:
    ok: bool
    checked: int
    failures: list = dc_field(default_factory=list)


def _region_generators(ring, region, window, rng=None):
    for x in range(-window, window + 1):
        for y in range(-window, window + 1):
            d = Degree(x, y)
            if d not in region or not ring.has_degree(d):
                continue
            if ring.component_dim(d) == 1:
                yield d, ring.component_monomial(d)
            elif rng is not None:
                el = ring.sample_homogeneous(d, rng, terms=2)
                if el is not None:
                    yield d, el


def adjoint_iso_check(ring: RingInstance, face_f: str, face_g: str, k: int,
                      window: int, rng=None, tensor_window: int | None = None) -> AdjointReport:
    """Verify that multiplication R_*[kF+T_F] (x)_{A_F} A_G -> R_*[kG+T_G]
    and its partition-of-unity inverse compose to the identity on window
    generators, with the region memberships that make both well defined."""
    if not face_leq(face_f, face_g):
        raise ValueError(f"{face_f} is not a face of {face_g}")
    rho = BARYCENTRE[face_f].scale(k)
    partition = find_partition(ring, rho)
    if partition is None:
        return AdjointReport(False, 0, [("no partition", rho)])

    m_f = shifted_cone(face_f, k)
    m_g = shifted_cone(face_g, k)
    t_f = barrier_cone(face_f)
    t_g = barrier_cone(face_g)
    failures = []
    checked = 0

    for u, v in partition.pairs:
        if u.degree() not in m_f:
            failures.append(("partition left factor outside kF+T_F", u.degree()))

    # alpha_sharp . beta = id on generators of the target module
    for d, z in _region_generators(ring, m_g, window, rng):
        checked += 1
        back = ring.zero()
        for u, v in partition.pairs:
            vz = v * z
            for dd in vz.degrees():
                if dd not in t_g:
                    failures.append(("v*z leaves A_G", d, dd))
            back = back + u * vz
        if back != z:
            failures.append(("alpha_sharp . beta != id", d))

    # beta . alpha_sharp = id on pure tensors, via canonical coordinates
    tw = window if tensor_window is None else tensor_window
    for da, a in _region_generators(ring, m_f, tw, rng):
        for db, b in _region_generators(ring, t_g, tw, rng):
            checked += 1
            original = TensorSum(ring, [(a, b)])
            ab = a * b
            image = TensorSum(ring, [(u, v * ab) for u, v in partition.pairs])
            for u, v in partition.pairs:
                for dd in (v * ab).degrees():
                    if dd not in t_g:
                        failures.append(("beta image leaves A_G", da, db, dd))
            if not original.eq_modulo(image, partition):
                failures.append(("beta . alpha_sharp != id", da, db))
    return AdjointReport(not failures, checked, failures)


# -- the flag diagrams E_F and their exactness ----------------------------------


@dataclass
class FlagRingDescriptor:
    flag: tuple
    support: HalfPlanes
    cutoff: int

    @property
    def completed(self):
        """Faces of the flag other than its top; these are the completed
        directions of the attached ring."""
        top = max(self.flag, key=lambda f: FACE_DIM[f])
        return tuple(f for f in self.flag if f != top)


def build_EF(face: str, cutoff: int, ring: RingInstance) -> ModuleDiagram:
    """Diagram of completed rings over the flag poset of st(face); entries
    are recorded by their degree support plus a completion descriptor."""
    poset = flag_poset(face)
    regions = {flag: flag_support(flag) for flag in poset.elements}
    diagram = ModuleDiagram(poset, ring, regions, label=f"E_{face}")
    diagram.descriptors = {
        flag: FlagRingDescriptor(flag, regions[flag], cutoff) for flag in poset.elements
    }
    return diagram


def augmented_ef_complex(face: str, ring: RingInstance, cutoff: int) -> SlotComplex:
    """Cech complex of E_face co-augmented by A_face along the diagonal."""
    diagram = build_EF(face, cutoff, ring)
    base = cech(diagram)
    levels = [list(ls) for ls in base.levels]
    levels.append([Slot(barrier_cone(face), 1, label=f"A_{face}")])
    entries = {n: list(es) for n, es in base.entries.items()}
    one_mat = [[ring.one()]]
    singletons = base.levels[-1]
    entries[1] = [(ti, 0, one_mat) for ti in range(len(singletons))]
    return SlotComplex(ring, base.lo, levels, entries)


def xi_exactness(face: str, ring: RingInstance, window: int, cutoff: int = 8,
                 parallel: bool = False) -> ExactnessReport:
    """Degreewise exactness of the co-augmented flag complex: the edge case
    is the three-term sequence of power-series rings, the vertex case the
    augmented cube of completions."""
    sc = augmented_ef_complex(face, ring, cutoff)
    table = betti_table(sc, window, parallel=parallel)
    failures = [d for d, b in table.items() if any(b)]
    return ExactnessReport(not failures, table, 0, failures)


# -- constant diagrams, prolongation, and the retraction square -----------------


def _pattern_matrices(field):
    """The augmented face-pattern complex of the square over the field:
    columns 1, 0, -1, -2 with dims 1, 4, 4, 1."""
    iota = [[field.one] for _ in range(4)]
    d0 = linalg.zeros(field, 4, 4)
    for ti, e in enumerate(EDGES):
        head, tail = _EDGE_HEAD_TAIL[e]
        d0[ti][VERTICES.index(head)] = field.one
        d0[ti][VERTICES.index(tail)] = field.neg(field.one)
    dm1 = [[field.one] * 4]
    return {1: iota, 0: d0, -1: dm1}


def pattern_contraction(field, dims, mats):
    """Contraction of a finite exact complex of field vector spaces.

    dims[i] is the dimension at level lo+i; mats[n] maps level n to n-1.
    Returns {n: k_n} with k_n : level n -> level n+1, solving the linear
    system d k + k d = id.
    """
    lo = min(mats) - 1 if mats else 0
    hi = lo + len(dims) - 1
    unknown_slots = []
    offset = {}
    total = 0
    for n in range(lo, hi):
        rows, cols = dims[n + 1 - lo], dims[n - lo]
        offset[n] = total
        unknown_slots.append((n, rows, cols))
        total += rows * cols

    equations = []
    rhs = []

    def mat(n):
        if n in mats:
            return mats[n]
        rows = dims[n - 1 - lo] if lo <= n - 1 <= hi else 0
        cols = dims[n - lo] if lo <= n <= hi else 0
        return linalg.zeros(field, rows, cols)

    for n in range(lo, hi + 1):
        dim_n = dims[n - lo]
        for i in range(dim_n):
            for j in range(dim_n):
                row = [field.zero] * total
                # d_{n+1} k_n contribution
                if n in offset:
                    rows_k = dims[n + 1 - lo]
                    d_next = mat(n + 1)
                    for t in range(rows_k):
                        row[offset[n] + t * dim_n + j] = field.add(
                            row[offset[n] + t * dim_n + j], d_next[i][t])
                # k_{n-1} d_n contribution
                if (n - 1) in offset:
                    d_n = mat(n)
                    cols_k = dims[n - 1 - lo]
                    for t in range(cols_k):
                        row[offset[n - 1] + i * cols_k + t] = field.add(
                            row[offset[n - 1] + i * cols_k + t], d_n[t][j])
                equations.append(row)
                rhs.append(field.one if i == j else field.zero)

    sol = linalg.solve(field, equations, rhs)
    if sol is None:
        raise ValueError("complex is not exact; no contraction exists")
    out = {}
    for n, rows, cols in unknown_slots:
        k = linalg.zeros(field, rows, cols)
        for t in range(rows):
            for j in range(cols):
                k[t][j] = sol[offset[n] + t * cols + j]
        out[n] = k
    return out


_FACE_COLUMNS = {1: ("aug",), 0: VERTICES, -1: EDGES, -2: ("S",)}


def tot_gamma_constant(c: FreeComplex, augmented: bool = True) -> FreeComplex:
    """Totalisation of the (co-augmented) Cech double complex of the
    constant diagram con(C) over the face poset.

    Columns s = 1 (the cone entry C), 0, -1, -2; verticals carry the sign
    (-1)^s.  With the augmentation column this is the mapping cone of
    C -> tot Gamma(con C), up to isomorphism.
    """
    ring = c.ring
    zero = ring.zero()
    columns = [1, 0, -1, -2] if augmented else [0, -1, -2]
    blocks = {s: _FACE_COLUMNS[s] for s in columns}
    field = ring.field
    pattern = _pattern_matrices(field)

    lo = c.lo + min(columns)
    hi = c.hi + max(columns)
    layout = {}
    ranks = []
    for m in range(lo, hi + 1):
        lay = []
        for s in columns:
            t = m - s
            if c.lo <= t <= c.hi:
                for b in blocks[s]:
                    lay.append((s, t, b, c.rank(t)))
        layout[m] = lay
        ranks.append(sum(r for (_, _, _, r) in lay))

    def pattern_coeff(s, bt, bs):
        mat = pattern.get(s)
        if mat is None:
            return 0
        rows = _FACE_COLUMNS[s - 1]
        cols = _FACE_COLUMNS[s]
        return mat[rows.index(bt)][cols.index(bs)]

    diffs = {}
    for m in range(lo + 1, hi + 1):
        src, tgt = layout[m], layout[m - 1]
        mat = mx.mzeros(zero, sum(r for *_, r in tgt), sum(r for *_, r in src))
        row_off = {}
        acc = 0
        for key in tgt:
            row_off[key[:3]] = acc
            acc += key[3]
        col = 0
        for (s, t, b, r) in src:
            # horizontal: column s -> s-1, same chain level
            for (s2, t2, b2, r2) in tgt:
                if s2 == s - 1 and t2 == t:
                    coeff = pattern_coeff(s, b2, b)
                    if coeff:
                        r0 = row_off[(s2, t2, b2)]
                        el = ring.constant(coeff)
                        for i in range(r):
                            mat[r0 + i][col + i] = mat[r0 + i][col + i] + el
            # vertical: same column, chain level t -> t-1, sign (-1)^s
            key = (s, t - 1, b)
            if key in row_off:
                r0 = row_off[key]
                d = c.diff(t)
                sign = -1 if s % 2 else 1
                for i in range(c.rank(t - 1)):
                    for j in range(r):
                        entry = d[i][j] if sign > 0 else -d[i][j]
                        mat[r0 + i][col + j] = mat[r0 + i][col + j] + entry
            col += r
    # store layout for contraction assembly
        diffs[m] = mat
    out = FreeComplex(ring, lo, ranks, diffs)
    out.layout = layout
    out.columns = columns
    return out


@dataclass
class ConAcyclicityReport:
    ok: bool
    window_betti: dict | None = None
    message: str = ""


def con_acyclicity(c: FreeComplex, window: int | None = None) -> ConAcyclicityReport:
    """Certify that the cone of C -> tot Gamma(con C) is contractible.

    The row pattern is the augmented face complex of the square; its field
    contraction is promoted to the totalisation through the invertible
    q = dk + kd, and the identity dh + hd = id is verified by exact matrix
    arithmetic.  A windowed betti table of the cone is attached for rings
    with one-dimensional components.
    """
    tot = tot_gamma_constant(c, augmented=True)
    ring = c.ring
    zero = ring.zero()
    field = ring.field
    pattern = _pattern_matrices(field)
    dims = [1, 4, 4, 1]  # columns 1, 0, -1, -2
    kP = pattern_contraction(field, dims[::-1], { -1: pattern[-1], 0: pattern[0], 1: pattern[1]})

    # assemble k on the totalisation: block from (s, t) to (s+1, t)
    ks = {}
    for m in range(tot.lo, tot.hi + 1):
        src = tot.layout.get(m, [])
        tgt = tot.layout.get(m + 1, [])
        mat = mx.mzeros(zero, sum(r for *_, r in tgt), sum(r for *_, r in src))
        row_off = {}
        acc = 0
        for key in tgt:
            row_off[key[:3]] = acc
            acc += key[3]
        col = 0
        for (s, t, b, r) in src:
            knext = kP.get(s)
            if knext is not None:
                rows = _FACE_COLUMNS[s + 1]
                cols = _FACE_COLUMNS[s]
                for b2 in rows:
                    coeff = knext[rows.index(b2)][cols.index(b)]
                    if coeff != field.zero:
                        key = (s + 1, t, b2)
                        if key in row_off:
                            r0 = row_off[key]
                            el = ring.constant(coeff)
                            for i in range(r):
                                mat[r0 + i][col + i] = mat[r0 + i][col + i] + el
            col += r
        ks[m] = mat

    h = _promote_contraction(tot, ks)
    if not _verify_matrix_contraction(tot, h):
        return ConAcyclicityReport(False, message="contraction identity failed")
    table = None
    if window is not None and ring.component_dim(Degree(0, 0)) is not None:
        from .pieces import from_free_complex
        table = betti_table(from_free_complex(tot), window)
        if any(any(b) for b in table.values()):
            return ConAcyclicityReport(False, table, "window betti nonzero")
    return ConAcyclicityReport(True, table)


def _promote_contraction(tot: FreeComplex, ks: dict) -> dict:
    """h = q^{-1} k where q = dk + kd; q - id is nilpotent because k raises
    the column index and columns are bounded."""
    ring = tot.ring
    zero = ring.zero()
    one = ring.one()

    q = {}
    for m in tot.levels():
        n = tot.rank(m)
        acc = mx.mzeros(zero, n, n)
        if m in ks and tot.rank(m + 1) > 0:
            acc = mx.madd(acc, mx.mmul(tot.diff(m + 1), ks[m], zero))
        if (m - 1) in ks and tot.rank(m - 1) > 0:
            acc = mx.madd(acc, mx.mmul(ks[m - 1], tot.diff(m), zero))
        q[m] = acc

    qinv = {}
    for m, qm in q.items():
        n = len(qm)
        e = mx.msub(mx.midentity(zero, one, n), qm)
        acc = mx.midentity(zero, one, n)
        power = mx.midentity(zero, one, n)
        for _ in range(len(tot.columns) - 1):
            power = mx.mmul(e, power, zero)
            if mx.mis_zero(power):
                break
            acc = mx.madd(acc, power)
        qinv[m] = acc

    return {m: mx.mmul(qinv[m + 1], ks[m], zero) if (m + 1) in qinv else ks[m]
            for m in ks}


def _verify_matrix_contraction(c: FreeComplex, h: dict) -> bool:
    zero = c.ring.zero()
    one = c.ring.one()
    for m in c.levels():
        n = c.rank(m)
        if n == 0:
            continue
        acc = mx.mzeros(zero, n, n)
        if m in h and c.rank(m + 1) > 0:
            acc = mx.madd(acc, mx.mmul(c.diff(m + 1), h[m], zero))
        if (m - 1) in h and c.rank(m - 1) > 0:
            acc = mx.madd(acc, mx.mmul(h[m - 1], c.diff(m), zero))
        if not mx.meq(acc, mx.midentity(zero, one, n)):
            return False
    return True


def gamma_truncate(sc: SlotComplex, p: int) -> SlotComplex:
    """Horizontal truncation of a Cech column complex: keep columns
    -p, ..., 0 (and any co-augmentation column above 0)."""
    keep = [n for n in range(sc.lo, sc.hi + 1) if n >= -p]
    lo = min(keep)
    levels = [sc.slots(n) for n in keep]
    entries = {n: sc.entries[n] for n in sc.entries if n > lo and n in keep}
    return SlotComplex(sc.ring, lo, levels, entries)
