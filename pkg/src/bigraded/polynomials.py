"""Exact multivariate polynomial arithmetic and Buchberger normal forms.

Polynomials are dicts from exponent tuples to nonzero coefficients.
Exponents may be negative (Laurent monomials never enter ideal
arithmetic); quotient rings restrict to ordinary polynomials and fix the
degree-lexicographic order with the declared variable order.
"""

from __future__ import annotations

from itertools import combinations

from .coeffs import UnsupportedDomainError


def deglex_key(exps):
    return (sum(exps), exps)


class Poly:
    """Polynomial with exact coefficients; zero terms are never stored."""

    __slots__ = ("field", "arity", "terms")

    def __init__(self, field, arity, terms=None, normalize=True):
        self.field = field
        self.arity = arity
        if terms and normalize:
            clean = {}
            for e, c in terms.items():
                c = field.convert(c)
                if c != field.zero:
                    clean[tuple(e)] = c
            self.terms = clean
        else:
            self.terms = dict(terms) if terms else {}

    @classmethod
    def zero(cls, field, arity):
        return cls(field, arity, {}, normalize=False)

    @classmethod
    def constant(cls, field, arity, c):
        return cls(field, arity, {(0,) * arity: c})

    @classmethod
    def monomial(cls, field, arity, exps, coeff=1):
        return cls(field, arity, {tuple(exps): coeff})

    @classmethod
    def variable(cls, field, arity, i):
        exps = [0] * arity
        exps[i] = 1
        return cls.monomial(field, arity, exps)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, Poly)
            and self.arity == other.arity
            and self.field == other.field
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.arity, tuple(sorted(self.terms.items()))))

    def __add__(self, other):
        res = dict(self.terms)
        zero = self.field.zero
        for e, c in other.terms.items():
            s = self.field.add(res.get(e, zero), c)
            if s == zero:
                res.pop(e, None)
            else:
                res[e] = s
        return Poly(self.field, self.arity, res, normalize=False)

    def __neg__(self):
        return Poly(
            self.field,
            self.arity,
            {e: self.field.neg(c) for e, c in self.terms.items()},
            normalize=False,
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        field = self.field
        zero = field.zero
        res = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = field.add(res.get(e, zero), field.mul(c1, c2))
                if s == zero:
                    res.pop(e, None)
                else:
                    res[e] = s
        return Poly(field, self.arity, res, normalize=False)

    def scale(self, c):
        c = self.field.convert(c)
        if c == self.field.zero:
            return Poly.zero(self.field, self.arity)
        return Poly(
            self.field,
            self.arity,
            {e: self.field.mul(k, c) for e, k in self.terms.items()},
            normalize=False,
        )

    def mul_monomial(self, exps, coeff):
        return Poly(
            self.field,
            self.arity,
            {
                tuple(a + b for a, b in zip(e, exps)): self.field.mul(c, coeff)
                for e, c in self.terms.items()
            },
            normalize=False,
        )

    def leading(self):
        """Leading (exponent, coeff) under deglex; None for the zero poly."""
        if not self.terms:
            return None
        e = max(self.terms, key=deglex_key)
        return e, self.terms[e]

    def monic(self):
        lead = self.leading()
        if lead is None:
            return self
        return self.scale(self.field.inv(lead[1]))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: deglex_key(t[0]), reverse=True)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(f"v{i}^{k}" for i, k in enumerate(e) if k) or "1"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)


def divides(e1, e2):
    return all(a <= b for a, b in zip(e1, e2))


def reduce_poly(p: Poly, basis) -> Poly:
    """Fully reduce p modulo basis: no remaining term is divisible by any
    basis leading term.  Unique once basis is a reduced Groebner basis."""
    field = p.field
    leads = [(g.leading()[0], g.leading()[1], g) for g in basis if g]
    remainder = Poly.zero(field, p.arity)
    work = p
    while work:
        e, c = work.leading()
        hit = None
        for le, lc, g in leads:
            if divides(le, e):
                hit = (le, lc, g)
                break
        if hit is None:
            t = Poly(field, p.arity, {e: c}, normalize=False)
            remainder = remainder + t
            work = work - t
        else:
            le, lc, g = hit
            shift = tuple(a - b for a, b in zip(e, le))
            work = work - g.mul_monomial(shift, field.div(c, lc))
    return remainder


def s_polynomial(f: Poly, g: Poly) -> Poly:
    ef, cf = f.leading()
    eg, cg = g.leading()
    lcm = tuple(max(a, b) for a, b in zip(ef, eg))
    field = f.field
    sf = f.mul_monomial(tuple(l - a for l, a in zip(lcm, ef)), field.inv(cf))
    sg = g.mul_monomial(tuple(l - a for l, a in zip(lcm, eg)), field.inv(cg))
    return sf - sg


def buchberger(generators) -> list[Poly]:
    """Reduced Groebner basis of the ideal spanned by generators (deglex).

    Pairs whose leading monomials are coprime are skipped (first
    Buchberger criterion); the output is autoreduced and monic.
    """
    gens = [g for g in generators if g]
    if not gens:
        return []
    field = gens[0].field
    if not getattr(field, "is_field", False):
        raise UnsupportedDomainError("Groebner bases need field coefficients")
    if any(k < 0 for g in gens for e in g.terms for k in e):
        raise ValueError("ideal generators must have non-negative exponents")

    basis = [g.monic() for g in gens]
    pairs = list(combinations(range(len(basis)), 2))
    while pairs:
        i, j = pairs.pop()
        ei = basis[i].leading()[0]
        ej = basis[j].leading()[0]
        if all(min(a, b) == 0 for a, b in zip(ei, ej)):
            continue
        rem = reduce_poly(s_polynomial(basis[i], basis[j]), basis)
        if rem:
            basis.append(rem.monic())
            pairs.extend((k, len(basis) - 1) for k in range(len(basis) - 1))

    # Autoreduce: drop members whose lead divides away, then fully reduce.
    basis.sort(key=lambda g: deglex_key(g.leading()[0]))
    reduced = []
    for i, g in enumerate(basis):
        others = reduced + basis[i + 1 :]
        r = reduce_poly(g, others)
        if r:
            reduced.append(r.monic())
    reduced.sort(key=lambda g: deglex_key(g.leading()[0]))
    return reduced


class QuotientRingSpec:
    """A polynomial quotient: arity, relations, and grading weights.

    The Groebner basis is computed once at construction and frozen; every
    relation must be homogeneous for the weight assignment (all monomials
    of one relation share the same weight).
    """

    def __init__(self, arity, relations, weights):
        self.arity = arity
        self.weights = tuple(tuple(w) for w in weights)
        if len(self.weights) != arity:
            raise ValueError("one weight per variable required")
        self.relations = list(relations)
        for rel in self.relations:
            degs = {self.monomial_weight(e) for e in rel.terms}
            if len(degs) > 1:
                raise ValueError(f"relation {rel!r} is not weight-homogeneous")
        self.groebner = buchberger(self.relations)

    def monomial_weight(self, exps):
        wx = sum(e * w[0] for e, w in zip(exps, self.weights))
        wy = sum(e * w[1] for e, w in zip(exps, self.weights))
        return (wx, wy)

    def normal_form(self, p: Poly) -> Poly:
        return reduce_poly(p, self.groebner)
