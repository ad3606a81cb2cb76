"""The grading group Z^2 and its axis-preserving involutions."""

from __future__ import annotations

from typing import NamedTuple


class Degree(NamedTuple):
    x: int
    y: int

    def __add__(self, other):
        return Degree(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Degree(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return Degree(-self.x, -self.y)

    def scale(self, k: int) -> "Degree":
        return Degree(k * self.x, k * self.y)

    def amplitude(self) -> int:
        return max(abs(self.x), abs(self.y))


ZERO = Degree(0, 0)
E1 = Degree(1, 0)
E2 = Degree(0, 1)


class Involution:
    """A signed coordinate permutation of Z^2, given by an integer matrix
    [[a, b], [c, d]] acting as (x, y) -> (a x + b y, c x + d y)."""

    def __init__(self, matrix, name=""):
        (a, b), (c, d) = matrix
        self.matrix = ((a, b), (c, d))
        self.name = name

    def __call__(self, deg) -> Degree:
        (a, b), (c, d) = self.matrix
        return Degree(a * deg[0] + b * deg[1], c * deg[0] + d * deg[1])

    def compose(self, other: "Involution") -> "Involution":
        (a, b), (c, d) = self.matrix
        (e, f), (g, h) = other.matrix
        mat = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
        return Involution(mat, name=f"{self.name}*{other.name}".strip("*"))

    def inverse(self) -> "Involution":
        (a, b), (c, d) = self.matrix
        det = a * d - b * c
        # all our maps are signed permutations, so det = +-1
        mat = ((d // det, -b // det), (-c // det, a // det))
        return Involution(mat, name=f"{self.name}^-1" if self.name else "")

    def __eq__(self, other):
        return isinstance(other, Involution) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"Involution({self.name or self.matrix})"


IDENTITY = Involution(((1, 0), (0, 1)), "id")
FLIP_X = Involution(((-1, 0), (0, 1)), "flip_x")
FLIP_Y = Involution(((1, 0), (0, -1)), "flip_y")
SWAP = Involution(((0, 1), (1, 0)), "swap")
FLIP_BOTH = FLIP_X.compose(FLIP_Y)
