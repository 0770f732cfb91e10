"""Base groups under the lamplighter: free groups F_k and lattices Z^d.

Elements are plain tuples. A free-group element is a reduced word, stored as
signed generator indices (+1..+k for generators, -1..-k for inverses, never 0).
A lattice element is a vector of d integers. The group object carries the
variant; mixing elements across groups raises VariantMismatchError.

Boundary points: an `End` is an infinite reduced word over F_k, stored as a
finite prefix plus an eventually-repeating period (empty period = a
finite-precision estimate that only pins down the prefix). A `Direction` is a
unit vector on the sphere at infinity of Z^d.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .errors import (
    CapExceededError,
    InexactBoundaryError,
    VariantMismatchError,
    ZeroDistanceError,
)

Word = tuple[int, ...]
Vec = tuple[int, ...]
Element = tuple[int, ...]

DEFAULT_BALL_CAP = 14


def reduce_word(letters) -> Word:
    """Freely reduce a letter sequence (cancel adjacent inverse pairs)."""
    out: list[int] = []
    for let in letters:
        if out and out[-1] == -let:
            out.pop()
        else:
            out.append(let)
    return tuple(out)


def concat(a: Word, b: Word) -> Word:
    """Product of two already-reduced words; cancellation only at the seam."""
    if not a:
        return b
    if not b:
        return a
    la = list(a)
    i = 0
    while la and i < len(b) and la[-1] == -b[i]:
        la.pop()
        i += 1
    return tuple(la) + b[i:]


def invert_word(a: Word) -> Word:
    return tuple(-let for let in reversed(a))


@dataclass(frozen=True)
class FreeGroup:
    """The free group F_k on k >= 2 generators, with its 2k-regular tree."""

    k: int
    ball_cap: int = DEFAULT_BALL_CAP

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("free rank must be >= 2 (use Lattice(1) for Z)")

    @property
    def identity(self) -> Word:
        return ()

    def generators(self) -> list[Word]:
        return [(i,) for i in range(1, self.k + 1)]

    def validate(self, a) -> Word:
        if not isinstance(a, tuple):
            raise VariantMismatchError(f"free-group element must be a tuple, got {type(a).__name__}")
        for i, let in enumerate(a):
            if not isinstance(let, int) or let == 0 or abs(let) > self.k:
                raise VariantMismatchError(f"letter {let!r} not in +-1..+-{self.k}")
            if i and a[i - 1] == -let:
                raise VariantMismatchError(f"word {a} is not reduced at position {i}")
        return a

    def multiply(self, a: Word, b: Word) -> Word:
        return concat(a, b)

    def inverse(self, a: Word) -> Word:
        return invert_word(a)

    def length(self, a: Word) -> int:
        return len(a)

    def distance(self, a: Word, b: Word) -> int:
        """Word distance: length of a^-1 b, i.e. tree distance."""
        m = min(len(a), len(b))
        i = 0
        while i < m and a[i] == b[i]:
            i += 1
        return (len(a) - i) + (len(b) - i)

    def sphere_size(self, n: int) -> int:
        if n == 0:
            return 1
        return 2 * self.k * (2 * self.k - 1) ** (n - 1)

    def ball_size(self, n: int) -> int:
        q = 2 * self.k - 1
        return 1 + 2 * self.k * (q**n - 1) // (q - 1)

    def ball(self, center: Word, n: int) -> "Ball":
        if n < 0:
            raise ValueError("radius must be >= 0")
        if n > self.ball_cap:
            raise CapExceededError("ball_cap", self.ball_cap, n)
        elements: list[Word] = []
        # Enumerate reduced words radially; left-translate by the center.
        frontier: list[Word] = [()]
        elements.append(center)
        for _ in range(n):
            nxt: list[Word] = []
            for w in frontier:
                last = w[-1] if w else 0
                for let in range(-self.k, self.k + 1):
                    if let == 0 or let == -last:
                        continue
                    nxt.append(w + (let,))
            for w in nxt:
                elements.append(concat(center, w))
            frontier = nxt
        return Ball(center=center, radius=n, elements=tuple(elements))


@dataclass(frozen=True)
class Lattice:
    """The lattice Z^d with generators +-e_i and the l1 word metric."""

    d: int
    ball_cap: int = DEFAULT_BALL_CAP

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("lattice dimension must be >= 1")

    @property
    def identity(self) -> Vec:
        return (0,) * self.d

    def generators(self) -> list[Vec]:
        out = []
        for i in range(self.d):
            e = [0] * self.d
            e[i] = 1
            out.append(tuple(e))
        return out

    def validate(self, a) -> Vec:
        if not isinstance(a, tuple) or len(a) != self.d:
            raise VariantMismatchError(f"lattice element must be a {self.d}-tuple, got {a!r}")
        for c in a:
            if not isinstance(c, int):
                raise VariantMismatchError(f"lattice coordinate {c!r} is not an integer")
        return a

    def multiply(self, a: Vec, b: Vec) -> Vec:
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a: Vec) -> Vec:
        return tuple(-x for x in a)

    def length(self, a: Vec) -> int:
        return sum(abs(x) for x in a)

    def distance(self, a: Vec, b: Vec) -> int:
        return sum(abs(x - y) for x, y in zip(a, b))

    def ball_size(self, n: int) -> int:
        return sum(
            2**i * math.comb(self.d, i) * math.comb(n, i)
            for i in range(0, min(self.d, n) + 1)
        )

    def ball(self, center: Vec, n: int) -> "Ball":
        if n < 0:
            raise ValueError("radius must be >= 0")
        if n > self.ball_cap:
            raise CapExceededError("ball_cap", self.ball_cap, n)
        elements: list[Vec] = []

        def rec(prefix: list[int], budget: int, axis: int):
            if axis == self.d - 1:
                for c in range(-budget, budget + 1):
                    elements.append(tuple(prefix + [c + center[axis]]))
                return
            for c in range(-budget, budget + 1):
                prefix.append(c + center[axis])
                rec(prefix, budget - abs(c), axis + 1)
                prefix.pop()

        rec([], n, 0)
        return Ball(center=center, radius=n, elements=tuple(elements))


BaseGroup = Union[FreeGroup, Lattice]


@dataclass(frozen=True)
class Ball:
    center: Element
    radius: int
    elements: tuple[Element, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in set(self.elements)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)


def ball_by_bfs(group: BaseGroup, center: Element, n: int) -> set[Element]:
    """Independent ball enumeration: breadth-first search over generators."""
    gens = []
    for g in group.generators():
        gens.append(g)
        gens.append(group.inverse(g))
    seen = {center}
    frontier = deque([center])
    for _ in range(n):
        nxt = deque()
        while frontier:
            w = frontier.popleft()
            for g in gens:
                y = group.multiply(w, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


# --- boundary points ---------------------------------------------------------


def _primitive(period: Word) -> Word:
    """Shortest word whose repetition gives the same infinite tail."""
    p = len(period)
    for q in range(1, p):
        if p % q == 0 and period == period[: q] * (p // q):
            return period[:q]
    return period


@dataclass(frozen=True)
class End:
    """An end of the tree: the infinite reduced word prefix . period^inf.

    An empty period marks a finite-precision end (a simulation estimate): only
    the prefix is known. Exact ends are canonicalized on construction, so
    structural equality is end equality. `promoted` flags estimates that were
    upgraded to exact ends by appending a periodic tail.
    """

    prefix: Word
    period: Word = ()
    promoted: bool = False

    def __post_init__(self):
        pref, per = self.prefix, self.period
        if reduce_word(pref) != pref:
            raise ValueError(f"end prefix {pref} is not reduced")
        if per:
            if reduce_word(per) != per:
                raise ValueError(f"end period {per} is not reduced")
            if per[-1] == -per[0]:
                raise ValueError(f"end period {per} cancels against itself")
            if pref and pref[-1] == -per[0]:
                raise ValueError(f"end {pref}.{per} cancels at the junction")
            per = _primitive(per)
            pref_l = list(pref)
            # Absorb any trailing copy of the (rotated) period into the tail.
            while pref_l and pref_l[-1] == per[-1]:
                pref_l.pop()
                per = (per[-1],) + per[:-1]
            object.__setattr__(self, "prefix", tuple(pref_l))
            object.__setattr__(self, "period", per)

    @property
    def exact(self) -> bool:
        return bool(self.period)

    def letters(self) -> Iterator[int]:
        """The infinite reduced word, lazily."""
        yield from self.prefix
        if not self.period:
            return
        while True:
            yield from self.period

    def head(self, n: int) -> Word:
        """First n letters; for estimates, at most the known prefix."""
        out: list[int] = []
        for let in self.letters():
            if len(out) == n:
                break
            out.append(let)
        return tuple(out)

    def promote(self, period: Word) -> "End":
        """Upgrade a finite-precision end to an exact one, flagged as promoted."""
        if self.exact:
            return self
        return End(self.prefix, period, promoted=True)


@dataclass(frozen=True)
class Direction:
    """A point of the sphere at infinity of Z^d: a unit vector.

    `axis`, when present, is an exact integer vector positively proportional
    to the direction; half-space geometry uses it for exact sign tests.
    """

    components: tuple[float, ...]
    axis: tuple[int, ...] | None = None

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.components))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"direction norm {norm} not within 1e-9 of 1")
        if self.axis is not None:
            dot = sum(a * c for a, c in zip(self.axis, self.components))
            if len(self.axis) != len(self.components) or dot <= 0:
                raise ValueError("axis is not positively proportional to the direction")

    @staticmethod
    def from_vector(v) -> "Direction":
        """Normalize a nonzero rational/integer vector, keeping an exact axis."""
        fracs = [Fraction(c) for c in v]
        if all(c == 0 for c in fracs):
            raise ValueError("zero vector has no direction")
        denom = math.lcm(*(c.denominator for c in fracs))
        ints = [int(c * denom) for c in fracs]
        g = math.gcd(*(abs(c) for c in ints))
        axis = tuple(c // g for c in ints)
        norm = math.sqrt(sum(c * c for c in axis))
        return Direction(tuple(c / norm for c in axis), axis=axis)

    def negated(self) -> "Direction":
        return Direction(
            tuple(-c for c in self.components),
            axis=None if self.axis is None else tuple(-c for c in self.axis),
        )


BoundaryPoint = Union[End, Direction]


def act_on_boundary(group: BaseGroup, g: Element, u: BoundaryPoint) -> BoundaryPoint:
    """Left action of the group on its boundary.

    Free groups concatenate and re-reduce, unrolling period copies while the
    junction still cancels; lattice translations fix every sphere direction.
    """
    if isinstance(u, End):
        if not isinstance(group, FreeGroup):
            raise VariantMismatchError("ends belong to free-group boundaries")
        group.validate(g)
        w = concat(g, u.prefix)
        if u.period:
            while w and w[-1] == -u.period[0]:
                w = concat(w, u.period)
        return End(w, u.period, promoted=u.promoted)
    if isinstance(u, Direction):
        if not isinstance(group, Lattice):
            raise VariantMismatchError("directions belong to lattice boundaries")
        group.validate(g)
        return u
    raise VariantMismatchError(f"not a boundary point: {u!r}")


def common_prefix_with_end(w: Word, u: End) -> int:
    """Length of the longest common prefix of a word with the end's ray."""
    i = 0
    for let in u.letters():
        if i >= len(w) or w[i] != let:
            break
        i += 1
    return i


def ends_equal_prefix(u: End, v: End, depth: int) -> bool:
    return u.head(depth) == v.head(depth)


def require_exact(u: BoundaryPoint) -> BoundaryPoint:
    if isinstance(u, End) and not u.exact:
        raise InexactBoundaryError(
            "operation needs an exact end; promote the estimate with an explicit period"
        )
    return u


def cp_ratio(group: BaseGroup, x: Element, y: Element) -> Fraction:
    """The convergence-property statistic d(x, y) / d(x, e), exact."""
    dx = group.length(x)
    if dx == 0:
        raise ZeroDistanceError("cp_ratio is undefined at the identity (zero distance)")
    return Fraction(group.distance(x, y), dx)


# --- parsing / formatting ----------------------------------------------------

_ALPHA = "abcdefghijklmnopqrstuvwxyz"


def parse_word(s: str, k: int) -> Word:
    """Parse a..z as generators 1..k and A..Z as their inverses; ``e`` or empty is the identity."""
    s = s.strip()
    if s in ("", "e"):
        return ()
    letters = []
    for ch in s:
        low = ch.lower()
        idx = _ALPHA.find(low)
        if idx < 0 or idx >= k:
            raise ValueError(f"letter {ch!r} outside the first {k} generators")
        letters.append(-(idx + 1) if ch.isupper() else idx + 1)
    return reduce_word(letters)


def format_word(w: Word) -> str:
    if not w:
        return "e"
    out = []
    for let in w:
        ch = _ALPHA[abs(let) - 1]
        out.append(ch.upper() if let < 0 else ch)
    return "".join(out)


def parse_vector(s: str, d: int) -> Vec:
    parts = [p for p in s.strip().split(",") if p != ""]
    if s.strip() in ("", "e"):
        return (0,) * d
    if len(parts) != d:
        raise ValueError(f"expected {d} comma-separated integers, got {s!r}")
    return tuple(int(p) for p in parts)


def format_vector(v: Vec) -> str:
    return ",".join(str(c) for c in v)


def format_element(group: BaseGroup, x: Element) -> str:
    return format_word(x) if isinstance(group, FreeGroup) else format_vector(x)


def parse_element(group: BaseGroup, s: str) -> Element:
    if isinstance(group, FreeGroup):
        return parse_word(s, group.k)
    return parse_vector(s, group.d)


def parse_end(s: str, k: int) -> End:
    """Parse ``prefix.period`` end syntax, e.g. ``a.a``, ``ab.ab``, ``b.aB``."""
    if "." not in s:
        raise ValueError(f"end spec {s!r} needs a '.' between prefix and period")
    pre, per = s.split(".", 1)
    return End(parse_word(pre, k), parse_word(per, k))


def format_end(u: End) -> str:
    return f"{format_word(u.prefix) if u.prefix else ''}.{format_word(u.period) if u.period else ''}"
