"""Step measures for lamplighter walks, with exact rational weights.

Construction validates the weights (positive rationals summing to exactly 1)
and runs a bounded generation check on the support: the projected atoms must
reach every base generator (free groups: products of atoms and inverses up to
a fixed depth; lattices: the integer span of the projected support), and the
lamp coordinates must be reachable. Measures whose support deliberately stays
inside the lamp-free base subgroup (plain base-group walks) are allowed only
with an explicit flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .base import FreeGroup, Lattice
from .errors import MeasureError
from .wreath import LampElement, LampGroup, MetricParams

GENERATION_DEPTH = 6
GENERATION_CAP = 20000


@dataclass(frozen=True)
class StepMeasure:
    """A finitely supported probability measure on Z_r wr Gamma.

    `lamp_free` declares a measure that deliberately lives in the lamp-free
    base subgroup (a plain base-group walk). `require_generating=False` skips
    the support check entirely, for deliberately degenerate laws such as
    Dirac measures in tests and worked examples.
    """

    group: LampGroup
    atoms: tuple  # ((LampElement, Fraction), ...)
    lamp_free: bool = False
    require_generating: bool = True

    def __post_init__(self):
        atoms = tuple(
            (self.group.element(g.config, g.pos), Fraction(p)) for g, p in self.atoms
        )
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise MeasureError("a step measure needs at least one atom")
        total = Fraction(0)
        for g, p in atoms:
            if p <= 0:
                raise MeasureError(f"atom weight {p} is not positive")
            total += p
        if total != 1:
            raise MeasureError(f"atom weights sum to {total}, not 1")
        seen = set()
        for g, _ in atoms:
            key = g.key()
            if key in seen:
                raise MeasureError(f"duplicate atom at {g}")
            seen.add(key)
        if self.lamp_free and any(g.config for g, _ in atoms):
            raise MeasureError("measure flagged lamp_free carries lamp atoms")
        if self.require_generating:
            _check_generation(self.group, [g for g, _ in atoms], self.lamp_free)

    def elements(self) -> list[LampElement]:
        return [g for g, _ in self.atoms]

    def probabilities(self) -> list[Fraction]:
        return [p for _, p in self.atoms]

    def max_move_length(self) -> int:
        return max(self.group.base.length(g.pos) for g, _ in self.atoms)


@dataclass(frozen=True)
class BaseMeasure:
    """A projected step law on the base group."""

    base: object
    atoms: tuple  # ((element, Fraction), ...)

    def drift(self):
        """First-moment vector (lattices only), exact."""
        if not isinstance(self.base, Lattice):
            raise MeasureError("drift vector is defined for lattice measures")
        m = [Fraction(0)] * self.base.d
        for x, p in self.atoms:
            for i, c in enumerate(x):
                m[i] += p * c
        return tuple(m)


def project_measure(mu: StepMeasure) -> BaseMeasure:
    """Group atoms by position and add their weights."""
    acc: dict = {}
    for g, p in mu.atoms:
        acc[g.pos] = acc.get(g.pos, Fraction(0)) + p
    return BaseMeasure(mu.group.base, tuple(sorted(acc.items())))


def reflect_measure(mu: StepMeasure) -> StepMeasure:
    """The reflected law: each atom replaced by its group inverse."""
    return StepMeasure(
        mu.group,
        tuple((mu.group.inverse(g), p) for g, p in mu.atoms),
        lamp_free=mu.lamp_free,
        require_generating=mu.require_generating,
    )


def dirac_measure(group: LampGroup, g: LampElement) -> StepMeasure:
    """A deterministic one-atom law (degenerate by design, so unchecked)."""
    return StepMeasure(
        group,
        ((g, Fraction(1)),),
        lamp_free=not g.config,
        require_generating=False,
    )


def reflect_base_measure(nu: BaseMeasure) -> BaseMeasure:
    acc: dict = {}
    for x, p in nu.atoms:
        y = nu.base.inverse(x)
        acc[y] = acc.get(y, Fraction(0)) + p
    return BaseMeasure(nu.base, tuple(sorted(acc.items())))


@dataclass(frozen=True)
class Moments:
    total: Fraction  # sum p * d_G(id, atom)
    base: Fraction  # sum p * d(e, projected atom)


def first_moment(mu: StepMeasure, params: MetricParams) -> Moments:
    total = Fraction(0)
    base_total = Fraction(0)
    group = mu.group
    for g, p in mu.atoms:
        d = group.distance_from_id(g, params)
        if not isinstance(d, Fraction):
            raise MeasureError(f"atom {g} is outside the exact metric regime")
        total += p * d
        base_total += p * group.base.length(g.pos)
    return Moments(total, base_total)


# --- generation check ----------------------------------------------------------


def _check_generation(group: LampGroup, elements, lamp_free: bool) -> None:
    base = group.base
    positions = [g.pos for g in elements]
    if isinstance(base, FreeGroup):
        _check_free_reach(base, positions)
    else:
        _check_lattice_span(base, positions)
    has_lamps = any(g.config for g in elements)
    if lamp_free:
        return
    if not has_lamps:
        raise MeasureError(
            "no atom touches a lamp, so the support generates only the base "
            "subgroup; pass lamp_free=True for a plain base-group walk"
        )
    states = set()
    for g in elements:
        states.update(g.config.values())
    g = math.gcd(group.r, *states)
    if g != 1:
        raise MeasureError(
            f"lamp states {sorted(states)} generate only {g}*Z_{group.r} fibres"
        )


def _check_free_reach(base: FreeGroup, positions) -> None:
    """Bounded-depth verifier: products of projected atoms and their inverses
    must hit every generator within GENERATION_DEPTH factors."""
    gens = {(i,) for i in range(1, base.k + 1)}
    gens |= {(-i,) for i in range(1, base.k + 1)}
    seed = set()
    for w in positions:
        seed.add(w)
        seed.add(base.inverse(w))
    reached = {(): None}
    frontier = [()]
    for _ in range(GENERATION_DEPTH):
        nxt = []
        for w in frontier:
            for s in seed:
                y = base.multiply(w, s)
                if y not in reached:
                    reached[y] = None
                    nxt.append(y)
            if len(reached) > GENERATION_CAP:
                break
        frontier = nxt
        if gens <= reached.keys():
            return
    missing = sorted(g for g in gens if g not in reached)
    raise MeasureError(
        f"projected support does not reach generators {missing} within "
        f"depth {GENERATION_DEPTH}"
    )


def _check_lattice_span(base: Lattice, positions) -> None:
    index = _lattice_index(positions, base.d)
    if index != 1:
        what = "a rank-deficient sublattice" if index == 0 else f"a sublattice of index {index}"
        raise MeasureError(f"projected support spans {what} of Z^{base.d}")


def _lattice_index(vectors, d: int) -> int:
    """Index of the integer span inside Z^d (0 if rank deficient).

    Integer row echelon by repeated Euclidean elimination; row operations
    preserve the span, and for full rank the index is the pivot product.
    """
    mat = [list(v) for v in vectors if any(v)]
    pivot_row = 0
    pivots = []
    for col in range(d):
        while True:
            nz = [i for i in range(pivot_row, len(mat)) if mat[i][col]]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(mat[i][col]))
            mat[pivot_row], mat[i_min] = mat[i_min], mat[pivot_row]
            head = mat[pivot_row]
            clean = True
            for i in range(pivot_row + 1, len(mat)):
                if mat[i][col]:
                    q = mat[i][col] // head[col]
                    mat[i] = [a - q * b for a, b in zip(mat[i], head)]
                    if mat[i][col]:
                        clean = False
            if clean:
                pivots.append(abs(head[col]))
                pivot_row += 1
                break
    if len(pivots) < d:
        return 0
    return math.prod(pivots)


# --- presets ---------------------------------------------------------------------


def srw_measure(group: LampGroup) -> StepMeasure:
    """Uniform on the base generators and inverses; no lamp atoms."""
    base = group.base
    moves = []
    for g in base.generators():
        moves.append(g)
        moves.append(base.inverse(g))
    p = Fraction(1, len(moves))
    return StepMeasure(
        group, tuple((LampElement({}, m), p) for m in moves), lamp_free=True
    )


def lamp_srw_measure(group: LampGroup) -> StepMeasure:
    """Switch-or-walk: uniform on base generator steps and lamp toggles at e."""
    base = group.base
    atoms = []
    for g in base.generators():
        atoms.append(LampElement({}, g))
        atoms.append(LampElement({}, base.inverse(g)))
    e = base.identity
    for state in range(1, group.r):
        atoms.append(LampElement({e: state}, e))
    p = Fraction(1, len(atoms))
    return StepMeasure(group, tuple((g, p) for g in atoms))


def drift_measure(group: LampGroup, drift) -> StepMeasure:
    """Nearest-neighbour lattice law with the exact drift vector requested.

    Weights 1/(2d) +- m_i/2 on +-e_i; zero-weight atoms are dropped.
    """
    base = group.base
    if not isinstance(base, Lattice):
        raise MeasureError("drift preset needs a lattice base")
    m = [Fraction(c) for c in drift]
    if len(m) != base.d:
        raise MeasureError(f"drift vector needs {base.d} components")
    atoms = []
    for i, e in enumerate(base.generators()):
        for sign in (1, -1):
            p = Fraction(1, 2 * base.d) + sign * m[i] / 2
            if p < 0:
                raise MeasureError(f"drift component {m[i]} too large for d={base.d}")
            if p > 0:
                vec = e if sign > 0 else base.inverse(e)
                atoms.append((LampElement({}, vec), p))
    return StepMeasure(group, tuple(atoms), lamp_free=True)


def lamp_drift_measure(group: LampGroup, drift, lamp_weight=Fraction(1, 5)) -> StepMeasure:
    """Drifted lattice walk mixed with lamp toggles at the current position.

    The projected drift is (1 - lamp_weight) * drift.
    """
    inner = drift_measure(group, drift)
    lamp_weight = Fraction(lamp_weight)
    if not 0 < lamp_weight < 1:
        raise MeasureError("lamp_weight must lie strictly between 0 and 1")
    e = group.base.identity
    atoms = [(g, p * (1 - lamp_weight)) for g, p in inner.atoms]
    toggle = Fraction(lamp_weight, group.r - 1)
    for state in range(1, group.r):
        atoms.append((LampElement({e: state}, e), toggle))
    return StepMeasure(group, tuple(atoms))
