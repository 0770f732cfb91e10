"""Wreath products Z_r wr Gamma: lamp configurations, group law, and metric.

A configuration is a plain dict mapping base elements (lamp sites) to states
in 1..r-1; state 0 is never stored, so equality and symmetric differences are
support-sized. Group elements pair a configuration with a position.

The word metric prices a lamplighter journey as the shortest travelling
salesman tour through the differing lamp sites plus a fixed toggle cost c per
site. Tours are solved exactly by bitmask dynamic programming up to a cap;
past the cap an optional heuristic mode returns certified bounds and is never
substituted silently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .base import BaseGroup, Element
from .errors import CapExceededError, SearchExhaustedError, VariantMismatchError

Config = dict  # site -> state in 1..r-1; zero states are always dropped

EXACT_TSP_MAX_LAMPS = 16
BFS_MAX_RADIUS = 12


@dataclass(frozen=True)
class MetricParams:
    """Lamp-toggle cost c > 0 and the exact-tour site cap."""

    c: Fraction = Fraction(1)
    exact_tsp_max_lamps: int = EXACT_TSP_MAX_LAMPS
    allow_heuristic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c <= 0:
            raise ValueError("lamp cost c must be positive")


@dataclass(frozen=True)
class LampElement:
    """A wreath-product element: (configuration, position)."""

    config: Config
    pos: Element

    def key(self):
        """Canonical hashable form (for BFS visited sets)."""
        return (self.pos, frozenset(self.config.items()))


@dataclass(frozen=True)
class LampGroup:
    """Z_r wr Gamma over a concrete base group."""

    base: BaseGroup
    r: int = 2

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("lamp state count r must be >= 2")

    @property
    def identity(self) -> LampElement:
        return LampElement({}, self.base.identity)

    def delta(self, site: Element, state: int = 1) -> Config:
        state %= self.r
        return {self.base.validate(site): state} if state else {}

    def element(self, config: Config, pos: Element) -> LampElement:
        return LampElement(self.validate_config(config), self.base.validate(pos))

    def validate_config(self, eta: Config) -> Config:
        out = {}
        for site, state in eta.items():
            self.base.validate(site)
            state %= self.r
            if state:
                out[site] = state
        return out

    def translate(self, x: Element, eta: Config) -> Config:
        """The twisted action: (T_x eta)(y) = eta(x^-1 y), i.e. shift support by x."""
        mul = self.base.multiply
        return {mul(x, site): state for site, state in eta.items()}

    def multiply(self, g: LampElement, h: LampElement) -> LampElement:
        mul = self.base.multiply
        cfg = dict(g.config)
        gpos = g.pos
        r = self.r
        for site, state in h.config.items():
            moved = mul(gpos, site)
            s = (cfg.get(moved, 0) + state) % r
            if s:
                cfg[moved] = s
            else:
                cfg.pop(moved, None)
        return LampElement(cfg, mul(gpos, h.pos))

    def inverse(self, g: LampElement) -> LampElement:
        inv_pos = self.base.inverse(g.pos)
        mul = self.base.multiply
        r = self.r
        cfg = {mul(inv_pos, site): (r - state) % r for site, state in g.config.items()}
        return LampElement(cfg, inv_pos)

    def check_same(self, other: "LampGroup") -> None:
        if self != other:
            raise VariantMismatchError(f"mixing elements of {self} and {other}")

    def differing_sites(self, a: Config, b: Config) -> list[Element]:
        """Sites where the two configurations disagree (symmetric difference for r=2)."""
        sites = [s for s, v in a.items() if b.get(s, 0) != v]
        sites.extend(s for s, v in b.items() if s not in a and v != 0)
        return sites

    def distance(self, g: LampElement, h: LampElement, params: MetricParams):
        """d_G: shortest tour from g.pos to h.pos through all differing lamps,
        plus c per differing lamp.

        Exact (a Fraction) within the tour cap; past it, DistanceBounds when
        params.allow_heuristic is set, CapExceededError otherwise.
        """
        sites = self.differing_sites(g.config, h.config)
        tour = tour_length(self.base, g.pos, h.pos, sites, params)
        lamps = params.c * len(sites)
        if isinstance(tour, TourBounds):
            return DistanceBounds(Fraction(tour.lower) + lamps, Fraction(tour.upper) + lamps)
        return Fraction(tour) + lamps

    def distance_from_id(self, g: LampElement, params: MetricParams):
        return self.distance(self.identity, g, params)


# --- travelling salesman tours ------------------------------------------------


@dataclass(frozen=True)
class TourBounds:
    """Certified but inexact tour bounds (heuristic mode past the exact cap)."""

    lower: int
    upper: int

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("crossed tour bounds")


@dataclass(frozen=True)
class DistanceBounds:
    """Certified but inexact d_G bounds."""

    lower: Fraction
    upper: Fraction


def tour_length(base: BaseGroup, x: Element, x2: Element, sites, params: MetricParams | None = None):
    """Shortest x -> x2 tour visiting every site, exact by bitmask DP over subsets.

    Past the exact cap: TourBounds when params.allow_heuristic is set (never a
    silent substitute for the exact value), CapExceededError otherwise.
    """
    params = params or MetricParams()
    sites = list(sites)
    m = len(sites)
    if m == 0:
        return base.distance(x, x2)
    if m > params.exact_tsp_max_lamps:
        if params.allow_heuristic:
            return TourBounds(*tour_bounds(base, x, x2, sites))
        raise CapExceededError("exact_tsp_max_lamps", params.exact_tsp_max_lamps, m)
    dist = base.distance
    d_mat = [[dist(a, b) for b in sites] for a in sites]
    start = [dist(x, s) for s in sites]
    finish = [dist(s, x2) for s in sites]
    full = (1 << m) - 1
    INF = float("inf")
    dp = [[INF] * m for _ in range(full + 1)]
    for j in range(m):
        dp[1 << j][j] = start[j]
    for mask in range(1, full + 1):
        row = dp[mask]
        for j in range(m):
            cj = row[j]
            if cj == INF or not (mask >> j) & 1:
                continue
            dj = d_mat[j]
            for l in range(m):
                if (mask >> l) & 1:
                    continue
                nmask = mask | (1 << l)
                if cj + dj[l] < dp[nmask][l]:
                    dp[nmask][l] = cj + dj[l]
    best = min(dp[full][j] + finish[j] for j in range(m))
    return int(best)


def tour_length_brute(base: BaseGroup, x: Element, x2: Element, sites) -> int:
    """Independent oracle: minimum over all visit orders (use for small site sets)."""
    sites = list(sites)
    if not sites:
        return base.distance(x, x2)
    dist = base.distance
    best = None
    for order in permutations(sites):
        total = dist(x, order[0])
        for a, b in zip(order, order[1:]):
            total += dist(a, b)
        total += dist(order[-1], x2)
        if best is None or total < best:
            best = total
    return best


def tour_bounds(base: BaseGroup, x: Element, x2: Element, sites) -> tuple[int, int]:
    """Certified (lower, upper) tour bounds for site sets past the exact cap.

    Upper: nearest-neighbour tour. Lower: the larger of the spanning-tree
    bound over {x, sites..., x2} minus the largest edge slack, and the longest
    single leg max(d(x,s) + d(s,x2)).
    """
    sites = list(sites)
    if not sites:
        d = base.distance(x, x2)
        return d, d
    dist = base.distance
    # Nearest-neighbour upper bound.
    remaining = sites[:]
    cur = x
    upper = 0
    while remaining:
        j = min(range(len(remaining)), key=lambda i: dist(cur, remaining[i]))
        upper += dist(cur, remaining[j])
        cur = remaining.pop(j)
    upper += dist(cur, x2)
    # Spanning-tree lower bound: any visiting walk contains a spanning tree of
    # the points, and only the x -> x2 geodesic may be traversed once.
    pts = [x] + sites + [x2]
    n = len(pts)
    in_tree = [False] * n
    best_edge = [float("inf")] * n
    best_edge[0] = 0
    mst = 0
    for _ in range(n):
        j = min((i for i in range(n) if not in_tree[i]), key=lambda i: best_edge[i])
        in_tree[j] = True
        mst += best_edge[j]
        for i in range(n):
            if not in_tree[i]:
                d = dist(pts[j], pts[i])
                if d < best_edge[i]:
                    best_edge[i] = d
    leg = max(dist(x, s) + dist(s, x2) for s in sites)
    lower = max(mst, leg, dist(x, x2))
    return int(lower), int(upper)


def lamp_distance_bounds(
    group: LampGroup, g: LampElement, h: LampElement, params: MetricParams
) -> tuple[Fraction, Fraction]:
    """Certified bounds on d_G when the differing-site set is past the exact cap."""
    sites = group.differing_sites(g.config, h.config)
    lo, hi = tour_bounds(group.base, g.pos, h.pos, sites)
    lamps = params.c * len(sites)
    return Fraction(lo) + lamps, Fraction(hi) + lamps


# --- Cayley-graph BFS oracle ---------------------------------------------------


def _bfs_generators(group: LampGroup):
    base = group.base
    moves = []
    for g in base.generators():
        moves.append(g)
        moves.append(base.inverse(g))
    toggles = list(range(1, group.r))
    return moves, toggles


def bfs_distance(group: LampGroup, g: LampElement, max_radius: int = 8) -> int:
    """Distance from the identity in the Cayley graph of Z_r wr Gamma.

    Generators: one step per base generator and one per nonzero lamp state at
    the current position. Valid as an oracle for the metric when c = 1.
    """
    if max_radius > BFS_MAX_RADIUS:
        raise CapExceededError("bfs_max_radius", BFS_MAX_RADIUS, max_radius)
    target = g.key()
    for state, dist in _bfs_levels(group, max_radius):
        if state == target:
            return dist
    raise SearchExhaustedError(f"element not found within BFS radius {max_radius}")


def bfs_ball(group: LampGroup, radius: int) -> dict:
    """All wreath-product elements within `radius` of the identity, with distances.

    Keys are canonical (pos, frozenset(config items)) pairs.
    """
    if radius > BFS_MAX_RADIUS:
        raise CapExceededError("bfs_max_radius", BFS_MAX_RADIUS, radius)
    return dict(_bfs_levels(group, radius))


def _bfs_levels(group: LampGroup, max_radius: int):
    base = group.base
    mul = base.multiply
    r = group.r
    moves, toggles = _bfs_generators(group)
    start = (base.identity, frozenset())
    seen = {start: 0}
    yield start, 0
    frontier = deque([start])
    for dist in range(1, max_radius + 1):
        nxt = deque()
        while frontier:
            pos, cfg = frontier.popleft()
            neighbours = [(mul(pos, mv), cfg) for mv in moves]
            here = dict(cfg)
            old = here.pop(pos, 0)
            rest = list(here.items())
            for t in toggles:
                s = (old + t) % r
                items = frozenset(rest + [(pos, s)]) if s else frozenset(rest)
                neighbours.append((pos, items))
            for state in neighbours:
                if state not in seen:
                    seen[state] = dist
                    yield state, dist
                    nxt.append(state)
        frontier = nxt


def element_from_key(group: LampGroup, key) -> LampElement:
    pos, cfg_items = key
    return LampElement(dict(cfg_items), pos)
