"""Finite-horizon estimators for the walk's behaviour at infinity.

A transient walk leaves a limit configuration behind and its position escapes
toward a boundary point; these estimators read both off a finite trajectory:
the stable position prefix over a trailing window (free groups) or the
terminal direction (lattices), the settled lamps with their last-flip times,
speed along the walk, and empirical boundary measures with stationarity and
atom diagnostics.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .base import Direction, End, FreeGroup, Word
from .errors import CylinderDepthError, MeasureError, NoDirectionError, PrefixTooShortError
from .measures import BaseMeasure
from .tree import tree_distance
from .trajectory import Trajectory
from .wreath import MetricParams


# --- limit point and limit configuration -----------------------------------------


@dataclass(frozen=True)
class LimitEndEstimate:
    """Where the walk is heading, as seen at a finite horizon.

    For free groups `point` is a finite-precision end whose prefix is common
    to every position in the trailing window; `stable_for` counts the steps
    since the prefix was last violated.
    """

    point: object  # End (period=()) or Direction
    horizon: int
    stabilization_time: int | None
    stable_for: int | None

    @property
    def prefix(self) -> Word:
        return self.point.prefix

    def prefix_length(self) -> int:
        return len(self.point.prefix) if isinstance(self.point, End) else 0


@dataclass(frozen=True)
class LimitConfigurationEstimate:
    """Lamp states at the horizon with per-site last-flip times."""

    states: tuple  # ((site, state, last_flip), ...) sorted by site
    horizon: int
    tail_window: int

    def settled(self):
        cut = self.horizon - self.tail_window
        return [(s, v) for s, v, t in self.states if t <= cut]

    def unsettled(self):
        cut = self.horizon - self.tail_window
        return [(s, v) for s, v, t in self.states if t > cut]

    def support_size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class OmegaPointEstimate:
    """Finite-horizon surrogate for a boundary point (configuration, end)."""

    config: LimitConfigurationEstimate
    point: LimitEndEstimate


def default_tail_window(n: int) -> int:
    return max(1, n // 10)


def estimate_limit_point(traj: Trajectory, tail_window: int, at: int | None = None) -> LimitEndEstimate:
    at = traj.steps if at is None else at
    if at < 2 * tail_window:
        raise ValueError(f"horizon {at} shorter than twice the tail window {tail_window}")
    if traj.is_free:
        node = traj.window_common_node(at, tail_window)
        violation = traj.last_prefix_violation(node, at)
        stab = 0 if violation is None else violation + 1
        return LimitEndEstimate(
            point=End(node.word()),
            horizon=at,
            stabilization_time=stab,
            stable_for=at - stab,
        )
    pos = traj.positions[at]
    norm = math.sqrt(sum(c * c for c in pos))
    if norm == 0:
        raise NoDirectionError(f"position at horizon {at} is the origin")
    return LimitEndEstimate(
        point=Direction(tuple(c / norm for c in pos)),
        horizon=at,
        stabilization_time=None,
        stable_for=None,
    )


def limit_configuration(traj: Trajectory, tail_window: int, at: int | None = None) -> LimitConfigurationEstimate:
    at = traj.steps if at is None else at
    rows = []
    for site in traj.events:
        state = traj.state_at(site, at)
        if state:
            rows.append((traj._site_key(site), state, traj.last_flip(site, at)))
    rows.sort()
    return LimitConfigurationEstimate(tuple(rows), at, tail_window)


def omega_estimate(traj: Trajectory, tail_window: int | None = None, at: int | None = None) -> OmegaPointEstimate:
    at = traj.steps if at is None else at
    tail_window = default_tail_window(at) if tail_window is None else tail_window
    return OmegaPointEstimate(
        config=limit_configuration(traj, tail_window, at),
        point=estimate_limit_point(traj, tail_window, at),
    )


# --- accumulation at the limit point ----------------------------------------------


@dataclass(frozen=True)
class AccumulationReport:
    """Settled lamps split by the neighbourhood of the limit point.

    `outside` counts settled lamps away from the limit direction; the
    finite-horizon stand-in for "the limit configuration accumulates only at
    the limit point" is that this count stops growing with the horizon.
    """

    depth: int
    horizon: int
    inside: int
    outside: int
    outside_max_distance: int
    settled: int
    unsettled: int
    finite: bool = True


def accumulation_check(
    est: OmegaPointEstimate,
    depth: int,
    drift=None,
    slab_offset: int = 10,
) -> AccumulationReport:
    """Partition the settled support into inside/outside of the limit cylinder.

    Free groups: inside = sites whose word starts with the first `depth`
    letters of the stable prefix. Lattices: inside = sites y with
    <y, m/|m|> > -slab_offset for the exact drift m (any fixed slab works; a
    fixed default keeps runs comparable).
    """
    settled = est.config.settled()
    unsettled = len(est.config.unsettled())
    point = est.point.point
    if isinstance(point, End):
        if len(point.prefix) < depth:
            raise PrefixTooShortError(
                f"stable prefix length {len(point.prefix)} < requested depth {depth}"
            )
        head = point.prefix[:depth]
        inside = outside = 0
        far = 0
        for site, _ in settled:
            if site[:depth] == head:
                inside += 1
            else:
                outside += 1
                far = max(far, len(site))
        return AccumulationReport(
            depth, est.config.horizon, inside, outside, far, len(settled), unsettled
        )
    if drift is None:
        raise ValueError("lattice accumulation needs the exact drift vector")
    m = [Fraction(c) for c in drift]
    norm = math.sqrt(float(sum(c * c for c in m)))
    if norm == 0:
        raise NoDirectionError("zero drift has no boundary direction")
    inside = outside = 0
    far = 0
    for site, _ in settled:
        proj = float(sum(c * y for c, y in zip(m, site))) / norm
        if proj > -slab_offset:
            inside += 1
        else:
            outside += 1
            far = max(far, sum(abs(y) for y in site))
    return AccumulationReport(
        depth, est.config.horizon, inside, outside, far, len(settled), unsettled
    )


def accumulation_from_walk(
    traj: Trajectory,
    depth: int,
    at: int | None = None,
    tail_window: int | None = None,
    drift=None,
    slab_offset: int = 10,
) -> AccumulationReport:
    """Accumulation report computed on the walk's internal structures.

    Same contract as accumulation_check(omega_estimate(...)); on free groups
    it classifies sites by tree ancestors instead of materialized words, so it
    stays cheap at batch scale.
    """
    at = traj.steps if at is None else at
    tail_window = default_tail_window(at) if tail_window is None else tail_window
    if not traj.is_free:
        return accumulation_check(
            omega_estimate(traj, tail_window, at), depth, drift=drift, slab_offset=slab_offset
        )
    anchor = traj.window_common_node(at, tail_window)
    if anchor.depth < depth:
        raise PrefixTooShortError(
            f"stable prefix length {anchor.depth} < requested depth {depth}"
        )
    cylinder = anchor.ancestor(depth)
    cut = at - tail_window
    inside = outside = settled = unsettled = 0
    far = 0
    for site in traj.events:
        state = traj.state_at(site, at)
        if not state:
            continue
        if traj.last_flip(site, at) > cut:
            unsettled += 1
            continue
        settled += 1
        if site.depth >= depth and site.ancestor(depth) is cylinder:
            inside += 1
        else:
            outside += 1
            far = max(far, site.depth)
    return AccumulationReport(depth, at, inside, outside, far, settled, unsettled)


# --- speed -------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeedEstimate:
    walks: int
    base_mean: float
    base_se: float
    lamp_lower_mean: float | None
    lamp_upper_mean: float | None


def speed_estimate(items, params: MetricParams | None = None) -> SpeedEstimate:
    """Mean and standard error of d(X_n, e)/n across walks, plus certified
    bounds on the lamplighter speed from tour bounds and the toggle cost."""
    params = params or MetricParams()
    base_samples = []
    lo_samples = []
    hi_samples = []
    for item in items:
        if isinstance(item, Trajectory):
            n = item.steps
            d = item.depths()[n]
            lo, hi = item.lamp_tour_bounds()
            supp = len(item.lamps)
            base_samples.append(d / n)
            lo_samples.append(float(Fraction(lo) + params.c * supp) / n)
            hi_samples.append(float(Fraction(hi) + params.c * supp) / n)
        else:
            base_samples.append(item.speed_sample)
            if item.lamp_speed_lower is not None:
                lo_samples.append(item.lamp_speed_lower)
                hi_samples.append(item.lamp_speed_upper)
    n_walks = len(base_samples)
    mean = sum(base_samples) / n_walks
    if n_walks > 1:
        var = sum((s - mean) ** 2 for s in base_samples) / (n_walks - 1)
        se = math.sqrt(var / n_walks)
    else:
        se = 0.0
    return SpeedEstimate(
        walks=n_walks,
        base_mean=mean,
        base_se=se,
        lamp_lower_mean=sum(lo_samples) / len(lo_samples) if lo_samples else None,
        lamp_upper_mean=sum(hi_samples) / len(hi_samples) if hi_samples else None,
    )


# --- empirical boundary measures -----------------------------------------------------


@dataclass(frozen=True)
class EmpiricalBoundaryMeasure:
    """Cylinder counts of stable prefixes (free) or direction atoms (lattice).

    Keys record each run's prefix truncated to the recording depth; runs whose
    prefix is shorter stay partially decided and count as undecided at depths
    beyond what they pin down.
    """

    kind: str  # "free" | "lattice"
    depth: int
    keys: tuple
    total: int

    def cylinder_counts(self, depth: int | None = None) -> Counter:
        depth = self.depth if depth is None else depth
        if depth > self.depth:
            raise CylinderDepthError(f"measure recorded at depth {self.depth} < {depth}")
        if self.kind == "lattice":
            return Counter(self.keys)
        return Counter(k[:depth] for k in self.keys if len(k) >= depth)

    def undecided(self, depth: int | None = None) -> int:
        depth = self.depth if depth is None else depth
        if self.kind == "lattice":
            return self.total - len(self.keys)
        return self.total - sum(1 for k in self.keys if len(k) >= depth)

    def frequencies(self, depth: int | None = None) -> dict:
        counts = self.cylinder_counts(depth)
        decided = sum(counts.values())
        return {k: c / decided for k, c in counts.items()} if decided else {}


def harmonic_measure_estimate(summaries, depth: int, drift=None) -> EmpiricalBoundaryMeasure:
    """Empirical hitting distribution at the given cylinder depth."""
    keys = []
    total = 0
    kind = None
    for item in summaries:
        total += 1
        prefix = getattr(item, "stable_prefix", None)
        direction = getattr(item, "direction", None)
        if prefix is not None:
            kind = "free"
            keys.append(tuple(prefix[:depth]))
        elif direction is not None:
            kind = "lattice"
            if drift is None:
                raise ValueError("lattice harmonic measure needs the drift vector")
            dot = sum(float(c) * x for c, x in zip(drift, direction))
            keys.append(1 if dot > 0 else -1)
    if kind is None:
        raise ValueError("no decided summaries")
    return EmpiricalBoundaryMeasure(kind, depth, tuple(keys), total)


@dataclass(frozen=True)
class StationarityReport:
    depth: int
    per_cylinder: dict
    max_discrepancy: float
    mc_radius: float


def _all_cylinders(k: int, depth: int) -> list[Word]:
    words = [()]
    for _ in range(depth):
        words = [
            w + (let,)
            for w in words
            for let in range(-k, k + 1)
            if let and (not w or let != -w[-1])
        ]
    return words


def stationarity_check(
    nu: BaseMeasure,
    measure: EmpiricalBoundaryMeasure,
    depth: int,
    rhs_measure: EmpiricalBoundaryMeasure | None = None,
) -> StationarityReport:
    """Check the convolution fixed-point property of the hitting measure.

    For each depth-`depth` cylinder U the harmonic measure must satisfy
    m(U) = sum_g nu(g) m(g^-1 U); the right side is expressed exactly through
    deeper cylinders (depth + the longest atom), so the recorded depth must
    cover it. Both sides may come from independent batches.
    """
    base = nu.base
    if not isinstance(base, FreeGroup):
        raise MeasureError("stationarity cylinders are implemented over free bases")
    rhs_measure = rhs_measure or measure
    max_len = max(len(x) for x, _ in nu.atoms)
    need = depth + max_len
    if rhs_measure.depth < need or measure.depth < depth:
        raise CylinderDepthError(
            f"need cylinders of depth {need}, recorded {rhs_measure.depth}"
        )
    lhs = measure.frequencies(depth)
    deep = rhs_measure.frequencies(need)
    per = {}
    for w in _all_cylinders(base.k, depth):
        rhs = 0.0
        for g, p in nu.atoms:
            for cyl, freq in deep.items():
                moved = base.multiply(g, cyl)
                if moved[:depth] == w:
                    rhs += float(p) * freq
        per[w] = abs(lhs.get(w, 0.0) - rhs)
    decided_l = measure.total - measure.undecided(depth)
    decided_r = rhs_measure.total - rhs_measure.undecided(need)
    radius = (
        math.sqrt(0.25 / decided_l) if decided_l else float("inf")
    ) + (math.sqrt(0.25 / decided_r) if decided_r else float("inf"))
    return StationarityReport(depth, per, max(per.values()), radius)


@dataclass(frozen=True)
class AtomReport:
    """Continuity surrogate: the largest cylinder mass should decay with depth."""

    max_frequency_by_depth: dict
    decaying: bool
    atomic: bool
    lattice_two_point: bool
    fingerprint_collisions: int | None


def atom_check(measure: EmpiricalBoundaryMeasure, fingerprints=None) -> AtomReport:
    if measure.kind == "lattice":
        return AtomReport(
            max_frequency_by_depth={},
            decaying=False,
            atomic=True,
            lattice_two_point=True,
            fingerprint_collisions=None,
        )
    by_depth = {}
    for depth in range(1, measure.depth + 1):
        freqs = measure.frequencies(depth)
        by_depth[depth] = max(freqs.values()) if freqs else 0.0
    vals = list(by_depth.values())
    decaying = all(b < a for a, b in zip(vals, vals[1:]))
    atomic = bool(vals) and vals[-1] > 0.5
    collisions = None
    if fingerprints is not None:
        seen = Counter()
        for key, fp in fingerprints:
            seen[(key, fp)] += 1
        collisions = sum(c - 1 for c in seen.values() if c > 1)
    return AtomReport(by_depth, decaying, atomic, measure.kind == "lattice", collisions)


# --- convergence-property witness ------------------------------------------------------


def cp_witness_mean(traj: Trajectory, at: int | None = None) -> float | None:
    """Mean of d(X_m, y_m)/d(X_m, e) over final-quarter steps that touch a lamp.

    y_m is the lamp site touched at step m; the mean heading to zero is the
    finite-horizon witness for the convergence property along the walk.
    """
    at = traj.steps if at is None else at
    lo = at - at // 4
    ratios = []
    prepared = [traj.atoms[i] for i in traj.atom_indices]
    for m in range(lo + 1, at + 1):
        atom = prepared[m - 1]
        if not atom.config:
            continue
        dn = traj.depths()[m]
        if dn == 0:
            continue
        for site_rel in atom.config:
            if traj.is_free:
                site = traj.nodes[m - 1].walk(site_rel)
                d = tree_distance(traj.nodes[m], site)
            else:
                base = traj.group.base
                site = base.multiply(traj.positions[m - 1], site_rel)
                d = base.distance(traj.positions[m], site)
            ratios.append(d / dn)
    if not ratios:
        return None
    return sum(ratios) / len(ratios)
