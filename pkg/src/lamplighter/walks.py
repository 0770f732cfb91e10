"""Walk execution: seeded trajectories, summaries, and parallel batches.

Each walk's increments come from its own counter-based stream keyed by
(master seed, walk index), so a batch is a pure function of its config:
the same summaries come back in the same order at any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import boundary, rng
from .base import FreeGroup
from .errors import CapExceededError, PrefixTooShortError
from .measures import StepMeasure, project_measure
from .trajectory import Trajectory
from .wreath import MetricParams

WORKERS_ENV = "LAMPLIGHTER_WORKERS"
MAX_STEPS = 10**6
MAX_WALKS = 10**5


@dataclass(frozen=True)
class WalkConfig:
    """Length, batch size, master seed, and summary knobs for a batch of walks."""

    steps: int
    walks: int = 1
    seed: int = 0
    params: MetricParams = field(default_factory=MetricParams)
    tail_window: int | None = None  # default: steps // 10
    horizons: tuple = ()  # extra accumulation horizons
    accumulation_depth: int = 3
    cylinder_depth: int = 4
    fingerprint_radius: int = 3
    collect_cp_witness: bool = False

    def __post_init__(self):
        if self.steps < 1 or self.walks < 1:
            raise ValueError("steps and walks must be >= 1")
        if self.steps > MAX_STEPS:
            raise CapExceededError("max_steps", MAX_STEPS, self.steps)
        if self.walks > MAX_WALKS:
            raise CapExceededError("max_walks", MAX_WALKS, self.walks)

    def window(self, at: int | None = None) -> int:
        if self.tail_window is not None:
            return self.tail_window
        return boundary.default_tail_window(at if at is not None else self.steps)


def run_walk(mu: StepMeasure, cfg: WalkConfig, walk_index: int) -> Trajectory:
    """Generate one trajectory; bit-identical for identical inputs."""
    traj = Trajectory(mu.group, cfg.seed, walk_index, mu.elements())
    thresholds = rng.thresholds_from_probs(mu.probabilities())
    draws = rng.uniform_words(cfg.seed, walk_index, cfg.steps)
    traj.extend(draws, thresholds)
    return traj


@dataclass(frozen=True)
class AccumulationSummary:
    horizon: int
    prefix_length: int | None
    inside: int | None
    outside: int | None
    outside_max_distance: int | None
    settled: int | None
    unsettled: int | None


@dataclass(frozen=True)
class TrajectorySummary:
    """The per-walk facts the estimators aggregate; plain data, small."""

    walk_index: int
    steps: int
    final_pos: tuple
    final_distance: int
    support_size: int
    speed_sample: float
    lamp_speed_lower: float | None
    lamp_speed_upper: float | None
    stable_prefix: tuple | None  # free groups
    direction: tuple | None  # lattices
    stabilization_time: int | None
    stable_for: int | None
    accumulation: tuple  # AccumulationSummary per requested horizon
    fingerprint: tuple  # settled states near the origin, ((site, state), ...)
    cp_witness: float | None


def summarize(traj: Trajectory, cfg: WalkConfig, drift=None) -> TrajectorySummary:
    n = traj.steps
    window = cfg.window(n)
    est = boundary.estimate_limit_point(traj, window)
    prefix = None
    direction = None
    if traj.is_free:
        prefix = est.point.prefix
    else:
        direction = est.point.components
    lo, hi = traj.lamp_tour_bounds()
    supp = len(traj.lamps)
    c = cfg.params.c
    reports = []
    for horizon in tuple(cfg.horizons) + (n,):
        try:
            rep = boundary.accumulation_from_walk(
                traj,
                cfg.accumulation_depth,
                at=horizon,
                tail_window=cfg.window(horizon),
                drift=drift,
            )
            anchor_len = _prefix_length_at(traj, horizon, cfg.window(horizon))
            reports.append(
                AccumulationSummary(
                    horizon, anchor_len, rep.inside, rep.outside,
                    rep.outside_max_distance, rep.settled, rep.unsettled,
                )
            )
        except (PrefixTooShortError, ValueError):
            reports.append(AccumulationSummary(horizon, None, None, None, None, None, None))
    return TrajectorySummary(
        walk_index=traj.walk_index,
        steps=n,
        final_pos=traj.position(n),
        final_distance=traj.depths()[n],
        support_size=supp,
        speed_sample=traj.depths()[n] / n,
        lamp_speed_lower=float(Fraction(lo) + c * supp) / n,
        lamp_speed_upper=float(Fraction(hi) + c * supp) / n,
        stable_prefix=prefix,
        direction=direction,
        stabilization_time=est.stabilization_time,
        stable_for=est.stable_for,
        accumulation=tuple(reports),
        fingerprint=_fingerprint(traj, cfg.fingerprint_radius),
        cp_witness=boundary.cp_witness_mean(traj) if cfg.collect_cp_witness else None,
    )


def _prefix_length_at(traj: Trajectory, horizon: int, window: int) -> int | None:
    if not traj.is_free or horizon < 2 * window:
        return None
    return traj.window_common_node(horizon, window).depth


def _fingerprint(traj: Trajectory, radius: int) -> tuple:
    """Settled lamp states within `radius` of the origin, canonically ordered."""
    window = boundary.default_tail_window(traj.steps)
    cut = traj.steps - window
    rows = []
    for site, state in traj.lamps.items():
        depth = site.depth if traj.is_free else sum(abs(c) for c in site)
        if depth <= radius and traj.last_flip(site, traj.steps) <= cut:
            rows.append((traj._site_key(site), state))
    rows.sort()
    return tuple(rows)


def _run_and_summarize(args) -> TrajectorySummary:
    mu, cfg, walk_index, drift = args
    return summarize(run_walk(mu, cfg, walk_index), cfg, drift=drift)


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def batch_run(mu: StepMeasure, cfg: WalkConfig, workers: int | None = None) -> list[TrajectorySummary]:
    """N independent walks, summarized; ordered by walk index regardless of
    scheduling, identical at any worker count."""
    drift = None
    if not isinstance(mu.group.base, FreeGroup):
        drift = project_measure(mu).drift()
        if not any(drift):
            drift = None
    jobs = [(mu, cfg, i, drift) for i in range(cfg.walks)]
    n_workers = worker_count(workers)
    if n_workers <= 1 or cfg.walks == 1:
        return [_run_and_summarize(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        chunk = max(1, cfg.walks // (4 * n_workers))
        return list(pool.map(_run_and_summarize, jobs, chunksize=chunk))
