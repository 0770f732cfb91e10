"""Seeded walk trajectories with sparse lamp-event logs.

A trajectory records the increment choices, every position (free-group
positions as interned tree nodes, so the whole history is O(steps) memory),
and per-site lamp events (time, new state). Everything an estimator needs at
any intermediate horizon is reconstructed from these logs; no state snapshots
are kept.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .base import FreeGroup, Lattice, Word
from .tree import TreeNode, lca, new_tree, tree_distance
from .wreath import LampElement, LampGroup


@dataclass(frozen=True)
class PreparedAtom:
    """An increment (f, z) unpacked for the stepping loop."""

    lamp_ops: tuple  # ((site, delta), ...) relative to the current position
    move: Word


def prepare_atoms(group: LampGroup, elements) -> list[PreparedAtom]:
    return [
        PreparedAtom(tuple(sorted(g.config.items())), g.pos) for g in elements
    ]


class Trajectory:
    """One walk Z_0 .. Z_n, replayable bit-for-bit from (seed, walk_index)."""

    def __init__(self, group: LampGroup, seed: int, walk_index: int, atoms):
        self.group = group
        self.seed = seed
        self.walk_index = walk_index
        self.atoms = list(atoms)  # LampElements, indexed by atom_indices
        self.atom_indices: list[int] = []
        self.is_free = isinstance(group.base, FreeGroup)
        self.lamps: dict = {}
        self.events: dict = {}
        if self.is_free:
            self.root = new_tree()
            self.nodes: list[TreeNode] = [self.root]
        else:
            self.positions: list = [group.base.identity]
        self._depths: list[int] | None = None

    # -- generation ------------------------------------------------------------

    def extend(self, draws, thresholds) -> None:
        prepared = prepare_atoms(self.group, self.atoms)
        self.atom_indices.extend(
            bisect_right(thresholds, u) for u in draws
        )
        start = (len(self.nodes) if self.is_free else len(self.positions)) - 1
        if self.is_free:
            self._extend_free(prepared, self.atom_indices[start:], start)
        else:
            self._extend_lattice(prepared, self.atom_indices[start:], start)

    def _extend_free(self, prepared, indices, start) -> None:
        r = self.group.r
        pos = self.nodes[-1]
        nodes = self.nodes
        lamps = self.lamps
        events = self.events
        for off, idx in enumerate(indices):
            t = start + off + 1
            atom = prepared[idx]
            for site_word, delta in atom.lamp_ops:
                site = pos.walk(site_word)
                s = (lamps.get(site, 0) + delta) % r
                if s:
                    lamps[site] = s
                else:
                    lamps.pop(site, None)
                ev = events.get(site)
                if ev is None:
                    ev = events[site] = []
                ev.append((t, s))
            if atom.move:
                pos = pos.walk(atom.move)
            nodes.append(pos)
        self._depths = None

    def _extend_lattice(self, prepared, indices, start) -> None:
        r = self.group.r
        base = self.group.base
        pos = self.positions[-1]
        positions = self.positions
        lamps = self.lamps
        events = self.events
        for off, idx in enumerate(indices):
            t = start + off + 1
            atom = prepared[idx]
            for site_vec, delta in atom.lamp_ops:
                site = base.multiply(pos, site_vec)
                s = (lamps.get(site, 0) + delta) % r
                if s:
                    lamps[site] = s
                else:
                    lamps.pop(site, None)
                ev = events.get(site)
                if ev is None:
                    ev = events[site] = []
                ev.append((t, s))
            if any(atom.move):
                pos = base.multiply(pos, atom.move)
            positions.append(pos)
        self._depths = None

    # -- positions ---------------------------------------------------------------

    @property
    def steps(self) -> int:
        return len(self.atom_indices)

    def position(self, i: int):
        """X_i as a plain element."""
        if self.is_free:
            return self.nodes[i].word()
        return self.positions[i]

    def position_node(self, i: int) -> TreeNode:
        return self.nodes[i]

    def all_positions(self) -> list:
        if self.is_free:
            return [n.word() for n in self.nodes]
        return list(self.positions)

    def depths(self) -> list[int]:
        """d(e, X_i) for every i."""
        if self._depths is None:
            if self.is_free:
                self._depths = [n.depth for n in self.nodes]
            else:
                self._depths = [sum(abs(c) for c in p) for p in self.positions]
        return self._depths

    def increments(self) -> list[LampElement]:
        return [self.atoms[i] for i in self.atom_indices]

    def final(self) -> LampElement:
        """Terminal (configuration, position) as a group element."""
        cfg = {self._site_key(s): v for s, v in self.lamps.items()}
        return LampElement(cfg, self.position(self.steps))

    def replay(self) -> LampElement:
        """Independent reconstruction: fold the increments through the group law."""
        g = self.group.identity
        for inc in self.increments():
            g = self.group.multiply(g, inc)
        return g

    def _site_key(self, site):
        return site.word() if self.is_free else site

    # -- lamp history ------------------------------------------------------------

    def state_at(self, site, horizon: int) -> int:
        ev = self.events.get(site)
        if not ev:
            return 0
        i = bisect_right(ev, (horizon, float("inf")))
        return ev[i - 1][1] if i else 0

    def last_flip(self, site, horizon: int) -> int | None:
        ev = self.events.get(site)
        if not ev:
            return None
        i = bisect_right(ev, (horizon, float("inf")))
        return ev[i - 1][0] if i else None

    def support_at(self, horizon: int) -> dict:
        """Sites with nonzero state at the horizon (raw site keys)."""
        if horizon == self.steps:
            return dict(self.lamps)
        out = {}
        for site in self.events:
            s = self.state_at(site, horizon)
            if s:
                out[site] = s
        return out

    def config_at(self, horizon: int) -> dict:
        """Configuration at the horizon with plain-element site keys."""
        return {self._site_key(s): v for s, v in self.support_at(horizon).items()}

    # -- geometry helpers ----------------------------------------------------------

    def window_common_node(self, at: int, window: int) -> TreeNode:
        """Deepest common ancestor of X_m over m in [at-window, at]."""
        running = self.nodes[at]
        for m in range(at - window, at):
            running = lca(running, self.nodes[m])
            if running.depth == 0:
                break
        return running

    def last_prefix_violation(self, node: TreeNode, at: int) -> int | None:
        """Largest m <= at with `node` not a prefix of X_m, or None."""
        for m in range(at, -1, -1):
            if not node.is_ancestor_of(self.nodes[m]):
                return m
        return None

    def site_distance_to(self, site, i: int) -> int:
        """d(site, X_i) in the base group."""
        if self.is_free:
            return tree_distance(site, self.nodes[i])
        return self.group.base.distance(site, self.positions[i])

    def lamp_tour_bounds(self, horizon: int | None = None) -> tuple[int, int]:
        """Certified bounds on the shortest id -> X_n tour through the support.

        On trees the optimal tour is twice the Steiner tree minus the direct
        distance, so the bounds coincide; on lattices a longest-leg lower
        bound and a sorted-sweep tour give a certified interval.
        """
        horizon = self.steps if horizon is None else horizon
        support = self.support_at(horizon)
        if self.is_free:
            end = self.nodes[horizon]
            direct = end.depth
            if not support:
                return direct, direct
            points = list(support)
            points.append(self.root)
            points.append(end)
            ordered = self._dfs_order(set(points))
            per = 0
            for u, v in zip(ordered, ordered[1:]):
                per += tree_distance(u, v)
            per += tree_distance(ordered[-1], ordered[0])
            steiner = per // 2
            exact = 2 * steiner - direct
            return exact, exact
        end = self.positions[horizon]
        base = self.group.base
        direct = base.distance(base.identity, end)
        if not support:
            return direct, direct
        sites = sorted(support)
        lower = max(
            max(base.length(s) + base.distance(s, end) for s in sites), direct
        )
        sweep = base.distance(base.identity, sites[0])
        for u, v in zip(sites, sites[1:]):
            sweep += base.distance(u, v)
        sweep += base.distance(sites[-1], end)
        return lower, max(sweep, lower)

    def _dfs_order(self, wanted: set) -> list[TreeNode]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node in wanted:
                out.append(node)
            if node.children:
                for let in sorted(node.children, reverse=True):
                    stack.append(node.children[let])
        return out
