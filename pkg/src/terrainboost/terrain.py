"""Terrains: the collections of level subsets a model may average over.

A terrain always contains every singleton and never contains the empty
set or the full universe. It is represented either implicitly by a
connected level graph (members = connected proper subsets) or by an
explicit member list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    NotASubset,
    NotProperSubset,
    UniverseTooLarge,
    WrongUniverse,
)
from .graph import LevelGraph, LevelSet, ids_of, induced_subgraph, mask_of

Partition = tuple[LevelSet, ...]

EXPLICIT_UNIVERSE_CAP = 16


def canonical_partition(parts) -> Partition:
    """Normalize a collection of id sets: each part sorted, parts ordered by smallest id."""
    norm = [tuple(sorted(p)) for p in parts]
    return tuple(sorted(norm, key=lambda p: p[0]))


@dataclass(frozen=True)
class Terrain:
    """Averageable level subsets over a fixed universe of named levels."""

    levels: tuple[str, ...]
    graph: LevelGraph | None = None
    explicit_members: frozenset[LevelSet] | None = None  # includes singletons, excludes V

    @classmethod
    def from_graph(cls, g: LevelGraph) -> "Terrain":
        return cls(levels=g.levels, graph=g)

    @classmethod
    def explicit(cls, levels, member_sets) -> "Terrain":
        """Build an explicit terrain; singletons are implied and added automatically."""
        levels = tuple(levels)
        n = len(levels)
        if n < 2:
            raise NotProperSubset("a terrain needs a universe of at least 2 levels")
        members = {(i,) for i in range(n)}
        for s in member_sets:
            t = tuple(sorted(set(s)))
            if not t:
                raise NotASubset("the empty set cannot be a terrain member")
            if any(i < 0 or i >= n for i in t):
                raise NotASubset(f"member {t} is not a subset of the universe")
            if len(t) == n:
                raise NotASubset("the full universe cannot be a terrain member")
            members.add(t)
        return cls(levels=levels, explicit_members=frozenset(members))

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @cached_property
    def universe(self) -> LevelSet:
        return tuple(range(len(self.levels)))

    def contains(self, s) -> bool:
        """Membership test for an id set; see module doc for conventions."""
        t = tuple(sorted(set(s)))
        if not t:
            return False
        if any(i < 0 or i >= self.n_levels for i in t):
            raise NotASubset(f"{t} is not a subset of the universe (m={self.n_levels})")
        if len(t) == self.n_levels:
            return False
        if self.graph is not None:
            from .graph import mask_is_connected

            return mask_is_connected(mask_of(t), self.graph.adj)
        return t in self.explicit_members

    def members(self, cap: int = EXPLICIT_UNIVERSE_CAP) -> list[LevelSet]:
        """All members as sorted id tuples, in deterministic order.

        Graph-induced terrains enumerate their connected proper subsets,
        which is exponential; the universe cap guards that path.
        """
        if self.explicit_members is not None:
            return sorted(self.explicit_members)
        if self.n_levels > cap:
            raise UniverseTooLarge(
                f"member enumeration over {self.n_levels} levels exceeds cap {cap}"
            )
        from .enumeration import connected_set_masks

        full = self.graph.full_mask
        return sorted(ids_of(m) for m in connected_set_masks(self.graph) if m != full)

    def restrict(self, b) -> "Terrain":
        """Terrain over the proper subset `b`, keeping members that are proper subsets of b.

        Returned terrain has fresh positional ids following the original
        relative order of the surviving levels.
        """
        sub = tuple(sorted(set(b)))
        if any(i < 0 or i >= self.n_levels for i in sub):
            raise NotASubset(f"{sub} is not a subset of the universe")
        if len(sub) >= self.n_levels:
            raise NotProperSubset("restriction needs a proper subset of the universe")
        if len(sub) < 2:
            raise NotProperSubset(
                "cannot restrict to fewer than 2 levels; single-level nodes are leaves"
            )
        if self.graph is not None:
            return Terrain.from_graph(induced_subgraph(self.graph, sub))
        local = {orig: i for i, orig in enumerate(sub)}
        sub_set = set(sub)
        kept = []
        for m in self.explicit_members:
            if len(m) < len(sub) and set(m) <= sub_set:
                kept.append(tuple(local[i] for i in m))
        names = tuple(self.levels[i] for i in sub)
        return Terrain.explicit(names, kept)


def contains(t: Terrain, s) -> bool:
    return t.contains(s)


def _check_partition(parts: Partition, n_levels: int) -> None:
    seen = 0
    for p in parts:
        if not p:
            raise WrongUniverse("partitions cannot contain empty parts")
        m = mask_of(p)
        if m & seen:
            raise WrongUniverse(f"parts overlap at ids {ids_of(m & seen)}")
        seen |= m
    if seen != (1 << n_levels) - 1:
        raise WrongUniverse("parts do not cover the universe")


def conforms(parts, t: Terrain) -> bool:
    """True iff every part of the partition is a terrain member."""
    norm = canonical_partition(parts)
    _check_partition(norm, t.n_levels)
    return all(t.contains(p) for p in norm)


def is_coarsening(p1, p2, n_levels: int | None = None) -> bool:
    """True iff p1 is strictly smaller than p2 and every part of p2 sits inside a part of p1."""
    p1 = canonical_partition(p1)
    p2 = canonical_partition(p2)
    if n_levels is None:
        n_levels = 1 + max(i for part in p1 for i in part)
    _check_partition(p1, n_levels)
    _check_partition(p2, n_levels)
    if len(p1) >= len(p2):
        return False
    owner = {}
    for part in p1:
        for i in part:
            owner[i] = set(part)
    return all(set(part) <= owner[part[0]] for part in p2)


def restrict(t: Terrain, b) -> Terrain:
    return t.restrict(b)


def load_terrain(path) -> Terrain:
    """Load an explicit terrain from its JSON file format (singletons may be omitted)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    levels = tuple(doc["universe"])
    idx = {name: i for i, name in enumerate(levels)}
    members = [[idx[name] for name in m] for m in doc.get("members", [])]
    return Terrain.explicit(levels, members)
