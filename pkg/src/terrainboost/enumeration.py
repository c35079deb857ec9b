"""Enumeration of connected sets and maximally coarse partitions.

Connected subsets are generated by incremental extension from each root
vertex, with vertices below the root forbidden and already-rejected
neighbors excluded, so every set appears exactly once. All hot paths
work on int bitmasks.
"""

from __future__ import annotations

import json
import threading
from typing import Iterator, NamedTuple

import numpy as np

from .errors import SingletonUniverse, UniverseTooLarge
from .graph import LevelGraph, LevelSet, ids_of, mask_is_connected, mask_of
from .terrain import Partition, Terrain, canonical_partition


class BinarySplitCandidate(NamedTuple):
    """A bipartition {side_a, side_b} of a universe, both sides connected.

    side_a is the side containing the smallest id; the sides are
    complements within the universe the candidate was enumerated for.
    """

    side_a: LevelSet
    side_b: LevelSet


def connected_set_masks(g: LevelGraph, max_size: int | None = None) -> Iterator[int]:
    """Yield every non-empty connected subset of g as a bitmask, exactly once.

    Deterministic order: roots ascending, then depth-first extension by
    lowest eligible vertex. With max_size=None the full vertex set is
    included.
    """
    n = g.n_levels
    adj = g.adj
    if max_size is None or max_size > n:
        max_size = n
    if max_size < 1:
        return
    for r in range(n):
        root = 1 << r
        yield root
        if max_size == 1:
            continue
        smaller = root - 1
        ext0 = adj[r] & ~smaller
        # avoid = current set, its neighborhood, and all forbidden smaller roots
        stack = [[root, 1, ext0, root | adj[r] | smaller]]
        while stack:
            frame = stack[-1]
            ext = frame[2]
            if not ext:
                stack.pop()
                continue
            w = ext & -ext
            frame[2] = ext ^ w
            sub = frame[0] | w
            yield sub
            size = frame[1] + 1
            if size < max_size:
                aw = adj[w.bit_length() - 1]
                stack.append(
                    [sub, size, frame[2] | (aw & ~frame[3]), frame[3] | aw | w]
                )


def connected_sets(g: LevelGraph, max_size: int | None = None) -> Iterator[LevelSet]:
    """Stream every connected subset with size <= max_size as sorted id tuples."""
    for mask in connected_set_masks(g, max_size):
        yield ids_of(mask)


def count_connected_sets(g: LevelGraph, max_size: int | None = None) -> int:
    count = 0
    for _ in connected_set_masks(g, max_size):
        count += 1
    return count


def _split_candidate_masks(g: LevelGraph) -> list[int]:
    """Masks of the id-0 side of every both-sides-connected bipartition."""
    n = g.n_levels
    if n < 2:
        raise SingletonUniverse(f"graph {g.name!r} has fewer than 2 levels")
    adj = g.adj
    full = g.full_mask
    half = n // 2
    even = n % 2 == 0
    out = []
    for m in connected_set_masks(g, max_size=half):
        # at exactly half size both sides get enumerated; keep the one with id 0
        if even and not (m & 1) and m.bit_count() == half:
            continue
        comp = full & ~m
        if mask_is_connected(comp, adj):
            out.append(m if m & 1 else comp)
    return out


def maximally_coarse_partitions(g: LevelGraph) -> list[BinarySplitCandidate]:
    """All bipartitions of g's vertex set with both sides connected.

    Canonical order: ascending by side_a (the side containing id 0).
    """
    full = g.full_mask
    masks = sorted(ids_of(m) for m in _split_candidate_masks(g))
    return [
        BinarySplitCandidate(side_a=a, side_b=ids_of(full & ~mask_of(a))) for a in masks
    ]


def _conforming_partitions(members: list[LevelSet], n_levels: int) -> list[tuple[int, ...]]:
    """All partitions of 0..n-1 into terrain members, as tuples of part masks.

    Parts come out ordered by their smallest element because each
    recursion step covers the lowest uncovered id.
    """
    full = (1 << n_levels) - 1
    containing: list[list[int]] = [[] for _ in range(n_levels)]
    for m in members:
        containing[m[0]].append(mask_of(m))
    out: list[tuple[int, ...]] = []
    parts: list[int] = []

    def rec(covered: int) -> None:
        if covered == full:
            out.append(tuple(parts))
            return
        low = (covered ^ full) & -(covered ^ full)
        v = low.bit_length() - 1
        for pm in containing[v]:
            if pm & covered:
                continue
            parts.append(pm)
            rec(covered | pm)
            parts.pop()

    rec(0)
    return out


def _has_conforming_coarsening(
    p: tuple[int, ...], by_size: dict[int, list[tuple[int, ...]]]
) -> bool:
    k = len(p)
    mins = [pm & -pm for pm in p]
    for size in range(k - 1, 1, -1):
        for q in by_size.get(size, ()):  # q coarsens p iff every part of p sits in one part of q
            ok = True
            for pm, low in zip(p, mins):
                for qm in q:
                    if qm & low:
                        if pm & ~qm:
                            ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
    return False


def maximally_coarse_partitions_explicit(t: Terrain) -> list[Partition]:
    """Maximally coarse conforming partitions of a terrain, by exhaustive search.

    Works for explicit terrains and (for cross-checking) small
    graph-induced ones; may return partitions with more than 2 parts.
    """
    n = t.n_levels
    if n > 16:
        raise UniverseTooLarge(f"explicit partition search capped at 16 levels, got {n}")
    conforming = _conforming_partitions(t.members(), n)
    by_size: dict[int, list[tuple[int, ...]]] = {}
    for p in conforming:
        by_size.setdefault(len(p), []).append(p)
    result = [
        canonical_partition(ids_of(pm) for pm in p)
        for p in conforming
        if not _has_conforming_coarsening(p, by_size)
    ]
    return sorted(result)


class PartitionCache:
    """Session cache of split candidates keyed by exact graph labels.

    Keys are the ordered level-name tuple plus the sorted id edge list;
    no isomorphism detection. Reads may be concurrent; writes take a
    lock and are idempotent, so results never depend on interleaving.
    """

    def __init__(self) -> None:
        self._store: dict[tuple, list[BinarySplitCandidate]] = {}
        self._matrices: dict[tuple, np.ndarray] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key_of(g: LevelGraph) -> tuple:
        return (g.levels, g.edges)

    def lookup_or_enumerate(self, g: LevelGraph) -> list[BinarySplitCandidate]:
        key = self.key_of(g)
        found = self._store.get(key)
        if found is not None:
            self.hits += 1
            return found
        candidates = maximally_coarse_partitions(g)
        with self._lock:
            self._store.setdefault(key, candidates)
            self.misses += 1
        return self._store[key]

    def side_a_matrix(self, g: LevelGraph) -> np.ndarray:
        """Boolean matrix (n_candidates, n_levels): row c marks side_a membership."""
        key = self.key_of(g)
        mat = self._matrices.get(key)
        if mat is not None:
            return mat
        candidates = self.lookup_or_enumerate(g)
        mat = np.zeros((len(candidates), g.n_levels), dtype=bool)
        for c, cand in enumerate(candidates):
            mat[c, list(cand.side_a)] = True
        with self._lock:
            self._matrices.setdefault(key, mat)
        return self._matrices[key]

    def __len__(self) -> int:
        return len(self._store)

    def save(self, path) -> None:
        """Persist cached candidate lists as JSON (side_a ids only; side_b is the complement)."""
        entries = []
        for (levels, edges), candidates in sorted(self._store.items()):
            entries.append(
                {
                    "levels": list(levels),
                    "edges": [list(e) for e in edges],
                    "side_a": [list(c.side_a) for c in candidates],
                }
            )
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(entries, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PartitionCache":
        cache = cls()
        with open(path, "r", encoding="utf-8") as fh:
            entries = json.load(fh)
        for entry in entries:
            levels = tuple(entry["levels"])
            edges = tuple(tuple(e) for e in entry["edges"])
            n = len(levels)
            full = (1 << n) - 1
            candidates = [
                BinarySplitCandidate(
                    side_a=tuple(a), side_b=ids_of(full & ~mask_of(a))
                )
                for a in entry["side_a"]
            ]
            cache._store[(levels, edges)] = candidates
        return cache


def cache_lookup_or_enumerate(
    cache: PartitionCache, g: LevelGraph
) -> list[BinarySplitCandidate]:
    return cache.lookup_or_enumerate(g)
