"""Undirected level graphs over the values of a categorical variable.

Level ids are positional in the declared level list; all set operations
use ids, all I/O uses names. Subsets of levels are handled either as
sorted id tuples (the public form) or as int bitmasks (the fast form).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import (
    DisconnectedGraph,
    DisconnectedInduced,
    DuplicateLevel,
    InvalidDimensions,
    OutOfRangeId,
    SelfLoop,
    UnknownEndpoint,
)

LevelSet = tuple[int, ...]


def mask_of(ids) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def ids_of(mask: int) -> LevelSet:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def mask_is_connected(mask: int, adj: list[int]) -> bool:
    """True iff the vertices in `mask` induce a connected subgraph.

    `adj` holds one neighborhood bitmask per vertex. Empty masks are
    considered not connected; singletons are connected.
    """
    if mask == 0:
        return False
    seen = mask & -mask
    frontier = seen
    while frontier:
        reach = 0
        m = frontier
        while m:
            low = m & -m
            m ^= low
            reach |= adj[low.bit_length() - 1]
        frontier = reach & mask & ~seen
        seen |= frontier
    return seen == mask


@dataclass(frozen=True)
class LevelGraph:
    """Connected undirected graph over the levels of one categorical variable."""

    name: str
    levels: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]  # canonical: i < j, sorted, deduplicated

    @cached_property
    def adj(self) -> list[int]:
        """Neighborhood bitmask per vertex."""
        masks = [0] * len(self.levels)
        for a, b in self.edges:
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        return masks

    @cached_property
    def level_ids(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.levels)}

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.levels)) - 1

    def id_of(self, name: str) -> int:
        try:
            return self.level_ids[name]
        except KeyError:
            raise UnknownEndpoint(f"graph {self.name!r} has no level {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "levels": list(self.levels),
            "edges": [[self.levels[a], self.levels[b]] for a, b in self.edges],
        }


def build_graph(levels, edges, name: str = "graph") -> LevelGraph:
    """Validate and build a LevelGraph from level names and name-pair edges.

    Rejects duplicate levels, unknown endpoints, self loops and
    disconnected graphs.
    """
    levels = tuple(levels)
    if len(set(levels)) != len(levels):
        dupes = sorted({l for l in levels if list(levels).count(l) > 1})
        raise DuplicateLevel(f"duplicate level names: {dupes}")
    if any(not isinstance(l, str) or not l for l in levels):
        raise DuplicateLevel("level names must be non-empty strings")
    ids = {name_: i for i, name_ in enumerate(levels)}
    id_edges = set()
    for a, b in edges:
        if a not in ids:
            raise UnknownEndpoint(f"edge endpoint {a!r} is not a declared level")
        if b not in ids:
            raise UnknownEndpoint(f"edge endpoint {b!r} is not a declared level")
        ia, ib = ids[a], ids[b]
        if ia == ib:
            raise SelfLoop(f"self loop on level {a!r}")
        id_edges.add((min(ia, ib), max(ia, ib)))
    g = LevelGraph(name=name, levels=levels, edges=tuple(sorted(id_edges)))
    if not mask_is_connected(g.full_mask, g.adj):
        raise DisconnectedGraph(f"graph {name!r} is not connected")
    return g


def builtin_graph(kind: str, *dims: int) -> LevelGraph:
    """Construct a chain, cycle or grid graph with synthetic level names.

    chain:n  -> levels c0..c{n-1}, n-1 edges
    cycle:n  -> levels c0..c{n-1}, n edges (wrap-around included)
    grid:mxn -> levels r{i}c{j}, m(n-1)+n(m-1) edges
    """
    if kind == "chain":
        (n,) = dims
        if n < 2:
            raise InvalidDimensions(f"chain needs n >= 2, got {n}")
        levels = [f"c{i}" for i in range(n)]
        edges = [(levels[i], levels[i + 1]) for i in range(n - 1)]
        return build_graph(levels, edges, name=f"chain:{n}")
    if kind == "cycle":
        (n,) = dims
        if n < 3:
            raise InvalidDimensions(f"cycle needs n >= 3, got {n}")
        levels = [f"c{i}" for i in range(n)]
        edges = [(levels[i], levels[(i + 1) % n]) for i in range(n)]
        return build_graph(levels, edges, name=f"cycle:{n}")
    if kind == "grid":
        m, n = dims
        if m < 1 or n < 1 or m * n < 2:
            raise InvalidDimensions(f"grid needs m,n >= 1 with m*n >= 2, got {m}x{n}")
        levels = [f"r{i}c{j}" for i in range(m) for j in range(n)]
        edges = []
        for i in range(m):
            for j in range(n):
                if j + 1 < n:
                    edges.append((levels[i * n + j], levels[i * n + j + 1]))
                if i + 1 < m:
                    edges.append((levels[i * n + j], levels[(i + 1) * n + j]))
        return build_graph(levels, edges, name=f"grid:{m}x{n}")
    raise InvalidDimensions(f"unknown builtin graph kind {kind!r}")


def parse_graph_spec(spec: str) -> LevelGraph:
    """Resolve a graph spec: 'builtin:chain:12', 'builtin:grid:4x5' or a JSON file path."""
    if spec.startswith("builtin:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise InvalidDimensions(f"bad builtin graph spec {spec!r}")
        kind, arg = parts[1], parts[2]
        if kind == "grid":
            try:
                m, n = (int(x) for x in arg.split("x"))
            except ValueError:
                raise InvalidDimensions(f"bad grid dimensions {arg!r}") from None
            return builtin_graph("grid", m, n)
        try:
            n = int(arg)
        except ValueError:
            raise InvalidDimensions(f"bad {kind} size {arg!r}") from None
        return builtin_graph(kind, n)
    return load_graph(spec)


def load_graph(path) -> LevelGraph:
    """Load a graph from its JSON file format."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    name = doc.get("name", Path(path).stem)
    return build_graph(doc["levels"], [tuple(e) for e in doc["edges"]], name=name)


def save_graph(g: LevelGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(g.to_dict(), fh, indent=2)
        fh.write("\n")


def _check_subset(g: LevelGraph, s) -> int:
    mask = 0
    for i in s:
        if not (0 <= i < g.n_levels):
            raise OutOfRangeId(f"level id {i} out of range for graph {g.name!r}")
        mask |= 1 << i
    return mask


def is_connected(g: LevelGraph, s) -> bool:
    """True iff the subgraph of `g` induced by id set `s` is connected.

    Single vertices count as connected; the empty set does not.
    """
    mask = _check_subset(g, s)
    return mask_is_connected(mask, g.adj)


def induced_subgraph(g: LevelGraph, s) -> LevelGraph:
    """Subgraph induced by id set `s`, with names and relative order preserved.

    The induced subgraph gets fresh positional ids 0..len(s)-1 following
    the original id order, so callers map local id i back through the
    sorted input.
    """
    mask = _check_subset(g, s)
    ids = ids_of(mask)
    if not mask_is_connected(mask, g.adj):
        raise DisconnectedInduced(
            f"levels {[g.levels[i] for i in ids]} do not induce a connected subgraph of {g.name!r}"
        )
    local = {orig: i for i, orig in enumerate(ids)}
    levels = tuple(g.levels[i] for i in ids)
    edges = tuple(
        sorted((local[a], local[b]) for a, b in g.edges if a in local and b in local)
    )
    return LevelGraph(name=f"{g.name}|{len(ids)}", levels=levels, edges=edges)
