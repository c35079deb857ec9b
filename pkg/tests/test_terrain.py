import json
import random

import pytest

from terrainboost.errors import NotASubset, NotProperSubset, WrongUniverse
from terrainboost.graph import build_graph, builtin_graph, induced_subgraph
from terrainboost.terrain import Terrain, conforms, contains, is_coarsening, load_terrain, restrict

from oracles import (
    all_partitions,
    all_subsets,
    graph_terrain_member_check,
    is_coarsening_literal,
    random_connected_graph,
)

MAMMAL_LEVELS = ("Monkey", "Chimp", "Car", "Truck", "Dog", "Wolf")
MAMMAL_GROUPS = [(0, 1), (2, 3), (4, 5), (0, 1, 4, 5)]  # primates, vehicles, canines, mammals


@pytest.fixture
def mammal_terrain():
    return Terrain.explicit(MAMMAL_LEVELS, MAMMAL_GROUPS)


def _name_ids(names):
    return tuple(sorted(MAMMAL_LEVELS.index(n) for n in names))


def test_contains_graph_induced():
    t = Terrain.from_graph(builtin_graph("chain", 3))
    assert t.contains((0, 1))
    assert not t.contains((0, 1, 2))  # the full set is never a member
    assert not t.contains((0, 2))
    assert t.contains((1,))
    with pytest.raises(NotASubset):
        t.contains((0, 7))


def test_contains_mammal_terrain(mammal_terrain):
    assert not mammal_terrain.contains(_name_ids(["Chimp", "Dog"]))
    assert mammal_terrain.contains(_name_ids(["Monkey", "Chimp", "Dog", "Wolf"]))
    assert mammal_terrain.contains(_name_ids(["Car"]))


def test_conforms(mammal_terrain):
    singletons = [(i,) for i in range(6)]
    assert conforms(singletons, mammal_terrain)
    assert not conforms([tuple(range(6))], mammal_terrain)
    mammals_vs_vehicles = [_name_ids(["Monkey", "Chimp", "Dog", "Wolf"]), _name_ids(["Car", "Truck"])]
    assert conforms(mammals_vs_vehicles, mammal_terrain)
    with pytest.raises(WrongUniverse):
        conforms([(0, 1)], mammal_terrain)


def test_is_coarsening():
    assert is_coarsening([(0, 1), (2,)], [(0,), (1,), (2,)])
    assert not is_coarsening([(0, 1), (2,)], [(0, 1), (2,)])  # equal sizes
    assert not is_coarsening([(0, 1), (2, 3)], [(0, 2), (1,), (3,)])  # {0,2} straddles
    with pytest.raises(WrongUniverse):
        is_coarsening([(0, 1)], [(0,), (1,), (2,)], n_levels=3)


def test_restrict_graph_induced():
    t = Terrain.from_graph(builtin_graph("chain", 5))
    r = restrict(t, (1, 2, 3))
    assert r.graph.levels == ("c1", "c2", "c3")
    assert r.graph.edges == ((0, 1), (1, 2))


def test_restrict_mammal(mammal_terrain):
    b = _name_ids(["Monkey", "Chimp", "Dog", "Wolf"])
    r = mammal_terrain.restrict(b)
    # members: the 4 singletons plus the two proper pair groups; B itself is out
    expected = {(0,), (1,), (2,), (3,), (0, 1), (2, 3)}
    assert set(r.members()) == expected
    assert r.levels == ("Monkey", "Chimp", "Dog", "Wolf")


def test_restrict_singleton_rejected(mammal_terrain):
    with pytest.raises(NotProperSubset):
        mammal_terrain.restrict((0,))
    with pytest.raises(NotProperSubset):
        mammal_terrain.restrict(tuple(range(6)))


def test_restriction_satisfies_terrain_invariants(mammal_terrain):
    r = mammal_terrain.restrict((0, 1, 2))
    members = set(r.members())
    for i in range(3):
        assert (i,) in members
    assert (0, 1, 2) not in members
    assert () not in members


def test_restrict_matches_induced_subgraph_membership():
    rng = random.Random(77)
    for _ in range(30):
        n, edges = random_connected_graph(rng, 3, 8)
        g = build_graph([f"v{i}" for i in range(n)], [(f"v{a}", f"v{b}") for a, b in edges])
        t = Terrain.from_graph(g)
        # pick a random connected proper subset to restrict to
        candidates = [
            s for s in all_subsets(n, 2, n - 1)
            if Terrain.from_graph(g).contains(s)
        ]
        if not candidates:
            continue
        b = rng.choice(candidates)
        r1 = t.restrict(b)
        r2 = Terrain.from_graph(induced_subgraph(g, b))
        k = len(b)
        for s in all_subsets(k, 1, k):
            assert r1.contains(s) == r2.contains(s)


def test_defs_agree_with_bruteforce_oracle():
    rng = random.Random(99)
    for _ in range(20):
        n, edges = random_connected_graph(rng, 2, 6)
        g = build_graph([f"v{i}" for i in range(n)], [(f"v{a}", f"v{b}") for a, b in edges])
        t = Terrain.from_graph(g)
        member = graph_terrain_member_check(n, edges)
        for s in all_subsets(n, 1, n):
            assert t.contains(s) == member(s)
        partitions = [[tuple(sorted(p)) for p in parts] for parts in all_partitions(list(range(n)))]
        for parts in partitions[:200]:
            assert conforms(parts, t) == all(member(p) for p in parts)
        for p1 in partitions[:25]:
            for p2 in partitions[:25]:
                assert is_coarsening(p1, p2, n) == is_coarsening_literal(p1, p2)


def test_explicit_terrain_validation():
    with pytest.raises(NotASubset):
        Terrain.explicit(("a", "b"), [(0, 1)])  # full universe
    with pytest.raises(NotASubset):
        Terrain.explicit(("a", "b", "c"), [(0, 5)])


def test_load_terrain_singletons_implied(tmp_path):
    doc = {"universe": list(MAMMAL_LEVELS), "members": [["Monkey", "Chimp"], ["Car", "Truck"]]}
    path = tmp_path / "terrain.json"
    path.write_text(json.dumps(doc))
    t = load_terrain(path)
    assert t.contains((0,))
    assert t.contains((0, 1))
    assert not t.contains((0, 1, 4, 5))
