import pytest

from groupform import serialize
from groupform.dynamics import DeviationPolicy, Mode, run_dynamics
from groupform.errors import PreconditionError
from groupform.geometry import CoverageKind
from groupform.model import Instance, Partition, Ratio, ResourceScaled, UtilitySpec
from groupform.structure import (RelationKind, assert_structure_theorems, classify_pair,
                                 encroachment_graph, territory_members)
from groupform.verify import Status, check_ae

NESTED = Instance(((0.0,), (10.0,), (4.0,), (6.0,)), (1.0, 1.0, 1.0, 1.0))
OVERLAP = Instance(((0.0,), (6.0,), (4.0,), (10.0,)), (1.0, 1.0, 1.0, 1.0))
AB = Partition.of([[0, 1], [2, 3]])


def _far_clusters():
    inst = Instance(((0.0, 0.0), (1.0, 0.0), (100.0, 0.0), (101.0, 0.0)), (1.0,) * 4)
    return inst, AB


def test_territories():
    assert territory_members(NESTED, AB, 0) == {0, 1, 2, 3}
    assert territory_members(NESTED, AB, 1) == {2, 3}
    inst, part = _far_clusters()
    assert territory_members(inst, part, 0) == {0, 1}
    assert territory_members(inst, part, 1) == {2, 3}


def test_line3_territory(line3):
    assert territory_members(line3, Partition.of([[0, 1, 2]]), 0) == {0, 1, 2}


def test_pair_relations():
    nested = classify_pair(NESTED, AB, 0, 1)
    assert nested.kind is RelationKind.NESTED and (nested.source, nested.target) == (1, 0)
    assert classify_pair(OVERLAP, AB, 0, 1).kind is RelationKind.MUTUALLY_ENCROACHING
    inst, part = _far_clusters()
    assert classify_pair(inst, part, 0, 1).kind is RelationKind.NON_OVERLAPPING
    with pytest.raises(PreconditionError):
        classify_pair(inst, part, 1, 1)


def test_encroaches_and_crossing():
    # group 1's member (1,0) lies in group 0's triangle; group 0 has none in group 1's segment
    inst = Instance(((0.0, -1.0), (2.0, -1.0), (0.0, 1.0), (1.0, 0.0), (5.0, 0.0)), (1.0,) * 5)
    part = Partition.of([[0, 1, 2], [3, 4]])
    rel = classify_pair(inst, part, 0, 1)
    assert rel.kind is RelationKind.ENCROACHES_ON and (rel.source, rel.target) == (1, 0)
    # two segments forming an X share a point but no member lies in the other's hull
    cross = Instance(((-1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)), (1.0,) * 4)
    assert classify_pair(cross, AB, 0, 1).kind is RelationKind.CROSSING


def test_encroachment_edges(line3):
    assert encroachment_graph(NESTED, AB).edges == {(1, 0)}
    inst, part = _far_clusters()
    assert encroachment_graph(inst, part).edges == frozenset()
    g = encroachment_graph(line3, Partition.of([[0, 2], [1]]))
    assert g.edges == {(1, 0)}
    assert g.acyclic and g.topological_order() == [1, 0]


def test_cycle_witness():
    # three unit-resource pairs arranged so each encroaches on the next
    inst = Instance(((0.0,), (4.0,), (3.0,), (7.0,), (6.0,), (1.0,)), (1.0,) * 6)
    part = Partition.of([[0, 1], [2, 3], [4, 5]])
    g = encroachment_graph(inst, part)
    cycle = g.find_cycle()
    assert cycle is not None and not g.acyclic
    assert cycle[0] == cycle[-1]
    for u, v in zip(cycle, cycle[1:]):
        assert (u, v) in g.edges


def test_mutual_partition_is_not_ae(linear_diameter):
    assert check_ae(OVERLAP, AB, linear_diameter).status is Status.NOT_AE
    with pytest.raises(PreconditionError, match="not an acceptance equilibrium"):
        assert_structure_theorems(OVERLAP, AB, linear_diameter)


def test_single_group_passes(line3, linear_diameter):
    report = assert_structure_theorems(line3, Partition.of([[0, 1, 2]]), linear_diameter)
    assert report.passed and report.graph.edges == frozenset()


def test_requires_hedonic(line3):
    spec = UtilitySpec(CoverageKind.DIAMETER, Ratio(), ResourceScaled(0.1))
    with pytest.raises(PreconditionError, match="hedonic"):
        assert_structure_theorems(line3, Partition.of([[0, 1, 2]]), spec)


@pytest.mark.parametrize("coverage", [CoverageKind.DIAMETER, CoverageKind.HULL_PERIMETER,
                                      CoverageKind.HULL_VOLUME])
def test_dynamics_equilibria_pass(coverage):
    spec = UtilitySpec(coverage, Ratio())
    for seed in range(25):
        inst = serialize.gen_random(4 + seed % 5, 2, seed=60 + seed, box=(0.0, 2.0))
        start = Partition.of([[i] for i in inst.agents])
        res = run_dynamics(inst, start, spec, Mode.AE, DeviationPolicy.SEEDED_RANDOM, seed=seed)
        report = assert_structure_theorems(inst, res.partition, spec)
        assert report.passed, report.lines()
