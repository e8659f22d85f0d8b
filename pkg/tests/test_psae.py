import json
import logging
from pathlib import Path

import pytest

import oracles
from groupform import serialize
from groupform.errors import PreconditionError
from groupform.geometry import CoverageKind
from groupform.model import Instance, Ratio, ResourceScaled, UtilitySpec, game_for
from groupform.psae import max_utility_group, psae_bruteforce, psae_diameter_fast
from groupform.verify import check_sae

COUNTEREXAMPLES = sorted((Path(__file__).parent / "fixtures" / "psae_fast_counterexamples").glob("*.json"))


def test_line3_pool(line3, linear_diameter):
    assert max_utility_group(line3, {0, 1, 2}, linear_diameter) == {0, 1, 2}
    assert max_utility_group(line3, {1}, linear_diameter) == {1}
    with pytest.raises(PreconditionError):
        max_utility_group(line3, set(), linear_diameter)
    with pytest.raises(PreconditionError):
        max_utility_group(line3, {0, 1, 2}, linear_diameter, cap=2)


def test_size_breaks_ties(linear_diameter):
    # {0,1,2} and {3,4} both score 1.0 under R/(1+D)
    inst = Instance(((0.0,), (1.0,), (2.0,), (50.0,), (51.0,)), (1.0, 1.0, 1.0, 1.0, 1.0))
    assert max_utility_group(inst, range(5), linear_diameter) == {0, 1, 2}


def test_lexicographic_tie_break_logged(caplog, linear_diameter):
    inst = Instance(((0.0,), (100.0,)), (1.0, 1.0))
    with caplog.at_level(logging.INFO):
        part = psae_bruteforce(inst, linear_diameter)
    assert part.groups == (frozenset({0}), frozenset({1}))
    assert "tie-break" in caplog.text


def test_line3_psae(line3, linear_diameter):
    assert psae_bruteforce(line3, linear_diameter).key() == ((0, 1, 2),)
    part, diag = psae_diameter_fast(line3, linear_diameter, oracle_check=True)
    assert part.key() == ((0, 1, 2),)
    assert diag.agrees and diag.candidate_counts == [6]


def test_far_clusters(linear_diameter):
    inst = Instance(((0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (500.0, 0.0), (500.1, 0.0)),
                    (2.0, 2.0, 2.0, 1.0, 1.0))
    part = psae_bruteforce(inst, linear_diameter)
    assert [sorted(g) for g in part.groups] == [[0, 1, 2], [3, 4]]


def test_coincident_pair_merges(linear_diameter):
    inst = Instance(((3.0,), (3.0,)), (1.0, 1.0))
    assert psae_bruteforce(inst, linear_diameter).key() == ((0, 1),)


@pytest.mark.parametrize("n", range(2, 13))
def test_equally_spaced_line_matches_bruteforce(n, linear_diameter):
    inst = Instance(tuple((float(i),) for i in range(n)), (1.0,) * n)
    fast, diag = psae_diameter_fast(inst, linear_diameter, oracle_check=True)
    assert diag.agrees
    assert fast.key() == psae_bruteforce(inst, linear_diameter).key()


def test_penalized_psae_is_sae():
    spec = UtilitySpec(CoverageKind.DIAMETER, Ratio(), ResourceScaled(0.2))
    for seed in range(15):
        inst = serialize.gen_random(5, 2, seed=40 + seed, box=(0.0, 3.0))
        part = psae_bruteforce(inst, spec)
        assert check_sae(inst, part, spec).stable
        first = game_for(inst, spec).utility(part, 0)
        assert first == oracles.max_subset_utility(inst.locations, inst.resources)


def test_fast_path_preconditions(line3):
    with pytest.raises(PreconditionError):
        psae_diameter_fast(line3, UtilitySpec(CoverageKind.HULL_PERIMETER))
    with pytest.raises(PreconditionError):
        psae_diameter_fast(line3, UtilitySpec(penalty=ResourceScaled(0.1)))
    with pytest.raises(PreconditionError):
        psae_bruteforce(serialize.gen_random(21, 1), UtilitySpec())


def test_single_pool_agent(linear_diameter):
    inst = Instance(((0.0,), (1000.0,)), (1.0, 5.0))
    part, _ = psae_diameter_fast(inst, linear_diameter)
    assert part.key() == ((0,), (1,))


@pytest.mark.skipif(not COUNTEREXAMPLES, reason="no fast-path counterexamples recorded")
@pytest.mark.parametrize("path", COUNTEREXAMPLES, ids=[p.stem for p in COUNTEREXAMPLES])
def test_recorded_fast_path_gap(path):
    """Known misses of the pair-lens candidates stay reproducible and detected."""
    doc = json.loads(path.read_text())
    inst, spec, _ = serialize.instance_from_dict(doc["instance"])
    expected = doc["expected"]
    part, diag = psae_diameter_fast(inst, spec, oracle_check=True)
    game = game_for(inst, spec)
    assert game.utility(part, 0) == expected["fast_first_utility"]
    assert oracles.max_subset_utility(inst.locations, inst.resources) == expected["brute_first_utility"]
    assert not diag.first_group_agrees
    brute = psae_bruteforce(inst, spec)
    assert game.utility(brute, 0) == expected["brute_first_utility"]
