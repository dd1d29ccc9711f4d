import random

import pytest
from pydantic import ValidationError

from arborlat.enums import Conclusion
from arborlat.exceptions import NotNormal
from arborlat.obstruction import factor_obstruction, chain_identity_check, edge_orbit_report, \
    fewerorbits_check, main_theorem_desk_check
from arborlat.permkernel import Permutation, PermGroup, alternating_group, composition_factors, cyclic_group, \
    klein_four, normal_subgroups, quotient, regular_a5, symmetric_group
from arborlat.schemas import ObstructionVerdict


def test_a5_and_c60_are_obstructed():
    verdict = factor_obstruction(regular_a5(), cyclic_group(60))
    assert not verdict.equal
    assert verdict.conclusion == Conclusion.no_common_overlattice
    assert verdict.explanation == 'factors differ: {A_5} vs {C_2,C_2,C_3,C_5}'
    assert verdict.render().splitlines() == ['f1 {A_5}', 'f2 {C_2,C_2,C_3,C_5}', 'equal false',
                                             'conclusion NoCommonOverlattice',
                                             'report factors differ: {A_5} vs {C_2,C_2,C_3,C_5}']


def test_same_factors_give_no_obstruction():
    verdict = factor_obstruction(cyclic_group(6), symmetric_group(3))
    assert verdict.equal
    assert verdict.conclusion == Conclusion.no_obstruction


def test_verdict_rejects_contradiction():
    c = composition_factors(cyclic_group(2))
    with pytest.raises(ValidationError):
        ObstructionVerdict(f1_factors=c, f2_factors=c, equal=True, conclusion=Conclusion.no_common_overlattice)


def test_chain_identity():
    assert chain_identity_check(symmetric_group(4), klein_four(), symmetric_group(3))
    assert chain_identity_check(symmetric_group(4), klein_four(), cyclic_group(6))
    assert not chain_identity_check(symmetric_group(4), klein_four(), cyclic_group(2))
    with pytest.raises(NotNormal):
        chain_identity_check(symmetric_group(4), PermGroup(4, [Permutation((2, 1, 3, 4))]), cyclic_group(12))


def test_chain_identity_on_random_pairs():
    rng = random.Random(0)
    groups = [symmetric_group(3), symmetric_group(4), alternating_group(4), klein_four(), cyclic_group(12),
              cyclic_group(30), regular_a5()]
    normals = {id(g): normal_subgroups(g) for g in groups}
    for _ in range(50):
        g = rng.choice(groups)
        k = rng.choice(normals[id(g)])
        assert chain_identity_check(g, k, quotient(g, k))


def test_edge_orbits_of_canonical_structure(f240):
    _, os_ = f240
    assert edge_orbit_report(os_) == ['edge-orbits 2', 'edge-orbit 1-2', 'edge-orbit 3-4']


def test_fewerorbits_check():
    verdict, lines = fewerorbits_check()
    assert lines == ['order 3600', 'omega-sizes 60 60', 'omega-equal true', 'quotient-valid true',
                     'edge-orbits 1', 'edge-orbit 1-2', 'transitive-on-both-parts excluded']
    assert verdict.conclusion == Conclusion.no_common_overlattice


@pytest.mark.parametrize('kwargs', [dict(radius=1), dict(samples=[5]), dict(samples=[240])])
def test_desk_check_arguments(kwargs):
    with pytest.raises(ValueError):
        main_theorem_desk_check(**kwargs)


@pytest.mark.slow
def test_desk_check_accepts():
    transcript = main_theorem_desk_check(radius=2, samples=[181, 200])
    assert transcript.accepted
    ids = [s.id for s in transcript.steps]
    assert ids[:5] == ['1a', '1b', '1c', '1d', '2']
    assert '7m' in ids and '8.200.7' in ids and ids[-1] == '9'
    assert transcript.step('3').values == "l''(bar e_121)=182"
    assert transcript.render().splitlines()[-1] == 'result PASS'
    assert transcript.conclusion == Conclusion.no_common_overlattice


@pytest.mark.slow
def test_desk_check_transcript_is_reproducible():
    first = main_theorem_desk_check(radius=2, samples=[181, 200]).render()
    assert main_theorem_desk_check(radius=2, samples=[181, 200]).render() == first
