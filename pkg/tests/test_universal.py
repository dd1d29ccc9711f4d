import itertools
import random
from typing import Sequence

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from arborlat.ballmap import ExplicitMap
from arborlat.exceptions import CapExceeded, NoCandidate, NotInF, VertexNotInternal
from arborlat.labelled import OrbitStructure, random_tau_legal, lift
from arborlat.lattices import build_X
from arborlat.permkernel import Permutation, PermGroup, symmetric_group
from arborlat.universal import extend, check_family, local_action, local_action_family, is_member, \
    sigma_surjectivity_check, transitivity_move, predicted_stabilizer_count, enumerate_ball_stabilizer, \
    conjugating_pair, pulls_back_members, single_edge_breach_demo, breached_ball, EquivariantFamily

# two orbits {1,2} and {3,4} swapped by tau
PAIRED = PermGroup(4, [Permutation((2, 1, 3, 4)), Permutation((1, 2, 4, 3))], name='C_2 x C_2')
PAIRED_OS = OrbitStructure.from_group(PAIRED, [('1', '2')])


def blind_stabilizer(ball, group):
    """
    Every automorphism of the radius-2 ball of a degree-3 tree fixing the root, kept when its
    local actions lie in the group.
    """
    frame = ball.frame
    kept = []
    for sigma in itertools.permutations(range(1, 4)):
        choices = []
        for a in range(1, 4):
            src = [c for c in range(1, 4) if c != frame.back((a,))]
            dst = [d for d in range(1, 4) if d != frame.back((sigma[a - 1],))]
            choices.append([dict(zip(src, p)) for p in itertools.permutations(dst)])
        for picks in itertools.product(*choices):
            mapping = {(): ()}
            for a in range(1, 4):
                mapping[(a,)] = (sigma[a - 1],)
                for c, d in picks[a - 1].items():
                    mapping[(a, c)] = (sigma[a - 1], d)
            g = ExplicitMap(ball, ball, mapping)
            if is_member(g, group, ball, ball)[0]:
                kept.append(g)
    return kept


def _block_permutation(n: int, cycle: Sequence[int]) -> Permutation:
    images = list(range(1, n + 1))
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        images[a - 1] = b
    return Permutation(tuple(images))


@st.composite
def block_structures(draw):
    """
    A random partition of 1..n with tau pairing some of its blocks, and the product of the
    symmetric groups on the blocks.
    """
    n = draw(st.integers(3, 6))
    order = draw(st.permutations(range(1, n + 1)))
    cuts = sorted(draw(st.sets(st.integers(1, n - 1), max_size=n - 1)))
    blocks = {str(k): frozenset(order[i:j]) for k, (i, j) in enumerate(zip([0] + cuts, cuts + [n]), start=1)}
    ids = draw(st.permutations(sorted(blocks)))
    pairs = draw(st.integers(0, len(ids) // 2))
    tau = dict()
    for i, j in zip(ids[:2 * pairs:2], ids[1:2 * pairs:2]):
        tau[i], tau[j] = j, i
    gens = []
    for block in blocks.values():
        b = sorted(block)
        if len(b) > 1:
            gens += [_block_permutation(n, b), _block_permutation(n, b[:2])]
    return OrbitStructure(n, blocks, tau), PermGroup(n, gens)


@hsettings(max_examples=100)
@given(structure=block_structures(), radius=st.integers(1, 4),
       seeds=st.tuples(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6)), index=st.integers(0, 10 ** 6))
def test_extend_relates_random_balls(structure, radius, seeds, index):
    os_, group = structure
    assert sorted(map(frozenset, group.orbits()), key=min) == sorted(os_.blocks.values(), key=min)
    l1 = random_tau_legal(os_, radius=radius, seed=seeds[0])
    l2 = random_tau_legal(os_, radius=radius, seed=seeds[1])
    f0 = group.sorted_elements()[index % group.order]
    g, family = extend(l1, l2, (), (), f0, group, radius)
    assert g.image(()) == ()
    assert family[()] == f0
    assert check_family(g, family, l1, l2)
    assert local_action_family(g, l1, l2).assignments == family.assignments


@given(seeds=st.tuples(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6)), index=st.integers(0, 3))
def test_extend_respects_blocks(seeds, index):
    l1 = random_tau_legal(PAIRED_OS, radius=3, seed=seeds[0])
    l2 = random_tau_legal(PAIRED_OS, radius=3, seed=seeds[1])
    f0 = PAIRED.sorted_elements()[index]
    g, family = extend(l1, l2, (), (), f0, PAIRED, 3)
    assert len(family) == 1 + 4 + 12
    assert check_family(g, family, l1, l2)
    assert is_member(g, PAIRED, l1, l2) == (True, None)


def test_extend_rejects_f0_outside_group():
    l = random_tau_legal(PAIRED_OS, radius=2, seed=0)
    with pytest.raises(NotInF):
        extend(l, l, (), (), Permutation((3, 2, 1, 4)), PAIRED, 2)


def test_extend_lazy_map_is_unbounded(s3):
    l = random_tau_legal(OrbitStructure.from_group(s3), seed=2)
    path = ()
    for _ in range(5):
        path += (min(c for c in range(1, 4) if not path or c != l.frame.back(path)),)
    g, family = extend(l, l, (), (), Permutation((2, 3, 1)), s3, 2, lazy=True)
    assert len(family) == 4
    deep = g.image(path)
    assert len(deep) == 5
    assert g.inverse().image(deep) == path


def test_transitivity_move(s3):
    l = random_tau_legal(OrbitStructure.from_group(s3), radius=3, seed=4)
    target = (2, 3) if l.frame.back((2,)) != 3 else (2, 1)
    g = transitivity_move(l, (), target, s3, 2)
    assert g.image(()) == target
    assert check_family(g, EquivariantFamily(g.family()), l, l)


def test_local_action_needs_internal_vertex(toy_ball, s3):
    g, _ = extend(toy_ball, toy_ball, (), (), Permutation((1, 2, 3)), s3, 1)
    assert local_action(g, (), toy_ball, toy_ball).is_identity
    with pytest.raises(VertexNotInternal):
        local_action(g, (1,), toy_ball, toy_ball)


def test_sigma_surjectivity_on_toy(toy_ball, s3):
    assert sigma_surjectivity_check(toy_ball, (), s3)


@pytest.mark.parametrize('seed', range(5))
def test_sigma_surjectivity_fails_on_breached_ball(seed):
    good, bad = breached_ball(PAIRED_OS, radius=2, seed=seed)
    assert sigma_surjectivity_check(good, (), PAIRED)
    assert not sigma_surjectivity_check(bad, (), PAIRED)


def test_sigma_surjectivity_needs_radius_two(toy_ball, s3):
    with pytest.raises(ValueError):
        sigma_surjectivity_check(toy_ball.with_radius(1), (), s3)
    with pytest.raises(ValueError):
        sigma_surjectivity_check(toy_ball, (1,), s3)


@pytest.mark.slow
def test_sigma_surjectivity_on_canonical_lift(f240):
    group, _ = f240
    assert sigma_surjectivity_check(lift(build_X(), radius=2), (), group)


def test_stabilizer_count_on_toy(toy_ball, s3):
    assert predicted_stabilizer_count(toy_ball, (), s3, 2) == 48
    members = enumerate_ball_stabilizer(toy_ball, (), s3, 2)
    assert len(members) == 48
    images = {tuple(g.image(v) for v in toy_ball.vertices()) for g in members}
    assert len(images) == 48


@pytest.mark.parametrize('order,expected', [(6, 48), (3, 3)])
def test_stabilizer_matches_blind_enumeration(toy_ball, order, expected):
    group = symmetric_group(3) if order == 6 else PermGroup(3, [Permutation((2, 3, 1))])
    blind = blind_stabilizer(toy_ball, group)
    members = enumerate_ball_stabilizer(toy_ball, (), group, 2)
    assert len(blind) == len(members) == expected
    assert sorted(sorted(g.mapping.items()) for g in blind) == sorted(sorted(g.mapping.items()) for g in members)


def test_stabilizer_cap(toy_ball, s3):
    with pytest.raises(CapExceeded) as ex:
        enumerate_ball_stabilizer(toy_ball, (), s3, 2, cap=10)
    assert ex.value.predicted == 48


def test_membership_witness(toy_ball, c3):
    swap = ExplicitMap(toy_ball, toy_ball, {(): (), (1,): (2,), (2,): (1,), (3,): (3,)})
    ok, witness = is_member(swap, c3, toy_ball, toy_ball)
    assert ok is False
    assert witness.vertex == ()
    assert witness.permutation == Permutation((2, 1, 3))


def test_membership_survives_relabelling(toy_ball, s3, c3):
    rng = random.Random(1)
    relabelled = toy_ball.relabelled({v: rng.choice(c3.sorted_elements()) for v in toy_ball.vertices()})
    outcomes = set()
    for f in s3:
        g, _ = extend(toy_ball, toy_ball, (), (), f, s3, 2)
        ok = is_member(g, c3, toy_ball, toy_ball)[0]
        assert is_member(g, c3, relabelled, relabelled)[0] == ok
        outcomes.add(ok)
    assert outcomes == {True, False}


def test_conjugating_pair_pulls_back_members(c3):
    os_ = OrbitStructure.from_group(c3)
    l = random_tau_legal(os_, radius=2, seed=11)
    l2 = random_tau_legal(os_, radius=2, seed=12)
    g, family = conjugating_pair(l, l2, c3, 2)
    assert check_family(g, family, l, l2)
    members = enumerate_ball_stabilizer(l2, (), c3, 2)
    assert len(members) == 3
    assert pulls_back_members(g, members, c3, l)


def test_single_edge_breach():
    ex = single_edge_breach_demo(PAIRED_OS, PAIRED, radius=2, seed=1)
    assert isinstance(ex, NoCandidate)
    assert '/1' in ex.msg


def test_single_edge_breach_needs_matching_orbits():
    with pytest.raises(ValueError):
        single_edge_breach_demo(PAIRED_OS, symmetric_group(4))
