from collections import Counter

import pytest
from hypothesis import assume, given, settings as hsettings, strategies as st
from sympy import isprime

from arborlat.exceptions import CapExceeded, DegreeMismatch, NotNormal
from arborlat.permkernel import Permutation, PermGroup, compose, symmetric_group, alternating_group, \
    cyclic_group, klein_four, regular_a5, composition_factors, normal_subgroups, quotient, FactorMultiset, \
    SimpleFactorId
from arborlat.settings import settings


def dihedral(n: int) -> PermGroup:
    rotation = Permutation(tuple(range(2, n + 1)) + (1,))
    reflection = Permutation((1,) + tuple(range(n, 1, -1)))
    return PermGroup(n, [rotation, reflection], name=f'D_{n}')


def s3_x_c2() -> PermGroup:
    return PermGroup(5, [Permutation((2, 1, 3, 4, 5)), Permutation((2, 3, 1, 4, 5)), Permutation((1, 2, 3, 5, 4))])


SMALL_GROUPS = [symmetric_group(3), symmetric_group(4), alternating_group(4), klein_four(), cyclic_group(12),
                dihedral(4), dihedral(5), dihedral(6), s3_x_c2(), alternating_group(5)]


# brute-force composition series: a maximal normal subgroup grown greedily from class representatives

def _span(n, gens, start=()):
    seen = {Permutation.identity(n)} | set(start)
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = compose(s, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def _conjugate(g, x):
    return compose(compose(g, x), g.inverse)


def _class_representatives(elements, gens):
    seen = set()
    reps = []
    for x in sorted(elements, key=lambda p: p.images):
        if x in seen:
            continue
        reps.append(x)
        stack = [x]
        seen.add(x)
        while stack:
            y = stack.pop()
            for s in gens:
                c = _conjugate(s, y)
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
    return reps


def _normal_join(n, gens, x, members, member_gens):
    member_gens = list(member_gens)
    pending = [x]
    while pending:
        y = pending.pop()
        if y in members:
            continue
        member_gens.append(y)
        members = _span(n, member_gens, members)
        pending += [_conjugate(s, y) for s in gens]
    return members, member_gens


def oracle_factors(n, elements, gens) -> Counter:
    order = len(elements)
    if order == 1:
        return Counter()
    maximal, maximal_gens = frozenset([Permutation.identity(n)]), []
    for x in _class_representatives(elements, gens):
        if isprime(order // len(maximal)):
            break
        if x in maximal:
            continue
        joined, joined_gens = _normal_join(n, gens, x, maximal, maximal_gens)
        if len(joined) < order:
            maximal, maximal_gens = joined, joined_gens
    index = order // len(maximal)
    return Counter([(index, isprime(index))]) + oracle_factors(n, maximal, maximal_gens)


@st.composite
def random_groups(draw):
    """
    Groups generated by one to three random permutations of degree at most 6.
    """
    degree = draw(st.integers(2, 6))
    gens = draw(st.lists(st.permutations(range(1, degree + 1)), min_size=1, max_size=3))
    group = PermGroup(degree, [Permutation(tuple(g)) for g in gens])
    assume(1 < group.order <= 500)
    return group


def counted(factors: FactorMultiset) -> Counter:
    return Counter((e.order, e.abelian) for e in factors.entries())


def test_permutation_rejects_non_bijections():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))


def test_compose_applies_right_factor_first():
    a = Permutation((2, 3, 1))
    b = Permutation((2, 1, 3))
    assert compose(a, b)(1) == a(b(1)) == 3
    assert compose(a, a.inverse).is_identity


def test_compose_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        compose(Permutation((2, 1)), Permutation((1, 2, 3)))


def test_parse_accepts_commas_and_parentheses():
    assert Permutation.parse('(2, 3, 1)') == Permutation((2, 3, 1))
    assert Permutation.parse('2 3 1') == Permutation((2, 3, 1))


def test_group_orders():
    assert symmetric_group(4).order == 24
    assert alternating_group(5).order == 60
    assert cyclic_group(60).order == 60
    assert regular_a5().order == 60
    assert regular_a5().is_regular_on(range(1, 61))


def test_order_cap():
    with pytest.raises(CapExceeded):
        _ = PermGroup(5, symmetric_group(5).generators, order_cap=50).order


def test_least_mapping_and_coset(s3):
    assert s3.least_mapping(1, 2) == Permutation((2, 1, 3))
    assert s3.mapping_coset(1, 2) == [Permutation((2, 1, 3)), Permutation((2, 3, 1))]
    assert cyclic_group(3).least_mapping(1, 1).is_identity
    assert s3.stabilizer_order(3) == 2


def test_orbits():
    g = PermGroup(4, [Permutation((2, 1, 3, 4)), Permutation((1, 2, 4, 3))])
    assert g.orbits() == [frozenset({1, 2}), frozenset({3, 4})]


def test_factors_of_c60_and_a5():
    assert str(composition_factors(cyclic_group(60))) == '{C_2,C_2,C_3,C_5}'
    assert str(composition_factors(regular_a5())) == '{A_5}'
    assert str(composition_factors(symmetric_group(4))) == '{C_2,C_2,C_2,C_3}'
    assert len(composition_factors(PermGroup(3))) == 0


@pytest.mark.slow
def test_factors_of_a5_x_c60(f240):
    group, _ = f240
    factors = composition_factors(group)
    assert counted(factors) == oracle_factors(group.degree, group.elements(), group.generators)
    assert str(factors) == '{A_5,C_2,C_2,C_3,C_5}'


@pytest.mark.parametrize('group', SMALL_GROUPS, ids=lambda g: g.name or f'degree {g.degree}')
def test_factors_match_brute_force(group):
    elements = group.elements()
    assert counted(composition_factors(group)) == oracle_factors(group.degree, elements, group.generators)


def test_factor_multiset_equality_ignores_names():
    assert FactorMultiset([SimpleFactorId(60, False, 'A_5')]) == FactorMultiset([SimpleFactorId(60, False)])
    with pytest.raises(ValueError):
        SimpleFactorId(4, True)


def test_quotient_of_s4_by_klein_four():
    q = quotient(symmetric_group(4), klein_four())
    assert q.degree == 6
    assert q.order == 6
    assert not q.is_abelian()


def test_quotient_needs_normal_subgroup():
    with pytest.raises(NotNormal):
        quotient(symmetric_group(4), PermGroup(4, [Permutation((2, 1, 3, 4))]))


def test_normal_subgroups_of_s4():
    assert sorted(k.order for k in normal_subgroups(symmetric_group(4))) == [1, 4, 12, 24]


@given(st.data())
def test_jordan_hoelder(data):
    g = data.draw(st.sampled_from(SMALL_GROUPS[:-1]))
    k = data.draw(st.sampled_from(normal_subgroups(g)))
    assert composition_factors(g) == composition_factors(k) + composition_factors(quotient(g, k))
    seeds = data.draw(st.tuples(st.integers(0, 1000), st.integers(0, 1000)))
    assert composition_factors(g, seed=seeds[0]) == composition_factors(g, seed=seeds[1])


@hsettings(max_examples=50)
@given(st.data())
def test_jordan_hoelder_on_random_groups(data):
    g = data.draw(random_groups())
    factors = composition_factors(g)
    assert counted(factors) == oracle_factors(g.degree, g.elements(), g.generators)
    assert factors.product() == g.order
    k = data.draw(st.sampled_from(normal_subgroups(g)))
    assert factors == composition_factors(k) + composition_factors(quotient(g, k))
    seed = data.draw(st.integers(0, 1000))
    assert composition_factors(g, seed=seed) == factors


@pytest.mark.parametrize('group', SMALL_GROUPS, ids=lambda g: g.name or f'degree {g.degree}')
def test_table_free_path_agrees(group):
    factors = composition_factors(group)
    normals = [k.elements() for k in normal_subgroups(group)]
    settings.CAP_TABLE = 1
    assert composition_factors(group) == factors
    assert composition_factors(group, seed=5) == factors
    assert [k.elements() for k in normal_subgroups(group)] == normals


def test_table_free_quotient():
    settings.CAP_TABLE = 1
    q = quotient(symmetric_group(4), klein_four())
    assert (q.degree, q.order) == (6, 6)
    with pytest.raises(NotNormal):
        quotient(symmetric_group(4), PermGroup(4, [Permutation((2, 1, 3, 4))]))


@pytest.mark.slow
def test_factors_above_table_cap():
    s7 = symmetric_group(7)
    assert s7.order > settings.CAP_TABLE
    assert str(composition_factors(s7)) == '{A_7,C_2}'
    assert [k.order for k in normal_subgroups(s7)] == [1, 2520, 5040]
    q = quotient(s7, alternating_group(7))
    assert q.order == 2
