import random

import pytest

from arborlat.enums import ViolationKind
from arborlat.exceptions import FormatError, NotUnimodular, DegreeMismatch
from arborlat.labelled import LabelledGraph, OrbitStructure, TreeFrame, TreeBall, lift, random_tau_legal, \
    validate_labelling, legal_violations, build_two_vertex_quotient, vertex_transitive_labelling
from arborlat.lattices import build_X, build_Xprime
from arborlat.permkernel import Permutation


def rose(n: int = 4) -> LabelledGraph:
    g = LabelledGraph(n, 'rose')
    g.add_vertex('x')
    for k in range(1, n // 2 + 1):
        g.add_edge(f'a{k}', 'x', 'x', 2 * k - 1, 2 * k)
    return g


def test_orbit_structure_rejects_bad_partitions():
    with pytest.raises(FormatError):
        OrbitStructure(3, {'1': frozenset({1, 2})}, {})
    with pytest.raises(FormatError):
        OrbitStructure(2, {'1': frozenset({1}), '2': frozenset({2})}, {'1': '2', '2': '2'})


def test_orbit_structure_from_group(s3):
    os_ = OrbitStructure.from_group(s3)
    assert os_.blocks == {'1': frozenset({1, 2, 3})}
    assert os_.tau == {'1': '1'}
    assert os_.unimodular


def test_canonical_orbit_structure(f240):
    _, os_ = f240
    assert os_.block_ids() == ['1', '2', '3', '4']
    assert os_.block_of(61) == '2'
    assert os_.partner_block(1) == frozenset(range(61, 121))
    assert os_.tau_compatible(121, 181)
    assert not os_.tau_compatible(121, 1)


def test_X_and_Xprime_are_tau_legal(f240):
    _, os_ = f240
    assert validate_labelling(build_X(), os_).ok
    assert validate_labelling(build_Xprime(), os_).ok


def test_lifts_of_X_and_Xprime_are_tau_legal(f240):
    _, os_ = f240
    for graph in (build_X(), build_Xprime()):
        ball = lift(graph, radius=1)
        assert ball.materialize() == 241
        assert validate_labelling(ball, os_).ok


def test_corruptions_are_detected(f240):
    _, os_ = f240
    x = build_X()
    rng = random.Random(0)
    names = sorted(x.arcs)
    for _ in range(20):
        name = rng.choice(names)
        old = x.arcs[name].label
        new = rng.choice([lab for lab in range(1, 241) if lab != old])
        corrupted = x.with_label(name, new)
        report = validate_labelling(corrupted, os_)
        arc = corrupted.arcs[name]
        fwd, bwd = (arc.label, corrupted.bar(arc).label)
        kinds = report.kinds()
        assert ViolationKind.bijectivity in kinds
        assert (ViolationKind.tau in kinds) == (not os_.tau_compatible(fwd, bwd))
        assert ViolationKind.label_range not in kinds


def test_label_out_of_range():
    g = LabelledGraph(3, 'bad')
    g.add_vertex('x')
    g.add_vertex('y')
    for k in (1, 2):
        g.add_edge(f'e{k}', 'x', 'y', k, k)
    g.add_edge('e3', 'x', 'y', 4, 3)
    report = validate_labelling(g, OrbitStructure.discrete(3))
    assert ViolationKind.label_range in report.kinds()
    assert not report.ok
    assert report.render().startswith('valid false')


def test_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        validate_labelling(rose(4), OrbitStructure.discrete(3))


def test_tree_frame_steps_back_to_parent():
    frame = TreeFrame(3)
    frame.set_back((1,), 2)
    frame.set_back((1, 1), 3)
    assert frame.step((1,), 2) == ()
    assert frame.step((1, 1), 3) == (1,)
    assert frame.reverse((), 1) == 2
    assert frame.path_to_root((1, 1)) == [3, 2]
    assert frame.distance((1, 1), ()) == 2
    with pytest.raises(FormatError):
        frame.set_back((1, 2), 1)


def test_lift_projects_onto_the_graph():
    q = build_two_vertex_quotient(OrbitStructure.discrete(4))
    ball = lift(q, radius=2)
    assert ball.frame.projection(()) == 'x1'
    assert ball.frame.projection((3,)) == 'x2'
    assert ball.frame.projection((3, 1)) == 'x1'
    assert ball.frame.back((3,)) == 3
    assert ball.materialize() == 1 + 4 + 12


def test_lift_rejects_non_bijective_graph():
    g = LabelledGraph(2, 'bad')
    g.add_vertex('x')
    g.add_edge('a', 'x', 'x', 1, 1)
    with pytest.raises(FormatError):
        lift(g)


def test_two_vertex_quotient_is_legal():
    os_ = OrbitStructure.discrete(4)
    q = build_two_vertex_quotient(os_)
    assert validate_labelling(q, os_).ok
    assert legal_violations(lift(q, radius=3)).ok


def test_two_vertex_quotient_needs_unimodular_structure():
    os_ = OrbitStructure(3, {'1': frozenset({1}), '2': frozenset({2, 3})}, {'1': '2', '2': '1'})
    assert not os_.unimodular
    with pytest.raises(NotUnimodular):
        build_two_vertex_quotient(os_)


def test_random_tau_legal_is_tau_legal(f240):
    _, os_ = f240
    ball = random_tau_legal(os_, radius=2, seed=3)
    assert validate_labelling(ball, os_).ok


def test_random_tau_legal_does_not_depend_on_materialization_order(os3):
    a = random_tau_legal(os3, seed=5)
    b = random_tau_legal(os3, seed=5)
    deep = ()
    for _ in range(4):
        deep += (min(c for c in range(1, 4) if not deep or c != a.frame.back(deep)),)
    forward = [a.frame.back(deep[:k]) for k in range(1, 5)]
    b.frame.back(deep)
    assert [b.frame.back(deep[:k]) for k in range(1, 5)] == forward
    assert random_tau_legal(os3, radius=3, seed=6).frame.size == 1 + 3 + 6 + 12


def test_legal_violations_finds_mismatched_arc(toy_ball):
    assert legal_violations(toy_ball).ok
    bad = toy_ball.with_label((1,), toy_ball.frame.back((1,)), 2)
    report = legal_violations(bad)
    assert [v.where for v in report.violations] == ['arc /:1']
    assert report.violations[0].kind == ViolationKind.legal


def test_relabelled_shares_coordinates(toy_ball):
    f = Permutation((2, 3, 1))
    related = toy_ball.relabelled({(): f})
    assert related.labels(()) == (2, 3, 1)
    assert related.labels((1,)) == toy_ball.labels((1,))
    assert related.frame is toy_ball.frame
    assert related.label_path((1, 2)) == (2, 2)


def test_vertex_transitive_labelling():
    ball, os_ = vertex_transitive_labelling(rose(4), radius=2)
    assert os_.tau == {'1': '2', '2': '1', '3': '4', '4': '3'}
    assert validate_labelling(ball, os_).ok


def test_unbounded_ball_has_no_internal_list():
    ball = TreeBall(TreeFrame(3), None)
    assert ball.is_internal((1, 2, 3, 1))
    with pytest.raises(ValueError):
        ball.internal_vertices()
