import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import networkx as nx

from arborlat.ballmap import BallMap, DeckMap, FamilyMap, ComposedMap
from arborlat.exceptions import DifferentProjection, NotLegal, NotUniform, NotInF, VertexNotInternal, \
    BasisInvalid, VerificationFailed
from arborlat.labelled import LabelledGraph, OrbitStructure, TreeBall, Vertex, Labeller, lift, \
    legal_violations, build_two_vertex_quotient, _GraphSource
from arborlat.permkernel import Permutation, PermGroup, a5_elements, left_regular, embedded, compose, \
    A5_GENERATORS, symmetric_group
from arborlat.universal import local_action, extend, relating_family
from arborlat.settings import settings
from arborlat.utils import logger, format_path

BLOCK = 60


def build_X() -> LabelledGraph:
    """
    One vertex with 120 loops: loop k carries (k, 60+k), loop 60+j carries (120+j, 180+j).
    """
    g = LabelledGraph(4 * BLOCK, 'X')
    g.add_vertex('x')
    for k in range(1, BLOCK + 1):
        g.add_edge(f'e{k}', 'x', 'x', k, BLOCK + k)
    for j in range(1, BLOCK + 1):
        g.add_edge(f'e{BLOCK + j}', 'x', 'x', 2 * BLOCK + j, 3 * BLOCK + j)
    return g


def build_Xprime() -> LabelledGraph:
    """
    X with the labels 181..240 cyclically permuted: loop 60+j carries (120+j, 180+(j mod 60)+1).
    """
    g = LabelledGraph(4 * BLOCK, "X'")
    g.add_vertex('x')
    for k in range(1, BLOCK + 1):
        g.add_edge(f'e{k}', 'x', 'x', k, BLOCK + k)
    for j in range(1, BLOCK + 1):
        g.add_edge(f'e{BLOCK + j}', 'x', 'x', 2 * BLOCK + j, 3 * BLOCK + (j % BLOCK) + 1)
    return g


def _shift(offset: int, degree: int) -> Permutation:
    cycle = Permutation(tuple(range(2, BLOCK + 1)) + (1,))
    return embedded(cycle, (offset,), degree)


@lru_cache(maxsize=None)
def canonical_F240() -> tuple[PermGroup, OrbitStructure]:
    """
    A_5 x C_60 on 240 points: A_5 by left translation on its lexicographically listed elements,
    identically on blocks 1, 3 and 4; C_60 rotating block 2. tau = (12)(34).
    """
    elements = a5_elements()
    degree = 4 * BLOCK
    gens = [embedded(left_regular(elements, s), (0, 2 * BLOCK, 3 * BLOCK), degree) for s in A5_GENERATORS]
    gens.append(_shift(BLOCK, degree))
    group = PermGroup(degree, gens, name='A_5 x C_60')
    blocks = {str(b + 1): frozenset(range(b * BLOCK + 1, (b + 1) * BLOCK + 1)) for b in range(4)}
    return group, OrbitStructure(degree, blocks, {'1': '2', '2': '1', '3': '4', '4': '3'})


@lru_cache(maxsize=None)
def canonical_F120() -> tuple[PermGroup, OrbitStructure]:
    elements = a5_elements()
    degree = 2 * BLOCK
    gens = [embedded(left_regular(elements, s), (0,), degree) for s in A5_GENERATORS]
    gens.append(_shift(BLOCK, degree))
    group = PermGroup(degree, gens, name='A_5 x C_60')
    blocks = {str(b + 1): frozenset(range(b * BLOCK + 1, (b + 1) * BLOCK + 1)) for b in range(2)}
    return group, OrbitStructure(degree, blocks, {'1': '2', '2': '1'})


def plus60_equivariant(group: PermGroup) -> bool:
    """
    j -> j+60 from block 3 to block 4 commutes with every generator.
    """
    lo, hi = 2 * BLOCK + 1, 3 * BLOCK
    return all(s(j + BLOCK) == s(j) + BLOCK for s in group.generators for j in range(lo, hi + 1))


def lift_graph(ball: TreeBall) -> LabelledGraph:
    if not isinstance(ball.frame.source, _GraphSource):
        raise ValueError('Deck transformations need the coordinates of a lift')
    return ball.frame.source.graph


@dataclass(frozen=True)
class DeckElement:
    """
    A reduced closed path at the basepoint of a graph, given by its arcs.
    """
    graph: LabelledGraph = field(compare=False, repr=False)
    word: tuple[str, ...]

    @classmethod
    def from_labels(cls, graph: LabelledGraph, labels: Sequence[int], base: str = None) -> 'DeckElement':
        v = base or graph.basepoint
        arcs = []
        for label in labels:
            arc = graph.arc_at(v, label)
            if arc is None:
                raise ValueError(f'No arc labelled {label} at {v}')
            if arcs and arcs[-1].bar == arc.name:
                raise ValueError('Word is not reduced')
            arcs.append(arc)
            v = arc.terminus
        if v != (base or graph.basepoint):
            raise ValueError('Word is not a closed path')
        return cls(graph, tuple(a.name for a in arcs))

    @classmethod
    def identity(cls, graph: LabelledGraph) -> 'DeckElement':
        return cls(graph, ())

    def labels(self) -> tuple[int, ...]:
        return tuple(self.graph.arcs[a].label for a in self.word)

    def inverse(self) -> 'DeckElement':
        return DeckElement(self.graph, tuple(self.graph.arcs[a].bar for a in reversed(self.word)))

    def endpoint(self, ball: TreeBall) -> Vertex:
        return ball.frame.walk((), self.labels())

    def __str__(self):
        return ' '.join(self.word) or 'id'


def deck_apply(d: DeckElement, v: Vertex, ball: TreeBall) -> Vertex:
    frame = ball.frame
    return frame.walk(d.endpoint(ball), v)


def deck_ballmap(d: DeckElement, ball: TreeBall, radius: Optional[int] = None) -> DeckMap:
    return DeckMap(ball, d.endpoint(ball), radius)


def deck_move_arc(ball: TreeBall, a: tuple[Vertex, int], b: tuple[Vertex, int]) -> DeckElement:
    """
    The deck transformation sending arc a to arc b, both given as (vertex, address) in a lift.
    """
    graph = lift_graph(ball)
    frame = ball.frame
    (va, aa), (vb, ab) = a, b
    pa, pb = frame.projection(va), frame.projection(vb)
    if pa != pb or aa != ab:
        raise DifferentProjection(f'Arcs project to {pa}:{aa} and {pb}:{ab}')
    endpoint = frame.walk(vb, frame.path_to_root(va))
    return DeckElement.from_labels(graph, endpoint, base=frame.projection(()))


def _require_legal(l: TreeBall, error=NotLegal):
    report = legal_violations(l)
    if not report.ok:
        first = report.violations[0]
        raise error(f'Labelling is not legal: {first.where} {first.detail}')


def psi(g: BallMap, l: TreeBall, group: PermGroup, check_legal: bool = True) -> Permutation:
    """
    The common local action of g at every internal vertex, for g in Lambda(F).
    """
    if check_legal:
        _require_legal(l)
    vertices = g.internal_vertices()
    if not vertices:
        raise VertexNotInternal('The map has no internal vertex')
    f = None
    for x in vertices:
        p = local_action(g, x, l, l)
        if f is None:
            f = p
        elif p != f:
            raise NotUniform(f'Local actions differ: {f} at {format_path(vertices[0])}, {p} at {format_path(x)}')
    if f not in group:
        raise NotInF(f'Local action {f} is not in the group')
    return f


def lambda_element(l: TreeBall, x: Vertex, f: Permutation, radius: Optional[int] = None,
                   check_legal: bool = True) -> FamilyMap:
    """
    The element of Lambda(F) fixing x with local action f everywhere: on the star of every vertex y
    it is l_gy^-1 o f o l_y.
    """
    if check_legal:
        _require_legal(l)
    return FamilyMap(l, l, x, x, f, lambda a, b: f, reach=radius)


def conjugation_check(l: TreeBall, h: BallMap, group: PermGroup, samples: int = 6, seed: int = 0,
                      maps: Sequence[BallMap] = None) -> bool:
    """
    For sampled g (alternately Lambda elements and extensions), psi succeeds on g w.r.t. l exactly
    when it succeeds on h^-1 g h w.r.t. l o h. Both sides are read on the common region: the
    internal vertices v of the conjugate with hv internal for g, where the local actions must agree
    pointwise; psi of either side is then read off the same list.
    """
    lh = l.pullback(h)
    hinv = h.inverse()
    if maps is None:
        rng = random.Random(seed)
        elements = group.sorted_elements()
        maps = []
        for k in range(samples):
            f = rng.choice(elements)
            if k % 2 == 0:
                maps.append(lambda_element(l, (), f, check_legal=False))
            else:
                maps.append(extend(l, l, (), (), f, group, 1, lazy=True)[0])
    for k, g in enumerate(maps):
        conj = ComposedMap(hinv, ComposedMap(g, h))
        for v in conj.internal_vertices():
            hv = h.image(v)
            if not g.is_internal(hv):
                continue
            a, b = local_action(conj, v, lh, lh), local_action(g, hv, l, l)
            if a != b:
                logger.warning(f'Sample {k}: local actions differ at {format_path(v)}')
                return False
    return True


class ThetaData:
    """
    A quotient graph with a spanning tree and the remaining (basis) arcs, a legal labelling l on
    the coordinates of its lift and one group element per basis arc. The values must be the
    local actions of the basis deck transformations under l.
    """
    def __init__(self, quotient: LabelledGraph, tree_arcs: Sequence[str], basis_arcs: Sequence[str],
                 labelling: TreeBall, values: Optional[Sequence[Permutation]], group: PermGroup):
        self.quotient = quotient
        self.tree_arcs = list(tree_arcs)
        self.basis_arcs = list(basis_arcs)
        self.labelling = labelling
        self.group = group
        self._check_basis()
        if lift_graph(labelling) is not quotient:
            raise BasisInvalid('The labelling is not on the lift of the quotient')
        self.tree_vertices = self._lift_tree()
        recomputed = self.recomputed_values()
        self.values = recomputed if values is None else list(values)
        if len(self.values) != len(self.basis_arcs):
            raise BasisInvalid('One value per basis arc is required')
        for name, given, f in zip(self.basis_arcs, self.values, recomputed):
            if given != f:
                raise BasisInvalid(f'Value of basis arc {name} is {given}, the labelling gives {f}')
        self._theta: dict[Vertex, Permutation] = {(): Permutation.identity(quotient.n)}
        self._factor: dict[str, Permutation] = dict()
        for name, f in zip(self.basis_arcs, self.values):
            self._factor[name] = f
            self._factor[quotient.arcs[name].bar] = f.inverse

    @classmethod
    def from_labelling(cls, quotient: LabelledGraph, tree_arcs: Sequence[str], basis_arcs: Sequence[str],
                       labelling: TreeBall, group: PermGroup) -> 'ThetaData':
        return cls(quotient, tree_arcs, basis_arcs, labelling, None, group)

    def _check_basis(self):
        q = self.quotient
        edges = {e.name for e in q.edges()}
        for name in self.tree_arcs + self.basis_arcs:
            if name not in edges:
                raise BasisInvalid(f'{name} is not an edge of the quotient')
        if set(self.tree_arcs) & set(self.basis_arcs):
            raise BasisInvalid('Basis arcs must not be tree arcs')
        if set(self.tree_arcs) | set(self.basis_arcs) != edges:
            raise BasisInvalid('Every edge off the tree must be a basis arc')
        if len(self.tree_arcs) != len(q.vertices) - 1:
            raise BasisInvalid('The tree does not span the quotient')
        spanning = nx.MultiGraph()
        spanning.add_nodes_from(q.vertices)
        spanning.add_edges_from((q.arcs[name].origin, q.arcs[name].terminus, name) for name in self.tree_arcs)
        if not nx.is_tree(spanning):
            cycle = nx.find_cycle(spanning)
            raise BasisInvalid(f'Tree arc {cycle[0][2]} closes a cycle')

    def _lift_tree(self) -> dict[str, Vertex]:
        q = self.quotient
        frame = self.labelling.frame
        tree = set(self.tree_arcs) | {q.arcs[a].bar for a in self.tree_arcs}
        coords = {q.basepoint: ()}
        stack = [q.basepoint]
        while stack:
            v = stack.pop()
            for arc in q.out_arcs(v):
                if arc.name in tree and arc.terminus not in coords:
                    coords[arc.terminus] = frame.step(coords[v], arc.label)
                    stack.append(arc.terminus)
        return coords

    def generator_endpoint(self, name: str) -> Vertex:
        frame = self.labelling.frame
        arc = self.quotient.arcs[name]
        across = frame.step(self.tree_vertices[arc.origin], arc.label)
        return frame.walk(across, frame.path_to_root(self.tree_vertices[arc.terminus]))

    def generator_maps(self, ball: TreeBall = None) -> list[tuple[DeckMap, Permutation]]:
        ball = ball or self.labelling
        return [(DeckMap(ball, self.generator_endpoint(name)), self._factor[name]) for name in self.basis_arcs]

    def recomputed_values(self) -> list[Permutation]:
        l = self.labelling
        out = []
        for name in self.basis_arcs:
            x = self.tree_vertices[self.quotient.arcs[name].terminus]
            gx = l.frame.walk(self.generator_endpoint(name), x)
            out.append(Permutation(tuple(l.label(gx, l.address(x, i)) for i in range(1, l.n + 1))))
        return out

    def theta(self, v: Vertex) -> Permutation:
        """
        theta of the deck element carrying the lifted tree onto the translate containing v.
        """
        got = self._theta.get(v)
        if got is not None:
            return got
        frame = self.labelling.frame
        for k in range(1, len(v) + 1):
            w = v[:k]
            if w in self._theta:
                continue
            arc = self.quotient.arc_at(frame.projection(w[:-1]), w[-1])
            factor = self._factor.get(arc.name)
            self._theta[w] = self._theta[w[:-1]] if factor is None else compose(self._theta[w[:-1]], factor)
        return self._theta[v]

    def tree_vertex(self, v: Vertex) -> Vertex:
        return self.tree_vertices[self.labelling.frame.projection(v)]


class _ThetaLabeller(Labeller):
    def __init__(self, td: ThetaData):
        super().__init__()
        self.td = td

    def compute(self, v):
        t = self.td.theta(v)
        y = self.td.tree_vertex(v)
        return tuple(t(i) for i in self.td.labelling.labels(y))


def theta_relabel(td: ThetaData, radius: int) -> TreeBall:
    """
    l'_{hy} = theta(h) o l_y o h^-1. Before returning, checks that l' is legal, that
    l'(g e) = theta(g) l'(e) for the basis generators, and that l' = (f_x) o l with f_x in F.
    """
    l = td.labelling.with_radius(radius)
    lp = TreeBall(l.frame, radius, _ThetaLabeller(td), name='theta-relabelled')

    report = legal_violations(lp)
    if not report.ok:
        raise VerificationFailed(f'Relabelling is not legal: {report.violations[0].detail}', step='legal')

    for gmap, f in td.generator_maps(lp):
        for v in lp.internal_vertices():
            gv = gmap.image(v)
            for a in range(1, lp.n + 1):
                if lp.label(gv, a) != f(lp.label(v, a)):
                    raise VerificationFailed(f'theta-equivariance fails at {format_path(v)}:{a}', step='equivariance')

    for v, f in relating_family(l, lp, lp.internal_vertices()).items():
        if f not in td.group:
            raise VerificationFailed(f'f at {format_path(v)} = {f} is not in the group', step='family')
    logger.debug(f'theta relabelling verified on the radius-{radius} ball')
    return lp


def find_color_conjugator(l: TreeBall, lp: TreeBall, radius: int) -> FamilyMap:
    """
    g with l' = l o g for legal l, l': every arc labelled i goes to the arc labelled i.
    """
    lb, lpb = l.with_radius(radius), lp.with_radius(radius)
    for ball in (lb, lpb):
        _require_legal(ball, VerificationFailed)
    identity = Permutation.identity(l.n)
    g = FamilyMap(lpb, lb, (), (), identity, lambda a, b: identity if a == b else None, reach=radius)
    for v in lpb.internal_vertices():
        gv = g.image(v)
        for a in range(1, l.n + 1):
            if lb.label(gv, g.arc_image(v, a)) != lpb.label(v, a):
                raise VerificationFailed(f'Colour conjugator fails at {format_path(v)}:{a}', step='conjugator')
    return g


def local_action_group(rose: LabelledGraph, l: TreeBall) -> PermGroup:
    """
    The group generated by the local actions of the petal deck transformations at the internal
    vertices of the ball l (on the coordinates of the lift of the rose).
    """
    if len(rose.vertices) != 1:
        raise ValueError('Petal generators are defined for one-vertex graphs')
    gens = set()
    for e in rose.edges():
        gmap = DeckMap(l, DeckElement.from_labels(rose, [e.label]).endpoint(l))
        for x in gmap.internal_vertices():
            gens.add(local_action(gmap, x, l, l))
    return PermGroup(rose.n, sorted(gens, key=lambda p: p.images))


def twisted_lift(quotient: LabelledGraph, twist: Permutation) -> TreeBall:
    """
    The lift of the quotient pulled back along the extension of twist over the full symmetric
    group: a legal labelling whose deck transformations act with nontrivial local actions.
    """
    base = lift(quotient)
    group = symmetric_group(quotient.n)
    h, _ = extend(base, base, (), (), twist, group, 1, lazy=True)
    return base.pullback(h)


TOY_TREE = ('e1',)
TOY_BASIS = ('e2', 'e3', 'e4')


def toy_twist(seed: int = None) -> Permutation:
    seed = settings.SEED if seed is None else seed
    return random.Random(seed).choice(symmetric_group(4).sorted_elements())


def toy_theta_data(seed: int = None) -> ThetaData:
    """
    The legal two-vertex quotient with n=4, tree {e1}, basis e2, e3, e4 and a seeded twist.
    """
    quotient = build_two_vertex_quotient(OrbitStructure.discrete(4))
    group = symmetric_group(4)
    twist = toy_twist(seed)
    return ThetaData.from_labelling(quotient, TOY_TREE, TOY_BASIS, twisted_lift(quotient, twist), group)
