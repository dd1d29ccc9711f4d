"""
Trees with fins: subdivided arcs plus one fin of n paths per internal vertex and group element.
"""
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from arborlat.ballmap import BallMap
from arborlat.exceptions import FinCeiling, DiagramFailure, FormatError, NotLegal
from arborlat.labelled import TreeBall, Vertex, validate_labelling
from arborlat.permkernel import Permutation, PermGroup, compose
from arborlat.settings import settings
from arborlat.universal import enumerate_ball_stabilizer
from arborlat.utils import logger, format_path

ComplexVertex = tuple


@dataclass(frozen=True)
class Fin:
    x: Vertex
    f: Permutation
    # attachments[i-1] is the address at x of the arc carrying path i
    attachments: tuple[int, ...]


class FinComplexBall:
    def __init__(self, l: TreeBall, group: PermGroup, fins: Mapping[tuple[Vertex, Permutation], Fin]):
        self.l = l
        self.group = group
        self.fins = dict(fins)
        self.n = l.n

    @property
    def radius(self) -> int:
        return self.l.radius

    def tree_vertices(self) -> list[Vertex]:
        return self.l.vertices()

    def geometric_edges(self) -> list[tuple[Vertex, Vertex]]:
        """
        (parent, child) for every edge of the base ball.
        """
        return [(v[:-1], v) for v in self.tree_vertices() if v]

    def fins_at(self, x: Vertex) -> list[Fin]:
        return sorted((fin for (y, _), fin in self.fins.items() if y == x), key=lambda fin: fin.f.images)

    @property
    def chain_count(self) -> int:
        return len(self.geometric_edges())

    @property
    def fin_count(self) -> int:
        return len(self.fins)

    def unit_edge_count(self) -> int:
        return self.chain_count * self.n + self.fin_count * self.n * (self.n + 1) // 2

    def chain_edge(self, x: Vertex, a: int, k: int) -> tuple:
        """
        The k-th unit edge, counted from x, of the chain of arc (x, a).
        """
        w = self.l.step(x, a)
        if len(w) > len(x):
            return 'chain', x, w, k
        return 'chain', w, x, self.n + 1 - k

    def edges(self) -> Iterator[tuple]:
        for p, c in self.geometric_edges():
            for k in range(1, self.n + 1):
                yield 'chain', p, c, k
        for (x, f), fin in sorted(self.fins.items(), key=lambda t: (t[0][0], t[0][1].images)):
            for i in range(1, self.n + 1):
                for k in range(1, i + 1):
                    yield 'fin', x, f, i, k

    @staticmethod
    def _rung(x: Vertex, f: Permutation, i: int, j: int) -> tuple:
        # all paths of a fin start at its base vertex y, which has a single rung
        return ('rung', x, f, 0, 0) if j == 0 else ('rung', x, f, i, j)

    def squares(self) -> Iterator[tuple[tuple, frozenset]]:
        """
        Every square with its four edges: the fin edge, the glued chain edge and two rungs.
        """
        for (x, f), fin in self.fins.items():
            for i in range(1, self.n + 1):
                a = fin.attachments[i - 1]
                for k in range(1, i + 1):
                    edges = frozenset([('fin', x, f, i, k), self.chain_edge(x, a, k),
                                       self._rung(x, f, i, k - 1), self._rung(x, f, i, k)])
                    yield (x, f, i, k), edges

    def vertices(self) -> Iterator[ComplexVertex]:
        for v in self.tree_vertices():
            yield 't', v
        for p, c in self.geometric_edges():
            for j in range(1, self.n):
                yield 'c', p, c, j
        for (x, f) in self.fins:
            yield 'y', x, f
            for i in range(1, self.n + 1):
                for j in range(1, i + 1):
                    yield 'p', x, f, i, j

    def distance(self, v: ComplexVertex) -> int:
        """
        Edge-path distance from the root in the 1-skeleton. A path vertex is one rung away from
        the chain vertex it is glued to.
        """
        n = self.n
        kind = v[0]
        if kind == 't':
            return n * len(v[1])
        if kind == 'c':
            return n * len(v[1]) + v[3]
        if kind == 'y':
            return n * len(v[1]) + 1
        _, x, f, i, j = v
        a = self.fins[(x, f)].attachments[i - 1]
        w = self.l.step(x, a)
        along = n * len(x) + j if len(w) > len(x) else n * len(x) - j
        return along + 1


def _check_attachments(l: TreeBall, fin: Fin):
    derived = tuple(l.label(fin.x, a) for a in fin.attachments)
    if derived != fin.f.images:
        raise DiagramFailure(f'Fin {fin.f} at {format_path(fin.x)} reads back as {Permutation(derived)}')


def build_fins(l: TreeBall, group: PermGroup, radius: int) -> FinComplexBall:
    if group.order > settings.FIN_CEILING:
        raise FinCeiling(f'|F| = {group.order} fins per vertex exceed the ceiling of {settings.FIN_CEILING}')
    if group.degree != l.n:
        raise FormatError(f'Group of degree {group.degree} on a tree of degree {l.n}')
    ball = l.with_radius(radius)
    if ball.os is not None:
        report = validate_labelling(ball, ball.os)
        if not report.ok:
            raise NotLegal(f'Labelling is not tau-legal: {report.violations[0].render()}')
    ball.materialize()

    fins = dict()
    for x in ball.internal_vertices():
        for f in group.sorted_elements():
            fin = Fin(x, f, tuple(ball.address(x, f(i)) for i in range(1, l.n + 1)))
            _check_attachments(ball, fin)
            fins[(x, f)] = fin
    fc = FinComplexBall(ball, group, fins)
    logger.debug(f'Built {fc.fin_count} fins and {fc.chain_count} chains on {ball!r}')
    return fc


def check_square_links(fc: FinComplexBall) -> bool:
    """
    No two squares share two edges, so vertex links have no double edges.
    """
    by_edge: dict[tuple, list] = dict()
    for key, edges in fc.squares():
        for e in edges:
            by_edge.setdefault(e, []).append(key)
    shared = Counter()
    for keys in by_edge.values():
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                pair = (keys[i], keys[j]) if keys[i] < keys[j] else (keys[j], keys[i])
                shared[pair] += 1
    bad = [pair for pair, count in shared.items() if count > 1]
    if bad:
        logger.warning(f'Squares {bad[0][0]} and {bad[0][1]} share {shared[bad[0]]} edges')
    return not bad


class FinMap:
    """
    The extension of a base map g with family (f_x) to the fins: Y(x, f) goes to Y(gx, f_x f).
    """
    def __init__(self, base: BallMap, family: Mapping[Vertex, Permutation],
                 assignment: Mapping[tuple[Vertex, Permutation], tuple[Vertex, Permutation]], n: int):
        self.base = base
        self.family = family
        self.assignment = dict(assignment)
        self.n = n

    def fin_image(self, x: Vertex, f: Permutation) -> tuple[Vertex, Permutation]:
        return self.assignment[(x, f)]

    def vertex_image(self, v: ComplexVertex) -> Optional[ComplexVertex]:
        g = self.base
        kind = v[0]
        if kind == 't':
            gv = g.image(v[1])
            return None if gv is None else ('t', gv)
        if kind == 'c':
            _, p, c, j = v
            gp, gc = g.image(p), g.image(c)
            if gp is None or gc is None:
                return None
            return ('c', gp, gc, j) if len(gc) > len(gp) else ('c', gc, gp, self.n - j)
        target = self.assignment.get((v[1], v[2]))
        if target is None:
            return None
        return (kind,) + target + tuple(v[3:])

    def key(self) -> tuple:
        return tuple(sorted(((x, f.images), (y, h.images)) for (x, f), (y, h) in self.assignment.items()))


def extend_to_fins(fc_dom: FinComplexBall, fc_cod: FinComplexBall, g: BallMap,
                   family: Mapping[Vertex, Permutation]) -> FinMap:
    """
    Carry every fin at a vertex of the family to its image fin and check, square by square,
    that the glued chain edge of the image is the image of the glued chain edge.
    """
    assignment = dict()
    for (x, f), fin in fc_dom.fins.items():
        fx = family.get(x)
        if fx is None:
            continue
        gx = g.image(x)
        target = fc_cod.fins.get((gx, compose(fx, f)))
        if target is None:
            raise DiagramFailure(f'No fin {compose(fx, f)} at {format_path(gx)} in the target complex')
        for i in range(1, fc_dom.n + 1):
            a = g.arc_image(x, fin.attachments[i - 1])
            if a != target.attachments[i - 1]:
                raise DiagramFailure(f'Path {i} of fin {f} at {format_path(x)} is glued to arc {a}, '
                                     f'its image fin to arc {target.attachments[i - 1]}')
        assignment[(x, f)] = (gx, target.f)

    for x in {x for x, _ in assignment}:
        images = [assignment[(x, f)] for f in fc_dom.group.sorted_elements() if (x, f) in assignment]
        if len(set(images)) != len(images):
            raise DiagramFailure(f'Fin assignment at {format_path(x)} is not injective')
    return FinMap(g, family, assignment, fc_dom.n)


def fin_rigidity_check(fc: FinComplexBall, x: Vertex) -> bool:
    """
    A map fixing x and every chain at x fixes every fin at x: the attachment arcs of a fin
    determine its group element.
    """
    if not fc.l.is_internal(x):
        raise ValueError(f'{format_path(x)} carries no fins')
    seen = dict()
    for fin in fc.fins_at(x):
        derived = Permutation(tuple(fc.l.label(x, a) for a in fin.attachments))
        if derived != fin.f:
            logger.warning(f'Fin {fin.f} at {format_path(x)} reads back as {derived}')
            return False
        if fin.attachments in seen:
            logger.warning(f'Fins {seen[fin.attachments]} and {fin.f} share their attachments')
            return False
        seen[fin.attachments] = fin.f
    return True


def fins_correspondence_count(l: TreeBall, group: PermGroup, radius: int) -> tuple[int, int]:
    """
    Ball stabilizer members of U(F) against the distinct fin maps extending them.
    """
    fc = build_fins(l, group, radius)
    members = enumerate_ball_stabilizer(fc.l, (), group, radius)
    keys = set()
    for g in members:
        keys.add(extend_to_fins(fc, fc, g, g.family).key())
    logger.debug(f'{len(members)} stabilizer elements, {len(keys)} fin maps')
    return len(members), len(keys)


def fixed_radius_contraction(fc: FinComplexBall, finmap: FinMap) -> bool:
    """
    For k = 1..radius: if the fin map fixes the nk-ball of the complex then its base map fixes
    the k-ball of the tree, and if the base map fixes the k-ball then the fin map fixes the
    (k-1)n-ball. Checked on the materialized region.
    """
    n = fc.n
    vertices = list(fc.vertices())
    distance = {v: fc.distance(v) for v in vertices}
    moved = [v for v in vertices if finmap.vertex_image(v) != v]
    for k in range(1, fc.radius + 1):
        tree_fixed = all(finmap.base.image(v) == v for v in fc.l.vertices(k))
        complex_fixed = all(distance[v] > n * k for v in moved)
        if complex_fixed and not tree_fixed:
            logger.warning(f'Fin map fixes the {n * k}-ball but moves the tree {k}-ball')
            return False
        if tree_fixed and not all(distance[v] > (k - 1) * n for v in moved):
            logger.warning(f'Base map fixes the {k}-ball but the fin map moves the {(k - 1) * n}-ball')
            return False
    return True
