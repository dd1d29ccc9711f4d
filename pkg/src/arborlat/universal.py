from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional

from arborlat.ballmap import BallMap, FamilyMap, ExplicitMap, ComposedMap
from arborlat.exceptions import VertexNotInternal, NotInF, DegreeMismatch, CapExceeded, NoCandidate, \
    VerificationFailed
from arborlat.labelled import TreeBall, Vertex, OrbitStructure, random_tau_legal
from arborlat.permkernel import Permutation, PermGroup
from arborlat.settings import settings
from arborlat.utils import logger, format_path


@dataclass(frozen=True)
class LocalActionWitness:
    vertex: Vertex
    permutation: Permutation

    def __str__(self):
        return f'{format_path(self.vertex)} {self.permutation}'


class EquivariantFamily:
    """
    An assignment x -> f_x. With a group attached every value is checked for membership.
    """
    def __init__(self, assignments: Mapping[Vertex, Permutation], group: PermGroup = None):
        self.assignments = dict(assignments)
        self.group = group
        if group is not None:
            for v, f in self.assignments.items():
                if f not in group:
                    raise NotInF(f'f at {format_path(v)} = {f} is not in the group')

    def __getitem__(self, v: Vertex) -> Permutation:
        return self.assignments[v]

    def get(self, v: Vertex, default=None) -> Optional[Permutation]:
        return self.assignments.get(v, default)

    def __contains__(self, v: Vertex) -> bool:
        return v in self.assignments

    def __len__(self):
        return len(self.assignments)

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.assignments)

    def items(self):
        return self.assignments.items()

    def transported(self, g: BallMap) -> 'EquivariantFamily':
        """
        The family of g's inverse: g(x) -> f_x^-1.
        """
        return EquivariantFamily({g.image(x): f.inverse for x, f in self.assignments.items()}, self.group)


def _same_frame(labelling: TreeBall, ball: TreeBall, side: str):
    if labelling.frame is not ball.frame:
        raise ValueError(f'The {side} labelling does not share coordinates with the map')


def local_action(g: BallMap, x: Vertex, l_dom: TreeBall, l_cod: TreeBall) -> Permutation:
    """
    i -> label under l_cod of the image of the arc at x labelled i under l_dom.
    """
    _same_frame(l_dom, g.dom, 'domain')
    _same_frame(l_cod, g.cod, 'codomain')
    if not g.is_internal(x):
        raise VertexNotInternal(f'Vertex {format_path(x)} is not internal for the map')
    gx = g.image(x)
    images = []
    for i in range(1, l_dom.n + 1):
        b = g.arc_image(x, l_dom.address(x, i))
        images.append(l_cod.label(gx, b))
    return Permutation(tuple(images))


def is_member(g: BallMap, group: PermGroup, l_dom: TreeBall,
              l_cod: TreeBall) -> tuple[bool, Optional[LocalActionWitness]]:
    """
    True when the local action at every internal vertex lies in the group; otherwise the first
    offending vertex in breadth-first order.
    """
    for x in g.internal_vertices():
        p = local_action(g, x, l_dom, l_cod)
        if p not in group:
            logger.debug(f'Local action {p} at {format_path(x)} is not in the group')
            return False, LocalActionWitness(x, p)
    return True, None


def relating_family(l: TreeBall, l2: TreeBall, vertices: Iterable[Vertex]) -> dict[Vertex, Permutation]:
    """
    For labellings on the same coordinates, the f_x with l2 = (f_x) o l at the given vertices.
    """
    if l.frame is not l2.frame:
        raise ValueError('Labellings do not share coordinates')
    return {v: Permutation(tuple(l2.label(v, l.address(v, i)) for i in range(1, l.n + 1))) for v in vertices}


def extend(l_dom: TreeBall, l_cod: TreeBall, x0: Vertex, x0p: Vertex, f0: Permutation, group: PermGroup,
           radius: int, lazy: bool = False) -> tuple[FamilyMap, EquivariantFamily]:
    """
    Grow g with g(x0) = x0p and f_x0 = f0 so that l_cod o g = (f_x) o l_dom. At each later vertex
    f_x is the least group element sending the label of the arc toward x0 to the label of its
    image. g is defined on the radius-ball about x0 (everywhere when lazy) and the returned
    family covers the vertices whose whole star lies in that ball.
    """
    if l_dom.n != l_cod.n:
        raise DegreeMismatch(f'Labellings have degrees {l_dom.n} and {l_cod.n}')
    if radius < 1:
        raise ValueError('extend needs radius >= 1')
    if f0 not in group:
        raise NotInF(f'f0 = {f0} is not in the group')
    g = FamilyMap(l_dom, l_cod, x0, x0p, f0, group.least_mapping, reach=None if lazy else radius)
    family = {u: g.f(u) for u in l_dom.frame.ball_vertices(x0, radius - 1)}
    logger.debug(f'Extended {format_path(x0)} -> {format_path(x0p)} over {len(family)} vertices')
    return g, EquivariantFamily(family, group)


def check_family(g: BallMap, fam: EquivariantFamily, l_dom: TreeBall, l_cod: TreeBall) -> bool:
    """
    l_cod(g e) = f_x(l_dom(e)) for every arc e leaving a vertex x of the family.
    """
    for x, f in fam.items():
        gx = g.image(x)
        if gx is None:
            return False
        for a in range(1, l_dom.n + 1):
            b = g.arc_image(x, a)
            if b is None or l_cod.label(gx, b) != f(l_dom.label(x, a)):
                logger.debug(f'Family check fails at arc {format_path(x)}:{a}')
                return False
    return True


def local_action_family(g: BallMap, l_dom: TreeBall, l_cod: TreeBall) -> EquivariantFamily:
    """
    Recover (f_x) from a map: f_x is its local action at each internal vertex.
    """
    return EquivariantFamily({x: local_action(g, x, l_dom, l_cod) for x in g.internal_vertices()})


def sigma_surjectivity_check(l: TreeBall, x: Vertex, group: PermGroup) -> bool:
    """
    Every element f of the group is the local action at x of an extension fixing x that also
    picks a local permutation at each neighbour of x.
    """
    if l.radius is not None and l.radius - len(x) < 2:
        raise ValueError(f'The check needs the radius-2 ball around {format_path(x)}')
    for f in group:
        try:
            g, _ = extend(l, l, x, x, f, group, 2)
        except NoCandidate as ex:
            logger.warning(f'No extension with f0 = {f}: {ex.msg}')
            return False
        if local_action(g, x, l, l) != f:
            logger.warning(f'Extension with f0 = {f} has a different local action at {format_path(x)}')
            return False
    return True


def transitivity_move(l: TreeBall, x0: Vertex, x0p: Vertex, group: PermGroup, radius: int,
                      lazy: bool = False) -> FamilyMap:
    g, _ = extend(l, l, x0, x0p, Permutation.identity(l.n), group, radius, lazy=lazy)
    return g


def predicted_stabilizer_count(l: TreeBall, x: Vertex, group: PermGroup, radius: int) -> int:
    frame = l.frame
    count = group.order
    for v in frame.ball_vertices(x, radius - 1):
        if v == x:
            continue
        toward = frame.geodesic(v, x)[1]
        count *= group.stabilizer_order(l.label(v, frame.toward(v, toward)))
    return count


def enumerate_ball_stabilizer(l: TreeBall, x: Vertex, group: PermGroup, radius: int,
                              cap: int = None) -> list[ExplicitMap]:
    """
    All automorphisms of the radius-ball about x fixing x whose local actions lie in the group.
    The count is predicted first and the enumeration refused above the cap.
    """
    cap = cap or settings.CAP_STABILIZER
    predicted = predicted_stabilizer_count(l, x, group, radius)
    if predicted > cap:
        raise CapExceeded(f'Stabilizer has {predicted} elements, above the cap of {cap}', predicted=predicted)

    frame = l.frame
    order = frame.ball_vertices(x, radius - 1)
    toward = {v: frame.geodesic(v, x)[1] for v in order if v != x}
    results = []

    def assign(images: dict, v: Vertex, f: Permutation):
        gv = images[v]
        for a in range(1, l.n + 1):
            w = frame.step(v, a)
            if w not in images:
                images[w] = frame.step(gv, l.address(gv, f(l.label(v, a))))

    def recurse(k: int, images: dict, family: dict):
        if k == len(order):
            results.append(ExplicitMap(l, l, images, family))
            return
        v = order[k]
        if k == 0:
            choices = group.sorted_elements()
        else:
            p = toward[v]
            a = l.label(v, frame.toward(v, p))
            b = l.label(images[v], frame.toward(images[v], images[p]))
            choices = group.mapping_coset(a, b)
        for f in choices:
            nxt = dict(images)
            assign(nxt, v, f)
            recurse(k + 1, nxt, {**family, v: f})

    recurse(0, {x: x}, dict())
    logger.debug(f'Enumerated {len(results)} stabilizer elements (predicted {predicted})')
    return results


def conjugating_pair(l: TreeBall, l2: TreeBall, group: PermGroup, radius: int) -> tuple[FamilyMap, EquivariantFamily]:
    """
    g with l2 o g = (f_x) o l. Conjugation by g carries U(l2) onto U(l).
    """
    return extend(l, l2, (), (), Permutation.identity(l.n), group, radius, lazy=True)


def pulls_back_members(g: BallMap, members: Iterable[BallMap], group: PermGroup, l: TreeBall) -> bool:
    """
    For members h of U(l2), g^-1 h g is a member of U(l) wherever it is defined.
    """
    inverse = g.inverse()
    for h in members:
        conj = ComposedMap(inverse, ComposedMap(h, g))
        ok, witness = is_member(conj, group, l, l)
        if not ok:
            logger.debug(f'Conjugate fails membership at {witness}')
            return False
    return True


def breached_ball(os: OrbitStructure, radius: int = 2, seed: int = None) -> tuple[TreeBall, TreeBall]:
    """
    A random tau-legal ball and a copy with two labels swapped at the neighbour /1 of the root so
    that the arc back to the root leaves its partner block.
    """
    good = random_tau_legal(os, radius, seed)
    y = (1,)
    back = good.frame.back(y)
    partner = os.partner_block(good.label((), 1))
    outside = [lab for lab in range(1, os.n + 1) if lab not in partner]
    if not outside:
        raise ValueError('Every label lies in the partner block, nothing to break')
    wrong = outside[0]
    back_label = good.label(y, back)
    return good, good.with_labels({(y, back): wrong, (y, good.address(y, wrong)): back_label})


def single_edge_breach_demo(os: OrbitStructure, group: PermGroup, radius: int = 2, seed: int = None) -> NoCandidate:
    """
    Extending from a breached ball onto the intact one must fail at the neighbour where the
    labels were swapped; the raised NoCandidate is returned.
    """
    if sorted(map(frozenset, group.orbits()), key=min) != sorted(os.blocks.values(), key=min):
        raise ValueError('The group orbits must be the blocks of the orbit structure')
    good, bad = breached_ball(os, radius, seed)
    try:
        extend(bad, good, (), (), Permutation.identity(os.n), group, radius)
    except NoCandidate as ex:
        return ex
    raise VerificationFailed('A broken tau condition went unnoticed by extend', step='breach')
