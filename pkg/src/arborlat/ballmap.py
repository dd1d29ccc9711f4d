from abc import ABC, abstractmethod
from typing import Callable, Mapping, Optional

from arborlat.exceptions import NoCandidate, FormatError
from arborlat.labelled import TreeBall, Vertex
from arborlat.permkernel import Permutation
from arborlat.utils import format_path


class BallMap(ABC):
    """
    A partial tree isomorphism from the coordinates of dom to the coordinates of cod. image()
    returns None outside the domain. Labellings used to read local actions must share the
    frames of dom and cod.
    """
    def __init__(self, dom: TreeBall, cod: TreeBall):
        self.dom = dom
        self.cod = cod

    @abstractmethod
    def image(self, v: Vertex) -> Optional[Vertex]:
        pass

    @abstractmethod
    def inverse(self) -> 'BallMap':
        pass

    def __call__(self, v: Vertex) -> Optional[Vertex]:
        return self.image(v)

    def arc_image(self, v: Vertex, a: int) -> Optional[int]:
        """
        The address at g(v) of the image of arc (v, a).
        """
        gv = self.image(v)
        if gv is None:
            return None
        gw = self.image(self.dom.step(v, a))
        if gw is None:
            return None
        return self.cod.frame.toward(gv, gw)

    def in_domain(self, v: Vertex) -> bool:
        return self.dom.contains(v) and self.image(v) is not None

    def is_internal(self, v: Vertex) -> bool:
        if not self.dom.is_internal(v):
            return False
        gv = self.image(v)
        if gv is None or not self.cod.is_internal(gv):
            return False
        return all(self.image(self.dom.step(v, a)) is not None for a in range(1, self.dom.n + 1))

    def domain_vertices(self, depth: int = None) -> list[Vertex]:
        return [v for v in self.dom.vertices(depth) if self.image(v) is not None]

    def internal_vertices(self) -> list[Vertex]:
        if self.dom.radius is None:
            raise ValueError('Internal vertices need a bounded domain ball')
        if self.dom.radius == 0:
            return []
        return [v for v in self.dom.vertices(self.dom.radius - 1) if self.is_internal(v)]

    def compose(self, inner: 'BallMap') -> 'ComposedMap':
        return ComposedMap(self, inner)

    def agrees_with(self, other: 'BallMap', vertices) -> bool:
        return all(self.image(v) == other.image(v) for v in vertices)


class IdentityMap(BallMap):
    def __init__(self, ball: TreeBall):
        super().__init__(ball, ball)

    def image(self, v):
        return v if self.dom.contains(v) else None

    def inverse(self):
        return self


class ExplicitMap(BallMap):
    """
    A map stored as a vertex dictionary, optionally with the family it was built from.
    """
    def __init__(self, dom: TreeBall, cod: TreeBall, mapping: Mapping[Vertex, Vertex],
                 family: Mapping[Vertex, Permutation] = None):
        super().__init__(dom, cod)
        self.mapping = dict(mapping)
        self.family = dict(family) if family is not None else None

    def image(self, v):
        return self.mapping.get(v)

    def inverse(self):
        family = None
        if self.family is not None:
            family = {self.mapping[x]: f.inverse for x, f in self.family.items()}
        return ExplicitMap(self.cod, self.dom, {w: v for v, w in self.mapping.items()}, family)

    def check_automorphism(self):
        """
        Injective, and adjacent vertices go to adjacent vertices.
        """
        if len(set(self.mapping.values())) != len(self.mapping):
            raise FormatError('Vertex map is not injective')
        for v, gv in self.mapping.items():
            if not v:
                continue
            parent = v[:-1]
            gp = self.mapping.get(parent)
            if gp is None:
                continue
            if self.cod.frame.distance(gv, gp) != 1:
                raise FormatError(f'Edge {format_path(parent)}-{format_path(v)} is not mapped to an edge')


class FamilyMap(BallMap):
    """
    The map grown outward from x0 -> x0p: at every vertex u the arc with dom label i goes to the
    arc with cod label f_u(i). f_x0 = f0; elsewhere f_u = choose(a, b) where a is the dom label
    of the arc from u toward x0 and b the cod label of its image. Vertices are computed on
    demand along geodesics from x0; reach bounds the distance from x0 (None: unbounded).
    """
    def __init__(self, dom: TreeBall, cod: TreeBall, x0: Vertex, x0p: Vertex, f0: Permutation,
                 choose: Callable[[int, int], Optional[Permutation]], reach: Optional[int] = None):
        super().__init__(dom, cod)
        self.x0 = x0
        self.x0p = x0p
        self.f0 = f0
        self.choose = choose
        self.reach = reach
        self._images: dict[Vertex, Vertex] = {x0: x0p}
        self._family: dict[Vertex, Permutation] = {x0: f0}

    def f(self, u: Vertex) -> Permutation:
        got = self._family.get(u)
        if got is not None:
            return got
        frame = self.dom.frame
        path = frame.geodesic(self.x0, u)
        for k in range(1, len(path)):
            w = path[k]
            if w in self._family:
                continue
            p = path[k - 1]
            gw = self.image(w)
            if gw is None:
                raise ValueError(f'{format_path(w)} is beyond the reach of the map')
            gp = self._images[p]
            a = self.dom.label(w, frame.toward(w, p))
            b = self.cod.label(gw, self.cod.frame.toward(gw, gp))
            f = self.choose(a, b)
            if f is None or f(a) != b:
                raise NoCandidate(f'No admissible local permutation at {format_path(w)} sending {a} to {b}')
            self._family[w] = f
        return self._family[u]

    def image(self, v: Vertex) -> Optional[Vertex]:
        got = self._images.get(v)
        if got is not None:
            return got
        frame = self.dom.frame
        if self.reach is not None and frame.distance(self.x0, v) > self.reach:
            return None
        path = frame.geodesic(self.x0, v)
        for k in range(1, len(path)):
            w = path[k]
            if w in self._images:
                continue
            p = path[k - 1]
            gp = self._images[p]
            i = self.dom.label(p, frame.toward(p, w))
            self._images[w] = self.cod.frame.step(gp, self.cod.address(gp, self.f(p)(i)))
        return self._images[v]

    def family(self) -> dict[Vertex, Permutation]:
        """
        f_u for every u at distance less than reach from x0.
        """
        if self.reach is None:
            raise ValueError('An unbounded map has no finite family')
        if self.reach == 0:
            return dict()
        return {u: self.f(u) for u in self.dom.frame.ball_vertices(self.x0, self.reach - 1)}

    def inverse(self) -> 'BallMap':
        return _InverseFamilyMap(self)


class _InverseFamilyMap(BallMap):
    def __init__(self, g: FamilyMap):
        super().__init__(g.cod, g.dom)
        self.g = g
        self._images: dict[Vertex, Vertex] = {g.x0p: g.x0}

    def image(self, w: Vertex) -> Optional[Vertex]:
        got = self._images.get(w)
        if got is not None:
            return got
        g = self.g
        frame = g.cod.frame
        if g.reach is not None and frame.distance(g.x0p, w) > g.reach:
            return None
        path = frame.geodesic(g.x0p, w)
        for k in range(1, len(path)):
            wk = path[k]
            if wk in self._images:
                continue
            p = path[k - 1]
            u = self._images[p]
            j = g.cod.label(p, frame.toward(p, wk))
            i = g.f(u).inverse(j)
            self._images[wk] = g.dom.frame.step(u, g.dom.address(u, i))
        return self._images[w]

    def inverse(self) -> BallMap:
        return self.g


class DeckMap(BallMap):
    """
    A covering transformation of a lift, determined by the image of the root: v goes to the end
    of the walk along v's addresses started at that image. With a radius, both v and its image
    must lie within it.
    """
    def __init__(self, ball: TreeBall, endpoint: Vertex, radius: Optional[int] = None):
        super().__init__(ball, ball)
        self.endpoint = endpoint
        self.radius = radius

    def image(self, v):
        if self.radius is not None and len(v) > self.radius:
            return None
        w = self.dom.frame.walk(self.endpoint, v)
        if self.radius is not None and len(w) > self.radius:
            return None
        return w

    def inverse(self):
        frame = self.dom.frame
        return DeckMap(self.dom, frame.walk((), frame.path_to_root(self.endpoint)), self.radius)


class ComposedMap(BallMap):
    """
    outer o inner, defined where both are.
    """
    def __init__(self, outer: BallMap, inner: BallMap):
        if inner.cod.frame is not outer.dom.frame:
            raise ValueError('Maps do not share coordinates')
        super().__init__(inner.dom, outer.cod)
        self.outer = outer
        self.inner = inner

    def image(self, v):
        w = self.inner.image(v)
        if w is None:
            return None
        return self.outer.image(w)

    def inverse(self):
        return ComposedMap(self.inner.inverse(), self.outer.inverse())


class RestrictedMap(BallMap):
    """
    A map cut down to a ball: v and its image must both lie within it.
    """
    def __init__(self, inner: BallMap, ball: TreeBall):
        if inner.dom.frame is not ball.frame or inner.cod.frame is not ball.frame:
            raise ValueError('Maps do not share coordinates')
        super().__init__(ball, ball)
        self.inner = inner

    def image(self, v):
        if not self.dom.contains(v):
            return None
        w = self.inner.image(v)
        return w if w is not None and self.cod.contains(w) else None

    def inverse(self):
        return RestrictedMap(self.inner.inverse(), self.dom)
