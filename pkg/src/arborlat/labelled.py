import random
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from arborlat.enums import ViolationKind
from arborlat.exceptions import FormatError, NotUnimodular, VertexNotMaterialized, CapExceeded, DegreeMismatch
from arborlat.permkernel import Permutation, PermGroup
from arborlat.schemas import ValidationReport
from arborlat.settings import settings
from arborlat.utils import logger, format_path

Vertex = tuple[int, ...]


@dataclass(frozen=True)
class OrbitStructure:
    """
    A partition of {1..n} into blocks with an involution tau on the block ids.
    """
    n: int
    blocks: dict[str, frozenset[int]]
    tau: dict[str, str]
    _block_of: dict[int, str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = {str(k): frozenset(v) for k, v in self.blocks.items()}
        tau = {str(k): str(v) for k, v in self.tau.items()}
        block_of = dict()
        for bid, labels in blocks.items():
            if not labels:
                raise FormatError(f'Block {bid} is empty')
            for label in labels:
                if not 1 <= label <= self.n:
                    raise FormatError(f'Label {label} of block {bid} is outside 1..{self.n}')
                if label in block_of:
                    raise FormatError(f'Label {label} lies in blocks {block_of[label]} and {bid}')
                block_of[label] = bid
        if len(block_of) != self.n:
            raise FormatError(f'Blocks do not cover 1..{self.n}')
        for bid in blocks:
            if bid not in tau:
                tau[bid] = bid
        for i, j in tau.items():
            if i not in blocks or j not in blocks:
                raise FormatError(f'tau refers to unknown block {i if i not in blocks else j}')
            if tau[j] != i:
                raise FormatError(f'tau is not an involution at block {i}')
        object.__setattr__(self, 'blocks', blocks)
        object.__setattr__(self, 'tau', tau)
        object.__setattr__(self, '_block_of', block_of)

    @classmethod
    def from_group(cls, group: PermGroup, tau: Union[Mapping, Iterable] = ()) -> 'OrbitStructure':
        """
        Blocks are the orbits of the group, numbered 1, 2, ... by their least label.
        """
        blocks = {str(i): orbit for i, orbit in enumerate(group.orbits(), start=1)}
        pairs = tau.items() if isinstance(tau, Mapping) else tau
        mapping = dict()
        for i, j in pairs:
            mapping[str(i)] = str(j)
            mapping[str(j)] = str(i)
        return cls(group.degree, blocks, mapping)

    @classmethod
    def discrete(cls, n: int) -> 'OrbitStructure':
        """
        Singleton blocks with trivial tau: the labellings legal for it have l(e) = l(ebar).
        """
        return cls(n, {str(i): frozenset([i]) for i in range(1, n + 1)}, dict())

    def block_ids(self) -> list[str]:
        return sorted(self.blocks, key=lambda b: min(self.blocks[b]))

    def block_of(self, label: int) -> str:
        return self._block_of[label]

    def partner_block(self, label: int) -> frozenset[int]:
        return self.blocks[self.tau[self._block_of[label]]]

    @property
    def unimodular(self) -> bool:
        return all(len(self.blocks[i]) == len(self.blocks[j]) for i, j in self.tau.items())

    def tau_compatible(self, label: int, back: int) -> bool:
        return back in self.partner_block(label)


@dataclass(frozen=True)
class Arc:
    name: str
    origin: str
    terminus: str
    label: int
    bar: str


class LabelledGraph:
    """
    Finite graph with an arc involution and arc labels in {1..n}. Every edge is declared once
    with both labels; the reverse arc is named '~' + name.
    """
    def __init__(self, n: int, name: str = None):
        self.n = n
        self.name = name
        self.vertices: list[str] = []
        self.arcs: dict[str, Arc] = dict()
        self._out: dict[str, list[str]] = dict()
        self._by_label: dict[str, dict[int, str]] = dict()

    def add_vertex(self, name: str):
        if name in self._out:
            raise FormatError(f'Duplicate vertex {name}')
        self.vertices.append(name)
        self._out[name] = []
        self._by_label[name] = dict()

    def _add_arc(self, arc: Arc):
        if arc.name in self.arcs:
            raise FormatError(f'Duplicate arc {arc.name}')
        if arc.origin not in self._out or arc.terminus not in self._out:
            raise FormatError(f'Arc {arc.name} refers to an unknown vertex')
        self.arcs[arc.name] = arc
        self._out[arc.origin].append(arc.name)
        self._by_label[arc.origin].setdefault(arc.label, arc.name)

    def add_edge(self, name: str, src: str, dst: str, fwd: int, bwd: int):
        bar = '~' + name
        self._add_arc(Arc(name, src, dst, fwd, bar))
        self._add_arc(Arc(bar, dst, src, bwd, name))

    @property
    def basepoint(self) -> str:
        return self.vertices[0]

    def out_arcs(self, v: str) -> list[Arc]:
        return [self.arcs[a] for a in self._out[v]]

    def arc_at(self, v: str, label: int) -> Optional[Arc]:
        name = self._by_label[v].get(label)
        return self.arcs[name] if name else None

    def bar(self, arc: Arc) -> Arc:
        return self.arcs[arc.bar]

    def edges(self) -> list[Arc]:
        return [a for a in self.arcs.values() if not a.name.startswith('~')]

    def with_label(self, arc_name: str, label: int) -> 'LabelledGraph':
        """
        A copy with one arc label overwritten.
        """
        out = LabelledGraph(self.n, self.name)
        for v in self.vertices:
            out.add_vertex(v)
        for e in self.edges():
            bar = self.bar(e)
            fwd = label if e.name == arc_name else e.label
            bwd = label if bar.name == arc_name else bar.label
            out.add_edge(e.name, e.origin, e.terminus, fwd, bwd)
        return out


class Labeller(ABC):
    """
    Per-vertex labels of a tree frame: labels(v)[a-1] is the label of the arc at v with
    address a. Results are cached.
    """
    def __init__(self):
        self._cache: dict[Vertex, tuple[int, ...]] = dict()
        self._inverse: dict[Vertex, dict[int, int]] = dict()

    @abstractmethod
    def compute(self, v: Vertex) -> tuple[int, ...]:
        pass

    def labels(self, v: Vertex) -> tuple[int, ...]:
        t = self._cache.get(v)
        if t is None:
            t = self._cache[v] = tuple(self.compute(v))
        return t

    def address(self, v: Vertex, label: int) -> int:
        inv = self._inverse.get(v)
        if inv is None:
            inv = dict()
            for a, lab in enumerate(self.labels(v), start=1):
                inv.setdefault(lab, a)
            self._inverse[v] = inv
        try:
            return inv[label]
        except KeyError:
            raise FormatError(f'No arc labelled {label} at vertex {format_path(v)}')


class _FamilyLabeller(Labeller):
    def __init__(self, base: 'TreeBall', family: Mapping[Vertex, Permutation]):
        super().__init__()
        self.base = base
        self.family = family

    def compute(self, v):
        f = self.family.get(v)
        labels = self.base.labels(v)
        return labels if f is None else tuple(f(i) for i in labels)


class _PullbackLabeller(Labeller):
    def __init__(self, base: 'TreeBall', g):
        super().__init__()
        self.base = base
        self.g = g

    def compute(self, v):
        gv = self.g.image(v)
        if gv is None:
            raise VertexNotMaterialized(f'Pullback is undefined at {format_path(v)}')
        out = []
        for a in range(1, self.base.n + 1):
            b = self.g.arc_image(v, a)
            if b is None:
                raise VertexNotMaterialized(f'Pullback is undefined at {format_path(v)}')
            out.append(self.base.label(gv, b))
        return out


class _OverrideLabeller(Labeller):
    def __init__(self, base: 'TreeBall', overrides: Mapping[tuple[Vertex, int], int]):
        super().__init__()
        self.base = base
        self.overrides = overrides

    def compute(self, v):
        labels = list(self.base.labels(v))
        for (w, a), label in self.overrides.items():
            if w == v:
                labels[a - 1] = label
        return labels


class _GraphSource:
    def __init__(self, graph: LabelledGraph):
        self.graph = graph

    def expand(self, frame: 'TreeFrame', parent: Vertex, a: int) -> tuple[int, Optional[str]]:
        arc = self.graph.arc_at(frame.projection(parent), a)
        return self.graph.bar(arc).label, arc.terminus


class _RandomSource:
    def __init__(self, os: OrbitStructure, seed: int):
        self.os = os
        self.seed = seed

    def expand(self, frame: 'TreeFrame', parent: Vertex, a: int) -> tuple[int, Optional[str]]:
        rng = random.Random(f'{self.seed}{format_path(parent + (a,))}')
        return rng.choice(sorted(self.os.partner_block(a))), None


class TreeFrame:
    """
    Coordinates on the n-regular tree. A vertex is the reduced address path from the root; the
    child of v along address a is v + (a,), and back(v) is the address at v of the arc leading
    to its parent. With a source attached, back addresses are computed on demand.
    """
    def __init__(self, n: int, source=None, base: str = None, cap: int = None):
        self.n = n
        self.source = source
        self.cap = cap or settings.CAP_VERTICES
        self._back: dict[Vertex, int] = dict()
        self._proj: dict[Vertex, str] = {(): base} if base is not None else dict()

    @property
    def size(self) -> int:
        return 1 + len(self._back)

    def set_back(self, v: Vertex, address: int):
        if not v or (len(v) > 1 and v[:-1] not in self._back):
            raise FormatError(f'Vertex {format_path(v)} has no materialized parent')
        if not 1 <= address <= self.n or not 1 <= v[-1] <= self.n:
            raise FormatError(f'Address out of range at {format_path(v)}')
        if len(v) > 1 and v[-1] == self._back[v[:-1]]:
            raise FormatError(f'{format_path(v)} is not a reduced path')
        self._back[v] = address

    def back(self, v: Vertex) -> int:
        if not v:
            raise ValueError('The root has no parent arc')
        b = self._back.get(v)
        if b is None:
            b = self._materialize(v)
        return b

    def _materialize(self, v: Vertex) -> int:
        if self.source is None:
            raise VertexNotMaterialized(f'Vertex {format_path(v)} is not materialized')
        parent = v[:-1]
        if parent and parent not in self._back:
            self._materialize(parent)
        a = v[-1]
        if not 1 <= a <= self.n or (parent and a == self._back[parent]):
            raise ValueError(f'{format_path(v)} is not a reduced address path')
        if self.size >= self.cap:
            raise CapExceeded(f'Materialized vertices exceed the ceiling of {self.cap}', predicted=self.size + 1)
        b, proj = self.source.expand(self, parent, a)
        self._back[v] = b
        if proj is not None:
            self._proj[v] = proj
        return b

    def projection(self, v: Vertex) -> Optional[str]:
        if v and v not in self._back:
            self._materialize(v)
        return self._proj.get(v)

    def step(self, v: Vertex, a: int) -> Vertex:
        if v and a == self.back(v):
            return v[:-1]
        child = v + (a,)
        if child not in self._back:
            self._materialize(child)
        return child

    def reverse(self, v: Vertex, a: int) -> int:
        """
        The address, at the far end of arc (v, a), of the arc pointing back to v.
        """
        if v and a == self.back(v):
            return v[-1]
        return self.back(v + (a,))

    def toward(self, u: Vertex, w: Vertex) -> int:
        if len(w) == len(u) + 1 and w[:-1] == u:
            return w[-1]
        if len(u) == len(w) + 1 and u[:-1] == w:
            return self.back(u)
        raise ValueError(f'{format_path(u)} and {format_path(w)} are not adjacent')

    def walk(self, v: Vertex, addresses: Iterable[int]) -> Vertex:
        for a in addresses:
            v = self.step(v, a)
        return v

    def path_to_root(self, v: Vertex) -> list[int]:
        """
        Addresses followed when walking from v up to the root.
        """
        return [self.back(v[:k]) for k in range(len(v), 0, -1)]

    @staticmethod
    def _common(u: Vertex, w: Vertex) -> int:
        c = 0
        for x, y in zip(u, w):
            if x != y:
                break
            c += 1
        return c

    def distance(self, u: Vertex, w: Vertex) -> int:
        c = self._common(u, w)
        return len(u) + len(w) - 2 * c

    def geodesic(self, u: Vertex, w: Vertex) -> list[Vertex]:
        c = self._common(u, w)
        up = [u[:k] for k in range(len(u), c - 1, -1)]
        down = [w[:k] for k in range(c + 1, len(w) + 1)]
        return up + down

    def ball_vertices(self, center: Vertex, r: int) -> list[Vertex]:
        seen = {center}
        out = [center]
        frontier = [center]
        for _ in range(r):
            nxt = []
            for v in frontier:
                for a in range(1, self.n + 1):
                    w = self.step(v, a)
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            out += nxt
            frontier = nxt
        return out

    def has_vertex(self, v: Vertex) -> bool:
        try:
            for k in range(1, len(v) + 1):
                self.back(v[:k])
                if k > 1 and v[k - 1] == self.back(v[:k - 1]):
                    return False
        except (VertexNotMaterialized, ValueError):
            return False
        return True


class TreeBall:
    """
    A labelling of a tree frame, viewed on the ball of the given radius about the root
    (radius None: unbounded, every vertex internal). Without a labeller labels equal addresses.
    """
    def __init__(self, frame: TreeFrame, radius: Optional[int] = None, labeller: Labeller = None,
                 os: OrbitStructure = None, name: str = None):
        if radius is not None and radius < 0:
            raise ValueError('radius must be nonnegative')
        self.frame = frame
        self.radius = radius
        self.labeller = labeller
        self.os = os
        self.name = name

    root: Vertex = ()

    @property
    def n(self) -> int:
        return self.frame.n

    def __repr__(self):
        return f'TreeBall({self.name or "ball"}, n={self.n}, radius={self.radius})'

    def labels(self, v: Vertex) -> tuple[int, ...]:
        if self.labeller is None:
            return tuple(range(1, self.n + 1))
        return self.labeller.labels(v)

    def label(self, v: Vertex, a: int) -> int:
        if self.labeller is None:
            return a
        return self.labeller.labels(v)[a - 1]

    def address(self, v: Vertex, label: int) -> int:
        if self.labeller is None:
            if not 1 <= label <= self.n:
                raise FormatError(f'No arc labelled {label} at vertex {format_path(v)}')
            return label
        return self.labeller.address(v, label)

    def back_label(self, v: Vertex) -> int:
        return self.label(v, self.frame.back(v))

    def step(self, v: Vertex, a: int) -> Vertex:
        return self.frame.step(v, a)

    def step_label(self, v: Vertex, label: int) -> Vertex:
        return self.frame.step(v, self.address(v, label))

    def reverse_label(self, v: Vertex, a: int) -> int:
        """
        Label of the reverse of arc (v, a).
        """
        w = self.frame.step(v, a)
        return self.label(w, self.frame.reverse(v, a))

    def contains(self, v: Vertex) -> bool:
        return self.radius is None or len(v) <= self.radius

    def is_internal(self, v: Vertex) -> bool:
        return self.radius is None or len(v) < self.radius

    def vertices(self, max_depth: int = None, center: Vertex = ()) -> list[Vertex]:
        depth = self.radius if max_depth is None else max_depth
        if depth is None:
            raise ValueError('An unbounded ball needs an explicit depth')
        if center == () and self.radius is not None:
            depth = min(depth, self.radius)
        return self.frame.ball_vertices(center, depth)

    def internal_vertices(self) -> list[Vertex]:
        if self.radius is None:
            raise ValueError('An unbounded ball has infinitely many internal vertices')
        if self.radius == 0:
            return []
        return self.vertices(self.radius - 1)

    def materialize(self, r: int = None) -> int:
        count = len(self.vertices(r))
        logger.debug(f'Materialized {count} vertices of {self!r}')
        return count

    def with_radius(self, radius: Optional[int]) -> 'TreeBall':
        return TreeBall(self.frame, radius, self.labeller, self.os, self.name)

    def relabelled(self, family: Mapping[Vertex, Permutation]) -> 'TreeBall':
        """
        The labelling (f_x) o l on the same coordinates. Vertices missing from the family keep
        their labels.
        """
        return TreeBall(self.frame, self.radius, _FamilyLabeller(self, family), self.os, self.name)

    def pullback(self, g) -> 'TreeBall':
        """
        The labelling l o g on the coordinates of g's domain, where l is this ball.
        """
        dom = g.dom
        return TreeBall(dom.frame, dom.radius, _PullbackLabeller(self, g), self.os, self.name)

    def with_label(self, v: Vertex, a: int, label: int) -> 'TreeBall':
        return self.with_labels({(v, a): label})

    def with_labels(self, overrides: Mapping[tuple[Vertex, int], int]) -> 'TreeBall':
        """
        A copy with the labels of some arcs, keyed by (vertex, address), overwritten.
        """
        return TreeBall(self.frame, self.radius, _OverrideLabeller(self, dict(overrides)), self.os, self.name)

    def label_path(self, v: Vertex) -> tuple[int, ...]:
        out = []
        for k in range(len(v)):
            out.append(self.label(v[:k], v[k]))
        return tuple(out)


def _check_degree(obj_n: int, os: OrbitStructure):
    if obj_n != os.n:
        raise DegreeMismatch(f'Labelling has degree {obj_n}, orbit structure has degree {os.n}')


def _check_star(report: ValidationReport, where: str, labels: list[int], n: int):
    in_range = [lab for lab in labels if 1 <= lab <= n]
    for lab in labels:
        if not 1 <= lab <= n:
            report.add(ViolationKind.label_range, where, f'label {lab} outside 1..{n}')
    counts = Counter(in_range)
    duplicated = sorted(lab for lab, c in counts.items() if c > 1)
    missing = sorted(set(range(1, n + 1)) - set(counts))
    if duplicated or missing or len(labels) != n:
        report.add(ViolationKind.bijectivity, where,
                   f'duplicated {",".join(map(str, duplicated)) or "-"} missing {",".join(map(str, missing)) or "-"}')


def _check_tau(report: ValidationReport, where: str, fwd: int, bwd: int, os: OrbitStructure):
    if 1 <= fwd <= os.n and 1 <= bwd <= os.n and not os.tau_compatible(fwd, bwd):
        report.add(ViolationKind.tau, where,
                   f'{fwd} in block {os.block_of(fwd)} but reverse {bwd} in block {os.block_of(bwd)}')


def validate_labelling(obj: Union[LabelledGraph, TreeBall], os: OrbitStructure,
                       radius: int = None) -> ValidationReport:
    """
    Check local bijectivity and the tau condition. Violations are collected, never raised.
    Balls are checked at their internal vertices and on the arcs leaving them.
    """
    _check_degree(obj.n, os)
    report = ValidationReport()
    if isinstance(obj, LabelledGraph):
        for v in obj.vertices:
            _check_star(report, f'vertex {v}', [a.label for a in obj.out_arcs(v)], obj.n)
        for e in obj.edges():
            _check_tau(report, f'arc {e.name}', e.label, obj.bar(e).label, os)
        return report

    ball = obj if radius is None else obj.with_radius(radius)
    for v in ball.internal_vertices():
        labels = list(ball.labels(v))
        _check_star(report, f'vertex {format_path(v)}', labels, ball.n)
        for a in range(1, ball.n + 1):
            w = ball.step(v, a)
            if len(w) < len(v):
                continue
            _check_tau(report, f'arc {format_path(v)}:{a}', ball.label(v, a), ball.reverse_label(v, a), os)
    return report


def legal_violations(ball: TreeBall, radius: int = None) -> ValidationReport:
    """
    Arcs within the ball whose two orientations carry different labels.
    """
    if radius is not None:
        ball = ball.with_radius(radius)
    report = ValidationReport()
    for v in ball.internal_vertices():
        for a in range(1, ball.n + 1):
            w = ball.step(v, a)
            if len(w) < len(v):
                continue
            fwd, bwd = ball.label(v, a), ball.reverse_label(v, a)
            if fwd != bwd:
                report.add(ViolationKind.legal, f'arc {format_path(v)}:{a}', f'{fwd} != {bwd}')
    return report


def lift(g: LabelledGraph, base: str = None, radius: Optional[int] = None) -> TreeBall:
    """
    The universal cover of g seen from a lift of base. Addresses are the labels of g, and every
    vertex remembers the graph vertex it projects to.
    """
    base = base or g.basepoint
    if base not in g.vertices:
        raise FormatError(f'Unknown base vertex {base}')
    for v in g.vertices:
        labels = sorted(a.label for a in g.out_arcs(v))
        if labels != list(range(1, g.n + 1)):
            raise FormatError(f'Graph {g.name or ""} fails local bijectivity at {v}')
    frame = TreeFrame(g.n, _GraphSource(g), base=base)
    ball = TreeBall(frame, radius, name=f'lift({g.name or "graph"})')
    if radius is not None:
        ball.materialize()
    return ball


def random_tau_legal(os: OrbitStructure, radius: Optional[int] = None, seed: int = None) -> TreeBall:
    """
    A random tau-legal labelling: the label of each reverse arc is drawn uniformly from the
    partner block, seeded per vertex so the result does not depend on materialization order.
    """
    if os.n < 3:
        raise ValueError('Random labellings need n >= 3')
    seed = settings.SEED if seed is None else seed
    frame = TreeFrame(os.n, _RandomSource(os, seed))
    ball = TreeBall(frame, radius, os=os, name=f'random(seed={seed})')
    if radius is not None:
        ball.materialize()
    return ball


def build_two_vertex_quotient(os: OrbitStructure) -> LabelledGraph:
    """
    Two vertices x1, x2 and n edges; the edge leaving x1 with label k comes back with the label
    of the same rank in the partner block.
    """
    if not os.unimodular:
        raise NotUnimodular('Some block and its tau partner differ in size')
    g = LabelledGraph(os.n, 'two-vertex')
    g.add_vertex('x1')
    g.add_vertex('x2')
    for k in range(1, os.n + 1):
        bid = os.block_of(k)
        rank = sorted(os.blocks[bid]).index(k)
        partner = sorted(os.blocks[os.tau[bid]])[rank]
        g.add_edge(f'e{k}', 'x1', 'x2', k, partner)
    return g


def vertex_transitive_labelling(rose: LabelledGraph, radius: Optional[int] = None) -> tuple[TreeBall, OrbitStructure]:
    """
    For a one-vertex graph the deck group acts simply transitively on the lift. The lift is
    tau-legal for singleton blocks with tau pairing the two labels of every loop.
    """
    if len(rose.vertices) != 1:
        raise ValueError('Vertex transitive labellings are built from one-vertex graphs')
    tau = {str(e.label): str(rose.bar(e).label) for e in rose.edges()}
    tau.update({j: i for i, j in tau.items()})
    os = OrbitStructure(rose.n, {str(i): frozenset([i]) for i in range(1, rose.n + 1)}, tau)
    ball = lift(rose, radius=radius)
    ball.os = os
    return ball, os
