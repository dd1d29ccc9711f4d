import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from sympy import factorint, isprime

from arborlat.exceptions import DegreeMismatch, CapExceeded, BlockNotInvariant, NotNormal, \
    UnidentifiedSimpleFactor
from arborlat.settings import settings
from arborlat.utils import logger

# display names of the nonabelian simple groups below order 10000
SIMPLE_GROUP_NAMES = {
    60: 'A_5',
    168: 'PSL(2,7)',
    360: 'A_6',
    504: 'PSL(2,8)',
    660: 'PSL(2,11)',
    1092: 'PSL(2,13)',
    2448: 'PSL(2,17)',
    2520: 'A_7',
    3420: 'PSL(2,19)',
    4080: 'PSL(2,16)',
    5616: 'PSL(3,3)',
    6048: 'PSU(3,3)',
    6072: 'PSL(2,23)',
    7800: 'PSL(2,25)',
    7920: 'M_11',
    9828: 'PSL(2,27)',
}


@dataclass(frozen=True)
class Permutation:
    """
    A permutation of {1..n} in one-line notation: images[i-1] is the image of i.
    """
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f'Not a permutation of 1..{len(images)}: {images}')
        object.__setattr__(self, 'images', images)

    @classmethod
    def _trusted(cls, images: tuple[int, ...]) -> 'Permutation':
        p = object.__new__(cls)
        object.__setattr__(p, 'images', images)
        return p

    @classmethod
    def identity(cls, n: int) -> 'Permutation':
        return cls._trusted(tuple(range(1, n + 1)))

    @classmethod
    def parse(cls, text: str) -> 'Permutation':
        cleaned = text.replace('(', ' ').replace(')', ' ').replace(',', ' ')
        try:
            return cls(tuple(int(tok) for tok in cleaned.split()))
        except ValueError as ex:
            raise ValueError(f'Bad permutation "{text}": {ex}')

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: 'Permutation') -> 'Permutation':
        return compose(self, other)

    def __lt__(self, other: 'Permutation') -> bool:
        return self.images < other.images

    @cached_property
    def inverse(self) -> 'Permutation':
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation._trusted(tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(j == i for i, j in enumerate(self.images, start=1))

    def __str__(self):
        return '(' + ' '.join(str(i) for i in self.images) + ')'

    def __repr__(self):
        return f'Permutation{self}'


def compose(a: Permutation, b: Permutation) -> Permutation:
    """
    The permutation i -> a(b(i))
    """
    if a.degree != b.degree:
        raise DegreeMismatch(f'Cannot compose permutations of degree {a.degree} and {b.degree}')
    ai = a.images
    return Permutation._trusted(tuple(ai[i - 1] for i in b.images))


def _closure(degree: int, generators: Sequence[Permutation], cap: int,
             start: Iterable[Permutation] = ()) -> frozenset[Permutation]:
    identity = Permutation.identity(degree)
    seen = {identity, *start}
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for s in generators:
                y = compose(s, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise CapExceeded(f'Group closure exceeds the order cap of {cap}')
        frontier = nxt
    return frozenset(seen)


class PermGroup:
    """
    A finite permutation group on {1..degree} given by generators. The element set is
    enumerated on first use and cached.
    """
    def __init__(self, degree: int, generators: Iterable[Permutation] = (), order_cap: int = None,
                 name: str = None):
        if degree < 1:
            raise ValueError('degree must be positive')
        gens = tuple(generators)
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatch(f'Generator {g} does not have degree {degree}')
        self.degree = degree
        self.generators = gens
        self.order_cap = order_cap or settings.CAP_GROUP
        self.name = name
        self._elements: Optional[frozenset[Permutation]] = None
        self._sorted: Optional[list[Permutation]] = None
        self._least: dict[int, dict[int, Permutation]] = dict()

    @classmethod
    def from_elements(cls, degree: int, elements: Iterable[Permutation], generators: Sequence[Permutation] = None,
                      name: str = None) -> 'PermGroup':
        elements = frozenset(elements)
        if generators is None:
            generators = _greedy_generators(degree, elements)
        group = cls(degree, generators, order_cap=max(len(elements), settings.CAP_GROUP), name=name)
        group._elements = elements
        return group

    def elements(self) -> frozenset[Permutation]:
        if self._elements is None:
            self._elements = _closure(self.degree, self.generators, self.order_cap)
            logger.debug(f'Enumerated group of degree {self.degree}: order {len(self._elements)}')
        return self._elements

    def sorted_elements(self) -> list[Permutation]:
        if self._sorted is None:
            self._sorted = sorted(self.elements(), key=lambda p: p.images)
        return self._sorted

    @property
    def order(self) -> int:
        return len(self.elements())

    def __contains__(self, p: Permutation) -> bool:
        return p in self.elements()

    def __iter__(self) -> Iterator[Permutation]:
        return iter(self.sorted_elements())

    def __len__(self):
        return self.order

    def __repr__(self):
        return f'PermGroup({self.name or "degree " + str(self.degree)}, {len(self.generators)} generators)'

    def is_abelian(self) -> bool:
        return all(compose(a, b) == compose(b, a) for a, b in itertools.combinations(self.generators, 2))

    def orbit(self, a: int) -> frozenset[int]:
        seen = {a}
        stack = [a]
        while stack:
            i = stack.pop()
            for s in self.generators:
                j = s(i)
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return frozenset(seen)

    def orbits(self) -> list[frozenset[int]]:
        blocks = []
        covered = set()
        for a in range(1, self.degree + 1):
            if a not in covered:
                block = self.orbit(a)
                covered |= block
                blocks.append(block)
        return blocks

    def is_regular_on(self, block: Iterable[int]) -> bool:
        block = frozenset(block)
        if not block:
            raise BlockNotInvariant('Empty block')
        for s in self.generators:
            if frozenset(s(i) for i in block) != block:
                raise BlockNotInvariant(f'Block is not invariant under {s}')
        return self.orbit(min(block)) == block and self.order == len(block)

    def point_stabilizer(self, a: int) -> 'PermGroup':
        return PermGroup.from_elements(self.degree, (e for e in self.elements() if e(a) == a))

    def stabilizer_order(self, a: int) -> int:
        return self.order // len(self.orbit(a))

    def least_mapping(self, a: int, b: int) -> Optional[Permutation]:
        """
        The lexicographically least element f with f(a) = b, or None.
        """
        table = self._least.get(a)
        if table is None:
            table = dict()
            for e in self.sorted_elements():
                table.setdefault(e(a), e)
            self._least[a] = table
        return table.get(b)

    def mapping_coset(self, a: int, b: int) -> list[Permutation]:
        return [e for e in self.sorted_elements() if e(a) == b]


def _greedy_generators(degree: int, elements: frozenset[Permutation]) -> list[Permutation]:
    gens = []
    span = frozenset([Permutation.identity(degree)])
    for e in sorted(elements, key=lambda p: p.images):
        if len(span) == len(elements):
            break
        if e not in span:
            gens.append(e)
            span = _closure(degree, gens, max(len(elements), 1), start=span)
    return gens


def symmetric_group(n: int) -> PermGroup:
    if n < 2:
        return PermGroup(n, name=f'S_{n}')
    transposition = Permutation((2, 1) + tuple(range(3, n + 1)))
    cycle = Permutation(tuple(range(2, n + 1)) + (1,))
    return PermGroup(n, [transposition, cycle], name=f'S_{n}')


def alternating_group(n: int) -> PermGroup:
    gens = []
    for k in range(3, n + 1):
        images = list(range(1, n + 1))
        images[0], images[1], images[k - 1] = 2, k, 1
        gens.append(Permutation(tuple(images)))
    return PermGroup(n, gens, name=f'A_{n}')


def cyclic_group(n: int) -> PermGroup:
    """
    C_n acting regularly on n points by rotation
    """
    if n == 1:
        return PermGroup(1, name='C_1')
    return PermGroup(n, [Permutation(tuple(range(2, n + 1)) + (1,))], name=f'C_{n}')


def klein_four() -> PermGroup:
    return PermGroup(4, [Permutation((2, 1, 4, 3)), Permutation((3, 4, 1, 2))], name='V_4')


def a5_elements() -> list[Permutation]:
    """
    The even permutations of {1..5} in lexicographic one-line order, so a_1 is the identity.
    """
    out = []
    for images in itertools.permutations(range(1, 6)):
        inversions = sum(1 for i, j in itertools.combinations(images, 2) if i > j)
        if inversions % 2 == 0:
            out.append(Permutation(images))
    return out


A5_GENERATORS = (Permutation((2, 3, 1, 4, 5)), Permutation((2, 3, 4, 5, 1)))


def left_regular(elements: Sequence[Permutation], s: Permutation) -> Permutation:
    """
    Left translation by s on the labels 1..len(elements), label j standing for elements[j-1].
    """
    index = {e: j for j, e in enumerate(elements, start=1)}
    return Permutation(tuple(index[compose(s, e)] for e in elements))


def regular_a5() -> PermGroup:
    elements = a5_elements()
    return PermGroup(60, [left_regular(elements, s) for s in A5_GENERATORS], name='A_5')


def embedded(p: Permutation, offsets: Sequence[int], degree: int) -> Permutation:
    """
    Copy the action of p onto each block {offset+1 .. offset+p.degree}; other points are fixed.
    """
    images = list(range(1, degree + 1))
    for offset in offsets:
        for i in range(1, p.degree + 1):
            images[offset + i - 1] = offset + p(i)
    return Permutation(tuple(images))


@dataclass(frozen=True)
class SimpleFactorId:
    order: int
    abelian: bool
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.abelian and not isprime(self.order):
            raise ValueError(f'An abelian simple factor has prime order, not {self.order}')

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.abelian:
            return f'C_{self.order}'
        return f'?{self.order}'


class FactorMultiset:
    """
    Multiset of composition factors. Two factors count as the same when order and abelian
    flag agree.
    """
    def __init__(self, entries: Iterable[SimpleFactorId] = ()):
        self._counts = Counter(entries)

    def entries(self) -> list[SimpleFactorId]:
        return sorted(self._counts.elements(), key=lambda e: (e.abelian, e.order))

    def __add__(self, other: 'FactorMultiset') -> 'FactorMultiset':
        return FactorMultiset(self.entries() + other.entries())

    def __eq__(self, other):
        if not isinstance(other, FactorMultiset):
            return NotImplemented
        return self._counts == other._counts

    __hash__ = None

    def __len__(self):
        return sum(self._counts.values())

    def product(self) -> int:
        out = 1
        for e in self._counts.elements():
            out *= e.order
        return out

    def __str__(self):
        return '{' + ','.join(e.label for e in self.entries()) + '}'

    def __repr__(self):
        return f'FactorMultiset{self}'


def factor_multisets_equal(a: FactorMultiset, b: FactorMultiset) -> bool:
    return a == b


class CayleyTable:
    """
    Dense multiplication table of an enumerated group. Elements are indexed in lexicographic
    order, so index 0 is the identity and sorted index arrays compare like sorted element lists.
    mul[i, j] is the index of e_i * e_j.
    """
    def __init__(self, group: PermGroup):
        if group.order > settings.CAP_TABLE:
            raise CapExceeded(f'Group of order {group.order} exceeds the Cayley table cap {settings.CAP_TABLE}',
                              predicted=group.order)
        self.group = group
        self.elements = group.sorted_elements()
        self.index = {e: i for i, e in enumerate(self.elements)}
        n = group.degree
        size = len(self.elements)
        x = np.array([e.images for e in self.elements], dtype=np.int64).reshape(size, n)

        # greedy base: points whose images separate all elements
        key = np.zeros(size, dtype=np.int64)
        self._base = []
        self._uniques = []
        distinct = 1
        for p in range(n):
            if distinct == size:
                break
            raw = key * (n + 1) + x[:, p]
            u, inverse = np.unique(raw, return_inverse=True)
            if len(u) > distinct:
                self._base.append(p)
                self._uniques.append(u)
                key = inverse.astype(np.int64)
                distinct = len(u)
        self._rank_to_index = np.empty(size, dtype=np.int64)
        self._rank_to_index[key] = np.arange(size)

        base = np.array(self._base, dtype=np.int64)
        self.mul = np.empty((size, size), dtype=np.int32)
        for j in range(size):
            cols = x[:, x[j, base] - 1] if len(base) else np.zeros((size, 0), dtype=np.int64)
            self.mul[:, j] = self._rank_to_index[self._keys(cols, n)]
        self.inv = np.argmax(self.mul == 0, axis=1)

    def _keys(self, cols: np.ndarray, n: int) -> np.ndarray:
        key = np.zeros(len(cols), dtype=np.int64)
        for k, uniques in enumerate(self._uniques):
            key = np.searchsorted(uniques, key * (n + 1) + cols[:, k])
        return key

    @property
    def size(self) -> int:
        return len(self.elements)

    def indices(self, perms: Iterable[Permutation]) -> np.ndarray:
        return np.array(sorted(self.index[p] for p in perms), dtype=np.int64)

    def closure(self, gens: np.ndarray) -> np.ndarray:
        members = np.zeros(self.size, dtype=bool)
        members[0] = True
        gens = np.asarray(gens, dtype=np.int64)
        frontier = np.array([0])
        while frontier.size and gens.size:
            prods = np.unique(self.mul[np.ix_(frontier, gens)])
            new = prods[~members[prods]]
            members[new] = True
            frontier = new
        return np.flatnonzero(members)

    def is_abelian(self, gens: np.ndarray) -> bool:
        g = np.asarray(gens, dtype=np.int64)
        block = self.mul[np.ix_(g, g)]
        return bool(np.array_equal(block, block.T))

    def is_normal(self, sub: np.ndarray, gens: np.ndarray) -> bool:
        member = np.zeros(self.size, dtype=bool)
        member[sub] = True
        for s in np.asarray(gens, dtype=np.int64):
            conj = self.mul[self.mul[self.inv[s], sub], s]
            if not member[conj].all():
                return False
        return True

    def conjugacy_classes(self, sub: np.ndarray) -> list[np.ndarray]:
        sub = np.asarray(sub, dtype=np.int64)
        remaining = np.zeros(self.size, dtype=bool)
        remaining[sub] = True
        classes = []
        inv_sub = self.inv[sub]
        for x in sub:
            if not remaining[x]:
                continue
            cls = np.unique(self.mul[self.mul[inv_sub, x], sub])
            remaining[cls] = False
            classes.append(cls)
        return classes

    def normal_subgroups(self, sub: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """
        All normal subgroups of the subgroup with index array `sub`, as (elements, generators)
        pairs: normal closures of conjugacy classes, then joins until nothing new appears.
        """
        found: dict[bytes, tuple[np.ndarray, np.ndarray]] = dict()

        def add(gens: np.ndarray) -> bool:
            elements = self.closure(gens)
            key = elements.tobytes()
            if key in found:
                return False
            found[key] = (elements, np.asarray(gens, dtype=np.int64))
            return True

        add(np.array([], dtype=np.int64))
        for cls in self.conjugacy_classes(sub):
            add(cls)

        changed = True
        while changed:
            changed = False
            items = list(found.values())
            for (a, agens), (b, bgens) in itertools.combinations(items, 2):
                amask = np.zeros(self.size, dtype=bool)
                amask[a] = True
                if amask[b].all():
                    continue
                bmask = np.zeros(self.size, dtype=bool)
                bmask[b] = True
                if bmask[a].all():
                    continue
                if add(np.unique(np.concatenate([agens, bgens]))):
                    changed = True
        return sorted(found.values(), key=lambda t: (len(t[0]), t[0].tolist()))

    def coset_action(self, sub: np.ndarray, gens: np.ndarray, normal: np.ndarray) -> PermGroup:
        """
        The action of `sub` (generated by `gens`) on the left cosets of `normal` by left
        multiplication.
        """
        coset_of = np.full(self.size, -1, dtype=np.int64)
        reps = []
        for h in np.asarray(sub, dtype=np.int64):
            if coset_of[h] < 0:
                coset_of[self.mul[h, normal]] = len(reps)
                reps.append(h)
        degree = len(reps)
        perms = []
        for s in np.asarray(gens, dtype=np.int64):
            perms.append(Permutation(tuple(int(coset_of[self.mul[s, r]]) + 1 for r in reps)))
        return PermGroup(degree, perms)

    def subgroup(self, elements: np.ndarray, gens: np.ndarray) -> PermGroup:
        return PermGroup.from_elements(self.group.degree,
                                       (self.elements[i] for i in elements),
                                       generators=[self.elements[i] for i in gens if i != 0])


class SparseKernel:
    """
    Table-free counterpart of CayleyTable for groups above the table cap. Subgroups are
    frozensets of permutations; classes and normal closures only conjugate by generators.
    """
    def __init__(self, group: PermGroup):
        self.group = group
        self.degree = group.degree
        self.gens = list(group.generators)
        self.identity = Permutation.identity(group.degree)

    @staticmethod
    def _conjugate(s: Permutation, x: Permutation) -> Permutation:
        return compose(compose(s, x), s.inverse)

    def normal_closure(self, elements: Iterable[Permutation]) -> tuple[frozenset[Permutation], list[Permutation]]:
        members = frozenset([self.identity])
        gens = []
        pending = list(elements)
        while pending:
            x = pending.pop()
            if x in members:
                continue
            gens.append(x)
            members = _closure(self.degree, gens, self.group.order, start=members)
            pending += [self._conjugate(s, x) for s in self.gens]
        return members, gens

    def is_normal(self, sub: frozenset[Permutation], sub_gens: Iterable[Permutation]) -> bool:
        return all(self._conjugate(s, n) in sub for s in self.gens for n in sub_gens)

    def conjugacy_classes(self) -> list[frozenset[Permutation]]:
        seen = set()
        classes = []
        for x in self.group.sorted_elements():
            if x in seen:
                continue
            cls = {x}
            frontier = [x]
            while frontier:
                y = frontier.pop()
                for s in self.gens:
                    c = self._conjugate(s, y)
                    if c not in cls:
                        cls.add(c)
                        frontier.append(c)
            seen |= cls
            classes.append(frozenset(cls))
        return classes

    def normal_subgroups(self) -> list[tuple[frozenset[Permutation], list[Permutation]]]:
        found: dict[frozenset[Permutation], list[Permutation]] = {frozenset([self.identity]): []}

        def add(members: frozenset[Permutation], gens: list[Permutation]) -> bool:
            if members in found:
                return False
            found[members] = gens
            return True

        for cls in self.conjugacy_classes():
            add(*self.normal_closure([min(cls)]))
        changed = True
        while changed:
            changed = False
            for (a, agens), (b, bgens) in itertools.combinations(list(found.items()), 2):
                if a <= b or b <= a:
                    continue
                if add(*self.normal_closure(agens + bgens)):
                    changed = True
        return sorted(found.items(), key=lambda t: (len(t[0]), sorted(p.images for p in t[0])))

    def proper_normal(self, rng: random.Random = None) -> Optional[tuple[frozenset[Permutation], list[Permutation]]]:
        """
        A nontrivial proper normal subgroup of a nonabelian group, or None when it is simple. The
        derived subgroup is tried before the normal closures of the conjugacy classes.
        """
        order = self.group.order
        commutators = [compose(compose(a, b), compose(a.inverse, b.inverse))
                       for a, b in itertools.combinations(self.gens, 2)]
        members, gens = self.normal_closure(c for c in commutators if not c.is_identity)
        if 1 < len(members) < order:
            return members, gens
        classes = self.conjugacy_classes()
        if rng is not None:
            rng.shuffle(classes)
        for cls in classes:
            x = min(cls)
            if x.is_identity:
                continue
            members, gens = self.normal_closure([x])
            if len(members) < order:
                return members, gens
        return None

    def coset_action(self, normal: frozenset[Permutation]) -> PermGroup:
        """
        The action of the group on the left cosets of `normal` by left multiplication.
        """
        coset_of: dict[Permutation, int] = dict()
        reps = []
        for h in self.group.sorted_elements():
            if h not in coset_of:
                for n in normal:
                    coset_of[compose(h, n)] = len(reps)
                reps.append(h)
        perms = [Permutation(tuple(coset_of[compose(s, r)] + 1 for r in reps)) for s in self.gens]
        return PermGroup(len(reps), perms)


def normal_subgroups(g: PermGroup) -> list[PermGroup]:
    if g.order > settings.CAP_TABLE:
        return [PermGroup.from_elements(g.degree, members, generators=gens)
                for members, gens in SparseKernel(g).normal_subgroups()]
    table = CayleyTable(g)
    everything = np.arange(table.size)
    return [table.subgroup(elements, gens) for elements, gens in table.normal_subgroups(everything)]


def quotient(g: PermGroup, k: PermGroup) -> PermGroup:
    """
    G/K realized as the permutation group of G on the left cosets of K.
    """
    if g.order > settings.CAP_TABLE:
        kernel = SparseKernel(g)
        if not k.elements() <= g.elements() or not kernel.is_normal(k.elements(), k.generators):
            raise NotNormal('Subgroup is not normal')
        return kernel.coset_action(k.elements())
    table = CayleyTable(g)
    kidx = table.indices(k.elements())
    gens = table.indices(g.generators) if g.generators else np.array([], dtype=np.int64)
    if not table.is_normal(kidx, gens):
        raise NotNormal('Subgroup is not normal')
    return table.coset_action(np.arange(table.size), gens, kidx)


def _abelian_factors(order: int) -> list[SimpleFactorId]:
    out = []
    for p, e in sorted(factorint(order).items()):
        out += [SimpleFactorId(int(p), True, f'C_{p}')] * e
    return out


def _simple_factor(q: PermGroup, strict: bool) -> SimpleFactorId:
    order = q.order
    if isprime(order):
        return SimpleFactorId(order, True, f'C_{order}')
    name = SIMPLE_GROUP_NAMES.get(order)
    if name is None:
        msg = f'Nonabelian simple factor of order {order} is not in the name table'
        if strict:
            raise UnidentifiedSimpleFactor(msg)
        logger.warning(msg)
    return SimpleFactorId(order, False, name)


def _sparse_factors(g: PermGroup, seed: int, strict: bool) -> list[SimpleFactorId]:
    """
    Split a group above the table cap at any proper normal subgroup and recurse on both sides.
    """
    kernel = SparseKernel(g)
    found = kernel.proper_normal(random.Random(seed) if seed is not None else None)
    if found is None:
        return [_simple_factor(g, strict)]
    members, gens = found
    logger.debug(f'Split a group of order {g.order} at a normal subgroup of order {len(members)}')
    sub = PermGroup.from_elements(g.degree, members, generators=gens)
    factors = composition_factors(sub, seed, strict) + composition_factors(kernel.coset_action(members), seed, strict)
    return factors.entries()


def composition_factors(g: PermGroup, seed: int = None, strict: bool = False) -> FactorMultiset:
    """
    Composition factors via a maximal normal subgroup chain. Without a seed the maximal normal
    subgroup with the smallest quotient (then the lexicographically least element list) is taken;
    a seed picks randomly among the maximal ones instead. Groups above the table cap are split
    at any proper normal subgroup.
    """
    if g.order == 1:
        return FactorMultiset()
    if g.is_abelian():
        return FactorMultiset(_abelian_factors(g.order))
    if g.order > settings.CAP_TABLE:
        return FactorMultiset(_sparse_factors(g, seed, strict))

    table = CayleyTable(g)
    rng = random.Random(seed) if seed is not None else None
    sub = np.arange(table.size)
    gens = table.indices(g.generators)
    entries = []
    while len(sub) > 1:
        if table.is_abelian(gens):
            entries += _abelian_factors(len(sub))
            break
        normals = [t for t in table.normal_subgroups(sub) if len(t[0]) < len(sub)]
        masks = []
        for elements, _ in normals:
            mask = np.zeros(table.size, dtype=bool)
            mask[elements] = True
            masks.append(mask)
        maximal = []
        for i, (elements, ngens) in enumerate(normals):
            contained = any(j != i and len(normals[j][0]) > len(elements) and masks[j][elements].all()
                            for j in range(len(normals)))
            if not contained:
                maximal.append((elements, ngens))
        if rng is None:
            chosen = min(maximal, key=lambda t: (-len(t[0]), t[0].tolist()))
        else:
            chosen = rng.choice(maximal)
        factor = _simple_factor(table.coset_action(sub, gens, chosen[0]), strict)
        logger.debug(f'Composition factor {factor.label} of a group of order {len(sub)}')
        entries.append(factor)
        sub, gens = chosen
    return FactorMultiset(entries)
