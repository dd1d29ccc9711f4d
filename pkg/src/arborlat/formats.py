import os
from typing import Iterable, Iterator, Optional, Sequence

from arborlat.ballmap import BallMap, ExplicitMap
from arborlat.exceptions import FormatError
from arborlat.fins import FinComplexBall
from arborlat.labelled import LabelledGraph, OrbitStructure, TreeBall, TreeFrame
from arborlat.lattices import ThetaData, twisted_lift
from arborlat.permkernel import Permutation, PermGroup, symmetric_group
from arborlat.settings import settings
from arborlat.utils import format_path, parse_path


def _lines(path: str) -> Iterator[tuple[int, list[str]]]:
    """
    Non-blank lines split on whitespace, with '#' comments removed.
    """
    try:
        with open(path, encoding=settings.ENCODING) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.split('#', 1)[0].strip()
                if line:
                    yield lineno, line.split()
    except OSError as ex:
        raise FormatError(f'Cannot read {path}: {ex.strerror}')


def _int(token: str, path: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f'{path}:{lineno}: expected an integer, got "{token}"')


def _perm(tokens: Sequence[str], path: str, lineno: int) -> Permutation:
    try:
        return Permutation.parse(' '.join(tokens))
    except ValueError as ex:
        raise FormatError(f'{path}:{lineno}: {ex}')


def _write(path: str, lines: Iterable[str]):
    with open(path, 'w', encoding=settings.ENCODING) as f:
        for line in lines:
            f.write(line + '\n')


def _one_line(p: Permutation) -> str:
    return ' '.join(map(str, p.images))


# groups

def read_group(path: str) -> PermGroup:
    degree = None
    gens = []
    for lineno, tokens in _lines(path):
        if tokens[0] == 'degree':
            if degree is not None or len(tokens) != 2:
                raise FormatError(f'{path}:{lineno}: bad degree line')
            degree = _int(tokens[1], path, lineno)
            continue
        if degree is None:
            raise FormatError(f'{path}:{lineno}: generators before the degree line')
        p = _perm(tokens, path, lineno)
        if p.degree != degree:
            raise FormatError(f'{path}:{lineno}: generator has degree {p.degree}, expected {degree}')
        gens.append(p)
    if degree is None:
        raise FormatError(f'{path}: missing degree line')
    return PermGroup(degree, gens, name=os.path.splitext(os.path.basename(path))[0])


def write_group(group: PermGroup, path: str):
    _write(path, [f'degree {group.degree}'] + [_one_line(g) for g in group.generators])


# orbit structures

def _labels(tokens: Sequence[str], path: str, lineno: int) -> list[int]:
    out = []
    for tok in tokens:
        if '-' in tok:
            lo, _, hi = tok.partition('-')
            a, b = _int(lo, path, lineno), _int(hi, path, lineno)
            if b < a:
                raise FormatError(f'{path}:{lineno}: empty range {tok}')
            out += range(a, b + 1)
        else:
            out.append(_int(tok, path, lineno))
    return out


def _ranges(labels: Iterable[int]) -> str:
    labels = sorted(labels)
    parts = []
    start = prev = labels[0]
    for lab in labels[1:] + [None]:
        if lab is not None and lab == prev + 1:
            prev = lab
            continue
        parts.append(str(start) if start == prev else f'{start}-{prev}')
        if lab is not None:
            start = prev = lab
    return ' '.join(parts)


def read_orbits(path: str) -> OrbitStructure:
    n = None
    blocks = dict()
    tau = dict()
    for lineno, tokens in _lines(path):
        key = tokens[0]
        if key == 'n' and len(tokens) == 2:
            n = _int(tokens[1], path, lineno)
        elif key == 'orbit' and len(tokens) >= 3:
            if tokens[1] in blocks:
                raise FormatError(f'{path}:{lineno}: orbit {tokens[1]} declared twice')
            blocks[tokens[1]] = frozenset(_labels(tokens[2:], path, lineno))
        elif key == 'tau' and len(tokens) == 3:
            i, j = tokens[1], tokens[2]
            if tau.get(i, j) != j or tau.get(j, i) != i:
                raise FormatError(f'{path}:{lineno}: tau is not an involution')
            tau[i], tau[j] = j, i
        else:
            raise FormatError(f'{path}:{lineno}: unrecognised line "{" ".join(tokens)}"')
    if n is None:
        raise FormatError(f'{path}: missing n line')
    return OrbitStructure(n, blocks, tau)


def write_orbits(os_: OrbitStructure, path: str):
    lines = [f'n {os_.n}']
    lines += [f'orbit {b} {_ranges(os_.blocks[b])}' for b in os_.block_ids()]
    done = set()
    for b in os_.block_ids():
        partner = os_.tau[b]
        if b not in done and partner != b:
            lines.append(f'tau {b} {partner}')
            done |= {b, partner}
    _write(path, lines)


# labelled graphs

def read_graph(path: str) -> LabelledGraph:
    n = None
    vertices = []
    edges = []
    for lineno, tokens in _lines(path):
        key = tokens[0]
        if key == 'n' and len(tokens) == 2:
            n = _int(tokens[1], path, lineno)
        elif key == 'vertex' and len(tokens) == 2:
            vertices.append(tokens[1])
        elif key == 'edge' and len(tokens) == 6:
            edges.append((lineno, tokens[1], tokens[2], tokens[3],
                          _int(tokens[4], path, lineno), _int(tokens[5], path, lineno)))
        else:
            raise FormatError(f'{path}:{lineno}: unrecognised line "{" ".join(tokens)}"')
    if not vertices:
        raise FormatError(f'{path}: no vertices')
    if n is None:
        n = max((max(e[4], e[5]) for e in edges), default=0)
    g = LabelledGraph(n, os.path.splitext(os.path.basename(path))[0])
    for v in vertices:
        g.add_vertex(v)
    for lineno, name, src, dst, fwd, bwd in edges:
        if name.startswith('~'):
            raise FormatError(f'{path}:{lineno}: arc names starting with "~" are reserved for reverse arcs')
        for lab in (fwd, bwd):
            if not 1 <= lab <= n:
                raise FormatError(f'{path}:{lineno}: label {lab} outside 1..{n}')
        try:
            g.add_edge(name, src, dst, fwd, bwd)
        except FormatError as ex:
            raise FormatError(f'{path}:{lineno}: {ex}')
    return g


def write_graph(g: LabelledGraph, path: str):
    lines = [f'n {g.n}']
    lines += [f'vertex {v}' for v in g.vertices]
    lines += [f'edge {e.name} {e.origin} {e.terminus} {e.label} {g.bar(e).label}' for e in g.edges()]
    _write(path, lines)


# tree balls

def ball_lines(ball: TreeBall) -> list[str]:
    """
    One line per arc leaving a vertex toward the boundary, keyed by the label path of its origin.
    """
    root = ball.frame.projection(()) or 'x0'
    lines = [f'root {root} radius {ball.radius}']
    for v in ball.vertices():
        if not v:
            continue
        parent = v[:-1]
        fwd = ball.label(parent, v[-1])
        bwd = ball.label(v, ball.frame.back(v))
        lines.append(f'arc {format_path(ball.label_path(parent))} {fwd} {bwd}')
    return lines


def write_ball(ball: TreeBall, path: str):
    if ball.radius is None:
        raise ValueError('Only bounded balls can be written')
    _write(path, ball_lines(ball))


def read_ball(path: str, os_: OrbitStructure = None) -> TreeBall:
    """
    Loaded balls are addressed by their label paths, so their labeller is the identity.
    """
    header = None
    arcs = []
    for lineno, tokens in _lines(path):
        if tokens[0] == 'root' and len(tokens) == 4 and tokens[2] == 'radius':
            header = (tokens[1], _int(tokens[3], path, lineno))
        elif tokens[0] == 'arc' and len(tokens) == 4:
            try:
                origin = parse_path(tokens[1])
            except ValueError as ex:
                raise FormatError(f'{path}:{lineno}: {ex}')
            arcs.append((lineno, origin, _int(tokens[2], path, lineno), _int(tokens[3], path, lineno)))
        else:
            raise FormatError(f'{path}:{lineno}: unrecognised line "{" ".join(tokens)}"')
    if header is None:
        raise FormatError(f'{path}: missing root line')
    name, radius = header
    n = sum(1 for _, origin, _, _ in arcs if not origin)
    if n < 2:
        raise FormatError(f'{path}: the root needs at least two arcs')
    frame = TreeFrame(n, base=name)
    for lineno, origin, fwd, bwd in sorted(arcs, key=lambda t: (len(t[1]), t[1])):
        if len(origin) >= radius:
            raise FormatError(f'{path}:{lineno}: arc leaves the ball of radius {radius}')
        try:
            frame.set_back(origin + (fwd,), bwd)
        except FormatError as ex:
            raise FormatError(f'{path}:{lineno}: {ex}')
    ball = TreeBall(frame, radius, os=os_, name=name)
    expected = 1 + n * sum((n - 1) ** k for k in range(radius))
    if frame.size != expected:
        raise FormatError(f'{path}: {frame.size} vertices, a ball of radius {radius} has {expected}')
    return ball


# ball maps

def write_ballmap(g: BallMap, path: str):
    lines = []
    for v in g.dom.vertices():
        gv = g.image(v)
        if gv is not None:
            lines.append(f'v {format_path(v)} -> {format_path(gv)}')
    _write(path, lines)


def read_ballmap(path: str, dom: TreeBall, cod: TreeBall) -> ExplicitMap:
    """
    Only the vertex bijection is stored; arcs follow, and the map is checked to be an
    isomorphism onto its image.
    """
    mapping = dict()
    for lineno, tokens in _lines(path):
        if tokens[0] != 'v' or len(tokens) != 4 or tokens[2] != '->':
            raise FormatError(f'{path}:{lineno}: expected "v /path -> /path"')
        try:
            v, w = parse_path(tokens[1]), parse_path(tokens[3])
        except ValueError as ex:
            raise FormatError(f'{path}:{lineno}: {ex}')
        if not dom.frame.has_vertex(v) or not cod.frame.has_vertex(w):
            raise FormatError(f'{path}:{lineno}: vertex outside the balls')
        if v in mapping:
            raise FormatError(f'{path}:{lineno}: {tokens[1]} mapped twice')
        mapping[v] = w
    g = ExplicitMap(dom, cod, mapping)
    g.check_automorphism()
    return g


# relabelling data

def read_theta(path: str) -> tuple[ThetaData, Optional[Permutation]]:
    here = os.path.dirname(path)
    quotient = group = twist = None
    tree = []
    basis = []
    for lineno, tokens in _lines(path):
        key = tokens[0]
        if key == 'quotient' and len(tokens) == 2:
            quotient = read_graph(os.path.join(here, tokens[1]))
        elif key == 'group' and len(tokens) == 2:
            group = read_group(os.path.join(here, tokens[1]))
        elif key == 'tree':
            tree += tokens[1:]
        elif key == 'basis' and len(tokens) >= 3:
            basis.append((tokens[1], _perm(tokens[2:], path, lineno)))
        elif key == 'twist' and len(tokens) >= 2:
            twist = _perm(tokens[1:], path, lineno)
        else:
            raise FormatError(f'{path}:{lineno}: unrecognised line "{" ".join(tokens)}"')
    if quotient is None:
        raise FormatError(f'{path}: missing quotient line')
    group = group or symmetric_group(quotient.n)
    twist = twist or Permutation.identity(quotient.n)
    labelling = twisted_lift(quotient, twist)
    td = ThetaData(quotient, tree, [name for name, _ in basis], labelling, [f for _, f in basis], group)
    return td, twist


def write_theta(td: ThetaData, path: str, quotient_file: str, twist: Permutation = None, group_file: str = None):
    lines = [f'quotient {quotient_file}']
    if group_file:
        lines.append(f'group {group_file}')
    if td.tree_arcs:
        lines.append('tree ' + ' '.join(td.tree_arcs))
    lines += [f'basis {name} {_one_line(f)}' for name, f in zip(td.basis_arcs, td.values)]
    if twist is not None:
        lines.append(f'twist {_one_line(twist)}')
    _write(path, lines)


# fins

def fin_lines(fc: FinComplexBall) -> list[str]:
    """
    Ordered by label path; at each vertex its chains by label, then its fins by group element.
    """
    l = fc.l
    lines = []
    for v in sorted(fc.tree_vertices(), key=l.label_path):
        path = format_path(l.label_path(v))
        lines.append(f'basevertex {path}')
        if l.is_internal(v):
            children = sorted(l.label(v, a) for a in range(1, fc.n + 1) if not v or a != l.frame.back(v))
            lines += [f'chain {path} {lab} {fc.n}' for lab in children]
            for fin in fc.fins_at(v):
                labels = ' '.join(str(l.label(v, a)) for a in fin.attachments)
                lines.append(f'fin {path} {_one_line(fin.f)} : {labels}')
    return lines


def write_fins(fc: FinComplexBall, path: str):
    _write(path, fin_lines(fc))
