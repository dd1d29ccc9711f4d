from typing import Sequence

from arborlat.ballmap import ComposedMap, DeckMap, RestrictedMap
from arborlat.enums import Conclusion
from arborlat.labelled import OrbitStructure, lift, validate_labelling, build_two_vertex_quotient
from arborlat.lattices import build_X, build_Xprime, canonical_F240, canonical_F120, plus60_equivariant, \
    deck_move_arc, BLOCK
from arborlat.permkernel import Permutation, PermGroup, composition_factors, quotient, regular_a5, cyclic_group
from arborlat.schemas import ObstructionVerdict, ProofTranscript
from arborlat.settings import settings
from arborlat.universal import extend, is_member
from arborlat.utils import logger


def factor_obstruction(f1: PermGroup, f2: PermGroup) -> ObstructionVerdict:
    c1 = composition_factors(f1)
    c2 = composition_factors(f2)
    equal = c1 == c2
    if equal:
        return ObstructionVerdict(f1_factors=c1, f2_factors=c2, equal=True,
                                  conclusion=Conclusion.no_obstruction,
                                  explanation=f'factors agree: {c1}')
    return ObstructionVerdict(f1_factors=c1, f2_factors=c2, equal=False,
                              conclusion=Conclusion.no_common_overlattice,
                              explanation=f'factors differ: {c1} vs {c2}')


def chain_identity_check(g: PermGroup, k: PermGroup, expected: PermGroup) -> bool:
    """
    c(G) = c(K) + c(G/K), and G/K has the composition factors of the expected quotient.
    """
    q = quotient(g, k)
    cq = composition_factors(q)
    ok = composition_factors(g) == composition_factors(k) + cq and cq == composition_factors(expected)
    logger.debug(f'Chain identity for |G|={g.order}, |K|={k.order}: {ok}')
    return ok


class _DeskCheck:
    """
    The finite steps of the argument that the lattices of X and X' have no common overlattice,
    carried out on the radius-r balls of their lifts.
    """
    def __init__(self, radius: int, samples: Sequence[int]):
        self.radius = radius
        self.samples = list(samples)
        self.transcript = ProofTranscript(
            title=f'no-common-overlattice radius={radius}',
            scope='finite constructive steps on the radius ball and the composition-factor obstruction; '
                  'the statement about all uniform lattices is not machine-checked')
        self.group, self.os = canonical_F240()

    def run(self) -> ProofTranscript:
        t = self.transcript
        r = self.radius

        logger.stage('Building X, X\' and F = A_5 x C_60')
        x_graph, xp_graph = build_X(), build_Xprime()
        t.check('1a', 'X is tau-legal', validate_labelling(x_graph, self.os).ok)
        t.check('1b', "X' is tau-legal", validate_labelling(xp_graph, self.os).ok)
        t.check('1c', 'F is generated on 240 points with order 3600', self.group.order == 3600,
                f'|F|={self.group.order}')
        self.l = lift(x_graph, radius=r)
        self.lp = lift(xp_graph, radius=r)
        t.check('1d', 'lifts are tau-legal on the ball',
                validate_labelling(self.l, self.os).ok and validate_labelling(self.lp, self.os).ok,
                f'radius={r}')

        logger.stage('Aligning the lift of X\' with the lift of X')
        self.g, family = extend(self.l, self.lp, (), (), Permutation.identity(self.l.n), self.group, r, lazy=True)
        self.lpp = self.lp.pullback(self.g).with_radius(r)
        related = self.l.relabelled(family.assignments)
        internal = self.l.internal_vertices()
        t.check('2', "l'' = l' o g = (f_x) o l with f_x in F",
                all(related.labels(v) == self.lpp.labels(v) for v in internal),
                f'vertices={len(internal)}')

        logger.stage('Moving e_181 to e_182 inside Lambda')
        self.f_inv = family[()].inverse
        self._mover('', 181)

        for lab in self.samples:
            if lab == 181:
                continue
            self._mover(f'8.{lab}', lab)

        t.check('L1', 'arcs at x with l-label in block 1 have reverse label in block 2',
                all(self.os.block_of(self.l.reverse_label((), a)) == '2'
                    for a in range(1, self.l.n + 1) if self.os.block_of(self.l.label((), a)) == '1'))

        logger.stage('Comparing composition factors of A_5 and C_60')
        verdict = factor_obstruction(regular_a5(), cyclic_group(60))
        t.check('9', 'A_5 and C_60 have different composition factors',
                verdict.conclusion == Conclusion.no_common_overlattice, verdict.explanation)
        self.verdict = verdict
        t.conclusion = verdict.conclusion
        return t

    def _mover(self, prefix: str, i: int):
        """
        Build lambda = gamma'' gamma^-1 fixing x with lambda(e_i) = e_{i+1}. Step ids without a
        prefix are the main chain; sampled labels repeat it under 8.<i>.
        """
        t, l, lpp, g = self.transcript, self.l, self.lpp, self.g
        frame = l.frame
        c = i - BLOCK
        sid = (lambda s: s) if not prefix else (lambda s: f'{prefix}.{s}')

        e_c = lpp.address((), c)
        w = frame.step((), e_c)
        bar_c = frame.back(w)
        e_i, e_next = lpp.address((), i), lpp.address((), i + 1)

        t.check(sid('3'), f"l''(bar e_{c}) = {i + 1}", lpp.label(w, bar_c) == i + 1,
                f"l''(bar e_{c})={lpp.label(w, bar_c)}")

        gamma_p = deck_move_arc(self.lp, (g.image(w), g.arc_image(w, bar_c)), ((), g.arc_image((), e_next)))
        gamma_pp = ComposedMap(g.inverse(), ComposedMap(DeckMap(self.lp, gamma_p.endpoint(self.lp)), g))
        t.check(sid('4'), f"gamma''(bar e_{c}) = e_{i + 1}",
                gamma_pp.image(w) == () and gamma_pp.arc_image(w, bar_c) == e_next, f'word={gamma_p}')

        f = self.f_inv
        t.check(sid('5a'), f"l(bar e_{c}) = f'_x({c}) + 60", l.label(w, bar_c) == f(c) + BLOCK,
                f"l(bar e_{c})={l.label(w, bar_c)} f'_x({c})={f(c)}")
        t.check(sid('5b'), f"f'_x({c}) + 60 = f'_x({i})", f(c) + BLOCK == f(i) and plus60_equivariant(self.group),
                f"f'_x({i})={f(i)}")
        t.check(sid('5c'), f"f'_x({i}) = l(e_{i})", f(i) == l.label((), e_i), f'l(e_{i})={l.label((), e_i)}')

        gamma = deck_move_arc(l, (w, bar_c), ((), e_i))
        gamma_map = DeckMap(l, gamma.endpoint(l))
        t.check(sid('6'), f'gamma(bar e_{c}) = e_{i}',
                gamma_map.image(w) == () and gamma_map.arc_image(w, bar_c) == e_i, f'word={gamma}')

        lam = ComposedMap(gamma_pp, gamma_map.inverse())
        t.check(sid('7'), f'lambda fixes x and maps e_{i} to e_{i + 1}',
                lam.image(()) == () and lam.arc_image((), e_i) == e_next,
                f'lambda(e_{i})=/{lam.arc_image((), e_i)}')
        if not prefix:
            ok, witness = is_member(RestrictedMap(lam, l), self.group, l, l)
            t.check('7m', 'lambda lies in U(F) on the ball', ok, '' if ok else f'witness={witness}')


def main_theorem_desk_check(radius: int = 2, full_sweep: bool = False,
                            samples: Sequence[int] = None) -> ProofTranscript:
    if radius < 2:
        raise ValueError('The desk check needs radius >= 2')
    if full_sweep:
        samples = range(4 * BLOCK - 59, 4 * BLOCK)
    elif samples is None:
        samples = settings.SAMPLE_LABELS
    bad = [i for i in samples if not 3 * BLOCK + 1 <= i <= 4 * BLOCK - 1]
    if bad:
        raise ValueError(f'Sample labels must lie in 181..239: {bad}')
    check = _DeskCheck(radius, samples)
    transcript = check.run()
    logger.info(f'Desk check finished with {len(transcript.steps)} steps')
    return transcript


def edge_orbit_report(os: OrbitStructure) -> list[str]:
    """
    Geometric edges fall into one orbit per pair {i, tau(i)} of blocks.
    """
    pairs = sorted({tuple(sorted((i, j), key=lambda b: min(os.blocks[b]))) for i, j in os.tau.items()},
                   key=lambda p: min(os.blocks[p[0]]))
    lines = [f'edge-orbits {len(pairs)}']
    lines += [f'edge-orbit {i}-{j}' for i, j in pairs]
    return lines


def fewerorbits_check() -> tuple[ObstructionVerdict, list[str]]:
    """
    F = A_5 x C_60 on 120 points: one orbit of geometric edges in U(F), but no uniform lattice
    is transitive on both parts.
    """
    group, os = canonical_F120()
    sizes = [len(os.blocks[b]) for b in os.block_ids()]
    quotient_graph = build_two_vertex_quotient(os)
    report = validate_labelling(quotient_graph, os)
    verdict = factor_obstruction(regular_a5(), cyclic_group(60))
    lines = [f'order {group.order}',
             f'omega-sizes {" ".join(map(str, sizes))}',
             f'omega-equal {str(len(set(sizes)) == 1).lower()}',
             f'quotient-valid {str(report.ok).lower()}']
    lines += edge_orbit_report(os)
    lines.append('transitive-on-both-parts ' +
                 ('excluded' if verdict.conclusion == Conclusion.no_common_overlattice else 'open'))
    if not report.ok:
        logger.warning(f'Two-vertex quotient fails validation: {report.violations[0].render()}')
    return verdict, lines
