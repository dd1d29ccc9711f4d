import os
import sys

import click

from arborlat import formats
from arborlat.app import app
from arborlat.exceptions import ArborlatException, VerificationFailed
from arborlat.fins import build_fins, check_square_links, extend_to_fins, fin_rigidity_check, \
    fins_correspondence_count, fixed_radius_contraction
from arborlat.labelled import OrbitStructure, lift, random_tau_legal, validate_labelling
from arborlat.lattices import build_X, build_Xprime, canonical_F120, canonical_F240, find_color_conjugator, \
    lambda_element, psi, theta_relabel, toy_theta_data, toy_twist
from arborlat.obstruction import factor_obstruction, fewerorbits_check, main_theorem_desk_check
from arborlat.permkernel import Permutation, composition_factors, cyclic_group, regular_a5, symmetric_group
from arborlat.settings import settings
from arborlat.universal import check_family, enumerate_ball_stabilizer, extend, is_member, \
    predicted_stabilizer_count, sigma_surjectivity_check
from arborlat.utils import configure_logging, format_path, logger, parse_path


class VertexPath(click.ParamType):
    name = 'vertex'

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            return parse_path(value)
        except ValueError as ex:
            self.fail(str(ex), param, ctx)


class PermutationParam(click.ParamType):
    """
    One-line notation, blank or comma separated, optionally in parentheses.
    """
    name = 'permutation'

    def convert(self, value, param, ctx):
        if isinstance(value, Permutation):
            return value
        try:
            return Permutation.parse(value)
        except ValueError as ex:
            self.fail(str(ex), param, ctx)


VERTEX = VertexPath()
PERMUTATION = PermutationParam()
existing = click.Path(exists=True, dir_okay=False)


def _flag(ok: bool) -> str:
    return str(ok).lower()


def _one_line(p: Permutation) -> str:
    return ' '.join(map(str, p.images))


@click.group()
@click.option('--seed', type=int, envvar='ARBORLAT_SEED', help='Seed for every seeded operation')
@click.option('--cap-vertices', type=int, envvar='ARBORLAT_CAP_VERTICES', help='Materialization ceiling')
@click.option('--cap-group', type=int, envvar='ARBORLAT_CAP_GROUP', help='Largest group order enumerated')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default=None, help='Level of the stderr log sink')
def cli(seed, cap_vertices, cap_group, log_level):
    """
    Universal groups of labelled trees, their lattices and trees with fins.
    """
    if not settings.TEST:
        configure_logging(log_level)
    app.configure(seed, cap_vertices, cap_group)


@cli.command()
@click.option('--graph', type=existing, help='Labelled graph (.lg)')
@click.option('--ball', type=existing, help='Tree ball (.tb)')
@click.option('--orbits', type=existing, required=True, help='Orbit structure (.os)')
def validate(graph, ball, orbits):
    """
    Check local bijectivity and the tau condition.
    """
    if (graph is None) == (ball is None):
        raise click.UsageError('Give exactly one of --graph and --ball')
    app.command('validate', graph=graph, ball=ball, orbits=orbits)
    os_ = app.orbit_structure(orbits)
    obj = formats.read_graph(graph) if graph else app.ball(ball)
    report = validate_labelling(obj, os_)
    app.emit(report.render())
    return 0 if report.ok else 1


@cli.command('lift')
@click.option('--graph', type=existing, required=True)
@click.option('--base', default=None, help='Graph vertex the root projects to')
@click.option('--radius', type=int, required=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True)
def lift_command(graph, base, radius, out):
    """
    Write the radius ball of the universal cover of a labelled graph.
    """
    app.command('lift', radius=radius, output=out, graph=graph, base=base)
    ball = lift(formats.read_graph(graph), base=base, radius=radius)
    formats.write_ball(ball, out)
    app.emit(f'vertices {len(ball.vertices())}')
    return 0


@cli.command('extend')
@click.option('--dom', type=existing, required=True, help='Domain ball (.tb)')
@click.option('--cod', type=existing, required=True, help='Codomain ball (.tb)')
@click.option('--group', type=existing, required=True, help='Group (.pg)')
@click.option('--f0', type=PERMUTATION, default=None, help='Local action at the root, identity by default')
@click.option('--radius', type=int, required=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Ball map (.bm)')
def extend_command(dom, cod, group, f0, radius, out):
    """
    Extend f0 at the root to a map between the balls related by a family in the group.
    """
    app.command('extend', radius=radius, output=out, dom=dom, cod=cod, group=group, f0=f0)
    l_dom, l_cod, grp = app.ball(dom), app.ball(cod), app.group(group)
    f0 = f0 or Permutation.identity(l_dom.n)
    g, family = extend(l_dom, l_cod, (), (), f0, grp, radius)
    for v, f in sorted(family.items(), key=lambda t: (len(t[0]), t[0])):
        app.emit(f'f {format_path(v)} {_one_line(f)}')
    ok = check_family(g, family, l_dom, l_cod)
    app.emit(f'family-check {_flag(ok)}')
    if out:
        formats.write_ballmap(g, out)
    return 0 if ok else 1


@cli.command('sigma-check')
@click.option('--ball', type=existing, required=True)
@click.option('--vertex', type=VERTEX, default='/')
@click.option('--group', type=existing, required=True)
def sigma_check(ball, vertex, group):
    """
    Every group element is the local action at the vertex of some extension fixing it.
    """
    app.command('sigma-check', ball=ball, vertex=format_path(vertex), group=group)
    ok = sigma_surjectivity_check(app.ball(ball), vertex, app.group(group))
    app.emit(f'sigma-surjective {_flag(ok)}')
    return 0 if ok else 1


@cli.command()
@click.option('--ball', type=existing, required=True)
@click.option('--vertex', type=VERTEX, default='/')
@click.option('--group', type=existing, required=True)
@click.option('--radius', type=int, required=True)
@click.option('--cap', type=int, default=None, help='Refuse enumerations predicted above this size')
def stabilizer(ball, vertex, group, radius, cap):
    """
    Predict and enumerate the automorphisms of the radius ball fixing the vertex.
    """
    app.command('stabilizer', radius=radius, ball=ball, vertex=format_path(vertex), group=group, cap=cap)
    l, grp = app.ball(ball), app.group(group)
    predicted = predicted_stabilizer_count(l, vertex, grp, radius)
    app.emit(f'predicted {predicted}')
    count = len(enumerate_ball_stabilizer(l, vertex, grp, radius, cap=cap))
    app.emit(f'count {count}')
    return 0 if count == predicted else 1


@cli.command('lambda')
@click.option('--ball', type=existing, required=True)
@click.option('--vertex', type=VERTEX, default='/')
@click.option('--group', type=existing, required=True)
@click.option('--f', 'f', type=PERMUTATION, required=True, help='Local action of the element')
@click.option('--radius', type=int, required=True)
def lambda_command(ball, vertex, group, f, radius):
    """
    Build the element fixing the vertex with local action f everywhere and read it back.
    """
    app.command('lambda', radius=radius, ball=ball, vertex=format_path(vertex), group=group, f=_one_line(f))
    l, grp = app.ball(ball), app.group(group)
    g = lambda_element(l, vertex, f, radius)
    member, witness = is_member(g, grp, l, l)
    value = psi(g, l, grp) if member else None
    app.emit(f'member {_flag(member)}' + ('' if member else f' witness {witness}'))
    if value is not None:
        app.emit(f'psi {_one_line(value)}')
    return 0 if value == f else 1


@cli.command('psi')
@click.option('--ball', type=existing, required=True)
@click.option('--map', 'map_', type=existing, required=True, help='Ball map (.bm)')
@click.option('--group', type=existing, required=True)
def psi_command(ball, map_, group):
    """
    The common local action of a map with uniform local actions.
    """
    app.command('psi', ball=ball, map=map_, group=group)
    l = app.ball(ball)
    g = formats.read_ballmap(map_, l, l)
    app.emit(f'psi {_one_line(psi(g, l, app.group(group)))}')
    return 0


@cli.command()
@click.option('--theta', type=existing, required=True, help='Relabelling data (.td)')
@click.option('--radius', type=int, default=3)
def relabel(theta, radius):
    """
    Relabel a legal labelling equivariantly, recover the colour conjugator and read the local
    actions of the basis generators.
    """
    app.command('relabel', radius=radius, theta=theta)
    td, _ = formats.read_theta(theta)
    lp = theta_relabel(td, radius)
    app.emit('legal true\nequivariance true\nfamily true')
    find_color_conjugator(td.labelling, lp, radius)
    app.emit('conjugator true')

    # a generator moving the root by d steps has internal vertices only on balls of radius > d
    reach = max(len(td.generator_endpoint(name)) for name in td.basis_arcs) if td.basis_arcs else 0
    lpg = lp if radius > reach else theta_relabel(td, reach + 1)
    ok = True
    for name, (gmap, f) in zip(td.basis_arcs, td.generator_maps(lpg)):
        member, witness = is_member(gmap, td.group, lpg, lpg)
        value = psi(gmap, lpg, td.group) if member else None
        ok = ok and value == f
        app.emit(f'generator {name} member {_flag(member)} psi {_one_line(value) if value is not None else "-"} '
                 f'theta {_one_line(f)}' + ('' if member else f' witness {witness}'))
    return 0 if ok else 1


@cli.command()
@click.option('--group', type=existing, required=True)
@click.option('--strict', is_flag=True, help='Fail on nonabelian simple factors without a name')
def factors(group, strict):
    """
    Composition factors of a permutation group.
    """
    app.command('factors', group=group)
    grp = app.group(group)
    app.emit(f'order {grp.order}')
    app.emit(f'factors {composition_factors(grp, strict=strict)}')
    return 0


@cli.command()
@click.option('--f1', type=existing, required=True)
@click.option('--f2', type=existing, required=True)
def obstruction(f1, f2):
    """
    Compare composition factors: different factors rule out a common overlattice.
    """
    app.command('obstruction', f1=f1, f2=f2)
    app.emit(factor_obstruction(app.group(f1), app.group(f2)).render())
    return 0


@cli.command('thm-main')
@click.option('--radius', type=int, default=2)
@click.option('--full-sweep', is_flag=True, help='Repeat the label move for every label 181..239')
def thm_main(radius, full_sweep):
    """
    Desk check that the lattices of X and X' have no common overlattice.
    """
    app.command('thm-main', radius=radius, full_sweep=full_sweep or None)
    transcript = main_theorem_desk_check(radius, full_sweep=full_sweep)
    app.emit(transcript.render())
    app.emit(f'conclusion {transcript.conclusion.value}')
    return 0 if transcript.accepted else 1


@cli.command('example-120')
def example_120():
    """
    A_5 x C_60 on 120 points: one edge orbit for U(F), yet no lattice transitive on both parts.
    """
    app.command('example-120')
    verdict, lines = fewerorbits_check()
    app.emit('\n'.join(lines))
    app.emit(verdict.render())
    return 0


@cli.command('fins-build')
@click.option('--ball', type=existing, required=True)
@click.option('--orbits', type=existing, default=None)
@click.option('--group', type=existing, required=True)
@click.option('--radius', type=int, required=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Fin complex (.fx)')
def fins_build(ball, orbits, group, radius, out):
    """
    Attach one fin per group element at every internal vertex.
    """
    app.command('fins-build', radius=radius, output=out, ball=ball, orbits=orbits, group=group)
    fc = build_fins(app.ball(ball, orbits), app.group(group), radius)
    if out:
        formats.write_fins(fc, out)
    else:
        app.emit('\n'.join(formats.fin_lines(fc)))
    links = check_square_links(fc)
    app.emit(f'fins {fc.fin_count}\nchains {fc.chain_count}\nunit-edges {fc.unit_edge_count()}')
    app.emit(f'square-links {_flag(links)}')
    return 0 if links else 1


@cli.command('fins-extend')
@click.option('--ball', type=existing, required=True)
@click.option('--group', type=existing, required=True)
@click.option('--radius', type=int, required=True)
@click.option('--f0', type=PERMUTATION, required=True)
def fins_extend(ball, group, radius, f0):
    """
    Extend a stabilizer element over the fins and check both distance bounds.
    """
    app.command('fins-extend', radius=radius, ball=ball, group=group, f0=_one_line(f0))
    l, grp = app.ball(ball), app.group(group)
    fc = build_fins(l, grp, radius)
    g, family = extend(l, l, (), (), f0, grp, radius)
    finmap = extend_to_fins(fc, fc, g, family)
    moved = sum(1 for (x, f), target in finmap.assignment.items() if target != (x, f))
    contraction = fixed_radius_contraction(fc, finmap)
    app.emit(f'fin-map {len(finmap.assignment)}\nmoved-fins {moved}\ncontraction {_flag(contraction)}')
    return 0 if contraction else 1


@cli.command('fins-rigidity')
@click.option('--ball', type=existing, required=True)
@click.option('--group', type=existing, required=True)
@click.option('--vertex', type=VERTEX, default='/')
def fins_rigidity(ball, group, vertex):
    """
    Fins at a vertex are determined by their attachment arcs.
    """
    app.command('fins-rigidity', ball=ball, group=group, vertex=format_path(vertex))
    l = app.ball(ball)
    fc = build_fins(l, app.group(group), len(vertex) + 1)
    ok = fin_rigidity_check(fc, vertex)
    app.emit(f'rigid {_flag(ok)}')
    return 0 if ok else 1


@cli.command('fins-count')
@click.option('--ball', type=existing, required=True)
@click.option('--group', type=existing, required=True)
@click.option('--radius', type=int, required=True)
def fins_count(ball, group, radius):
    """
    Ball stabilizer elements against the distinct fin maps extending them.
    """
    app.command('fins-count', radius=radius, ball=ball, group=group)
    members, maps = fins_correspondence_count(app.ball(ball), app.group(group), radius)
    app.emit(f'stabilizer {members}\nfin-maps {maps}')
    return 0 if members == maps else 1


@cli.command()
@click.option('--out', type=click.Path(file_okay=False), required=True)
def fixtures(out):
    """
    Write the canonical graphs, orbit structures, groups and a toy relabelling.
    """
    app.command('fixtures', output=out)
    os.makedirs(out, exist_ok=True)
    def path(name):
        return os.path.join(out, name)

    f240, os240 = canonical_F240()
    f120, os120 = canonical_F120()
    formats.write_graph(build_X(), path('X.lg'))
    formats.write_graph(build_Xprime(), path('Xprime.lg'))
    formats.write_orbits(os240, path('os240.os'))
    formats.write_orbits(os120, path('os120.os'))
    formats.write_group(f240, path('F240.pg'))
    formats.write_group(f120, path('F120.pg'))
    formats.write_group(regular_a5(), path('A5.pg'))
    formats.write_group(cyclic_group(60), path('C60.pg'))
    s3 = symmetric_group(3)
    formats.write_group(s3, path('S3.pg'))
    formats.write_group(symmetric_group(4), path('S4.pg'))

    td = toy_theta_data()
    formats.write_graph(td.quotient, path('toy.lg'))
    formats.write_theta(td, path('toy.td'), 'toy.lg', twist=toy_twist())
    os3 = OrbitStructure.from_group(s3)
    formats.write_orbits(os3, path('toy3.os'))
    # a legal ball is tau-legal for the single S_3 block as well
    formats.write_ball(random_tau_legal(OrbitStructure.discrete(3), 2), path('toy3.tb'))

    names = sorted(os.listdir(out))
    logger.info(f'Wrote {len(names)} fixtures to {out}')
    app.emit('\n'.join(f'wrote {name}' for name in names))
    return 0


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name='arborlat', standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Exit as ex:
        return ex.exit_code
    except click.ClickException as ex:
        ex.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except VerificationFailed as ex:
        if ex.transcript is not None:
            app.emit(ex.transcript.render())
        logger.error(f'Verification failed at step {ex.step}: {ex.msg}')
        return ex.status_code
    except ArborlatException as ex:
        logger.error(ex.msg)
        return ex.status_code
    except ValueError as ex:
        logger.error(str(ex))
        return 2
    except Exception as ex:
        logger.exception(ex)
        return 1


if __name__ == '__main__':
    sys.exit(main())
