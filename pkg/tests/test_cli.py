import pytest

from arborlat.enums import Conclusion
from arborlat.exceptions import VerificationFailed
from arborlat.main import main
from arborlat.schemas import ProofTranscript
from arborlat.settings import settings


@pytest.fixture
def run(capsys):
    def run(*args):
        capsys.readouterr()
        rv = main(list(args))
        return rv, capsys.readouterr().out.splitlines()
    return run


def test_fixtures(tmp_path, run):
    rv, lines = run('fixtures', '--out', str(tmp_path))
    assert rv == 0
    assert 'wrote X.lg' in lines
    assert 'wrote toy.td' in lines
    assert len(lines) == 14


@pytest.mark.parametrize('graph', ['X.lg', 'Xprime.lg'])
def test_validate_canonical_graphs(fixture_path, run, graph):
    rv, lines = run('validate', '--graph', fixture_path(graph), '--orbits', fixture_path('os240.os'))
    assert rv == 0
    assert lines[:2] == ['valid true', 'violations 0']


def test_validate_ball(fixture_path, run):
    rv, lines = run('validate', '--ball', fixture_path('toy3.tb'), '--orbits', fixture_path('toy3.os'))
    assert rv == 0
    assert lines[0] == 'valid true'


def test_obstruction(fixture_path, run):
    rv, lines = run('obstruction', '--f1', fixture_path('A5.pg'), '--f2', fixture_path('C60.pg'))
    assert rv == 0
    assert 'conclusion NoCommonOverlattice' in lines


def test_factors(fixture_path, run):
    rv, lines = run('factors', '--group', fixture_path('C60.pg'))
    assert rv == 0
    assert lines == ['order 60', 'factors {C_2,C_2,C_3,C_5}']


def test_stabilizer(fixture_path, run):
    rv, lines = run('stabilizer', '--ball', fixture_path('toy3.tb'), '--group', fixture_path('S3.pg'),
                    '--radius', '2')
    assert rv == 0
    assert lines == ['predicted 48', 'count 48']


def test_stabilizer_cap(fixture_path, run):
    rv, _ = run('stabilizer', '--ball', fixture_path('toy3.tb'), '--group', fixture_path('S3.pg'),
                '--radius', '2', '--cap', '10')
    assert rv == 2


def test_lambda(fixture_path, run):
    rv, lines = run('lambda', '--ball', fixture_path('toy3.tb'), '--group', fixture_path('S3.pg'),
                    '--f', '2 3 1', '--radius', '2')
    assert rv == 0
    assert lines == ['member true', 'psi 2 3 1']


def test_sigma_check(fixture_path, run):
    rv, lines = run('sigma-check', '--ball', fixture_path('toy3.tb'), '--group', fixture_path('S3.pg'))
    assert rv == 0
    assert lines == ['sigma-surjective true']


def test_extend_then_psi(fixture_path, run, tmp_path):
    out = str(tmp_path / 'id.bm')
    ball, group = fixture_path('toy3.tb'), fixture_path('S3.pg')
    rv, lines = run('extend', '--dom', ball, '--cod', ball, '--group', group, '--radius', '2', '--out', out)
    assert rv == 0
    assert lines[0] == 'f / 1 2 3'
    assert lines[-1] == 'family-check true'
    rv, lines = run('psi', '--ball', ball, '--map', out, '--group', group)
    assert rv == 0
    assert lines == ['psi 1 2 3']


def test_psi_of_non_uniform_map(fixture_path, run, tmp_path):
    out = str(tmp_path / 'rot.bm')
    ball, group = fixture_path('toy3.tb'), fixture_path('S3.pg')
    assert run('extend', '--dom', ball, '--cod', ball, '--group', group, '--f0', '2 3 1', '--radius', '2',
               '--out', out)[0] == 0
    rv, _ = run('psi', '--ball', ball, '--map', out, '--group', group)
    assert rv == 1


def test_lift(fixture_path, run, tmp_path):
    rv, lines = run('lift', '--graph', fixture_path('toy.lg'), '--radius', '2', '--out', str(tmp_path / 'toy.tb'))
    assert rv == 0
    assert lines == ['vertices 17']


def test_relabel(fixture_path, run):
    rv, lines = run('relabel', '--theta', fixture_path('toy.td'))
    assert rv == 0
    assert lines[:4] == ['legal true', 'equivariance true', 'family true', 'conjugator true']
    generators = [line for line in lines if line.startswith('generator')]
    assert [line.split()[1] for line in generators] == ['e2', 'e3', 'e4']
    assert all(' member true ' in line for line in generators)


def test_example_120(run):
    rv, lines = run('example-120')
    assert rv == 0
    assert 'transitive-on-both-parts excluded' in lines
    assert lines[-1] == 'report factors differ: {A_5} vs {C_2,C_2,C_3,C_5}'


def test_fins_commands(fixture_path, run):
    ball, group = fixture_path('toy3.tb'), fixture_path('S3.pg')
    rv, lines = run('fins-build', '--ball', ball, '--orbits', fixture_path('toy3.os'), '--group', group,
                    '--radius', '1')
    assert rv == 0
    assert lines[-4:] == ['fins 6', 'chains 3', 'unit-edges 45', 'square-links true']
    assert run('fins-count', '--ball', ball, '--group', group, '--radius', '1') == (0, ['stabilizer 6', 'fin-maps 6'])
    assert run('fins-rigidity', '--ball', ball, '--group', group) == (0, ['rigid true'])
    rv, lines = run('fins-extend', '--ball', ball, '--group', group, '--radius', '2', '--f0', '2 3 1')
    assert rv == 0
    assert lines[0] == 'fin-map 24'
    assert lines[-1] == 'contraction true'


def test_fins_build_writes_file(fixture_path, run, tmp_path):
    out = tmp_path / 'toy.fx'
    rv, _ = run('fins-build', '--ball', fixture_path('toy3.tb'), '--group', fixture_path('S3.pg'),
                '--radius', '1', '--out', str(out))
    assert rv == 0
    assert out.read_text().splitlines()[0] == 'basevertex /'


def test_usage_errors(fixture_path, run):
    assert run('validate', '--orbits', fixture_path('os240.os'))[0] == 2
    assert run('no-such-command')[0] == 2
    assert run('factors', '--group', '/nonexistent/group.pg')[0] == 2
    assert run('lambda', '--ball', fixture_path('toy3.tb'), '--group', fixture_path('S3.pg'),
               '--f', '1 1 2', '--radius', '2')[0] == 2


def test_input_errors(fixture_path, run, tmp_path):
    bad = tmp_path / 'bad.pg'
    bad.write_text('degree 3\n2 1\n')
    assert run('factors', '--group', str(bad))[0] == 2
    assert run('validate', '--graph', fixture_path('X.lg'), '--orbits', fixture_path('os120.os'))[0] == 2
    assert run('lift', '--graph', fixture_path('toy.lg'), '--radius', '0', '--out', str(tmp_path / 'x.tb'))[0] == 2
    assert run('thm-main', '--radius', '1')[0] == 2


def test_failed_verification_prints_transcript(run, mocker):
    transcript = ProofTranscript(title='mock')
    transcript.check('1a', 'first', True)
    with pytest.raises(VerificationFailed) as ex:
        transcript.check('3', 'second', False)
    mocker.patch('arborlat.main.main_theorem_desk_check', side_effect=ex.value)
    rv, lines = run('thm-main')
    assert rv == 1
    assert lines == ['transcript mock', 'step 1a PASS first', 'step 3 FAIL second', 'result FAIL']


def test_thm_main_reports_recorded_conclusion(run, mocker):
    transcript = ProofTranscript(title='mock', conclusion=Conclusion.no_obstruction)
    transcript.check('9', 'factors', True)
    mocker.patch('arborlat.main.main_theorem_desk_check', return_value=transcript)
    obstruction = mocker.patch('arborlat.main.factor_obstruction')
    rv, lines = run('thm-main')
    assert rv == 0
    assert lines[-1] == 'conclusion NoObstruction'
    obstruction.assert_not_called()


def test_unexpected_error_is_logged(run, mocker):
    mocker.patch('arborlat.main.fewerorbits_check', side_effect=RuntimeError('boom'))
    log = mocker.patch('arborlat.main.logger')
    rv, _ = run('example-120')
    assert rv == 1
    log.exception.assert_called_once()


def test_seed_option(fixture_path, run):
    assert run('--seed', '7', 'factors', '--group', fixture_path('S3.pg'))[0] == 0
    assert settings.SEED == 7


@pytest.mark.slow
def test_thm_main(run):
    rv, lines = run('thm-main')
    assert rv == 0
    assert 'result PASS' in lines
    assert lines[-1] == 'conclusion NoCommonOverlattice'
