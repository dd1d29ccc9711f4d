from typing import Optional

from pydantic import BaseModel, root_validator

from arborlat.enums import ViolationKind, StepStatus, Conclusion
from arborlat.exceptions import VerificationFailed
from arborlat.permkernel import FactorMultiset


class Violation(BaseModel):
    kind: ViolationKind
    where: str
    detail: str

    def render(self) -> str:
        return f'violation {self.kind.value} {self.where} {self.detail}'


class ValidationReport(BaseModel):
    violations: list[Violation] = []

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[ViolationKind]:
        return {v.kind for v in self.violations}

    def add(self, kind: ViolationKind, where: str, detail: str):
        self.violations.append(Violation(kind=kind, where=where, detail=detail))

    def render(self) -> str:
        lines = [f'valid {str(self.ok).lower()}', f'violations {len(self.violations)}']
        lines += [v.render() for v in self.violations]
        return '\n'.join(lines)


class TranscriptStep(BaseModel):
    id: str
    status: StepStatus
    statement: str
    values: str = ''

    @property
    def passed(self) -> bool:
        return self.status == StepStatus.passed

    def render(self) -> str:
        return f'step {self.id} {self.status.value} {self.statement} {self.values}'.rstrip()


class ProofTranscript(BaseModel):
    title: str
    scope: str = ''
    steps: list[TranscriptStep] = []
    conclusion: Optional[Conclusion] = None

    @property
    def accepted(self) -> bool:
        return bool(self.steps) and all(s.passed for s in self.steps)

    def check(self, id: str, statement: str, ok: bool, values: str = '') -> TranscriptStep:
        """
        Record a step. A failed step is recorded and then aborts the run.
        """
        step = TranscriptStep(id=id, status=StepStatus.passed if ok else StepStatus.failed,
                              statement=statement, values=values)
        self.steps.append(step)
        if not ok:
            raise VerificationFailed(f'Step {id} failed: {statement} {values}'.rstrip(), step=id, transcript=self)
        return step

    def step(self, id: str) -> Optional[TranscriptStep]:
        for s in self.steps:
            if s.id == id:
                return s
        return None

    def render(self) -> str:
        lines = [f'transcript {self.title}']
        if self.scope:
            lines.append(f'scope {self.scope}')
        lines += [s.render() for s in self.steps]
        lines.append(f'result {"PASS" if self.accepted else "FAIL"}')
        return '\n'.join(lines)


class ObstructionVerdict(BaseModel):
    f1_factors: FactorMultiset
    f2_factors: FactorMultiset
    equal: bool
    conclusion: Conclusion
    explanation: str = ''

    class Config:
        arbitrary_types_allowed = True
        json_encoders = {FactorMultiset: str}

    @root_validator(skip_on_failure=True)
    def conclusion_matches(cls, values):
        expected = Conclusion.no_obstruction if values['equal'] else Conclusion.no_common_overlattice
        if values['conclusion'] != expected:
            raise ValueError(f'conclusion {values["conclusion"].value} contradicts equal={values["equal"]}')
        return values

    def render(self) -> str:
        lines = [f'f1 {self.f1_factors}',
                 f'f2 {self.f2_factors}',
                 f'equal {str(self.equal).lower()}',
                 f'conclusion {self.conclusion.value}']
        if self.explanation:
            lines.append(f'report {self.explanation}')
        return '\n'.join(lines)


class CommandConfig(BaseModel):
    subcommand: str
    inputs: dict[str, str] = {}
    radius: Optional[int] = None
    seed: int = 0
    cap_vertices: Optional[int] = None
    cap_group: Optional[int] = None
    output: Optional[str] = None

    @root_validator(skip_on_failure=True)
    def radius_positive(cls, values):
        if values.get('radius') is not None and values['radius'] < 1:
            raise ValueError('radius must be at least 1')
        return values
