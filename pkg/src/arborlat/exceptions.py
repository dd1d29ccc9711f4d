class ArborlatException(Exception):
    """
    Base for everything the CLI turns into an exit code. Contract and input errors exit with 2,
    failed checks (invariant breaches) with 1.
    """
    default_status = 2

    def __init__(self, msg: str = None, status_code: int = None):
        super().__init__(msg)
        self.msg = msg or self.__class__.__name__
        self.status_code = status_code if status_code is not None else self.default_status

    def __str__(self):
        return self.msg


class FormatError(ArborlatException):
    pass


class DegreeMismatch(ArborlatException):
    pass


class CapExceeded(ArborlatException):
    def __init__(self, msg: str = None, predicted: int = None):
        super().__init__(msg)
        self.predicted = predicted


class BlockNotInvariant(ArborlatException):
    pass


class NotUnimodular(ArborlatException):
    pass


class VertexNotInternal(ArborlatException):
    pass


class VertexNotMaterialized(ArborlatException):
    pass


class DifferentProjection(ArborlatException):
    pass


class NotLegal(ArborlatException):
    pass


class NotInF(ArborlatException):
    pass


class BasisInvalid(ArborlatException):
    pass


class NotNormal(ArborlatException):
    pass


class FinCeiling(ArborlatException):
    pass


class UnidentifiedSimpleFactor(ArborlatException):
    pass


class InvariantBreach(ArborlatException):
    default_status = 1


class NoCandidate(InvariantBreach):
    pass


class NotUniform(InvariantBreach):
    pass


class DiagramFailure(InvariantBreach):
    pass


class VerificationFailed(InvariantBreach):
    """
    A verified step did not hold. transcript, when set, holds the steps run so far.
    """
    def __init__(self, msg: str = None, step: str = None, transcript=None):
        super().__init__(msg)
        self.step = step
        self.transcript = transcript
