"""Exception hierarchy. Every failure the library reports is a subclass of QdbError."""


class QdbError(Exception):
    """Base class. ``witness`` carries the offending index, eigenvalue or residual when there is one."""

    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness


class NotHermitian(QdbError):
    pass


class NotSymmetricUnitary(QdbError):
    pass


class ShapeMismatch(QdbError):
    pass


class DimensionMismatch(QdbError):
    pass


class NonPositiveInput(QdbError):
    pass


class ValidationError(QdbError):
    pass


class ParseError(QdbError):
    def __init__(self, message="", line=None, column=None):
        super().__init__(message, witness=(line, column))
        self.line = line
        self.column = column


class NotHermitianMap(QdbError):
    pass


class InternalInconsistency(QdbError):
    pass


class PreconditionViolated(QdbError):
    pass


class NoUniqueState(QdbError):
    pass


class NotFaithful(QdbError):
    pass


class NotPSD(QdbError):
    pass


class NotEquivalent(QdbError):
    pass


class NotDominated(QdbError):
    pass


class NotMinimal(QdbError):
    pass


class NotCP(QdbError):
    pass


class NotUnital(QdbError):
    pass


class NotKmsSelfAdjoint(QdbError):
    pass


class NotDeltaSSelfAdjoint(QdbError):
    pass


class RealnessViolated(QdbError):
    pass


class NotSelfAdjoint(QdbError):
    pass


class TraceConditionViolated(QdbError):
    pass


class TakagiFailed(QdbError):
    pass


class MembershipFailed(QdbError):
    pass


class NotPureHamiltonian(QdbError):
    pass


class NotMinimallyDegenerate(QdbError):
    pass


class StructureViolation(QdbError):
    pass


class EqualIndices(QdbError):
    pass


class BadIndices(QdbError):
    pass


class InvalidParams(QdbError):
    pass


class OutOfRegime(QdbError):
    pass


class KmsExcluded(QdbError):
    pass
