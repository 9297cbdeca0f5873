"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class StratoError(Exception):
    exit_code = 1


class InputError(StratoError):
    exit_code = 2


class GridError(InputError):
    pass


class InvalidParams(StratoError, ValueError):
    exit_code = 3


class StratificationUnstable(InvalidParams):
    pass


class NonPositiveBuoyancy(InvalidParams):
    pass


class UnstableJump(InvalidParams):
    pass


class ResolutionError(StratoError):
    exit_code = 3


class OperatorSingular(StratoError):
    exit_code = 3


class NumericalFailure(StratoError):
    exit_code = 4


class EigenFailure(NumericalFailure):
    pass


class MassMatrixDegenerate(NumericalFailure):
    pass


class StepFailure(NumericalFailure):
    pass


class BlowupDetected(NumericalFailure):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
