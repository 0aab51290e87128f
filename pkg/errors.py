"""Exception hierarchy. `exit_code` is what the CLI returns for each failure class."""


class TeleprobeError(Exception):
    exit_code = 1


class ArgumentError(TeleprobeError, ValueError):
    exit_code = 2


class DiagonalElementError(ArgumentError):
    def __init__(self, message="diagonal element: use populations"):
        super().__init__(message)


class ResourceError(TeleprobeError):
    exit_code = 2


class NumericalIntegrityError(TeleprobeError):
    exit_code = 3


class DegenerateStateError(TeleprobeError):
    exit_code = 3


class UnmeasurableElementError(TeleprobeError):
    exit_code = 4


class InsufficientStatisticsError(TeleprobeError):
    exit_code = 4

    def __init__(self, message, accepted_shots=0):
        super().__init__(message)
        self.accepted_shots = accepted_shots
