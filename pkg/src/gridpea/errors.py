"""Exception types shared across the toolkit."""


class GridPeaError(Exception):
    """Base class for all toolkit errors."""


class CaseValidationError(GridPeaError):
    """A case document failed validation."""


class CaseSchemaError(CaseValidationError):
    """Malformed case document: missing keys, bad types, out-of-range values."""


class DuplicateIdError(CaseValidationError):
    """Bus or line ids are duplicated."""


class SlackBusError(CaseValidationError):
    """The case does not define exactly one slack bus."""


class DisconnectedGraphError(CaseValidationError):
    """The in-service line graph does not connect all buses."""


class UnknownLineError(GridPeaError):
    """A line id does not exist in the network."""


class OutageError(GridPeaError):
    """An outage request is invalid (line already out of service)."""


class PowerFlowError(GridPeaError):
    """Power-flow solution failure."""


class NonConvergenceError(PowerFlowError):
    """Newton iteration did not reach the mismatch tolerance."""

    def __init__(self, message, final_mismatch=None):
        super().__init__(message)
        self.final_mismatch = final_mismatch


class SingularJacobianError(PowerFlowError):
    """The power-flow Jacobian became singular."""


class FaultModelError(GridPeaError):
    """Invalid operation on the phase-domain fault model."""


class WindowError(GridPeaError):
    """Measurement-window shape or content problem."""


class ScenarioError(GridPeaError):
    """Invalid event-scenario or attack specification."""


class SchemaMismatchError(GridPeaError):
    """Feature vector does not match the schema a model was trained on."""


class DatasetError(GridPeaError):
    """Dataset file is malformed or inconsistent."""


class TrainingError(GridPeaError):
    """Model training failed."""


class SmoConvergenceError(TrainingError):
    """SMO did not satisfy the KKT conditions within the pass budget."""

    def __init__(self, message, kkt_violation=None):
        super().__init__(message)
        self.kkt_violation = kkt_violation


class DivergenceError(TrainingError):
    """Network training loss became non-finite."""
