"""Exception hierarchy shared by every package."""


class GlnError(Exception):
    """Base class for all errors raised by this project."""


class DimensionError(GlnError, ValueError):
    """Operand shapes are incompatible."""


class ContractError(GlnError):
    """A caller broke a documented precondition."""


class InvalidAdjacencyError(GlnError, ValueError):
    """Adjacency matrix is negative or not symmetric."""


class InvalidLabelError(GlnError, ValueError):
    """Ground-truth adjacency is not binary."""


class ConfigError(GlnError):
    """Experiment configuration or inputs are inconsistent."""


class DatasetError(GlnError):
    """Dataset file or sample is malformed."""


class TrainingDivergedError(GlnError):
    """Loss became NaN during training."""

    def __init__(self, epoch, sample_index, message=None):
        self.epoch = epoch
        self.sample_index = sample_index
        super().__init__(message or f"NaN loss at epoch {epoch}, sample {sample_index}")
