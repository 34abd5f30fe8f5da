"""
Exception hierarchy for the one-class PAD toolkit.

Every error carries the process exit code the command line reports for it.
"""

from typing import Optional


class OcPadError(Exception):
    """
    Base error. Subclasses set ``exit_code``.
    """

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(OcPadError):
    """Bad flags, config keys or hyperparameters."""

    exit_code = 2


class DataContractError(OcPadError):
    """Input data does not satisfy an operation's contract."""

    exit_code = 3


class ContractViolation(DataContractError):
    """
    Shape mismatch inside a layer chain.
    """

    def __init__(self, detail: str, layer_index: Optional[int] = None):
        if layer_index is not None:
            detail = f"layer {layer_index}: {detail}"
        super().__init__(detail)
        self.layer_index = layer_index


class FormatError(DataContractError):
    """Container, checkpoint or CSV file is malformed."""


class UndercompletenessError(DataContractError):
    """Autoencoder bottleneck is not smaller than its input."""


class NumericalError(OcPadError):
    """Non-finite loss or gradient."""

    exit_code = 4


class ConvergenceError(NumericalError):
    """
    Iterative solver stopped at its cap before reaching tolerance.
    """

    def __init__(self, detail: str, residual: float):
        super().__init__(f"{detail} (residual {residual:.3e})")
        self.residual = residual
