"""
Exception hierarchy for the memristive optimizer
"""

from typing import Optional


class MemristiveError(Exception):
    """Base exception for every failure raised by this package"""
    pass


class TopologyError(MemristiveError):
    """Graph cannot provide a usable cycle space"""

    def __init__(self, message: str, dependent_row: Optional[int] = None):
        super().__init__(message)
        self.dependent_row = dependent_row


class DimensionMismatchError(MemristiveError):
    """Vectors and matrices of inconsistent sizes were combined"""
    pass


class SingularSystemError(MemristiveError):
    """A linear solve failed or produced an unacceptable residual"""

    def __init__(self, message: str, step: Optional[int] = None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class PositivityError(MemristiveError):
    """Interaction matrix violates the positivity needed by the dynamics"""

    def __init__(self, message: str, max_admissible_xi: float):
        super().__init__(f"{message} (largest admissible xi: {max_admissible_xi:.6g})")
        self.max_admissible_xi = max_admissible_xi


class PortfolioFormatError(MemristiveError):
    """Portfolio file does not follow the benchmark text format"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ScalingFitError(MemristiveError):
    """Not enough distinct sizes to fit a power law"""
    pass


class ConfigError(MemristiveError):
    """Invalid experiment or call configuration"""

    def __init__(self, message: str, field_path: Optional[str] = None):
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)
        self.field_path = field_path
