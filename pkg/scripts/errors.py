"""
Error types for the contextuality toolkit.
Every error carries a short code and a recovery hint; the CLI turns
them into exit codes.
"""


class ContextualityError(Exception):
    """Base exception for toolkit errors."""

    exit_code = 2

    def __init__(self, message: str, code: str = "UNKNOWN", recovery: str = ""):
        self.message = message
        self.code = code
        self.recovery = recovery
        super().__init__(message)


class KernelStructureError(ContextualityError):
    """Raised when a kernel table does not match its state/context sets."""

    def __init__(self, message: str, recovery: str = ""):
        super().__init__(
            message,
            code="KERNEL_STRUCTURE",
            recovery=recovery or "prob must be indexed [context][source][target]",
        )


class InvalidKernelError(ContextualityError):
    """Raised when a kernel has rows that are not probability distributions."""

    def __init__(self, message: str, violations=None):
        super().__init__(
            message,
            code="KERNEL_INVALID",
            recovery="Run kernel-validate to list the offending rows",
        )
        self.violations = list(violations or [])


class UnknownIdError(ContextualityError):
    """Raised when a state or context label is not part of a kernel."""

    def __init__(self, message: str):
        super().__init__(message, code="UNKNOWN_ID")


class TableError(ContextualityError):
    """Raised for joint outcome tables that are not normalized."""

    def __init__(self, message: str):
        super().__init__(
            message,
            code="TABLE_INVALID",
            recovery="p_uu + p_ud + p_du + p_dd must equal 1",
        )


class ScenarioError(ContextualityError):
    """Raised for malformed Bell scenarios or out-of-range correlations."""

    def __init__(self, message: str):
        super().__init__(message, code="SCENARIO_INVALID")


class TransitionDataError(ContextualityError):
    """Raised for conditional tables that are not distributions."""

    def __init__(self, message: str):
        super().__init__(message, code="TRANSITION_DATA_INVALID")


class ContextLimitError(ContextualityError):
    """Raised when a feasibility problem would have too many contexts."""

    def __init__(self, message: str):
        super().__init__(
            message,
            code="TOO_MANY_CONTEXTS",
            recovery="Reduce the number of contexts to 12 or fewer",
        )


class GeometryError(ContextualityError):
    """Raised for non-unit vectors or epsilon outside [0, 1]."""

    def __init__(self, message: str):
        super().__init__(message, code="GEOMETRY_INVALID")


class PollConfigError(ContextualityError):
    """Raised for unusable opinion poll configurations."""

    def __init__(self, message: str):
        super().__init__(message, code="POLL_CONFIG_INVALID")


class LiarConfigError(ContextualityError):
    """Raised for sentence configurations that are not a single daisy chain."""

    def __init__(self, message: str):
        super().__init__(
            message,
            code="LIAR_CONFIG_INVALID",
            recovery='One line per sentence: "<i>: sentence <j> is <true|false>"',
        )


class GridError(ContextualityError):
    """Raised for empty or malformed time grids."""

    def __init__(self, message: str):
        super().__init__(
            message,
            code="GRID_INVALID",
            recovery="Use START:STOP:STEP, e.g. 0:10pi:pi/20",
        )


class DecompositionError(ContextualityError):
    """Raised when a spectral decomposition does not reproduce its matrix."""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message, code="DECOMPOSITION_FAILED")
