"""
Custom exception classes for the boundary-region optimization toolkit.
Specific exceptions let the CLI map failures to exit codes and readable diagnostics.
"""


class BcOptError(Exception):
    """Base exception for all toolkit errors"""
    pass


class ValidationError(BcOptError):
    """Raised when a parameter fails validation"""
    def __init__(self, message: str, field: str = None):
        self.message = message
        self.field = field
        super().__init__(self.message)


class ConfigError(BcOptError):
    """Raised when a run configuration cannot be loaded or violates the schema"""
    def __init__(self, message: str, key: str = None):
        self.message = message
        self.key = key
        super().__init__(self.message)


class GeometryError(BcOptError):
    """Raised for degenerate triangles, non-conforming meshes or points outside the domain"""
    pass


class TopologyError(BcOptError):
    """Raised when interface points do not describe a valid region"""
    pass


class NumericError(BcOptError):
    """Raised when non-finite values enter a computation"""
    pass


class SolvabilityError(BcOptError):
    """Raised when a linear system is singular (pure Neumann, rigid modes, resonance)"""
    pass


class SolverError(BcOptError):
    """Raised when a factorization or dense solve fails"""
    pass


class ConsistencyError(BcOptError):
    """Raised when inputs of a derivative evaluator do not belong together"""
    pass


class SingularityError(BcOptError):
    """Raised when a kernel is evaluated at coincident points"""
    pass


class AcceptanceError(BcOptError):
    """Raised when a validation suite reports failing checks"""
    def __init__(self, message: str, failed: list = None):
        self.message = message
        self.failed = failed or []
        super().__init__(self.message)
