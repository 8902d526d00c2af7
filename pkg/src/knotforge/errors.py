"""Exception types shared across the package."""


class KnotforgeError(Exception):
    """Base class for all package-specific errors."""


class InvalidConfig(KnotforgeError):
    """A rope state, curve, or parameter set violates its invariants."""


class SchemaError(KnotforgeError):
    """A JSON document does not match the documented schema."""


class DegenerateDiagram(KnotforgeError):
    """Planar projection could not be resolved into a clean crossing diagram."""


class InvalidMove(KnotforgeError):
    """A high-level action is not applicable to the given topological state."""


class PlanningError(KnotforgeError):
    """A planning query cannot be answered (e.g. goal beyond enumeration bound)."""


class TrainingDiverged(KnotforgeError):
    """Learner hit a non-finite loss; training cannot continue."""
