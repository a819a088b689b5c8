"""Exception types shared across the package."""


class STCError(Exception):
    """Base class for every error raised by this package."""


class OntologyError(STCError, ValueError):
    """Malformed ontology document or illegal ontology mutation."""


class CycleDetected(OntologyError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle in concept hierarchy: " + " -> ".join(self.cycle))


class StaleCodeError(STCError):
    """Codes from different ontology generations were mixed.

    The caller must re-fetch codes (or rebuild derived structures) under the
    current generation.
    """


class ServiceValidationError(STCError, ValueError):
    def __init__(self, message, offending=()):
        self.offending = list(offending)
        super().__init__(message)


class MatchContractError(STCError, ValueError):
    """g-codes of different features were compared."""


class ClusterSpaceError(STCError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""
