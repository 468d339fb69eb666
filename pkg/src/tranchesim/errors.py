"""Exception hierarchy. Every failed operation raises one of these and leaves state untouched."""


class SimulationError(Exception):
    """Base class for every rejected operation in a simulated world."""


class LedgerError(SimulationError):
    pass


class UnknownToken(LedgerError):
    pass


class DuplicateToken(LedgerError):
    pass


class Unauthorized(LedgerError):
    pass


class InsufficientBalance(LedgerError):
    pass


class InvalidAmount(SimulationError, ValueError):
    pass


class VenueError(SimulationError):
    pass


class IlliquidVenue(VenueError):
    pass


class WrongState(SimulationError):
    """Function called outside the time window / state that permits it."""


class PolicyError(SimulationError):
    pass


class PoolError(SimulationError):
    pass


class EmptyPool(PoolError):
    pass


class RatioMismatch(PoolError):
    pass


class SlippageExceeded(PoolError):
    pass


class ConfigError(SimulationError):
    """Invalid scenario or sweep document.

    ``diagnostics`` is a list of ``(field_path, message)`` pairs.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.diagnostics]
        super().__init__("; ".join(lines))
