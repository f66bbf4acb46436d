"""Exception types raised by the simulator.

Every error carries a stable ``code`` string so the command line can report
failures as a single machine-readable line.
"""

from __future__ import annotations


class SimulationError(Exception):
    code = "SimulationError"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def as_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        out.update({k: v for k, v in self.details.items()})
        return out


class EmptySignal(SimulationError):
    code = "EmptySignal"


class ZeroPower(SimulationError):
    code = "ZeroPower"


class PartialSymbol(SimulationError):
    code = "PartialSymbol"


class InvalidConfig(SimulationError):
    code = "InvalidConfig"


class IntegratorDiverged(SimulationError):
    code = "IntegratorDiverged"


class NoDcComponent(SimulationError):
    code = "NoDcComponent"


class UndersampledSource(SimulationError):
    code = "UndersampledSource"


class LengthMismatch(SimulationError):
    code = "LengthMismatch"


class UnknownPreset(SimulationError):
    code = "UnknownPreset"


class MissingSeed(SimulationError):
    code = "MissingSeed"
