"""
Simulation Exceptions
Clear error taxonomy for polynomial compilation, link modelling and circuit simulation.
"""


class GasGsmError(Exception):
    """Base exception for all library errors"""

    def __init__(self, message: str, component: str):
        self.message = message
        self.component = component
        super().__init__(self.message)


class VariableCountMismatchError(GasGsmError):
    """Operands or assignments disagree on the number of binary variables"""

    def __init__(self, expected: int, actual: int, component: str = "polynomial"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected {expected} variables, got {actual}", component)


class CoefficientOverflowError(GasGsmError):
    """Quantized coefficient exceeds the target integer width"""

    pass


class ConfigurationError(GasGsmError):
    """Link, search or experiment parameters violate their constraints"""

    pass


class CodebookError(ConfigurationError):
    """Activation-pattern codebook cannot be built or loaded"""

    pass


class DemappingError(GasGsmError):
    """Symbol or pattern is not part of the configured alphabet"""

    pass


class EncodingError(GasGsmError):
    """Objective compilation produced an inconsistent polynomial"""

    pass


class RegisterOverflowError(GasGsmError):
    """Value E(x) - y does not fit the two's complement register"""

    def __init__(self, message: str, m: int, component: str = "structured"):
        self.m = m
        super().__init__(message, component)


class SimulatorSizeError(GasGsmError):
    """Requested state exceeds the simulator size guard"""

    def __init__(self, message: str, n_qubits: int, limit: int, component: str = "statevector"):
        self.n_qubits = n_qubits
        self.limit = limit
        super().__init__(message, component)


class GateIndexError(GasGsmError):
    """Gate addresses a qubit outside the register"""

    pass


class ValidationFailure(GasGsmError):
    """One or more validation checks failed"""

    pass
