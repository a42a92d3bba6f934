"""Memory helpers for sizing simulator state before allocating it."""

import psutil

from app.config import settings
from app.core.exceptions import SimulatorSizeError

COMPLEX128_BYTES = 16

# Fraction of available memory a single state (plus apply() scratch copies) may claim.
_AVAILABLE_FRACTION = 0.5
_SCRATCH_COPIES = 3


def get_memory_usage() -> dict[str, float]:
    """Get current process memory usage in MB.

    Returns:
        Dictionary with memory metrics:
        - rss_mb: Resident Set Size (physical memory)
        - percent: Percentage of total system memory
        - available_mb: Available system memory
    """
    process = psutil.Process()
    memory_info = process.memory_info()

    return {
        "rss_mb": round(memory_info.rss / 1024 / 1024, 2),
        "percent": round(process.memory_percent(), 2),
        "available_mb": round(psutil.virtual_memory().available / 1024 / 1024, 2),
    }


def estimate_state_bytes(n_qubits: int) -> int:
    """Bytes held by a dense complex128 amplitude vector over n_qubits."""
    return COMPLEX128_BYTES << n_qubits


def ensure_state_fits(n_qubits: int, limit: int | None = None) -> None:
    """Refuse states above the qubit ceiling or beyond what free memory can hold.

    Args:
        n_qubits: Total qubits of the requested state
        limit: Qubit ceiling (defaults to settings.STATEVECTOR_MAX_QUBITS)

    Raises:
        SimulatorSizeError: When either guard fails
    """
    limit = settings.STATEVECTOR_MAX_QUBITS if limit is None else limit
    if n_qubits > limit:
        raise SimulatorSizeError(
            f"{n_qubits} qubits exceed the state-vector limit of {limit}; "
            "use the structured back-end",
            n_qubits,
            limit,
        )

    needed = estimate_state_bytes(n_qubits) * _SCRATCH_COPIES
    available = psutil.virtual_memory().available
    if needed > available * _AVAILABLE_FRACTION:
        raise SimulatorSizeError(
            f"{n_qubits}-qubit state needs ~{needed / 1024**2:.0f} MB, "
            f"only {available / 1024**2:.0f} MB available",
            n_qubits,
            limit,
        )
