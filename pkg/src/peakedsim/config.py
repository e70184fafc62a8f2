"""Resource limits, overridable through environment variables."""
from __future__ import annotations

import os


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    return int(raw)


def oracle_limit() -> int:
    """Largest qubit count the dense statevector oracle accepts."""
    return _env_int("PEAKEDSIM_ORACLE_LIMIT", 24)


def block_limit() -> int:
    """Largest forward-lightcone size for a parent-Hamiltonian term."""
    return _env_int("PEAKEDSIM_BLOCK_LIMIT", 12)


def window_limit() -> int:
    """Largest backward-lightcone size for an exact strip computation."""
    return _env_int("PEAKEDSIM_WINDOW_LIMIT", 24)


def max_dimension() -> int:
    """Cap on the bounded-weight subspace dimension."""
    return _env_int("PEAKEDSIM_MAX_DIM", 2**31)


class LimitExceeded(RuntimeError):
    """A configured size limit would be exceeded."""
