"""Kernel backend selection: numba when available, numpy always.

The env var MODCHAR_BACKEND ("numba" or "numpy") picks the backend at import
time; set_backend() overrides it programmatically. Both backends produce
bit-identical results: kernels return exact integer data and every float
reduction happens in shared numpy driver code.
"""
from __future__ import annotations

import os

from .errors import CapabilityError, ValidationError

_VALID = ("numba", "numpy")


def _numba_importable() -> bool:
    try:
        import numba  # noqa: F401
        return True
    except Exception:
        return False


_HAVE_NUMBA = _numba_importable()
_current: str | None = None


def _from_env() -> str:
    name = os.environ.get("MODCHAR_BACKEND", "").strip().lower()
    if not name:
        return "numba" if _HAVE_NUMBA else "numpy"
    if name not in _VALID:
        raise ValidationError(
            f"MODCHAR_BACKEND must be one of {_VALID}, got {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise CapabilityError(
            "MODCHAR_BACKEND=numba but numba is not importable")
    return name


def get_backend() -> str:
    global _current
    if _current is None:
        _current = _from_env()
    return _current


def set_backend(name: str) -> None:
    global _current
    if name not in _VALID:
        raise ValidationError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise CapabilityError("numba backend requested but numba is not importable")
    _current = name


def numba_available() -> bool:
    return _HAVE_NUMBA


def dispatch(numpy_impl, numba_impl):
    """Return the callable for the active backend."""
    if get_backend() == "numba" and numba_impl is not None:
        return numba_impl
    return numpy_impl
