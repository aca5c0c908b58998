"""Input validation helpers in the spirit of ``sklearn.utils.validation``.

scikit-learn's own ``check_array`` rejects complex data, so network payloads
are checked here instead.
"""

import numpy as np

from .exceptions import InputError


def check_frequencies(freqs, *, allow_empty=False, name="freqs"):
    """Return ``freqs`` as a 1-D float array, strictly increasing and > 0."""
    f = np.asarray(freqs, dtype=float)
    if f.ndim == 2 and f.shape[1] == 1:
        f = f[:, 0]
    if f.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {f.shape}")
    if f.size == 0:
        if allow_empty:
            return f
        raise InputError(f"{name} is empty")
    if not np.all(np.isfinite(f)):
        raise InputError(f"{name} contains non-finite values")
    if f[0] <= 0:
        raise InputError(f"{name} must be positive")
    if f.size > 1 and np.any(np.diff(f) <= 0):
        raise InputError(f"{name} must be strictly increasing")
    return f


def check_complex(values, *, name="value", shape=None):
    """Return ``values`` as a finite complex array (scalar stays 0-d)."""
    try:
        v = np.asarray(values, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not numeric: {exc}") from None
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} must be finite")
    if shape is not None and v.shape != shape:
        raise InputError(f"{name} has shape {v.shape}, expected {shape}")
    return v


def check_port_impedance(z, name="port impedance"):
    """Return ``z`` as a complex scalar with a strictly positive real part."""
    v = check_complex(z, name=name)
    if v.ndim != 0:
        raise InputError(f"{name} must be a scalar")
    v = complex(v)
    if not v.real > 0:
        raise InputError(f"{name} must have Re(z) > 0, got {v}")
    return v


def check_positive(value, name):
    v = float(value)
    if not (np.isfinite(v) and v > 0):
        raise InputError(f"{name} must be finite and > 0, got {value!r}")
    return v


def check_nonnegative(value, name):
    v = float(value)
    if not (np.isfinite(v) and v >= 0):
        raise InputError(f"{name} must be finite and >= 0, got {value!r}")
    return v
