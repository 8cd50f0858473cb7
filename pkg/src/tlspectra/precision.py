"""Working-precision control.

All length/suspension arithmetic runs on mpmath reals at a configurable
binary precision (default 192 bits).  Equality to a singularity is decided
with absolute tolerance ``2**(-precision/2)``, which leaves half of the
mantissa as headroom for orbits of quadratic data.
"""

from __future__ import annotations

import mpmath
from mpmath import mpf

DEFAULT_PRECISION_BITS = 192

_current_bits = DEFAULT_PRECISION_BITS
mpmath.mp.prec = _current_bits


def set_precision(bits: int) -> None:
    """Set the global working precision in bits (>= 64)."""
    global _current_bits
    if bits < 64:
        raise ValueError("precision must be at least 64 bits")
    _current_bits = int(bits)
    mpmath.mp.prec = _current_bits


def precision_bits() -> int:
    return _current_bits


def tolerance() -> mpf:
    """Absolute tolerance used for singularity/connection decisions."""
    return mpf(2) ** (-(_current_bits // 2))


def real(x) -> mpf:
    """Coerce ``x`` (number or decimal string) to an mpf at working precision."""
    if isinstance(x, str):
        return mpf(x)
    return mpf(x)


def fsum(values):
    return mpmath.fsum(values)


def to_str(x, dps: int | None = None) -> str:
    """Decimal-string rendering at (close to) full working precision."""
    if dps is None:
        dps = int(_current_bits * 0.3010299956639812) + 2
    return mpmath.nstr(mpf(x), dps, strip_zeros=False)
