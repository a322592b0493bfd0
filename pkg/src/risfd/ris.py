"""RIS reflection state: unit-modulus phase vectors with optional finite resolution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_MODULUS_TOL = 1e-12
GRID_TOL = 1e-12  # circular distance, radians


@dataclass(frozen=True, eq=False)
class RisState:
    """Reflection coefficients of the RIS.

    ``d`` holds one unit-modulus coefficient per element.  ``bits`` records
    the phase resolution: an integer b restricts phases to the uniform grid
    {0, 2pi/2^b, ...} (enforced on construction), math.inf means continuous.
    """

    d: np.ndarray
    bits: float = math.inf

    def __post_init__(self):
        d = np.asarray(self.d, dtype=complex).reshape(-1)
        object.__setattr__(self, "d", d)
        if d.size < 1:
            raise ValueError("RIS state needs at least one element")
        if not np.all(np.isfinite(d)):
            raise ValueError("RIS coefficients must be finite")
        if np.max(np.abs(np.abs(d) - 1.0)) > UNIT_MODULUS_TOL:
            raise ValueError("RIS coefficients must have unit modulus")
        if self.bits != math.inf:
            b = float(self.bits)
            if not (b.is_integer() and b >= 1):
                raise ValueError(f"bits must be a positive integer or inf, got {self.bits}")
            step = 2 * math.pi / 2**int(b)
            cycles = np.angle(d) / step
            off = np.abs(cycles - np.round(cycles)) * step
            if np.max(off) > GRID_TOL:
                raise ValueError(f"phases are not on the {int(b)}-bit grid")

    @property
    def m_ris(self) -> int:
        return self.d.size


def quantize_phases(d: np.ndarray, bits: int) -> np.ndarray:
    """Snap each phase to the nearest point of the 2^bits uniform grid.

    Distance is circular (wrap-around at 2pi); exact ties go to the smaller
    grid angle.  Magnitudes are renormalized to exactly unit modulus.
    """
    if bits == math.inf:
        raise ValueError("quantize_phases needs a finite bit depth")
    b = int(bits)
    if b < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    step = 2 * math.pi / 2**b
    theta = np.mod(np.angle(np.asarray(d, dtype=complex)), 2 * math.pi)
    # round-half-down = nearest grid point with ties toward the smaller angle
    k = np.mod(np.ceil(theta / step - 0.5), 2**b)
    return np.exp(1j * k * step)


def random_phases(m_ris: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus vector with i.i.d. phases uniform on [0, 2pi)."""
    return np.exp(1j * rng.uniform(0.0, 2 * math.pi, size=m_ris))
