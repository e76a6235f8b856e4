"""Physical context shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class SpaceConfig:
    """Radius of the sphere and mass of the particle.

    Units are whatever the caller says they are; the reduced action
    constant is fixed to 1 throughout, so velocities, momenta and
    energies come out in the matching derived units.
    """

    R: float = 1.0
    m: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise DomainError(f"sphere radius must be finite and > 0, got {self.R!r}")
        if not (math.isfinite(self.m) and self.m > 0.0):
            raise DomainError(f"particle mass must be finite and > 0, got {self.m!r}")
