"""Spectral parameter lambda together with its square root mu (Im mu >= 0)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from numbers import Number


@dataclass(frozen=True)
class SpectralPoint:
    lam: float | complex
    mu: complex

    @classmethod
    def from_lambda(cls, lam: float | complex) -> "SpectralPoint":
        if isinstance(lam, complex) and lam.imag == 0.0:
            lam = lam.real
        if isinstance(lam, complex):
            mu = cmath.sqrt(lam)
            if mu.imag < 0:
                mu = -mu
            return cls(lam, mu)
        lam = float(lam)
        if math.isnan(lam) or math.isinf(lam):
            raise ValueError(f"spectral parameter must be finite, got {lam}")
        if lam >= 0:
            return cls(lam, complex(math.sqrt(lam), 0.0))
        return cls(lam, complex(0.0, math.sqrt(-lam)))

    @property
    def is_real(self) -> bool:
        return not isinstance(self.lam, complex)

    @property
    def kappa(self) -> float:
        """sqrt(-lambda) for real negative lambda, else 0."""
        if self.is_real and self.lam < 0:
            return self.mu.imag
        return 0.0

    @property
    def tau(self) -> complex:
        """-i * mu; equals kappa on the negative half-line."""
        return -1j * self.mu


def as_point(p: "SpectralPoint | Number") -> SpectralPoint:
    if isinstance(p, SpectralPoint):
        return p
    return SpectralPoint.from_lambda(p)  # type: ignore[arg-type]
