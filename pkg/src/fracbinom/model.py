"""Parameter container and regime classification for the binomial birth-death model.

The population lives on {0, ..., ceiling}: each vacancy fills at rate
birth_rate and each individual dies at rate death_rate, both per unit
time**order where order is the fractional memory exponent.  Rates carry an
implicit time**(-order) dimension; no unit system is enforced.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from enum import Enum


class Regime(Enum):
    GENERAL = "general"
    PURE_BIRTH = "pure_birth"
    PURE_DEATH = "pure_death"


@dataclass(frozen=True)
class ProcessParams:
    """Immutable model parameters.

    birth_rate: per-vacancy birth coefficient, >= 0
    death_rate: per-individual death coefficient, >= 0
    ceiling: population ceiling N >= 1
    initial: initial population M with 1 <= M <= N
    order: fractional order in (0, 1]; 1 recovers the classical Markov chain
    """

    birth_rate: float
    death_rate: float
    ceiling: int
    initial: int
    order: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "birth_rate", float(self.birth_rate))
        object.__setattr__(self, "death_rate", float(self.death_rate))
        object.__setattr__(self, "order", float(self.order))
        for name in ("ceiling", "initial"):
            value = getattr(self, name)
            if isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            try:
                object.__setattr__(self, name, operator.index(value))
            except TypeError:
                raise ValueError(f"{name} must be an integer, got {value!r}") from None
        if not (self.birth_rate >= 0.0 and math.isfinite(self.birth_rate)):
            raise ValueError(f"birth_rate must be finite and >= 0, got {self.birth_rate}")
        if not (self.death_rate >= 0.0 and math.isfinite(self.death_rate)):
            raise ValueError(f"death_rate must be finite and >= 0, got {self.death_rate}")
        if self.birth_rate + self.death_rate <= 0.0:
            raise ValueError("birth_rate + death_rate must be positive; the process is degenerate otherwise")
        if self.ceiling < 1:
            raise ValueError(f"ceiling must be >= 1, got {self.ceiling}")
        if not (1 <= self.initial <= self.ceiling):
            raise ValueError(
                f"initial must satisfy 1 <= initial <= ceiling, got initial={self.initial}, ceiling={self.ceiling}"
            )
        if not (0.0 < self.order <= 1.0):
            raise ValueError(f"order must be in (0, 1], got {self.order}")

    @property
    def total_rate(self) -> float:
        return self.birth_rate + self.death_rate

    def state_birth_rate(self, n: int) -> float:
        return self.birth_rate * (self.ceiling - n)

    def state_death_rate(self, n: int) -> float:
        return self.death_rate * n


def classify(params: ProcessParams) -> Regime:
    if params.death_rate == 0.0:
        return Regime.PURE_BIRTH
    if params.birth_rate == 0.0:
        return Regime.PURE_DEATH
    return Regime.GENERAL


def equilibrium_p(params: ProcessParams) -> float:
    """Long-run per-slot occupation probability birth_rate/(birth_rate+death_rate)."""
    return params.birth_rate / (params.birth_rate + params.death_rate)
