"""Physical parameters and the two initial states: thermal two-mode field and product atomic state.

Time is the dimensionless ``gt`` throughout; the dipole coupling enters only
through ``alpha = Omega / g``.  Two-photon resonance is assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_CUTOFF_TAIL = 1e-8
DEFAULT_CUTOFF_CAP = 2048


class NonPositiveRatio(ValueError):
    pass


def _finite(name, x):
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    nbar1: float
    nbar2: float
    cutoff_tail: float = DEFAULT_CUTOFF_TAIL
    cutoff_cap: int = DEFAULT_CUTOFF_CAP

    def __post_init__(self):
        for name in ("alpha", "nbar1", "nbar2", "cutoff_tail"):
            _finite(name, getattr(self, name))
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.nbar1 < 0 or self.nbar2 < 0:
            raise ValueError(f"mean photon numbers must be >= 0, got {self.nbar1}, {self.nbar2}")
        if not 0 < self.cutoff_tail <= 1e-2:
            raise ValueError(f"cutoff_tail must lie in (0, 1e-2], got {self.cutoff_tail}")
        if int(self.cutoff_cap) != self.cutoff_cap or self.cutoff_cap < 1:
            raise ValueError(f"cutoff_cap must be an integer >= 1, got {self.cutoff_cap}")


def _cos_sin(angle):
    """cos and sin, exact at multiples of pi/2 so basis-state preparations carry no dust."""
    quarter = angle / (math.pi / 2)
    if quarter == round(quarter):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[round(quarter) % 4]
    return math.cos(angle), math.sin(angle)


@dataclass(frozen=True)
class AtomPreparation:
    """Product state (cos t1|+> + e^{i p1} sin t1|->)(cos t2|+> + e^{i p2} sin t2|->)."""

    theta1: float
    phi1: float
    theta2: float
    phi2: float

    def __post_init__(self):
        for name in ("theta1", "phi1", "theta2", "phi2"):
            _finite(name, getattr(self, name))

    def atom_vectors(self):
        out = []
        for theta, phi in ((self.theta1, self.phi1), (self.theta2, self.phi2)):
            c, s = _cos_sin(theta)
            out.append(np.array([c, s * complex(*_cos_sin(phi))], dtype=complex))
        return tuple(out)

    def swapped(self) -> "AtomPreparation":
        return AtomPreparation(self.theta2, self.phi2, self.theta1, self.phi1)


@dataclass(frozen=True)
class ThermalWeights:
    nbar: float
    cutoff: int
    weights: np.ndarray
    tail: float
    truncated: bool = False  # True when cutoff_cap clamped the cutoff (tail may exceed the policy)

    @property
    def mass(self) -> float:
        return 1.0 - self.tail


def thermal_weight(nbar: float, n: int) -> float:
    """Bose-Einstein Fock-state probability nbar^n / (1 + nbar)^(n + 1)."""
    if nbar == 0:
        return 1.0 if n == 0 else 0.0
    # r**n stays in [0, 1]: no overflow for any n
    r = nbar / (1.0 + nbar)
    return r**n / (1.0 + nbar)


def _ratio(nbar):
    return nbar / (1.0 + nbar)


def build_thermal_weights(nbar: float, cutoff_tail: float = DEFAULT_CUTOFF_TAIL,
                          cutoff_cap: int = DEFAULT_CUTOFF_CAP) -> ThermalWeights:
    """Truncate the thermal distribution at the smallest N whose tail is <= cutoff_tail.

    The tail is the closed form (nbar/(1+nbar))^(N+1), never 1 - sum(weights).
    """
    if nbar == 0:
        return ThermalWeights(0.0, 0, np.ones(1), 0.0)
    r = _ratio(nbar)
    n = max(0, math.ceil(math.log(cutoff_tail) / math.log(r)) - 1)
    while r ** (n + 1) > cutoff_tail:
        n += 1
    while n > 0 and r**n <= cutoff_tail:
        n -= 1
    truncated = n > cutoff_cap
    if truncated:
        n = int(cutoff_cap)
    weights = r ** np.arange(n + 1) / (1.0 + nbar)
    return ThermalWeights(float(nbar), n, weights, r ** (n + 1), truncated)


def weights_for(params: ModelParams):
    return (build_thermal_weights(params.nbar1, params.cutoff_tail, params.cutoff_cap),
            build_thermal_weights(params.nbar2, params.cutoff_tail, params.cutoff_cap))


def thermal_occupation(freq_over_temp: float) -> float:
    """Mean photon number 1/(exp(x) - 1) for x = hbar*omega/(k_B*T)."""
    if not freq_over_temp > 0:
        raise NonPositiveRatio(f"hbar*omega/(k_B*T) must be > 0, got {freq_over_temp!r}")
    return 1.0 / math.expm1(freq_over_temp)


def initial_atomic_density(prep: AtomPreparation) -> np.ndarray:
    """|psi1 psi2><psi1 psi2| in the basis (|++>, |+->, |-+>, |-->)."""
    (c1, s1), (c2, s2) = _cos_sin(prep.theta1), _cos_sin(prep.theta2)
    mag = np.kron([c1, s1], [c2, s2])
    phase = np.array([0.0, prep.phi2, prep.phi1, prep.phi1 + prep.phi2])
    # diagonal carries no phase factor and zero-amplitude rows stay exactly zero,
    # so incoherent preparations do not depend on the phases at all
    rho = np.outer(mag, mag) * np.exp(1j * (phase[:, None] - phase[None, :]))
    upper = np.triu(rho, 1)
    return upper + np.conj(upper.T) + np.diag(mag * mag).astype(complex)
