"""Closed-form Maxwellian algebra: M_T, the blow-down profile E(t), the weight mu_T and M_eq."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .radial_grid import RadialField, RadialGrid

#: M(0) = (2 pi)^{-3/2}, the peak of the unit Maxwellian.
M0 = (2.0 * math.pi) ** -1.5
#: c0 = sup_e <A[M](0) e, e> = (3 (2 pi)^{3/2})^{-1}.
C0 = 1.0 / (3.0 * (2.0 * math.pi) ** 1.5)

ALPHA_RANGE = (0.25, 0.5)
DELTA_RANGE = (0.0, 0.5)


def _check_admissible(delta: float, alpha: float, unchecked: bool) -> None:
    if not (math.isfinite(delta) and math.isfinite(alpha)):
        raise ValueError("delta and alpha must be finite")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if unchecked:
        return
    if not DELTA_RANGE[0] < delta < DELTA_RANGE[1]:
        raise ValueError(f"delta={delta} outside (0, 1/2); pass unchecked=True to allow")
    if not ALPHA_RANGE[0] < alpha < ALPHA_RANGE[1]:
        raise ValueError(f"alpha={alpha} outside (1/4, 1/2); pass unchecked=True to allow")


@dataclass(frozen=True)
class GaussianParams:
    """``amplitude * M_temperature``: a Maxwellian of given mass and temperature."""

    amplitude: float
    temperature: float

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and math.isfinite(self.temperature)):
            raise ValueError("Gaussian parameters must be finite")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        T = self.temperature
        return self.amplitude * (2.0 * math.pi * T) ** -1.5 * np.exp(-(r * r) / (2.0 * T))

    @property
    def second_moment(self) -> float:
        """``int |v|^2 amplitude M_T dv = 3 T amplitude``."""
        return 3.0 * self.temperature * self.amplitude

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianParams":
        return cls(float(d["amplitude"]), float(d["temperature"]))


UNIT_MAXWELLIAN = GaussianParams(1.0, 1.0)


@dataclass(frozen=True)
class BlowdownProfile:
    """Parameters of ``E(t) = m(t) M_{T(t)}`` started from ``delta^alpha M_delta``."""

    delta: float
    alpha: float
    unchecked: bool = False

    def __post_init__(self):
        _check_admissible(self.delta, self.alpha, self.unchecked)

    @property
    def c0(self) -> float:
        return C0

    def temperature(self, t):
        return self.delta + 2.0 * C0 * np.asarray(t, dtype=float)

    def mass(self, t):
        return self.delta**self.alpha * np.exp(2.0 * M0 * np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {"delta": self.delta, "alpha": self.alpha, "c0": C0}

    @classmethod
    def from_dict(cls, d: dict, unchecked: bool = False) -> "BlowdownProfile":
        return cls(float(d["delta"]), float(d["alpha"]), unchecked)


@dataclass(frozen=True)
class WeightMu:
    """The near-field weight ``mu_T(r) = T^{3/2} exp(-r^2 / (2T))``."""

    temperature: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    def __call__(self, r):
        T = self.temperature
        r = np.asarray(r, dtype=float)
        return T**1.5 * np.exp(-(r * r) / (2.0 * T))

    def inverse(self, r):
        T = self.temperature
        r = np.asarray(r, dtype=float)
        return T**-1.5 * np.exp((r * r) / (2.0 * T))


def eval_profile(p: GaussianParams, grid: RadialGrid) -> RadialField:
    return RadialField(grid, p(grid.nodes), nonnegative=True)


def profile_E(b: BlowdownProfile, t: float) -> GaussianParams:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return GaussianParams(float(b.mass(t)), float(b.temperature(t)))


def convolve_gaussians(p: GaussianParams, q: GaussianParams) -> GaussianParams:
    """``p * q`` for Maxwellians: masses multiply, temperatures (variances) add."""
    return GaussianParams(p.amplitude * q.amplitude, p.temperature + q.temperature)


def equilibrium(delta: float, alpha: float, unchecked: bool = False) -> GaussianParams:
    """Maxwellian with the mass and second moment of ``M + delta^alpha M_delta``."""
    _check_admissible(delta, alpha, unchecked)
    mass = 1.0 + delta**alpha
    return GaussianParams(mass, (1.0 + delta ** (1.0 + alpha)) / mass)


def gaussian_lp_norm(p: GaussianParams, exponent: float) -> float:
    """``||amplitude M_T||_{L^p}``; ``exponent = inf`` gives the peak value."""
    if not exponent >= 1:
        raise ValueError("exponent must be >= 1")
    base = 2.0 * math.pi * p.temperature
    if math.isinf(exponent):
        return p.amplitude * base**-1.5
    return p.amplitude * base ** (-1.5 * (1.0 - 1.0 / exponent)) * exponent ** (-1.5 / exponent)
