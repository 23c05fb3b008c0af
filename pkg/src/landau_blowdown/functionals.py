"""Physical and weighted functionals evaluated on radial snapshots."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .gaussian_profiles import GaussianParams, WeightMu, UNIT_MAXWELLIAN
from .radial_grid import RadialField, integrate_3d, radial_derivative

#: nodes with F < FISHER_FLOOR * max F are left out of the Fisher integral
FISHER_FLOOR = 1e-30
#: the mu_T-weighted distance is taken over r <= NEAR_FIELD_RADII * sqrt(T)
NEAR_FIELD_RADII = 3.0


class IntegrabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    mass: float
    energy: float
    entropy: float
    fisher: float
    norm_L2M_of_f: float
    norm_L2mu_of_f: float
    dist_to_Meq: float

    def __post_init__(self):
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"diagnostic {f.name} is not finite")

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[float]:
        return [getattr(self, c) for c in self.columns()]


def records_to_csv(records, header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        for line in header_comment.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DiagnosticsRecord.columns())
    for rec in records:
        w.writerow([repr(float(x)) for x in rec.row()])
    return buf.getvalue()


def records_from_csv(text: str) -> list[DiagnosticsRecord]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [DiagnosticsRecord(**{k: float(v) for k, v in row.items()}) for row in reader]


def records_to_json(records) -> str:
    return json.dumps([asdict(r) for r in records])


# ---------------------------------------------------------------------------


def mass(F: RadialField) -> float:
    return integrate_3d(F)


def energy(F: RadialField) -> float:
    """Second moment ``int |v|^2 F dv``."""
    return integrate_3d(F * F.r**2)


def inner_product(f: RadialField, g: RadialField, weight_inverse: RadialField) -> float:
    return integrate_3d(f * g * weight_inverse)


def weighted_l2_norm(f: RadialField, weight_inverse: RadialField) -> float:
    """``sqrt(int f^2 w^{-1} dv)`` for a positive inverse weight."""
    if np.any(weight_inverse.values <= 0):
        raise ValueError("inverse weight must be positive")
    return math.sqrt(max(integrate_3d(f * f * weight_inverse), 0.0))


def maxwellian_inverse(grid, params: GaussianParams = UNIT_MAXWELLIAN) -> RadialField:
    """``(amplitude M_T)^{-1}`` without forming the underflowing Gaussian."""
    T = params.temperature
    r = grid.nodes
    return RadialField(grid, (2 * math.pi * T) ** 1.5 * np.exp(r * r / (2 * T)) / params.amplitude)


def norm_L2M(f: RadialField) -> float:
    return weighted_l2_norm(f, maxwellian_inverse(f.grid))


def norm_L2mu(f: RadialField, T: float, radius: float | None = None) -> float:
    """``||f||_{L^2_{mu_T}}``, optionally restricted to the ball ``r <= radius``."""
    if radius is not None:
        inside = f.r <= radius
        w = WeightMu(T).inverse(f.r[inside])
        return math.sqrt(max(float(np.dot(f.grid.volumes[inside], f.values[inside] ** 2 * w)), 0.0))
    return weighted_l2_norm(f, f.with_values(WeightMu(T).inverse(f.r)))


def entropy(F: RadialField) -> float:
    """``int F log F dv`` with ``0 log 0 = 0``."""
    v = F.values
    if np.any(v < 0):
        raise ValueError("entropy needs a nonnegative field")
    integrand = np.zeros_like(v)
    pos = v > 0
    integrand[pos] = v[pos] * np.log(v[pos])
    return float(np.dot(F.grid.volumes, integrand))


def fisher_information(F: RadialField, order: int = 6) -> float:
    """``4 pi int r^2 F'^2 / F dr``; nodes below the relative floor are skipped."""
    v = F.values
    if not np.any(v > 0):
        return 0.0
    dF = radial_derivative(F, order=order).values
    keep = v > FISHER_FLOOR * v.max()
    integrand = np.zeros_like(v)
    integrand[keep] = dF[keep] ** 2 / v[keep]
    return float(np.dot(F.grid.volumes, integrand))


def japanese(r):
    return np.sqrt(1.0 + np.asarray(r) ** 2)


def dissipation_DM(g: RadialField, order: int = 6) -> float:
    """``D_M(g) = int (<v>^{-1} g^2 + <v>^{-3} |g'|^2) M^{-1} dv``."""
    r = g.r
    dg = radial_derivative(g, order=order).values
    minv = maxwellian_inverse(g.grid).values
    jv = japanese(r)
    integrand = (g.values**2 / jv + dg**2 / jv**3) * minv
    tail = max(1, len(r) // 10)
    last = integrand[-tail:]
    if last[-1] > 0 and np.all(np.diff(last) > 0):
        import warnings

        warnings.warn("D_M integrand grows over the outer 10% of the grid", IntegrabilityWarning)
    return float(np.dot(g.grid.volumes, integrand))


@dataclass(frozen=True)
class KernelProjection:
    a_coef: float
    c_coef: float
    remainder: RadialField
    condition_number: float


def project_kernel(g: RadialField) -> KernelProjection:
    """L^2_M-orthogonal projection of radial ``g`` onto ``span{M, |v|^2 M}``."""
    grid = g.grid
    r = grid.nodes
    M = UNIT_MAXWELLIAN(r)
    basis = [M, r**2 * M]
    minv = maxwellian_inverse(grid).values
    wv = grid.volumes * minv
    gram = np.array([[np.dot(wv, bi * bj) for bj in basis] for bi in basis])
    rhs = np.array([np.dot(wv, bi * g.values) for bi in basis])
    cond = float(np.linalg.cond(gram))
    if cond > 1e8:
        raise np.linalg.LinAlgError(f"kernel Gram matrix ill-conditioned (cond={cond:.3e})")
    coef = np.linalg.solve(gram, rhs)
    rem = g.values - coef[0] * basis[0] - coef[1] * basis[1]
    return KernelProjection(float(coef[0]), float(coef[1]), g.with_values(rem), cond)
