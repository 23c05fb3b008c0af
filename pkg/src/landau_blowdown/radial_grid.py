"""Graded radial grid, radial fields and the finite-volume geometry shared by every module.

Nodes are the images of a uniform computational coordinate ``xi in [0, 1]``
under ``r(xi) = R sinh(beta xi) / sinh(beta)``.  The map is odd in ``xi``, so
radial functions (even in ``r``) stay even in ``xi``; this is what lets the
high-order stencils below use mirror ghosts at the origin.

Control volumes are chosen so that ``sum_i V_i f(r_i)`` reproduces the
trapezoid rule of ``4 pi r^2 f dr`` in ``xi`` (spectrally accurate for smooth
radial data), with a small ball around ``r = 0`` and the remainder of
``B(R_max)`` assigned to the outer node.  The volumes are exact shell volumes
between consecutive cell edges, so they are positive and tile the ball.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

_FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True, eq=False)
class RadialGrid:
    r_max: float
    n: int
    grading: float
    beta: float
    xi: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    dr_dxi: np.ndarray = field(repr=False)
    d2r_dxi2: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    volumes: np.ndarray = field(repr=False)

    @property
    def dxi(self) -> float:
        return 1.0 / self.n

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def areas(self) -> np.ndarray:
        """Sphere areas 4 pi e^2 at the N interior cell edges."""
        return _FOUR_PI * self.edges**2

    def r_of_xi(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.beta == 0.0:
            return self.r_max * xi
        return self.r_max * np.sinh(self.beta * xi) / math.sinh(self.beta)

    def xi_of_r(self, r):
        r = np.asarray(r, dtype=float)
        if self.beta == 0.0:
            return r / self.r_max
        return np.arcsinh(r * math.sinh(self.beta) / self.r_max) / self.beta

    def cells_inside(self, radius: float) -> int:
        """Number of grid intervals lying entirely in ``r < radius``."""
        return int(np.count_nonzero(self.nodes[1:] <= radius))

    def metadata(self) -> dict:
        return {"r_max": self.r_max, "n": self.n, "grading": self.grading}


def make_grid(r_max: float = 8.0, n: int = 1024, grading: float = 4.0) -> RadialGrid:
    """Build the graded grid with ``n`` intervals on ``[0, r_max]``.

    ``grading`` is the ratio between the widest (outermost) and the narrowest
    (innermost) interval; ``grading = 1`` gives a uniform grid.  Keeping it
    fixed while doubling ``n`` refines the same mapping, which is what the
    convergence studies rely on.
    """
    for name, value in (("r_max", r_max), ("grading", grading)):
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValueError(f"{name} must be a finite number, got {value!r}")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValueError(f"n must be an integer, got {n!r}")
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    if n < 4:
        raise ValueError("n must be at least 4")
    if grading < 1:
        raise ValueError("grading must be >= 1")
    n = int(n)
    r_max = float(r_max)
    beta = math.acosh(grading) if grading > 1 else 0.0

    xi = np.linspace(0.0, 1.0, n + 1)
    if beta == 0.0:
        nodes = r_max * xi
        dr = np.full_like(xi, r_max)
        d2r = np.zeros_like(xi)
    else:
        scale = r_max / math.sinh(beta)
        nodes = scale * np.sinh(beta * xi)
        dr = scale * beta * np.cosh(beta * xi)
        d2r = scale * beta**2 * np.sinh(beta * xi)
    nodes[0] = 0.0
    nodes[-1] = r_max

    # trapezoid weights of 4 pi r^2 dr in xi, interior nodes only
    w = _FOUR_PI * nodes**2 * dr / n
    # first edge at the xi-midpoint of the first interval
    e_first = r_max * 0.5 / n if beta == 0.0 else scale * math.sinh(0.5 * beta / n)
    cubes = e_first**3 + np.cumsum(w[1:n]) * 3.0 / _FOUR_PI
    edges = np.concatenate(([e_first], np.cbrt(cubes)))
    if edges[-1] >= r_max or np.any(edges <= nodes[:-1]) or np.any(edges >= nodes[1:]):
        raise ValueError("grid construction failed: cell edges do not interleave nodes")
    bounds = np.concatenate(([0.0], edges, [r_max]))
    volumes = (_FOUR_PI / 3.0) * np.diff(bounds**3)

    return RadialGrid(
        r_max=r_max,
        n=n,
        grading=float(grading),
        beta=beta,
        xi=xi,
        nodes=nodes,
        dr_dxi=dr,
        d2r_dxi2=d2r,
        edges=edges,
        volumes=volumes,
    )


@dataclass(frozen=True, eq=False)
class RadialField:
    """Node values of a radial function ``f(|v|)`` on a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ValueError(
                f"field has {values.shape} values, grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if self.nonnegative and np.any(values < 0):
            raise ValueError("field tagged nonnegative has negative values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: RadialGrid, func, nonnegative: bool = False):
        return cls(grid, func(grid.nodes), nonnegative)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values, nonnegative: bool = False) -> "RadialField":
        return RadialField(self.grid, values, nonnegative)

    def _other(self, other):
        if isinstance(other, RadialField):
            if other.grid is not self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other(other))

    def __rsub__(self, other):
        return self.with_values(self._other(other) - self.values)

    def __mul__(self, other):
        return self.with_values(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.with_values(self.values / self._other(other))

    def __neg__(self):
        return self.with_values(-self.values)

    # serialization ------------------------------------------------------

    def to_csv(self, name: str = "value") -> str:
        buf = io.StringIO()
        g = self.grid
        buf.write(f"# r_max={g.r_max!r} n={g.n} grading={g.grading!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", name])
        for r, v in zip(g.nodes, self.values):
            writer.writerow([repr(float(r)), repr(float(v))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "grid": self.grid.metadata(),
                "data": [[float(r), float(v)] for r, v in zip(self.grid.nodes, self.values)],
            }
        )

    @classmethod
    def from_csv(cls, text: str) -> "RadialField":
        lines = text.splitlines()
        header = dict(item.split("=") for item in lines[0].lstrip("# ").split())
        grid = make_grid(float(header["r_max"]), int(header["n"]), float(header["grading"]))
        rows = list(csv.reader(lines[2:]))
        return cls(grid, [float(row[1]) for row in rows])

    @classmethod
    def from_json(cls, text: str) -> "RadialField":
        doc = json.loads(text)
        meta = doc["grid"]
        grid = make_grid(meta["r_max"], meta["n"], meta["grading"])
        return cls(grid, [pair[1] for pair in doc["data"]])


def integrate_3d(f: RadialField) -> float:
    """``int_{R^3} f dv`` as the cell-volume weighted sum of node values."""
    return float(np.dot(f.grid.volumes, f.values))


def radial_derivative(f: RadialField, order: int = 2) -> RadialField:
    """``df/dr`` at the nodes, with ``f'(0) = 0`` imposed.

    ``order=2`` uses three-point differences on the physical nodes (exact for
    quadratics on any node spacing).  ``order`` 4 or 6 differentiates in the
    uniform coordinate ``xi`` with mirror ghosts at the origin and applies the
    chain rule; the lemma checks need that accuracy.
    """
    if order == 2:
        return f.with_values(_three_point_derivative(f.grid, f.values))
    d1 = xi_derivatives(f.grid, f.values, parity=1, order=order)[0]
    out = d1 / f.grid.dr_dxi
    out[0] = 0.0
    return f.with_values(out)


def _three_point_derivative(grid: RadialGrid, y: np.ndarray) -> np.ndarray:
    r = grid.nodes
    h = np.diff(r)
    out = np.empty_like(y)
    hm, hp = h[:-1], h[1:]
    # written in differences so constants give exactly zero
    dm = np.diff(y)
    out[1:-1] = hm / (hp * (hm + hp)) * dm[1:] + hp / (hm * (hm + hp)) * dm[:-1]
    out[0] = 0.0
    h1, h2 = h[-1], h[-2]
    out[-1] = (2 * h1 + h2) / (h1 * (h1 + h2)) * dm[-1] - h1 / (h2 * (h1 + h2)) * dm[-2]
    return out


# xi-space machinery ---------------------------------------------------------

_CENTRAL = {
    2: (np.array([-1, 0, 1]) / 2.0, np.array([1, -2, 1]) / 1.0),
    4: (np.array([1, -8, 0, 8, -1]) / 12.0, np.array([-1, 16, -30, 16, -1]) / 12.0),
    6: (
        np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0,
        np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0,
    ),
}


def _extend(y: np.ndarray, parity: int, k: int) -> np.ndarray:
    """Pad ``y`` by ``k`` ghosts: mirror (times ``parity``) at xi=0, polynomial
    extrapolation of degree ``2k`` at xi=1."""
    left = parity * y[k:0:-1]
    deg = 2 * k
    tail = y[-(deg + 1):]
    t = np.arange(deg + 1, dtype=float)
    # Lagrange extrapolation to t = deg+1 .. deg+k
    # extrapolate offsets from the last value so constants stay exact
    base = tail[-1]
    right = np.empty(k)
    for j in range(k):
        x = deg + 1 + j
        acc = 0.0
        for m in range(deg):
            others = np.delete(t, m)
            acc += (tail[m] - base) * np.prod((x - others) / (t[m] - others))
        right[j] = base + acc
    return np.concatenate((left, y, right))


def xi_derivatives(grid: RadialGrid, y: np.ndarray, parity: int = 1, order: int = 6):
    """First and second derivatives of node data with respect to ``xi``."""
    if order not in _CENTRAL:
        raise ValueError(f"unsupported order {order}")
    c1, c2 = _CENTRAL[order]
    k = order // 2
    ext = _extend(np.asarray(y, dtype=float), parity, k)
    n = len(y)
    d1 = np.zeros(n)
    d2 = np.zeros(n)
    y = ext[k:k + n]
    for j in range(2 * k + 1):
        seg = ext[j:j + n] - y  # stencils sum to zero
        d1 += c1[j] * seg
        d2 += c2[j] * seg
    return d1 / grid.dxi, d2 / grid.dxi**2


def derivatives_r(f: RadialField, order: int = 6):
    """``(f', f'', f'/r)`` at the nodes; ``f'/r`` takes its limit ``f''(0)`` at r=0."""
    g = f.grid
    dxi1, dxi2 = xi_derivatives(g, f.values, parity=1, order=order)
    fr = dxi1 / g.dr_dxi
    frr = (dxi2 - g.d2r_dxi2 * fr) / g.dr_dxi**2
    fr[0] = 0.0
    over_r = np.empty_like(fr)
    over_r[1:] = fr[1:] / g.nodes[1:]
    over_r[0] = frr[0]
    return fr, frr, over_r


def cumulative_xi(grid: RadialGrid, integrand: np.ndarray, parity: int) -> np.ndarray:
    """Fourth-order running integral ``int_0^{xi_i} g dxi`` of node data ``g``.

    ``parity`` is the symmetry of ``g`` under ``xi -> -xi``; it fixes the ghost
    value used by the first interval.
    """
    g = np.asarray(integrand, dtype=float)
    h = grid.dxi
    n = len(g) - 1
    pieces = np.empty(n)
    ghost = parity * g[1]
    gm = np.concatenate(([ghost], g[: n - 2]))  # g_{i-1} for i = 0..n-2
    pieces[: n - 1] = h / 24.0 * (-gm + 13 * g[: n - 1] + 13 * g[1:n] - g[2:])
    pieces[n - 1] = h / 24.0 * (9 * g[n] + 19 * g[n - 1] - 5 * g[n - 2] + g[n - 3])
    return np.concatenate(([0.0], np.cumsum(pieces)))


def interpolate_xi(grid: RadialGrid, y: np.ndarray, radii, parity: int = 1) -> np.ndarray:
    """Cubic Lagrange interpolation of node data at arbitrary radii (in xi)."""
    radii = np.asarray(radii, dtype=float)
    xi = grid.xi_of_r(radii) / grid.dxi
    n = grid.n
    j = np.clip(np.floor(xi).astype(int), 0, n - 1)
    s = xi - j
    ext = np.concatenate(([parity * y[1]], y, [3 * y[n] - 3 * y[n - 1] + y[n - 2]]))
    # stencil j-1, j, j+1, j+2 in ext indices j, j+1, j+2, j+3
    y0, y1, y2, y3 = ext[j], ext[j + 1], ext[j + 2], ext[j + 3]
    w0 = -s * (s - 1) * (s - 2) / 6.0
    w1 = (s + 1) * (s - 1) * (s - 2) / 2.0
    w2 = -(s + 1) * s * (s - 2) / 2.0
    w3 = (s + 1) * s * (s - 1) / 6.0
    return w0 * y0 + w1 * y1 + w2 * y2 + w3 * y3
