"""Stieltjes-transform machinery for limiting spectra of sample covariance
matrices.

A discrete population spectrum (atoms t_k with weights w_k) together with the
dimension ratio c = lim N/n determines the limiting eigenvalue distribution
of the sample covariance matrix through a scalar fixed-point equation in the
companion transform m_under(z):

    m_under(z) = -1 / ( z - c * sum_k w_k * t_k / (1 + t_k * m_under(z)) )

valid on the upper half-plane.  The transform of the N x N spectrum follows
from the companion by m_F(z) = (m_under(z) - (c-1)/z) / c, and the density is
recovered on the real line from f(x) = (1/pi) Im m_F(x + i*eps).

For the white (single-atom) population the fixed point collapses to the
quadratic c*z*m^2 + (z+c-1)*m + 1 = 0 whose Im>0 root is the closed-form
Marchenko-Pastur transform; it serves as the oracle for the generic solver.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, ParameterError, SingularityError

__all__ = [
    "SpectralModel",
    "SolverConfig",
    "StieltjesSolution",
    "Density",
    "SupportClusters",
    "empirical_stieltjes",
    "mp_support",
    "mp_density",
    "mp_stieltjes",
    "mp_stieltjes_edge",
    "solve_companion_stieltjes",
    "density_from_stieltjes",
    "support_clusters",
    "capacity_identity",
]


@dataclass(frozen=True)
class SpectralModel:
    """Discrete population spectrum: atoms (value, weight) plus ratio c = lim N/n.

    Atom values must be strictly positive and increasing; weights positive and
    summing to one.  Atoms at zero are disallowed — any zero mass in the
    limiting spectrum is the c>1 rank deficiency, reported separately.
    """

    atoms: tuple
    ratio: float

    def __post_init__(self):
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ParameterError("spectral model needs at least one atom")
        values = [t for t, _ in atoms]
        weights = [w for _, w in atoms]
        if any(t <= 0 for t in values):
            raise ParameterError("atom values must be strictly positive")
        if any(v2 <= v1 for v1, v2 in zip(values, values[1:])):
            raise ParameterError("atom values must be strictly increasing")
        if any(w <= 0 for w in weights):
            raise ParameterError("atom weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ParameterError("atom weights must sum to 1 within 1e-12")
        if not (self.ratio > 0):
            raise ParameterError("ratio c must be positive")

    @classmethod
    def from_multiplicities(cls, values, multiplicities, ratio: float) -> "SpectralModel":
        total = sum(multiplicities)
        return cls(tuple((v, m / total) for v, m in zip(values, multiplicities)), ratio)

    def values(self) -> np.ndarray:
        return np.array([t for t, _ in self.atoms])

    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    damping: float = 0.5

    def __post_init__(self):
        if not (self.tolerance > 0):
            raise ParameterError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be >= 1")
        if not (0 < self.damping <= 1):
            raise ParameterError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class StieltjesSolution:
    """Fixed-point solution at one evaluation point z."""

    z: complex
    m_under: complex
    m: complex
    residual: float
    iterations: int


@dataclass(frozen=True)
class Density:
    """Reconstructed limiting density on a grid, plus any Dirac mass at zero."""

    grid: np.ndarray
    values: np.ndarray
    mass_at_zero: float
    skipped: tuple = field(default=())

    def total_mass(self) -> float:
        return float(np.trapezoid(self.values, self.grid)) + self.mass_at_zero


@dataclass(frozen=True)
class SupportClusters:
    """Disjoint intervals where the limiting density is positive, with masses."""

    intervals: tuple
    masses: tuple


def empirical_stieltjes(eigs, z: complex) -> complex:
    """(1/N) sum_k 1/(lambda_k - z), the normalized resolvent trace."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.ndim != 1 or eigs.size == 0:
        raise ParameterError("eigs must be a nonempty 1-d real vector")
    z = complex(z)
    d = eigs - z
    if np.min(np.abs(d)) == 0.0:
        raise SingularityError(f"z={z} coincides with an eigenvalue")
    return complex(np.mean(1.0 / d))


def mp_support(c: float):
    """Marchenko-Pastur support edges and mass at zero: (a, b, (1-1/c)^+)."""
    if not (c > 0):
        raise ParameterError("ratio c must be positive")
    sq = math.sqrt(c)
    return (1 - sq) ** 2, (1 + sq) ** 2, max(0.0, 1 - 1 / c)


def mp_density(c: float, x):
    """Continuous part of the Marchenko-Pastur density at x >= 0.

    The (1-1/c)^+ Dirac mass at zero is *not* included; see mp_support.
    """
    a, b, _ = mp_support(c)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ParameterError("x must be nonnegative")
    out = np.zeros_like(x_arr)
    inside = (x_arr > a) & (x_arr < b)
    xi = x_arr[inside]
    out[inside] = np.sqrt((xi - a) * (b - xi)) / (2 * np.pi * c * xi)
    return out if out.ndim else float(out)


def mp_stieltjes(c: float, z: complex) -> complex:
    """Closed-form MP transform: Im>0 root of c*z*m^2 + (z+c-1)*m + 1 = 0."""
    if not (c > 0):
        raise ParameterError("ratio c must be positive")
    z = complex(z)
    if z.imag <= 0:
        raise ParameterError("z must lie in the open upper half-plane")
    bq = z + c - 1
    disc = cmath.sqrt(bq * bq - 4 * c * z)
    r1 = (-bq + disc) / (2 * c * z)
    r2 = (-bq - disc) / (2 * c * z)
    return r1 if r1.imag > 0 else r2


def mp_stieltjes_edge(c: float, x: float) -> float:
    """Real boundary value of the MP transform for x strictly right of the bulk."""
    a, b, _ = mp_support(c)
    if not (x > b):
        raise ParameterError(f"x must exceed the right edge b={b:.6g}")
    bq = x + c - 1
    # bq^2 - 4cx factors as (x-a)(x-b), positive right of the bulk
    return (-bq + math.sqrt((x - a) * (x - b))) / (2 * c * x)


def _companion_map(model: SpectralModel, z: complex, m: complex) -> complex:
    t = model.values()
    w = model.weights()
    integral = np.sum(w * t / (1.0 + t * m))
    return -1.0 / (z - model.ratio * integral)


def solve_companion_stieltjes(
    model: SpectralModel,
    z: complex,
    config: SolverConfig = SolverConfig(),
    warm_start: complex | None = None,
) -> StieltjesSolution:
    """Damped fixed-point solve of the companion transform at z (Im z > 0).

    The undamped map is neutrally stable near the real axis; averaging with
    damping < 1 restores contraction away from support edges.  Non-convergence
    raises :class:`ConvergenceError` carrying the final residual — a residual
    plateau is also how multi-root suspicion shows up, so it is reported, not
    resolved.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ParameterError("z must lie in the open upper half-plane")
    c = model.ratio
    m = complex(warm_start) if warm_start is not None else -1.0 / z
    if m.imag <= 0:
        m = -1.0 / z
    d = config.damping
    residual = math.inf
    for it in range(1, config.max_iterations + 1):
        nxt = _companion_map(model, z, m)
        residual = abs(nxt - m)
        m = (1 - d) * m + d * nxt
        if residual <= config.tolerance:
            break
    else:
        raise ConvergenceError(f"companion fixed point stalled at z={z}", residual, config.max_iterations)
    m_f = (m - (c - 1) / z) / c
    return StieltjesSolution(z=z, m_under=m, m=m_f, residual=residual, iterations=it)


def density_from_stieltjes(
    model: SpectralModel,
    grid,
    eps: float = 1e-3,
    config: SolverConfig = SolverConfig(),
) -> Density:
    """Reconstruct the limiting density on a real grid via f = Im m_F(x+i*eps)/pi.

    Grid points are solved left to right, each warm-started from its
    neighbour's solution.  Points where the fixed point stalls are skipped and
    reported in ``Density.skipped``.
    """
    if not (eps > 0):
        raise ParameterError("eps must be positive")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ParameterError("grid must be a nonempty ascending 1-d vector")
    c = model.ratio
    xs, vals, skipped = [], [], []
    warm = None
    for x in grid:
        try:
            sol = solve_companion_stieltjes(model, complex(x, eps), config, warm_start=warm)
        except ConvergenceError:
            skipped.append(float(x))
            continue
        warm = sol.m_under
        xs.append(float(x))
        vals.append(max(0.0, sol.m.imag / np.pi))
    mass0 = max(0.0, 1 - 1 / c)
    return Density(np.array(xs), np.array(vals), mass0, tuple(skipped))


def support_clusters(density: Density, threshold: float | None = None) -> SupportClusters:
    """Maximal grid runs with density above threshold, bridged over 1-point dips.

    Default threshold is 1e-3 of the peak density.  Interval masses come from
    the trapezoid rule restricted to each run.
    """
    f = density.values
    x = density.grid
    if threshold is None:
        peak = float(f.max()) if f.size else 0.0
        threshold = 1e-3 * peak if peak > 0 else math.inf
    if not (threshold > 0):
        raise ParameterError("threshold must be positive")
    above = f > threshold
    # bridge single-point dips so grid noise cannot split a cluster
    for i in range(1, len(above) - 1):
        if not above[i] and above[i - 1] and above[i + 1]:
            above[i] = True
    intervals, masses = [], []
    i = 0
    n = len(above)
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        intervals.append((float(x[i]), float(x[j])))
        masses.append(float(np.trapezoid(f[i : j + 1], x[i : j + 1])) if j > i else 0.0)
        i = j + 1
    return SupportClusters(tuple(intervals), tuple(masses))


def capacity_identity(h, noise_var: float):
    """Evaluate (1/N) log det(I + H H^H / s2) two ways and return both.

    The direct route uses the eigenvalues of H H^H; the second integrates the
    resolvent-trace identity from s2 upward with an analytic truncation whose
    tail is bounded by tr(H H^H)/(N t) < 1e-8.
    """
    if not (noise_var > 0):
        raise ParameterError("noise variance must be positive")
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2:
        raise ParameterError("H must be a 2-d matrix")
    n_dim = h.shape[0]
    nu = np.clip(np.linalg.eigvalsh(h @ h.conj().T), 0.0, None)
    direct = float(np.mean(np.log1p(nu / noise_var)))

    trace = float(np.sum(nu))
    if trace == 0.0:
        return direct, 0.0
    upper = max(2 * noise_var, trace * 1e8 / n_dim)

    def integrand(t):
        return float(np.mean(nu / (t * (nu + t))))

    total = 0.0
    lo = noise_var
    while lo < upper:
        hi = min(lo * 100.0, upper)
        part, _ = quad(integrand, lo, hi, epsabs=1e-11, epsrel=1e-11, limit=200)
        total += part
        lo = hi
    return direct, total
