"""Spiked-covariance analysis: outlier limits, Tracy-Widom fluctuations,
GLRT / condition-number detection and failure localization.

A rank-one perturbation I + omega u u^H of the white population covariance
produces, for |omega| > sqrt(c), an outlier sample eigenvalue with limit

    rho(omega) = 1 + omega + c (1 + omega) / omega

and a squared eigenvector projection |u^H u_hat|^2 converging to

    xi(omega) = (1 - c / omega^2) / (1 + c / omega)

while below the threshold the extreme eigenvalue sticks to the bulk edge and
its centered-scaled fluctuation follows the complex Tracy-Widom law.  The
squared-projection reading of xi is adopted throughout (the unsquared variant
is inconsistent with the fluctuation statement built on |.|^2).

Downward spikes (omega in (-1, 0), e.g. a variance drop) are handled through
the smallest eigenvalue and its mirrored Tracy-Widom fluctuation, available
only for c < 1.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import ParameterError, RegimeError, SingularityError
from .linalg import RngStream, complex_gaussian, hermitian_eig
from .stieltjes import mp_stieltjes_edge, mp_support

__all__ = [
    "SpikeLimit",
    "TracyWidomTable",
    "FluctuationStats",
    "FailureHypothesis",
    "GlrtDecision",
    "spike_limits",
    "downward_spike_limits",
    "tracy_widom",
    "tw_quantile",
    "tw_standardize",
    "tw_standardize_smallest",
    "glrt_statistic",
    "glrt_test",
    "condition_number_statistic",
    "spike_outlier_root",
    "calibrate_fluctuations",
    "failure_hypotheses",
    "localize_failure",
]

TW_TABLE_ENV = "RMT_TW_TABLE"


@dataclass(frozen=True)
class SpikeLimit:
    """Limiting behaviour of one spike: outlier location and projection."""

    omega: float
    ratio: float
    detectable: bool
    rho: float
    xi: float


@dataclass(frozen=True)
class FluctuationStats:
    """Monte-Carlo calibrated covariance of sqrt(N)(|u^H u_hat|^2 - xi, lam - rho)."""

    omega: float
    ratio: float
    xi: float
    rho: float
    sigma: np.ndarray
    trials: int


@dataclass(frozen=True)
class FailureHypothesis:
    """Rank-one failure model: spike strength and direction for one parameter."""

    index: int
    omega: float
    u: np.ndarray
    alpha: float


@dataclass(frozen=True)
class GlrtDecision:
    signal: bool
    statistic: float
    standardized: float
    threshold: float
    false_alarm_rate: float


def spike_limits(omega: float, c: float) -> SpikeLimit:
    """Limits (rho, xi) for an upward spike omega > 0 at ratio c."""
    if not (omega > 0) or not (c > 0):
        raise ParameterError("omega and c must be positive")
    sq = math.sqrt(c)
    if omega > sq:
        rho = 1 + omega + c * (1 + omega) / omega
        xi = (1 - c / omega**2) / (1 + c / omega)
        return SpikeLimit(omega, c, True, rho, xi)
    return SpikeLimit(omega, c, False, (1 + sq) ** 2, 0.0)


def downward_spike_limits(omega: float, c: float) -> SpikeLimit:
    """Limits for a variance-drop spike omega in (-1, 0), smallest-eigenvalue side.

    Only meaningful for c < 1, where the bulk stays away from zero; refused
    otherwise.
    """
    if not (-1 <= omega < 0):
        raise ParameterError("downward spike needs omega in [-1, 0)")
    if not (0 < c < 1):
        raise RegimeError("downward spikes are only resolvable for c < 1")
    sq = math.sqrt(c)
    if -omega > sq:
        rho = 1 + omega + c * (1 + omega) / omega
        xi = (1 - c / omega**2) / (1 + c / omega)
        return SpikeLimit(omega, c, True, rho, xi)
    return SpikeLimit(omega, c, False, (1 - sq) ** 2, 0.0)


# --- Tracy-Widom table ------------------------------------------------------


@dataclass(frozen=True)
class TracyWidomTable:
    """Tabulated complex Tracy-Widom CDF with monotone-cubic interpolation."""

    s: np.ndarray
    cdf: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        cdf = np.asarray(self.cdf, dtype=float)
        if s.ndim != 1 or s.size < 4 or np.any(np.diff(s) <= 0):
            raise ParameterError("table grid must be ascending with >= 4 points")
        if s[0] > -10 or s[-1] < 6:
            raise ParameterError("table must cover at least [-10, 6]")
        if np.any(np.diff(cdf) < 0) or np.any(cdf < 0) or np.any(cdf > 1):
            raise ParameterError("table cdf must be nondecreasing within [0, 1]")
        if not (cdf[0] < 1e-6 and cdf[-1] > 1 - 1e-6):
            raise ParameterError("table cdf must be ~0 at -10 and ~1 at 6")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "cdf", cdf)
        object.__setattr__(self, "_interp", PchipInterpolator(s, cdf, extrapolate=False))

    @classmethod
    def load(cls, path=None) -> "TracyWidomTable":
        """Load a two-column s,cdf table; defaults to the bundled one.

        The ``RMT_TW_TABLE`` environment variable overrides the bundled path.
        """
        provenance_lines = []
        if path is None:
            path = os.environ.get(TW_TABLE_ENV)
        if path is None:
            ref = resources.files("rmt").joinpath("data/tw2_cdf.csv")
            text = ref.read_text()
            provenance = "bundled tw2_cdf.csv"
        else:
            with open(path) as fh:
                text = fh.read()
            provenance = str(path)
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("s,"):
                if line.startswith("#"):
                    provenance_lines.append(line.lstrip("# "))
                continue
            a, b = line.split(",")
            rows.append((float(a), float(b)))
        arr = np.array(rows)
        if provenance_lines:
            provenance += ": " + " ".join(provenance_lines)
        return cls(arr[:, 0], arr[:, 1], provenance)


_DEFAULT_TABLE = None


def default_tw_table() -> TracyWidomTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None or os.environ.get(TW_TABLE_ENV):
        _DEFAULT_TABLE = TracyWidomTable.load()
    return _DEFAULT_TABLE


def tracy_widom(table: TracyWidomTable, s: float) -> float:
    """CDF value at s, monotone-cubic interpolated; clamped to {0,1} off-table."""
    if s <= table.s[0]:
        return 0.0
    if s >= table.s[-1]:
        return 1.0
    return float(np.clip(table._interp(s), 0.0, 1.0))


def tw_quantile(table: TracyWidomTable, p: float) -> float:
    """Inverse CDF by bisection to 1e-8 in s."""
    if not (0 < p < 1):
        raise ParameterError("p must lie strictly inside (0, 1)")
    lo, hi = float(table.s[0]), float(table.s[-1])
    flo = tracy_widom(table, lo)
    if p <= flo:
        return lo
    return float(brentq(lambda s: tracy_widom(table, s) - p, lo, hi, xtol=1e-8))


def tw_standardize(lambda1: float, n_dim: int, c: float) -> float:
    """Center and scale the largest eigenvalue for Tracy-Widom comparison."""
    if n_dim < 1 or not (c > 0):
        raise ParameterError("need N >= 1 and c > 0")
    sq = math.sqrt(c)
    edge = (1 + sq) ** 2
    return n_dim ** (2.0 / 3.0) * (lambda1 - edge) / ((1 + sq) ** (4.0 / 3.0) * sq)


def tw_standardize_smallest(lambda_min: float, n_dim: int, c: float) -> float:
    """Mirrored standardization at the left bulk edge (c < 1 only)."""
    if n_dim < 1 or not (0 < c < 1):
        raise ParameterError("need N >= 1 and 0 < c < 1")
    sq = math.sqrt(c)
    edge = (1 - sq) ** 2
    return n_dim ** (2.0 / 3.0) * (edge - lambda_min) / ((1 - sq) ** (4.0 / 3.0) * sq)


# --- detectors ---------------------------------------------------------------


def glrt_statistic(eigs) -> float:
    """Largest eigenvalue over the average eigenvalue of (1/n) Y Y^H."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        raise ParameterError("empty eigenvalue vector")
    mean = float(np.mean(eigs))
    if mean <= 0:
        raise SingularityError("zero trace: GLRT statistic undefined")
    return float(np.max(eigs)) / mean


def glrt_test(eigs, n_dim: int, n_samples: int, far: float, table: TracyWidomTable | None = None) -> GlrtDecision:
    """Threshold the standardized GLRT statistic at the 1-far TW quantile.

    Rejects the noise hypothesis iff the standardized statistic is strictly
    greater than the quantile.
    """
    if not (0 < far < 1):
        raise ParameterError("false alarm rate must lie in (0, 1)")
    if table is None:
        table = default_tw_table()
    stat = glrt_statistic(eigs)
    c = n_dim / n_samples
    std = tw_standardize(stat, n_dim, c)
    thr = tw_quantile(table, 1 - far)
    return GlrtDecision(std > thr, stat, std, thr, far)


def condition_number_statistic(eigs) -> float:
    """Largest over smallest sample eigenvalue; needs a nonsingular spectrum."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        raise ParameterError("empty eigenvalue vector")
    lam_max = float(np.max(eigs))
    lam_min = float(np.min(eigs))
    if lam_min <= 1e-14 * lam_max:
        raise SingularityError("smallest eigenvalue is numerically zero")
    return lam_max / lam_min


def spike_outlier_root(omega: float, c: float) -> float:
    """Locate the outlier as the root of 1 + z (omega/(1+omega)) m(z) right of the bulk.

    Independent cross-check of the closed-form rho: the root condition comes
    from the determinant factorization of the rank-one perturbed model.
    """
    if not (omega > 0) or not (c > 0):
        raise ParameterError("omega and c must be positive")
    if omega <= math.sqrt(c):
        raise RegimeError(f"no outlier root for omega <= sqrt(c) = {math.sqrt(c):.6g}")
    _, b, _ = mp_support(c)

    def f(z):
        return 1.0 + z * (omega / (1.0 + omega)) * mp_stieltjes_edge(c, z)

    lo = b * (1 + 1e-12)
    hi = max(2 * (1 + omega) * (1 + c), b + 1.0)
    while f(hi) <= 0:
        hi *= 2
    return float(brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16))


# --- fluctuation calibration and localization --------------------------------


def calibrate_fluctuations(omega: float, c: float, n_dim: int, trials: int, rng: RngStream) -> FluctuationStats:
    """Monte-Carlo covariance of sqrt(N)(|u^H u_hat|^2 - xi, lam - rho).

    Requires the detectable regime |omega| > sqrt(c); downward spikes use the
    smallest eigenvalue and need c < 1.  The calibrated matrix is ridged by
    1e-9 if needed to stay positive definite.
    """
    if trials < 1000:
        raise ParameterError("calibration needs at least 1000 trials")
    if n_dim < 2:
        raise ParameterError("need N >= 2")
    if omega > 0:
        limit = spike_limits(omega, c)
    else:
        limit = downward_spike_limits(omega, c)
    if not limit.detectable:
        raise RegimeError("fluctuations are Gaussian only for |omega| > sqrt(c)")
    n_samples = max(n_dim + 1, int(round(n_dim / c)))
    scale = math.sqrt(1.0 + omega)
    take_largest = omega > 0
    pairs = np.empty((trials, 2))
    base = rng.generator().integers(0, 2**63 - 1)
    for t in range(trials):
        g = RngStream(int(base), t).generator()
        x = complex_gaussian(n_dim, n_samples, g)
        x[0, :] *= scale
        eig = hermitian_eig(x @ x.conj().T / n_samples)
        idx = -1 if take_largest else 0
        lam = eig.eigenvalues[idx]
        proj = abs(eig.eigenvectors[0, idx]) ** 2
        pairs[t] = (proj - limit.xi, lam - limit.rho)
    pairs *= math.sqrt(n_dim)
    sigma = np.cov(pairs.T)
    if np.linalg.eigvalsh(sigma)[0] <= 0:
        sigma = sigma + 1e-9 * np.eye(2)
    return FluctuationStats(omega, c, limit.xi, limit.rho, sigma, trials)


def failure_hypotheses(h, t_cov, alphas) -> list[FailureHypothesis]:
    """Rank-one spike hypotheses for per-parameter variance changes.

    For parameter k with change alpha_k, the whitened observation covariance
    becomes I + omega_k u_k u_k^H with v_k = T^(-1/2) H e_k,
    omega_k = ((1+alpha_k)^2 - 1) ||v_k||^2 and u_k = v_k/||v_k|| phase-fixed
    so its first nonzero component is real positive.
    """
    h = np.asarray(h, dtype=complex)
    t_cov = np.asarray(t_cov, dtype=complex)
    if h.ndim != 2 or t_cov.shape != (h.shape[0], h.shape[0]):
        raise ParameterError("H must be N x M and T must be N x N")
    alphas = [float(a) for a in alphas]
    if len(alphas) != h.shape[1]:
        raise ParameterError("need one alpha per column of H")
    if any(a < -1 for a in alphas):
        raise ParameterError("alphas must be >= -1")
    te = hermitian_eig(t_cov)
    if te.eigenvalues[0] <= 1e-14 * te.eigenvalues[-1]:
        raise SingularityError("T must be positive definite")
    inv_sqrt = (te.eigenvectors / np.sqrt(te.eigenvalues)) @ te.eigenvectors.conj().T
    out = []
    for k, alpha in enumerate(alphas):
        v = inv_sqrt @ h[:, k]
        norm2 = float(np.vdot(v, v).real)
        u = v / math.sqrt(norm2)
        nz = np.flatnonzero(np.abs(u) > 1e-12)[0]
        u = u * (np.conj(u[nz]) / abs(u[nz]))
        omega = ((1.0 + alpha) ** 2 - 1.0) * norm2
        out.append(FailureHypothesis(k, omega, u, alpha))
    return out


def localize_failure(lam: float, u_hat, hypotheses, stats) -> tuple[int, np.ndarray]:
    """Pick the failure hypothesis maximizing the Gaussian fluctuation score.

    score_i = -N (v - m_i)^T Sigma_i^{-1} (v - m_i) - log det Sigma_i with
    v = (|u_i^H u_hat|^2, lam) and m_i = (xi_i, rho_i).  Returns the 0-based
    argmax (ties break to the lowest index) and all scores.
    """
    if len(hypotheses) == 0:
        raise ParameterError("need at least one hypothesis")
    if len(stats) != len(hypotheses):
        raise ParameterError("need calibrated stats for every hypothesis")
    u_hat = np.asarray(u_hat, dtype=complex)
    scores = np.empty(len(hypotheses))
    for i, (hyp, st) in enumerate(zip(hypotheses, stats)):
        if st is None:
            raise ParameterError(f"hypothesis {i} is missing calibration")
        n_dim = u_hat.size
        proj = abs(np.vdot(hyp.u, u_hat)) ** 2
        delta = np.array([proj - st.xi, lam - st.rho])
        sign, logdet = np.linalg.slogdet(st.sigma)
        if sign <= 0:
            raise ParameterError(f"calibrated covariance {i} is not positive definite")
        scores[i] = -n_dim * float(delta @ np.linalg.solve(st.sigma, delta)) - logdet
    return int(np.argmax(scores)), scores
