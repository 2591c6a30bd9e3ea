"""Samplers for the limit processes of normalized sums of geometric Lévy processes.

* :func:`sample_clt_gaussian` -- the Gaussian limit for constant horizons,
* :func:`sample_ou` -- the stationary Ornstein--Uhlenbeck limit of the slow
  and critical regimes,
* :func:`sample_stable_series` -- the completely asymmetric alpha-stable
  limit of the fast regime, built from a truncated Poisson series
  ``sum_{U_i > tau} U_i exp(xi_i(t) - psi(alpha) t / alpha)`` minus a
  deterministic compensator.

Stable-series randomness is keyed: for sample ``r`` the Poisson arrivals come
from substream ``(root, r, 0)`` and the Lévy paths of atoms ``1024 j`` to
``1024 j + 1023`` from substream ``(root, r, 1, j)``.  Lowering the truncation
level therefore only appends atoms and leaves existing atoms and paths alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, NumericalError
from .levy_models import LevyModel
from .rng import substream

__all__ = [
    "PoissonSeriesConfig",
    "sample_ou",
    "ou_rate",
    "clt_covariance",
    "sample_clt_gaussian",
    "sample_poisson_points",
    "residual_bound",
    "tau_for_tolerance",
    "sample_stable_series",
    "stable_series_levels",
]

ATOM_BLOCK = 1024
DEFAULT_MAX_ATOMS = 10**7
EIG_FLOOR = 1e-12


def _check_grid(grid, nonnegative: bool) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0 or not np.all(np.isfinite(g)):
        raise DomainError("grid must be a non-empty finite 1-d sequence")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly increasing")
    if nonnegative and g[0] < 0:
        raise DomainError(
            "this process is only implemented on t >= 0; its negative half-line is not defined here"
        )
    return g


# --------------------------------------------------------------------------
# Gaussian limits
# --------------------------------------------------------------------------


def ou_rate(model: LevyModel) -> float:
    """Exponent ``psi(1) - psi(2)/2`` of the OU correlation ``exp(rate |dt|)``."""
    rate = float(model.psi(1.0)) - 0.5 * float(model.psi(2.0))
    if not rate < 0:
        raise NumericalError(f"psi(1) - psi(2)/2 = {rate} must be negative")
    return rate


def sample_ou(model: LevyModel, grid, gen: np.random.Generator, size=None) -> np.ndarray:
    """Stationary OU path with unit variance on a strictly increasing grid."""
    g = _check_grid(grid, nonnegative=False)
    rate = ou_rate(model)
    shape = () if size is None else tuple(np.atleast_1d(size))
    z = gen.standard_normal(shape + (g.size,))
    out = np.empty_like(z)
    out[..., 0] = z[..., 0]
    for j in range(1, g.size):
        rho = math.exp(rate * (g[j] - g[j - 1]))
        out[..., j] = rho * out[..., j - 1] + math.sqrt(-math.expm1(2 * rate * (g[j] - g[j - 1]))) * z[..., j]
    return out


def clt_covariance(model: LevyModel, grid) -> np.ndarray:
    """``Cov(G(t1), G(t2)) = exp(psi(2) t1 + psi(1)(t2 - t1)) - exp(psi(1)(t1 + t2))``, t1 <= t2."""
    g = np.asarray(grid, dtype=float)
    p1, p2 = float(model.psi(1.0)), float(model.psi(2.0))
    lo = np.minimum.outer(g, g)
    hi = np.maximum.outer(g, g)
    return np.exp(p2 * lo + p1 * (hi - lo)) - np.exp(p1 * (lo + hi))


def sample_clt_gaussian(model: LevyModel, grid, gen: np.random.Generator, size=None) -> np.ndarray:
    g = _check_grid(grid, nonnegative=True)
    cov = clt_covariance(model, g)
    w, v = np.linalg.eigh(cov)
    floor = -EIG_FLOOR * max(1.0, float(np.max(np.abs(w))))
    if np.any(w < floor):
        cond = float(np.max(np.abs(w)) / max(np.min(np.abs(w)), 1e-300))
        raise NumericalError(
            f"covariance matrix is not positive semidefinite: min eigenvalue {w.min():.3e}, "
            f"condition number {cond:.3e}"
        )
    root = v * np.sqrt(np.clip(w, 0.0, None))
    shape = () if size is None else tuple(np.atleast_1d(size))
    z = gen.standard_normal(shape + (g.size,))
    return z @ root.T


# --------------------------------------------------------------------------
# Poisson series for the stable limit
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonSeriesConfig:
    """Truncation of the series: fix ``tau`` or a target error ``tolerance``."""

    tau: float | None = None
    tolerance: float | None = None
    max_atoms: int = DEFAULT_MAX_ATOMS

    def __post_init__(self):
        if (self.tau is None) == (self.tolerance is None):
            raise ConfigError("set exactly one of tau and tolerance")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError(f"tolerance must be > 0, got {self.tolerance}")

    def resolve_tau(self, model: LevyModel, alpha: float, grid) -> float:
        if self.tau is not None:
            return float(self.tau)
        return tau_for_tolerance(model, alpha, self.tolerance, grid)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")


def sample_poisson_points(
    gen: np.random.Generator, tau: float, alpha: float, max_atoms: int = DEFAULT_MAX_ATOMS
) -> np.ndarray:
    """Descending points ``U_i = Gamma_i^(-1/alpha) > tau`` of a Poisson process
    with intensity ``alpha u^(-alpha-1) du``."""
    _check_alpha(alpha)
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    limit = tau ** (-alpha)
    if limit > max_atoms:
        raise ConfigError(
            f"expected {limit:.3g} atoms above tau={tau:g} exceeds the cap {max_atoms}; use a larger tau"
        )
    blocks = []
    last = 0.0
    total = 0
    while True:
        gam = last + np.cumsum(gen.standard_exponential(ATOM_BLOCK))
        keep = int(np.searchsorted(gam, limit, side="left"))
        blocks.append(gam[:keep])
        total += keep
        if total > max_atoms:
            raise ConfigError(f"more than {max_atoms} atoms above tau={tau:g}; use a larger tau")
        if keep < ATOM_BLOCK:
            break
        last = gam[-1]
    gam = np.concatenate(blocks)
    return gam ** (-1.0 / alpha)


def residual_bound(model: LevyModel, alpha: float, tau: float, grid) -> float:
    """Size of the part of the series below ``tau``.

    For ``alpha < 1`` the mean discarded mass
    ``alpha tau^(1-alpha) / (1-alpha) * max_t exp((psi(1) - psi(alpha)/alpha) t)``;
    otherwise the standard deviation bound
    ``sqrt(alpha tau^(2-alpha) / (2-alpha)) * max_t exp((psi(2)/2 - psi(alpha)/alpha) t)``.
    """
    _check_alpha(alpha)
    g = np.asarray(grid, dtype=float)
    drift = float(model.psi(alpha)) / alpha
    if alpha < 1:
        k = float(np.max(np.exp((float(model.psi(1.0)) - drift) * g)))
        return alpha * tau ** (1 - alpha) / (1 - alpha) * k
    k = float(np.max(np.exp((0.5 * float(model.psi(2.0)) - drift) * g)))
    return math.sqrt(alpha * tau ** (2 - alpha) / (2 - alpha)) * k


def tau_for_tolerance(model: LevyModel, alpha: float, tolerance: float, grid) -> float:
    """Largest ``tau`` whose residual bound does not exceed ``tolerance``."""
    unit = residual_bound(model, alpha, 1.0, grid)
    power = 1 - alpha if alpha < 1 else (2 - alpha) / 2
    with np.errstate(over="ignore", under="ignore"):
        tau = float(np.power(tolerance / unit, 1.0 / power))
    if not (tau > 0 and math.isfinite(tau)):
        raise ConfigError(
            f"tolerance {tolerance:g} needs a truncation level outside floating range at alpha={alpha}"
        )
    return tau


def _compensator(model, alpha, tau, g) -> np.ndarray:
    if alpha < 1:
        return np.zeros_like(g)
    if alpha == 1:
        return np.full_like(g, math.log(1.0 / tau))
    drift = float(model.psi(alpha)) / alpha
    return alpha * tau ** (1 - alpha) / (alpha - 1) * np.exp((float(model.psi(1.0)) - drift) * g)


def _root_seed(gen) -> int:
    if isinstance(gen, (int, np.integer)):
        return int(gen)
    return int(gen.integers(0, 2**63))


def stable_series_levels(
    model: LevyModel,
    alpha: float,
    grid,
    taus: Sequence[float],
    gen,
    size: int = 1,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> np.ndarray:
    """Truncated series at several levels on common atoms.

    Returns an array of shape ``(size, len(taus), len(grid))``; entry
    ``[r, j]`` is the compensated partial sum over atoms ``U_i > taus[j]``.
    ``gen`` is an integer root seed or a Generator (one draw fixes the root).
    """
    _check_alpha(alpha)
    g = _check_grid(grid, nonnegative=True)
    taus = np.asarray(taus, dtype=float)
    if np.any(taus <= 0):
        raise DomainError("truncation levels must be > 0")
    tau_min = float(taus.min())
    root = _root_seed(gen)
    drift = float(model.psi(alpha)) / alpha
    comp = np.stack([_compensator(model, alpha, t, g) for t in taus])
    need_paths = bool(np.any(g > 0))
    out = np.empty((size, taus.size, g.size))
    for r in range(size):
        u = sample_poisson_points(substream(root, r, 0), tau_min, alpha, max_atoms)
        if need_paths:
            weights = np.empty((u.size, g.size))
            for j, start in enumerate(range(0, u.size, ATOM_BLOCK)):
                xi = model.sample_path(g, substream(root, r, 1, j), size=ATOM_BLOCK)
                stop = min(start + ATOM_BLOCK, u.size)
                weights[start:stop] = xi[: stop - start]
            contrib = u[:, None] * np.exp(weights - drift * g)
        else:
            contrib = np.repeat(u[:, None], g.size, axis=1)
        csum = np.vstack([np.zeros((1, g.size)), np.cumsum(contrib, axis=0)])
        # u is descending, so the atoms above tau are a prefix
        counts = u.size - np.searchsorted(u[::-1], taus, side="right")
        out[r] = csum[counts] - comp
    return out


def sample_stable_series(
    model: LevyModel,
    alpha: float,
    grid,
    cfg: PoissonSeriesConfig,
    gen,
    size: int = 1,
) -> tuple[np.ndarray, float]:
    """Samples of the truncated stable process on ``grid``.

    Returns ``(paths, bound)`` with ``paths`` of shape ``(size, len(grid))`` and
    ``bound`` the residual bound at the truncation level used.
    """
    _check_alpha(alpha)
    g = _check_grid(grid, nonnegative=True)
    tau = cfg.resolve_tau(model, alpha, g)
    paths = stable_series_levels(model, alpha, g, [tau], gen, size=size, max_atoms=cfg.max_atoms)
    return paths[:, 0, :], residual_bound(model, alpha, tau, g)
