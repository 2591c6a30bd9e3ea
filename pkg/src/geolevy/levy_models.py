"""Parametric Lévy processes with closed-form cumulants.

Two families are provided, both with a cumulant generating function
``psi(u) = log E exp(u xi(1))`` that is finite for every real ``u``:

* :class:`BrownianMotion` -- ``psi(u) = mu u + sigma^2 u^2 / 2``
* :class:`CompoundPoissonGauss` -- Gaussian jumps at Poisson times plus a
  linear drift, ``psi(u) = c u + rate (exp(m u + s^2 u^2 / 2) - 1)``.

Derivatives of ``psi`` are analytic.  Samplers are exact (no time
discretization): a compound Poisson increment over ``t`` is drawn as a
Poisson jump count ``K`` followed by a single ``N(K m, K s^2)`` draw.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "LevyModel",
    "BrownianMotion",
    "CompoundPoissonGauss",
    "eval_cumulant",
    "domain_bounds",
    "sample_increment",
    "sample_path",
    "tilt",
    "model_from_dict",
]


class LevyModel:
    """Common interface of the model families (immutable value objects)."""

    kind: str = ""

    def psi(self, u):
        raise NotImplementedError

    def psi1(self, u):
        raise NotImplementedError

    def psi2(self, u):
        raise NotImplementedError

    @property
    def beta0(self) -> float:
        """Mean drift ``psi'(0) = E xi(1)``."""
        return float(self.psi1(0.0))

    @property
    def beta_inf(self) -> float:
        """``lim psi'(u)`` as ``u -> +inf``; ``math.inf`` when unbounded."""
        raise NotImplementedError

    @property
    def lattice(self) -> bool:
        return False

    def tilt(self, kappa: float) -> "LevyModel":
        raise NotImplementedError

    def sample_increment(self, t: float, gen: np.random.Generator, size=None):
        raise NotImplementedError

    def sample_path(self, grid, gen: np.random.Generator, size=None) -> np.ndarray:
        """Values of ``xi`` on a nondecreasing grid of times ``>= 0``.

        Returns an array of shape ``(len(grid),)`` or ``size + (len(grid),)``.
        Increments over the gaps of ``[0, *grid]`` are drawn in grid order.
        """
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise DomainError("grid must be a non-empty 1-d sequence")
        if grid[0] < 0:
            raise DomainError(f"grid must start at t >= 0, got {grid[0]}")
        gaps = np.diff(grid, prepend=0.0)
        if np.any(gaps < 0):
            raise DomainError("grid must be nondecreasing")
        shape = () if size is None else tuple(np.atleast_1d(size))
        out = np.empty(shape + (grid.size,))
        for j, dt in enumerate(gaps):
            out[..., j] = self.sample_increment(float(dt), gen, size=shape or None)
        return np.cumsum(out, axis=-1)

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class BrownianMotion(LevyModel):
    mu: float = 0.0
    sigma: float = 1.0

    kind = "brownian"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise DomainError("Brownian parameters must be finite")
        if self.sigma <= 0:
            raise DomainError(f"volatility must be > 0, got sigma={self.sigma}")

    def psi(self, u):
        return self.mu * u + 0.5 * self.sigma**2 * np.square(u)

    def psi1(self, u):
        return self.mu + self.sigma**2 * np.asarray(u, dtype=float)

    def psi2(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.sigma**2)

    @property
    def beta_inf(self) -> float:
        return math.inf

    def tilt(self, kappa: float) -> "BrownianMotion":
        return replace(self, mu=self.mu + self.sigma**2 * kappa)

    def sample_increment(self, t, gen, size=None):
        if t < 0:
            raise DomainError(f"increment length must be >= 0, got {t}")
        z = gen.standard_normal(size)
        return self.mu * t + self.sigma * math.sqrt(t) * z

    def to_dict(self):
        return {"kind": self.kind, "mu": float(self.mu), "sigma": float(self.sigma)}


@dataclass(frozen=True)
class CompoundPoissonGauss(LevyModel):
    rate: float = 1.0
    jump_mean: float = 0.0
    jump_sd: float = 1.0
    drift: float = 0.0

    kind = "cpg"

    def __post_init__(self):
        vals = (self.rate, self.jump_mean, self.jump_sd, self.drift)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("compound Poisson parameters must be finite")
        if self.rate <= 0:
            raise DomainError(f"jump rate must be > 0, got {self.rate}")
        if self.jump_sd < 0:
            raise DomainError(f"jump sd must be >= 0, got {self.jump_sd}")
        if self.jump_sd == 0 and self.jump_mean == 0:
            raise DomainError("degenerate model: jumps are identically zero, xi(1) is a.s. constant")

    def _mgf_jump(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(self.jump_mean * u + 0.5 * self.jump_sd**2 * u * u)

    def psi(self, u):
        return self.drift * np.asarray(u, dtype=float) + self.rate * np.expm1(
            self.jump_mean * np.asarray(u, dtype=float)
            + 0.5 * self.jump_sd**2 * np.square(u)
        )

    def psi1(self, u):
        u = np.asarray(u, dtype=float)
        return self.drift + self.rate * (self.jump_mean + self.jump_sd**2 * u) * self._mgf_jump(u)

    def psi2(self, u):
        u = np.asarray(u, dtype=float)
        slope = self.jump_mean + self.jump_sd**2 * u
        return self.rate * (slope * slope + self.jump_sd**2) * self._mgf_jump(u)

    @property
    def beta_inf(self) -> float:
        if self.jump_sd > 0 or self.jump_mean > 0:
            return math.inf
        return float(self.drift)

    @property
    def lattice(self) -> bool:
        return self.jump_sd == 0

    def tilt(self, kappa: float) -> "CompoundPoissonGauss":
        m, s = self.jump_mean, self.jump_sd
        return replace(
            self,
            rate=self.rate * math.exp(m * kappa + 0.5 * s * s * kappa * kappa),
            jump_mean=m + s * s * kappa,
        )

    def sample_increment(self, t, gen, size=None):
        if t < 0:
            raise DomainError(f"increment length must be >= 0, got {t}")
        k = gen.poisson(self.rate * t, size)
        z = gen.standard_normal(size)
        return self.drift * t + self.jump_mean * k + self.jump_sd * np.sqrt(k) * z

    def to_dict(self):
        d = asdict(self)
        return {"kind": self.kind, **{key: float(v) for key, v in d.items()}}


_MODEL_KEYS = {
    "brownian": (BrownianMotion, {"mu", "sigma"}),
    "cpg": (CompoundPoissonGauss, {"rate", "jump_mean", "jump_sd", "drift"}),
}


def model_from_dict(d: dict[str, Any]) -> LevyModel:
    """Inverse of ``LevyModel.to_dict``; unknown keys are rejected."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _MODEL_KEYS:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of {sorted(_MODEL_KEYS)}")
    cls, keys = _MODEL_KEYS[kind]
    extra = set(d) - keys
    if extra:
        raise ConfigError(f"unknown keys for model {kind!r}: {sorted(extra)}")
    return cls(**{k: float(v) for k, v in d.items()})


def eval_cumulant(model: LevyModel, u: float) -> tuple[float, float, float]:
    """Return ``(psi(u), psi'(u), psi''(u))``."""
    return float(model.psi(u)), float(model.psi1(u)), float(model.psi2(u))


def domain_bounds(model: LevyModel) -> tuple[float, float]:
    """Return ``(beta_0, beta_inf)``, the range of ``psi'`` on ``[0, inf)``."""
    return model.beta0, model.beta_inf


def sample_increment(model: LevyModel, t: float, gen: np.random.Generator, size=None):
    return model.sample_increment(t, gen, size=size)


def sample_path(model: LevyModel, grid, gen: np.random.Generator, size=None) -> np.ndarray:
    return model.sample_path(grid, gen, size=size)


def tilt(model: LevyModel, kappa: float) -> LevyModel:
    """Exponential twist: the tilted cumulant is ``psi(u + kappa) - psi(kappa)``."""
    return model.tilt(kappa)
