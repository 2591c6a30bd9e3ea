"""Ensemble simulation of ``Z_N(t) = sum_{i<=N} exp(xi_i(s_N + t))``.

Each replicate streams its ``N`` summands in fixed chunks of ``CHUNK`` paths.
Chunk ``c`` of replicate ``r`` draws from substream ``(seed, r, c)``, so the
output depends only on the spec, never on the number of worker threads.
Within a chunk the centred, scaled summands are added by numpy's pairwise
summation; chunk totals are combined with :func:`math.fsum`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError, DomainError
from .levy_models import BrownianMotion, LevyModel
from .regimes import (
    GrowthRule,
    NormalizationPlan,
    Proportional,
    RegimeClass,
    classify,
    normalization_plan,
)
from .rng import check_seed, substream

__all__ = [
    "EnsembleSpec",
    "EnsembleSummary",
    "simulate_ensemble",
    "top_order_statistics",
    "decompose_path",
    "rem_spec",
    "CHUNK",
    "DEFAULT_BUDGET",
]

CHUNK = 1 << 16
DEFAULT_BUDGET = 10**10


@dataclass(frozen=True)
class EnsembleSpec:
    model: LevyModel
    rule: GrowthRule
    N: int
    replicates: int
    grid: tuple[float, ...] = (0.0,)
    seed: int = 0
    top_k: int = 0
    regime: RegimeClass | None = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))
        check_seed(self.seed)
        if self.N < 1 or self.replicates < 1:
            raise DomainError("N and replicates must be >= 1")
        if self.top_k < 0:
            raise DomainError("top_k must be >= 0")
        if not self.grid or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise DomainError("grid must be non-empty and strictly increasing")
        cost = self.N * self.replicates * len(self.grid)
        if cost > self.budget:
            raise BudgetExceededError(
                f"N * R * |grid| = {cost:.3g} exceeds the sample budget {self.budget:.3g}"
            )
        if self.s + min(self.grid) < 0:
            raise DomainError(f"s_N + min(grid) = {self.s + min(self.grid)} < 0")

    @property
    def s(self) -> float:
        return self.rule.s_for(self.model, self.N)

    def resolved_regime(self) -> RegimeClass:
        return self.regime if self.regime is not None else classify(self.model, self.rule)


@dataclass
class EnsembleSummary:
    grid: np.ndarray
    s: float
    normalized: np.ndarray  # (R, |grid|)
    raw: np.ndarray  # (R, |grid|)
    top: np.ndarray  # (R, top_k), descending
    mode: str
    regime: RegimeClass
    plan: NormalizationPlan
    notes: dict = field(default_factory=dict)

    @property
    def lattice_warning(self) -> bool:
        return self.regime.lattice_warning


def _merge_top(top: np.ndarray, fresh: np.ndarray, k: int) -> np.ndarray:
    both = np.concatenate((top, fresh))
    if both.size <= k:
        return both
    return np.partition(both, both.size - k)[both.size - k :]


def _run_replicate(spec: EnsembleSpec, r: int, times, out_idx, zero_idx, log_scale, center, k):
    n_out = len(out_idx)
    norm_parts = [[] for _ in range(n_out)]
    raw_parts = [[] for _ in range(n_out)]
    top = np.empty(0)
    done, c = 0, 0
    while done < spec.N:
        n = min(CHUNK, spec.N - done)
        xi = spec.model.sample_path(times, substream(spec.seed, r, c), size=n)
        for j, col in enumerate(out_idx):
            x = xi[:, col]
            norm_parts[j].append(float(np.sum(np.exp(x - log_scale[col]) - center[col])))
            raw_parts[j].append(float(np.sum(np.exp(x))))
        if k:
            top = _merge_top(top, np.exp(xi[:, zero_idx] - log_scale[zero_idx]), k)
        done += n
        c += 1
    normalized = np.array([math.fsum(p) for p in norm_parts])
    raw = np.array([math.fsum(p) for p in raw_parts])
    return normalized, raw, np.sort(top)[::-1]


def simulate_ensemble(spec: EnsembleSpec, workers: int = 1) -> EnsembleSummary:
    """Simulate ``R`` independent replicates of the normalized ``Z_N`` on ``spec.grid``.

    ``top`` holds, per replicate, the ``top_k`` largest scaled summands at
    ``t = 0``, ``exp(xi_i(s_N) - log scale(0))``; in the fast regime these are
    the order statistics ``W_{1:N}(0) >= W_{2:N}(0) >= ...``.
    """
    regime = spec.resolved_regime()
    s = spec.s
    out_grid = np.asarray(spec.grid)
    sample_grid = np.union1d(out_grid, [0.0])
    plan = normalization_plan(spec.model, regime, spec.N, s, sample_grid, seed=spec.seed)
    times = s + sample_grid
    out_idx = np.searchsorted(sample_grid, out_grid)
    zero_idx = int(np.searchsorted(sample_grid, 0.0))
    k = min(spec.top_k, spec.N)

    def job(r):
        return _run_replicate(spec, r, times, out_idx, zero_idx, plan.log_scale, plan.summand_center, k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(job, range(spec.replicates)))
    else:
        results = [job(r) for r in range(spec.replicates)]

    out_plan = NormalizationPlan(
        out_grid,
        plan.mode,
        plan.log_scale[out_idx],
        plan.summand_center[out_idx],
        plan.N,
        plan.s,
        plan.center_stderr,
    )
    return EnsembleSummary(
        grid=out_grid,
        s=s,
        normalized=np.stack([res[0] for res in results]),
        raw=np.stack([res[1] for res in results]),
        top=np.stack([res[2] for res in results]) if k else np.empty((spec.replicates, 0)),
        mode=plan.mode,
        regime=regime,
        plan=out_plan,
    )


def top_order_statistics(spec: EnsembleSpec, workers: int = 1) -> np.ndarray:
    """Per-replicate descending ``(W_{1:N}(0), ..., W_{k:N}(0))`` in the fast regime."""
    if spec.resolved_regime().kind != "fast":
        raise DomainError("order statistics W_{i:N}(0) are defined in the fast regime only")
    if spec.top_k == 0:
        return np.empty((spec.replicates, 0))
    return simulate_ensemble(spec, workers=workers).top


def decompose_path(
    model: LevyModel,
    s: float,
    grid,
    gen: np.random.Generator,
    alpha: float,
    log_b0: float,
    size=None,
):
    """Sample ``W(0) = exp(xi(s) - b_N(0))`` and an independent path
    ``eta(t) = xi(s + t) - xi(s) - psi(alpha) t / alpha`` on ``grid >= 0``.

    ``W(t) = W(0) exp(eta(t))`` then has the law of ``exp(xi(s + t) - b_N(t))``.
    """
    g = np.asarray(grid, dtype=float)
    if np.any(g < 0):
        raise DomainError("decomposition grid must be >= 0")
    w0 = np.exp(model.sample_increment(s, gen, size=size) - log_b0)
    eta = model.sample_path(g, gen, size=size) - float(model.psi(alpha)) / alpha * g
    return w0, eta


def rem_spec(beta: float, n: int, replicates: int, seed: int = 0, grid=(0.0,), top_k: int = 0) -> EnsembleSpec:
    """Random energy model partition function: Brownian xi, ``N = 2^n``, ``s_N = beta^2 n``."""
    if not beta > 0 or n < 1:
        raise DomainError("REM preset needs beta > 0 and n >= 1")
    return EnsembleSpec(
        model=BrownianMotion(0.0, 1.0),
        rule=Proportional(math.log(2.0) / beta**2),
        N=2**n,
        replicates=replicates,
        grid=tuple(grid),
        seed=seed,
        top_k=top_k,
    )
