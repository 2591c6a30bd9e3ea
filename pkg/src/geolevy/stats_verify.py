"""Statistical checks confronting simulations with the asymptotic results.

Every check returns a :class:`CheckReport` whose pass flag can be recomputed
from the stored fields alone (see :meth:`CheckReport.recheck`).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.special import log_ndtr, ndtr
from scipy.stats import kstwobign

from .errors import ConfigError, DomainError
from .levy_models import BrownianMotion, LevyModel
from .limit_processes import clt_covariance, ou_rate, sample_clt_gaussian, sample_ou
from .montecarlo import EnsembleSpec, simulate_ensemble
from .rate_function import dual_point, rate_eval
from .regimes import truncated_exp_moment
from .rng import substream

__all__ = [
    "CheckReport",
    "ks_test",
    "hill_estimator",
    "default_hill_k",
    "frechet_cdf",
    "mean_check",
    "part1_schedule",
    "verify_truncated_moments",
    "verify_bahadur_rao",
    "verify_order_stats",
    "verify_covariance",
]

KS_ALPHA = 1e-3


@dataclass
class CheckReport:
    """Outcome of one check.

    ``comparison`` is ``"abs"`` (``|observed - reference| <= tolerance``
    elementwise) or ``"ge"`` (``observed >= reference``, used for p-values).
    When ``monotone`` is set, the sequence ``errors`` must also be
    nonincreasing.
    """

    name: str
    params: dict[str, Any]
    observed: list[float]
    reference: list[float]
    tolerance: list[float]
    comparison: str = "abs"
    stderr: list[float] | None = None
    seed: int | None = None
    monotone: bool = False
    errors: list[float] = field(default_factory=list)
    detail: dict[str, Any] = field(default_factory=dict)
    passed: bool = False

    def __post_init__(self):
        self.observed = [float(v) for v in np.atleast_1d(self.observed)]
        self.reference = [float(v) for v in np.atleast_1d(self.reference)]
        self.tolerance = [float(v) for v in np.atleast_1d(self.tolerance)]
        if self.stderr is not None:
            self.stderr = [float(v) for v in np.atleast_1d(self.stderr)]
        self.errors = [float(v) for v in self.errors]
        self.passed = self.recheck()

    def recheck(self) -> bool:
        obs = np.array(self.observed)
        ref = np.broadcast_to(np.array(self.reference), obs.shape)
        if self.comparison == "abs":
            tol = np.broadcast_to(np.array(self.tolerance), obs.shape)
            ok = bool(np.all(np.abs(obs - ref) <= tol))
        elif self.comparison == "ge":
            ok = bool(np.all(obs >= ref))
        else:
            raise ValueError(f"unknown comparison {self.comparison!r}")
        if self.monotone and len(self.errors) > 1:
            ok = ok and bool(np.all(np.diff(self.errors) <= 0))
        return ok

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# --------------------------------------------------------------------------
# generic statistics
# --------------------------------------------------------------------------


def ks_test(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
    """One-sample Kolmogorov--Smirnov statistic and asymptotic p-value."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n < 8:
        raise DomainError(f"KS test needs at least 8 observations, got {n}")
    if not np.all(np.isfinite(x)):
        raise DomainError("KS sample contains non-finite values")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    return d, float(kstwobign.sf(d * math.sqrt(n)))


def default_hill_k(n: int) -> int:
    return max(1, min(math.ceil(math.sqrt(n)), n // 10))


def hill_estimator(sample, k: int | None = None) -> float:
    """Hill estimate ``k / sum_{i<=k} log(X_(i) / X_(k+1))`` of the tail index."""
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    if k is None:
        k = default_hill_k(n)
    if not 1 <= k < n:
        raise DomainError(f"Hill estimator needs 1 <= k < n, got k={k}, n={n}")
    top = -np.partition(-x, k)[: k + 1]
    top = np.sort(top)[::-1]
    if top[k] <= 0:
        raise DomainError("Hill estimator needs the top k+1 observations to be positive")
    denom = float(np.sum(np.log(top[:k] / top[k])))
    if denom == 0:
        raise DomainError("Hill estimator undefined: top order statistics are tied")
    return k / denom


def frechet_cdf(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    def cdf(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-(u[pos] ** -alpha))
        return out

    return cdf


def mean_check(name: str, values, reference: float, n_se: float = 3.0, **params) -> CheckReport:
    """Sample mean within ``n_se`` standard errors of ``reference``."""
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size))
    return CheckReport(
        name, params, [v.mean()], [reference], [n_se * se], stderr=[se], detail={"n": int(v.size)}
    )


# --------------------------------------------------------------------------
# large deviations
# --------------------------------------------------------------------------


def part1_schedule(model: LevyModel, kappa: float, theta: float, xs: Sequence[float]):
    """``b = psi'(kappa) x + theta sqrt(psi''(kappa) x)`` along ``xs``."""
    p1, p2 = float(model.psi1(kappa)), float(model.psi2(kappa))
    return [(float(x), p1 * x + theta * math.sqrt(p2 * x)) for x in xs]


def _method_for(model) -> str:
    return "closed_form" if isinstance(model, BrownianMotion) else "tilted_mc"


def verify_truncated_moments(
    model: LevyModel,
    kappa: float,
    part: int,
    schedule: Sequence[tuple[float, float]],
    *,
    theta: float | None = None,
    tol: float | None = None,
    method: str | None = None,
    reps: int = 10**6,
    seed: int = 0,
) -> CheckReport:
    """Truncated exponential moments against their limits.

    * part 1 -- ``exp(-psi(kappa) x) E[exp(kappa xi(x)) 1{xi(x) <= b}] -> Phi(theta)``
      when ``b = psi'(kappa) x + theta sqrt(psi''(kappa) x) + o(sqrt x)``;
    * part 2 -- ``E[exp(kappa xi(x)) 1{xi(x) > b}]`` over
      ``exp(kappa b - I(b/x) x) / ((alpha - kappa) sqrt(2 pi psi''(alpha) x))`` tends to 1
      when ``b/x -> psi'(alpha)`` with ``alpha > kappa``;
    * part 3 -- the mirror statement for ``{xi(x) <= b}`` and ``alpha < kappa``.

    ``alpha`` is read off the last schedule point.  Comparisons are made on the
    ``exp(-psi(kappa) x)``-scaled quantities so nothing overflows.
    """
    if part not in (1, 2, 3):
        raise ConfigError(f"part must be 1, 2 or 3, got {part}")
    if not schedule:
        raise ConfigError("empty schedule")
    method = method or _method_for(model)
    d1, d2 = float(model.psi1(kappa)), float(model.psi2(kappa))
    params = {"kappa": kappa, "part": part, "method": method, "schedule": [list(p) for p in schedule]}

    if part == 1:
        if theta is None:
            raise ConfigError("part 1 needs theta")
        r_last = (schedule[-1][1] - d1 * schedule[-1][0]) / math.sqrt(d2 * schedule[-1][0])
        if abs(r_last - theta) > 0.05:
            raise ConfigError(
                f"schedule does not satisfy b = psi'(kappa) x + theta sqrt(psi''(kappa) x): "
                f"last standardized level {r_last:.4g} vs theta {theta}"
            )
        traj, ses = [], []
        for k, (x, b) in enumerate(schedule):
            v, se = truncated_exp_moment(model, kappa, x, b, method, reps, seed + k, scaled=True)
            traj.append(v)
            ses.append(se)
        ref = float(ndtr(theta))
        if tol is None:
            tol = 1e-10 if method == "closed_form" else 3.0 * ses[-1]
        params["theta"] = theta
        return CheckReport(
            "truncated_moments.part1", params, [traj[-1]], [ref], [tol],
            stderr=[ses[-1]], seed=seed, detail={"trajectory": traj},
        )

    x_last, b_last = schedule[-1]
    beta_lim = b_last / x_last
    for x, b in schedule:
        if part == 2 and not b / x > d1:
            raise ConfigError(f"part 2 needs b/x > psi'(kappa) = {d1}, got {b / x}")
        if part == 3 and not b / x < d1:
            raise ConfigError(f"part 3 needs b/x < psi'(kappa) = {d1}, got {b / x}")
    alpha = dual_point(model, beta_lim)
    if part == 3 and not 0 < alpha < kappa:
        raise ConfigError(f"part 3 needs alpha in (0, kappa), got {alpha}")
    traj, ses = [], []
    for k, (x, b) in enumerate(schedule):
        val, se = truncated_exp_moment(
            model, kappa, x, b, method, reps, seed + k, upper=(part == 2), scaled=True, tilt_at=alpha
        )
        rate, _, _ = rate_eval(model, b / x)
        log_rhs = (
            kappa * b
            - math.log(abs(alpha - kappa) * math.sqrt(2 * math.pi * float(model.psi2(alpha)) * x))
            - rate * x
            - float(model.psi(kappa)) * x
        )
        rhs = math.exp(log_rhs)
        traj.append(val / rhs)
        ses.append(se / rhs)
    if tol is None:
        tol = 0.05 + 3.0 * ses[-1]
    params["alpha"] = alpha
    return CheckReport(
        f"truncated_moments.part{part}", params, [traj[-1]], [1.0], [tol],
        stderr=[ses[-1]], seed=seed, detail={"trajectory": traj},
    )


def verify_bahadur_rao(
    model: LevyModel,
    beta: float,
    Ts: Sequence[float],
    *,
    tol: float = 0.005,
    method: str | None = None,
    reps: int = 10**6,
    seed: int = 0,
) -> CheckReport:
    """``P[xi(T) >= beta T]`` over ``exp(-I(beta) T) / (alpha sqrt(2 pi psi''(alpha) T))``.

    Passes when ``|ratio - 1|`` is nonincreasing in ``T`` and at most ``tol``
    at the largest ``T``.
    """
    b0, binf = model.beta0, model.beta_inf
    if not b0 < beta < binf:
        raise ConfigError(f"beta must lie strictly inside ({b0}, {binf}), got {beta}")
    method = method or _method_for(model)
    rate, _, alpha = rate_eval(model, beta)
    c2 = float(model.psi2(alpha))
    ratios, ses = [], []
    for k, T in enumerate(Ts):
        if method == "closed_form":
            # log-domain ratio keeps far tails exact
            z = (beta - model.mu) * math.sqrt(T) / model.sigma
            log_lhs = float(log_ndtr(-z))
        else:
            lhs, se_abs = truncated_exp_moment(
                model, 0.0, T, beta * T, method, reps, seed + k, upper=True, tilt_at=alpha
            )
            log_lhs = math.log(lhs) if lhs > 0 else -math.inf
        log_rhs = -rate * T - math.log(alpha * math.sqrt(2 * math.pi * c2 * T))
        ratio = math.exp(log_lhs - log_rhs)
        ratios.append(ratio)
        ses.append(0.0 if method == "closed_form" else se_abs * math.exp(-log_rhs))
    errs = [abs(r - 1) for r in ratios]
    return CheckReport(
        "bahadur_rao",
        {"beta": beta, "alpha": alpha, "T": list(Ts), "method": method},
        [ratios[-1]], [1.0], [tol + 3.0 * ses[-1]],
        stderr=[ses[-1]], seed=seed, monotone=True, errors=errs,
        detail={"ratios": ratios},
    )


# --------------------------------------------------------------------------
# fast regime
# --------------------------------------------------------------------------


def verify_order_stats(
    spec: EnsembleSpec,
    taus: Sequence[float] = (0.5, 1.0, 4.0),
    kappa: float | None = None,
    kappa_tau: float = 1.0,
    hill_k: int | None = None,
    hill_tol: float = 0.1,
    n_se: float = 3.0,
    workers: int = 1,
    summary=None,
) -> list[CheckReport]:
    """Upper order statistics of ``W_{i,N}(0)`` against the Poisson limit.

    Sub-checks: Fréchet law of the maximum (KS), exceedance counts
    ``N P[W > tau] -> tau^-alpha``, the truncated moment
    ``N E[W^kappa 1{W > tau}] -> alpha tau^(kappa - alpha) / (alpha - kappa)``
    (when ``kappa`` is given) and a Hill estimate of the index of the
    normalized sums (when ``hill_k`` is given).
    """
    regime = spec.resolved_regime()
    if regime.kind != "fast":
        raise ConfigError("order-statistics checks need the fast regime")
    if spec.model.lattice:
        raise ConfigError("order-statistics checks assume a non-lattice model")
    if spec.top_k < 1:
        raise ConfigError("order-statistics checks need top_k >= 1")
    if summary is None:
        summary = simulate_ensemble(spec, workers=workers)
    alpha = regime.alpha
    top = summary.top
    R = top.shape[0]
    base = {"N": spec.N, "R": R, "s": summary.s, "alpha": alpha, "seed": spec.seed}
    reports = []

    d, p = ks_test(top[:, 0], frechet_cdf(alpha))
    reports.append(CheckReport(
        "order_stats.frechet_max", base, [p], [KS_ALPHA], [0.0], comparison="ge",
        seed=spec.seed, detail={"D": d},
    ))

    def _guard(level):
        if top.shape[1] == spec.N:
            return
        if np.any(top[:, -1] > level):
            raise ConfigError(f"top_k={spec.top_k} too small to count exceedances of {level}")

    obs, ref, tol, ses = [], [], [], []
    for t in taus:
        _guard(t)
        counts = np.sum(top > t, axis=1)
        se = counts.std(ddof=1) / math.sqrt(R)
        obs.append(counts.mean())
        ref.append(t ** (-alpha))
        tol.append(n_se * se)
        ses.append(se)
    reports.append(CheckReport(
        "order_stats.tail_counts", {**base, "taus": list(taus)}, obs, ref, tol,
        stderr=ses, seed=spec.seed,
    ))

    if kappa is not None:
        if not 0 <= kappa < alpha:
            raise ConfigError(f"truncated-moment limit needs 0 <= kappa < alpha, got {kappa}")
        _guard(kappa_tau)
        vals = np.sum(np.where(top > kappa_tau, top**kappa, 0.0), axis=1)
        se = vals.std(ddof=1) / math.sqrt(R)
        reports.append(CheckReport(
            "order_stats.truncated_moment", {**base, "kappa": kappa, "tau": kappa_tau},
            [vals.mean()], [alpha / (alpha - kappa) * kappa_tau ** (kappa - alpha)],
            [n_se * se], stderr=[se], seed=spec.seed,
        ))

    if hill_k is not None:
        col = int(np.searchsorted(summary.grid, 0.0))
        a_hat = hill_estimator(summary.normalized[:, col], hill_k)
        reports.append(CheckReport(
            "order_stats.hill_index", {**base, "k": hill_k}, [a_hat], [alpha], [hill_tol],
            seed=spec.seed,
        ))
    return reports


# --------------------------------------------------------------------------
# covariances
# --------------------------------------------------------------------------


def _cov_with_se(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[0]
    c = x - x.mean(axis=0)
    prod = c[:, :, None] * c[:, None, :]
    cov = prod.sum(axis=0) / (n - 1)
    se = prod.std(axis=0, ddof=1) / math.sqrt(n)
    return cov, se


def verify_covariance(
    model: LevyModel,
    grid,
    mode: str,
    n: int = 10**5,
    seed: int = 0,
    n_se: float = 4.0,
) -> CheckReport:
    """Empirical covariance matrix against its closed form.

    ``rawExp`` -- ``exp(xi(t))`` sampled directly; ``cltG`` -- the Gaussian
    limit sampler; ``ou`` -- the Ornstein--Uhlenbeck sampler.
    """
    g = np.asarray(grid, dtype=float)
    gen = substream(seed, 0)
    if mode == "rawExp":
        x = np.exp(model.sample_path(g, gen, size=n))
        ref = clt_covariance(model, g)
    elif mode == "cltG":
        x = sample_clt_gaussian(model, g, gen, size=n)
        ref = clt_covariance(model, g)
    elif mode == "ou":
        x = sample_ou(model, g, gen, size=n)
        ref = np.exp(ou_rate(model) * np.abs(np.subtract.outer(g, g)))
    else:
        raise ConfigError(f"unknown covariance mode {mode!r}")
    cov, se = _cov_with_se(x)
    return CheckReport(
        f"covariance.{mode}",
        {"grid": g.tolist(), "n": n, "model": model.to_dict()},
        cov.ravel(), ref.ravel(), n_se * se.ravel(),
        stderr=se.ravel(), seed=seed,
    )
