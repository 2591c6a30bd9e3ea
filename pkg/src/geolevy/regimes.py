"""Growth rules, regime classification and normalizing sequences.

A growth rule ties the number of summands ``N`` to the time horizon ``s_N``.
The ratio ``log N / s_N`` compared with the critical points of the rate
function decides the limit law of ``Z_N(t) = sum_i exp(xi_i(s_N + t))``:

========  ==============================  ===========================
regime    growth                          normalization
========  ==============================  ===========================
zero      ``s_N`` constant                ``(Z - E Z) / sqrt(N)``
slow      ``log N / s_N > lambda_2``      ``(Z - E Z) / sqrt(Var Z)``
critical  ``log N ~ lambda_2 s_N + ...``  ``(Z - E Z) / sqrt(Var Z)``
fast      ``log N / s_N -> lambda``       ``(Z - A_N) / B_N``
========  ==============================  ===========================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.special import log_ndtr

from .errors import ClassificationError, ConfigError, DomainError, UnsupportedMethodError
from .levy_models import BrownianMotion, LevyModel
from .rate_function import critical_points, rate_inverse, solve_alpha, sup_rate
from .rng import as_generator, substream

__all__ = [
    "Constant",
    "Proportional",
    "CriticalRule",
    "ExplicitTable",
    "GrowthRule",
    "RegimeClass",
    "NormalizationPlan",
    "classify",
    "moments_exact",
    "log_scaling_B",
    "scaling_B",
    "centering_A",
    "truncated_exp_moment",
    "normalization_plan",
    "growth_from_dict",
]

TABLE_TAIL = 5
TABLE_TOL = 1e-3
MC_CHUNK = 1 << 18


# --------------------------------------------------------------------------
# growth rules
# --------------------------------------------------------------------------


class GrowthRule:
    kind: str = ""

    def s_for(self, model: LevyModel, N: float) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(GrowthRule):
    s: float = 0.0
    kind = "constant"

    def __post_init__(self):
        if not self.s >= 0:
            raise DomainError(f"constant growth needs s >= 0, got {self.s}")

    def s_for(self, model, N):
        return float(self.s)

    def to_dict(self):
        return {"kind": self.kind, "s": float(self.s)}


@dataclass(frozen=True)
class Proportional(GrowthRule):
    """``s_N = log(N) / lam``."""

    lam: float
    kind = "proportional"

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"proportional growth needs lambda > 0, got {self.lam}")

    def s_for(self, model, N):
        return math.log(N) / self.lam

    def to_dict(self):
        return {"kind": self.kind, "lambda": float(self.lam)}


@dataclass(frozen=True)
class CriticalRule(GrowthRule):
    """``log N = lambda_2 s + 2 theta sqrt(psi''(2) s)``."""

    theta: float = 0.0
    kind = "critical"

    def _coeffs(self, model):
        _, lam2 = critical_points(model)
        return lam2, 2.0 * self.theta * math.sqrt(float(model.psi2(2.0)))

    def n_for(self, model: LevyModel, s: float) -> int:
        """Nearest integer to ``exp(lambda_2 s + 2 theta sqrt(psi''(2) s))``."""
        if s < 0:
            raise DomainError(f"s must be >= 0, got {s}")
        lam2, b = self._coeffs(model)
        n = round(math.exp(lam2 * s + b * math.sqrt(s)))
        if n < 1:
            raise DomainError(f"critical rule gives N = {n} < 1 at s = {s}")
        return int(n)

    def s_for(self, model, N):
        # lam2 r^2 + b r - log N = 0 with r = sqrt(s)
        lam2, b = self._coeffs(model)
        disc = b * b + 4.0 * lam2 * math.log(N)
        if disc < 0:
            raise DomainError(f"no s >= 0 satisfies the critical rule for N = {N}")
        r = (-b + math.sqrt(disc)) / (2.0 * lam2)
        if r < 0:
            raise DomainError(f"no s >= 0 satisfies the critical rule for N = {N}")
        return r * r

    def to_dict(self):
        return {"kind": self.kind, "theta": float(self.theta)}


@dataclass(frozen=True)
class ExplicitTable(GrowthRule):
    pairs: tuple[tuple[int, float], ...]
    kind = "table"

    def __post_init__(self):
        pairs = tuple((int(n), float(s)) for n, s in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise DomainError("explicit table is empty")
        ns = [n for n, _ in pairs]
        if any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
            raise DomainError("explicit table needs strictly increasing N >= 1")
        if any(not s >= 0 for _, s in pairs):
            raise DomainError("explicit table needs s_N >= 0")

    def s_for(self, model, N):
        for n, s in self.pairs:
            if n == N:
                return s
        raise DomainError(f"N = {N} is not listed in the explicit growth table")

    def to_dict(self):
        return {"kind": self.kind, "pairs": [[n, s] for n, s in self.pairs]}


def growth_from_dict(d: dict[str, Any]) -> GrowthRule:
    d = dict(d)
    kind = d.pop("kind", None)
    spec = {
        "constant": (Constant, {"s": "s"}),
        "proportional": (Proportional, {"lambda": "lam"}),
        "critical": (CriticalRule, {"theta": "theta"}),
        "table": (ExplicitTable, {"pairs": "pairs"}),
    }
    if kind not in spec:
        raise ConfigError(f"unknown growth kind {kind!r}; expected one of {sorted(spec)}")
    cls, keys = spec[kind]
    extra = set(d) - set(keys)
    if extra:
        raise ConfigError(f"unknown keys for growth {kind!r}: {sorted(extra)}")
    return cls(**{keys[k]: v for k, v in d.items()})


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeClass:
    kind: str  # "zero" | "slow" | "critical" | "fast"
    lambda1: float
    lambda2: float
    theta: float | None = None
    lam: float | None = None
    alpha: float | None = None
    lattice_warning: bool = False

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "regime": self.kind,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lattice_warning": self.lattice_warning,
        }
        if self.kind == "critical":
            d["theta"] = self.theta
        if self.kind == "fast":
            d["lambda"] = self.lam
            d["alpha"] = self.alpha
        return d


def _fast(model, lam, lam1, lam2) -> RegimeClass:
    return RegimeClass(
        "fast", lam1, lam2, lam=lam, alpha=solve_alpha(model, lam), lattice_warning=model.lattice
    )


def classify(model: LevyModel, rule: GrowthRule) -> RegimeClass:
    lam1, lam2 = critical_points(model)
    if isinstance(rule, Constant):
        return RegimeClass("zero", lam1, lam2)
    if isinstance(rule, CriticalRule):
        return RegimeClass("critical", lam1, lam2, theta=float(rule.theta))
    if isinstance(rule, Proportional):
        lam = float(rule.lam)
        if math.isclose(lam, lam2, rel_tol=1e-12, abs_tol=0.0):
            return RegimeClass("critical", lam1, lam2, theta=0.0)
        if lam > lam2:
            return RegimeClass("slow", lam1, lam2)
        return _fast(model, lam, lam1, lam2)
    if isinstance(rule, ExplicitTable):
        return _classify_table(model, rule, lam1, lam2)
    raise ClassificationError(f"unsupported growth rule {rule!r}")


def _classify_table(model, rule: ExplicitTable, lam1, lam2) -> RegimeClass:
    svals = {s for _, s in rule.pairs}
    if len(svals) == 1:
        return RegimeClass("zero", lam1, lam2)
    tail = [(n, s) for n, s in rule.pairs[-TABLE_TAIL:]]
    if any(s == 0 for _, s in tail):
        raise ClassificationError("table tail contains s_N = 0 with nonconstant s_N")
    ratios = np.array([math.log(n) / s for n, s in tail])
    if ratios.min() > lam2 + TABLE_TOL:
        # liminf above lambda_2 is enough for the slow regime
        return RegimeClass("slow", lam1, lam2)
    if ratios.max() - ratios.min() > TABLE_TOL:
        raise ClassificationError(
            f"log N / s_N does not settle over the last {len(tail)} entries: "
            f"range [{ratios.min():.6g}, {ratios.max():.6g}]"
        )
    lam = float(ratios[-1])
    if abs(lam - lam2) <= TABLE_TOL:
        n, s = tail[-1]
        theta = (math.log(n) - lam2 * s) / (2.0 * math.sqrt(float(model.psi2(2.0)) * s))
        return RegimeClass("critical", lam1, lam2, theta=theta)
    if lam > lam2:
        return RegimeClass("slow", lam1, lam2)
    return _fast(model, lam, lam1, lam2)


# --------------------------------------------------------------------------
# moments and normalizing sequences
# --------------------------------------------------------------------------


def moments_exact(model: LevyModel, N: float, s: float, t: float = 0.0) -> tuple[float, float]:
    """Exact mean and variance of ``Z_N(t)``."""
    x = s + t
    if x < 0:
        raise DomainError(f"s + t must be >= 0, got {x}")
    p1, p2 = float(model.psi(1.0)), float(model.psi(2.0))
    mean = N * math.exp(p1 * x)
    var = N * math.exp(2.0 * p1 * x) * math.expm1((p2 - 2.0 * p1) * x)
    return mean, var


def _log_var(model, N, x) -> float:
    p1, p2 = float(model.psi(1.0)), float(model.psi(2.0))
    return math.log(N) + 2.0 * p1 * x + math.log(math.expm1((p2 - 2.0 * p1) * x))


def log_scaling_B(model: LevyModel, alpha: float, N: float, s: float, t: float = 0.0) -> float:
    """``b_N(t) = log B_N(t)``."""
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if not s > 0:
        raise DomainError(f"B_N needs s_N > 0, got {s}")
    log_n = math.log(N)
    c = (log_n - math.log(alpha * math.sqrt(2.0 * math.pi * float(model.psi2(alpha)) * s))) / s
    top = sup_rate(model)
    if not 0 <= c < top:
        raise DomainError(
            f"B_N undefined: c_N = {c:.6g} outside [0, {top}); N = {N:g} is too small "
            f"for s = {s:g}, increase N"
        )
    return float(model.psi(alpha)) / alpha * t + s * rate_inverse(model, c)


def scaling_B(model: LevyModel, alpha: float, N: float, s: float, t: float = 0.0) -> float:
    return math.exp(log_scaling_B(model, alpha, N, s, t))


def truncated_exp_moment(
    model: LevyModel,
    kappa: float,
    x: float,
    b: float,
    method: str = "closed_form",
    reps: int = 10**6,
    gen=None,
    *,
    upper: bool = False,
    scaled: bool = False,
    tilt_at: float | None = None,
) -> tuple[float, float]:
    """Truncated exponential moment ``E[exp(kappa xi(x)) 1{xi(x) <= b}]``.

    With ``upper=True`` the event is ``xi(x) > b`` instead.  With
    ``scaled=True`` the result is multiplied by ``exp(-psi(kappa) x)``, which
    turns it into a probability under the model tilted by ``kappa`` and keeps
    it representable when ``psi(kappa) x`` is large.

    ``method="closed_form"`` is exact for Brownian motion.  ``"tilted_mc"``
    samples ``xi(x)`` under the model tilted by ``tilt_at`` (default
    ``kappa``) and reweights; choosing ``tilt_at`` at the saddle point of a
    rare event gives an importance sampler.  ``gen`` may be a Generator or an
    integer seed; integer seeds are split into fixed-size substreams.

    Returns ``(value, stderr)``.
    """
    if not x > 0:
        raise DomainError(f"x must be > 0, got {x}")
    log_mgf = float(model.psi(kappa)) * x
    if method == "closed_form":
        if not isinstance(model, BrownianMotion):
            raise UnsupportedMethodError(
                f"closed-form truncated moments need Brownian motion, not {type(model).__name__}"
            )
        if b == math.inf:
            log_p = -math.inf if upper else 0.0
        elif b == -math.inf:
            log_p = 0.0 if upper else -math.inf
        else:
            z = (b - float(model.psi1(kappa)) * x) / (model.sigma * math.sqrt(x))
            log_p = float(log_ndtr(-z if upper else z))
        log_val = log_p if scaled else log_p + log_mgf
        return math.exp(log_val), 0.0
    if method == "tilted_mc":
        theta = kappa if tilt_at is None else float(tilt_at)
        tilted = model.tilt(theta)
        shift = (float(model.psi(theta)) - float(model.psi(kappa))) * x
        total, total_sq = 0.0, 0.0
        for k, n in enumerate(_chunks(reps)):
            g = substream(gen, k) if isinstance(gen, (int, np.integer)) else as_generator(gen)
            xi = tilted.sample_increment(x, g, size=n)
            hit = xi > b if upper else xi <= b
            if theta == kappa:
                w = hit.astype(float)
            else:
                w = np.where(hit, np.exp((kappa - theta) * xi + shift), 0.0)
            total += math.fsum(w)
            total_sq += math.fsum(w * w)
        mean = total / reps
        var = max(total_sq / reps - mean * mean, 0.0)
        se = math.sqrt(var / reps)
        factor = 1.0 if scaled else math.exp(log_mgf)
        return mean * factor, se * factor
    raise UnsupportedMethodError(f"unknown method {method!r}")


def _chunks(n: int):
    n = int(n)
    if n < 1:
        raise DomainError(f"reps must be >= 1, got {n}")
    while n > 0:
        yield min(n, MC_CHUNK)
        n -= MC_CHUNK


def _lambda1_truncated(model, N, s, alpha, reps, seed) -> tuple[float, float]:
    """Scaled moment ``exp(-psi(1) s) E[exp(xi(s)) 1{xi(s) <= b_N(0)}]``."""
    b0 = log_scaling_B(model, alpha, N, s, 0.0)
    if isinstance(model, BrownianMotion):
        return truncated_exp_moment(model, 1.0, s, b0, scaled=True)
    return truncated_exp_moment(
        model, 1.0, s, b0, "tilted_mc", reps=reps, gen=seed, scaled=True
    )


def centering_A(
    model: LevyModel,
    regime: RegimeClass,
    N: float,
    s: float,
    t: float = 0.0,
    reps: int = 10**6,
    seed: int = 0,
) -> float:
    """Centering ``A_N(t)`` of the fast regime (three branches in ``lambda``)."""
    if regime.kind != "fast":
        raise DomainError(f"A_N is defined for the fast regime only, got {regime.kind!r}")
    alpha = regime.alpha
    if alpha < 1:
        return 0.0
    p1 = float(model.psi(1.0))
    if alpha == 1.0:
        m, _ = _lambda1_truncated(model, N, s, alpha, reps, seed)
        a = math.exp(p1 * t) * N * math.exp(p1 * s) * m
        if t < 0:
            ell = (model.beta0 - float(model.psi1(1.0))) * t
            a += ell * scaling_B(model, alpha, N, s, t)
        return a
    return math.exp(p1 * t) * N * math.exp(p1 * s)


@dataclass
class NormalizationPlan:
    """Per-grid-point centering and scale for ``(Z_N(t) - center) / scale``.

    ``log_scale`` and ``summand_center = center / (N scale)`` are the values
    actually used by the simulator; they avoid forming ``center`` and
    ``scale`` when those overflow.
    """

    grid: np.ndarray
    mode: str  # "mean_sqrt_n" | "mean_var" | "stable_ab"
    log_scale: np.ndarray
    summand_center: np.ndarray
    N: int
    s: float
    center_stderr: float = 0.0
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    @property
    def center(self) -> np.ndarray:
        return self.N * self.scale * self.summand_center


def normalization_plan(
    model: LevyModel,
    regime: RegimeClass,
    N: int,
    s: float,
    grid: Sequence[float],
    reps: int = 10**6,
    seed: int = 0,
) -> NormalizationPlan:
    grid = np.asarray(grid, dtype=float)
    x = s + grid
    if np.any(x < 0):
        raise DomainError("s_N + t must be >= 0 on the whole grid")
    p1 = float(model.psi(1.0))
    if regime.kind == "zero":
        log_scale = np.full(grid.shape, 0.5 * math.log(N))
        center = np.exp(p1 * x - log_scale)
        return NormalizationPlan(grid, "mean_sqrt_n", log_scale, center, N, s)
    if regime.kind in ("slow", "critical"):
        if np.any(x == 0):
            raise DomainError("Var Z_N(t) = 0 at s_N + t = 0; cannot normalize by it")
        log_scale = np.array([0.5 * _log_var(model, N, xi) for xi in x])
        center = np.exp(p1 * x - log_scale)
        return NormalizationPlan(grid, "mean_var", log_scale, center, N, s)
    if regime.kind != "fast":
        raise ClassificationError(f"unknown regime {regime.kind!r}")

    alpha = regime.alpha
    log_scale = np.array([log_scaling_B(model, alpha, N, s, t) for t in grid])
    se = 0.0
    if alpha < 1:
        center = np.zeros(grid.shape)
    elif alpha == 1.0:
        m, se = _lambda1_truncated(model, N, s, alpha, reps, seed)
        ell = (model.beta0 - float(model.psi1(1.0))) * np.minimum(grid, 0.0)
        center = np.exp(p1 * x - log_scale) * m + ell / N
    else:
        center = np.exp(p1 * x - log_scale)
    return NormalizationPlan(grid, "stable_ab", log_scale, center, N, s, center_stderr=se)
