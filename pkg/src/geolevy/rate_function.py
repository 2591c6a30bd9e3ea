"""Legendre--Fenchel rate function of a Lévy cumulant.

Everything is parametrized through the dual variable ``u >= 0``: for
``beta = psi'(u)`` we have ``I(beta) = u beta - psi(u)`` and ``I'(beta) = u``.
The rate function is therefore evaluated by solving ``psi'(u) = beta`` and
inverted by solving ``g(u) = u psi'(u) - psi(u) = y``; both equations have a
strictly increasing left-hand side on ``[0, inf)`` and are solved by Newton
steps kept inside a bisection bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, NumericalError
from .levy_models import CompoundPoissonGauss, LevyModel

__all__ = [
    "RateProfile",
    "rate_eval",
    "rate_inverse",
    "critical_points",
    "solve_alpha",
    "tilted_rate",
    "sup_rate",
]


@dataclass(frozen=True)
class RateProfile:
    """Rate function of ``model`` with solver settings.

    ``rtol`` is the relative tolerance on the dual variable ``u``.
    """

    model: LevyModel
    rtol: float = 1e-12
    max_iter: int = 100

    def conjugate_at(self, u: float) -> float:
        """``g(u) = u psi'(u) - psi(u)``, i.e. ``I(psi'(u))``."""
        m = self.model
        return float(u * m.psi1(u) - m.psi(u))


def _profile(p) -> RateProfile:
    return p if isinstance(p, RateProfile) else RateProfile(p)


def _solve_increasing(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    target: float,
    rtol: float,
    max_iter: int,
    scale: Callable[[float], float] | None = None,
) -> float:
    """Root of ``f(u) = target`` on ``[0, inf)`` for strictly increasing ``f``.

    The upper bracket end is doubled until it overshoots; Newton iterates that
    leave the bracket are replaced by bisection.  Iteration also stops once the
    residual is at rounding level, measured against ``scale(u)`` (default
    ``|f(u)|``), which matters near ``u = 0`` where relative steps never settle.
    """
    lo, hi = 0.0, 1.0
    for _ in range(2000):
        if f(hi) > target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError(f"could not bracket root of f(u) = {target}")

    u = 0.5 * (lo + hi)
    # halving from [0, 1] can take ~1100 steps for targets near the float floor
    for _ in range(max_iter * 4 + 2200):
        fu = f(u)
        r = fu - target
        noise = _EPS * (abs(target) + (abs(fu) if scale is None else scale(u)))
        if abs(r) <= noise:
            return u
        if r > 0:
            hi = u
        else:
            lo = u
        d = fprime(u)
        step_ok = False
        if d > 0 and math.isfinite(d):
            nxt = u - r / d
            if lo <= nxt <= hi:
                step_ok = True
        if not step_ok:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - u) <= rtol * max(abs(nxt), 1e-300) or hi - lo <= rtol * max(hi, 1e-300):
            return nxt
        u = nxt
    raise NumericalError(f"root solver did not converge for target {target}")


_EPS = 8 * 2.0**-52


def dual_point(profile, beta: float) -> float:
    """Solve ``psi'(u) = beta`` for ``u >= 0``."""
    p = _profile(profile)
    m = p.model
    b0, binf = m.beta0, m.beta_inf
    if not (b0 <= beta < binf):
        raise DomainError(f"beta={beta!r} outside the rate-function domain [{b0!r}, {binf!r})")
    if beta == b0:
        return 0.0
    return _solve_increasing(
        lambda u: float(m.psi1(u)), lambda u: float(m.psi2(u)), beta, p.rtol, p.max_iter
    )


def rate_eval(profile, beta: float) -> tuple[float, float, float]:
    """Return ``(I(beta), I'(beta), u)`` where ``psi'(u) = beta``."""
    p = _profile(profile)
    u = dual_point(p, beta)
    if u == 0.0:
        return 0.0, 0.0, 0.0
    value = u * beta - float(p.model.psi(u))
    return value, u, u


def sup_rate(profile) -> float:
    """``lim I(beta)`` as ``beta -> beta_inf``."""
    m = _profile(profile).model
    if math.isinf(m.beta_inf):
        return math.inf
    # Only bounded case: compound Poisson with negative, deterministic jumps,
    # where u psi'(u) - psi(u) -> rate.
    if isinstance(m, CompoundPoissonGauss):
        return float(m.rate)
    raise NotImplementedError(type(m).__name__)


def rate_inverse(profile, y: float) -> float:
    """Return ``beta`` with ``I(beta) = y``, solving ``u psi'(u) - psi(u) = y``."""
    p = _profile(profile)
    top = sup_rate(p)
    if not (0.0 <= y < top):
        raise DomainError(f"y={y!r} outside the range of the rate function [0, {top!r})")
    if y == 0.0:
        return p.model.beta0
    u = _solve_g(p, y)
    return float(p.model.psi1(u))


def _solve_g(p: RateProfile, y: float) -> float:
    m = p.model
    return _solve_increasing(
        p.conjugate_at,
        lambda u: float(u * m.psi2(u)),
        y,
        p.rtol,
        p.max_iter,
        scale=lambda u: abs(u * float(m.psi1(u))) + abs(float(m.psi(u))),
    )


def critical_points(profile) -> tuple[float, float]:
    """``lambda_1 = psi'(1) - psi(1)`` and ``lambda_2 = 2 psi'(2) - psi(2)``."""
    p = _profile(profile)
    return p.conjugate_at(1.0), p.conjugate_at(2.0)


def solve_alpha(profile, lam: float) -> float:
    """Unique ``alpha in (0, 2)`` with ``I(psi'(alpha)) = lam``."""
    p = _profile(profile)
    lam1, lam2 = critical_points(p)
    if not (0.0 < lam < lam2):
        raise DomainError(f"lambda={lam!r} outside (0, lambda_2={lam2!r})")
    if math.isclose(lam, lam1, rel_tol=1e-12, abs_tol=0.0):
        return 1.0
    return _solve_g(p, lam)


def tilted_rate(profile, beta: float, kappa: float) -> float:
    """Rate function of the exponentially tilted process: ``I(beta) + psi(kappa) - kappa beta``."""
    p = _profile(profile)
    value, _, _ = rate_eval(p, beta)
    return value + float(p.model.psi(kappa)) - kappa * beta
