# %% Fast growth: a few huge summands dominate and the limit is stable
import numpy as np

from geolevy import BrownianMotion, EnsembleSpec, PoissonSeriesConfig, Proportional, sample_stable_series, simulate_ensemble
from geolevy.stats_verify import frechet_cdf, hill_estimator, ks_test

bm = BrownianMotion(0.0, 1.0)
spec = EnsembleSpec(bm, Proportional(1 / 8), N=10**5, replicates=400, top_k=10, seed=4)
out = simulate_ensemble(spec)
alpha = out.regime.alpha
print("alpha =", alpha, " s_N =", round(out.s, 2))

# %% the largest scaled summand is close to Fréchet(alpha)
print("KS W_1:N vs Fréchet: p =", ks_test(out.top[:, 0], frechet_cdf(alpha))[1])
print("share of the sum carried by the top term:", np.median(out.top[:, 0] / out.normalized[:, 0]).round(3))

# %% compare tails with the truncated Poisson series
series, bound = sample_stable_series(bm, alpha, [0.0], PoissonSeriesConfig(tau=1e-4), 4, size=400)
print("residual bound of the series:", bound)
print("Hill index, ensemble:", round(hill_estimator(out.normalized[:, 0], 40), 3),
      " series:", round(hill_estimator(series[:, 0], 40), 3))
