# %% Slow growth: normalized sums look like a stationary OU process
import math

import numpy as np
from scipy.stats import norm

from geolevy import BrownianMotion, EnsembleSpec, Proportional, sample_ou, simulate_ensemble
from geolevy.limit_processes import ou_rate
from geolevy.rng import substream
from geolevy.stats_verify import ks_test

bm = BrownianMotion(0.0, 1.0)
spec = EnsembleSpec(bm, Proportional(4.0), N=2**14, replicates=500, grid=(0.0, 0.5, 1.0), seed=3)
out = simulate_ensemble(spec)

print("s_N =", out.s, " mode =", out.mode)
print("KS vs N(0,1) at t=0: p =", ks_test(out.normalized[:, 0], norm.cdf)[1])

# %% empirical correlations against exp((psi(1) - psi(2)/2)|dt|)
emp = np.corrcoef(out.normalized.T)
ou = sample_ou(bm, [0.0, 0.5, 1.0], substream(3, 99), size=100_000)
print("ensemble corr:\n", emp.round(3))
print("OU sampler corr:\n", np.corrcoef(ou.T).round(3))
print("theory:", [round(math.exp(ou_rate(bm) * d), 3) for d in (0.5, 1.0)])
