# %% Random energy model: N = 2^n, s_N = beta^2 n
import math

import numpy as np

from geolevy import classify, moments_exact, simulate_ensemble
from geolevy.montecarlo import rem_spec

# high temperature (slow), and a low temperature point (fast)
for beta in (0.4, 1.6):
    spec = rem_spec(beta, n=16, replicates=200, seed=5)
    regime = classify(spec.model, spec.rule)
    out = simulate_ensemble(spec)
    mean, var = moments_exact(spec.model, spec.N, spec.s)
    print(f"beta={beta}: regime={regime.kind}"
          + (f" alpha={regime.alpha:.3f}" if regime.kind == "fast" else ""))
    print(f"  log E Z = {math.log(mean):.3f}, mean log Z = {np.log(out.raw[:, 0]).mean():.3f}")
