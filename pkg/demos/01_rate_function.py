# %% Rate functions of two Lévy models

import numpy as np

from geolevy import BrownianMotion, CompoundPoissonGauss, critical_points, rate_eval, rate_inverse

bm = BrownianMotion(0.0, 1.0)
cpg = CompoundPoissonGauss(rate=2.0, jump_mean=0.3, jump_sd=0.5, drift=-0.1)

# %% I(beta), I'(beta) and the dual point u on a few betas
for model in (bm, cpg):
    print(type(model).__name__, "beta0 =", model.beta0)
    for beta in model.beta0 + np.array([0.0, 0.5, 1.0, 2.0]):
        value, slope, u = rate_eval(model, beta)
        print(f"  beta={beta:6.3f}  I={value:10.6f}  I'={slope:8.5f}")

# %% inverse: beta with I(beta) = y
y = 1.25
beta = rate_inverse(cpg, y)
print("I^-1(1.25) =", beta, " check I =", rate_eval(cpg, beta)[0])

# %% the two thresholds separating the regimes
for model in (bm, cpg):
    l1, l2 = critical_points(model)
    print(f"{type(model).__name__}: lambda1={l1:.6f} lambda2={l2:.6f}")
