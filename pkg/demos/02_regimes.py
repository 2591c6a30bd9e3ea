# %% Which limit applies? classify growth rules
import math

from geolevy import (
    BrownianMotion,
    Constant,
    CriticalRule,
    ExplicitTable,
    Proportional,
    classify,
    moments_exact,
    scaling_B,
)

bm = BrownianMotion(0.0, 1.0)

for rule in (Constant(1.0), Proportional(4.0), Proportional(2.0), CriticalRule(0.5),
             Proportional(1.0), Proportional(0.5), Proportional(1 / 8)):
    print(f"{rule.to_dict()!s:40}  ->  {classify(bm, rule).to_dict()}")

# %% a measured table of (N, s_N); the last five ratios decide
table = ExplicitTable([(10**k, math.log(10**k) / 4.0) for k in range(2, 9)])
print("table:", classify(bm, table).kind)

# %% exact moments and the stable scale
print("E Z, Var Z at N=100, s=1:", moments_exact(bm, 100, 1.0))
n = 10**5
s = 8 * math.log(n)
print("B_N(0) =", scaling_B(bm, 0.5, n, s), "  B_N(1)/B_N(0) =", scaling_B(bm, 0.5, n, s, 1.0) / scaling_B(bm, 0.5, n, s))
