"""A walk through the library on the smallest interesting chain.

One component fails at rate lam and is repaired at rate mu. Every
number printed here has a closed form, printed alongside.
"""

import math

import numpy as np

from satmc import ModelChecker, build_state_space, parse_model
from satmc.numerics import steady_state, transient_distribution

SOURCE = """
ctmc
const double lam = 1;
const double mu = 3;

module unit
    s : [0..1] init 0;      // 0 up, 1 down
    [fail]   s=0 -> lam : (s'=1);
    [repair] s=1 -> mu  : (s'=0);
endmodule

rewards "uptime"
    s=0 : 1;
endrewards

rewards "repairs"
    [repair] true : 1;
endrewards
"""

c = build_state_space(parse_model(SOURCE))
print("states:", c.num_states, "transitions:", c.num_transitions)
print(c.rates.toarray())

# Transient law: P(down at t) = lam/(lam+mu) (1 - exp(-(lam+mu) t))
for t in (0.1, 1.0, 5.0):
    p = transient_distribution(c, t)
    exact = 0.25 * (1 - math.exp(-4 * t))
    print(f"t={t:<4}  P(down)={p[1]:.10f}  closed form={exact:.10f}")

# Long run: balance lam pi_up = mu pi_down
pi = steady_state(c)
print("steady state", pi, "expected", np.array([0.75, 0.25]))

# The same quantities as CSL queries
mc = ModelChecker(c)
for q in ["P=?[F<=1 s=1]", "S=?[s=0]", 'R{"uptime"}=?[C<=10]', 'R{"repairs"}=?[C<=10]', "P>0.5 [F<=1 s=1]"]:
    print(f"{q:28s} {mc.check(q).format_value()}")

# Chance of failing at least once by t=1 is 1 - exp(-lam)
print("1 - exp(-1) =", 1 - math.exp(-1))
