"""A 24-slot constellation with three spares and one repair line.

Shows the slot-loss probabilities, the repair-time requirement for
0.9999 availability, and a Monte Carlo cross-check of the numbers.
"""

from satmc import build_state_space, check
from satmc.ram.experiments import crossing, run_experiment_sweep
from satmc.ram.models import build_constellation_model, constellation_source
from satmc.sim import SimConfig, estimate_query

c = build_state_space(build_constellation_model())
print("states:", c.num_states, "transitions:", c.num_transitions)

queries = [
    "P=?[F<=T s=4]",
    "P=?[F<=T s=6]",
    'R{"num_fail"}=?[C<=T]',
    'R{"num_repair"}=?[C<=T]',
    'R{"availability"}=?[C<=T]',
    'R{"availability"}=?[C<=T]/T',
    "S=?[s<=3]",
]
for q in queries:
    print(f"{q:30s} {check(c, q).format_value()}")

# Losing six satellites needs three more failures than losing four,
# so its probability is far smaller.

# %% How slow may repairs be?
table = run_experiment_sweep(constellation_source(), ['R{"availability"}=?[C<=T]/T'], ["MTTR=0.1:3600:72"])
x, y = table.column('R{"availability"}=?[C<=T]/T')
print("MTTR giving 0.9999 availability:", round(crossing(x, y, 0.9999), 1), "h")

# %% Independent check by simulation
cfg = SimConfig(200_000, seed=7, confidence=0.99)
for q in ["P=?[F<=T s=4]", 'R{"num_repair"}=?[C<=T]']:
    est = estimate_query(c, q, cfg)
    print(f"{q:30s} analytic {check(c, q).value:.6g}  simulated {est.mean:.6g} [{est.ci_low:.6g}, {est.ci_high:.6g}]")
