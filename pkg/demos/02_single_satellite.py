"""Reliability, maintainability and availability of one satellite.

Builds plot-ready tables for one satellite: replacement
probability over the mission, replacements against design reliability,
repairs against MTBF, and availability against the planned interruption
length.
"""

import numpy as np

from satmc import build_state_space, check
from satmc.ram.experiments import crossing, run_experiment_sweep
from satmc.ram.models import build_single_satellite_model, calibrate_interruptions, satellite_availability
from satmc.ram.params import RamParams

params = RamParams()
c = build_state_space(build_single_satellite_model(params))
print(f"lambda = {params.lam:.6g} per hour, mu = {params.mu:.6g} per hour")

# %% Point queries over the 15-year mission
for q in [
    "P=?[F<=T s=5]",
    'R{"num_replace"}=?[C<=T]',
    'R{"num_launch_fail"}=?[C<=T]',
    'R{"num_unplanned"}=?[C<=T]',
    'R{"num_repair"}=?[C<=T]',
    'R{"num_repair_fail"}=?[C<=T]',
    'R{"availability"}=?[C<=T]',
]:
    print(f"{q:32s} {check(c, q).format_value()}")

# %% Replacements fall as design reliability rises
table = run_experiment_sweep(build_single_satellite_model, ['R{"num_replace"}=?[C<=T]'], ["r=0.01:0.99:0.05"])
print(table.to_csv())

# %% Repairs against MTBF at fixed r
table = run_experiment_sweep(build_single_satellite_model, ['R{"num_repair"}=?[C<=T]'], ["MTBF=1:129600:8640"])
x, y = table.column('R{"num_repair"}=?[C<=T]')
print("MTBF where expected repairs drop below 1:", crossing(x, y, 1.0))

# %% Interruption durations are unknown; recover them from two targets
d_u, d_p = calibrate_interruptions()
print(f"calibrated d_u = {d_u:.5f} h, d_p = {d_p:.5f} h")
o = np.arange(1, 49, 3.0)
avail = np.array([satellite_availability(params.replace(d_p=v)) for v in o])
for v, a in zip(o, avail):
    print(f"o={v:4.0f} h  availability={a:.6f}")
print("0.995 is crossed at o =", round(crossing(o, avail, 0.995), 3), "h")
