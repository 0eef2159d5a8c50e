"""Compare base-mounted (ATDM) and joint-mounted (serial) actuators.

Runs the fixed-base disturbance scenario and prints the MAV/RMSV ratios,
then the circle fit of the antiparallelogram rolling profile.

    python3 demos/disturbance_comparison.py [condition]
"""

import sys

from atdm import linkage, sim

condition = int(sys.argv[1]) if len(sys.argv) > 1 else 1
atdm, serial = sim.run_scenario(sim.ScenarioConfig(condition=condition))
print(f"condition {condition}: ATDM / serial")
for name, row in sim.ratio_table(atdm, serial, condition).items():
    print(f"  {name:9s} MAV {row['MAV']:.4f}  RMSV {row['RMSV']:.4f}")

fit = linkage.fit_circle_approx(40.0, 12.0)
print(f"\nantiparallelogram approximating a 40 mm roller with 12 mm half-spacing:"
      f"\n  h = {fit.h:.3f} mm, l = {fit.l:.3f} mm, max radial error {fit.max_radial_error:.4f} mm")
