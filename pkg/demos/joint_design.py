"""Walk through the rolling-joint designs: tendon compensation, torque, stiffness.

    python3 demos/joint_design.py
"""

import numpy as np

from atdm import joints

elbow, wrist = joints.ElbowDesign(), joints.WristDesign()
motor = elbow.cable.max_tension * elbow.R_capstan  # N*mm, saturates the cable

print("elbow: agonist and antagonist length changes cancel over the whole range")
for deg in (-45, -20, 0, 20, 45):
    th = np.radians(deg)
    ago, ant = joints.elbow_tendon_deltas(th, elbow)
    print(f"  {deg:+4d} deg  dL = {ago:+8.3f} / {ant:+8.3f} mm   "
          f"torque {joints.elbow_torque(th, motor, elbow) / 1e3:7.2f} N*m   "
          f"stiffness {joints.elbow_stiffness(th, elbow) / 1e6:6.2f} N*m/rad")

print("\nTAT windings multiply force by N and stiffness by N^2")
for n in (1, 2, 4, 6):
    f = joints.tat_output_force(motor, n, elbow.R_capstan)
    k = joints.tat_stiffness(elbow.cable.axial_stiffness, n)
    print(f"  N={n}: force {f:7.1f} N, stiffness {k:9.3g} N")

print("\n2-DOF wrist: stiffness depends on the bend only, torque on the bend direction too")
for deg in (0, 15, 30, 45):
    phi = np.radians(deg)
    tau = joints.wrist2dof_torque(phi, np.radians(30), (motor, motor), wrist)
    print(f"  phi={deg:2d} deg  torque at 30 deg bend {tau / 1e3:6.2f} N*m")
print(f"  stiffness at 30 deg bend {joints.wrist2dof_stiffness(np.radians(30), wrist) / 1e6:.1f}"
      " N*m/rad for every phi")

torque, stiff = joints.wrist_roll_torque_stiffness(motor, wrist)
print(f"\nroll: {torque / 1e3:.2f} N*m, stiffness {stiff / 1e6:.1f} N*m/rad")
