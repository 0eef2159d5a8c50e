"""Modelling and simulation of a UAV carrying a 4-DOF tendon-driven arm.

Submodules: :mod:`spatial` (rotation and transform algebra), :mod:`joints`
(tendon mechanics), :mod:`arm` (kinematics), :mod:`dynamics` (coupling
disturbance and integration), :mod:`sim` (scenarios and metrics) and
:mod:`linkage` (antiparallelogram analysis).
"""

__version__ = "0.1.0"
