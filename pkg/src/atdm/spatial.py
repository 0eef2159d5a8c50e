"""Small 3-D spatial math toolkit.

Rotations are plain ``(3, 3)`` arrays, rigid transforms are ``(4, 4)``
homogeneous arrays and screws are 6-vectors ordered ``(angular; linear)``.
Everything here is a pure function on numpy arrays.
"""

import numpy as np


def skew(v):
    """Return the antisymmetric matrix ``S`` with ``S @ w == np.cross(v, w)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def cross(a, b):
    """Cross product of two 3-vectors; much cheaper than ``np.cross`` for single vectors."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def vee(m):
    """Inverse of :func:`skew` (antisymmetric part only)."""
    m = np.asarray(m, dtype=float)
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_rot(phi, theta, psi):
    """Body-to-inertial attitude matrix from roll ``phi``, pitch ``theta``, yaw ``psi``.

    ZYX convention, ``R = Rz(psi) @ Ry(theta) @ Rx(phi)``, written out entry by entry.
    """
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    return np.array([
        [ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp],
        [ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp],
        [-st, sf * ct, cf * ct],
    ])


def rot_to_rpy(r):
    """Inverse of :func:`rpy_to_rot` for pitch inside (-pi/2, pi/2)."""
    r = np.asarray(r, dtype=float)
    theta = np.arcsin(np.clip(-r[2, 0], -1.0, 1.0))
    phi = np.arctan2(r[2, 1], r[2, 2])
    psi = np.arctan2(r[1, 0], r[0, 0])
    return np.array([phi, theta, psi])


def exp_so3(omega, dt=1.0):
    """Rodrigues rotation for the rotation vector ``omega * dt``."""
    u = np.asarray(omega, dtype=float) * dt
    angle = np.linalg.norm(u)
    k = skew(u)
    if angle < 1e-8:
        # second-order Taylor expansion; exact to machine precision here
        return np.eye(3) + k + 0.5 * k @ k
    return (np.eye(3) + np.sin(angle) / angle * k
            + (1.0 - np.cos(angle)) / angle**2 * k @ k)


def project_to_so3(r):
    """Closest rotation matrix (polar decomposition via SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(r, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def is_rotation(r, tol=1e-9):
    r = np.asarray(r, dtype=float)
    return (r.shape == (3, 3)
            and np.allclose(r.T @ r, np.eye(3), atol=tol, rtol=0.0)
            and abs(np.linalg.det(r) - 1.0) <= tol)


# --- homogeneous transforms ------------------------------------------------

def transform(rot=None, trans=None):
    t = np.eye(4)
    if rot is not None:
        t[:3, :3] = rot
    if trans is not None:
        t[:3, 3] = trans
    return t


def trans_x(a):
    return transform(trans=(a, 0.0, 0.0))


def trans_z(d):
    return transform(trans=(0.0, 0.0, d))


def compose(*ts):
    out = np.eye(4)
    for t in ts:
        out = out @ t
    return out


def apply(t, p):
    """Map point(s) ``p`` (shape ``(3,)`` or ``(n, 3)``) through ``t``."""
    p = np.asarray(p, dtype=float)
    return p @ t[:3, :3].T + t[:3, 3]


def invert(t):
    r = t[:3, :3]
    return transform(r.T, -r.T @ t[:3, 3])


def screw(angular, linear):
    return np.concatenate([np.asarray(angular, dtype=float), np.asarray(linear, dtype=float)])
