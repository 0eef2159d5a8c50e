"""Antiparallelogram (crossed four-bar) analysis.

Pins in the plane of the linkage, base frame at the midpoint of the base
link: ``A = (-w, 0)`` and ``C = (w, 0)`` are fixed, ``B = (a, b)`` and
``D = (c, d)`` move.  Links ``AB`` and ``CD`` have length ``l`` and
cross; ``AC`` and ``BD`` have length ``2w``.  The crossing point of the
long links traces an ellipse with foci ``A`` and ``C``.  ``h`` shifts that
ellipse along y and is the free design parameter of the rolling profile.

Screws are ``(angular; linear)`` 6-vectors; a revolute twist through the
point ``r`` with unit axis ``z`` is ``(z; z x r)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

# pairing matrix of the reciprocal product <S1, S2> = w1.v2 + w2.v1
_PAIRING = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])
RANK_RTOL = 1e-8


class DegeneratePoseError(ValueError):
    pass


class PolarDomainError(ValueError):
    pass


class FitError(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def _check_shape(l, w):
    if not l > 2 * w >= 0:
        raise ValueError(f"need l > 2w >= 0, got l={l}, w={w}")


@dataclass(frozen=True)
class AntiparConfig:
    l: float
    w: float
    h: float = 0.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError("w must be positive")
        _check_shape(self.l, self.w)

    @property
    def pins(self):
        """``(A, B, C, D)`` as 2-vectors."""
        return (np.array([-self.w, 0.0]), np.array([self.a, self.b]),
                np.array([self.w, 0.0]), np.array([self.c, self.d]))

    @classmethod
    def symmetric(cls, l, w, h=0.0):
        """Pose with ``BD`` parallel to the base, ``B = (w, y)`` and ``D = (-w, y)``."""
        _check_shape(l, w)
        y = np.sqrt(l**2 - 4 * w**2)
        return cls(l, w, h, w, y, -w, y)

    @classmethod
    def from_angle(cls, l, w, h, angle):
        """Pose with link ``AB`` at ``angle`` from +x; ``D`` takes the crossed assembly."""
        _check_shape(l, w)
        pa, pc = np.array([-w, 0.0]), np.array([w, 0.0])
        pb = pa + l * np.array([np.cos(angle), np.sin(angle)])
        # circle(C, l) meets circle(B, 2w)
        chord = pb - pc
        dist = np.linalg.norm(chord)
        if dist < 1e-12:
            raise DegeneratePoseError("B coincides with C")
        along = (l**2 - 4 * w**2 + dist**2) / (2 * dist)
        off2 = l**2 - along**2
        if off2 < 0:
            raise DegeneratePoseError(f"link angle {angle:.6g} cannot be assembled")
        u = chord / dist
        n = np.array([-u[1], u[0]])
        cands = [pc + along * u + s * np.sqrt(off2) * n for s in (1.0, -1.0)]
        parallelogram = pc + (pb - pa)
        pd = max(cands, key=lambda p: np.linalg.norm(p - parallelogram))
        if np.linalg.norm(pd - parallelogram) < 1e-9 * l:
            raise DegeneratePoseError("crossed and parallelogram assemblies coincide")
        return cls(l, w, h, pb[0], pb[1], pd[0], pd[1])


@dataclass(frozen=True)
class ScrewSystem:
    screws: np.ndarray
    frame: str = "base"
    rank: int = field(init=False)

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.screws, dtype=float))
        if s.shape[-1] != 6:
            raise ValueError("screws must be 6-vectors")
        object.__setattr__(self, "screws", s)
        object.__setattr__(self, "rank", _rank(s))

    def __len__(self):
        return len(self.screws)


def _rank(m):
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0


def reciprocal_product(s1, s2):
    return np.asarray(s1) @ _PAIRING @ np.asarray(s2)


def screw_angle(s1, s2):
    """Angle between two screws as lines through the origin of R^6 (sign-free).

    Half-angle form; ``arccos`` of the normalised dot product loses about
    eight digits near zero.
    """
    a = np.asarray(s1, dtype=float) / np.linalg.norm(s1)
    b = np.asarray(s2, dtype=float) / np.linalg.norm(s2)
    if a @ b < 0:
        b = -b
    return 2 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b))


def revolute_twist(point):
    x, y = point
    return np.array([0.0, 0.0, 1.0, -y, x, 0.0])


def branch_twists(cfg):
    """Twist systems of the two long-link branches, ``(LF, LS)``: pins A, B and C, D."""
    pa, pb, pc, pd = cfg.pins
    lf = ScrewSystem(np.stack([revolute_twist(pa), revolute_twist(pb)]))
    ls = ScrewSystem(np.stack([revolute_twist(pc), revolute_twist(pd)]))
    return lf, ls


def reciprocal_system(system):
    """Basis of every screw with zero reciprocal product against ``system``."""
    s = system.screws
    if len(s) == 0:
        raise ValueError("empty screw system")
    m = s @ _PAIRING
    _, sv, vt = np.linalg.svd(m)
    r = int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    return ScrewSystem(vt[r:], frame=system.frame)


def platform_twist(cfg):
    """Unit-angular twist of the coupler ``BD``, from the union of branch constraints."""
    lf, ls = branch_twists(cfg)
    cons = np.vstack([reciprocal_system(lf).screws, reciprocal_system(ls).screws])
    union = ScrewSystem(cons, frame="base")
    if union.rank != 5:
        raise DegeneratePoseError(f"constraint system rank {union.rank}, expected 5")
    twist = reciprocal_system(union).screws[0]
    if abs(twist[2]) < 1e-12 * np.linalg.norm(twist):
        return twist / np.linalg.norm(twist)  # pure translation: parallel long links
    return twist / twist[2]


def mobility(cfg):
    lf, ls = branch_twists(cfg)
    cons = np.vstack([reciprocal_system(lf).screws, reciprocal_system(ls).screws])
    return 6 - _rank(cons)


def platform_twist_closed_form(cfg):
    w, a, b, c, d = cfg.w, cfg.a, cfg.b, cfg.c, cfg.d
    den = b * c - w * b - a * d - w * d
    if abs(den) < 1e-12:
        raise DegeneratePoseError("long links parallel; rotation centre at infinity")
    return np.array([0.0, 0.0, 1.0,
                     2 * w * b * d / den,
                     (w**2 * b - w * b * c - w * a * d - w**2 * d) / den,
                     0.0])


# --- coupler curve -----------------------------------------------------------

def coupler_ellipse_point(cfg):
    """Crossing point of links AB and CD, shifted by ``h`` along y."""
    pa, pb, pc, pd = cfg.pins
    u, v = pb - pa, pd - pc
    m = np.column_stack([u, -v])
    det = np.linalg.det(m)
    if abs(det) < 1e-12 * cfg.l**2:
        raise DegeneratePoseError("long links are parallel; no crossing point")
    s, _ = np.linalg.solve(m, pc - pa)
    return pa + s * u + np.array([0.0, cfg.h])


def ellipse_residual(point, l, w, h):
    x, y = point[0], point[1]
    return x**2 / (l / 2)**2 + (y - h)**2 / ((l / 2)**2 - w**2) - 1.0


def ellipsoid_residual(point, l, w, h):
    if not (l / 2)**2 > w**2:
        raise ValueError("need (l/2)^2 > w^2")
    x, y, z = point
    return x**2 / (l / 2)**2 + (y - h)**2 / ((l / 2)**2 - w**2) + z**2 / (l / 2)**2 - 1.0


def ellipse_polar_radius(theta, l, w, h):
    """Distance from the origin to the shifted ellipse along the ray at ``theta`` from +y.

    Positive root of the ray-ellipse quadratic; raises when the ray misses.
    """
    theta = np.asarray(theta, dtype=float)
    k = l**2 - 4 * w**2
    if k <= 0:
        raise PolarDomainError("need l > 2w")
    c, s = np.cos(theta), np.sin(theta)
    quad = c**2 / k + s**2 / l**2
    lin = 2 * h * c / k
    const = 4 * h**2 / k - 1.0
    disc = lin**2 - quad * const
    if np.any(disc < 0):
        raise PolarDomainError("ray does not meet the ellipse (negative discriminant)")
    return (lin + np.sqrt(disc)) / (2 * quad)


def ray_ellipse_radius(theta, l, w, h):
    """Independent check of :func:`ellipse_polar_radius`: intersect in the ellipse's own frame."""
    semi_x, semi_y = l / 2, np.sqrt((l / 2)**2 - w**2)
    dx, dy = np.sin(theta), np.cos(theta)
    # scale to the unit circle centred at (0, -h / semi_y)
    ox, oy = 0.0, -h / semi_y
    ux, uy = dx / semi_x, dy / semi_y
    qa = ux**2 + uy**2
    qb = 2 * (ox * ux + oy * uy)
    qc = ox**2 + oy**2 - 1.0
    return np.max(np.roots([qa, qb, qc]).real)


# --- circle approximation ---------------------------------------------------

FIT_INTERVAL = (-np.pi / 4, np.pi / 4)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(65)


@dataclass(frozen=True)
class FitResult:
    h: float
    l: float
    max_radial_error: float
    objective: float


def fit_objective(params, r_c, w, nodes=None, weights=None):
    """Gauss-Legendre estimate of the integral of ``|r_e - r_c|`` over the fit interval."""
    h, l = params
    if nodes is None:
        lo, hi = FIT_INTERVAL
        nodes = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        weights = 0.5 * (hi - lo) * _GL_WEIGHTS
    try:
        r = ellipse_polar_radius(nodes, l, w, h)
    except PolarDomainError:
        return np.inf
    return float(np.sum(weights * np.abs(r - r_c)))


def radial_error_curve(h, l, r_c, w, samples=2001):
    theta = np.linspace(*FIT_INTERVAL, samples)
    return theta, ellipse_polar_radius(theta, l, w, h) - r_c


def fit_circle_approx(r_c=40.0, w=12.0, grid=5, h_range=(0.0, 10.0), l_halfwidth=10.0,
                      max_iter=4000, workers=None):
    """Choose ``(h, l)`` so the shifted ellipse best approximates a circle of radius ``r_c``.

    Nelder-Mead from a ``grid x grid`` set of starts (the objective is not
    smooth); starts run in parallel and the best is picked by objective,
    ties broken on ``(h, l)``.
    """
    if not r_c > w >= 0:
        raise ValueError("need r_c > w >= 0")
    l_lo, l_hi = 2 * r_c - l_halfwidth, 2 * r_c + l_halfwidth
    if l_lo <= 2 * w:
        raise ValueError("start grid for l must exceed 2w")

    # root choice guard: the polar formula at theta = 0 must equal the ray oracle
    mid = (np.mean(h_range), 2 * r_c)
    if abs(ellipse_polar_radius(0.0, mid[1], w, mid[0])
           - ray_ellipse_radius(0.0, mid[1], w, mid[0])) > 1e-9:
        raise FitError("polar-radius root choice disagrees with the ray oracle")

    starts = [(h0, l0) for h0 in np.linspace(*h_range, grid) for l0 in np.linspace(l_lo, l_hi, grid)]

    def run(x0):
        return minimize(fit_objective, x0, args=(r_c, w), method="Nelder-Mead",
                        options=dict(xatol=1e-10, fatol=1e-14, maxiter=max_iter,
                                     maxfev=2 * max_iter))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, starts))
    best = min(results, key=lambda r: (r.fun, r.x[0], r.x[1]))
    h, l = (float(v) for v in best.x)
    if not (best.success and np.isfinite(best.fun)):
        raise FitError(f"optimizer did not converge: {best.message}", best=(h, l, best.fun))
    _, err = radial_error_curve(h, l, r_c, w)
    return FitResult(h, l, float(np.max(np.abs(err))), float(best.fun))
