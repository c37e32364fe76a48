"""Pointwise energy-momentum tensors of classical conservation laws.

Three families, each a symmetric ``(1+n) x (1+n)`` matrix built from the
state at a single space-time point:

* the linear wave equation ``u_tt = c^2 Lap u``;
* nonlinear electromagnetism with a Lagrangian ``l(sigma, pi)``;
* Godunov systems generated by a potential ``R(lambda)`` (barotropic gas).
"""

from dataclasses import dataclass

import numpy as np

from .errors import PQMismatch, ValidationError
from .symcone import PSD_TOL, eigvals

IDENTITY_TOL = 1e-10
MAXWELL_TOL = 1e-9
PQ_TOL = 1e-12
FD_STEP = 1e-6


def _rel(a, b, scale):
    return abs(a - b) / max(scale, np.finfo(float).tiny)


# -- wave equation -------------------------------------------------------------------

@dataclass(frozen=True)
class WaveState:
    u_t: float
    grad_u: np.ndarray
    c: float = 1.0

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.grad_u, dtype=float))
        if g.ndim != 1 or not np.all(np.isfinite(g)) or not np.isfinite(self.u_t):
            raise ValidationError("wave state must be finite with a vector gradient")
        if self.c <= 0:
            raise ValidationError("wave speed must be positive")
        object.__setattr__(self, "grad_u", g)

    @property
    def n(self):
        return self.grad_u.size


def wave_tensor(s):
    n, c, ut, g = s.n, s.c, s.u_t, s.grad_u
    g2 = g @ g
    t = np.empty((n + 1, n + 1))
    t[0, 0] = 0.5 * (ut ** 2 + c ** 2 * g2)
    t[0, 1:] = t[1:, 0] = -c ** 2 * ut * g
    t[1:, 1:] = c ** 4 * np.outer(g, g) + 0.5 * c ** 2 * (ut ** 2 - c ** 2 * g2) * np.eye(n)
    return t


def wave_det_formula(s):
    g2 = s.grad_u @ s.grad_u
    return s.c ** (2 * s.n) * (0.5 * (s.u_t ** 2 - s.c ** 2 * g2)) ** (s.n + 1)


def wave_det_identity(s, tol=IDENTITY_TOL):
    t = wave_tensor(s)
    direct = float(np.linalg.det(t))
    formula = float(wave_det_formula(s))
    scale = float(np.linalg.norm(t, 2)) ** (s.n + 1)
    return {"det_direct": direct, "det_formula": formula,
            "match": bool(_rel(direct, formula, scale) <= tol)}


def wave_is_psd(s, tol=PSD_TOL):
    t = wave_tensor(s)
    return bool(eigvals(t)[0] >= -tol * (1.0 + np.abs(t).max()))


def wave_psd_predicted(s):
    """Positivity criterion: always for n = 1, else ``c |grad u| <= |u_t|``."""
    return s.n == 1 or s.c * np.linalg.norm(s.grad_u) <= abs(s.u_t)


def laplace_tensor(grad_u):
    """``grad u (x) grad u - |grad u|^2 I / 2``; divergence-free when u is harmonic.

    Its eigenvalues are ``+-|grad u|^2 / 2``, so ``|T n| = |grad u|^2 / 2``
    for every unit vector n.
    """
    g = np.asarray(grad_u, dtype=float)
    g2 = np.sum(g * g, axis=-1)
    return g[..., :, None] * g[..., None, :] - 0.5 * g2[..., None, None] * np.eye(g.shape[-1])


def laplace_gain_check(grad_fn, geom):
    """Compare ``int |det T|^(1/(d-1))`` with the bounded-domain right side.

    Neither side needs positivity; for a harmonic ``u`` the divergence term
    vanishes.  Returns a dict with both sides and the boundary trace mass.
    """
    from . import fields as fl
    from .citest import bounded_constant

    d = geom.dim
    field_ = fl.sample(geom, lambda x: laplace_tensor(grad_fn(x)), "laplace stress")
    lhs = fl.integrate(field_, lambda a: np.abs(np.linalg.det(a)) ** (1.0 / (d - 1)))
    trace = fl.normal_trace_mass(field_)
    rhs = bounded_constant(d) * trace ** (d / (d - 1))
    return {"lhs": lhs, "rhs": rhs, "trace_mass": trace, "holds": bool(lhs <= rhs)}


# -- nonlinear electromagnetism -------------------------------------------------------

@dataclass(frozen=True)
class Lagrangian:
    """``l(sigma, pi)`` with optional analytic gradient ``(l_sigma, l_pi)``.

    Missing derivatives are taken by central differences.
    """

    value: object
    gradient: object = None
    name: str = "custom"

    def __call__(self, sigma, pi):
        return float(self.value(sigma, pi))

    def derivatives(self, sigma, pi):
        if self.gradient is not None:
            ls, lp = self.gradient(sigma, pi)
            return float(ls), float(lp)
        hs = FD_STEP * max(1.0, abs(sigma))
        hp = FD_STEP * max(1.0, abs(pi))
        ls = (self.value(sigma + hs, pi) - self.value(sigma - hs, pi)) / (2 * hs)
        lp = (self.value(sigma, pi + hp) - self.value(sigma, pi - hp)) / (2 * hp)
        return float(ls), float(lp)


def linear_vacuum():
    return Lagrangian(lambda s, p: -s, lambda s, p: (-1.0, 0.0), "vacuum")


def quadratic_lagrangian(a=0.1, b=0.05, c=0.02):
    """``-sigma + a sigma^2 + b pi^2 + c sigma pi``."""
    return Lagrangian(lambda s, p: -s + a * s * s + b * p * p + c * s * p,
                      lambda s, p: (-1.0 + 2 * a * s + c * p, 2 * b * p + c * s),
                      f"quadratic({a},{b},{c})")


def born_infeld():
    """``1 - sqrt(1 + 2 sigma - pi^2)``; admissible where the root is real."""
    def root(s, p):
        arg = 1.0 + 2.0 * s - p * p
        if arg <= 0:
            raise ValidationError("state outside the Born-Infeld admissible set")
        return np.sqrt(arg)

    def grad(s, p):
        q = root(s, p)
        return -1.0 / q, p / q

    return Lagrangian(lambda s, p: 1.0 - root(s, p), grad, "born-infeld")


@dataclass(frozen=True)
class MaxwellState:
    B: np.ndarray
    E: np.ndarray
    lagrangian: Lagrangian
    constitutive: object = None  # optional (B, E) -> (D, H) overriding the Lagrangian

    def __post_init__(self):
        for name in ("B", "E"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValidationError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)

    @property
    def sigma(self):
        return 0.5 * (self.B @ self.B - self.E @ self.E)

    @property
    def pi(self):
        return float(self.B @ self.E)

    def derived(self):
        """``l, l_sigma, l_pi, D, H, W, P, Q``."""
        s, p = self.sigma, self.pi
        ell = self.lagrangian(s, p)
        ls, lp = self.lagrangian.derivatives(s, p)
        if self.constitutive is None:
            d = -ls * self.E + lp * self.B
            h = -ls * self.B - lp * self.E
        else:
            d, h = (np.asarray(v, dtype=float) for v in self.constitutive(self.B, self.E))
        return {"l": ell, "l_sigma": ls, "l_pi": lp, "D": d, "H": h,
                "W": float(d @ self.E - ell), "P": np.cross(d, self.B), "Q": np.cross(self.E, h)}


def maxwell_tensor(s, pq_tol=PQ_TOL):
    q = s.derived()
    scale = np.linalg.norm(q["P"]) + np.linalg.norm(q["Q"])
    if np.linalg.norm(q["P"] - q["Q"]) > pq_tol * max(scale, 1.0):
        raise PQMismatch("P != Q: the constitutive law does not come from l(sigma, pi)")
    t = np.empty((4, 4))
    t[0, 0] = q["W"]
    t[0, 1:] = t[1:, 0] = q["P"]
    t[1:, 1:] = (q["l_sigma"] * (np.outer(s.E, s.E) + np.outer(s.B, s.B))
                 + (q["l"] + s.B @ q["H"]) * np.eye(3))
    return t


def maxwell_det_identities(s, tol=MAXWELL_TOL):
    """Check ``det S`` (direct vs closed form), ``det S = -det R`` and ``det T = -(det S)^2``.

    ``S = [[W, |P|^2], [1, l + B.H]]`` and
    ``R = [[l - pi l_pi, pi l_sigma], [pi l_sigma, l - 2 sigma l_sigma - pi l_pi]]``.
    """
    q = s.derived()
    t = maxwell_tensor(s)
    sig, pi = s.sigma, s.pi
    ell, ls, lp = q["l"], q["l_sigma"], q["l_pi"]
    p2 = float(q["P"] @ q["P"])
    ns = ell + float(s.B @ q["H"])
    det_s_direct = q["W"] * ns - p2
    det_s = ls ** 2 * (sig ** 2 + pi ** 2) - (ell - sig * ls - pi * lp) ** 2
    det_r = (ell - pi * lp) * (ell - 2 * sig * ls - pi * lp) - (pi * ls) ** 2
    det_t = float(np.linalg.det(t))
    scale2 = float(np.linalg.norm(t, 2)) ** 2
    checks = {
        "detS_closed_form": _rel(det_s_direct, det_s, scale2),
        "detS_vs_detR": _rel(det_s, -det_r, scale2),
        "detT_vs_detS2": _rel(det_t, -det_s ** 2, scale2 ** 2),
    }
    degenerate = bool(np.linalg.norm(np.cross(s.B, s.E))
                      <= 1e-12 * (1.0 + s.B @ s.B + s.E @ s.E))
    return {"detS": det_s, "detR": det_r, "detT": det_t, "errors": checks,
            "degenerate": degenerate, "holds": all(v <= tol for v in checks.values())}


# -- Godunov systems / barotropic gas -----------------------------------------------

@dataclass(frozen=True)
class GasPotential:
    """Potential ``R(lambda)``, ``lambda = q0 + |q'|^2 / 2``, given by ``R'`` and ``R''``.

    For a barotropic gas ``R'`` is the pressure and ``R''`` the density as
    functions of the enthalpy-like variable ``lambda``.
    """

    pressure: object
    density: object
    q: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if q.ndim != 1 or q.size < 2:
            raise ValidationError("q needs q0 and at least one spatial component")
        object.__setattr__(self, "q", q)

    @property
    def n(self):
        return self.q.size - 1

    @property
    def lam(self):
        return float(self.q[0] + 0.5 * self.q[1:] @ self.q[1:])

    def with_q(self, q):
        return GasPotential(self.pressure, self.density, q, self.name)

    def r1(self):
        return float(self.pressure(self.lam))

    def r2(self):
        return float(self.density(self.lam))


def quadratic_energy_gas(q):
    """Internal energy ``rho^2 / 2``: ``R' = lambda^2 / 2``, ``R'' = lambda`` (vacuum below 0)."""
    return GasPotential(lambda x: 0.5 * max(x, 0.0) ** 2, lambda x: max(x, 0.0), q, "rho^2/2")


def gamma_law_gas(gamma, q):
    """Internal energy ``rho^gamma / (gamma - 1)``, pressure ``rho^gamma``."""
    if gamma <= 1:
        raise ValidationError("gamma must exceed 1")

    def rho(x):
        return ((gamma - 1) * max(x, 0.0) / gamma) ** (1.0 / (gamma - 1))

    return GasPotential(lambda x: rho(x) ** gamma, rho, q, f"gamma={gamma}")


def godunov_tensor(g):
    """``R'' V V^T + R' diag(0, I_n)`` with ``V = (1, q_1, ..., q_n)``."""
    v = np.concatenate([[1.0], g.q[1:]])
    t = g.r2() * np.outer(v, v)
    t[1:, 1:] += g.r1() * np.eye(g.n)
    return t


def godunov_det_identity(g, tol=IDENTITY_TOL):
    t = godunov_tensor(g)
    direct = float(np.linalg.det(t))
    formula = g.r1() ** g.n * g.r2()
    scale = float(np.linalg.norm(t, 2)) ** (g.n + 1)
    return {"det_direct": direct, "det_formula": formula,
            "match": bool(_rel(direct, formula, scale) <= tol)}


def gas_estimate_integrand(g):
    """``p rho^(1/n)``; the PSD requirement means both factors are non-negative."""
    p, rho = g.r1(), g.r2()
    if p < 0 or rho < 0:
        raise ValidationError("pressure and density must be non-negative")
    return p * rho ** (1.0 / g.n)
