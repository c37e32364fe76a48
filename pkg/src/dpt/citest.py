"""Compensated-integrability inequality checkers and exact DPT generators.

Three checkers, one per geometry:

* periodic: ``mean (det A)^(1/(d-1)) <= (det mean A)^(1/(d-1))``;
* bounded:  ``int_B (det A)^(1/(d-1)) <= C_d (|A n|_M + |Div A|_M)^(d/(d-1))``
  with ``C_d = 1 / (d |S^{d-1}|^(1/(d-1)))``;
* slab:     ``int int (det A)^(1/n) <= C (|A n|_{t=0} + |A n|_{t=tau})^(1+1/n)``
  with ``C = 1 / ((n+1) |S^n|^(1/n))``.

Exact divergence-free fields come from the Piola identity: the cofactor
matrix of a Hessian has zero row-wise divergence.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import fields as fl
from .errors import NotConvex, ValidationError
from .quadrature import sphere_area
from .symcone import adjugate, detroot, eigvals

PERIODIC_SLACK = 1e-6


@dataclass(frozen=True)
class InequalityReport:
    case: str
    lhs: float
    rhs: float
    constant_used: float
    margin: float
    holds: bool
    slack: float
    grid_resolution: tuple
    scheme: str
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        out["grid_resolution"] = list(self.grid_resolution)
        return out


def _report(case, lhs, rhs, const, slack, geom, **extra):
    lhs, rhs = float(lhs), float(rhs)
    return InequalityReport(case, lhs, rhs, float(const), rhs - lhs,
                            bool(lhs <= rhs + slack), float(slack),
                            tuple(geom.shape), geom.scheme, extra)


def slack_for(geom, rhs, c_scheme=1.0):
    """``max(1e-6, C h^order) (1 + rhs)``; spectral and quadrature schemes use 1e-6."""
    base = PERIODIC_SLACK
    if geom.kind == "slab":
        base = max(base, c_scheme * float(np.max(geom.spacing())) ** geom.order)
    return base * (1.0 + abs(rhs))


# -- Piola generator -----------------------------------------------------------

@dataclass(frozen=True)
class PeriodicPotential:
    """``theta(x) = x^T S0 x / 2 + sum_k a_k cos(kappa_k . x - phase_k)``.

    Wave vectors are integer multiples of ``2 pi / period`` per axis.
    """

    quadratic: np.ndarray
    modes: tuple = ()  # (amplitude, integer wave vector, phase)

    @classmethod
    def isotropic(cls, d, scale=1.0):
        return cls(scale * np.eye(d))

    def with_cos(self, amp, k, phase=0.0):
        return PeriodicPotential(self.quadratic, self.modes + ((float(amp), tuple(k), float(phase)),))

    def with_sin(self, amp, k):
        return self.with_cos(amp, k, np.pi / 2)

    def with_sin_product(self, amp, i, j):
        """Add ``amp sin(x_i) sin(x_j)`` (unit wave numbers, i != j)."""
        d = self.quadratic.shape[0]
        km = [0] * d
        kp = [0] * d
        km[i], km[j] = 1, -1
        kp[i], kp[j] = 1, 1
        return self.with_cos(0.5 * amp, km).with_cos(-0.5 * amp, kp)

    def wave_vector(self, k, period):
        return 2 * np.pi * np.asarray(k, dtype=float) / np.asarray(period, dtype=float)

    def hessian(self, x, period):
        x = np.asarray(x, dtype=float)
        h = np.broadcast_to(np.asarray(self.quadratic, dtype=float),
                            x.shape[:-1] + self.quadratic.shape).copy()
        for amp, k, phase in self.modes:
            kappa = self.wave_vector(k, period)
            c = np.cos(x @ kappa - phase)
            h -= amp * c[..., None, None] * np.outer(kappa, kappa)
        return h

    def value(self, x, period):
        x = np.asarray(x, dtype=float)
        out = 0.5 * np.einsum("...i,ij,...j->...", x, self.quadratic, x)
        for amp, k, phase in self.modes:
            out = out + amp * np.cos(x @ self.wave_vector(k, period) - phase)
        return out


def generate_periodic_dpt(theta, geom):
    """Sample ``A = cof D^2 theta`` on a torus; requires ``D^2 theta > 0`` at every node."""
    if geom.kind != "torus":
        raise ValidationError("Piola generator needs a torus geometry")
    hess = theta.hessian(geom.points(), geom.period)
    lam_min = float(eigvals(hess)[..., 0].min())
    if lam_min <= 0.0:
        raise NotConvex(f"Hessian has eigenvalue {lam_min:.3e} <= 0 on the grid")
    return fl.TensorField(geom, adjugate(hess), f"piola(cof D2 theta, {len(theta.modes)} modes)",
                          frozenset({"dpt", "divergence_free"}))


# -- checkers ------------------------------------------------------------------

def check_periodic(a, div_tol=fl.DIV_TOL):
    geom = a.geom
    if geom.kind != "torus":
        raise ValidationError("periodic check needs a torus field")
    if not {"dpt", "divergence_free"} <= a.flags:
        raise ValidationError("field is not flagged as a divergence-free DPT")
    d = a.dim
    div = fl.discrete_divergence(a)
    scale = 1.0 + float(np.abs(a.values).max())
    if div.linf_norm > div_tol * scale:
        raise ValidationError(f"divergence {div.linf_norm:.2e} exceeds tolerance")
    p = 1.0 / (d - 1)
    lhs = float(np.mean(detroot(a.values, p)))
    rhs = detroot(fl.mean(a), p)
    return _report("periodic", lhs, rhs, 1.0, PERIODIC_SLACK * (1.0 + rhs), geom,
                   div_linf=div.linf_norm)


def bounded_constant(d):
    return 1.0 / (d * sphere_area(d) ** (1.0 / (d - 1)))


def check_bounded(a, div_mass=0.0, trace_mass=None):
    """Inequality on a ball; ``trace_mass`` defaults to the sampled normal trace."""
    geom = a.geom
    if geom.kind != "ball":
        raise ValidationError("bounded check needs a ball field")
    d = a.dim
    if trace_mass is None:
        trace_mass = fl.normal_trace_mass(a)
    lhs = fl.detroot_integral(a)
    const = bounded_constant(d)
    rhs = const * (trace_mass + div_mass) ** (d / (d - 1))
    return _report("bounded", lhs, rhs, const, slack_for(geom, rhs), geom,
                   trace_mass=float(trace_mass), div_mass=float(div_mass))


def slab_constant(n):
    return 1.0 / ((n + 1) * sphere_area(n + 1) ** (1.0 / n))


def check_slab(a, decay_tol=fl.DECAY_TOL, c_scheme=1.0):
    geom = a.geom
    if geom.kind != "slab":
        raise ValidationError("slab check needs a slab field")
    edge = fl.check_decay(a, decay_tol)
    n = geom.dim - 1
    lhs = fl.detroot_integral(a)
    bottom = fl.normal_trace_mass(a, "bottom")
    top = fl.normal_trace_mass(a, "top")
    const = slab_constant(n)
    rhs = const * (bottom + top) ** (1.0 + 1.0 / n)
    return _report("slab", lhs, rhs, const, slack_for(geom, rhs, c_scheme), geom,
                   trace_bottom=bottom, trace_top=top, edge_ratio=edge)


# -- slab generators -----------------------------------------------------------

def free_transport_moments(t, y, mass=1.0, sigma=1.0, thermal=1.0, drift=0.0):
    """Moments of a free-streaming Gaussian ``f(t, y, v) = f0(y - v t, v)`` (n = 1).

    Returns ``rho, m, p2`` in closed form; ``[[rho, m], [m, p2]]`` is an
    exact DPT of the slab.
    """
    var_y = sigma ** 2 + thermal ** 2 * t ** 2
    rho = mass * np.exp(-(y - drift * t) ** 2 / (2 * var_y)) / np.sqrt(2 * np.pi * var_y)
    mean_v = drift + thermal ** 2 * t * (y - drift * t) / var_y
    var_v = thermal ** 2 * sigma ** 2 / var_y
    return rho, rho * mean_v, rho * (mean_v ** 2 + var_v)


def free_transport_dpt(geom, **params):
    if geom.kind != "slab" or geom.dim != 2:
        raise ValidationError("free transport generator needs a 1+1 slab")

    def fn(x):
        rho, m, p2 = free_transport_moments(x[..., 0], x[..., 1], **params)
        return np.stack([np.stack([rho, m], -1), np.stack([m, p2], -1)], -2)

    return fl.sample(geom, fn, f"free transport {params}", ("dpt", "divergence_free"))


def static_embedding_dpt(geom, density):
    """``diag(rho(y), 0)``: a time-independent DPT of the 1+1 slab."""
    if geom.kind != "slab" or geom.dim != 2:
        raise ValidationError("static embedding needs a 1+1 slab")

    def fn(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = density(x[..., 1])
        return out

    return fl.sample(geom, fn, "static embedding diag(rho, 0)", ("dpt", "divergence_free"))
