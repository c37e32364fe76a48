"""Homogeneous singular DPTs and the planar Minkowski problem.

Fields of the form ``r^-m S(e)`` are never evaluated at the origin.  Their
integrals factor into an exact radial power integral and a spherical
quadrature, and distributional pairings ``<Div T, phi> = -int T : grad phi``
are computed ray by ray on ``[eps, 1]`` and then Richardson-extrapolated in
``eps``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fields as fl
from .errors import ExtrapolationError, NotConvex, ObstructionNonzero, ValidationError
from .quadrature import gauss_legendre, sphere_rule


def _split(x):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise ValidationError("singular field evaluated at the origin")
    return r, x / r[..., None]


def tm_profile(m, d, e):
    e = np.asarray(e, dtype=float)
    return m * e[..., :, None] * e[..., None, :] + (d - 1 - m) * np.eye(d)


def tm_tensor(m, d, x):
    """``r^-m (m e e^T + (d-1-m) I)``; PSD for ``m <= d-1``."""
    if m >= d:
        raise ValidationError("order of singularity must be < d")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d:
        raise ValidationError("point dimension mismatch")
    r, e = _split(x)
    return r[..., None, None] ** (-m) * tm_profile(m, d, e)


def tm_field(m, geom):
    flags = ("dpt", "divergence_free") if m <= geom.dim - 1 else ()
    return fl.sample(geom, lambda x: tm_tensor(m, geom.dim, x), f"T_m, m={m}", flags,
                     homogeneity=-m)


def tm_detroot_integral(m, d):
    """Closed form ``|S^{d-1}| (d-1)^(d/(d-1)) / d`` (independent of m)."""
    from .quadrature import sphere_area

    return sphere_area(d) * (d - 1) ** (d / (d - 1)) / d


# -- spherical measures ---------------------------------------------------------

@dataclass(frozen=True)
class SphericalMeasure:
    """Non-negative measure on S^{d-1}: smooth density plus atoms."""

    dim: int
    density: object = None  # callable on unit vectors (N, d) -> (N,)
    atoms: tuple = ()       # ((direction, weight), ...)
    rule: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.rule is None:
            object.__setattr__(self, "rule", sphere_rule(self.dim))
        atoms = []
        for e, w in self.atoms:
            e = np.asarray(e, dtype=float)
            if e.shape != (self.dim,) or w < 0:
                raise ValidationError("atoms need a direction of the right size and weight >= 0")
            atoms.append((e / np.linalg.norm(e), float(w)))
        object.__setattr__(self, "atoms", tuple(atoms))
        if self.density is not None and np.any(self.samples() < 0):
            raise ValidationError("density must be non-negative")

    def samples(self):
        if self.density is None:
            return np.zeros(self.rule.size)
        return np.asarray(self.density(self.rule.nodes), dtype=float)

    def total_mass(self):
        return float(self.rule.integrate(self.samples())) + sum(w for _, w in self.atoms)

    def first_moment(self):
        """``V = int e dlambda(e)``."""
        v = self.rule.integrate(self.samples()[:, None] * self.rule.nodes)
        for e, w in self.atoms:
            v = v + w * e
        return np.asarray(v, dtype=float)

    def is_balanced(self, tol=1e-10):
        return bool(np.linalg.norm(self.first_moment()) <= tol * (1.0 + self.total_mass()))


def spherical_tensor(lam, x):
    """Smooth part ``lambda(e) e e^T / r^(d-1)``; atoms only enter integrals."""
    r, e = _split(x)
    d = lam.dim
    dens = np.zeros(r.shape) if lam.density is None else lam.density(e.reshape(-1, d)).reshape(r.shape)
    return (dens / r ** (d - 1))[..., None, None] * e[..., :, None] * e[..., None, :]


def spherical_field(lam, geom):
    flags = ("dpt", "divergence_free") if lam.is_balanced() else ("dpt",)
    return fl.sample(geom, lambda x: spherical_tensor(lam, x), "lambda(e) e e^T / r^(d-1)",
                     flags, homogeneity=-(geom.dim - 1))


# -- distributional divergence -----------------------------------------------------

@dataclass(frozen=True)
class TestField:
    """Smooth vector field with its Jacobian ``J[i, j] = d phi_i / d x_j``."""

    value: object
    jacobian: object


def bump_test_field(a, b=None):
    """``phi(x) = (a + B x) psi(|x|^2)`` with ``psi(s) = exp(1 - 1/(1-s))`` on the unit ball."""
    a = np.asarray(a, dtype=float)
    d = a.size
    b = np.zeros((d, d)) if b is None else np.asarray(b, dtype=float)

    def psi(s):
        inside = s < 1.0
        out = np.zeros_like(s)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out

    def dpsi(s):
        inside = s < 1.0
        out = np.zeros_like(s)
        si = s[inside]
        out[inside] = -np.exp(1.0 - 1.0 / (1.0 - si)) / (1.0 - si) ** 2
        return out

    def value(x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1)
        return (a + x @ b.T) * psi(s)[..., None]

    def jacobian(x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1)
        lin = a + x @ b.T
        return (b * psi(s)[..., None, None]
                + 2.0 * dpsi(s)[..., None, None] * lin[..., :, None] * x[..., None, :])

    return TestField(value, jacobian)


def _ray_integrals(directions, testfn, eps, radial_nodes):
    """``int_eps^1 e^T J(r e) e dr`` for each direction."""
    r, w = gauss_legendre(eps, 1.0, radial_nodes)
    pts = r[None, :, None] * directions[:, None, :]
    jac = testfn.jacobian(pts)
    quad_form = np.einsum("ni,nrij,nj->nr", directions, jac, directions)
    return quad_form @ w


def truncated_pairing(lam, testfn, eps, radial_nodes=96):
    """``-int_{eps<|x|<1} T : grad phi dx`` for ``T = lambda(e) e e^T / r^(d-1)``.

    The factor ``r^(d-1)`` of the volume element cancels the singularity
    exactly, leaving one-dimensional integrals along rays.
    """
    rule = lam.rule
    total = -rule.integrate(lam.samples() * _ray_integrals(rule.nodes, testfn, eps, radial_nodes))
    if lam.atoms:
        dirs = np.array([e for e, _ in lam.atoms])
        ws = np.array([w for _, w in lam.atoms])
        total = total - float(ws @ _ray_integrals(dirs, testfn, eps, radial_nodes))
    return float(total)


def richardson(values, ratio=2.0):
    """Richardson table for samples at ``h, h/ratio, h/ratio^2, ...`` (integer powers)."""
    table = [list(values)]
    for j in range(1, len(values)):
        prev = table[-1]
        f = ratio ** j
        table.append([(f * prev[k + 1] - prev[k]) / (f - 1.0) for k in range(len(prev) - 1)])
    return table


def distributional_divergence(lam, testfn, eps0=0.1, levels=7, radial_nodes=96, tol=1e-8):
    """``<Div T, phi>`` as a vector, one component per unit test field ``phi e_k``.

    ``testfn`` is either a :class:`TestField` (returns a scalar pairing with
    that field) or a callable ``k -> TestField`` (returns a vector).
    """
    if isinstance(testfn, TestField):
        return _pairing(lam, testfn, eps0, levels, radial_nodes, tol)
    out = [_pairing(lam, testfn(k), eps0, levels, radial_nodes, tol)
           for k in range(lam.dim)]
    return np.array(out)


def _pairing(lam, testfn, eps0, levels, radial_nodes, tol):
    eps = [eps0 / 2.0 ** k for k in range(levels)]
    vals = [truncated_pairing(lam, testfn, e, radial_nodes) for e in eps]
    table = richardson(vals)
    best, prev = table[-1][0], table[-2][0]
    scale = 1.0 + lam.total_mass()
    if abs(best - prev) > tol * scale:
        raise ExtrapolationError(f"Richardson extrapolation did not settle ({abs(best - prev):.2e})")
    return best


def expected_pairing(lam, testfn):
    """``phi(0) . V_lambda``."""
    phi0 = testfn.value(np.zeros((1, lam.dim)))[0]
    return float(phi0 @ lam.first_moment())


def singularity_defect(profile, m, d, rule=None):
    """``int_S ((m+1-d) e^T S e + Tr S|_{e-perp}) ds`` for a profile ``e -> S(e)``.

    It vanishes for every homogeneous divergence-free field of order ``m``
    and is strictly positive for PSD ``S != 0`` when ``m > d-1``.
    """
    rule = sphere_rule(d) if rule is None else rule
    e = rule.nodes
    s = np.asarray(profile(e), dtype=float)
    ese = np.einsum("ni,nij,nj->n", e, s, e)
    tr_perp = np.trace(s, axis1=-2, axis2=-1) - ese
    return float(rule.integrate((m + 1 - d) * ese + tr_perp))


# -- Minkowski problem in the plane ----------------------------------------------------

@dataclass(frozen=True)
class SupportFunction2D:
    """Support function ``h(phi)`` stored as Fourier coefficients (numpy FFT order)."""

    coefficients: np.ndarray = field(repr=False)

    @property
    def modes(self):
        return self.coefficients.size

    def wavenumbers(self):
        n = self.modes
        return np.fft.fftfreq(n, d=1.0 / n)

    def evaluate(self, phi, derivative=0):
        phi = np.asarray(phi, dtype=float)
        k = self.wavenumbers()
        c = self.coefficients * (1j * k) ** derivative
        extra = 0.0
        if self.modes % 2 == 0:
            # split the Nyquist mode over +-N/2 so the series stays real
            kn = self.modes / 2
            ny = self.coefficients[self.modes // 2]
            c = c.copy()
            c[self.modes // 2] = 0.0
            extra = 0.5 * ny * ((1j * kn) ** derivative * np.exp(1j * kn * phi)
                                + (-1j * kn) ** derivative * np.exp(-1j * kn * phi))
        out = np.exp(1j * np.multiply.outer(phi, k)) @ c
        return np.real(out + extra)

    def radius_of_curvature(self, phi):
        """``lambda = h'' + h``."""
        return self.evaluate(phi, 2) + self.evaluate(phi)

    def grid(self, n=None):
        n = 4 * self.modes if n is None else n
        return 2.0 * np.pi * np.arange(n) / n

    def is_convex(self, tol=1e-10):
        lam = self.radius_of_curvature(self.grid())
        return bool(lam.min() >= -tol * (1.0 + np.abs(lam).max()))

    @classmethod
    def from_samples(cls, h, modes=None, taper=None, check=True):
        """Fourier coefficients of uniformly sampled ``h``, optionally truncated.

        ``taper="fejer"`` applies Fejer weights, which keep ``h'' + h >= 0``
        for the truncated series whenever it holds for ``h``.
        """
        h = np.asarray(h, dtype=float)
        c = np.fft.fft(h) / h.size
        if modes is not None:
            k = np.fft.fftfreq(h.size, d=1.0 / h.size)
            keep = np.abs(k) <= modes
            w = np.where(keep, 1.0, 0.0)
            if taper == "fejer":
                w = w * np.clip(1.0 - np.abs(k) / (modes + 1.0), 0.0, None)
            c = (c * w)[np.r_[0:modes + 1, h.size - modes:h.size]]
        out = cls(c)
        if check and not out.is_convex():
            raise NotConvex("h'' + h takes negative values")
        return out


def support_solve_2d(lam, tol=1e-10):
    """Solve ``h'' + h = lambda`` on the circle, gauge modes +-1 of ``h`` set to zero.

    ``lam`` holds samples at ``phi_j = 2 pi j / N``.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1 or lam.size < 8:
        raise ValidationError("need at least 8 samples of lambda")
    if np.any(lam <= 0.0):
        raise ValidationError("lambda must be strictly positive")
    n = lam.size
    c = np.fft.fft(lam) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    first = np.abs(c[np.abs(k) == 1]).max()
    if first > tol * max(1.0, abs(c[0])):
        raise ObstructionNonzero(f"modes +-1 of lambda are {first:.2e}; no closed convex body")
    denom = 1.0 - k ** 2
    h = np.where(np.abs(k) == 1, 0.0, c / np.where(denom == 0, 1.0, denom))
    return SupportFunction2D(h)


def singular_det_mass(h, n=None):
    """Area of the convex body, ``(1/2) int h (h'' + h) dphi``."""
    phi = h.grid(n)
    integrand = h.evaluate(phi) * h.radius_of_curvature(phi)
    return float(0.5 * integrand.mean() * 2.0 * np.pi)


def hat_hessian(h, points):
    """Cofactor matrix of ``D^2 theta`` for ``theta(x) = |x| h(arg x)``."""
    x = np.asarray(points, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise ValidationError("hat Hessian is not defined at the origin")
    phi = np.arctan2(x[..., 1], x[..., 0])
    h0, h2 = h.evaluate(phi), h.evaluate(phi, 2)
    er = np.stack([np.cos(phi), np.sin(phi)], -1)
    ep = np.stack([-np.sin(phi), np.cos(phi)], -1)
    # polar Hessian of theta = r h(phi): theta_rr = 0, theta_r = h,
    # theta_phi = r h', theta_phiphi = r h'', theta_rphi = h'; the mixed
    # entry (theta_rphi - theta_phi / r) / r cancels for degree-1 homogeneity
    t_rr = np.zeros_like(r)
    t_pp = (h0 + h2) / r
    t_rp = np.zeros_like(r)
    hess = (t_rr[..., None, None] * er[..., :, None] * er[..., None, :]
            + t_pp[..., None, None] * ep[..., :, None] * ep[..., None, :]
            + t_rp[..., None, None] * (er[..., :, None] * ep[..., None, :]
                                       + ep[..., :, None] * er[..., None, :]))
    from .symcone import adjugate

    return adjugate(hess)


def consistency_hat_hessian(h, points, lam=None):
    """``max |hat(D^2 theta)(x) - lambda(e) e e^T / r|`` over off-origin points.

    ``lam`` is a callable of the angle; by default ``h'' + h`` itself.
    """
    x = np.asarray(points, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    phi = np.arctan2(x[..., 1], x[..., 0])
    ref = h.radius_of_curvature(phi) if lam is None else np.asarray(lam(phi), dtype=float)
    e = x / r[..., None]
    target = (ref / r)[..., None, None] * e[..., :, None] * e[..., None, :]
    return float(np.abs(hat_hessian(h, x) - target).max())
