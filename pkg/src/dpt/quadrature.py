"""Quadrature on spheres and balls.

``sphere_rule(d)`` returns nodes ``(N, d)`` on the unit sphere S^{d-1} and
weights summing to ``|S^{d-1}|``:

* d = 2: trapezoid rule on the circle (spectrally accurate for periodic data);
* d = 3: Lebedev-Laikov rule (octahedrally invariant), default order 47;
* d = 4: product rule in hyperspherical angles (Gauss-Legendre x
  Gauss-Legendre x trapezoid).
"""

from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy.integrate import lebedev_rule

from .errors import ValidationError

LEBEDEV_DEFAULT_ORDER = 47


def sphere_area(d):
    """``|S^{d-1}|``, the area of the unit sphere in R^d."""
    return 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)


def ball_volume(d, radius=1.0):
    return sphere_area(d) / d * radius ** d


@dataclass(frozen=True)
class SphereRule:
    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    name: str

    @property
    def size(self):
        return self.weights.size

    def integrate(self, values):
        """Contract the leading axis of ``values`` against the weights."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def circle_rule(n=256):
    phi = 2.0 * pi * np.arange(n) / n
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return SphereRule(2, nodes, np.full(n, 2.0 * pi / n), f"trapezoid-S1-{n}")


def lebedev_sphere_rule(order=LEBEDEV_DEFAULT_ORDER):
    if order < 17:
        raise ValidationError("Lebedev order must be >= 17")
    x, w = lebedev_rule(order)
    return SphereRule(3, np.ascontiguousarray(x.T), w, f"lebedev-{order}")


def hypersphere_rule(n=24):
    """Product rule on S^3 with ``n`` Gauss nodes per polar angle, ``2n`` in azimuth."""
    # x = (cos a, sin a cos b, sin a sin b cos c, sin a sin b sin c),
    # ds = sin^2 a sin b da db dc
    t, wt = np.polynomial.legendre.leggauss(n)
    a = 0.5 * pi * (t + 1.0)
    wa = 0.5 * pi * wt * np.sin(a) ** 2
    cb, wb = t, wt  # Gauss-Legendre in cos b absorbs the sin b factor
    sb = np.sqrt(1.0 - cb ** 2)
    m = 2 * n
    c = 2.0 * pi * np.arange(m) / m
    wc = np.full(m, 2.0 * pi / m)
    A, B, C = np.meshgrid(np.arange(n), np.arange(n), np.arange(m), indexing="ij")
    A, B, C = A.ravel(), B.ravel(), C.ravel()
    nodes = np.stack([
        np.cos(a[A]),
        np.sin(a[A]) * cb[B],
        np.sin(a[A]) * sb[B] * np.cos(c[C]),
        np.sin(a[A]) * sb[B] * np.sin(c[C]),
    ], axis=-1)
    return SphereRule(4, nodes, wa[A] * wb[B] * wc[C], f"product-gauss-S3-{n}")


def sphere_rule(d, order=None):
    """Default rule on S^{d-1}; ``order`` is rule-specific (see module doc)."""
    if d == 2:
        return circle_rule(256 if order is None else order)
    if d == 3:
        return lebedev_sphere_rule(LEBEDEV_DEFAULT_ORDER if order is None else order)
    if d == 4:
        return hypersphere_rule(24 if order is None else order)
    raise ValidationError(f"no sphere rule for d={d}")


def gauss_legendre(a, b, n):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def radial_power_integral(exponent, radius=1.0):
    """``int_0^R r**exponent dr``; diverges for exponent <= -1."""
    if exponent <= -1.0:
        return np.inf
    return radius ** (exponent + 1.0) / (exponent + 1.0)


def trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def simpson_weights(n, h):
    """Composite Simpson weights (``n`` odd); falls back to trapezoid otherwise."""
    if n < 3 or n % 2 == 0:
        return trapezoid_weights(n, h)
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0
