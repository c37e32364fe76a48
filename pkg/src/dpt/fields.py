"""Grid-sampled symmetric tensor fields on a torus, a ball, or a slab.

A field stores samples on a Cartesian grid (used for differentiation).
Ball fields also store samples at the nodes of a polar quadrature rule and
on the bounding sphere, all taken from the same generating function, so
that volume and surface integrals do not suffer from staircase errors.
A ball field flagged as homogeneous of degree ``-m`` stores its angular
profile only; integrals of homogeneous functionals then split into an
exact radial power integral times a spherical quadrature.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import quadrature as quad
from .errors import DecayViolation, ValidationError
from .symcone import detroot, pack, unpack

DIV_TOL = 1e-8
DECAY_TOL = 1e-8
MIN_RESOLUTION = 8
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Geometry:
    kind: str
    dim: int
    shape: tuple
    period: tuple = ()
    radius: float = 1.0
    tau: float = 1.0
    half_width: float = 1.0
    radial_nodes: int = 64
    sphere_order: int = None

    def __post_init__(self):
        if self.kind not in ("torus", "ball", "slab"):
            raise ValidationError(f"unknown geometry kind {self.kind!r}")
        if len(self.shape) != self.dim:
            raise ValidationError("one resolution per axis required")
        if min(self.shape) < MIN_RESOLUTION:
            raise ValidationError(f"resolutions must be >= {MIN_RESOLUTION}")
        if self.kind == "torus" and len(self.period) != self.dim:
            raise ValidationError("torus needs one period per axis")

    @property
    def scheme(self):
        return "spectral" if self.kind == "torus" else "fd2"

    @property
    def order(self):
        return np.inf if self.kind == "torus" else 2

    def axes(self):
        if self.kind == "torus":
            return [L * np.arange(n) / n for L, n in zip(self.period, self.shape)]
        if self.kind == "ball":
            return [-self.radius + (np.arange(n) + 0.5) * 2 * self.radius / n
                    for n in self.shape]
        t = np.linspace(0.0, self.tau, self.shape[0])
        return [t] + [np.linspace(-self.half_width, self.half_width, n)
                      for n in self.shape[1:]]

    def spacing(self):
        return np.array([a[1] - a[0] for a in self.axes()])

    def points(self):
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def sphere(self):
        return quad.sphere_rule(self.dim, self.sphere_order)

    def to_dict(self):
        out = {"kind": self.kind, "dim": self.dim, "shape": list(self.shape)}
        if self.kind == "torus":
            out["period"] = list(self.period)
        elif self.kind == "ball":
            out.update(radius=self.radius, radial_nodes=self.radial_nodes,
                       sphere_order=self.sphere_order, sphere_rule=self.sphere().name)
        else:
            out.update(tau=self.tau, half_width=self.half_width)
        return out

    @classmethod
    def from_dict(cls, d):
        kw = {k: d[k] for k in ("radius", "tau", "half_width", "radial_nodes", "sphere_order")
              if k in d}
        return cls(d["kind"], d["dim"], tuple(d["shape"]), tuple(d.get("period", ())), **kw)


def torus(period, shape):
    period = tuple(float(p) for p in period)
    if isinstance(shape, int):
        shape = (shape,) * len(period)
    return Geometry("torus", len(period), tuple(shape), period=period)


def ball(dim, n=32, radius=1.0, radial_nodes=64, sphere_order=None):
    return Geometry("ball", dim, (n,) * dim, radius=float(radius),
                    radial_nodes=radial_nodes, sphere_order=sphere_order)


def slab(tau, space_dim, half_width, nt, ny):
    return Geometry("slab", 1 + space_dim, (nt,) + (ny,) * space_dim,
                    tau=float(tau), half_width=float(half_width))


@dataclass(frozen=True)
class TensorField:
    geom: Geometry
    values: np.ndarray = field(repr=False)
    provenance: str = ""
    flags: frozenset = frozenset()
    quad_values: np.ndarray = field(default=None, repr=False)
    trace_values: np.ndarray = field(default=None, repr=False)
    homogeneity: float = None

    @property
    def dim(self):
        return self.geom.dim

    @property
    def scheme(self):
        return self.geom.scheme

    def scaled(self, c):
        return self._map(lambda a: c * a, f"{c}*({self.provenance})")

    def __add__(self, other):
        if other.geom != self.geom or other.homogeneity != self.homogeneity:
            raise ValidationError("fields live on different geometries")
        out = replace(
            self, values=self.values + other.values,
            provenance=f"({self.provenance}) + ({other.provenance})",
            flags=self.flags & other.flags)
        if self.quad_values is not None:
            out = replace(out, quad_values=self.quad_values + other.quad_values,
                          trace_values=self.trace_values + other.trace_values)
        return out

    def _map(self, fn, provenance):
        out = replace(self, values=fn(self.values), provenance=provenance)
        if self.quad_values is not None:
            out = replace(out, quad_values=fn(self.quad_values),
                          trace_values=fn(self.trace_values))
        return out


def ball_quadrature(geom):
    """Polar nodes ``(Nr, Ns, d)`` and weights ``(Nr, Ns)`` on the ball."""
    rule = geom.sphere()
    r, wr = quad.gauss_legendre(0.0, geom.radius, geom.radial_nodes)
    nodes = r[:, None, None] * rule.nodes[None]
    weights = (wr * r ** (geom.dim - 1))[:, None] * rule.weights[None]
    return nodes, weights


def sample(geom, fn, provenance="", flags=(), homogeneity=None):
    """Evaluate ``fn(points (..., d)) -> (..., d, d)`` on every node set of ``geom``."""
    values = np.asarray(fn(geom.points()), dtype=float)
    kw = {}
    if geom.kind == "ball":
        rule = geom.sphere()
        if homogeneity is None:
            nodes, _ = ball_quadrature(geom)
            kw["quad_values"] = np.asarray(fn(nodes), dtype=float)
        else:
            kw["quad_values"] = np.asarray(fn(rule.nodes), dtype=float)
        kw["trace_values"] = np.asarray(fn(geom.radius * rule.nodes), dtype=float)
    elif homogeneity is not None:
        raise ValidationError("homogeneous profiles are only supported on balls")
    return TensorField(geom, values, provenance, frozenset(flags),
                       homogeneity=homogeneity, **kw)


def constant(geom, matrix, provenance=None, flags=("dpt", "divergence_free")):
    matrix = np.asarray(matrix, dtype=float)
    return sample(geom, lambda x: np.broadcast_to(matrix, x.shape[:-1] + matrix.shape).copy(),
                  provenance or f"constant {matrix.tolist()}", flags)


# -- reductions ---------------------------------------------------------------

def grid_weights(geom):
    h = geom.spacing()
    if geom.kind == "torus":
        return np.full(geom.shape, np.prod(h))
    ws = [quad.simpson_weights(n, hi) if geom.kind == "slab" and i == 0
          else quad.trapezoid_weights(n, hi)
          for i, (n, hi) in enumerate(zip(geom.shape, h))]
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out


def integrate(field_, fn, degree=None):
    """``int fn(A(x)) dx`` for a pointwise functional ``fn`` of the matrix.

    ``degree`` is the homogeneity degree of ``fn``; it is required for
    homogeneous ball fields, where the radial factor is integrated exactly.
    """
    geom = field_.geom
    if geom.kind != "ball":
        return float(np.sum(grid_weights(geom) * fn(field_.values)))
    rule = geom.sphere()
    if field_.homogeneity is not None:
        if degree is None:
            raise ValidationError("functional degree needed for a homogeneous field")
        exponent = geom.dim - 1 + field_.homogeneity * degree
        radial = quad.radial_power_integral(exponent, geom.radius)
        return float(radial * rule.integrate(fn(field_.quad_values)))
    _, w = ball_quadrature(geom)
    return float(np.sum(w * fn(field_.quad_values)))


def mass_norm(field_):
    """L1 norm of the Frobenius norm."""
    return integrate(field_, lambda a: np.linalg.norm(a, axis=(-2, -1)), degree=1.0)


def detroot_integral(field_):
    """``int (det A)^(1/(d-1)) dx``."""
    d = field_.dim
    return integrate(field_, lambda a: detroot(a, 1.0 / (d - 1)), degree=d / (d - 1))


def mean(field_):
    if field_.geom.kind != "torus":
        raise ValidationError("mean is defined on the torus only")
    return field_.values.reshape(-1, field_.dim, field_.dim).mean(axis=0)


def normal_trace_mass(field_, boundary="all"):
    """``int |A n| ds`` over a boundary component.

    ``boundary`` is ``"all"`` / ``"sphere"`` for balls and ``"bottom"``
    (t = 0), ``"top"`` (t = tau) or ``"all"`` for slabs.
    """
    geom = field_.geom
    if geom.kind == "torus":
        raise ValidationError("a torus has no boundary")
    if geom.kind == "ball":
        if boundary not in ("all", "sphere"):
            raise ValidationError(f"unknown ball boundary {boundary!r}")
        rule = geom.sphere()
        an = np.einsum("nij,nj->ni", field_.trace_values, rule.nodes)
        return float(geom.radius ** (geom.dim - 1)
                     * rule.integrate(np.linalg.norm(an, axis=-1)))
    faces = {"bottom": [0], "top": [-1], "all": [0, -1]}
    if boundary not in faces:
        raise ValidationError(f"unknown slab boundary {boundary!r}")
    h = geom.spacing()
    w = quad.trapezoid_weights(geom.shape[1], h[1])
    for n, hi in zip(geom.shape[2:], h[2:]):
        w = np.multiply.outer(w, quad.trapezoid_weights(n, hi))
    total = 0.0
    for k in faces[boundary]:
        # normal is -e_t at the bottom and e_t at the top; |A n| is the same
        an = field_.values[k][..., :, 0]
        total += float(np.sum(w * np.linalg.norm(an, axis=-1)))
    return total


def check_decay(field_, tol=DECAY_TOL):
    """Raise :class:`DecayViolation` unless the field is negligible on the lateral box edge."""
    geom = field_.geom
    if geom.kind != "slab":
        return 0.0
    mag = np.linalg.norm(field_.values, axis=(-2, -1))
    scale = mag.max()
    if scale == 0.0:
        return 0.0
    edge = 0.0
    for ax in range(1, geom.dim):
        edge = max(edge, np.take(mag, 0, axis=ax).max(), np.take(mag, -1, axis=ax).max())
    ratio = edge / scale
    if ratio >= tol:
        raise DecayViolation(f"field at the y-box edge is {ratio:.2e} of its maximum (tol {tol})")
    return float(ratio)


# -- differentiation ----------------------------------------------------------

@dataclass(frozen=True)
class DivergenceReport:
    field: np.ndarray
    l1_norm: float
    linf_norm: float
    scheme: str


def spectral_derivative(values, axis, length):
    n = values.shape[axis]
    k = 2j * np.pi * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    return np.real(np.fft.ifft(np.fft.fft(values, axis=axis) * k.reshape(shape), axis=axis))


def interior_mask(geom):
    if geom.kind == "torus":
        return np.ones(geom.shape, dtype=bool)
    if geom.kind == "ball":
        r = np.linalg.norm(geom.points(), axis=-1)
        return r <= geom.radius - geom.spacing().max()
    mask = np.zeros(geom.shape, dtype=bool)
    mask[(slice(1, -1),) * geom.dim] = True
    return mask


def discrete_divergence(field_):
    """Row-wise divergence ``sum_j d_j A_ij`` at every grid node."""
    geom = field_.geom
    a = field_.values
    d = geom.dim
    h = geom.spacing()
    div = np.zeros(a.shape[:-1])
    for j in range(d):
        col = a[..., :, j]
        if geom.kind == "torus":
            div += spectral_derivative(col, j, geom.period[j])
        else:
            div += np.gradient(col, h[j], axis=j, edge_order=2)
    mask = interior_mask(geom)
    mag = np.linalg.norm(div, axis=-1)
    w = grid_weights(geom) if geom.kind != "ball" else np.full(geom.shape, np.prod(h))
    return DivergenceReport(div, float(np.sum((w * mag)[mask])),
                            float(mag[mask].max()) if mask.any() else 0.0, geom.scheme)


# -- serialisation -------------------------------------------------------------

def save_field(field_, path):
    """Write ``<path>.json`` (header) and ``<path>.bin`` (packed float64, little endian)."""
    path = Path(path)
    blocks, sections, offset = [], [], 0
    for name in ("values", "quad_values", "trace_values"):
        arr = getattr(field_, name)
        if arr is None:
            continue
        packed = np.ascontiguousarray(pack(arr), dtype="<f8")
        blocks.append(packed.tobytes())
        sections.append({"name": name, "shape": list(arr.shape[:-2]),
                         "offset": offset, "count": int(packed.size)})
        offset += packed.nbytes
    header = {
        "format": "dpt-field", "version": FORMAT_VERSION, "dtype": "float64-le",
        "layout": "upper-triangle-row-major", "dim": field_.dim,
        "geometry": field_.geom.to_dict(), "scheme": field_.scheme,
        "provenance": field_.provenance, "flags": sorted(field_.flags),
        "homogeneity": field_.homogeneity, "sections": sections,
    }
    path.with_suffix(".bin").write_bytes(b"".join(blocks))
    path.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return path.with_suffix(".json")


def load_field(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    if header.get("format") != "dpt-field":
        raise ValidationError(f"{path} is not a dpt field header")
    raw = path.with_suffix(".bin").read_bytes()
    d = header["dim"]
    arrays = {}
    for sec in header["sections"]:
        flat = np.frombuffer(raw, dtype="<f8", count=sec["count"], offset=sec["offset"])
        arrays[sec["name"]] = unpack(flat.reshape(tuple(sec["shape"]) + (-1,)), d)
    geom = Geometry.from_dict(header["geometry"])
    return TensorField(geom, arrays["values"], header["provenance"], frozenset(header["flags"]),
                       arrays.get("quad_values"), arrays.get("trace_values"),
                       header["homogeneity"])
