"""Kinetic model ``f_t + v f_y + F f_v = 0`` with ``F = -d/dy (chi * rho)``.

The phase-space solver is one-dimensional in space (``y`` and ``v`` real);
the interaction tensor ``S`` and the checks built on it are written for any
spatial dimension so that frozen two-dimensional densities can be tested.

Time stepping is Strang-split semi-Lagrangian: half a step of free transport
in ``y``, a full step of acceleration in ``v`` with the force frozen, and
another half step in ``y``.  Each sub-step shifts every line of the grid by a
constant amount with four-point Lagrange interpolation, so mass and the first
two velocity moments move exactly as they should up to the clipping of
negative undershoots, which is accumulated and reported.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import fields as fl
from .citest import check_slab
from .errors import CFLViolation, DecayViolation, NotPSD, ValidationError
from .quadrature import gauss_legendre, trapezoid_weights
from .symcone import PSD_TOL, eigvals

DECAY_TOL = 1e-8


# -- kernels ----------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """Radial interaction kernel ``chi(r)`` with derivative ``chi'(r)``."""

    chi: object
    chi_prime: object
    name: str
    monotone_nonincreasing: bool = True
    lower_bound: float = None  # inf chi, or None when unbounded below

    @property
    def bounded_below(self):
        return self.lower_bound is not None

    def phi(self, r):
        """``r |chi'(r)|``."""
        return np.abs(r) * np.abs(self.chi_prime(np.abs(r)))

    def check_monotone(self, r_max, samples=4096, tol=1e-14):
        r = np.linspace(0.0, r_max, samples)[1:]
        return bool(np.all(self.chi_prime(r) <= tol))

    def check_phi_control(self, r_max, const, samples=4096):
        """``phi(r) <= const (1 + chi(r))`` on ``(0, r_max]``."""
        r = np.linspace(0.0, r_max, samples)[1:]
        return bool(np.all(self.phi(r) <= const * (1.0 + self.chi(r))))


def exponential_kernel(strength=1.0, length=1.0):
    """``strength exp(-r / length)``: repulsive, bounded below by 0."""
    return Kernel(lambda r: strength * np.exp(-np.abs(r) / length),
                  lambda r: -strength / length * np.exp(-np.abs(r) / length),
                  f"exp(strength={strength},length={length})", True, 0.0)


def coulomb_kernel():
    """One-dimensional Coulomb kernel ``-r/2``; unbounded below."""
    return Kernel(lambda r: -0.5 * np.abs(r), lambda r: np.full_like(np.asarray(r, float), -0.5),
                  "coulomb1d", True, None)


def ring_kernel(r0=2.0, width=0.5):
    """``exp(-(r - r0)^2 / width^2)``: increasing on ``(0, r0)``, so not monotone."""
    return Kernel(lambda r: np.exp(-(np.abs(r) - r0) ** 2 / width ** 2),
                  lambda r: -2.0 * (np.abs(r) - r0) / width ** 2
                  * np.exp(-(np.abs(r) - r0) ** 2 / width ** 2),
                  f"ring(r0={r0},width={width})", False, 0.0)


KERNELS = {"exp": exponential_kernel, "coulomb": coulomb_kernel, "ring": ring_kernel}


def make_kernel(name, **params):
    if name not in KERNELS:
        raise ValidationError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}")
    return KERNELS[name](**params)


# -- grids and states ---------------------------------------------------------------

@dataclass(frozen=True)
class PhaseGrid:
    """Uniform nodes ``y in [-L, L]`` and ``v in [-V, V]`` (end points included)."""

    half_width: float
    vmax: float
    ny: int
    nv: int

    def __post_init__(self):
        if self.ny < 8 or self.nv < 8 or self.half_width <= 0 or self.vmax <= 0:
            raise ValidationError("phase grid needs positive extents and >= 8 nodes per axis")

    @property
    def y(self):
        return np.linspace(-self.half_width, self.half_width, self.ny)

    @property
    def v(self):
        return np.linspace(-self.vmax, self.vmax, self.nv)

    @property
    def dy(self):
        return 2.0 * self.half_width / (self.ny - 1)

    @property
    def dv(self):
        return 2.0 * self.vmax / (self.nv - 1)

    def wy(self):
        return trapezoid_weights(self.ny, self.dy)

    def wv(self):
        return trapezoid_weights(self.nv, self.dv)


@dataclass(frozen=True)
class KineticState:
    grid: PhaseGrid
    f: np.ndarray  # (ny, nv)
    kernel: Kernel
    t: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.shape != (self.grid.ny, self.grid.nv):
            raise ValidationError("f must have shape (ny, nv)")
        if not np.all(np.isfinite(f)) or f.min() < 0:
            raise ValidationError("f must be finite and non-negative")
        object.__setattr__(self, "f", f)

    def mass(self):
        return float(self.grid.wy() @ self.f @ self.grid.wv())

    def edge_ratio(self):
        f = self.f
        top = f.max()
        if top == 0:
            return 0.0
        edge = max(np.abs(f[[0, -1], :]).max(), np.abs(f[:, [0, -1]]).max())
        return float(edge / top)


def maxwellian_sum(grid, components):
    """Sum of drifting Maxwellians.

    ``components`` holds tuples ``(mass, center, drift, sigma, thermal)``:
    a Gaussian in ``y`` of width ``sigma`` times a Gaussian in ``v`` of
    mean ``drift`` and variance ``thermal``.
    """
    y, v = grid.y[:, None], grid.v[None, :]
    f = np.zeros((grid.ny, grid.nv))
    for mass, center, drift, sigma, thermal in components:
        gy = np.exp(-(y - center) ** 2 / (2 * sigma ** 2)) / np.sqrt(2 * np.pi * sigma ** 2)
        gv = np.exp(-(v - drift) ** 2 / (2 * thermal)) / np.sqrt(2 * np.pi * thermal)
        f += mass * gy * gv
    return f


def moments(state):
    """``rho = int f dv``, ``m = int f v dv``, ``p2 = int f v^2 dv`` (trapezoid in v)."""
    wv = state.grid.wv()
    v = state.grid.v
    f = state.f
    return {"rho": f @ wv, "m": f @ (wv * v), "p2": f @ (wv * v * v)}


# -- interaction ----------------------------------------------------------------------

def _points(axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], -1)


def _weights(axes):
    w = trapezoid_weights(len(axes[0]), axes[0][1] - axes[0][0])
    for ax in axes[1:]:
        w = np.multiply.outer(w, trapezoid_weights(len(ax), ax[1] - ax[0]))
    return w


class ForceOperator:
    """Direct-summation convolution operators for ``chi * rho`` and ``-grad (chi * rho)``.

    The force uses ``chi'`` directly, ``F(y) = -int chi'(|y-w|) (y-w)/|y-w| rho(w) dw``,
    with the singular self term set to zero, which keeps the discrete force
    exactly antisymmetric (total momentum is conserved by the force).
    """

    def __init__(self, axes, kernel):
        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        self.kernel = kernel
        pts = _points(self.axes)
        w = _weights(self.axes).ravel()
        diff = pts[:, None, :] - pts[None, :, :]
        r = np.linalg.norm(diff, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        self.potential_matrix = kernel.chi(r) * w[None, :]
        coef = np.where(r > 0, -kernel.chi_prime(safe) / safe, 0.0) * w[None, :]
        self.force_matrix = coef[..., None] * diff  # (M, M, n)
        self.shape = tuple(len(a) for a in self.axes)

    def potential(self, rho):
        return (self.potential_matrix @ np.ravel(rho)).reshape(self.shape)

    def force(self, rho):
        """Shape ``(*grid,)`` for n = 1, else ``(*grid, n)``."""
        f = np.einsum("ijk,j->ik", self.force_matrix, np.ravel(rho))
        if len(self.axes) == 1:
            return f[:, 0]
        return f.reshape(self.shape + (len(self.axes),))


def potential_force(rho, axes, kernel):
    op = ForceOperator(axes if isinstance(axes, (list, tuple)) else (axes,), kernel)
    return {"phi": op.potential(rho), "F": op.force(rho)}


def s_rule(nodes=8, kind="midpoint"):
    """Quadrature in ``s`` on ``[-1/2, 1/2]``."""
    if kind == "midpoint":
        return -0.5 + (np.arange(nodes) + 0.5) / nodes, np.full(nodes, 1.0 / nodes)
    if kind == "gauss":
        return gauss_legendre(-0.5, 0.5, nodes)
    raise ValidationError(f"unknown s rule {kind!r}")


def _interaction_grid_1d(rho, dy, kernel):
    """Exact-lattice evaluation of ``S(y) = -int_{v<y<w} chi'(w-v) rho(v) rho(w)``.

    With ``z = k dy`` the inner ``s`` integral is a trapezoid sum over the
    grid nodes of the window ``[y - z, y]``; summing ``S dy`` reproduces the
    discrete double sum ``1/2 sum phi(|w-v|) rho(v) rho(w) dv dw`` exactly.
    """
    n = rho.size
    padded = np.concatenate([rho, np.zeros(n)])
    shifted = np.lib.stride_tricks.sliding_window_view(padded, n)[:n]  # [j, k] = rho[j+k]
    prod = rho[:, None] * shifted                                       # P[j, k]
    csum = np.vstack([np.zeros((1, n)), np.cumsum(prod, axis=0)])
    i = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    lo = np.maximum(i - k, 0)
    window = csum[i + 1, k] - csum[lo, k]
    ends = prod[i, k] + np.where(i - k >= 0, prod[np.maximum(i - k, 0), k], 0.0)
    trap = dy * (window - 0.5 * ends)
    z = np.arange(n) * dy
    weight = np.zeros(n)
    weight[1:] = -kernel.chi_prime(z[1:]) * dy
    return trap @ weight


def _interaction_quadrature(rho, axes, kernel, nodes, kind):
    n = len(axes)
    shape = rho.shape
    h = np.array([a[1] - a[0] for a in axes])
    s, ws = s_rule(nodes, kind)
    coeffs = ndimage.spline_filter(rho, order=3, mode="constant")
    idx = np.stack(np.meshgrid(*[np.arange(m, dtype=float) for m in shape], indexing="ij"))
    out = np.zeros(shape + (n, n))
    ranges = [np.arange(-(m - 1), m) for m in shape]
    for k in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, n):
        nz = np.flatnonzero(k)
        if nz.size == 0 or k[nz[0]] < 0:
            continue  # half lattice; z and -z contribute equally
        z = k * h
        r = np.linalg.norm(z)
        acc = np.zeros(shape)
        for sj, wj in zip(s, ws):
            lo = idx + ((sj - 0.5) * k).reshape((n,) + (1,) * n)
            hi = idx + ((sj + 0.5) * k).reshape((n,) + (1,) * n)
            a = ndimage.map_coordinates(coeffs, lo, order=3, mode="constant", prefilter=False)
            b = ndimage.map_coordinates(coeffs, hi, order=3, mode="constant", prefilter=False)
            acc += wj * np.clip(a, 0, None) * np.clip(b, 0, None)
        scale = -2.0 * 0.5 * kernel.chi_prime(r) / r * np.prod(h)
        out += scale * acc[..., None, None] * np.outer(z, z)
    return out


def interaction_tensor(rho, axes, kernel, method="auto", s_nodes=8, s_kind="gauss"):
    """Non-local tensor ``S`` with ``-rho F = Div_y S``.

    ``S(y) = -1/2 int (chi'(|z|)/|z|) z z^T int_{-1/2}^{1/2} rho(y+(s-1/2)z) rho(y+(s+1/2)z) ds dz``

    ``method="grid"`` (1-D only) evaluates the ``s`` integral on grid nodes
    exactly; ``method="quadrature"`` interpolates ``rho`` with cubic splines
    at ``s_nodes`` points of the chosen ``s`` rule.  For n = 1 the result is
    returned as a scalar field, otherwise as ``(*grid, n, n)``.
    """
    axes = tuple(np.asarray(a, dtype=float) for a in (axes if isinstance(axes, (list, tuple)) else (axes,)))
    rho = np.asarray(rho, dtype=float)
    if rho.shape != tuple(len(a) for a in axes):
        raise ValidationError("density shape does not match the axes")
    if method == "auto":
        method = "grid" if len(axes) == 1 else "quadrature"
    if method == "grid":
        if len(axes) != 1:
            raise ValidationError("grid evaluation is one-dimensional")
        return _interaction_grid_1d(rho, axes[0][1] - axes[0][0], kernel)
    out = _interaction_quadrature(rho, axes, kernel, s_nodes, s_kind)
    return out[..., 0, 0] if len(axes) == 1 else out


def divergence_identity_check(rho, s_field, force, axes):
    """``max |Div_y S + rho F|`` over nodes at least two cells from the edge."""
    axes = axes if isinstance(axes, (list, tuple)) else (axes,)
    n = len(axes)
    rho = np.asarray(rho, dtype=float)
    if n == 1:
        defect = np.gradient(s_field, axes[0], edge_order=2) + rho * force
    else:
        div = sum(np.gradient(s_field[..., :, j], axes[j], axis=j, edge_order=2)
                  for j in range(n))
        defect = np.linalg.norm(div + rho[..., None] * force, axis=-1)
    core = tuple(slice(2, -2) for _ in range(n))
    return float(np.abs(defect[core]).max()) if defect[core].size else 0.0


@dataclass(frozen=True)
class L1BoundReport:
    lhs: float
    rhs: float
    margin: float
    holds: bool


def s_l1_bound_check(rho, axes, kernel, s_field=None, rel_slack=1e-10):
    """``int |S| <= 1/2 int int phi(|w - v|) rho(v) rho(w)`` (Frobenius norm for n > 1)."""
    axes = tuple(np.asarray(a, dtype=float) for a in (axes if isinstance(axes, (list, tuple)) else (axes,)))
    rho = np.asarray(rho, dtype=float)
    if s_field is None:
        s_field = interaction_tensor(rho, axes, kernel)
    w = _weights(axes)
    norm = np.abs(s_field) if len(axes) == 1 else np.linalg.norm(s_field, axis=(-2, -1))
    lhs = float(np.sum(w * norm))
    pts = _points(axes)
    r = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    wr = (w * rho).ravel()
    rhs = float(0.5 * wr @ kernel.phi(r) @ wr)
    return L1BoundReport(lhs, rhs, rhs - lhs, bool(lhs <= rhs * (1 + rel_slack) + 1e-300))


def estimate_integral(rho, axes, kernel, s_field=None):
    """``int (rho det S)^(1/n) dy`` for a frozen density."""
    axes = tuple(np.asarray(a, dtype=float) for a in (axes if isinstance(axes, (list, tuple)) else (axes,)))
    n = len(axes)
    if s_field is None:
        s_field = interaction_tensor(rho, axes, kernel)
    det = s_field if n == 1 else np.linalg.det(s_field)
    integrand = np.clip(np.asarray(rho) * det, 0.0, None) ** (1.0 / n)
    return float(np.sum(_weights(axes) * integrand))


def homogeneity_check(rho, axes, kernel, factors=(0.5, 2.0)):
    """Ratio of ``estimate_integral(c rho)`` to ``c^(2+1/n) estimate_integral(rho)`` per factor."""
    n = len(axes) if isinstance(axes, (list, tuple)) else 1
    base = estimate_integral(rho, axes, kernel)
    return {c: estimate_integral(c * np.asarray(rho), axes, kernel) / (c ** (2 + 1.0 / n) * base)
            for c in factors}


# -- time stepping -------------------------------------------------------------------

def _lagrange_weights(theta):
    t = theta
    return np.stack([-t * (t - 1) * (t - 2) / 6, (t + 1) * (t - 1) * (t - 2) / 2,
                     -(t + 1) * t * (t - 2) / 2, (t + 1) * t * (t - 1) / 6], -1)


def shift_lines(f, shifts):
    """``g[l, i] = f_l(i - shifts[l])`` along the last axis, zero outside the grid.

    Four-point Lagrange interpolation; each line moves by its own constant
    number of cells, so sums over a line are preserved whenever ``f`` is
    negligible near the line ends.
    """
    f = np.asarray(f, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    nl, n = f.shape
    base = np.floor(-shifts).astype(int)          # i - shift = i + base + theta
    theta = -shifts - base
    pad = int(np.abs(base).max()) + 3
    fp = np.pad(f, ((0, 0), (pad, pad)))
    i = np.arange(n)[None, :]
    w = _lagrange_weights(theta)                  # (nl, 4)
    out = np.zeros_like(f)
    for k, off in enumerate((-1, 0, 1, 2)):
        idx = i + base[:, None] + off + pad
        out += w[:, k, None] * np.take_along_axis(fp, idx, axis=1)
    return out


@dataclass
class StepInfo:
    clip_loss: float
    force_max: float


def step(state, dt, op=None):
    """One Strang step; returns ``(new_state, StepInfo)``."""
    g = state.grid
    op = op or ForceOperator((g.y,), state.kernel)
    if dt <= 0:
        raise ValidationError("time step must be positive")
    if dt * g.vmax > g.dy * (1 + 1e-12):
        raise CFLViolation(f"dt={dt:.3e} exceeds dy/V={g.dy / g.vmax:.3e}")
    cell = g.dy * g.dv
    clip = 0.0

    def clipped(a):
        nonlocal clip
        neg = a < 0
        clip += float(-a[neg].sum()) * cell
        a[neg] = 0.0
        return a

    f = state.f
    # y-transport: line l is the column f[:, l] with speed v_l
    f = clipped(shift_lines(f.T, g.v * 0.5 * dt / g.dy).T)
    force = op.force(f @ g.wv())
    fmax = float(np.abs(force).max())
    if dt * fmax > g.dv * (1 + 1e-12):
        raise CFLViolation(f"dt * max|F| = {dt * fmax:.3e} exceeds dv={g.dv:.3e}")
    f = clipped(shift_lines(f, force * dt / g.dv))
    f = clipped(shift_lines(f.T, g.v * 0.5 * dt / g.dy).T)
    return KineticState(g, f, state.kernel, state.t + dt), StepInfo(clip, fmax)


@dataclass(frozen=True)
class EnergyRecord:
    kinetic: float
    potential: float
    total: float
    shifted: float = None  # total - inf(chi) M^2 / 2, non-negative; None if chi is unbounded below


def energy(state, op=None):
    g = state.grid
    op = op or ForceOperator((g.y,), state.kernel)
    mom = moments(state)
    kin = 0.5 * float(g.wy() @ mom["p2"])
    pot = 0.5 * float(g.wy() @ (op.potential(mom["rho"]) * mom["rho"]))
    total = kin + pot
    shifted = None
    if state.kernel.bounded_below:
        mass = float(g.wy() @ mom["rho"])
        shifted = total - 0.5 * min(0.0, state.kernel.lower_bound) * mass ** 2
    return EnergyRecord(kin, pot, total, shifted)


# -- runs -------------------------------------------------------------------------------

@dataclass(frozen=True)
class VlasovConfig:
    half_width: float = 14.0
    vmax: float = 8.0
    ny: int = 512
    nv: int = 512
    tau: float = 1.0
    kernel: str = "exp"
    kernel_params: dict = field(default_factory=dict)
    components: tuple = ((1.0, 0.0, 0.5, 1.0, 1.0),)
    cfl: float = 0.9
    decay_tol: float = DECAY_TOL

    def validate(self):
        if self.tau <= 0 or not 0 < self.cfl <= 1 or self.decay_tol <= 0:
            raise ValidationError("tau > 0, 0 < cfl <= 1 and decay_tol > 0 are required")
        if not self.components:
            raise ValidationError("initial data needs at least one Maxwellian")
        for comp in self.components:
            if len(comp) != 5 or comp[0] <= 0 or comp[3] <= 0 or comp[4] <= 0:
                raise ValidationError("components are (mass>0, center, drift, sigma>0, thermal>0)")

    def grid(self):
        return PhaseGrid(self.half_width, self.vmax, self.ny, self.nv)


@dataclass
class RunRecord:
    """Append-only time series of a run; one entry per stored time."""

    config: VlasovConfig
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    momentum: list = field(default_factory=list)
    abs_momentum: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    shifted_energy: list = field(default_factory=list)
    clip_loss: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    m: list = field(default_factory=list)
    p2: list = field(default_factory=list)
    s: list = field(default_factory=list)
    force: list = field(default_factory=list)
    final_state: KineticState = None

    def append(self, state, op, clip):
        g = state.grid
        mom = moments(state)
        e = energy(state, op)
        wy = g.wy()
        self.times.append(state.t)
        self.mass.append(float(wy @ mom["rho"]))
        self.momentum.append(float(wy @ mom["m"]))
        self.abs_momentum.append(float(wy @ state.f @ (g.wv() * np.abs(g.v))))
        self.energy.append(e.total)
        self.shifted_energy.append(e.shifted)
        self.clip_loss.append(clip)
        self.rho.append(mom["rho"])
        self.m.append(mom["m"])
        self.p2.append(mom["p2"])
        self.s.append(interaction_tensor(mom["rho"], (g.y,), state.kernel))
        self.force.append(op.force(mom["rho"]))

    def diagnostics(self):
        mass0, p0 = self.mass[0], self.momentum[0]
        scale_p = max(abs(p0), self.abs_momentum[0])
        e0 = self.energy[0]
        return {
            "mass_drift": max(abs(m - mass0) for m in self.mass) / mass0,
            "momentum_drift": max(abs(p - p0) for p in self.momentum) / scale_p,
            "energy_increase": max(0.0, max(self.energy) - e0) / abs(e0),
            "clip_loss": float(np.sum(self.clip_loss)) / mass0,
            "min_s_ratio": float(min(s.min() for s in self.s) / max(s.max() for s in self.s)),
        }


def run(config, progress=None):
    config.validate()
    g = config.grid()
    kernel = make_kernel(config.kernel, **config.kernel_params)
    state = KineticState(g, maxwellian_sum(g, config.components), kernel)
    if state.edge_ratio() > config.decay_tol:
        raise DecayViolation("initial data is not negligible on the phase-space box edge")
    op = ForceOperator((g.y,), kernel)
    fmax = float(np.abs(op.force(moments(state)["rho"])).max())
    # force bound grows with the density; leave a factor-two headroom
    dt_max = config.cfl * min(g.dy / g.vmax, g.dv / max(2.0 * fmax, 1e-300))
    steps = int(np.ceil(config.tau / dt_max))
    steps += steps % 2  # even count gives an odd number of time slices for Simpson
    dt = config.tau / steps
    rec = RunRecord(config)
    rec.append(state, op, 0.0)
    for k in range(steps):
        state, info = step(state, dt, op)
        rec.append(state, op, info.clip_loss)
        if progress is not None:
            progress(k + 1, steps)
    rec.final_state = state
    if state.edge_ratio() > config.decay_tol:
        raise DecayViolation("solution reached the phase-space box edge")
    return rec


def assemble_T(rec):
    """Space-time field ``[[rho, m], [m, p2 + S]]`` on the slab ``(0, tau) x (-L, L)``."""
    cfg = rec.config
    rho, m = np.array(rec.rho), np.array(rec.m)
    s22 = np.array(rec.p2) + np.array(rec.s)
    geom = fl.slab(cfg.tau, 1, cfg.half_width, rho.shape[0], rho.shape[1])
    values = np.stack([np.stack([rho, m], -1), np.stack([m, s22], -1)], -2)
    return fl.TensorField(geom, values, f"kinetic run kernel={cfg.kernel}",
                          frozenset({"dpt", "divergence_free"}))


def psd_defect(t_field, tol=PSD_TOL):
    """Most negative eigenvalue relative to ``1 + max |T|`` (0 when PSD)."""
    lam = eigvals(t_field.values)[..., 0].min()
    rel = -float(lam) / (1.0 + float(np.abs(t_field.values).max()))
    return max(rel, 0.0), bool(rel <= tol)


def slab_estimate(rec, decay_tol=DECAY_TOL):
    """Slab inequality for the assembled tensor, with the ``rho S`` lower bound in ``extra``.

    Traces are ``int |T e_t| dy = int sqrt(rho^2 + m^2) dy`` on each face.
    """
    t_field = assemble_T(rec)
    psd_rel, psd_ok = psd_defect(t_field)
    if not psd_ok:
        kernel = rec.final_state.kernel if rec.final_state is not None else None
        hint = "" if kernel is None or kernel.monotone_nonincreasing else (
            f"; kernel {kernel.name} is not non-increasing")
        raise NotPSD(f"space-time tensor is not PSD (relative defect {psd_rel:.3e}){hint}")
    report = check_slab(t_field, decay_tol)
    weights = fl.grid_weights(t_field.geom)
    rho_s = float(np.sum(weights * np.array(rec.rho) * np.array(rec.s)))
    div = fl.discrete_divergence(t_field)
    report.extra.update({"rho_s_integral": rho_s, "trace": "int sqrt(rho^2 + m^2) dy",
                         "div_linf": div.linf_norm, "div_l1": div.l1_norm,
                         "psd_defect": psd_rel, "psd_ok": psd_ok})
    return report
