"""Subgroups of the symmetric group, their characters, and immanants.

Permutations are tuples ``g`` with ``g[i]`` the image of ``i``; composition
is ``(g * h)[i] = g[h[i]]``.  Character tables are computed numerically by
Burnside's method: simultaneous eigenvectors of the class-sum
multiplication matrices give the central characters, which are then scaled
by the first orthogonality relation.
"""

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial

import numpy as np

from .errors import QuadratureError, ValidationError
from .quadrature import radial_power_integral, sphere_rule
from .symcone import as_array, eigvals, elementary_symmetric

MAX_DEGREE = 4
IMAG_TOL = 1e-10


def compose(g, h):
    return tuple(g[i] for i in h)


def inverse(g):
    out = [0] * len(g)
    for i, gi in enumerate(g):
        out[gi] = i
    return tuple(out)


def identity(d):
    return tuple(range(d))


def transposition(d, i, j):
    g = list(range(d))
    g[i], g[j] = j, i
    return tuple(g)


def sign(g):
    s, seen = 1, [False] * len(g)
    for i in range(len(g)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = g[j]
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def closure(gens, d):
    """Smallest subgroup of S_d containing ``gens``."""
    elems = {identity(d)}
    frontier = list(elems)
    gens = [tuple(g) for g in gens]
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = compose(g, x)
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        frontier = new
    return frozenset(elems)


@dataclass(frozen=True)
class PermGroup:
    degree: int
    elements: tuple
    name: str = ""

    def __post_init__(self):
        els = tuple(sorted(self.elements))
        object.__setattr__(self, "elements", els)
        e = identity(self.degree)
        if e not in els:
            raise ValidationError("group must contain the identity")
        s = set(els)
        for g in els:
            if inverse(g) not in s:
                raise ValidationError("group not closed under inverse")
            for h in els:
                if compose(g, h) not in s:
                    raise ValidationError("group not closed under composition")
        if factorial(self.degree) % len(els):
            raise ValidationError("order does not divide d!")

    @property
    def order(self):
        return len(self.elements)

    def index(self, g):
        return self.elements.index(tuple(g))

    def contains(self, g):
        return tuple(g) in set(self.elements)

    def conjugacy_classes(self):
        """Classes as sorted tuples, the identity class first."""
        remaining = set(self.elements)
        classes = []
        for g in self.elements:
            if g not in remaining:
                continue
            cls = {compose(compose(h, g), inverse(h)) for h in self.elements}
            remaining -= cls
            classes.append(tuple(sorted(cls)))
        classes.sort(key=lambda c: (c[0] != identity(self.degree), len(c), c))
        return classes

    def is_full_symmetric(self):
        return self.order == factorial(self.degree)


def symmetric_group(d):
    return PermGroup(d, tuple(permutations(range(d))), f"S{d}")


def trivial_group(d):
    return PermGroup(d, (identity(d),), "1")


def _canonical(elems, d):
    """Lexicographically minimal conjugate of a subgroup (its class label)."""
    best = None
    for h in permutations(range(d)):
        hi = inverse(h)
        conj = tuple(sorted(compose(compose(h, g), hi) for g in elems))
        if best is None or conj < best:
            best = conj
    return best


def _describe(elems, d):
    """Short class name.

    Primes separate classes of isomorphic subgroups: ``C2'`` is generated by
    a double transposition, ``V4'`` is the non-normal Klein group.
    """
    n = len(elems)
    if n == 1:
        return "1"
    if n == factorial(d):
        return f"S{d}"
    if all(sign(g) == 1 for g in elems) and n == factorial(d) // 2:
        return f"A{d}"
    orders = []
    for g in elems:
        k, x = 1, g
        while x != identity(d):
            x = compose(g, x)
            k += 1
        orders.append(k)
    if max(orders) == n:
        moved = {i for g in elems for i in range(d) if g[i] != i}
        return f"C{n}'" if n == 2 and len(moved) == 4 else f"C{n}"
    if n == 4:
        moved = {i for g in elems for i in range(d) if g[i] != i}
        return "V4" if len(moved) == 4 and all(sign(g) == 1 for g in elems) else "V4'"
    if n == 8:
        return "D4"
    if n == 6:
        return "S3"
    return f"G{n}"


def all_subgroups(d):
    """Every subgroup of S_d as a set of frozensets (augment-by-one-element search)."""
    if not 1 <= d <= MAX_DEGREE:
        raise ValidationError(f"subgroup enumeration supports 2 <= d <= {MAX_DEGREE}")
    sym = list(permutations(range(d)))
    found = {closure([], d)}
    frontier = list(found)
    while frontier:
        new = []
        for h in frontier:
            for g in sym:
                if g in h:
                    continue
                k = closure(list(h) + [g], d)
                if k not in found:
                    found.add(k)
                    new.append(k)
        frontier = new
    return found


def enumerate_subgroups(d):
    """One representative per conjugacy class of subgroups of S_d, d <= 4."""
    if not 2 <= d <= MAX_DEGREE:
        raise ValidationError(f"subgroup enumeration supports 2 <= d <= {MAX_DEGREE}")
    reps = {}
    for h in all_subgroups(d):
        key = _canonical(h, d)
        reps.setdefault(key, key)
    groups = [PermGroup(d, key, _describe(key, d)) for key in reps]
    groups.sort(key=lambda g: (g.order, g.name, g.elements))
    return groups


# -- characters -------------------------------------------------------------

def _class_multiplication(group, classes):
    """``a[i, j, k]`` = number of (x, y) in C_i x C_j with x y = z_k."""
    r = len(classes)
    where = {}
    for k, c in enumerate(classes):
        for g in c:
            where[g] = k
    a = np.zeros((r, r, r))
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            for x in ci:
                for y in cj:
                    a[i, j, where[compose(x, y)]] += 1
            # each z in C_k is hit equally often
            for k, ck in enumerate(classes):
                a[i, j, k] /= len(ck)
    return a


def _clean(z, tol=1e-9):
    re, im = np.real(z), np.imag(z)
    re = np.where(np.abs(re - np.round(re)) < tol, np.round(re), re)
    im = np.where(np.abs(im - np.round(im)) < tol, np.round(im), im)
    return re + 1j * im


def character_table(group, seed=0):
    """Irreducible characters on conjugacy classes.

    Returns ``(classes, table)`` with ``table[c, k]`` the value of the
    ``c``-th character on class ``k``.  Rows are sorted trivial first, then
    by degree.
    """
    classes = group.conjugacy_classes()
    r = len(classes)
    sizes = np.array([len(c) for c in classes], dtype=float)
    if r == 1:
        return classes, np.ones((1, 1), dtype=complex)
    a = _class_multiplication(group, classes)
    # M_i[j, k] = a[i, j, k]; central characters w satisfy M_i w = w_i w
    mats = np.transpose(a, (0, 1, 2))
    rng = np.random.default_rng(seed)
    for _ in range(20):
        coeff = rng.standard_normal(r)
        m = np.tensordot(coeff, mats, axes=(0, 0))
        vals, vecs = np.linalg.eig(m)
        gaps = np.abs(vals[:, None] - vals[None, :]) + np.eye(r)
        if gaps.min() > 1e-6:
            break
    else:
        raise ValidationError("could not separate central characters")
    rows = []
    for c in range(r):
        w = vecs[:, c] / vecs[0, c]
        dim = np.sqrt(group.order / np.sum(np.abs(w) ** 2 / sizes))
        rows.append(_clean(np.round(dim) * w / sizes))
    table = np.array(rows)
    order = sorted(range(r), key=lambda c: (
        not np.allclose(table[c], 1.0), table[c, 0].real,
        tuple(-np.round(table[c].real, 8)), tuple(-np.round(table[c].imag, 8))))
    return classes, table[order]


@dataclass(frozen=True)
class ImmanantSpec:
    """A subgroup together with an irreducible character, as values per element."""

    group: PermGroup
    values: np.ndarray = field(repr=False)
    label: str = ""

    @property
    def chi1(self):
        return int(round(self.values[self.group.index(identity(self.group.degree))].real))

    def chi(self, g):
        return self.values[self.group.index(g)]

    @property
    def degree(self):
        return self.group.degree

    def is_signature(self):
        return self.group.is_full_symmetric() and all(
            abs(self.chi(g) - sign(g)) < 1e-12 for g in self.group.elements)

    def is_trivial(self):
        return bool(np.allclose(self.values, 1.0))

    def check(self, tol=1e-9):
        """Assert class-function, irreducibility and ``|chi| <= chi(1)``."""
        for cls in self.group.conjugacy_classes():
            v = [self.chi(g) for g in cls]
            if max(abs(x - v[0]) for x in v) > tol:
                raise ValidationError("character is not a class function")
        if abs(np.sum(np.abs(self.values) ** 2) - self.group.order) > tol:
            raise ValidationError("character is not irreducible")
        if np.any(np.abs(self.values) > self.chi1 + tol):
            raise ValidationError("|chi(g)| exceeds chi(1)")


def irreducible_characters(group):
    """All irreducible characters of ``group`` as :class:`ImmanantSpec` objects."""
    classes, table = character_table(group)
    where = {g: k for k, c in enumerate(classes) for g in c}
    specs = []
    for c, row in enumerate(table):
        vals = np.array([row[where[g]] for g in group.elements])
        spec = ImmanantSpec(group, vals, f"{group.name}:chi{c}(dim={int(round(row[0].real))})")
        if spec.is_signature() and not spec.is_trivial():
            spec = ImmanantSpec(group, vals, f"{group.name}:sign")
        elif spec.is_trivial():
            spec = ImmanantSpec(group, vals, f"{group.name}:trivial")
        specs.append(spec)
    return specs


def all_specs(d):
    """Every (subgroup class, irreducible character) pair for S_d."""
    return [s for g in enumerate_subgroups(d) for s in irreducible_characters(g)]


def signature_spec(d):
    g = symmetric_group(d)
    return ImmanantSpec(g, np.array([sign(x) for x in g.elements], dtype=complex), f"S{d}:sign")


def permanent_spec(d):
    g = symmetric_group(d)
    return ImmanantSpec(g, np.ones(g.order, dtype=complex), f"S{d}:trivial")


# -- immanants --------------------------------------------------------------

def immanant(spec, m):
    """``sum_g chi(g) prod_i m[i, g(i)]`` for a symmetric matrix (or stack).

    The imaginary part cancels on symmetric input and is dropped after a check.
    """
    m = as_array(m)
    d = spec.degree
    if m.shape[-1] != d:
        raise ValidationError(f"matrix dimension {m.shape[-1]} != group degree {d}")
    perms = np.array(spec.group.elements)
    rows = np.arange(d)
    terms = np.prod(m[..., rows[None, :], perms], axis=-1)
    total = np.tensordot(terms, spec.values, axes=(-1, 0))
    scale = 1.0 + np.sum(np.abs(terms), axis=-1) * np.max(np.abs(spec.values))
    if np.any(np.abs(total.imag) > IMAG_TOL * scale):
        raise ValidationError("immanant of symmetric input has an imaginary part")
    out = total.real
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SchurResult:
    lhs: float
    rhs: float
    holds: bool


def schur_check(spec, s):
    """Schur's inequality ``det S <= J(S) / chi(1)`` for PSD ``S``."""
    from .symcone import clamped_eigvals

    s = as_array(s)
    lhs = np.prod(clamped_eigvals(s), axis=-1)
    rhs = immanant(spec, s) / spec.chi1
    holds = lhs <= rhs + 1e-12 * (1.0 + np.abs(rhs))
    if np.ndim(lhs) == 0:
        return SchurResult(float(lhs), float(rhs), bool(holds))
    return SchurResult(lhs, rhs, holds)


@dataclass(frozen=True)
class PolyResult:
    coefficients: np.ndarray  # ascending powers of X
    degree: int


def p_poly(spec, e, trim=1e-10):
    """Coefficients of ``X -> J(I + X e e^T)`` by interpolation at X = 0..d."""
    e = np.asarray(e, dtype=float)
    d = spec.degree
    if e.shape != (d,) or abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ValidationError("e must be a unit vector of the group degree")
    xs = np.arange(d + 1, dtype=float)
    mats = np.eye(d)[None] + xs[:, None, None] * np.outer(e, e)[None]
    vals = immanant(spec, mats)
    vander = np.vander(xs, d + 1, increasing=True)
    coef = np.linalg.solve(vander, vals)
    coef = np.where(np.abs(coef) < trim, 0.0, coef)
    nz = np.nonzero(coef)[0]
    return PolyResult(coef, int(nz[-1]) if nz.size else 0)


def generic_direction(d):
    """Unit vector with distinct, nonzero components."""
    e = np.arange(1, d + 1, dtype=float) ** 0.5 + 0.1
    return e / np.linalg.norm(e)


def h_quadratic(spec):
    """Coefficients of ``e_i^2 e_j^2`` (i < j) in the X^2 coefficient of p."""
    d = spec.degree
    out = {}
    for i in range(d):
        for j in range(i + 1, d):
            tau = transposition(d, i, j)
            c = spec.chi1 + (spec.chi(tau).real if spec.group.contains(tau) else 0.0)
            out[(i, j)] = float(c)
    return out


# -- gain functions -----------------------------------------------------------

@dataclass(frozen=True)
class GainFunction:
    """Homogeneous function of degree d/(d-1) on PSD matrices.

    ``kind`` is ``"sigma"`` (``P_k**(d/(k(d-1)))``) or ``"immanant"``
    (``J**(1/(d-1))``).
    """

    kind: str
    dim: int
    k: int = 0
    spec: ImmanantSpec = None

    @classmethod
    def sigma_power(cls, k, d):
        if not 1 <= k <= d:
            raise ValidationError(f"k={k} outside 1..{d}")
        return cls("sigma", d, k=k)

    @classmethod
    def immanant_power(cls, spec):
        return cls("immanant", spec.degree, spec=spec)

    @property
    def label(self):
        return f"P{self.k}" if self.kind == "sigma" else self.spec.label

    def __call__(self, a):
        a = as_array(a)
        d = self.dim
        if self.kind == "sigma":
            lam = np.clip(eigvals(a), 0.0, None)
            val = elementary_symmetric(lam, self.k)
            return np.clip(val, 0.0, None) ** (d / (self.k * (d - 1)))
        val = immanant(self.spec, a)
        return np.clip(val, 0.0, None) ** (1.0 / (d - 1))


@dataclass(frozen=True)
class ScanResult:
    m: np.ndarray
    integrals: np.ndarray
    fitted_slope: float
    rule: str


def default_m_grid(d):
    return np.array([d - 1 - 2.0 ** (-j) for j in range(2, 9)])


def tm_profile(m, d, e):
    """``m e e^T + (d-1-m) I`` for each row of ``e``."""
    e = np.atleast_2d(e)
    return m * e[:, :, None] * e[:, None, :] + (d - 1 - m) * np.eye(d)[None]


def ball_integral_tm(f, m, d, rule=None):
    """``int_B f(T_m) dx`` = radial power integral x spherical quadrature."""
    rule = sphere_rule(d) if rule is None else rule
    q = d / (d - 1)
    radial = radial_power_integral(d - 1 - m * q)
    vals = f(tm_profile(m, d, rule.nodes))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"gain function returned non-finite values at m={m}")
    return radial * float(rule.integrate(vals))


def gain_exponent_scan(f, d=None, m_grid=None, fit_points=4, rule=None):
    """Integrals of ``f(T_m)`` over the unit ball and their log-log slope.

    The slope is fitted against ``log(d-1-m)`` on the ``fit_points`` grid
    values closest to ``d - 1``.
    """
    d = f.dim if d is None else d
    m_grid = default_m_grid(d) if m_grid is None else np.asarray(m_grid, dtype=float)
    if np.any(m_grid >= d - 1) or np.any(m_grid < 0) or m_grid.size < fit_points:
        raise ValidationError(f"m grid must hold >= {fit_points} values in [0, d-1)")
    rule = sphere_rule(d) if rule is None else rule
    integrals = np.array([ball_integral_tm(f, m, d, rule) for m in m_grid])
    order = np.argsort(d - 1 - m_grid)[:fit_points]
    x = np.log(d - 1 - m_grid[order])
    y = np.log(integrals[order])
    if not np.all(np.isfinite(y)):
        raise QuadratureError("non-positive integral in slope fit")
    slope = float(np.polyfit(x, y, 1)[0])
    return ScanResult(m_grid, integrals, slope, rule.name)


def predicted_sigma_slope(k, d):
    return (k - 1) * d / (k * (d - 1)) - 1.0


def predicted_immanant_slope(poly_degree, d):
    return (d - poly_degree) / (d - 1) - 1.0
