"""Pointwise primitives on the cone of positive semi-definite matrices.

All functions accept either a :class:`SymMatrix` or a plain ``(..., d, d)``
array, so the same code path serves single matrices and whole grids of
matrices.  Spectra are computed with LAPACK's symmetric eigensolver
(Householder tridiagonalisation followed by implicit QL/QR).
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotPSD, ValidationError

PSD_TOL = 1e-10


@dataclass(frozen=True)
class SymMatrix:
    """Dense symmetric matrix stored as its upper triangle (row-major)."""

    dim: int
    entries: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("dimension must be positive")
        if len(self.entries) != self.dim * (self.dim + 1) // 2:
            raise ValidationError(
                f"expected {self.dim * (self.dim + 1) // 2} entries, "
                f"got {len(self.entries)}")

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("expected a square matrix")
        d = a.shape[0]
        sym = 0.5 * (a + a.T)
        iu = np.triu_indices(d)
        return cls(d, tuple(float(x) for x in sym[iu]))

    def to_array(self):
        return unpack(np.asarray(self.entries), self.dim)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.to_array())

    def is_psd(self, tol=None):
        return bool(is_psd(self.to_array(), tol))

    def __array__(self, dtype=None, copy=None):
        return self.to_array() if dtype is None else self.to_array().astype(dtype)


def pack(a):
    """Upper triangle (row-major) of the trailing ``d x d`` block."""
    a = np.asarray(a, dtype=float)
    d = a.shape[-1]
    iu = np.triu_indices(d)
    return a[..., iu[0], iu[1]]


def unpack(packed, d):
    """Inverse of :func:`pack`."""
    packed = np.asarray(packed, dtype=float)
    iu = np.triu_indices(d)
    out = np.zeros(packed.shape[:-1] + (d, d))
    out[..., iu[0], iu[1]] = packed
    out[..., iu[1], iu[0]] = packed
    return out


def as_array(a):
    if isinstance(a, SymMatrix):
        return a.to_array()
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValidationError(f"expected (..., d, d) array, got shape {a.shape}")
    return a


def psd_tolerance(a, tol=None):
    """Absolute eigenvalue tolerance ``tol * (1 + |A|_F)``, per matrix."""
    a = as_array(a)
    tol = PSD_TOL if tol is None else tol
    return tol * (1.0 + np.linalg.norm(a, axis=(-2, -1)))


def eigvals(a):
    a = as_array(a)
    return np.linalg.eigvalsh(0.5 * (a + np.swapaxes(a, -1, -2)))


def is_psd(a, tol=None):
    """Elementwise PSD flag: minimal eigenvalue >= -psd_tol."""
    return eigvals(a)[..., 0] >= -psd_tolerance(a, tol)


def clamped_eigvals(a, tol=None):
    """Spectrum with eigenvalues in ``[-psd_tol, 0)`` set to zero.

    Raises
    ------
    NotPSD
        If any eigenvalue lies below ``-psd_tol``.
    """
    lam = eigvals(a)
    atol = psd_tolerance(a, tol)[..., None]
    if np.any(lam < -atol):
        worst = float(np.min(lam + atol))
        raise NotPSD(f"matrix is not PSD (eigenvalue excess {worst:.3e})")
    return np.where(lam < 0.0, 0.0, lam)


def _check_exponent(p, d):
    allowed = (Fraction(1, d), Fraction(1, d - 1))
    if isinstance(p, Fraction):
        ok = p in allowed
    else:
        ok = any(abs(float(p) - float(q)) < 1e-14 for q in allowed)
    if not ok:
        raise ValidationError(f"exponent {p} not in {{1/{d}, 1/{d - 1}}}")
    return float(p)


def detroot(a, p):
    """``(det A)**p`` from the clamped eigenvalue product.

    ``p`` must be ``1/d`` or ``1/(d-1)``.  Works on stacks of matrices.
    """
    a = as_array(a)
    d = a.shape[-1]
    p = _check_exponent(p, d)
    lam = clamped_eigvals(a)
    det = np.prod(lam, axis=-1)
    out = det ** p
    return float(out) if np.ndim(out) == 0 else out


def det_psd(a, tol=None):
    """Determinant of a PSD matrix (or stack) via clamped eigenvalues."""
    out = np.prod(clamped_eigvals(a, tol), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def rank_one(v):
    v = np.asarray(v, dtype=float)
    return np.multiply.outer(v, v) if v.ndim == 1 else v[..., :, None] * v[..., None, :]


def elementary_symmetric(values, k):
    """``sigma_k`` of the trailing axis of ``values``."""
    values = np.asarray(values, dtype=float)
    # e_j of the first i values, built up one value at a time
    e = np.zeros(values.shape[:-1] + (k + 1,))
    e[..., 0] = 1.0
    for i in range(values.shape[-1]):
        x = values[..., i:i + 1]
        e[..., 1:] = e[..., 1:] + x * e[..., :-1]
    return e[..., k]


def sigma_k(a, k):
    """Elementary symmetric polynomial of degree ``k`` of the spectrum."""
    a = as_array(a)
    d = a.shape[-1]
    if not 1 <= k <= d:
        raise ValidationError(f"k={k} outside 1..{d}")
    out = elementary_symmetric(eigvals(a), k)
    return float(out) if np.ndim(out) == 0 else out


def adjugate(a):
    """Cofactor matrix (transpose of the adjugate; equal for symmetric input).

    Uses explicit minors so that singular matrices are handled.
    """
    a = as_array(a)
    d = a.shape[-1]
    if d == 1:
        return np.ones_like(a)
    if d == 2:
        out = np.empty_like(a)
        out[..., 0, 0] = a[..., 1, 1]
        out[..., 1, 1] = a[..., 0, 0]
        out[..., 0, 1] = -a[..., 1, 0]
        out[..., 1, 0] = -a[..., 0, 1]
        return out
    out = np.empty_like(a)
    idx = np.arange(d)
    for i in range(d):
        rows = idx[idx != i]
        for j in range(d):
            cols = idx[idx != j]
            minor = a[..., rows[:, None], cols[None, :]]
            out[..., i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return out


def random_psd(rng, d, size=None, rank=None):
    """Random PSD matrices ``G G^T`` with Gaussian ``G`` of shape ``(d, rank)``."""
    rank = d if rank is None else rank
    shape = () if size is None else tuple(np.atleast_1d(size).tolist())
    g = rng.standard_normal(shape + (d, rank))
    return g @ np.swapaxes(g, -1, -2)


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))
