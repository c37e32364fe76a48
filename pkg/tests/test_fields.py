from math import pi

import numpy as np
import pytest

from dpt import fields as fl
from dpt.errors import DecayViolation, ValidationError
from dpt.singular import tm_field


def test_geometry_validation():
    with pytest.raises(ValidationError):
        fl.torus((1.0, 1.0), (4, 16))
    with pytest.raises(ValidationError):
        fl.Geometry("cube", 2, (16, 16))
    with pytest.raises(ValidationError):
        fl.Geometry("torus", 2, (16, 16), period=(1.0,))


def test_torus_integral_of_trig():
    """Trapezoid sums on a torus integrate ``cos^2`` exactly."""
    g = fl.torus((2 * pi, 2 * pi), 16)
    f = fl.sample(g, lambda x: np.cos(x[..., 0])[..., None, None] ** 2 * np.eye(2))
    assert fl.integrate(f, lambda a: a[..., 0, 0]) == pytest.approx(2 * pi ** 2, rel=1e-14)


def test_identity_on_ball_measures():
    for d, vol, area in ((2, pi, 2 * pi), (3, 4 * pi / 3, 4 * pi)):
        f = fl.constant(fl.ball(d, 16), np.eye(d))
        assert fl.detroot_integral(f) == pytest.approx(vol, rel=1e-12)
        assert fl.normal_trace_mass(f) == pytest.approx(area, rel=1e-12)
        assert fl.mass_norm(f) == pytest.approx(np.sqrt(d) * vol, rel=1e-12)


def test_homogeneous_field_needs_degree():
    f = tm_field(0.5, fl.ball(2, 16))
    with pytest.raises(ValidationError):
        fl.integrate(f, lambda a: a[..., 0, 0])
    # d = 2: tr T_m = (2 - m) r^-m, and int_B r^-m = 2 pi / (2 - m)
    tr = fl.integrate(f, lambda a: np.trace(a, axis1=-2, axis2=-1), degree=1.0)
    assert tr == pytest.approx(2 * pi, rel=1e-12)


def test_spectral_divergence_of_piola_like_field():
    """cof D^2 of ``cos x cos y`` is divergence-free to round-off."""
    g = fl.torus((2 * pi, 2 * pi), 32)

    def fn(x):
        c0, c1 = np.cos(x[..., 0]), np.cos(x[..., 1])
        s0, s1 = np.sin(x[..., 0]), np.sin(x[..., 1])
        uxx, uyy, uxy = -c0 * c1, -c0 * c1, s0 * s1
        return np.stack([np.stack([uyy, -uxy], -1), np.stack([-uxy, uxx], -1)], -2)

    rep = fl.discrete_divergence(fl.sample(g, fn))
    assert rep.linf_norm < 1e-12
    assert rep.scheme == "spectral"


def test_fd_divergence_second_order():
    """Centered differences of ``diag(x^3, 0)`` converge at order two."""
    errs = []
    for n in (32, 64):
        g = fl.slab(1.0, 1, 1.0, n, n)
        f = fl.sample(g, lambda x: np.einsum("...,ij->...ij", x[..., 0] ** 3, np.diag([1.0, 0.0])))
        div = fl.discrete_divergence(f).field[..., 0]
        exact = 3 * g.points()[..., 0] ** 2
        errs.append(np.abs(div - exact)[1:-1, 1:-1].max())
    assert errs[1] < errs[0] / 3.5


def test_mean_only_on_torus():
    with pytest.raises(ValidationError):
        fl.mean(fl.constant(fl.ball(2, 16), np.eye(2)))


def test_decay_check():
    g = fl.slab(1.0, 1, 3.0, 16, 32)
    wide = fl.sample(g, lambda x: np.exp(-x[..., 1] ** 2 / 20)[..., None, None] * np.eye(2))
    with pytest.raises(DecayViolation):
        fl.check_decay(wide)
    narrow = fl.sample(g, lambda x: np.exp(-20 * x[..., 1] ** 2)[..., None, None] * np.eye(2))
    assert fl.check_decay(narrow) < 1e-8


def test_slab_traces_on_faces():
    g = fl.slab(2.0, 1, 1.0, 9, 33)
    f = fl.sample(g, lambda x: np.einsum("...,ij->...ij", 1 + x[..., 0], np.diag([1.0, 1.0])))
    assert fl.normal_trace_mass(f, "bottom") == pytest.approx(2.0)
    assert fl.normal_trace_mass(f, "top") == pytest.approx(6.0)
    with pytest.raises(ValidationError):
        fl.normal_trace_mass(f, "side")


@pytest.mark.parametrize("make", [
    lambda: fl.constant(fl.torus((1.0, 2.0), (8, 12)), [[2.0, 0.5], [0.5, 1.0]]),
    lambda: tm_field(0.25, fl.ball(3, 8)),
    lambda: fl.constant(fl.slab(1.0, 1, 4.0, 9, 16), np.eye(2)),
])
def test_save_load_roundtrip(tmp_path, make):
    f = make()
    header = fl.save_field(f, tmp_path / "field")
    assert header.name == "field.json"
    g = fl.load_field(tmp_path / "field")
    assert g.geom == f.geom
    assert g.flags == f.flags and g.homogeneity == f.homogeneity
    assert np.array_equal(g.values, f.values)
    if f.quad_values is not None:
        assert np.array_equal(g.quad_values, f.quad_values)
        assert np.array_equal(g.trace_values, f.trace_values)


def test_load_rejects_foreign_header(tmp_path):
    (tmp_path / "x.json").write_text('{"format": "other"}')
    (tmp_path / "x.bin").write_bytes(b"")
    with pytest.raises(ValidationError):
        fl.load_field(tmp_path / "x")


def test_field_sum_requires_same_geometry():
    a = fl.constant(fl.torus((1.0, 1.0), 8), np.eye(2))
    b = fl.constant(fl.torus((1.0, 1.0), 16), np.eye(2))
    with pytest.raises(ValidationError):
        a + b
    assert np.allclose((a + a).values, 2 * a.values)
    assert np.allclose(a.scaled(3.0).values, 3 * a.values)
