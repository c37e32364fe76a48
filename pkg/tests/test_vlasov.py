import numpy as np
import pytest
from scipy.stats import norm

from dpt import citest as ci
from dpt import vlasov as vl
from dpt.errors import CFLViolation, DecayViolation, ValidationError


def gaussian_s(y):
    """S for a standard normal density and chi = exp(-r): a product of two tails."""
    return np.exp(0.5) * norm.cdf(y - 1) * np.exp(0.5) * norm.sf(y + 1)


def gaussian_force(y):
    """-(chi * rho)' for the same data."""
    return np.exp(0.5) * (np.exp(-y) * norm.cdf(y - 1) - np.exp(y) * norm.cdf(-y - 1))


# -- kernels -------------------------------------------------------------------------

def test_kernel_properties():
    exp = vl.exponential_kernel(2.0, 0.5)
    assert exp.check_monotone(20.0) and exp.bounded_below
    r = np.linspace(0.01, 5, 50)
    h = 1e-6
    assert np.allclose(exp.chi_prime(r), (exp.chi(r + h) - exp.chi(r - h)) / (2 * h), rtol=1e-7)
    assert exp.check_phi_control(20.0, 1.0)
    ring = vl.ring_kernel()
    assert not ring.check_monotone(5.0)
    assert np.allclose(ring.chi_prime(r), (ring.chi(r + h) - ring.chi(r - h)) / (2 * h), atol=1e-7)
    coul = vl.coulomb_kernel()
    assert coul.check_monotone(10.0) and not coul.bounded_below
    with pytest.raises(ValidationError):
        vl.make_kernel("yukawa")


# -- grids, moments, transport -----------------------------------------------------------

def test_maxwellian_moments():
    g = vl.PhaseGrid(10.0, 8.0, 257, 257)
    st = vl.KineticState(g, vl.maxwellian_sum(g, [(2.0, 0.5, 0.3, 1.0, 0.5)]), vl.exponential_kernel())
    mom = vl.moments(st)
    wy = g.wy()
    assert st.mass() == pytest.approx(2.0, rel=1e-12)
    assert wy @ mom["m"] == pytest.approx(0.6, rel=1e-12)
    assert wy @ mom["p2"] == pytest.approx(2.0 * (0.5 + 0.09), rel=1e-12)


def test_state_validation():
    g = vl.PhaseGrid(1.0, 1.0, 8, 8)
    with pytest.raises(ValidationError):
        vl.KineticState(g, -np.ones((8, 8)), vl.exponential_kernel())
    with pytest.raises(ValidationError):
        vl.KineticState(g, np.ones((8, 9)), vl.exponential_kernel())
    with pytest.raises(ValidationError):
        vl.PhaseGrid(1.0, 1.0, 4, 8)


def test_shift_lines_exact_cases():
    rng = np.random.default_rng(1)
    f = np.zeros((3, 40))
    f[:, 10:30] = rng.random((3, 20))
    out = vl.shift_lines(f, np.array([2.0, -3.0, 0.0]))
    assert np.allclose(out[0, 12:32], f[0, 10:30])
    assert np.allclose(out[1, 7:27], f[1, 10:30])
    assert np.allclose(out[2], f[2])
    # cubic data is reproduced exactly by four-point Lagrange interpolation
    x = np.arange(40.0)
    cubic = (0.01 * x ** 3 - 0.2 * x ** 2 + x)[None]
    assert np.allclose(vl.shift_lines(cubic, np.array([0.37]))[0, 3:-3],
                       (0.01 * (x - 0.37) ** 3 - 0.2 * (x - 0.37) ** 2 + (x - 0.37))[3:-3])


def test_shift_lines_conserves_moments():
    x = np.arange(200.0)
    f = np.exp(-(x - 100) ** 2 / 50)[None]
    out = vl.shift_lines(f, np.array([0.3]))
    assert out.sum() == pytest.approx(f.sum(), rel=1e-14)
    assert (out * x).sum() == pytest.approx((f * x).sum() + 0.3 * f.sum(), rel=1e-13)


def test_free_streaming_matches_closed_form():
    """With a zero kernel the solver reproduces the exact free-transport moments."""
    cfg = vl.VlasovConfig(half_width=12.0, vmax=8.0, ny=256, nv=256, tau=1.0,
                          kernel="exp", kernel_params={"strength": 0.0},
                          components=((1.0, 0.0, 0.5, 1.0, 1.0),))
    rec = vl.run(cfg)
    y = cfg.grid().y
    rho, m, p2 = ci.free_transport_moments(1.0, y, drift=0.5)
    assert np.abs(rec.rho[-1] - rho).max() < 1e-3 * rho.max()
    assert np.abs(rec.m[-1] - m).max() < 1e-3 * np.abs(m).max()
    assert np.abs(rec.p2[-1] - p2).max() < 2e-3 * p2.max()


# -- force and interaction tensor ------------------------------------------------------------

def test_force_against_closed_form():
    errs = []
    for n in (129, 257):
        y = np.linspace(-10, 10, n)
        f = vl.potential_force(norm.pdf(y), y, vl.exponential_kernel())["F"]
        errs.append(np.abs(f - gaussian_force(y)).max())
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 3.5


def test_force_is_antisymmetric():
    y = np.linspace(-6, 6, 101)
    rho = norm.pdf(y, 0.7, 0.8) + 0.5 * norm.pdf(y, -1.5, 0.5)
    op = vl.ForceOperator((y,), vl.exponential_kernel())
    w = vl.PhaseGrid(6.0, 1.0, 101, 8).wy()
    assert abs(w @ (rho * op.force(rho))) < 1e-15


@pytest.mark.parametrize("method,kind,tol", [("grid", None, 2e-3), ("quadrature", "gauss", 2e-3)])
def test_interaction_tensor_against_closed_form(method, kind, tol):
    y = np.linspace(-10, 10, 257)
    s = vl.interaction_tensor(norm.pdf(y), y, vl.exponential_kernel(), method=method,
                              **({"s_kind": kind} if kind else {}))
    assert np.abs(s - gaussian_s(y)).max() < tol * gaussian_s(y).max()


def test_interaction_tensor_second_order():
    errs = []
    for n in (129, 257, 513):
        y = np.linspace(-10, 10, n)
        errs.append(np.abs(vl.interaction_tensor(norm.pdf(y), y, vl.exponential_kernel()) - gaussian_s(y)).max())
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_s_rule_nodes():
    x, w = vl.s_rule(8, "gauss")
    assert w.sum() == pytest.approx(1.0) and np.all(np.abs(x) < 0.5)
    x, w = vl.s_rule(4, "midpoint")
    assert np.allclose(x, [-0.375, -0.125, 0.125, 0.375])
    with pytest.raises(ValidationError):
        vl.s_rule(4, "simpson")


def test_divergence_identity_refinement():
    y_err = []
    for n in (257, 513):
        y = np.linspace(-10, 10, n)
        rho = norm.pdf(y)
        k = vl.exponential_kernel()
        s = vl.interaction_tensor(rho, y, k)
        f = vl.potential_force(rho, y, k)["F"]
        y_err.append(vl.divergence_identity_check(rho, s, f, y))
    assert y_err[0] / y_err[1] > 3.5


def test_l1_bound_is_identity_in_1d():
    """For repulsive kernels S >= 0 in 1-D and the L1 bound is met with equality."""
    y = np.linspace(-8, 8, 201)
    rho = norm.pdf(y, -1, 0.7) + norm.pdf(y, 1.5, 1.0)
    rep = vl.s_l1_bound_check(rho, y, vl.exponential_kernel())
    assert rep.holds
    assert abs(rep.margin) < 1e-12 * rep.rhs


def test_two_dimensional_tensor():
    ax = np.linspace(-5, 5, 20)
    yy, zz = np.meshgrid(ax, ax, indexing="ij")
    rho = np.exp(-((yy - 0.5) ** 2 + zz ** 2) / 1.5) + 0.5 * np.exp(-((yy + 1) ** 2 + (zz - 1) ** 2))
    k = vl.exponential_kernel()
    s = vl.interaction_tensor(rho, (ax, ax), k)
    assert s.shape == (20, 20, 2, 2)
    assert np.allclose(s, np.swapaxes(s, -1, -2))
    assert np.linalg.eigvalsh(s)[..., 0].min() >= -1e-12 * np.abs(s).max()
    rep = vl.s_l1_bound_check(rho, (ax, ax), k, s)
    assert rep.holds and rep.margin > 0
    ratios = vl.homogeneity_check(rho, (ax, ax), k)
    assert all(r == pytest.approx(1.0, rel=1e-10) for r in ratios.values())


def test_increasing_kernel_breaks_positivity():
    y = np.linspace(-6, 6, 241)
    rho = norm.pdf(y, -0.5, 0.1) + norm.pdf(y, 0.5, 0.1)
    s = vl.interaction_tensor(rho, y, vl.ring_kernel())
    assert s.min() < -1e-3 * np.abs(s).max()


# -- time stepping ----------------------------------------------------------------------------

def test_step_cfl_guard():
    g = vl.PhaseGrid(5.0, 4.0, 64, 64)
    st = vl.KineticState(g, vl.maxwellian_sum(g, [(1.0, 0.0, 0.0, 0.5, 0.5)]), vl.exponential_kernel())
    with pytest.raises(CFLViolation):
        vl.step(st, 2 * g.dy / g.vmax)
    with pytest.raises(ValidationError):
        vl.step(st, 0.0)


def test_single_step_conservation():
    g = vl.PhaseGrid(10.0, 8.0, 128, 128)
    st = vl.KineticState(g, vl.maxwellian_sum(g, [(1.0, 0.0, 0.5, 1.0, 1.0)]), vl.exponential_kernel())
    new, info = vl.step(st, 0.5 * g.dy / g.vmax)
    assert new.mass() == pytest.approx(st.mass(), rel=1e-13)
    p0 = g.wy() @ vl.moments(st)["m"]
    assert g.wy() @ vl.moments(new)["m"] == pytest.approx(p0, rel=1e-10)
    assert info.clip_loss < 1e-12


def test_energy_shift():
    g = vl.PhaseGrid(10.0, 8.0, 64, 64)
    st = vl.KineticState(g, vl.maxwellian_sum(g, [(1.0, 0.0, 0.0, 1.0, 1.0)]), vl.exponential_kernel())
    e = vl.energy(st)
    assert e.shifted == pytest.approx(e.total)  # inf chi = 0
    assert e.kinetic == pytest.approx(0.5, rel=1e-10)
    coul = vl.KineticState(g, st.f, vl.coulomb_kernel())
    assert vl.energy(coul).shifted is None


def test_short_run_diagnostics():
    cfg = vl.VlasovConfig(half_width=12.0, vmax=8.0, ny=128, nv=128, tau=0.5)
    rec = vl.run(cfg)
    diag = rec.diagnostics()
    assert diag["mass_drift"] < 1e-10
    assert diag["momentum_drift"] < 1e-8
    assert diag["energy_increase"] < 1e-3
    assert diag["min_s_ratio"] > -1e-12
    assert (len(rec.times) - 1) % 2 == 0
    rep = vl.slab_estimate(rec)
    assert rep.holds and rep.margin > 0 and rep.extra["psd_ok"]


def test_config_validation_and_decay():
    with pytest.raises(ValidationError):
        vl.VlasovConfig(tau=-1.0).validate()
    with pytest.raises(ValidationError):
        vl.VlasovConfig(components=((1.0, 0.0, 0.0, -1.0, 1.0),)).validate()
    with pytest.raises(DecayViolation):
        vl.run(vl.VlasovConfig(half_width=3.0, ny=64, nv=64, tau=0.1))
