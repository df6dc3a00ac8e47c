import numpy as np
import pytest

from nearshore.grid import Grid1D, Bathymetry, State, total_depth
from nearshore.physics import (BETA, BIG_B, DispersiveOperator,
                               auxiliary_projection, eigen_decomp,
                               friction_coefficient, harten_fix, sign_matrix,
                               swe_flux)

G = 9.81
EPS = 1e-9


def test_dispersion_constants():
    assert BETA == pytest.approx(1.0 / 15.0)
    assert BIG_B == pytest.approx(1.0 / 15.0 + 1.0 / 3.0)


def test_flux_hydrostatic_rest():
    fm, fq = swe_flux(np.array([0.0]), np.array([0.0]), np.array([1.0]),
                      G, EPS)
    assert fm[0] == 0.0
    assert fq[0] == pytest.approx(4.905)


def test_flux_moving():
    fm, fq = swe_flux(np.array([1.0]), np.array([2.0]), np.array([1.0]),
                      G, EPS)
    # H = 2, u = 1: [q, uq + g H^2/2] = [2, 2 + 19.62]
    assert fm[0] == 2.0
    assert fq[0] == pytest.approx(21.62)


def test_flux_dry():
    fm, fq = swe_flux(np.array([0.0]), np.array([0.0]), np.array([0.0]),
                      G, EPS)
    assert fm[0] == 0.0 and fq[0] == 0.0


def test_eigen_reconstruction_random_states():
    rng = np.random.default_rng(3)
    for _ in range(100):
        H = rng.uniform(0.05, 3.0)
        u = rng.uniform(-4.0, 4.0)
        ed = eigen_decomp(H, u, G)
        A = np.array([[0.0, 1.0], [G * H - u * u, 2.0 * u]])
        lam = np.diag([ed.lam_minus, ed.lam_plus])
        rec = ed.right @ lam @ ed.left
        assert np.linalg.norm(rec - A) <= 1e-12 * np.linalg.norm(A)
        assert ed.lam_minus <= ed.lam_plus


def test_sign_matrix_subcritical_symmetric():
    s11, s12, s21, s22 = sign_matrix(np.array([1.0]), np.array([0.0]), G,
                                     np.array([0.0]), EPS)
    m = np.array([[s11[0], s12[0]], [s21[0], s22[0]]])
    # eigenvalue signs (-1, +1): sign(A) = [[0, 1/c], [c, 0]]
    c = np.sqrt(G)
    assert np.allclose(m, [[0.0, 1.0 / c], [c, 0.0]])
    # involution: sign(A)^2 = I when no entropy fix is active
    assert np.allclose(m @ m, np.eye(2), atol=1e-13)


def test_sign_matrix_supercritical_is_identity():
    s11, s12, s21, s22 = sign_matrix(np.array([0.1]), np.array([3.0]), G,
                                     np.array([0.0]), EPS)
    m = np.array([[s11[0], s12[0]], [s21[0], s22[0]]])
    assert np.allclose(m, np.eye(2), atol=1e-13)


def test_sign_matrix_dry_identity():
    s11, s12, s21, s22 = sign_matrix(np.array([0.0]), np.array([0.0]), G,
                                     np.array([0.0]), 1e-6)
    assert s11[0] == 1.0 and s22[0] == 1.0
    assert s12[0] == 0.0 and s21[0] == 0.0


def test_harten_fix_sonic_point():
    # lam = 0 exactly with delta > 0: |lam|_fixed = delta / 2
    out = harten_fix(np.array([0.0]), np.array([0.4]))
    assert out[0] == pytest.approx(0.2)
    # far from sonic the fix is inactive
    out = harten_fix(np.array([-3.0]), np.array([0.4]))
    assert out[0] == 3.0


def test_auxiliary_projection_linear():
    x = np.linspace(0.0, 1.0, 21)
    w = auxiliary_projection(2.0 * x + 1.0, x[1] - x[0])
    assert np.allclose(w, 0.0, atol=1e-10)


def test_auxiliary_projection_quadratic_exact():
    x = np.arange(10.0)
    w = auxiliary_projection(x * x, 1.0)
    assert np.allclose(w, 2.0, atol=1e-12)


def test_auxiliary_projection_spike():
    f = np.zeros(11)
    f[5] = 1.0
    w = auxiliary_projection(f, 0.5)
    assert w[5] == pytest.approx(-2.0 / 0.25)
    assert w[4] == pytest.approx(1.0 / 0.25)
    assert w[6] == pytest.approx(1.0 / 0.25)


def test_friction_zero_cases():
    assert friction_coefficient(np.array([0.0]), np.array([1.0]), 0.01, G,
                                EPS)[0] == 0.0
    assert friction_coefficient(np.array([1.0]), np.array([1.0]), 0.0, G,
                                EPS)[0] == 0.0


def test_friction_manning_value():
    # n = 0.01, H = 1, u = 1: C_f = g n^2 |u| / H^(4/3) = 9.81e-4
    cf = friction_coefficient(np.array([1.0]), np.array([1.0]), 0.01, G, EPS)
    assert cf[0] == pytest.approx(9.81e-4)


def _flat_operator(n=41, h0=1.0, dx=0.1):
    return DispersiveOperator(np.full(n, h0), dx, G)


def test_dispersive_zero_on_constant_state():
    disp = _flat_operator()
    eta = np.full(41, 0.3)
    qdot = np.full(41, 0.7)
    gal, stab = disp.cell_integrals(auxiliary_projection(eta, 0.1), qdot)
    assert np.allclose(gal, 0.0, atol=1e-14)
    assert np.allclose(stab, 0.0, atol=1e-14)


def test_dispersive_zero_on_lake_at_rest_any_bathymetry():
    rng = np.random.default_rng(11)
    h = 1.0 + 0.5 * np.sin(np.linspace(0, 3, 41)) + 0.1 * rng.normal(size=41)
    disp = DispersiveOperator(h, 0.1, G)
    eta = np.zeros(41)
    qdot = np.zeros(41)
    gal, stab = disp.cell_integrals(auxiliary_projection(eta, 0.1), qdot)
    assert np.allclose(gal, 0.0, atol=1e-15)
    assert np.allclose(stab, 0.0, atol=1e-15)


def test_eta_band_matches_quadrature_evaluation():
    rng = np.random.default_rng(5)
    h = 1.0 + 0.3 * np.sin(np.linspace(0, 4, 60))
    disp = DispersiveOperator(h, 0.07, G)
    eta = rng.normal(size=60)
    w = auxiliary_projection(eta, 0.07)
    assert np.allclose(disp.gal_eta_matvec(eta), disp.galerkin_eta(w),
                       rtol=1e-12, atol=1e-14)
    assert np.allclose(disp.stab_eta_matvec(eta), disp.stab_eta(w),
                       rtol=1e-12, atol=1e-14)


def test_dispersive_third_derivative_convergence():
    # beta g h^3 d_x w_eta approximates beta g h^3 eta_xxx with O(dx^2) error
    h0 = 1.0
    k = 1.0
    errs = []
    for n in (80, 160, 320):
        L = 2.0 * np.pi
        dx = L / n
        x = np.arange(n + 1) * dx
        eta = np.sin(k * x)
        disp = DispersiveOperator(np.full(n + 1, h0), dx, G)
        gal = disp.gal_eta_matvec(eta)
        # Galerkin row ~ dx * beta g h^3 * eta_xxx at interior nodes
        approx = gal[3:-3] / dx
        exact = -BETA * G * h0 ** 3 * k ** 3 * np.cos(k * x[3:-3])
        errs.append(np.max(np.abs(approx - exact)))
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0
