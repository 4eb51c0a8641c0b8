import numpy as np
import pytest

from wigring import (
    ConvergenceError,
    DiagonalCase,
    FockPair,
    PolarGrid,
    RangeError,
    TruncatedState,
    entangled_wigner_exact,
    exact_moyal,
    exact_wigner,
    hermite_psi,
    moyal_closed,
    polar_to_cart,
    position_power_matrix,
    wigner_closed,
    wigner_of_density,
)


def quad_grid(lim=9.0, n=4001):
    q = np.linspace(-lim, lim, n)
    return q, q[1] - q[0]


class TestHermite:
    def test_ground_state_value_matches_quadrature_normalization(self):
        # oracle: normalize exp(-q^2/2) numerically
        q, dq = quad_grid()
        gauss = np.exp(-q * q / 2.0)
        norm = 1.0 / np.sqrt(np.sum(gauss * gauss) * dq)
        assert abs(hermite_psi(0, 0.0, 1.0) - norm) < 1e-10
        assert abs(hermite_psi(0, 0.0, 1.0) - 0.7511) < 1e-4

    def test_first_excited_vanishes_at_origin(self):
        for hbar in (0.3, 1.0, 2.5):
            assert hermite_psi(1, 0.0, hbar) == 0.0

    def test_orthogonality_3_5(self):
        q, dq = quad_grid()
        overlap = np.sum(hermite_psi(3, q) * hermite_psi(5, q)) * dq
        assert abs(overlap) < 1e-10

    @pytest.mark.parametrize("n", [0, 5, 40, 80])
    def test_unit_norm(self, n):
        q, dq = quad_grid(lim=16.0, n=8001)
        psi = hermite_psi(n, q)
        assert abs(np.sum(psi * psi) * dq - 1.0) < 1e-8

    def test_range_guard(self):
        with pytest.raises(RangeError):
            hermite_psi(7000, 0.0)
        with pytest.raises(RangeError):
            hermite_psi(2, 60.0, hbar=1.0)
        with pytest.raises(ValueError):
            hermite_psi(-1, 0.0)


class TestExactMoyal:
    def test_ground_diagonal_origin_is_one_over_pi(self):
        # oracle: brute-force trapezoid of the Weyl integrand at the origin
        y, dy = quad_grid(lim=7.0, n=2001)
        brute = np.sum(hermite_psi(0, y) * hermite_psi(0, -y)) * dy / np.pi
        val = exact_moyal(0, 0, (0.0, 0.0), 1.0)
        assert abs(val - brute) < 1e-10
        assert abs(val - 1.0 / np.pi) < 1e-10

    def test_off_diagonal_integrates_to_zero(self):
        grid = PolarGrid.build_gauss(0.0, 7.5, 16, 10, 64)
        qq, pp = grid.cart_mesh
        total = np.sum(grid.weights * moyal_closed(3, 1, qq, pp))
        assert abs(total) < 1e-8

    def test_angular_symmetry_l2(self):
        base = exact_moyal(3, 1, polar_to_cart(1.3, 0.0))
        for theta in (0.4, 1.9, 4.4):
            val = exact_moyal(3, 1, polar_to_cart(1.3, theta))
            assert abs(val - np.exp(2j * theta) * base) < 1e-10

    def test_hermiticity_on_random_sample(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            m, n = sorted(rng.integers(0, 13, size=2))
            q, p = rng.uniform(-3, 3, size=2)
            a = moyal_closed(int(n + 1), int(m), q, p)
            b = moyal_closed(int(m), int(n + 1), q, p)
            assert abs(a - np.conj(b)) < 1e-10

    def test_two_routes_agree(self):
        # Weyl quadrature against the Laguerre closed form, 50 points
        rng = np.random.default_rng(5)
        pairs = [(0, 0), (1, 0), (5, 2), (9, 9), (12, 10)]
        for m, n in pairs:
            pts = rng.uniform(-3.5, 3.5, size=(10, 2))
            for q, p in pts:
                a = exact_moyal(m, n, (q, p))
                b = moyal_closed(m, n, q, p)
                assert abs(a - b) < 1e-8

    def test_non_converged_quadrature_raises(self):
        with pytest.raises(ConvergenceError):
            exact_moyal(12, 10, (1.0, 0.5), tol=1e-30, max_order=128)


class TestExactWigner:
    def test_origin_values_alternate_sign(self):
        assert abs(exact_wigner(0, (0.0, 0.0)) - 1.0 / np.pi) < 1e-10
        assert abs(exact_wigner(1, (0.0, 0.0)) + 1.0 / np.pi) < 1e-10

    @pytest.mark.parametrize("n", [0, 3, 7])
    def test_normalization(self, n):
        grid = PolarGrid.build_gauss(0.0, 8.0, 16, 10, 32)
        qq, pp = grid.cart_mesh
        total = np.sum(grid.weights * wigner_closed(n, qq, pp))
        assert abs(total - 1.0) < 1e-8


class TestEntangledState:
    def test_swap_symmetry(self):
        rng = np.random.default_rng(2)
        for sign in (+1, -1):
            pair = FockPair(4, 1, sign, 1.0)
            for _ in range(10):
                x1 = tuple(rng.uniform(-2, 2, 2))
                x2 = tuple(rng.uniform(-2, 2, 2))
                a = entangled_wigner_exact(pair, x1, x2)
                b = entangled_wigner_exact(pair, x2, x1)
                assert abs(a - b) < 1e-14

    def test_marginal_is_mean_of_wigners(self):
        from wigring.quadrature import QuadSpec, polar_integral

        pair = FockPair(3, 1, +1, 1.0)
        for x1 in [(0.5, 0.2), (1.4, -0.8), (0.0, 0.0)]:
            expected = 0.5 * (wigner_closed(pair.m, *x1) + wigner_closed(pair.n, *x1))

            def integrand(r, th):
                q, p = polar_to_cart(r, th)
                return entangled_wigner_exact(
                    pair, (np.full_like(q, x1[0]), np.full_like(q, x1[1])), (q, p))

            res = polar_integral(integrand, 1e-9, 8.0,
                                 QuadSpec(radial_panels=24, tolerance=1e-8), 64)
            assert abs(res.value - expected) < 1e-6

    def test_total_normalization(self):
        # integrate the x1 marginal; the cross terms integrate to zero, so
        # the double integral reduces to the mean of two unit norms
        from wigring.quadrature import QuadSpec, polar_integral

        pair = FockPair(3, 1, -1, 1.0)

        def marginal(r, th):
            q, p = polar_to_cart(r, th)
            return 0.5 * (wigner_closed(pair.m, q, p) + wigner_closed(pair.n, q, p))

        res = polar_integral(marginal, 1e-9, 8.0, QuadSpec(radial_panels=20), 32)
        assert abs(res.value - 1.0) < 1e-6

    def test_against_two_oscillator_weyl_transform(self):
        # independent oracle: tensor Gauss-Hermite quadrature of the 2-D
        # Weyl transform of the entangled wavefunction
        pair = FockPair(1, 0, +1, 1.0)
        y, wts = np.polynomial.hermite.hermgauss(80)

        def psi2(a, b):
            return (hermite_psi(1, a) * hermite_psi(0, b)
                    + hermite_psi(0, a) * hermite_psi(1, b)) / np.sqrt(2.0)

        def oracle(x1, x2):
            q1, p1 = x1
            q2, p2 = x2
            y1 = y[:, None]
            y2 = y[None, :]
            with np.errstate(under="ignore"):
                f = (psi2(q1 + y1, q2 + y2) * psi2(q1 - y1, q2 - y2)
                     * np.exp(-2j * (p1 * y1 + p2 * y2))
                     * np.exp(y1 * y1 + y2 * y2))
            val = np.sum(f * np.outer(wts, wts)) / np.pi**2
            return np.real(val)

        for x1, x2 in [((0.0, 0.0), (0.0, 0.0)), ((0.7, -0.3), (0.2, 1.1))]:
            a = entangled_wigner_exact(pair, x1, x2)
            assert abs(a - oracle(x1, x2)) < 1e-9


class TestPositionPowers:
    def test_cubic_origin_element_vanishes_by_parity(self):
        mat = position_power_matrix(3, 12)
        assert mat[0, 0] == 0.0

    def test_quartic_origin_element_matches_brute_force(self):
        # oracle: quadrature of q^4 |psi_0|^2
        q, dq = quad_grid()
        for hbar in (0.5, 1.0):
            psi0 = hermite_psi(0, q, hbar)
            brute = np.sum(q**4 * psi0 * psi0) * dq
            mat = position_power_matrix(4, 10, hbar)
            assert abs(mat[0, 0] - brute) < 1e-10
            assert abs(mat[0, 0] - 0.75 * hbar * hbar) < 1e-10

    @pytest.mark.parametrize("k", [3, 4])
    def test_hermitian_and_parity_selection(self, k):
        mat = position_power_matrix(k, 20)
        assert np.max(np.abs(mat - mat.conj().T)) < 1e-12
        idx = np.arange(20)
        parity_even = (idx[:, None] - idx[None, :]) % 2 == 0
        if k == 3:
            assert np.max(np.abs(mat[parity_even])) == 0.0
        else:
            assert np.max(np.abs(mat[~parity_even])) == 0.0

    def test_only_cubic_quartic_supported(self):
        with pytest.raises(ValueError):
            position_power_matrix(2, 8)


class TestTruncatedState:
    def test_norm_and_exchange(self):
        for sign in (+1, -1):
            pair = FockPair(6, 2, sign, 1.0)
            st = TruncatedState.from_pair(pair)
            assert abs(np.sum(np.abs(st.coeffs) ** 2) - 1.0) < 1e-12
            assert st.exchange_defect(sign) < 1e-12
            assert st.dimension == pair.m + pair.n + 32

    def test_bad_norm_rejected(self):
        c = np.zeros((8, 8), complex)
        c[1, 0] = 1.2
        with pytest.raises(ValueError):
            TruncatedState(dimension=8, coeffs=c, hbar=1.0)

    def test_pair_validation(self):
        with pytest.raises(ValueError):
            FockPair(3, 3, +1, 1.0)
        with pytest.raises(ValueError):
            FockPair(3, 1, 2, 1.0)
        with pytest.raises(ValueError):
            FockPair(3, 1, +1, -1.0)


class TestWignerOfDensity:
    def test_pure_and_mixed_against_closed_forms(self):
        grid = PolarGrid.build_gauss(0.0, 7.0, 12, 8, 64)
        qq, pp = grid.cart_mesh
        rho = np.zeros((12, 12), complex)
        rho[3, 3] = 0.5
        rho[5, 5] = 0.5
        vals = wigner_of_density(rho, grid, 1.0)
        direct = 0.5 * wigner_closed(3, qq, pp) + 0.5 * wigner_closed(5, qq, pp)
        assert np.max(np.abs(vals - direct)) < 1e-12

        psi = np.zeros(12)
        psi[2] = np.sqrt(0.3)
        psi[7] = np.sqrt(0.7)
        rho2 = np.outer(psi, psi).astype(complex)
        vals2 = wigner_of_density(rho2, grid, 1.0)
        direct2 = (0.3 * wigner_closed(2, qq, pp) + 0.7 * wigner_closed(7, qq, pp)
                   + 2.0 * np.sqrt(0.21) * np.real(moyal_closed(2, 7, qq, pp)))
        assert np.max(np.abs(vals2 - direct2)) < 1e-12


def test_diagonal_case_properties():
    case = DiagonalCase(5, 0.5)
    assert case.m == case.n == 5
    assert case.lam == 0.0
    assert abs(case.e_total - 2 * 5.5 * 0.5) < 1e-15
