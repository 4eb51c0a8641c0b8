import numpy as np
import pytest

from wigring import (
    DiagonalCase,
    DomainError,
    FockPair,
    InteractionSpec,
    TruncatedFlowError,
    caustic_layers,
    caustic_radii,
    chord_from_phase,
    diagonal_phase_shift,
    evolved_branch_shift,
    evolved_diagonal_shift,
    flow_tips,
    phase_branch,
    phase_shift_cubic,
    phase_shift_quartic,
    polar_to_cart,
    symplectic_area_phi,
)
from wigring.chords import branch_gradient, phase_shift_pair
from wigring.propagate import OscillatorFlow, SemiclassicalEvolution, liouville_evolve
from wigring.semiclassic import cross_term

PAIR = FockPair(14, 10, +1, 1.0)


def mid_ring_points(pair, count, seed, margin=0.25):
    rng = np.random.default_rng(seed)
    rlo, rhi = caustic_radii(pair)
    r = rng.uniform(rlo + margin * (rhi - rlo), rhi - margin * (rhi - rlo), count)
    th = rng.uniform(0.0, 2 * np.pi, count)
    return list(zip(r, th))


class TestInteractionSpec:
    def test_factorization_resolution(self):
        spec = InteractionSpec("cubic", 6e-2)
        assert spec.alpha == 6e-2 and spec.t == 1.0
        spec2 = InteractionSpec("quartic", 6e-2, t=2.0)
        assert abs(spec2.alpha - 3e-2) < 1e-15
        spec3 = InteractionSpec("cubic", 6e-2, alpha=0.12)
        assert abs(spec3.t - 0.5) < 1e-15

    def test_validation(self):
        with pytest.raises(ValueError):
            InteractionSpec("quintic", 1e-2)
        with pytest.raises(ValueError):
            InteractionSpec("cubic", -1e-2)
        with pytest.raises(ValueError):
            InteractionSpec("cubic", 1e-2, alpha=1.0, t=1.0)


class TestPhaseBranch:
    def test_branches_coincide_at_zero_angle(self):
        for r in (1.0, 2.5, 4.0):
            plus = phase_branch(PAIR, (r, 0.0), +1)
            minus = phase_branch(PAIR, (r, 0.0), -1)
            assert plus == minus == symplectic_area_phi(PAIR, r)

    def test_branch_difference_is_twice_lam_theta(self):
        for r, th in mid_ring_points(PAIR, 10, seed=1):
            diff = phase_branch(PAIR, (r, th), +1) - phase_branch(PAIR, (r, th), -1)
            assert abs(diff - 2 * PAIR.lam * th) < 1e-12

    def test_gradient_matches_finite_differences(self):
        eps = 1e-6
        for r, th in mid_ring_points(PAIR, 8, seed=2):
            for branch in (+1, -1):
                x = np.array(polar_to_cart(r, th))

                def phase_at(pt):
                    rr = np.hypot(pt[0], pt[1])
                    tt = np.arctan2(-pt[1], pt[0])
                    # keep the angle on the same reference branch as th
                    tt += 2 * np.pi * np.round((th - tt) / (2 * np.pi))
                    return phase_branch(PAIR, (rr, tt), branch)

                fd = np.array([
                    (phase_at(x + [eps, 0]) - phase_at(x - [eps, 0])) / (2 * eps),
                    (phase_at(x + [0, eps]) - phase_at(x - [0, eps])) / (2 * eps),
                ])
                an = branch_gradient(PAIR, r, th, branch)
                assert np.max(np.abs(fd - an)) < 1e-6 * max(1.0, np.max(np.abs(an)))


class TestChordExtraction:
    def test_tips_land_on_energy_circles(self):
        for r, th in mid_ring_points(PAIR, 200, seed=3):
            for branch, (r_plus_tip, r_minus_tip) in (
                (+1, (PAIR.radius_m, PAIR.radius_n)),
                (-1, (PAIR.radius_n, PAIR.radius_m)),
            ):
                ch = chord_from_phase(PAIR, (r, th), branch)
                assert abs(np.linalg.norm(ch.tip_plus) - r_plus_tip) < 1e-6
                assert abs(np.linalg.norm(ch.tip_minus) - r_minus_tip) < 1e-6
                assert np.max(np.abs(0.5 * (ch.tip_plus + ch.tip_minus) - ch.center)) < 1e-12
                assert np.max(np.abs((ch.tip_plus - ch.tip_minus) - ch.xi)) < 1e-12

    def test_degenerate_pair_single_circle(self):
        case = DiagonalCase(9, 1.0)
        radius = case.radius_n
        for r, th in mid_ring_points(case, 30, seed=4):
            ch = chord_from_phase(case, (r, th), +1)
            assert abs(np.linalg.norm(ch.tip_plus) - radius) < 1e-6
            assert abs(np.linalg.norm(ch.tip_minus) - radius) < 1e-6

    def test_branch_flip_flips_the_lam_component(self):
        # the chord splits into (branch lam / r) r_hat + 2 h e_theta; flipping
        # the branch is the lam -> -lam reflection of the radial part
        for r, th in mid_ring_points(PAIR, 10, seed=5):
            plus = chord_from_phase(PAIR, (r, th), +1)
            minus = chord_from_phase(PAIR, (r, th), -1)
            r_hat = np.array([np.cos(th), -np.sin(th)])
            radial_p = np.dot(plus.xi, r_hat)
            radial_m = np.dot(minus.xi, r_hat)
            tangential_p = plus.xi - radial_p * r_hat
            tangential_m = minus.xi - radial_m * r_hat
            assert abs(radial_p + radial_m) < 1e-10
            assert np.max(np.abs(tangential_p - tangential_m)) < 1e-10

    def test_near_caustic_tagged_degenerate(self):
        rlo, rhi = caustic_radii(PAIR)
        w_minus, w_plus = caustic_layers(PAIR)
        assert chord_from_phase(PAIR, (rhi - 0.3 * w_plus, 0.1), +1).degenerate
        assert not chord_from_phase(PAIR, (0.5 * (rlo + rhi), 0.1), +1).degenerate
        with pytest.raises(DomainError):
            chord_from_phase(PAIR, (rhi + 0.1, 0.0), +1)


class TestFlowTips:
    def test_pure_oscillator_rotates_chord_rigidly(self):
        t = np.pi / 3
        inter = InteractionSpec("cubic", 0.0, t=t)
        for r, th in mid_ring_points(PAIR, 6, seed=6):
            ch = chord_from_phase(PAIR, (r, th), +1)
            res = flow_tips(ch, inter, PAIR, mode="full", t=t)
            c, s = np.cos(t), np.sin(t)
            rot = np.array([[c, s], [-s, c]])  # z -> e^{-it} z
            assert np.max(np.abs(res.tip_plus_t - rot @ ch.tip_plus)) < 1e-8
            assert np.max(np.abs(res.tip_minus_t - rot @ ch.tip_minus)) < 1e-8
            assert np.max(np.abs(res.midpoint_t - rot @ ch.center)) < 1e-8
            assert abs(res.phase_difference) < 1e-8

    def test_time_reversal_returns_tips(self):
        inter = InteractionSpec("quartic", 2e-2, t=1.0)
        ch = chord_from_phase(PAIR, (2.4, 1.1), -1)
        fwd = flow_tips(ch, inter, PAIR, mode="full", t=1.0)
        from wigring.chords import Chord

        back_start = Chord(center=fwd.midpoint_t, branch=-1,
                           tip_plus=fwd.tip_plus_t, tip_minus=fwd.tip_minus_t,
                           xi=fwd.tip_plus_t - fwd.tip_minus_t)
        back = flow_tips(back_start, inter, PAIR, mode="full", t=-1.0)
        assert np.max(np.abs(back.tip_plus_t - ch.tip_plus)) < 1e-8
        assert np.max(np.abs(back.tip_minus_t - ch.tip_minus)) < 1e-8

    @pytest.mark.parametrize("kind", ["cubic", "quartic"])
    def test_halved_midpoint_difference_matches_closed_form(self, kind):
        eps = 1e-3
        inter = InteractionSpec(kind, eps)
        for r, th in mid_ring_points(PAIR, 8, seed=7):
            for branch in (+1, -1):
                ch = chord_from_phase(PAIR, (r, th), branch)
                res = flow_tips(ch, inter, PAIR, mode="perturbation")
                closed = evolved_branch_shift(PAIR, kind, eps, r, th, branch)
                assert abs(0.5 * res.phase_difference - closed) <= 0.05 * abs(closed) + 1e-14

    def test_full_mode_with_short_time_matches_closed_form(self):
        # quartic example: with t = eps the oscillator barely rotates and the
        # full generator reproduces the closed form within 5%
        eps = 1e-3
        inter = InteractionSpec("quartic", eps, t=eps)
        r, th = 2.6, 0.8
        ch = chord_from_phase(PAIR, (r, th), +1)
        res = flow_tips(ch, inter, PAIR, mode="full", t=eps)
        closed = evolved_branch_shift(PAIR, "quartic", eps, r, th, +1)
        assert abs(0.5 * res.phase_difference - closed) <= 0.05 * abs(closed)

    def test_escape_detected_under_strong_cubic(self):
        inter = InteractionSpec("cubic", 30.0, t=1.0)
        ch = chord_from_phase(PAIR, (3.0, np.pi), +1)
        with pytest.raises(TruncatedFlowError):
            flow_tips(ch, inter, PAIR, mode="full", escape_radius=20.0)


class TestClosedFormShifts:
    def test_cubic_at_zero_angle_antisymmetric(self):
        lam, eps, etot = PAIR.lam, 1e-2, PAIR.e_total
        for r in (1.5, 2.5, 3.5):
            plus, minus = phase_shift_cubic(r, 0.0, lam, eps, etot)
            expected = (2 * eps / 3) * (lam / (2 * r)) ** 3
            assert abs(plus - expected) < 1e-15
            assert abs(minus + expected) < 1e-15

    def test_quartic_vanishes_at_right_angle(self):
        plus, minus = phase_shift_quartic(2.0, np.pi / 2, PAIR.lam, 1e-2, PAIR.e_total)
        assert abs(plus) < 1e-15 and abs(minus) < 1e-15

    def test_zero_interaction_gives_zero(self):
        for fn in (phase_shift_cubic, phase_shift_quartic):
            plus, minus = fn(2.0, 0.7, PAIR.lam, 0.0, PAIR.e_total)
            assert plus == 0.0 and minus == 0.0

    def test_outside_allowed_region_flagged(self):
        res = phase_shift_cubic(0.05, 0.3, PAIR.lam, 1e-2, PAIR.e_total)
        assert not res.allowed
        assert res.plus == 0.0 and res.minus == 0.0

    def test_branch_exchange_identity(self):
        # under theta -> -theta the brace flips sign as a whole, so the
        # branch exchange comes with a minus: dphi+(theta) = -dphi-(-theta)
        rlo, rhi = caustic_radii(PAIR)
        r = np.linspace(rlo * 1.05, rhi * 0.95, 20)[:, None]
        th = np.linspace(0, 2 * np.pi, 20, endpoint=False)[None, :]
        for kind in ("cubic", "quartic"):
            at_th = phase_shift_pair(kind, r, th, PAIR.lam, 1e-2, PAIR.e_total)
            at_neg = phase_shift_pair(kind, r, -th, PAIR.lam, 1e-2, PAIR.e_total)
            assert np.max(np.abs(np.asarray(at_th.plus) + np.asarray(at_neg.minus))) < 1e-12
            assert np.max(np.abs(np.asarray(at_th.minus) + np.asarray(at_neg.plus))) < 1e-12

    def test_exact_linearity_in_eps(self):
        for kind in ("cubic", "quartic"):
            one = phase_shift_pair(kind, 2.2, 0.9, PAIR.lam, 1e-3, PAIR.e_total)
            two = phase_shift_pair(kind, 2.2, 0.9, PAIR.lam, 2e-3, PAIR.e_total)
            assert abs(two.plus - 2 * one.plus) < 1e-18
            assert abs(two.minus - 2 * one.minus) < 1e-18

    def test_flow_shift_linear_in_eps_to_one_percent(self):
        r, th = 2.4, 1.3
        ch = chord_from_phase(PAIR, (r, th), +1)
        shifts = []
        eps_values = (1e-4, 2e-4, 4e-4)
        for eps in eps_values:
            res = flow_tips(ch, InteractionSpec("cubic", eps), PAIR, mode="full", t=0.05)
            shifts.append(0.5 * res.phase_difference)
        slope = np.polyfit(eps_values, shifts, 1)
        fitted = np.polyval(slope, eps_values)
        residual = np.max(np.abs(np.array(shifts) - fitted)) / np.max(np.abs(shifts))
        assert residual < 0.01


class TestDiagonalShift:
    def test_cubic_zero_angle_vanishes(self):
        assert diagonal_phase_shift("cubic", 2.0, 0.0, 1e-2, 10.5) == 0.0

    def test_zero_interaction(self):
        assert diagonal_phase_shift("quartic", 2.0, 0.8, 0.0, 10.5) == 0.0

    def test_pair_formula_collapses_at_lam_zero(self):
        for kind in ("cubic", "quartic"):
            pairvals = phase_shift_pair(kind, 2.0, 0.8, 0.0, 1e-2, 21.0)
            single = diagonal_phase_shift(kind, 2.0, 0.8, 1e-2, 10.5)
            assert abs(pairvals.plus - single) < 1e-18
            assert abs(pairvals.minus - single) < 1e-18

    def test_matches_tip_flow_at_lam_zero(self):
        case = DiagonalCase(10, 1.0)
        eps = 1e-3
        for kind in ("cubic", "quartic"):
            for r, th in mid_ring_points(case, 5, seed=8, margin=0.3):
                ch = chord_from_phase(case, (r, th), +1)
                res = flow_tips(ch, InteractionSpec(kind, eps), case, mode="perturbation")
                closed = evolved_diagonal_shift(kind, eps, case.e_n, r, th)
                assert abs(0.5 * res.phase_difference - closed) <= 0.05 * abs(closed) + 1e-14


def test_quadratic_flow_phase_shift_equals_liouville_transport():
    # oscillator-only propagation: zero shifts plus exact rotation must agree
    # with Liouville transport of the assembled cross term
    t = 0.9
    evo = SemiclassicalEvolution(PAIR, None, oscillator_time=t)
    x1 = polar_to_cart(2.8, 0.4)

    def initial(q, p):
        return cross_term(PAIR, (np.full_like(q, x1[0]), np.full_like(q, x1[1])), (q, p))

    transported = liouville_evolve(initial, OscillatorFlow(), t)
    rng = np.random.default_rng(9)
    rlo, rhi = caustic_radii(PAIR)
    r = rng.uniform(rlo * 1.1, rhi * 0.95, 200)
    th = rng.uniform(0, 2 * np.pi, 200)
    q, p = polar_to_cart(r, th)
    a = evo.cross_term((np.full_like(q, x1[0]), np.full_like(q, x1[1])), (q, p))
    b = transported(q, p)
    assert np.max(np.abs(a - b)) < 1e-8
