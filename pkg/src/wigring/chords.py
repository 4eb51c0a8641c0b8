"""Chord extraction and tip-flow propagation of the ring phases.

The oscillatory content of the semiclassical fields lives in the two branch
phases

    phi_branch(r, theta; +/-) = phi(r) +/- lam * theta,

whose gradients encode chords: xi = -J grad(phi_branch) with the symplectic
rotation J(q, p) = (p, -q).  The chord tips x +/- xi/2 land on the two
energy circles (branch +1 puts tip_plus on the m-circle, branch -1 on the
n-circle); this is asserted by tests, not assumed.

Propagation rule: flow both tips for time t under the interaction
Hamiltonian, accumulate the midpoint phase difference

    Delta(t) = int_0^t [ -(K(y+) - K(y-)) - xi(s) ^ u(s) ] ds,

where u is the mean tip velocity and a ^ b = a_q b_p - a_p b_q.  For the
pure oscillator the integrand vanishes identically (rigid chord transport);
for cubic/quartic interactions half of Delta reproduces the closed-form
phase shifts below.

Closed forms (B = [e_total - (lam/2r)^2 - r^2]^{1/2}):

    cubic:   dphi+- = (2 eps / 3) { sin(th) B +- cos(th) lam/(2r) }^3
    quartic: dphi+- = 2 eps r cos(th) { sin(th) B +- cos(th) lam/(2r) }^3

Angle-orientation note (frozen by the flow regression): this package
measures theta along the flow direction, which mirrors the orientation the
closed forms are written in.  The halved midpoint difference of the
branch-b chord therefore equals the closed-form pair evaluated at the
reflected angle:

    0.5 * Delta_b(r, theta) = closed_form_pair(r, -theta)[b].

:func:`evolved_branch_shift` applies exactly this mapping; the two
conventions differ by a global phase-space mirror and give identical
reduced-marginal norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, TruncatedFlowError
from .grids import polar_to_cart
from .semiclassic import caustic_layers, caustic_radii, phi_radial_derivative


def symplectic_rotation(v):
    """J(q, p) = (p, -q); the sign is frozen by the rigid-rotation test."""
    v = np.asarray(v, dtype=float)
    return np.array([v[1], -v[0]])


@dataclass(frozen=True)
class Chord:
    """A phase-space chord: center, branch label, tips and chord vector.

    tip_plus - tip_minus = xi and (tip_plus + tip_minus)/2 = center hold by
    construction; degenerate marks near-caustic chords (inside the Airy
    layer) whose direction is poorly conditioned.
    """

    center: np.ndarray
    branch: int
    tip_plus: np.ndarray
    tip_minus: np.ndarray
    xi: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class InteractionSpec:
    """Cubic or quartic interaction of strength eps = alpha * t.

    Only eps enters the closed forms; the (alpha, t) factorization matters
    only to numeric flows.  When neither alpha nor t is given, t = 1 and
    alpha = eps.
    """

    kind: str
    epsilon: float
    alpha: float | None = None
    t: float | None = None

    def __post_init__(self):
        if self.kind not in ("cubic", "quartic"):
            raise ValueError("kind must be 'cubic' or 'quartic'")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        alpha, t = self.alpha, self.t
        if alpha is None and t is None:
            t = 1.0
            alpha = self.epsilon / t
        elif alpha is None:
            alpha = self.epsilon / t if t != 0 else 0.0
        elif t is None:
            t = self.epsilon / alpha if alpha != 0 else 1.0
        if abs(alpha * t - self.epsilon) > 1e-12 * max(1.0, self.epsilon):
            raise ValueError("alpha * t must equal epsilon")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "t", t)

    @property
    def power(self):
        return 3 if self.kind == "cubic" else 4


@dataclass(frozen=True)
class FlowResult:
    """Evolved chord tips, their midpoint, and the accumulated midpoint
    phase difference."""

    tip_plus_t: np.ndarray
    tip_minus_t: np.ndarray
    midpoint_t: np.ndarray
    phase_difference: float
    chord: Chord = field(repr=False, default=None)


def phase_branch(pair, x2, branch):
    """phi(r2) + branch * lam * theta2 at polar x2 = (r2, theta2).

    theta2 is used as given (no 2pi reduction): callers supply the angle on
    their own continuous reference branch.
    """
    from .semiclassic import symplectic_area_phi

    r2, theta2 = x2
    return symplectic_area_phi(pair, r2) + branch * pair.lam * theta2


def branch_gradient(pair, r, theta, branch):
    """Cartesian gradient of the branch phase at (r, theta)."""
    r_hat = np.array([np.cos(theta), -np.sin(theta)])
    t_hat = np.array([-np.sin(theta), -np.cos(theta)])
    return phi_radial_derivative(pair, r) * r_hat + (branch * pair.lam / r) * t_hat


def chord_from_phase(pair, x2, branch):
    """Extract the chord xi = -J grad(phi_branch) centered at polar x2.

    Requires x2 strictly inside the ring; chords inside the caustic layers
    are returned tagged degenerate.  Branch +1 places tip_plus on the
    m-circle, branch -1 on the n-circle.
    """
    r2, theta2 = x2
    rlo, rhi = caustic_radii(pair)
    if not (rlo < r2 < rhi):
        raise DomainError(f"chord center radius {r2} outside the open ring ({rlo}, {rhi})")
    w_minus, w_plus = caustic_layers(pair)
    degenerate = (r2 < rlo + w_minus) or (r2 > rhi - w_plus)
    center = np.array(polar_to_cart(r2, theta2))
    xi = -symplectic_rotation(branch_gradient(pair, r2, theta2, branch))
    return Chord(
        center=center,
        branch=int(branch),
        tip_plus=center + 0.5 * xi,
        tip_minus=center - 0.5 * xi,
        xi=xi,
        degenerate=degenerate,
    )


def _flow_fields(interaction, alpha, mode):
    k = interaction.power

    def velocity(y):
        q, p = y
        dv = alpha * q ** (k - 1)
        if mode == "full":
            return np.array([p, -q - dv])
        return np.array([0.0, -dv])

    def energy(y):
        q, p = y
        pot = alpha * q ** k / k
        if mode == "full":
            return 0.5 * (q * q + p * p) + pot
        return pot

    return velocity, energy


def flow_tips(chord, interaction, pair, mode="perturbation", t=None,
              rtol=1e-10, atol=1e-12, escape_radius=None):
    """Advance both chord tips for time t and accumulate the midpoint phase.

    mode 'perturbation' flows under the interaction Hamiltonian alone (the
    mode that reproduces the closed-form shifts exactly: the position is
    frozen, so the kick is exactly linear in t); mode 'full' adds the
    oscillator part.  The Hamiltonian strength is interaction.alpha; the t
    argument only sets the integration horizon (negative t integrates the
    same flow backward, so +t then -t is the identity).  Raises
    :class:`TruncatedFlowError` when a tip escapes (possible under the
    cubic potential in full mode).
    """
    t_final = interaction.t if t is None else t
    alpha = interaction.alpha
    velocity, energy = _flow_fields(interaction, alpha, mode)
    if escape_radius is None:
        escape_radius = 50.0 * max(pair.radius_m, 1.0)

    def rhs(_s, y):
        yp, ym = y[0:2], y[2:4]
        vp, vm = velocity(yp), velocity(ym)
        xi = yp - ym
        u = 0.5 * (vp + vm)
        rate = -(energy(yp) - energy(ym)) - (xi[0] * u[1] - xi[1] * u[0])
        return [*vp, *vm, rate]

    def escaped(_s, y):
        return escape_radius - max(np.hypot(*y[0:2]), np.hypot(*y[2:4]))

    escaped.terminal = True
    escaped.direction = -1

    y0 = [*chord.tip_plus, *chord.tip_minus, 0.0]
    if t_final == 0.0:
        return FlowResult(chord.tip_plus.copy(), chord.tip_minus.copy(),
                          chord.center.copy(), 0.0, chord)
    sol = solve_ivp(rhs, (0.0, t_final), y0, method="RK45",
                    rtol=rtol, atol=atol, events=escaped)
    if sol.status == 1:
        raise TruncatedFlowError(float(sol.t_events[0][0]), t_final)
    yf = sol.y[:, -1]
    tip_p, tip_m = yf[0:2], yf[2:4]
    return FlowResult(
        tip_plus_t=tip_p,
        tip_minus_t=tip_m,
        midpoint_t=0.5 * (tip_p + tip_m),
        phase_difference=float(yf[4]),
        chord=chord,
    )


@dataclass(frozen=True)
class ShiftPair:
    """Closed-form phase shifts (plus, minus) with the allowed-region flag.

    Outside the classically allowed chord region (negative bracket) both
    values are zero and allowed is False; no analytic continuation is
    attempted.
    """

    plus: np.ndarray | float
    minus: np.ndarray | float
    allowed: np.ndarray | bool

    def __iter__(self):
        return iter((self.plus, self.minus))

    def select(self, branch):
        return self.plus if branch > 0 else self.minus


def _braces(r2, theta2, lam, e_total):
    r2 = np.asarray(r2, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    bracket = e_total - (lam / (2.0 * r2)) ** 2 - r2 * r2
    allowed = bracket >= 0.0
    root = np.sqrt(np.clip(bracket, 0.0, None))
    bp = np.sin(theta2) * root + np.cos(theta2) * (lam / (2.0 * r2))
    bm = np.sin(theta2) * root - np.cos(theta2) * (lam / (2.0 * r2))
    return bp, bm, allowed


def phase_shift_cubic(r2, theta2, lam, epsilon, e_total):
    """Closed-form cubic shifts (2 eps/3) {sin th B +- cos th lam/2r}^3."""
    bp, bm, allowed = _braces(r2, theta2, lam, e_total)
    scale = 2.0 * epsilon / 3.0
    plus = np.where(allowed, scale * bp ** 3, 0.0)
    minus = np.where(allowed, scale * bm ** 3, 0.0)
    if np.ndim(plus) == 0:
        return ShiftPair(float(plus), float(minus), bool(allowed))
    return ShiftPair(plus, minus, allowed)


def phase_shift_quartic(r2, theta2, lam, epsilon, e_total):
    """Closed-form quartic shifts 2 eps r cos(th) {sin th B +- cos th lam/2r}^3."""
    bp, bm, allowed = _braces(r2, theta2, lam, e_total)
    pref = 2.0 * epsilon * np.asarray(r2, dtype=float) * np.cos(np.asarray(theta2, dtype=float))
    plus = np.where(allowed, pref * bp ** 3, 0.0)
    minus = np.where(allowed, pref * bm ** 3, 0.0)
    if np.ndim(plus) == 0:
        return ShiftPair(float(plus), float(minus), bool(allowed))
    return ShiftPair(plus, minus, allowed)


def phase_shift_pair(kind, r2, theta2, lam, epsilon, e_total):
    fn = phase_shift_cubic if kind == "cubic" else phase_shift_quartic
    return fn(r2, theta2, lam, epsilon, e_total)


def diagonal_phase_shift(kind, r2, theta2, epsilon, e_n):
    """lam = 0 specialization with e_total = 2 e_n (the +/- pair collapses).

    This propagates the diagonal Wigner factors so the full four-term field
    evolves consistently and the marginal-unitarity integrals can be formed.
    """
    pair_vals = phase_shift_pair(kind, r2, theta2, 0.0, epsilon, 2.0 * e_n)
    return pair_vals.plus


def evolved_branch_shift(pair, kind, epsilon, r2, theta2, branch):
    """Shift applied to phi_branch in the evolved evaluator.

    Equal to half the midpoint phase difference of the branch chord under
    the perturbation flow; in this package's flow-direction angle that is
    the closed-form pair evaluated at the reflected angle (see the module
    docstring).  Frozen by the flow regression test.
    """
    shifts = phase_shift_pair(kind, r2, -np.asarray(theta2, dtype=float),
                              pair.lam, epsilon, pair.e_total)
    return shifts.select(branch)


def evolved_diagonal_shift(kind, epsilon, e_n, r2, theta2):
    """Diagonal (lam = 0) shift in the evaluator's angle orientation."""
    return diagonal_phase_shift(kind, r2, -np.asarray(theta2, dtype=float), epsilon, e_n)
