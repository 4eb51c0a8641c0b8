"""Crude semiclassical phase-space expressions for the oscillator pair.

The transition function of |m><n| concentrates on the ring r_- < r < r_+
where the energy circle of radius R_m = sqrt((2m+1) hbar) centered at the
origin intersects the circle of radius R_n centered at 2x (the reflection
construction: a chord with one tip on each circle has midpoint x exactly
when its R_m tip lies on both the m-circle and the reflected n-circle).

On that ring the semiclassical transition function is

    M~_m^n(x) = exp(i l theta) cos(phi(r)/hbar - pi/4)
                / (sqrt(pi^3 hbar / 2) D(r)),

with phi(r) half the overlap (lens) area of the two circles and
D(r) = |v_m ^ v_n|^{1/2} the root of the wedge of the two circle velocity
vectors at an intersection point.  Both have closed forms:

    phi'(r)  = -2 h(r),      h(r)^2 = e_total - r^2 - (lam / 2r)^2,
    D(r)     = sqrt(2 r h(r)),

where e_total = e_m + e_n and lam = (m - n) hbar.  The lens choice of
"area between the circles" is frozen by the fringe test against the exact
transition function (its gradient also reproduces the geometric chord).

The amplitude diverges on the caustic circles r = r_+- where the circles
become tangent; inside a boundary layer of local Airy width the amplitude
is clamped at its layer-edge value (switchable off for studies of the raw
expression).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grids import cart_to_polar, polar_to_cart

_AMPLITUDE_NORM = lambda hbar: 1.0 / math.sqrt(np.pi ** 3 * hbar / 2.0)  # noqa: E731


@dataclass(frozen=True)
class RingGeometry:
    """Radii and caustic data for one (m, n, hbar) pair, optionally anchored
    at an evaluation radius r (center_offset = 2r)."""

    radius_m: float
    radius_n: float
    r_minus: float
    r_plus: float
    center_offset: float | None = None

    @classmethod
    def from_pair(cls, pair, r=None):
        rm = math.sqrt((2 * pair.m + 1) * pair.hbar)
        rn = math.sqrt((2 * pair.n + 1) * pair.hbar)
        return cls(
            radius_m=rm,
            radius_n=rn,
            r_minus=0.5 * (rm - rn),
            r_plus=0.5 * (rm + rn),
            center_offset=None if r is None else 2.0 * r,
        )


@dataclass(frozen=True)
class PhaseAmplitude:
    """Symplectic-area phase, amplitude denominator, and the two
    circle-intersection points at one evaluation point."""

    phi: float
    amplitude_denominator: float
    intersection_points: np.ndarray


@dataclass(frozen=True)
class IntersectionResult:
    """Outcome of intersecting the m-circle with the reflected n-circle.

    kind is 'two', 'tangent' or 'disjoint'; points holds the intersection
    coordinates (2x2, 1x2 or empty).
    """

    kind: str
    points: np.ndarray


def caustic_radii(pair):
    """Caustic radii (r_-, r_+) = ((R_m -+ R_n)/2)."""
    g = RingGeometry.from_pair(pair)
    return g.r_minus, g.r_plus


def chord_bracket(pair, r):
    """e_total - r^2 - (lam/2r)^2; non-negative exactly on the closed ring."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        lam_term = np.where(r > 0, (pair.lam / (2.0 * np.maximum(r, 1e-300))) ** 2, np.inf if pair.lam else 0.0)
    return pair.e_total - r * r - lam_term


def half_chord(pair, r):
    """h(r) = sqrt(max(bracket, 0)); the half-height of the chord."""
    return np.sqrt(np.clip(chord_bracket(pair, r), 0.0, None))


def circle_intersections(r, theta, geom: RingGeometry):
    """Intersect the m-circle (origin) with the n-circle centered at 2x.

    Returns the two intersection points, the single tangency point at
    r = r_+-, or a tagged 'disjoint' outcome outside the closed ring.
    """
    d = 2.0 * r
    a, b = geom.radius_m, geom.radius_n
    scale = max(a, 1.0)
    qc, pc = polar_to_cart(1.0, theta)
    u_hat = np.array([qc, pc])
    v_hat = np.array([u_hat[1], -u_hat[0]])
    if abs(d - (a + b)) <= 1e-12 * scale or abs(d - (a - b)) <= 1e-12 * scale:
        a1 = 0.5 * (d + (a * a - b * b) / d) if d > 0 else a
        return IntersectionResult(kind="tangent", points=(a1 * u_hat)[None, :])
    if d > a + b or d < a - b:
        return IntersectionResult(kind="disjoint", points=np.empty((0, 2)))
    a1 = (d * d + a * a - b * b) / (2.0 * d)
    h = math.sqrt(max(a * a - a1 * a1, 0.0))
    pts = np.array([a1 * u_hat + h * v_hat, a1 * u_hat - h * v_hat])
    return IntersectionResult(kind="two", points=pts)


def _lens_area(a, b, d):
    """Overlap area of circles with radii a, b and center distance d."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    full = d <= abs(a - b)
    empty = d >= a + b
    mid = ~(full | empty)
    out[full] = np.pi * min(a, b) ** 2
    out[empty] = 0.0
    if np.any(mid):
        dm = d[mid]
        ca = np.clip((dm * dm + a * a - b * b) / (2.0 * dm * a), -1.0, 1.0)
        cb = np.clip((dm * dm + b * b - a * a) / (2.0 * dm * b), -1.0, 1.0)
        heron = (-dm + a + b) * (dm + a - b) * (dm - a + b) * (dm + a + b)
        tri = 0.5 * np.sqrt(np.clip(heron, 0.0, None))
        out[mid] = a * a * np.arccos(ca) + b * b * np.arccos(cb) - tri
    return out


def symplectic_area_phi(pair, r):
    """Half of the symplectic area between the two circles (the lens).

    Decreases monotonically from pi R_n^2 / 2 at the inner caustic to 0 at
    the outer one; the endpoint values are the continuous limits.  Raises
    :class:`DomainError` strictly outside the closed ring.  Its radial
    derivative is -2 h(r), which is what makes the chord construction land
    tips on the two circles.
    """
    geom = RingGeometry.from_pair(pair)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < geom.r_minus - 1e-12) or np.any(arr > geom.r_plus + 1e-12):
        raise DomainError(
            f"radius outside the classical ring [{geom.r_minus}, {geom.r_plus}]"
        )
    val = 0.5 * _lens_area(geom.radius_m, geom.radius_n, 2.0 * np.clip(arr, geom.r_minus, geom.r_plus))
    return float(val) if np.isscalar(r) else val


def phi_radial_derivative(pair, r):
    """Closed form phi'(r) = -2 h(r)."""
    return -2.0 * half_chord(pair, r)


def amplitude_D(pair, r):
    """Wedge-product amplitude denominator D(r) = sqrt(2 r h(r)).

    Equals |v_m ^ v_n|^{1/2} with the two harmonic velocity vectors taken
    at either intersection point (same absolute wedge at both); vanishes at
    the caustics where the circles are tangent.
    """
    r = np.asarray(r, dtype=float)
    val = np.sqrt(2.0 * r * half_chord(pair, r))
    return float(val) if np.isscalar(r) or val.ndim == 0 else val


def ring_phase_amplitude(pair, r, theta=0.0):
    """Bundle phi, D and the intersection points at radius r."""
    geom = RingGeometry.from_pair(pair, r)
    res = circle_intersections(r, theta, geom)
    return PhaseAmplitude(
        phi=float(symplectic_area_phi(pair, r)),
        amplitude_denominator=float(amplitude_D(pair, r)),
        intersection_points=res.points,
    )


def caustic_layers(pair):
    """Boundary-layer widths (w_-, w_+) around the caustics.

    Each width solves w = (hbar^2 / |phi''(edge)|)^{1/3} with phi'' taken at
    the layer edge itself; in the fold scaling h ~ sqrt(g |r - r_c|) with
    g = |d(bracket)/dr|(r_c) that fixed point is w = hbar^{4/5} g^{-1/5}.
    The degenerate inner point of a diagonal (lam = 0) field is a focus,
    not a fold; there phi'' ~ 2r/h(0) gives w = (hbar^2 h(0) / 2)^{1/4}.
    Widths are capped at 45% of the ring so the layers never overlap.
    """
    rlo, rhi = caustic_radii(pair)
    cap = 0.45 * (rhi - rlo)
    hbar = pair.hbar

    def fold_width(rc):
        g = abs(-2.0 * rc + pair.lam ** 2 / (2.0 * rc ** 3)) if rc > 0 else 0.0
        if g <= 0:
            return cap
        return min(hbar ** 0.8 * g ** -0.2, cap)

    w_plus = fold_width(rhi)
    if rlo > 1e-12:
        w_minus = fold_width(rlo)
    else:
        h0 = float(half_chord(pair, 1e-12))
        w_minus = min((hbar * hbar * h0 / 2.0) ** 0.25, cap)
    return w_minus, w_plus


def amplitude(pair, r, clamp=True):
    """1 / (sqrt(pi^3 hbar/2) D(r)), clamped inside the caustic layers.

    Clamping freezes the amplitude at its value on the layer edge; with
    clamp=False the raw expression (divergent at r_+-) is returned.
    Zero outside the closed ring.
    """
    rlo, rhi = caustic_radii(pair)
    r = np.asarray(r, dtype=float)
    inside = (r > rlo) & (r < rhi)
    r_eff = np.array(r, dtype=float)
    if clamp:
        w_minus, w_plus = caustic_layers(pair)
        r_eff = np.clip(r_eff, rlo + w_minus if rlo > 1e-12 else max(w_minus, 1e-12), rhi - w_plus)
    denom = amplitude_D(pair, np.where(inside, r_eff, rhi))
    with np.errstate(divide="ignore"):
        amp = np.where(inside & (denom > 0), _AMPLITUDE_NORM(pair.hbar) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(amp) if amp.ndim == 0 else amp


def phase_cosine(pair, r):
    """cos(phi(r)/hbar - pi/4) on the closed ring, 0 outside."""
    rlo, rhi = caustic_radii(pair)
    r = np.asarray(r, dtype=float)
    inside = (r >= rlo) & (r <= rhi)
    phi = 0.5 * _lens_area(RingGeometry.from_pair(pair).radius_m,
                           RingGeometry.from_pair(pair).radius_n,
                           2.0 * np.clip(r, rlo, rhi))
    val = np.where(inside, np.cos(phi / pair.hbar - 0.25 * np.pi), 0.0)
    return float(val) if val.ndim == 0 else val


def semi_moyal(pair, x, clamp=True):
    """Semiclassical transition function at phase point x = (q, p).

    exp(i l theta) cos(phi/hbar - pi/4) * amplitude; identically zero
    outside the closed ring.  The angular phase l*theta is reduced mod 2pi
    before exponentiation so large l stays accurate.
    """
    q, p = x
    r, theta = cart_to_polar(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    radial = phase_cosine(pair, r) * amplitude(pair, r, clamp=clamp)
    l = pair.m - pair.n
    if l == 0:
        return radial
    ang = np.mod(l * theta, 2.0 * np.pi)
    return radial * np.exp(1j * ang)


def semi_moyal_conj_index(pair, x, clamp=True):
    """Semiclassical M~_n^m = conj(M~_m^n) (l -> -l, same phi and D)."""
    return np.conj(semi_moyal(pair, x, clamp=clamp))


def semi_wigner(diag_case, x, clamp=True):
    """Semiclassical Wigner function of a single eigenstate (m = n)."""
    return np.real(semi_moyal(diag_case, x, clamp=clamp))


def cross_term(pair, x1, x2, clamp=True):
    """Sum of the two cross terms, Re{M~_m^n(x1) M~_n^m(x2)}.

    Product form: cos(l (theta1 - theta2)) cos(phi(r1)/hbar - pi/4)
    cos(phi(r2)/hbar - pi/4) amplitude(r1) amplitude(r2).  Supported on the
    ring in both arguments; its x2 integral vanishes because the angular
    average of cos(l (theta1 - theta2)) is zero for integer l != 0.
    """
    q1, p1 = x1
    q2, p2 = x2
    r1, t1 = cart_to_polar(np.asarray(q1, dtype=float), np.asarray(p1, dtype=float))
    r2, t2 = cart_to_polar(np.asarray(q2, dtype=float), np.asarray(p2, dtype=float))
    l = pair.m - pair.n
    val = (
        np.cos(l * (t1 - t2))
        * phase_cosine(pair, r1) * amplitude(pair, r1, clamp=clamp)
        * phase_cosine(pair, r2) * amplitude(pair, r2, clamp=clamp)
    )
    return float(val) if np.ndim(val) == 0 else val
