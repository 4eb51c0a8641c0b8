"""Oscillation-resolving ring quadrature, stationary-point diagnostics, and
the one-dimensional Airy reference model.

The ring integrals are done by direct dense quadrature, radial composite
Gauss panels (clustered toward the caustics) times a uniform angular
trapezoid (exact for trigonometric polynomials below the node count), with
a Richardson-style two-resolution error estimate.  This is the honest
desk-scale substitute for a two-dimensional complex steepest descent: it
bounds the usable hbar from below, and every output carries its estimate.
Values smaller than their own estimate are tagged indistinguishable from
zero and never claimed significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .semiclassic import caustic_layers, caustic_radii


@dataclass(frozen=True)
class QuadSpec:
    """Resolution policy for ring integrals.

    angular_samples is a floor only: the effective angular count is raised
    to 8 l and to six samples per oscillation period of the supplied phase
    gradient.  caustic_exclusion multiplies the Airy layer widths excluded
    at both ring edges.
    """

    radial_panels: int = 24
    gauss_order: int = 10
    angular_samples: int = 64
    refine_factor: int = 2
    tolerance: float = 1e-8
    caustic_exclusion: float = 1.0
    max_refinements: int = 3

    def __post_init__(self):
        if self.radial_panels < 1 or self.gauss_order < 2 or self.angular_samples < 4:
            raise ValueError("degenerate quadrature specification")
        if self.refine_factor < 2:
            raise ValueError("refine_factor must be at least 2")


@dataclass(frozen=True)
class RingIntegralResult:
    """Value with its two-resolution estimate and a convergence status.

    status is 'converged', 'non-converged' (estimate above tolerance after
    the refinement budget; both final values are in history), or
    'zero-within-estimate'.
    """

    value: complex | float
    estimate: float
    status: str
    history: tuple = field(default=(), repr=False)

    @property
    def distinguishable_from_zero(self):
        return abs(self.value) > self.estimate


def _clustered_edges(r_lo, r_hi, panels):
    u = np.linspace(0.0, 1.0, panels + 1)
    x = u - np.sin(2.0 * np.pi * u) / (2.0 * np.pi)
    return r_lo + (r_hi - r_lo) * x


def _polar_eval(f, r_lo, r_hi, panels, order, n_theta):
    nodes, wts = np.polynomial.legendre.leggauss(order)
    edges = _clustered_edges(r_lo, r_hi, panels)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    wr = (half[:, None] * wts[None, :]).ravel() * r
    theta = np.arange(n_theta) * (2.0 * np.pi / n_theta)
    vals = np.broadcast_to(np.asarray(f(r[:, None], theta[None, :])),
                           (r.size, n_theta))
    return np.sum(vals * wr[:, None]) * (2.0 * np.pi / n_theta)


def polar_integral(f, r_lo, r_hi, quad: QuadSpec, n_theta):
    """int f(r, theta) r dr dtheta over [r_lo, r_hi] x [0, 2pi).

    f must broadcast over an (nr, ntheta) mesh.  Refines both directions by
    refine_factor until two successive resolutions agree to the absolute
    tolerance, up to max_refinements.
    """
    panels, nth = quad.radial_panels, n_theta
    prev = _polar_eval(f, r_lo, r_hi, panels, quad.gauss_order, nth)
    history = [(panels, nth, prev)]
    status = "non-converged"
    estimate = math.inf
    for _ in range(quad.max_refinements):
        panels *= quad.refine_factor
        nth *= quad.refine_factor
        cur = _polar_eval(f, r_lo, r_hi, panels, quad.gauss_order, nth)
        history.append((panels, nth, cur))
        estimate = abs(cur - prev)
        prev = cur
        if estimate <= quad.tolerance:
            status = "converged"
            break
    value = complex(prev) if np.iscomplexobj(np.asarray(prev)) else float(np.real(prev))
    if status == "converged" and abs(value) <= estimate:
        status = "zero-within-estimate"
    return RingIntegralResult(value=value, estimate=float(estimate),
                              status=status, history=tuple(history))


def angular_sample_count(quad: QuadSpec, l, phase_gradient_hint=None):
    """Effective angular node count: >= 8 l and >= 6 per oscillation."""
    n = max(quad.angular_samples, 8 * int(abs(l)))
    if phase_gradient_hint is not None:
        n = max(n, int(math.ceil(6.0 * abs(phase_gradient_hint))))
    return n


def ring_integral(integrand, pair, quad: QuadSpec, phase_gradient_hint=None,
                  domain=None):
    """Integrate over the classical ring of ``pair``, caustic layers excluded.

    integrand(r, theta) must broadcast over meshes; phase_gradient_hint is
    the caller's bound on |d(phase)/d theta| used for the oscillation
    resolution criterion (defaults to the bare harmonic index l).
    """
    l = pair.m - pair.n
    if domain is None:
        rlo, rhi = caustic_radii(pair)
        w_minus, w_plus = caustic_layers(pair)
        domain = (rlo + quad.caustic_exclusion * w_minus,
                  rhi - quad.caustic_exclusion * w_plus)
    if domain[0] >= domain[1]:
        raise ValueError("caustic exclusion leaves an empty ring")
    hint = float(l) if phase_gradient_hint is None else phase_gradient_hint
    n_theta = angular_sample_count(quad, l, hint)
    return polar_integral(integrand, domain[0], domain[1], quad, n_theta)


@dataclass(frozen=True)
class StationaryPoint:
    r: float
    theta: float
    phase: float
    hessian_sign: int


@dataclass(frozen=True)
class StationaryReport:
    """Real stationary points of a ring phase, or the evidence there are none.

    complex_critical_points is set when no real root was found and the
    gradient norm stays bounded away from zero over the scanned ring.
    """

    points: tuple
    min_gradient_norm: float
    complex_critical_points: bool


def _fd_gradient(fn, r, th, h):
    gr = (fn(r + h, th) - fn(r - h, th)) / (2 * h)
    gt = (fn(r, th + h) - fn(r, th - h)) / (2 * h)
    return np.array([gr, gt])


def _fd_hessian(fn, r, th, h):
    f0 = fn(r, th)
    frr = (fn(r + h, th) - 2 * f0 + fn(r - h, th)) / h**2
    ftt = (fn(r, th + h) - 2 * f0 + fn(r, th - h)) / h**2
    frt = (fn(r + h, th + h) - fn(r + h, th - h) - fn(r - h, th + h) + fn(r - h, th - h)) / (4 * h**2)
    return np.array([[frr, frt], [frt, ftt]])


def stationary_points(phase_fn, domain, n_seeds=(12, 24), grad_tol=1e-10,
                      max_iter=50, fd_step=1e-6):
    """Newton search for real stationary points of phase_fn(r, theta).

    Seeds on a coarse (r, theta) grid over domain = (r_lo, r_hi); roots are
    deduplicated and classified by the sign of the Hessian determinant.
    When nothing converges, the minimum gradient norm over the seed grid is
    reported and the complex_critical_points flag is raised.
    """
    r_lo, r_hi = domain
    seeds_r = np.linspace(r_lo + 0.02 * (r_hi - r_lo), r_hi - 0.02 * (r_hi - r_lo), n_seeds[0])
    seeds_t = np.arange(n_seeds[1]) * (2.0 * np.pi / n_seeds[1])
    scale = max(r_hi - r_lo, 1.0)
    roots = []
    min_grad = math.inf
    for r0 in seeds_r:
        for t0 in seeds_t:
            g = _fd_gradient(phase_fn, r0, t0, fd_step * scale)
            min_grad = min(min_grad, float(np.hypot(*g)))
            r, th = r0, t0
            for _ in range(max_iter):
                g = _fd_gradient(phase_fn, r, th, fd_step * scale)
                if np.hypot(*g) < grad_tol:
                    break
                hess = _fd_hessian(phase_fn, r, th, 1e-4 * scale)
                try:
                    step = np.linalg.solve(hess, g)
                except np.linalg.LinAlgError:
                    break
                if np.max(np.abs(step)) > 0.5 * scale:
                    step = step * (0.5 * scale / np.max(np.abs(step)))
                r, th = r - step[0], th - step[1]
                if not (r_lo < r < r_hi):
                    break
            else:
                continue
            if not (r_lo < r < r_hi) or np.hypot(*_fd_gradient(phase_fn, r, th, fd_step * scale)) >= grad_tol:
                continue
            th = float(np.mod(th, 2.0 * np.pi))
            if any(abs(r - pr) < 1e-6 and min(abs(th - pt), 2 * np.pi - abs(th - pt)) < 1e-6
                   for pr, pt, *_ in roots):
                continue
            det = np.linalg.det(_fd_hessian(phase_fn, r, th, 1e-4 * scale))
            roots.append((float(r), th, float(phase_fn(r, th)), int(np.sign(det))))
    pts = tuple(StationaryPoint(*row) for row in sorted(roots))
    return StationaryReport(
        points=pts,
        min_gradient_norm=min_grad,
        complex_critical_points=(len(pts) == 0),
    )


_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
_SERIES_SWITCH = 6.5


def _airy_series_parts(y):
    """Maclaurin sums f = sum c_k y^{3k} and g = sum d_k y^{3k+1}."""
    y3 = y ** 3
    tf, tg = 1.0, y
    f, g = tf, tg
    for k in range(220):
        tf = tf * y3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * y3 / ((3 * k + 3) * (3 * k + 4))
        f += tf
        g += tg
        if abs(tf) < 1e-18 * max(abs(f), 1.0) and abs(tg) < 1e-18 * max(abs(g), 1.0):
            break
    return f, g


def _airy_series_second(y):
    """Termwise second derivatives f'' and g'', summed independently."""
    y3 = y ** 3
    sf, sg = y, y * y   # k = 1 leading terms of f'' and g''
    f2, g2 = sf, sg
    for k in range(1, 220):
        sf = sf * y3 / ((3 * k) * (3 * k - 1))
        sg = sg * y3 / ((3 * k + 1) * (3 * k))
        f2 += sf
        g2 += sg
        if abs(sf) < 1e-18 * max(abs(f2), 1.0) and abs(sg) < 1e-18 * max(abs(g2), 1.0):
            break
    return f2, g2


def _airy_asymptotic(y, terms=10):
    zeta = (2.0 / 3.0) * y ** 1.5
    u = 1.0
    total = 1.0
    prev = 1.0
    for k in range(1, terms):
        u = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        term = ((-1.0) ** k) * u / zeta**k
        if abs(term) > abs(prev):
            break
        total += term
        prev = term
    return math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * y**0.25) * total


def airy_ai(y):
    """Airy function Ai(y) by a series/asymptotic switchover.

    Maclaurin series for y <= 6.5 (supported down to y = -6), decaying
    asymptotic expansion above.  Accuracy is limited by series cancellation
    near the switchover (~1e-7 relative there, far better elsewhere); the
    implementation is validated against its defining ODE and against
    quadrature of the Airy integral.
    """
    if y < -6.0:
        raise ValueError("airy_ai supports y >= -6 (decaying and moderate region)")
    if y <= _SERIES_SWITCH:
        f, g = _airy_series_parts(float(y))
        return _AI0 * f + _AIP0 * g
    return _airy_asymptotic(float(y))


def airy_ai_ode_residual(y):
    """|Ai''(y) - y Ai(y)| with Ai'' summed termwise and independently.

    Meaningful in the series region; the Maclaurin pieces satisfy the ODE
    identically, so any excess residual signals an implementation error.
    """
    f, g = _airy_series_parts(float(y))
    f2, g2 = _airy_series_second(float(y))
    ai = _AI0 * f + _AIP0 * g
    ai2 = _AI0 * f2 + _AIP0 * g2
    return abs(ai2 - y * ai)


def airy_reference(lam, eps, hbar):
    """Airy asymptotic of the shifted toy integral:
    pi (hbar/eps)^{1/3} Ai(y), y = lam eps^{-1/3} hbar^{-2/3}."""
    y = lam * eps ** (-1.0 / 3.0) * hbar ** (-2.0 / 3.0)
    return math.pi * (hbar / eps) ** (1.0 / 3.0) * airy_ai(y)


class ValueWithEstimate(float):
    """A float carrying the order-doubling error estimate of its quadrature."""

    def __new__(cls, value, estimate, doublings):
        obj = super().__new__(cls, value)
        obj.estimate = float(estimate)
        obj.doublings = int(doublings)
        return obj


def _gauss_panels_1d(fn, a, b, panels, order=16):
    nodes, wts = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * wts[None, :]).ravel()
    return float(np.sum(fn(x) * w))


def toy_integral(lam, eps, hbar, tol=1e-13, max_doublings=10):
    """int_0^{2pi} cos((lam theta + eps theta^3 / 3)/hbar) dtheta.

    Oscillation-resolving composite Gauss quadrature with an error estimate
    from panel-count doubling.  Note the honest caveat: at fixed lam this
    finite-range integral is dominated by its theta = 2pi endpoint term of
    size O(hbar / (lam + 4 pi^2 eps)) once the Airy core has decayed below
    that, so it tracks :func:`airy_reference` only while the core dominates
    (small Airy argument, e.g. lam shrinking with hbar^{2/3}).
    """

    def f(theta):
        return np.cos((lam * theta + eps * theta**3 / 3.0) / hbar)

    periods = (lam * 2 * np.pi + eps * (2 * np.pi) ** 3 / 3.0) / (2 * np.pi * hbar)
    panels = max(16, int(math.ceil(10.0 * max(periods, 1.0) / 16.0)))
    prev = _gauss_panels_1d(f, 0.0, 2.0 * np.pi, panels)
    estimate = math.inf
    doublings = 0
    for doublings in range(1, max_doublings + 1):
        panels *= 2
        cur = _gauss_panels_1d(f, 0.0, 2.0 * np.pi, panels)
        estimate = abs(cur - prev)
        prev = cur
        if estimate <= tol:
            break
    return ValueWithEstimate(prev, estimate, doublings)
