"""The three evolution channels and the reduced-marginal difference.

exact        -- truncated-Fock unitary evolution of oscillator 2; the
                reduced density matrix of oscillator 1 is invariant, so the
                exact channel is the ground truth null result.
liouville    -- classical transport of the x2 dependence along the
                interaction flow; any integrable field keeps its marginal
                (change of variables), so this channel is the classical
                control and measures only quadrature error.
semiclassical -- the crude ring fields with the x2 branch phases shifted by
                the closed-form chord shifts.  This is the channel where
                the angular orthogonality that kills the cross-term marginal
                is broken, and the one the reduced-marginal difference is
                actually about.

All channels report delta W^1 on an x1 grid with two-resolution convergence
records; semiclassical results additionally carry the marginal-unitarity
integrals of the shifted diagonal fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.linalg import eigh

from .chords import InteractionSpec, evolved_branch_shift, evolved_diagonal_shift
from .errors import TruncationError
from .fock import (
    DiagonalCase,
    FockPair,
    TruncatedState,
    moyal_closed,
    position_power_matrix,
    wigner_closed,
    wigner_of_density,
)
from .grids import PhaseSpaceField, PolarGrid, cart_to_polar, polar_to_cart
from .quadrature import QuadSpec, angular_sample_count, polar_integral
from .semiclassic import (
    amplitude,
    caustic_layers,
    caustic_radii,
    phase_cosine,
    semi_wigner,
    symplectic_area_phi,
)

_TAIL_LEVELS = 4
_ENLARGE_STEP = 16
_MAX_ENLARGEMENTS = 3


@dataclass
class ReducedField:
    """delta W^1 (or W^1) samples on an x1 grid with bookkeeping.

    convergence holds the per-scalar two-resolution history; diagnostics
    holds unitarity integrals, layer tallies and channel-specific extras.
    """

    grid: PolarGrid
    values: np.ndarray
    method: str
    convergence: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    status: str = "converged"

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    @property
    def l1_norm(self):
        return float(np.sum(self.grid.weights * np.abs(self.values)))


def default_x1_grid(pair, panels=20, order=10, ntheta=None):
    """Polar grid covering the supports of all x1 factors."""
    r_hi = pair.radius_m + 4.0 * np.sqrt(pair.hbar)
    l = pair.m - pair.n
    nth = ntheta if ntheta is not None else max(8 * l, 64)
    return PolarGrid.build_gauss(0.0, r_hi, panels, order, nth, min_harmonic=l)


# --- exact channel ---------------------------------------------------------


def _oscillator2_hamiltonian(interaction, t, dim, hbar, mode):
    alpha = interaction.epsilon / t if t != 0 else 0.0
    k = interaction.power
    h2p = alpha * position_power_matrix(k, dim, hbar) / k
    if mode == "full":
        h2p = h2p + np.diag((np.arange(dim) + 0.5) * hbar)
    return h2p


def quantum_evolve(state: TruncatedState, interaction: InteractionSpec, t,
                   mode="full", tail_tol=1e-10):
    """Evolve oscillator 2 by exp(-i H t / hbar) in the truncated Fock basis.

    H is the interaction alone (mode='perturbation') or oscillator plus
    interaction (mode='full', the default).  The truncation is validated by
    requiring the top four level populations of either oscillator to stay
    below tail_tol; the basis is enlarged up to three times before
    :class:`TruncationError` is raised.  The exponential is assembled from
    an eigendecomposition, so unitarity holds to machine precision.
    """
    dim = state.dimension
    coeffs = state.coeffs
    for attempt in range(_MAX_ENLARGEMENTS + 1):
        ham = _oscillator2_hamiltonian(interaction, t, dim, state.hbar, mode)
        evals, evecs = eigh(ham)
        u = (evecs * np.exp(-1j * evals * t / state.hbar)) @ evecs.conj().T
        new_coeffs = coeffs @ u.T
        pops = np.sum(np.abs(new_coeffs) ** 2, axis=0)
        pops1 = np.sum(np.abs(new_coeffs) ** 2, axis=1)
        tail = float(pops[-_TAIL_LEVELS:].sum() + pops1[-_TAIL_LEVELS:].sum())
        if tail < tail_tol:
            out = TruncatedState(dimension=dim, coeffs=new_coeffs, hbar=state.hbar)
            return out
        if attempt == _MAX_ENLARGEMENTS:
            raise TruncationError("tail population check failed", tail, dim)
        grown = np.zeros((dim + _ENLARGE_STEP, dim + _ENLARGE_STEP), dtype=complex)
        grown[:dim, :dim] = coeffs
        coeffs = grown
        dim += _ENLARGE_STEP


def reduced_wigner_exact(state: TruncatedState, x1_grid: PolarGrid):
    """Wigner transform of the oscillator-1 reduced density matrix."""
    rho1 = state.reduced_density(which=1)
    vals = wigner_of_density(rho1, x1_grid, state.hbar)
    return ReducedField(grid=x1_grid, values=vals, method="exact",
                        diagnostics={"trace": float(np.real(np.trace(rho1)))})


# --- liouville channel -----------------------------------------------------


class OscillatorFlow:
    """Pure harmonic rotation; backward map in closed form."""

    def velocity(self, q, p):
        return p, -q

    def backward(self, q, p, t):
        c, s = np.cos(t), np.sin(t)
        # forward flow is z -> e^{-it} z with z = q + ip
        return c * q - s * p, s * q + c * p


class InteractionFlow:
    """Flow of the cubic/quartic interaction Hamiltonian on subsystem 2.

    mode 'perturbation' (kick with frozen position) has a closed-form map;
    mode 'full' integrates oscillator + interaction by fixed-step RK4.
    """

    def __init__(self, interaction: InteractionSpec, t, mode="perturbation"):
        self.alpha = interaction.epsilon / t if t != 0 else 0.0
        self.k = interaction.power
        self.mode = mode

    def velocity(self, q, p):
        dv = self.alpha * q ** (self.k - 1)
        if self.mode == "full":
            return p, -q - dv
        return np.zeros_like(q), -dv

    def backward(self, q, p, t):
        if self.mode == "perturbation":
            return q, p + self.alpha * q ** (self.k - 1) * t
        steps = max(64, int(16 * abs(t)) + 1)
        dt = -t / steps
        for _ in range(steps):
            k1 = self.velocity(q, p)
            k2 = self.velocity(q + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1])
            k3 = self.velocity(q + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1])
            k4 = self.velocity(q + dt * k3[0], p + dt * k3[1])
            q = q + dt * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
            p = p + dt * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
        return q, p


def liouville_evolve(fld, flow, t):
    """Transport a field along the flow by backward characteristics.

    For a callable field the composition is exact; for a sampled
    :class:`PhaseSpaceField` on a polar grid the initial samples are
    interpolated bicubically in (r, theta) with periodic angular padding.
    """
    if callable(fld):
        def moved(q, p):
            q0, p0 = flow.backward(np.asarray(q, dtype=float), np.asarray(p, dtype=float), t)
            return fld(q0, p0)
        return moved
    if not fld.is_polar:
        raise ValueError("grid transport is implemented for polar fields")
    grid = fld.grid
    pad = 4
    theta_ext = np.concatenate([
        grid.theta[-pad:] - 2.0 * np.pi, grid.theta, grid.theta[:pad] + 2.0 * np.pi
    ])
    vals_ext = np.concatenate([
        fld.values[:, -pad:], fld.values, fld.values[:, :pad]
    ], axis=1)
    spline = RectBivariateSpline(grid.r, theta_ext, vals_ext, kx=3, ky=3)
    qq, pp = grid.cart_mesh
    q0, p0 = flow.backward(qq, pp, t)
    r0, th0 = cart_to_polar(q0, p0)
    r0 = np.clip(r0, grid.r[0], grid.r[-1])
    new_vals = spline.ev(r0.ravel(), th0.ravel()).reshape(fld.values.shape)
    meta = dict(fld.metadata)
    meta["time"] = meta.get("time", 0.0) + t
    return PhaseSpaceField(grid=grid, values=new_vals, metadata=meta)


# --- semiclassical channel -------------------------------------------------


class SemiclassicalEvolution:
    """Evaluator for the four-term ring field with shifted x2 phases.

    Cross-term x2 branch phases phi +/- lam theta acquire the closed-form
    chord shifts; the diagonal x2 factors acquire the lam = 0 shifts; x1
    factors are untouched.  oscillator_time applies an additional exact
    harmonic rotation to the x2 argument (the quadratic control mode, which
    generates no shifts).
    """

    def __init__(self, pair: FockPair, interaction: InteractionSpec | None,
                 sign=None, oscillator_time=0.0, clamp=True):
        self.pair = pair
        self.interaction = interaction
        self.sign = pair.sign if sign is None else sign
        self.oscillator_time = float(oscillator_time)
        self.clamp = clamp
        self.diag_m = DiagonalCase(pair.m, pair.hbar)
        self.diag_n = DiagonalCase(pair.n, pair.hbar)

    @property
    def _eps(self):
        return 0.0 if self.interaction is None else self.interaction.epsilon

    def _x2_polar(self, x2):
        q2, p2 = x2
        r2, th2 = cart_to_polar(np.asarray(q2, dtype=float), np.asarray(p2, dtype=float))
        return r2, th2 - self.oscillator_time

    def branch_phases(self, r2, th2):
        """Shifted branch exponents P-(r2, th2), P+(r2, th2) (mod -pi/4)."""
        pair, h = self.pair, self.pair.hbar
        phi = _phi_on_ring(pair, r2)
        lam = pair.lam
        if self._eps > 0.0:
            kind = self.interaction.kind
            d_minus = evolved_branch_shift(pair, kind, self._eps, r2, th2, -1)
            d_plus = evolved_branch_shift(pair, kind, self._eps, r2, th2, +1)
        else:
            d_minus = d_plus = 0.0
        p_minus = (phi - lam * th2 + d_minus) / h - 0.25 * np.pi
        p_plus = (phi + lam * th2 + d_plus) / h - 0.25 * np.pi
        return p_minus, p_plus

    def cross_term(self, x1, x2):
        """Evolved Re{M~_m^n(x1) M~_n^m(x2)} (parity sign not included)."""
        pair = self.pair
        q1, p1 = x1
        r1, th1 = cart_to_polar(np.asarray(q1, dtype=float), np.asarray(p1, dtype=float))
        r2, th2 = self._x2_polar(x2)
        a1c1 = amplitude(pair, r1, clamp=self.clamp) * phase_cosine(pair, r1)
        a2 = amplitude(pair, r2, clamp=self.clamp)
        p_minus, p_plus = self.branch_phases(r2, th2)
        l = pair.m - pair.n
        return a1c1 * a2 * 0.5 * (np.cos(l * th1 + p_minus) + np.cos(l * th1 - p_plus))

    def diagonal(self, which, x2):
        """Evolved semiclassical W_k(x2) for k = 'm' or 'n'."""
        case = self.diag_m if which == "m" else self.diag_n
        r2, th2 = self._x2_polar(x2)
        amp = amplitude(case, r2, clamp=self.clamp)
        phi = _phi_on_ring(case, r2)
        if self._eps > 0.0:
            delta = evolved_diagonal_shift(self.interaction.kind, self._eps,
                                           case.e_n, r2, th2)
        else:
            delta = 0.0
        return amp * np.cos((phi + delta) / case.hbar - 0.25 * np.pi)

    def wigner(self, x1, x2):
        """Evolved four-term W(x1, x2) (x1 factors untouched)."""
        pair = self.pair
        q1, p1 = x1
        wm1 = semi_wigner(self.diag_m, (q1, p1), clamp=self.clamp)
        wn1 = semi_wigner(self.diag_n, (q1, p1), clamp=self.clamp)
        return (0.5 * (wm1 * self.diagonal("n", x2) + wn1 * self.diagonal("m", x2))
                + self.sign * self.cross_term(x1, x2))


def semiclassical_evolve(pair, interaction, sign=None, oscillator_time=0.0, clamp=True):
    """Build the shifted-phase evaluator (see :class:`SemiclassicalEvolution`)."""
    return SemiclassicalEvolution(pair, interaction, sign=sign,
                                  oscillator_time=oscillator_time, clamp=clamp)


def _phi_on_ring(pair, r):
    rlo, rhi = caustic_radii(pair)
    return symplectic_area_phi(pair, np.clip(np.asarray(r, dtype=float), rlo, rhi))


def _angular_gradient_bound(fn, r_lo, r_hi):
    """Crude bound on |d fn / d theta| over the ring, for node counts."""
    r = np.linspace(r_lo + 1e-9, r_hi - 1e-9, 48)[:, None]
    th = np.linspace(0.0, 2.0 * np.pi, 96, endpoint=False)[None, :]
    vals = fn(r, th)
    grad = np.gradient(vals, th[0], axis=1)
    return float(np.max(np.abs(grad)))


def _zoned_scalar(fn, pair_like, quad, n_theta):
    """Quadrature over [inner layer][interior][outer layer]; layers tallied."""
    rlo, rhi = caustic_radii(pair_like)
    w_minus, w_plus = caustic_layers(pair_like)
    a = rlo + quad.caustic_exclusion * w_minus
    b = rhi - quad.caustic_exclusion * w_plus
    interior = polar_integral(fn, a, b, quad, n_theta)
    small = QuadSpec(radial_panels=max(4, quad.radial_panels // 4),
                     gauss_order=quad.gauss_order,
                     angular_samples=quad.angular_samples,
                     refine_factor=quad.refine_factor,
                     tolerance=quad.tolerance,
                     caustic_exclusion=quad.caustic_exclusion,
                     max_refinements=quad.max_refinements)
    layers_val = 0.0
    layers_est = 0.0
    statuses = [interior.status]
    for lo, hi in (((rlo if rlo > 1e-12 else 1e-9), a), (b, rhi - 1e-12)):
        if hi > lo:
            part = polar_integral(fn, lo, hi, small, n_theta)
            layers_val += part.value
            layers_est += part.estimate
            statuses.append(part.status)
    total = interior.value + layers_val
    est = interior.estimate + layers_est
    status = "non-converged" if any(s == "non-converged" for s in statuses) else "converged"
    if status == "converged" and abs(total) <= est:
        status = "zero-within-estimate"
    return {
        "value": total,
        "estimate": est,
        "status": status,
        "interior": interior.value,
        "layers": layers_val,
        "coarse": interior.history[-2][2] + layers_val if len(interior.history) > 1 else total,
    }


def _semiclassical_scalars(pair, interaction, sign, quad, clamp):
    """The six ring scalars that determine the semiclassical delta W^1."""
    evo = SemiclassicalEvolution(pair, interaction, sign=sign, clamp=clamp)
    h = pair.hbar
    l = pair.m - pair.n

    def a2(r):
        return amplitude(pair, r, clamp=clamp)

    def p_minus(r, th):
        return evo.branch_phases(r, th)[0]

    def p_plus(r, th):
        return evo.branch_phases(r, th)[1]

    rlo, rhi = caustic_radii(pair)
    # lam theta cancels in P- + P+, leaving twice the shift gradient
    hint = abs(l) + 0.5 * _angular_gradient_bound(
        lambda r, th: p_minus(r, th) + p_plus(r, th), rlo, rhi)
    n_theta = angular_sample_count(quad, l, hint)

    scalars = {}
    for name, fn in (
        ("cos_minus", lambda r, th: a2(r) * np.cos(p_minus(r, th))),
        ("sin_minus", lambda r, th: a2(r) * np.sin(p_minus(r, th))),
        ("cos_plus", lambda r, th: a2(r) * np.cos(p_plus(r, th))),
        ("sin_plus", lambda r, th: a2(r) * np.sin(p_plus(r, th))),
    ):
        scalars[name] = _zoned_scalar(fn, pair, quad, n_theta)

    for which in ("m", "n"):
        case = evo.diag_m if which == "m" else evo.diag_n

        def shifted(r, th, _c=case, _w=which):
            return evo.diagonal(_w, polar_to_cart(r, th))

        def unshifted(r, th, _c=case):
            return amplitude(_c, r, clamp=clamp) * phase_cosine(_c, r)

        nth_d = angular_sample_count(quad, 1, 8)
        scalars[f"nu_{which}_t"] = _zoned_scalar(shifted, case, quad, nth_d)
        scalars[f"nu_{which}_0"] = _zoned_scalar(unshifted, case, quad, nth_d)
    return scalars, n_theta


def _assemble_semiclassical(pair, sign, grid, scalars, key, clamp):
    rr, tt = grid.mesh
    l = pair.m - pair.n
    a1c1 = amplitude(pair, rr, clamp=clamp) * phase_cosine(pair, rr)
    cm, cp = scalars["cos_minus"][key], scalars["cos_plus"][key]
    sm, sp = scalars["sin_minus"][key], scalars["sin_plus"][key]
    cross = sign * a1c1 * 0.5 * (np.cos(l * tt) * (cm + cp) + np.sin(l * tt) * (sp - sm))
    wm1 = semi_wigner(DiagonalCase(pair.m, pair.hbar), polar_to_cart(rr, tt), clamp=clamp)
    wn1 = semi_wigner(DiagonalCase(pair.n, pair.hbar), polar_to_cart(rr, tt), clamp=clamp)
    delta_m = scalars["nu_m_t"][key] - scalars["nu_m_0"][key]
    delta_n = scalars["nu_n_t"][key] - scalars["nu_n_0"][key]
    return 0.5 * (wm1 * delta_n + wn1 * delta_m) + cross


def delta_w1(pair: FockPair, interaction: InteractionSpec, method, x1_grid=None,
             quad: QuadSpec | None = None, sign=None, t=1.0, mode="perturbation",
             clamp=True):
    """Reduced-marginal difference delta W^1(x1) for one evolution channel.

    method is 'exact', 'liouville' or 'semiclassical'.  The exact channel is
    evolved with the full oscillator-plus-interaction generator; liouville
    and the closed-form shifts refer to the interaction flow in the given
    ``mode``.  Returns a :class:`ReducedField` whose diagnostics carry the
    unitarity integrals and whose convergence record holds every scalar at
    its last two resolutions.
    """
    sign = pair.sign if sign is None else sign
    grid = x1_grid if x1_grid is not None else default_x1_grid(pair)
    quad = quad if quad is not None else QuadSpec()

    if method == "exact":
        state = TruncatedState.from_pair(
            FockPair(pair.m, pair.n, sign, pair.hbar))
        evolved = quantum_evolve(state, interaction, t, mode="full")
        rho_before = state.reduced_density(1)
        # embed the initial density in the (possibly enlarged) evolved basis
        dim = evolved.dimension
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[:rho_before.shape[0], :rho_before.shape[0]] = rho_before
        diff = evolved.reduced_density(1) - rho0
        vals = wigner_of_density(diff, grid, pair.hbar)
        return ReducedField(
            grid=grid, values=vals, method="exact",
            convergence={"dimension": dim},
            diagnostics={
                "max_abs_rho_diff": float(np.max(np.abs(diff))),
                "norm_after": float(np.sum(np.abs(evolved.coeffs) ** 2)),
            },
            status="converged",
        )

    if method == "liouville":
        flow = InteractionFlow(interaction, t, mode=mode)
        h = pair.hbar
        r_w = pair.radius_m + 4.0 * np.sqrt(h)
        kick = interaction.epsilon * r_w ** (interaction.power - 1)
        r_dom = 1.02 * r_w + kick

        def moved_minus_initial(f):
            def g(r, th):
                q, p = polar_to_cart(r, th)
                q0, p0 = flow.backward(q, p, t)
                return f(q0, p0) - f(q, p)
            return g

        fns = {
            "I_m": moved_minus_initial(lambda q, p: wigner_closed(pair.m, q, p, h)),
            "I_n": moved_minus_initial(lambda q, p: wigner_closed(pair.n, q, p, h)),
            "I_cross_re": moved_minus_initial(
                lambda q, p: np.real(moyal_closed(pair.n, pair.m, q, p, h))),
            "I_cross_im": moved_minus_initial(
                lambda q, p: np.imag(moyal_closed(pair.n, pair.m, q, p, h))),
        }
        n_theta = angular_sample_count(
            quad, pair.m - pair.n,
            min(2.0 * r_w * kick / h + abs(pair.m - pair.n), 1500.0))
        scalars = {}
        for name, f in fns.items():
            scalars[name] = polar_integral(f, 1e-9, r_dom, quad, n_theta)
        rr, tt = grid.mesh
        qq, pp = polar_to_cart(rr, tt)
        i_cross = scalars["I_cross_re"].value + 1j * scalars["I_cross_im"].value
        vals = (0.5 * (wigner_closed(pair.m, qq, pp, h) * scalars["I_n"].value
                       + wigner_closed(pair.n, qq, pp, h) * scalars["I_m"].value)
                + sign * np.real(moyal_closed(pair.m, pair.n, qq, pp, h) * i_cross))
        estimate = sum(s.estimate for s in scalars.values())
        status = ("non-converged" if any(s.status == "non-converged" for s in scalars.values())
                  else "converged")
        max_abs = float(np.max(np.abs(vals)))
        if status == "converged" and max_abs <= estimate:
            status = "zero-within-estimate"
        return ReducedField(
            grid=grid, values=vals, method="liouville",
            convergence={k: {"value": s.value, "estimate": s.estimate, "status": s.status}
                         for k, s in scalars.items()},
            diagnostics={"domain_radius": r_dom, "n_theta": n_theta},
            status=status,
        )

    if method == "semiclassical":
        scalars, n_theta = _semiclassical_scalars(pair, interaction, sign, quad, clamp)
        vals = _assemble_semiclassical(pair, sign, grid, scalars, "value", clamp)
        coarse = _assemble_semiclassical(pair, sign, grid, scalars, "coarse", clamp)
        max_abs = float(np.max(np.abs(vals)))
        refine_gap = float(np.max(np.abs(vals - coarse)))
        estimate = sum(scalars[k]["estimate"] for k in
                       ("cos_minus", "sin_minus", "cos_plus", "sin_plus"))
        statuses = [scalars[k]["status"] for k in scalars]
        if any(s == "non-converged" for s in statuses):
            status = "non-converged"
        elif max_abs <= estimate:
            status = "zero-within-estimate"
        elif refine_gap > 0.1 * max_abs:
            status = "non-converged"
        else:
            status = "converged"
        nu = {k: scalars[k]["value"] for k in ("nu_m_t", "nu_m_0", "nu_n_t", "nu_n_0")}
        # double integral of the shifted cross term: the x1 ring integral of
        # the pure harmonics cos/sin(l theta1) vanishes by angular exactness
        x1_quad = QuadSpec(radial_panels=8, gauss_order=8,
                           angular_samples=max(8 * (pair.m - pair.n), 32),
                           max_refinements=1)
        l = pair.m - pair.n
        xc = polar_integral(
            lambda r, th: amplitude(pair, r, clamp=clamp) * phase_cosine(pair, r) * np.cos(l * th),
            *caustic_radii(pair), x1_quad, x1_quad.angular_samples)
        xs = polar_integral(
            lambda r, th: amplitude(pair, r, clamp=clamp) * phase_cosine(pair, r) * np.sin(l * th),
            *caustic_radii(pair), x1_quad, x1_quad.angular_samples)
        cm, cp = scalars["cos_minus"]["value"], scalars["cos_plus"]["value"]
        sm, sp = scalars["sin_minus"]["value"], scalars["sin_plus"]["value"]
        double_integral = sign * 0.5 * (xc.value * (cm + cp) + xs.value * (sp - sm))
        return ReducedField(
            grid=grid, values=vals, method="semiclassical",
            convergence={k: {kk: scalars[k][kk] for kk in ("value", "estimate", "status", "coarse")}
                         for k in scalars},
            diagnostics={
                "unitarity": nu,
                "unitarity_deficit_m": nu["nu_m_t"] - nu["nu_m_0"],
                "unitarity_deficit_n": nu["nu_n_t"] - nu["nu_n_0"],
                "layer_tally": {k: scalars[k]["layers"] for k in scalars},
                "cross_double_integral": double_integral,
                "estimate_field_max": estimate,
                "refine_gap": refine_gap,
                "n_theta": n_theta,
            },
            status=status,
        )

    raise ValueError(f"unknown method {method!r}")
