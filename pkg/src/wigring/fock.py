"""Exact quantum reference for the oscillator pair.

Hermite eigenfunctions, transition (off-diagonal Wigner) functions via the
Weyl-transform integral, the Laguerre closed form as an independent second
route, Fock-basis position-power operators, and the entangled two-oscillator
eigenstate.  Everything here is brute-force quantum mechanics; the
semiclassical modules are tested against it.

Units: H_i = (p_i^2 + q_i^2)/2, so mass = frequency = 1 and hbar is the only
scale.  The transition function of |m><n| is defined with the kernel
exp(-2ipy/hbar),

    M_m^n(q, p) = (1/pi hbar) int psi_m(q+y) psi_n(q-y) exp(-2ipy/hbar) dy,

which together with the flow-direction angle of :mod:`wigring.grids` gives
the angular form M_m^n(r, theta) = exp(i l theta) M_m^n(r, 0), l = m - n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, RangeError
from .grids import PolarGrid

_MAX_HERMITE_ORDER = 6000
_MAX_GAUSS_EXPONENT = 700.0


@dataclass(frozen=True)
class FockPair:
    """Quantum numbers of the entangled eigenstate (|m,n> +/- |n,m>)/sqrt(2).

    Requires m > n >= 0 so the energy splitting lam = (m - n) hbar is
    positive.  sign is the exchange eigenvalue.
    """

    m: int
    n: int
    sign: int = +1
    hbar: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and isinstance(self.n, (int, np.integer))):
            raise ValueError("m and n must be integers")
        if self.n < 0 or self.m <= self.n:
            raise ValueError(f"need m > n >= 0, got (m, n) = ({self.m}, {self.n})")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @property
    def l(self):
        return self.m - self.n

    @property
    def lam(self):
        """Energy splitting e_m - e_n = l hbar."""
        return self.l * self.hbar

    @property
    def e_m(self):
        return (self.m + 0.5) * self.hbar

    @property
    def e_n(self):
        return (self.n + 0.5) * self.hbar

    @property
    def e_total(self):
        return self.e_m + self.e_n

    @property
    def radius_m(self):
        return np.sqrt((2 * self.m + 1) * self.hbar)

    @property
    def radius_n(self):
        return np.sqrt((2 * self.n + 1) * self.hbar)


@dataclass(frozen=True)
class DiagonalCase:
    """Degenerate m = n stand-in accepted by the semiclassical geometry."""

    n: int
    hbar: float = 1.0
    sign: int = +1

    @property
    def m(self):
        return self.n

    @property
    def l(self):
        return 0

    @property
    def lam(self):
        return 0.0

    @property
    def e_n(self):
        return (self.n + 0.5) * self.hbar

    e_m = e_n

    @property
    def e_total(self):
        return 2.0 * self.e_n

    @property
    def radius_n(self):
        return np.sqrt((2 * self.n + 1) * self.hbar)

    radius_m = radius_n


def _hermite_psi_array(n, q, hbar):
    """psi_n(q) for array q, Gaussian folded into the recurrence (no guard)."""
    xi = np.asarray(q, dtype=float) / np.sqrt(hbar)
    with np.errstate(under="ignore"):
        base = np.pi ** -0.25 * hbar ** -0.25 * np.exp(-0.5 * xi * xi)
        if n == 0:
            return base
        prev = np.zeros_like(base)
        cur = base
        for k in range(1, n + 1):
            prev, cur = cur, xi * np.sqrt(2.0 / k) * cur - np.sqrt((k - 1) / k) * prev
        return cur


def hermite_psi(n, q, hbar=1.0):
    """Normalized n-th oscillator eigenfunction at position q.

    Evaluated by the upward three-term recurrence on psi_k itself (the
    Gaussian is folded in, so no factorials or raw Hermite polynomials are
    materialized).  Raises :class:`RangeError` outside the validated range:
    recurrence orders beyond 6000, or Gaussian exponents that underflow.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > _MAX_HERMITE_ORDER:
        raise RangeError(f"recurrence order n={n} beyond validated range {_MAX_HERMITE_ORDER}")
    if np.max(np.asarray(q) ** 2) / (2.0 * hbar) > _MAX_GAUSS_EXPONENT:
        raise RangeError("Gaussian exponent q^2/(2 hbar) underflows double precision")
    out = _hermite_psi_array(n, q, hbar)
    return float(out) if np.isscalar(q) else out


@lru_cache(maxsize=32)
def _gauss_hermite(order):
    return np.polynomial.hermite.hermgauss(order)


def _weyl_quadrature(m, n, q, p, hbar, order):
    """Single fixed-order Gauss-Hermite evaluation of the Weyl integral."""
    t, w = _gauss_hermite(order)
    y = t * np.sqrt(hbar)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    fm = _hermite_psi_array(m, q[:, None] + y[None, :], hbar)
    fn = _hermite_psi_array(n, q[:, None] - y[None, :], hbar)
    kernel = np.exp(-2j * p[:, None] * y[None, :] / hbar)
    # undo the e^{-t^2} weight folded into psi_m psi_n = e^{-(q^2+y^2)/hbar} * poly
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        integrand = fm * fn * kernel * np.exp(t * t)[None, :]
        integrand = np.where(np.isfinite(integrand), integrand, 0.0)
    return (integrand @ w) * np.sqrt(hbar) / (np.pi * hbar)


def exact_moyal(m, n, x, hbar=1.0, tol=1e-10, max_order=1 << 14, return_order=False):
    """Transition function M_m^n at phase point x = (q, p).

    Computed from the Weyl-transform integral by Gauss-Hermite quadrature,
    starting at order 4 max(m, n) + 40 and doubling until two successive
    orders agree to ``tol``.  Raises :class:`ConvergenceError` when the cap
    is hit first.  The Laguerre closed form (:func:`moyal_closed`) is the
    independent second route against which this one is tested.
    """
    q, p = x
    order = 4 * max(m, n) + 40
    prev = _weyl_quadrature(m, n, q, p, hbar, order)
    while True:
        order *= 2
        if order > max_order:
            raise ConvergenceError(
                f"Weyl quadrature for M_{m}^{n} not converged at order {order // 2}",
                prev, prev,
            )
        cur = _weyl_quadrature(m, n, q, p, hbar, order)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, np.max(np.abs(cur))):
            break
        prev = cur
    val = cur if np.ndim(q) else complex(cur[0])
    return (val, order) if return_order else val


def _laguerre_folded(n, l, u):
    """(-1)^n exp(-u/2) L_n^l(u) by the stable upward recurrence."""
    u = np.asarray(u, dtype=float)
    with np.errstate(under="ignore"):
        g_prev = np.zeros_like(u)
        g = np.exp(-0.5 * u)
        for k in range(1, n + 1):
            g_prev, g = g, (((2 * k - 1 + l) - u) * g - (k - 1 + l) * g_prev) / k
    return g if n % 2 == 0 else -g


def moyal_closed(m, n, q, p, hbar=1.0):
    """Laguerre closed form of M_m^n, vectorized over (q, p).

    For m >= n with l = m - n and u = 2 r^2 / hbar:

        M_m^n = ((-1)^n / pi hbar) sqrt(n!/m!) u^{l/2} e^{i l theta}
                e^{-u/2} L_n^l(u),

    extended to m < n by Hermitian symmetry M_m^n = conj(M_n^m).
    """
    if m < n:
        return np.conj(moyal_closed(n, m, q, p, hbar))
    l = m - n
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    u = 2.0 * (q * q + p * p) / hbar
    norm = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
    radial = norm * np.power(u, 0.5 * l) * _laguerre_folded(n, l, u) / (np.pi * hbar)
    if l == 0:
        return radial
    phase = np.exp(1j * l * np.arctan2(-p, q))
    return radial * phase


def exact_wigner(n, x, hbar=1.0, tol=1e-10):
    """Wigner function of the n-th eigenstate: the m = n diagonal."""
    q, p = x
    return np.real(exact_moyal(n, n, (q, p), hbar, tol=tol))


def wigner_closed(n, q, p, hbar=1.0):
    """Closed-form W_n, vectorized (real diagonal of :func:`moyal_closed`)."""
    return np.real(moyal_closed(n, n, q, p, hbar))


def entangled_wigner_exact(pair: FockPair, x1, x2):
    """Wigner function of the entangled eigenstate at (x1, x2).

    2 W = W_m(x1) W_n(x2) + W_n(x1) W_m(x2) +/- 2 Re{M_m^n(x1) M_n^m(x2)},
    assembled from the closed forms (tested against the Weyl quadrature and
    against a direct two-oscillator Weyl transform).
    """
    h = pair.hbar
    q1, p1 = x1
    q2, p2 = x2
    wm1 = wigner_closed(pair.m, q1, p1, h)
    wn1 = wigner_closed(pair.n, q1, p1, h)
    wm2 = wigner_closed(pair.m, q2, p2, h)
    wn2 = wigner_closed(pair.n, q2, p2, h)
    cross = np.real(moyal_closed(pair.m, pair.n, q1, p1, h)
                    * moyal_closed(pair.n, pair.m, q2, p2, h))
    return 0.5 * (wm1 * wn2 + wn1 * wm2) + pair.sign * cross


def position_power_matrix(k, dimension, hbar=1.0):
    """Fock matrix of q-hat^k for k = 3 or 4.

    Built from the ladder expansion in a padded basis and cropped, so every
    retained element is exact (no truncation leakage into the block).
    """
    if k not in (3, 4):
        raise ValueError("only cubic (k=3) and quartic (k=4) powers are supported")
    padded = dimension + 2 * k
    a = np.diag(np.sqrt(np.arange(1.0, padded)), 1)
    qmat = np.sqrt(hbar / 2.0) * (a + a.T)
    return np.linalg.matrix_power(qmat, k)[:dimension, :dimension]


@dataclass
class TruncatedState:
    """Two-oscillator pure state over the product Fock basis.

    ``coeffs[j, k]`` is the amplitude on |j>|k> with each index below
    ``dimension``.  Unit norm is enforced; the exchange symmetry
    coeffs[j, k] = sign coeffs[k, j] is a property of states built by
    :meth:`from_pair` (a one-sided interaction breaks it).
    """

    dimension: int
    coeffs: np.ndarray
    hbar: float

    def __post_init__(self):
        if self.coeffs.shape != (self.dimension, self.dimension):
            raise ValueError("coefficient matrix shape mismatch")
        norm = np.sum(np.abs(self.coeffs) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-12")

    @classmethod
    def from_pair(cls, pair: FockPair, dimension=None):
        dim = dimension if dimension is not None else pair.m + pair.n + 32
        if dim <= pair.m:
            raise ValueError("dimension must exceed the top occupied level")
        c = np.zeros((dim, dim), dtype=complex)
        c[pair.m, pair.n] = 1.0 / np.sqrt(2.0)
        c[pair.n, pair.m] = pair.sign / np.sqrt(2.0)
        return cls(dimension=dim, coeffs=c, hbar=pair.hbar)

    def exchange_defect(self, sign):
        """Max deviation from coeffs = sign * coeffs.T."""
        return float(np.max(np.abs(self.coeffs - sign * self.coeffs.T)))

    def reduced_density(self, which=1):
        """Partial trace over the other oscillator."""
        c = self.coeffs
        return c @ c.conj().T if which == 1 else c.T @ c.conj()

    def occupation(self, which=2):
        """Level populations of one oscillator."""
        axis = 0 if which == 2 else 1
        return np.sum(np.abs(self.coeffs) ** 2, axis=axis)


def wigner_of_density(rho, grid: PolarGrid, hbar):
    """Wigner transform of a Fock-basis density matrix on a polar grid.

    Uses the diagonal-by-diagonal Laguerre structure: contributions with
    j - k = L share the angular factor exp(i L theta), so the transform
    factorizes into N radial profiles followed by one complex matmul.
    """
    dim = rho.shape[0]
    r = grid.r
    u = 2.0 * r * r / hbar
    log_u = np.log(np.where(u > 0, u, 1.0))
    profiles = np.zeros((dim, len(r)), dtype=complex)
    for ll in range(dim):
        diag = np.diagonal(rho, offset=-ll) if ll else np.real(np.diagonal(rho))
        # diag[nn] = rho[nn + ll, nn]
        nmax = dim - ll
        # u^{ll/2} and 1/sqrt(ll!) are folded into the recurrence seed so no
        # intermediate overflows for large offsets; the remaining n-dependent
        # normalization ratio 1/sqrt(C(n+ll, n)) never exceeds one
        ratio = np.exp(0.5 * (gammaln(np.arange(nmax) + 1) + gammaln(ll + 1)
                              - gammaln(np.arange(nmax) + ll + 1)))
        with np.errstate(under="ignore"):
            seed = np.exp(0.5 * ll * log_u - 0.5 * u - 0.5 * gammaln(ll + 1))
            if ll > 0:
                seed = np.where(u > 0, seed, 0.0)
            g_prev = np.zeros_like(u)
            g = seed
            acc = np.zeros(len(r), dtype=complex)
            sign = 1.0
            for nn in range(nmax):
                if nn > 0:
                    g_prev, g = g, (((2 * nn - 1 + ll) - u) * g - (nn - 1 + ll) * g_prev) / nn
                    sign = -sign
                if diag[nn] != 0.0:
                    acc = acc + (diag[nn] * ratio[nn] * sign) * g
        profiles[ll] = acc
    phases = np.exp(1j * np.outer(np.arange(dim), grid.theta))
    field = np.real(profiles[0])[:, None] + 2.0 * np.real(profiles[1:].T @ phases[1:])
    return field / (np.pi * hbar)
