"""Phase-space grids, sampled fields, and their plain-text dump format.

Angle convention used throughout the package: the polar angle ``theta`` is
measured along the direction of the harmonic flow, i.e.

    q = r cos(theta),   p = -r sin(theta),

so that a point advances as theta -> theta + t under the oscillator
Hamiltonian (p^2 + q^2)/2.  With this choice the transition function of
``|m><n|`` carries the angular factor exp(i l theta) with l = m - n > 0,
and its quantum phase exp(-i l t) is exactly the classical transport of
that factor.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


def polar_to_cart(r, theta):
    """Map (r, theta) to (q, p) in the flow-direction angle convention."""
    return r * np.cos(theta), -r * np.sin(theta)


def cart_to_polar(q, p):
    """Inverse of :func:`polar_to_cart`; theta canonicalized to [0, 2pi)."""
    r = np.hypot(q, p)
    theta = np.mod(np.arctan2(-p, q), 2.0 * np.pi)
    return r, theta


@dataclass(frozen=True)
class PolarGrid:
    """Tensor-product polar grid with quadrature weights.

    Radial nodes are uniform on [r_min, r_max]; angular nodes are uniform
    on [0, 2pi).  The weights implement the area element r dr dtheta with
    a trapezoid rule radially (exact for the linear factor r) and the
    periodic rectangle rule in angle, so the weights sum to the exact
    annulus area up to roundoff.
    """

    r: np.ndarray
    theta: np.ndarray
    weights: np.ndarray = field(repr=False)
    r_lo: float = None
    r_hi: float = None

    def __post_init__(self):
        if self.r_lo is None:
            object.__setattr__(self, "r_lo", float(self.r[0]))
        if self.r_hi is None:
            object.__setattr__(self, "r_hi", float(self.r[-1]))

    @classmethod
    def build(cls, r_min, r_max, nr, ntheta, min_harmonic=0):
        if ntheta < max(8 * min_harmonic, 4):
            raise ValueError(
                f"ntheta={ntheta} cannot resolve harmonic l={min_harmonic}; "
                f"need at least {max(8 * min_harmonic, 4)}"
            )
        r = np.linspace(r_min, r_max, nr)
        theta = np.arange(ntheta) * (2.0 * np.pi / ntheta)
        wr = np.full(nr, r[1] - r[0] if nr > 1 else (r_max - r_min))
        if nr > 1:
            wr[0] *= 0.5
            wr[-1] *= 0.5
        w = np.outer(wr * r, np.full(ntheta, 2.0 * np.pi / ntheta))
        return cls(r=r, theta=theta, weights=w, r_lo=float(r_min), r_hi=float(r_max))

    @classmethod
    def build_gauss(cls, r_min, r_max, panels, order, ntheta, min_harmonic=0):
        """Radial Gauss-Legendre panels (weights include the factor r)."""
        if ntheta < max(8 * min_harmonic, 4):
            raise ValueError(
                f"ntheta={ntheta} cannot resolve harmonic l={min_harmonic}"
            )
        nodes, wts = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(r_min, r_max, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        r = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        wr = (half[:, None] * wts[None, :]).ravel() * r
        theta = np.arange(ntheta) * (2.0 * np.pi / ntheta)
        w = np.outer(wr, np.full(ntheta, 2.0 * np.pi / ntheta))
        return cls(r=r, theta=theta, weights=w, r_lo=float(r_min), r_hi=float(r_max))

    @property
    def mesh(self):
        return np.meshgrid(self.r, self.theta, indexing="ij")

    @property
    def cart_mesh(self):
        rr, tt = self.mesh
        return polar_to_cart(rr, tt)

    def area(self):
        return float(self.weights.sum())

    def integrate(self, values):
        return float(np.sum(self.weights * values))


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform rectangular grid over (q, p) with cell-area weights."""

    q: np.ndarray
    p: np.ndarray
    weights: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, q_lim, p_lim, nq, npk):
        q = np.linspace(-q_lim, q_lim, nq)
        p = np.linspace(-p_lim, p_lim, npk)
        wq = np.full(nq, q[1] - q[0])
        wq[0] *= 0.5
        wq[-1] *= 0.5
        wp = np.full(npk, p[1] - p[0])
        wp[0] *= 0.5
        wp[-1] *= 0.5
        return cls(q=q, p=p, weights=np.outer(wq, wp))

    @property
    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    def area(self):
        return float(self.weights.sum())

    def integrate(self, values):
        return float(np.sum(self.weights * values))


@dataclass
class PhaseSpaceField:
    """A sampled real or complex function on a phase-space grid.

    ``metadata`` records at least hbar, the (m, n, sign) labels, the channel
    tag and the evolution time of the samples.
    """

    grid: PolarGrid | CartesianGrid
    values: np.ndarray
    metadata: dict

    def __post_init__(self):
        axes = (
            (len(self.grid.r), len(self.grid.theta))
            if isinstance(self.grid, PolarGrid)
            else (len(self.grid.q), len(self.grid.p))
        )
        if self.values.shape != axes:
            raise ValueError(f"values shape {self.values.shape} != grid shape {axes}")
        area = self.grid.area()
        if isinstance(self.grid, PolarGrid):
            r0, r1 = self.grid.r_lo, self.grid.r_hi
            exact = np.pi * (r1 * r1 - r0 * r0)
        else:
            exact = (self.grid.q[-1] - self.grid.q[0]) * (self.grid.p[-1] - self.grid.p[0])
        if abs(area - exact) > 1e-10 * max(1.0, exact):
            raise ValueError(f"weights sum {area} != domain area {exact}")

    @property
    def is_polar(self):
        return isinstance(self.grid, PolarGrid)

    def integrate(self):
        return complex(np.sum(self.grid.weights * self.values)) if np.iscomplexobj(
            self.values
        ) else self.grid.integrate(self.values)


def _meta_lines(metadata, extra):
    items = dict(metadata)
    items.update(extra)
    return [f"# {k} = {items[k]!r}" for k in sorted(items)]


def write_field(fld: PhaseSpaceField, path):
    """Dump a field as '#'-headed plain text.

    Real fields are (r, theta, value) or (q, p, value) triplets; complex
    fields carry a fourth column with the imaginary part (declared in the
    'columns' header entry).
    """
    buf = io.StringIO()
    complex_vals = np.iscomplexobj(fld.values)
    if fld.is_polar:
        cols = "r theta re im" if complex_vals else "r theta value"
        a1, a2 = fld.grid.mesh
    else:
        cols = "q p re im" if complex_vals else "q p value"
        a1, a2 = fld.grid.mesh
    head = _meta_lines(
        fld.metadata,
        {
            "kind": "polar" if fld.is_polar else "cartesian",
            "columns": cols,
            "shape": fld.values.shape,
        },
    )
    buf.write("\n".join(head) + "\n")
    flat1, flat2, vals = a1.ravel(), a2.ravel(), fld.values.ravel()
    if complex_vals:
        for x, y, v in zip(flat1, flat2, vals):
            buf.write(f"{float(x)!r} {float(y)!r} {float(v.real)!r} {float(v.imag)!r}\n")
    else:
        for x, y, v in zip(flat1, flat2, vals):
            buf.write(f"{float(x)!r} {float(y)!r} {float(v)!r}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_field(path):
    """Parse a dump produced by :func:`write_field`.

    Returns (header dict, data array with one row per sample).
    """
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                header[key.strip()] = val.strip()
            else:
                rows.append([float(tok) for tok in line.split()])
    return header, np.asarray(rows)
