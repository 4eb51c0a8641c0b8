"""Figure rendering for the report path (file output only, Agg backend)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_polar_field(fld, path, title=None):
    """Heat map of a (real part of a) polar field in the (q, p) plane."""
    qq, pp = fld.grid.cart_mesh
    vals = np.real(fld.values)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    # close the angular seam for display
    qc = np.concatenate([qq, qq[:, :1]], axis=1)
    pc = np.concatenate([pp, pp[:, :1]], axis=1)
    vc = np.concatenate([vals, vals[:, :1]], axis=1)
    m = ax.pcolormesh(qc, pc, vc, shading="gouraud", cmap="RdBu_r")
    lim = float(np.max(np.abs(vals))) or 1.0
    m.set_clim(-lim, lim)
    fig.colorbar(m, ax=ax)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_radial_comparison(r, exact_vals, semi_vals, path, title=None):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(r, exact_vals, label="exact", lw=1.2)
    ax.plot(r, semi_vals, label="semiclassical", lw=1.0, ls="--")
    ax.set_xlabel("r")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_norms(records, path):
    """log-log |delta W^1| versus epsilon, one line per (method, kind, hbar)."""
    groups = {}
    for rec in records:
        if rec.get("deltaw_maxabs") is None:
            continue
        k = (rec["method"], rec["kind"], rec["hbar"])
        groups.setdefault(k, []).append((rec["eps"], rec["deltaw_maxabs"]))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (method, kind, hbar), pts in sorted(groups.items()):
        pts = sorted(pts)
        eps = [p[0] for p in pts]
        norms = [max(p[1], 1e-300) for p in pts]
        ax.loglog(eps, norms, marker="o", ms=3,
                  label=f"{method}/{kind}/hbar={hbar:g}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("max |delta W1|")
    ax.legend(frameon=False, fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_airy_rows(rows, path):
    """Toy integral against the Airy reference along an hbar list."""
    hb = [r["hbar"] for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.4))
    axes[0].loglog(hb, [abs(r["toy"]) for r in rows], marker="o", label="|toy integral|")
    axes[0].loglog(hb, [abs(r["airy"]) for r in rows], marker="s", label="|Airy reference|")
    axes[0].set_xlabel("hbar")
    axes[0].legend(frameon=False, fontsize=7)
    axes[1].loglog(hb, [r["rel_err"] for r in rows], marker="o", color="k")
    axes[1].set_xlabel("hbar")
    axes[1].set_ylabel("relative error")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_convergence(rows, path):
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    labels = [f'{r["method"]}/{r["kind"]}/h={r["hbar"]:g}' for r in rows]
    fractions = [r["converged_fraction"] for r in rows]
    ax.barh(range(len(rows)), fractions)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=6)
    ax.set_xlabel("converged fraction")
    ax.set_xlim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
