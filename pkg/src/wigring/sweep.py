"""Parameter sweeps over (lambda, epsilon, hbar) with resumable persistence.

One record per (hbar, epsilon, kind, method).  Records are flushed to a
JSONL work file as they complete, so an interrupted sweep resumes from the
last flushed record; canonical outputs (CSV and schema-versioned JSON) are
deterministic byte-for-byte given the same config and seed.  Wall-clock
times go to a sidecar log, never into the canonical files.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chords import InteractionSpec
from .fock import FockPair
from .grids import polar_to_cart
from .propagate import default_x1_grid, delta_w1, semiclassical_evolve
from .quadrature import QuadSpec
from .semiclassic import caustic_radii

SCHEMA = "wigring.sweep.v1"

RECORD_FIELDS = [
    "key", "schema", "mode", "hbar", "eps", "kind", "method", "sign", "t",
    "flow_mode", "m", "n", "l", "lam", "e_m", "e_n", "rounded", "status",
    "deltaw_maxabs", "deltaw_l1", "estimate", "refine_gap",
    "unit_m_0", "unit_m_t", "unit_n_0", "unit_n_t",
    "cross_double_integral", "probe_theta", "probe_asymmetry", "error",
]


@dataclass
class SweepConfig:
    """Scan specification; the defaults are the starter experiment.

    In 'fixed_energies' mode (2m+1) hbar and (2n+1) hbar are held at
    2 e_m and 2 e_n across the hbar list, with m, n rounded to the nearest
    integers and the rounding recorded per record.
    """

    mode: str = "fixed_energies"
    e_m: float = 14.5
    e_n: float = 10.5
    m: int | None = None
    n: int | None = None
    hbar_list: tuple = (1.0, 0.5, 0.25, 0.125)
    eps_list: tuple = (1e-3, 1e-2, 5e-2)
    kinds: tuple = ("cubic", "quartic")
    methods: tuple = ("exact", "liouville", "semiclassical")
    sign: int = +1
    t: float = 1.0
    flow_mode: str = "perturbation"
    radial_panels: int = 24
    gauss_order: int = 10
    angular_samples: int = 64
    tolerance: float = 1e-8
    max_refinements: int = 3
    x1_panels: int = 16
    x1_order: int = 8
    outdir: str | None = None
    seed: int = 20250808

    def __post_init__(self):
        if self.mode not in ("fixed_energies", "fixed_quanta"):
            raise ValueError("mode must be 'fixed_energies' or 'fixed_quanta'")
        if self.mode == "fixed_quanta" and (self.m is None or self.n is None):
            raise ValueError("fixed_quanta mode needs explicit m and n")
        self.hbar_list = tuple(float(h) for h in self.hbar_list)
        self.eps_list = tuple(float(e) for e in self.eps_list)
        self.kinds = tuple(self.kinds)
        self.methods = tuple(self.methods)

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def quad_spec(self):
        return QuadSpec(
            radial_panels=self.radial_panels,
            gauss_order=self.gauss_order,
            angular_samples=self.angular_samples,
            tolerance=self.tolerance,
            max_refinements=self.max_refinements,
        )

    def resolve_pair(self, hbar):
        """(m, n, rounded?) for one hbar row."""
        if self.mode == "fixed_quanta":
            return int(self.m), int(self.n), False
        m_exact = (2.0 * self.e_m / hbar - 1.0) / 2.0
        n_exact = (2.0 * self.e_n / hbar - 1.0) / 2.0
        m = int(np.round(m_exact))
        n = int(np.round(n_exact))
        rounded = abs(m - m_exact) > 1e-9 or abs(n - n_exact) > 1e-9
        return m, n, rounded


def record_key(hbar, eps, kind, method):
    return f"hbar={hbar!r}|eps={eps!r}|kind={kind}|method={method}"


def _stable_seed(base_seed, key):
    digest = hashlib.sha256(key.encode()).digest()
    return (int.from_bytes(digest[:8], "big") ^ base_seed) % (2**63)


def run_point(config: SweepConfig, hbar, eps, kind, method):
    """Compute one sweep record; kernel errors are captured, not raised."""
    key = record_key(hbar, eps, kind, method)
    m, n, rounded = config.resolve_pair(hbar)
    rec = {
        "key": key, "schema": SCHEMA, "mode": config.mode,
        "hbar": hbar, "eps": eps, "kind": kind, "method": method,
        "sign": config.sign, "t": config.t, "flow_mode": config.flow_mode,
        "m": m, "n": n, "l": m - n, "lam": (m - n) * hbar,
        "e_m": (m + 0.5) * hbar, "e_n": (n + 0.5) * hbar, "rounded": rounded,
        "status": None, "deltaw_maxabs": None, "deltaw_l1": None,
        "estimate": None, "refine_gap": None,
        "unit_m_0": None, "unit_m_t": None, "unit_n_0": None, "unit_n_t": None,
        "cross_double_integral": None, "probe_theta": None,
        "probe_asymmetry": None, "error": None,
    }
    try:
        pair = FockPair(m, n, config.sign, hbar)
        interaction = InteractionSpec(kind, eps, t=config.t)
        grid = default_x1_grid(pair, panels=config.x1_panels, order=config.x1_order)
        rf = delta_w1(pair, interaction, method, grid, config.quad_spec(),
                      sign=config.sign, t=config.t, mode=config.flow_mode)
        rec["status"] = rf.status
        rec["deltaw_maxabs"] = rf.max_abs
        rec["deltaw_l1"] = rf.l1_norm
        if method == "semiclassical":
            d = rf.diagnostics
            rec["estimate"] = d["estimate_field_max"]
            rec["refine_gap"] = d["refine_gap"]
            rec["unit_m_0"] = d["unitarity"]["nu_m_0"]
            rec["unit_m_t"] = d["unitarity"]["nu_m_t"]
            rec["unit_n_0"] = d["unitarity"]["nu_n_0"]
            rec["unit_n_t"] = d["unitarity"]["nu_n_t"]
            rec["cross_double_integral"] = d["cross_double_integral"]
            rng = np.random.default_rng(_stable_seed(config.seed, key))
            rlo, rhi = caustic_radii(pair)
            r_probe = rng.uniform(rlo + 0.3 * (rhi - rlo), rhi - 0.3 * (rhi - rlo))
            th_probe = rng.uniform(0.1, np.pi - 0.1)
            evo = semiclassical_evolve(pair, interaction, sign=config.sign)
            x1p = polar_to_cart(0.5 * (rlo + rhi), 0.0)
            asym = (evo.wigner(x1p, polar_to_cart(r_probe, th_probe))
                    - evo.wigner(x1p, polar_to_cart(r_probe, -th_probe)))
            rec["probe_theta"] = float(th_probe)
            rec["probe_asymmetry"] = float(asym)
        elif method == "exact":
            rec["estimate"] = rf.diagnostics["max_abs_rho_diff"]
        else:
            rec["estimate"] = sum(v["estimate"] for v in rf.convergence.values())
    except Exception as exc:  # captured per record, sweep never aborts
        rec["status"] = "error"
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def _canonical_line(rec):
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def load_jsonl(path):
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def run_sweep(config: SweepConfig, progress=None):
    """Run the scan; resumable via the JSONL work file in config.outdir.

    Records are computed in a bounded worker pool (WIGRING_WORKERS, default
    cpu count) but written strictly in scan order by a single serializer.
    """
    keys = [
        (hbar, eps, kind, method)
        for hbar in config.hbar_list
        for eps in config.eps_list
        for kind in config.kinds
        for method in config.methods
    ]
    done = {}
    jsonl_path = None
    log_path = None
    if config.outdir:
        os.makedirs(config.outdir, exist_ok=True)
        jsonl_path = os.path.join(config.outdir, "records.jsonl")
        log_path = os.path.join(config.outdir, "sweep.log")
        if os.path.exists(jsonl_path):
            for rec in load_jsonl(jsonl_path):
                done[rec["key"]] = rec

    workers = int(os.environ.get("WIGRING_WORKERS", os.cpu_count() or 1))
    pending = [(h, e, k, m) for (h, e, k, m) in keys
               if record_key(h, e, k, m) not in done]
    records = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {record_key(*args): (pool.submit(run_point, config, *args),
                                       time.monotonic())
                   for args in pending}
        out = open(jsonl_path, "a") if jsonl_path is not None else None
        log = open(log_path, "a") if log_path is not None else None
        try:
            # single serializer: flush completed records strictly in scan order
            for args in keys:
                key = record_key(*args)
                if key in done:
                    records.append(done[key])
                    continue
                fut, start = futures[key]
                rec = fut.result()
                records.append(rec)
                if out is not None:
                    out.write(_canonical_line(rec) + "\n")
                    out.flush()
                if log is not None:
                    log.write(f"{key} wall={time.monotonic() - start:.3f}s\n")
                if progress:
                    progress(rec)
        finally:
            if out is not None:
                out.close()
            if log is not None:
                log.close()
    return records


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(records, fmt, path):
    """Write records as 'csv', 'json' (schema-versioned) or 'jsonl'."""
    if fmt == "csv":
        lines = [",".join(RECORD_FIELDS)]
        for rec in records:
            lines.append(",".join(_fmt(rec.get(f)) for f in RECORD_FIELDS))
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = json.dumps({"schema": SCHEMA, "records": records},
                             sort_keys=True, separators=(",", ":")) + "\n"
    elif fmt == "jsonl":
        payload = "\n".join(_canonical_line(r) for r in records) + "\n"
    else:
        raise ValueError(f"unknown emit format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(payload)
    return path


def load_records(path):
    if path.endswith(".jsonl"):
        return load_jsonl(path)
    with open(path) as fh:
        doc = json.load(fh)
    return doc["records"] if isinstance(doc, dict) else doc


def convergence_report(records):
    """Per (hbar, kind, method): converged fraction, worst estimate/value
    ratio, and whether |delta W^1| grows monotonically with epsilon."""
    groups = {}
    for rec in records:
        groups.setdefault((rec["hbar"], rec["kind"], rec["method"]), []).append(rec)
    rows = []
    for (hbar, kind, method), recs in sorted(groups.items()):
        recs = sorted(recs, key=lambda r: r["eps"])
        ok = [r for r in recs if r["status"] in ("converged", "zero-within-estimate")]
        ratios = [
            r["estimate"] / abs(r["deltaw_maxabs"])
            for r in recs
            if r.get("estimate") is not None and r.get("deltaw_maxabs")
        ]
        norms = [r["deltaw_maxabs"] for r in recs if r["deltaw_maxabs"] is not None]
        monotone = all(a <= b * (1 + 1e-9) for a, b in zip(norms, norms[1:])) if len(norms) > 1 else True
        rows.append({
            "hbar": hbar, "kind": kind, "method": method,
            "n_records": len(recs),
            "converged_fraction": len(ok) / len(recs) if recs else 0.0,
            "max_estimate_ratio": max(ratios) if ratios else None,
            "norm_monotone_in_eps": monotone,
        })
    return rows
