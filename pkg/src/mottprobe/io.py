"""CSV/JSON/SVG export. Every file is written to a temporary sibling and renamed into place."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import CurrentTrace, SpectrumResult
from .meanfield import PhaseDiagramGrid

PHASE_HEADER = ["mu_over_u", "kappa_over_u", "psi", "source", "flags", "zkappa_over_u"]
POINT_HEADER = [
    "mu_over_u",
    "kappa_over_u",
    "u",
    "mu",
    "ground_energy",
    "sector",
    "j_m",
    "omega_star",
    "psi_b",
    "psi_a",
    "condensate_a",
    "norm_drift",
    "number_drift",
    "cap_change",
    "flags",
    "error",
]


def atomic_write(path, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    # repr round-trips floats exactly
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_trace_csv(trace: CurrentTrace, path) -> Path:
    return atomic_write(path, _csv(["t", "J"], zip(trace.times, trace.values, strict=True)))


def write_spectrum_csv(spectrum: SpectrumResult, path) -> Path:
    return atomic_write(path, _csv(["omega", "J_omega"], zip(spectrum.omegas, spectrum.values, strict=True)))


def write_trajectory_csv(traj, current: CurrentTrace, path) -> Path:
    """Two-mode amplitude trajectory: t, Re/Im phi_a, Re/Im phi_b, z, Theta, J."""
    header = ["t", "re_phi_a", "im_phi_a", "re_phi_b", "im_phi_b", "z", "theta", "J"]
    rows = zip(
        traj.times,
        traj.phi_a.real,
        traj.phi_a.imag,
        traj.phi_b.real,
        traj.phi_b.imag,
        traj.z,
        traj.theta,
        current.values,
        strict=True,
    )
    return atomic_write(path, _csv(header, rows))


def write_phase_diagram_csv(grid: PhaseDiagramGrid, path) -> Path:
    rows = []
    for i, m in enumerate(grid.mu_over_u):
        for j, k in enumerate(grid.kappa_over_u):
            rows.append((m, k, grid.psi[i, j], grid.source, grid.flags[i, j] or "", grid.coordination * k))
    return atomic_write(path, _csv(PHASE_HEADER, rows))


def read_phase_diagram_csv(path) -> PhaseDiagramGrid:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        if reader.fieldnames is None or not set(PHASE_HEADER[:4]) <= set(reader.fieldnames):
            raise ValueError(f"{path}: not a phase-diagram CSV")
    if not rows:
        raise ValueError(f"{path}: phase diagram has no rows")
    mus = sorted({float(r["mu_over_u"]) for r in rows})
    kappas = sorted({float(r["kappa_over_u"]) for r in rows})
    mi = {m: i for i, m in enumerate(mus)}
    ki = {k: j for j, k in enumerate(kappas)}
    psi = np.full((len(mus), len(kappas)), np.nan)
    flags = np.full(psi.shape, "", dtype=object)
    for r in rows:
        i, j = mi[float(r["mu_over_u"])], ki[float(r["kappa_over_u"])]
        psi[i, j] = float(r["psi"])
        flags[i, j] = r.get("flags", "") or ""
    sources = {r["source"] for r in rows}
    if len(sources) != 1:
        raise ValueError(f"{path}: mixed sources {sorted(sources)}")
    coordination = 2
    if "zkappa_over_u" in rows[0] and kappas[0] != 0:
        r0 = next(r for r in rows if float(r["kappa_over_u"]) != 0)
        coordination = int(round(float(r0["zkappa_over_u"]) / float(r0["kappa_over_u"])))
    return PhaseDiagramGrid(mus, kappas, psi, sources.pop(), coordination, {}, flags)


def write_points_csv(record, path) -> Path:
    rows = [
        [getattr(pt, name) if name != "flags" else ";".join(pt.flags) for name in POINT_HEADER] for pt in record.points
    ]
    return atomic_write(path, _csv(POINT_HEADER, rows))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def versions() -> dict:
    import matplotlib
    import scipy

    return {
        "mottprobe": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
    }


def write_run_meta(path, config: dict, extra: dict | None = None, include_timing: bool = True) -> Path:
    """JSON run metadata: config echo, package versions and anything in ``extra``."""
    doc = {"config": config, "versions": versions()}
    if extra:
        doc.update(extra)
    if not include_timing:
        doc.pop("wall_time", None)
    return atomic_write(path, json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def write_heatmap_svg(grid: PhaseDiagramGrid, path, overlay: PhaseDiagramGrid | None = None, levels=None) -> Path:
    """Heatmap of psi over (kappa/U, mu/U), optionally with contour lines of a second map."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "mottprobe"

    fig, ax = plt.subplots(figsize=(5, 4))
    psi = np.ma.masked_invalid(grid.psi)
    if psi.size:
        x, y = grid.kappa_over_u, grid.mu_over_u
        mesh = ax.pcolormesh(x, y, psi, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=f"psi ({grid.source})")
        if overlay is not None and min(overlay.psi.shape) >= 2:
            cs = ax.contour(
                overlay.kappa_over_u,
                overlay.mu_over_u,
                np.ma.masked_invalid(overlay.psi),
                levels=levels if levels is not None else 5,
                colors="white",
                linewidths=0.8,
            )
            ax.clabel(cs, fontsize=6)
    ax.set_xlabel("kappa/U")
    ax.set_ylabel("mu/U")
    buf = io.BytesIO()
    # fixed metadata keeps the SVG byte-identical between runs
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return atomic_write(path, buf.getvalue())
