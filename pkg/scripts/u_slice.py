"""Josephson-current probe along mu/U = 1/2 as U grows.

Writes the per-point table, the spectrum peak and drift columns, plus the current traces and
spectra of the two endpoints. Run with ``python scripts/u_slice.py --out out/slice``.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from pathlib import Path

from mottprobe import io as mio
from mottprobe.config import load_config
from mottprobe.pipeline import measure_point, run_protocol


@dataclass
class SliceConfig:
    mu_over_u: float = 0.5
    u_min: float = 0.5
    u_max: float = 20.0
    u_steps: int = 40
    workers: int = 1
    out: Path = Path("out/slice")
    extra: list[str] = field(default_factory=list)

    def overrides(self) -> list[str]:
        return [
            "grid.mode=slice",
            f"grid.slice_mu_over_u={self.mu_over_u}",
            f"grid.u_min={self.u_min}",
            f"grid.u_max={self.u_max}",
            f"grid.u_steps={self.u_steps}",
            f"output.workers={self.workers}",
            f"output.directory={self.out}",
            *self.extra,
        ]


def main(sc: SliceConfig) -> None:
    cfg = load_config(overrides=sc.overrides())
    start = time.perf_counter()
    record, _ = run_protocol(cfg)
    sc.out.mkdir(parents=True, exist_ok=True)
    mio.write_points_csv(record, sc.out / "points.csv")
    for u in (sc.u_min, sc.u_max):
        detail = measure_point(cfg, sc.mu_over_u, cfg.params.kappa / u, u, sc.mu_over_u * u)
        mio.write_trace_csv(detail.trace, sc.out / f"trace_U{u:g}.csv")
        mio.write_spectrum_csv(detail.spectrum, sc.out / f"spectrum_U{u:g}.csv")
    mio.write_run_meta(sc.out / "run.meta", cfg.to_dict(), {"wall_time": time.perf_counter() - start})

    print(f"{'U':>8} {'J_m':>10} {'omega*':>7} {'psi_a':>9}  flags")
    for pt in sorted(record.points, key=lambda p: p.u):
        print(f"{pt.u:8.3f} {pt.j_m:10.4g} {pt.omega_star:7g} {pt.psi_a:9.4g}  {';'.join(pt.flags)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=SliceConfig.out)
    ap.add_argument("--u-steps", type=int, default=SliceConfig.u_steps)
    ap.add_argument("--workers", type=int, default=SliceConfig.workers)
    ap.add_argument("--set", action="append", default=[], metavar="BLOCK.FIELD=VALUE")
    a = ap.parse_args()
    main(SliceConfig(u_steps=a.u_steps, workers=a.workers, out=a.out, extra=a.set))
