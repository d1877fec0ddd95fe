"""Experiment commands: each takes a validated config and writes files.

Every command returns the manifest dict it wrote. Data files are pure
functions of the config; only ``run.wall_seconds`` in the manifest varies
between reruns.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..families import entropy_estimate, tent_periodic_count
from ..rotation import annulus_rotation_check, tongue_raster
from ..suspension import (
    FattenedMap,
    attract_cloud,
    attract_cover,
    continuity_scan,
    periodic_match,
)
from . import io
from .config import ExperimentConfig, serialize_config

CLOUD_HEADER = ("seed_index", "iter", "x_or_theta", "y_or_r")
TONGUE_HEADER = ("b", "omega", "lo", "hi", "tol", "member")
INTERVAL_HEADER = ("b", "omega", "lo", "hi", "halfwidth")
ORBIT_HEADER = ("orbit", "theta0", "r0", "rotation_number", "inside")
CONTINUITY_HEADER = ("t", "hausdorff")
PERIODIC_HEADER = ("period", "tent_count", "converged", "distinct", "matched",
                   "max_residual", "max_spine_offset")
ENTROPY_HEADER = ("n", "count", "estimate", "log_s")


def _fattened(cfg: ExperimentConfig, t=None) -> FattenedMap:
    return FattenedMap(cfg.param(t), cfg.delta, cfg.eps, cfg.theta0)


def _finish(cfg: ExperimentConfig, out: Path, files: list[Path], extra: dict, t0: float) -> dict:
    entries = {"tool.name": "invlimit", "tool.version": __version__}
    for line in serialize_config(cfg).splitlines():
        k, v = line.split("=", 1)
        entries[f"config.{k}"] = v
    entries.update({f"result.{k}": v for k, v in extra.items()})
    for f in files:
        entries[f"output.{f.name}.sha256"] = io.sha256_file(f)
    entries["run.wall_seconds"] = f"{time.perf_counter() - t0:.3f}"
    io.write_manifest(out / "manifest.txt", entries)
    return entries


def cmd_attractor(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.out_dir)
    F = _fattened(cfg)
    cloud = attract_cloud(F, cfg.seeds, cfg.transient, cfg.keep, cfg.seed)
    rows = zip(cloud.seed_index, cloud.iteration, cloud.points[:, 0], cloud.points[:, 1])
    files = [io.write_csv(out / "cloud.csv", CLOUD_HEADER, rows)]
    extra = {"points": len(cloud), "cloud_diameter": "%.17g" % cloud.diameter}
    if cfg.cover_resolution:
        cover = attract_cover(F, cfg.cover_resolution, cfg.cover_steps)
        # image rows run top (y = +1) to bottom, columns along x / theta
        files.append(io.write_ppm(out / "cover.ppm", cover.occupied.T[::-1]))
        extra["cover_cells"] = cover.count
    return _finish(cfg, out, files, extra, t0)


def cmd_tongues(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.out_dir)
    R = tongue_raster(cfg.r, cfg.b_max, cfg.res_b, cfg.res_omega, n=cfg.n,
                      grid_res=cfg.grid_res, b_min=cfg.b_min, omega_min=cfg.omega_min,
                      omega_max=cfg.omega_max)
    B, W = np.meshgrid(R.b_grid, R.omega_grid, indexing="ij")
    T = np.broadcast_to(R.tol[:, None], R.shape)
    rows = zip(B.ravel(), W.ravel(), R.lo.ravel(), R.hi.ravel(), T.ravel(), R.member.ravel())
    files = [io.write_ppm(out / "tongue.ppm", R.member),
             io.write_csv(out / "tongue.csv", TONGUE_HEADER, rows)]
    extra = {"width": cfg.res_omega, "height": cfg.res_b, "members": int(R.member.sum())}
    return _finish(cfg, out, files, extra, t0)


def cmd_rotation(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.out_dir)
    F = _fattened(cfg)
    rep = annulus_rotation_check(F, cfg.seeds, cfg.n, cfg.seed, grid_res=cfg.grid_res)
    I = rep.interval
    b, w = F.param.values
    inside = I.contains(rep.samples, rep.tol)
    rows = [(i, s[0], s[1], r, ok)
            for i, (s, r, ok) in enumerate(zip(rep.starts, rep.samples, inside))]
    files = [io.write_csv(out / "rotation_interval.csv", INTERVAL_HEADER,
                          [(b, w, I.lo, I.hi, I.halfwidth)]),
             io.write_csv(out / "rotation_orbits.csv", ORBIT_HEADER, rows)]
    lo_gap, hi_gap = rep.endpoint_gaps()
    extra = {"interval": f"{I.lo!r},{I.hi!r}", "all_inside": rep.all_inside,
             "endpoint_gaps": f"{lo_gap!r},{hi_gap!r}",
             "periodic_orbits": ";".join(rep.periodic) or "none",
             "summary": rep.summary()}
    return _finish(cfg, out, files, extra, t0)


def cmd_continuity(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.out_dir)
    ex = ThreadPoolExecutor(threads) if threads and threads > 1 else None
    try:
        scan = continuity_scan(cfg.param, cfg.grid(), cfg.delta, cfg.eps, cfg.seeds,
                               cfg.transient, cfg.keep, cfg.seed, cfg.theta0, executor=ex)
    finally:
        if ex is not None:
            ex.shutdown()
    files = [io.write_csv(out / "continuity.csv", CONTINUITY_HEADER, scan.rows())]
    extra = {"rows": len(scan.distances), "max_hausdorff": "%.17g" % scan.max_distance,
             "unstable": ",".join(f"{t:g}" for t in scan.unstable) or "none"}
    return _finish(cfg, out, files, extra, t0)


def cmd_periodic(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.out_dir)
    reps = periodic_match(_fattened(cfg), cfg.max_period)
    rows = [(r.period, r.tent_count, r.converged, r.distinct, r.matched, r.max_residual,
             r.max_spine_offset) for r in reps]
    files = [io.write_csv(out / "periodic.csv", PERIODIC_HEADER, rows)]
    extra = {"all_matched": all(r.ok for r in reps)}
    return _finish(cfg, out, files, extra, t0)


def cmd_entropy(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.out_dir)
    p = cfg.param()
    if p.kind != "tent":
        raise ValueError("family.kind: entropy is computed for the tent family")
    s = p.values[0]
    rows = [(n, tent_periodic_count(s, n), entropy_estimate(s, n), math.log(s))
            for n in range(4, cfg.entropy_n + 1)]
    files = [io.write_csv(out / "entropy.csv", ENTROPY_HEADER, rows)]
    extra = {"estimate": "%.17g" % rows[-1][2]}
    return _finish(cfg, out, files, extra, t0)


COMMANDS = {
    "attractor": cmd_attractor,
    "tongues": cmd_tongues,
    "rotation": cmd_rotation,
    "continuity": cmd_continuity,
    "periodic": cmd_periodic,
    "entropy": cmd_entropy,
}
