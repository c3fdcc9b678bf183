"""File interfaces: grid cache, CSV exports, corpus manifest."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .homtype import BoundaryGrid

CACHE_VERSION = 1

__all__ = [
    "grid_cache_key",
    "save_boundary_grid",
    "load_boundary_grid",
    "cached_boundary_grid",
    "region_to_csv",
    "dbar_field_to_csv",
    "corpus_manifest",
]


def grid_cache_key(domain, t, resolution):
    payload = json.dumps({"domain": domain.key(), "t": float(t),
                          "resolution": resolution}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def save_boundary_grid(grid, cache_dir):
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = grid_cache_key(grid.domain, grid.level, grid.resolution)
    header = json.dumps({"version": CACHE_VERSION,
                         "domain": grid.domain.key(),
                         "t": grid.level,
                         "resolution": list(grid.resolution)},
                        sort_keys=True)
    np.savez(cache_dir / f"grid_{key}.npz",
             header=np.frombuffer(header.encode(), dtype=np.uint8),
             nodes=grid.nodes, grad=grid.grad, w_sigma=grid.w_sigma,
             w_S=grid.w_S, density=grid.density, pair_self=grid.pair_self)
    return cache_dir / f"grid_{key}.npz"


def load_boundary_grid(domain, t, resolution, cache_dir):
    path = Path(cache_dir) / \
        f"grid_{grid_cache_key(domain, t, resolution)}.npz"
    if not path.exists():
        return None
    data = np.load(path)
    header = json.loads(bytes(data["header"]).decode())
    if header.get("version") != CACHE_VERSION:
        return None
    return BoundaryGrid(domain=domain, level=float(t), nodes=data["nodes"],
                        grad=data["grad"], w_sigma=data["w_sigma"],
                        w_S=data["w_S"], density=data["density"],
                        pair_self=data["pair_self"],
                        resolution=tuple(header["resolution"]))


def cached_boundary_grid(domain, t, resolution, cache_dir):
    """Build-or-load a boundary grid through the binary cache."""
    from .homtype import build_boundary_grid
    grid = load_boundary_grid(domain, t, resolution, cache_dir)
    if grid is None:
        grid = build_boundary_grid(domain, t, resolution)
        save_boundary_grid(grid, cache_dir)
    return grid


def region_to_csv(sample, path):
    """Region sample rows (point components, height, weight)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        n = sample.points.shape[1]
        w.writerow([f"tau_{j}_{p}" for j in range(1, n + 1)
                    for p in ("re", "im")] + ["rho", "weight"])
        for pt, rho, wt in zip(sample.points, sample.rho, sample.weights):
            row = []
            for c in pt:
                row += [repr(c.real), repr(c.imag)]
            w.writerow(row + [repr(float(rho)), repr(float(wt))])
    return path


def dbar_field_to_csv(cont, shell, path):
    """dbar components of a continuation over a shell grid, one row a node."""
    pts, _, w_mu, lev = shell.flat()
    dbar = cont.dbar_eval(pts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        n = pts.shape[1]
        w.writerow([f"z_{j}_{p}" for j in range(1, n + 1)
                    for p in ("re", "im")]
                   + ["rho", "w_mu"]
                   + [f"dbar_{j}_{p}" for j in range(1, n + 1)
                      for p in ("re", "im")])
        for pt, rho, wm, db in zip(pts, lev, w_mu, dbar):
            row = []
            for c in pt:
                row += [repr(c.real), repr(c.imag)]
            row += [repr(float(rho)), repr(float(wm))]
            for c in db:
                row += [repr(c.real), repr(c.imag)]
            w.writerow(row)
    return path


def corpus_manifest(entries, path=None):
    """JSON manifest: label, family, parameters, oracle labels."""
    payload = []
    for e in entries:
        payload.append({
            "label": e.f.label,
            "family": e.family,
            "params": {k: (float(v) if np.isscalar(v) else list(v))
                       for k, v in e.params.items()},
            "oracle_labels": {f"l{l}_p{p:g}": lab
                              for (l, p), lab in e.oracle_label.items()},
        })
    blob = json.dumps(payload, sort_keys=True, indent=2)
    if path is not None:
        Path(path).write_text(blob + "\n")
    return blob
