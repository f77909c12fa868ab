"""CSV trajectories, JSON run manifests and trajectory comparison."""
import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

FLOAT_FORMAT = "%.17g"


def trajectory_table(traj, coherence_pairs=()):
    """Header and rows for a trajectory: time, site populations, then the
    real and imaginary parts of each requested coherence (1-based pairs)."""
    pops = traj.populations
    n = pops.shape[1]
    header = ["t_fs"] + [f"site{b + 1}" for b in range(n)]
    cols = [traj.times[:, None], pops]
    for b, c in coherence_pairs:
        if not (1 <= b <= n and 1 <= c <= n):
            raise ConfigError("--coherences", f"site pair ({b}, {c}) outside 1..{n}")
        header += [f"re_rho_{b}_{c}", f"im_rho_{b}_{c}"]
        z = traj.rho[:, b - 1, c - 1]
        cols += [z.real[:, None], z.imag[:, None]]
    return header, np.hstack(cols)


def write_csv(target, header, rows):
    """Write to a path or an open text stream."""
    if hasattr(target, "write"):
        target.write(",".join(header) + "\n")
        np.savetxt(target, rows, fmt=FLOAT_FORMAT, delimiter=",")
        return
    with open(target, "w", newline="") as fh:
        write_csv(fh, header, rows)


def read_csv(path):
    """Return ``(header, data)`` for a trajectory CSV."""
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, StopIteration, ValueError) as exc:
        raise ConfigError(str(path), f"cannot read trajectory: {exc}") from None
    if not header or header[0] != "t_fs" or data.shape[1] != len(header):
        raise ConfigError(str(path), "expected a t_fs column followed by one column per series")
    return header, data


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x


def build_manifest(sim, features=None, scenario=None):
    eig = sim.eigensystem
    m = {
        "scenario": scenario,
        "config": sim.config.to_dict(),
        "eigenvalues_cm": eig.energies,
        "eigenvectors": eig.u,
        "gamma_per_fs": sim.rates.gamma,
    }
    if features is not None:
        m["features"] = features.to_dict()
    return _jsonable(m)


def write_manifest(path, manifest):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class Comparison:
    """Differences between two trajectories on a common grid."""

    columns: list
    rms: np.ndarray
    max_abs: np.ndarray
    overall_rms: float
    n_points: int

    def to_dict(self):
        return {
            "columns": {c: {"rms": float(r), "max_abs": float(m)}
                        for c, r, m in zip(self.columns, self.rms, self.max_abs)},
            "overall_rms": self.overall_rms,
            "n_points": self.n_points,
        }


def compare_tables(a, b, columns):
    """Compare two ``(T, 1 + k)`` arrays whose first column is time.

    Both are linearly interpolated onto the coarser of the two grids,
    restricted to the overlap of their time ranges.
    """
    ta, tb = a[:, 0], b[:, 0]
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    if lo > hi:
        raise ConfigError("--compare", f"time ranges do not overlap ({ta[0]:g}-{ta[-1]:g} "
                                       f"vs {tb[0]:g}-{tb[-1]:g} fs)")

    def step(t):
        return np.median(np.diff(t)) if t.size > 1 else np.inf

    grid = ta if step(ta) >= step(tb) else tb
    grid = grid[(grid >= lo) & (grid <= hi)]
    ya = np.column_stack([np.interp(grid, ta, a[:, j]) for j in range(1, a.shape[1])])
    yb = np.column_stack([np.interp(grid, tb, b[:, j]) for j in range(1, b.shape[1])])
    d = ya - yb
    return Comparison(list(columns), np.sqrt(np.mean(d * d, axis=0)),
                      np.max(np.abs(d), axis=0), float(np.sqrt(np.mean(d * d))), grid.size)


def compare_trajectories(path_a, path_b) -> Comparison:
    ha, a = read_csv(path_a)
    hb, b = read_csv(path_b)
    if ha != hb:
        raise ConfigError("--compare", f"column mismatch: {ha[1:]} vs {hb[1:]}")
    return compare_tables(a, b, ha[1:])


def ensure_parent(path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
