"""Scalar features of population curves: extrema, damping time, crossings."""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

DAMPING_THRESHOLD = 0.02


@dataclass
class TrajectoryFeatures:
    """Per-site features of a population trajectory (times in fs).

    ``damping_time[b]`` is 0.0 when site b never oscillates and None when its
    envelope never falls below the threshold inside the window.
    ``crossing_time`` is None when site 3 never overtakes site 1.
    """

    extrema: List[np.ndarray]
    damping_time: List[Optional[float]]
    crossing_time: Optional[float]
    threshold: float = DAMPING_THRESHOLD
    envelopes: List[tuple] = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "extrema_fs": [e.tolist() for e in self.extrema],
            "damping_time_fs": list(self.damping_time),
            "site3_over_site1_fs": self.crossing_time,
        }


def extrema_indices(x):
    """Indices where the discrete derivative changes sign.

    Flat steps are skipped, so a plateau between a rise and a fall counts
    once, at its last point.
    """
    x = np.asarray(x, dtype=float)
    s = np.sign(np.diff(x))
    nz = np.flatnonzero(s)
    if nz.size < 2:
        return np.array([], dtype=int)
    flips = np.flatnonzero(s[nz[1:]] != s[nz[:-1]])
    # extremum sits at the start of the step that reverses direction
    return nz[1:][flips]


def envelope(t, x):
    """Peak-to-trough amplitudes between successive extrema.

    Returns the midpoint times and the absolute differences.
    """
    idx = extrema_indices(x)
    if idx.size < 2:
        return np.array([]), np.array([])
    te, xe = np.asarray(t)[idx], np.asarray(x)[idx]
    return 0.5 * (te[1:] + te[:-1]), np.abs(np.diff(xe))


def damping_time(t, x, threshold=DAMPING_THRESHOLD):
    """First time the linearly interpolated envelope drops below ``threshold``."""
    tm, amp = envelope(t, x)
    if amp.size == 0:
        return 0.0
    below = np.flatnonzero(amp < threshold)
    if below.size == 0:
        return None
    k = below[0]
    if k == 0:
        return float(tm[0])
    t0, t1 = tm[k - 1], tm[k]
    a0, a1 = amp[k - 1], amp[k]
    return float(t0 + (threshold - a0) * (t1 - t0) / (a1 - a0))


def crossing_time(t, upper, lower):
    """First time ``upper - lower`` goes from negative to >= 0 (interpolated)."""
    d = np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)
    t = np.asarray(t, dtype=float)
    hits = np.flatnonzero((d[:-1] < 0) & (d[1:] >= 0))
    if hits.size == 0:
        return None
    i = hits[0]
    return float(t[i] - d[i] * (t[i + 1] - t[i]) / (d[i + 1] - d[i]))


def extract_features(times, populations, threshold=DAMPING_THRESHOLD) -> TrajectoryFeatures:
    """Features of every site column of ``populations`` (shape (T, N)).

    Parameters
    ----------
    times : array_like
        Grid in fs, at least 3 points.
    populations : array_like
        Site populations, one column per site.
    threshold : float
        Absolute peak-to-trough amplitude that counts as damped.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(populations, dtype=float)
    if t.size < 3 or p.shape[0] != t.size:
        raise ValueError("need at least 3 time points and one population row per time")
    ext, damp, env = [], [], []
    for b in range(p.shape[1]):
        ext.append(t[extrema_indices(p[:, b])])
        damp.append(damping_time(t, p[:, b], threshold))
        env.append(envelope(t, p[:, b]))
    cross = crossing_time(t, p[:, 2], p[:, 0]) if p.shape[1] >= 3 else None
    return TrajectoryFeatures(ext, damp, cross, threshold, env)
