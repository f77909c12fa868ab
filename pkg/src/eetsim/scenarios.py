"""Named preset runs for the FMO complex.

Every preset starts from the seven-site Hamiltonian, a 0-1000 fs grid with
1001 points and, unless stated otherwise, a Drude bath with
lambda = 35 cm^-1 and a 50 fs bath correlation time.
"""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .errors import ConfigError
from .model import (AdolphsRenger, BathSpec, Drude, SimulationConfig, fmo_preset,
                    nearest_correlation)

DRUDE_REORGANIZATION = 35.0
DRUDE_CORRELATION_TIME = 50.0
NEIGHBOUR_CORRELATIONS = {(1, 2): 0.9, (5, 6): 0.9, (4, 5): 0.4, (4, 7): 0.4}


@dataclass(frozen=True)
class ExpectedFeature:
    """A feature band a preset run should fall in (None means open-ended)."""

    site: int
    feature: str
    low: Optional[float] = None
    high: Optional[float] = None

    def holds(self, value):
        if value is None:
            return False
        return ((self.low is None or value >= self.low)
                and (self.high is None or value <= self.high))

    def to_dict(self):
        return {"site": self.site, "feature": self.feature, "low": self.low, "high": self.high}


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SimulationConfig
    description: str
    expected: List[ExpectedFeature] = field(default_factory=list)


def neighbour_correlation(n_sites=7):
    """Nearest-neighbour bath correlation matrix for FMO.

    The raw matrix is slightly indefinite (smallest eigenvalue about -2e-4),
    so it is replaced by the nearest valid correlation matrix.
    """
    c = np.eye(n_sites)
    for (i, j), v in NEIGHBOUR_CORRELATIONS.items():
        c[i - 1, j - 1] = c[j - 1, i - 1] = v
    return nearest_correlation(c)


def _drude():
    return Drude.from_cutoff_time(DRUDE_REORGANIZATION, DRUDE_CORRELATION_TIME)


def _config(temperature, site, mode, sd=None, correlation=None):
    c = np.eye(7) if correlation is None else correlation
    return SimulationConfig(fmo_preset(), BathSpec(temperature, sd or _drude(), c),
                            initial_site=site, mode=mode)


def _registry() -> Dict[str, Scenario]:
    damp = "damping_time_fs"
    items = [
        Scenario("fig1", _config(77, 1, "full"), "site 1, 77 K, full dynamics",
                 [ExpectedFeature(1, damp, 600, 900)]),
        Scenario("fig2", _config(77, 1, "decoherence_only"),
                 "site 1, 77 K, decoherence only",
                 [ExpectedFeature(3, "max_population", None, 0.10)]),
        Scenario("fig3", _config(77, 1, "full"), "site 1, 77 K, full dynamics",
                 [ExpectedFeature(1, damp, 600, 900),
                  ExpectedFeature(3, "final_population", 0.15, None)]),
        Scenario("fig4", _config(300, 1, "decoherence_only"),
                 "site 1, 300 K, decoherence only"),
        Scenario("fig5", _config(300, 1, "full"), "site 1, 300 K, full dynamics",
                 [ExpectedFeature(1, damp, 250, 450)]),
        Scenario("fig6", _config(77, 6, "decoherence_only"),
                 "site 6, 77 K, decoherence only",
                 [ExpectedFeature(6, damp, 400, None)]),
        Scenario("fig7", _config(300, 6, "decoherence_only"),
                 "site 6, 300 K, decoherence only",
                 [ExpectedFeature(6, damp, None, 300)]),
        Scenario("fig8", _config(77, 6, "full"),
                 "site 6, 77 K, full dynamics (uncorrelated baseline for fig11/fig12)"),
        Scenario("fig9", _config(300, 6, "full"), "site 6, 300 K, full dynamics"),
        Scenario("fig10", _config(77, 1, "full", sd=AdolphsRenger(gamma_p=1.0)),
                 "site 1, 77 K, full dynamics, Adolphs-Renger density"),
        Scenario("fig11", _config(77, 6, "full", correlation=neighbour_correlation()),
                 "site 6, 77 K, full dynamics, correlated neighbouring baths"),
        Scenario("fig12", _config(77, 6, "full", correlation=neighbour_correlation()),
                 "site 6, 77 K, full dynamics, correlated baths (site-3 view)"),
    ]
    return {s.name: s for s in items}


PRESETS = _registry()


def preset_names():
    return sorted(PRESETS, key=lambda s: (len(s), s))


def get_scenario(name, mode=None) -> Scenario:
    """Look up a preset, optionally overriding its dynamics mode."""
    try:
        sc = PRESETS[name]
    except KeyError:
        raise ConfigError("--preset", f"unknown preset {name!r}; available: "
                          + ", ".join(preset_names())) from None
    if mode is not None:
        sc = replace(sc, config=replace(sc.config, mode=mode))
    return sc


def feature_value(features, populations, item: ExpectedFeature):
    b = item.site - 1
    if item.feature == "damping_time_fs":
        return features.damping_time[b]
    if item.feature == "max_population":
        return float(np.max(populations[:, b]))
    if item.feature == "final_population":
        return float(populations[-1, b])
    raise ValueError(f"unknown feature {item.feature!r}")
