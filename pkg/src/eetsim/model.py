"""Domain types, unit conventions, the FMO Hamiltonian and spectral densities.

Energies and frequencies are wavenumbers (cm^-1), times are fs and
temperatures are K throughout.  Angular frequencies in rad/fs appear only
where a time argument multiplies a frequency.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate

from .errors import ConfigError, NumericalError

MODES = ("closed", "decoherence_only", "full")
DISCRETE_MODE_FORMS = ("modified-lorentz", "plain-lorentz")


@dataclass(frozen=True)
class UnitSystem:
    """Fixed conversion constants (CODATA).

    ``c2`` is the second radiation constant hc/k_B in cm K, ``two_pi_c``
    converts a wavenumber into an angular frequency in rad/fs.
    """

    c2: float = field(default=1.4387769, init=False)
    two_pi_c: float = field(default=1.8836516e-4, init=False)

    def dimensionless_thermal(self, wavenumber, temperature):
        """beta * hbar * omega for a wavenumber at the given temperature."""
        return self.c2 * np.asarray(wavenumber, dtype=float) / temperature

    def angular(self, wavenumber):
        """Wavenumber (cm^-1) to angular frequency (rad/fs)."""
        return self.two_pi_c * np.asarray(wavenumber, dtype=float)

    def wavenumber(self, angular):
        """Angular frequency (rad/fs) to wavenumber (cm^-1)."""
        return np.asarray(angular, dtype=float) / self.two_pi_c


UNITS = UnitSystem()


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Hamiltonian

_FMO_UPPER = [
    [240.0, -87.7, 5.5, -5.9, 6.7, -13.7, -9.9],
    [315.0, 30.8, 8.2, 0.7, 11.8, 4.3],
    [0.0, -53.5, -2.2, -9.6, 6.0],
    [130.0, -70.7, -17.0, -63.3],
    [285.0, 81.1, -1.3],
    [435.0, 39.7],
    [245.0],
]

SYMMETRY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ExcitonHamiltonian:
    """Site-basis single-excitation Hamiltonian in cm^-1."""

    h: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ConfigError("hamiltonian", f"must be a square matrix, got shape {h.shape}")
        if h.shape[0] < 2:
            raise ConfigError("hamiltonian", "need at least two sites")
        if not np.all(np.isfinite(h)):
            raise ConfigError("hamiltonian", "entries must be finite")
        asym = np.max(np.abs(h - h.T))
        if asym > SYMMETRY_TOLERANCE:
            raise ConfigError(
                "hamiltonian", f"not symmetric (max |h - h^T| = {asym:.3g} cm^-1)"
            )
        object.__setattr__(self, "h", _frozen(0.5 * (h + h.T)))
        labels = tuple(self.labels) or tuple(f"site{j + 1}" for j in range(h.shape[0]))
        if len(labels) != h.shape[0]:
            raise ConfigError("hamiltonian", "one label per site required")
        object.__setattr__(self, "labels", labels)

    @property
    def n_sites(self) -> int:
        return self.h.shape[0]

    @classmethod
    def from_upper(cls, rows, labels=()):
        """Build from ragged upper-triangle rows (diagonal first in each row)."""
        n = len(rows)
        h = np.zeros((n, n))
        for i, row in enumerate(rows):
            if len(row) != n - i:
                raise ConfigError("hamiltonian", f"upper-triangle row {i + 1} has wrong length")
            h[i, i:] = row
        h = h + np.triu(h, 1).T
        return cls(h, labels)


def fmo_preset() -> ExcitonHamiltonian:
    """Seven-site FMO Hamiltonian (cm^-1, relative to 12210 cm^-1)."""
    return ExcitonHamiltonian.from_upper(_FMO_UPPER)


# ---------------------------------------------------------------------------
# Spectral densities


@dataclass(frozen=True)
class Drude:
    """Overdamped Brownian (Drude-Lorentz) density,
    J(w) = (2 lam / pi) w wc / (w^2 + wc^2)."""

    reorganization: float
    cutoff: float

    def __post_init__(self):
        if not self.reorganization > 0:
            raise ConfigError("spectral_density.lambda_cm", "must be > 0")
        if not self.cutoff > 0:
            raise ConfigError("spectral_density.cutoff", "must be > 0")

    @classmethod
    def from_cutoff_time(cls, reorganization, tau_fs):
        """Cutoff given as the correlation time 1/omega_c in fs."""
        return cls(reorganization, 1.0 / (tau_fs * UNITS.two_pi_c))

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        wc = self.cutoff
        return 2.0 * self.reorganization / np.pi * w * wc / (w * w + wc * wc)

    def low_frequency_slope(self):
        return 2.0 * self.reorganization / (np.pi * self.cutoff)

    def breakpoints(self):
        return [self.cutoff, 10.0 * self.cutoff]

    def lorentz_tail(self):
        """``(A, p, w0)``: J(w) = A w / |w - p|^2 for every w >= w0."""
        return 2.0 * self.reorganization * self.cutoff / np.pi, 1j * self.cutoff, 0.0


@dataclass(frozen=True)
class AdolphsRenger:
    """Adolphs-Renger FMO density: a broad log-normal-like part plus one
    broadened discrete mode at ``omega_h``.

    ``discrete_mode`` selects the broadening: ``"modified-lorentz"`` weights the
    Lorentzian by w * omega_h (vanishes at w = 0), ``"plain-lorentz"`` by
    omega_h**2 (finite at w = 0, so the reorganization and dephasing
    integrals diverge logarithmically).
    """

    s0: float = 0.5
    s_h: float = 0.22
    omega_h: float = 180.0
    gamma_p: float = 1.0
    omega_1: float = 0.575
    omega_2: float = 2.0
    discrete_mode: str = "modified-lorentz"

    def __post_init__(self):
        if self.s0 < 0 or self.s_h < 0:
            raise ConfigError("spectral_density", "Huang-Rhys factors must be >= 0")
        if not self.gamma_p > 0:
            raise ConfigError("spectral_density.gamma_p_cm", "must be > 0")
        if not (self.omega_1 > 0 and self.omega_2 > 0 and self.omega_h > 0):
            raise ConfigError("spectral_density", "mode frequencies must be > 0")
        if self.discrete_mode not in DISCRETE_MODE_FORMS:
            raise ConfigError(
                "spectral_density.discrete_mode",
                f"expected one of {DISCRETE_MODE_FORMS}, got {self.discrete_mode!r}",
            )

    def broad_part(self, w):
        w = np.asarray(w, dtype=float)
        w1, w2 = self.omega_1, self.omega_2
        g0 = (6.105e-5 * w**3 / w1**4 * np.exp(-np.sqrt(w / w1))
              + 3.8156e-5 * w**3 / w2**4 * np.exp(-np.sqrt(w / w2)))
        return w**2 * self.s0 * g0

    def discrete_part(self, w):
        w = np.asarray(w, dtype=float)
        lorentz = self.gamma_p / np.pi / ((w - self.omega_h) ** 2 + self.gamma_p**2)
        weight = w * self.omega_h if self.discrete_mode == "modified-lorentz" else self.omega_h**2
        return weight * self.s_h * lorentz

    def __call__(self, w):
        return self.broad_part(w) + self.discrete_part(w)

    @property
    def infrared_finite(self):
        return self.discrete_mode == "modified-lorentz"

    def low_frequency_slope(self):
        if not self.infrared_finite:
            raise NumericalError("plain-lorentz density is finite at w = 0; J(w)/w diverges")
        g = self.gamma_p
        return self.omega_h * self.s_h * g / (np.pi * (self.omega_h**2 + g * g))

    def breakpoints(self):
        wh, g = self.omega_h, self.gamma_p
        pts = [100 * self.omega_1, 100 * self.omega_2, wh - 10 * g, wh, wh + 10 * g, 10 * wh]
        return sorted(p for p in pts if p > 0)

    def lorentz_tail(self):
        """``(A, p, w0)`` with J(w) = A w / |w - p|^2 to double precision for w >= w0.

        Only the modified form has this shape; returns None for the other.
        Beyond ``w0`` the broad part is below 1e-13 of the discrete mode.
        """
        if self.discrete_mode != "modified-lorentz":
            return None
        amp = self.omega_h * self.s_h * self.gamma_p / np.pi
        grid = np.geomspace(max(100 * max(self.omega_1, self.omega_2), 2 * self.omega_h), 1e8, 4000)
        broad = self.broad_part(grid)
        ref = self.discrete_part(grid) if self.s_h > 0 else np.full_like(grid, broad.max())
        ok = broad <= 1e-13 * ref
        # first point after which the condition holds everywhere on the grid
        bad = np.flatnonzero(~ok)
        i = 0 if bad.size == 0 else bad[-1] + 1
        if i >= grid.size:
            return None
        return amp, complex(self.omega_h, self.gamma_p), float(grid[i])


SpectralDensity = Union[Drude, AdolphsRenger]


def evaluate_spectral_density(sd: SpectralDensity, w):
    """Evaluate J(w) for ``w`` >= 0 (cm^-1)."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise ValueError("spectral density is defined for w >= 0 only")
    return sd(w)


def reorganization_energy(sd: SpectralDensity, epsrel=1e-10):
    """Reorganization energy, the integral of J(w)/w over (0, inf).

    Closed form for :class:`Drude`; segmented adaptive quadrature otherwise.
    """
    if isinstance(sd, Drude):
        return float(sd.reorganization)
    if not getattr(sd, "infrared_finite", True):
        raise NumericalError("reorganization energy diverges: J(0) > 0")

    def f(w):
        return sd(w) / w

    edges = [0.0, *sd.breakpoints(), np.inf]
    total = err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=500)
        total += val
        err += e
    if err > max(10 * epsrel * abs(total), 1e-300):
        raise NumericalError("reorganization-energy quadrature did not converge",
                             achieved=err / abs(total))
    return total


# ---------------------------------------------------------------------------
# Bath and configuration

PSD_TOLERANCE = 1e-10


def correlation_matrix(c, n_sites=None) -> np.ndarray:
    """Validate a site-correlation matrix and return a read-only copy."""
    c = np.array(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ConfigError("correlation", "must be a square matrix")
    if n_sites is not None and c.shape[0] != n_sites:
        raise ConfigError("correlation", f"expected {n_sites}x{n_sites}, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ConfigError("correlation", "entries must be finite")
    if np.max(np.abs(c - c.T)) > SYMMETRY_TOLERANCE:
        raise ConfigError("correlation", "must be symmetric")
    c = 0.5 * (c + c.T)
    if np.max(np.abs(np.diag(c) - 1.0)) > SYMMETRY_TOLERANCE:
        raise ConfigError("correlation", "diagonal entries must equal 1")
    np.fill_diagonal(c, 1.0)
    lo = np.linalg.eigvalsh(c).min()
    if lo < -PSD_TOLERANCE:
        raise ConfigError(
            "correlation", f"not positive semidefinite (smallest eigenvalue {lo:.3g})"
        )
    return _frozen(c)


def nearest_correlation(c) -> np.ndarray:
    """Clip negative eigenvalues and rescale to unit diagonal.

    A single clip-and-rescale pass: enough to repair matrices that are only
    slightly indefinite, such as hand-picked neighbour correlations.
    """
    c = np.array(c, dtype=float)
    c = 0.5 * (c + c.T)
    vals, vecs = np.linalg.eigh(c)
    c = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    d = np.sqrt(np.diag(c))
    c = c / np.outer(d, d)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


@dataclass(frozen=True)
class BathSpec:
    temperature: float
    spectral_density: SpectralDensity
    correlation: np.ndarray

    def __post_init__(self):
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ConfigError("temperature_K", "must be a finite positive number")

    @property
    def beta(self):
        """1/(k_B T) in cm (so beta * wavenumber is dimensionless)."""
        return UNITS.c2 / self.temperature


@dataclass(frozen=True)
class SimulationConfig:
    hamiltonian: ExcitonHamiltonian
    bath: BathSpec
    initial_site: int
    t_start: float = 0.0
    t_end: float = 1000.0
    n_steps: int = 1001
    mode: str = "full"

    def __post_init__(self):
        n = self.hamiltonian.n_sites
        if not 1 <= self.initial_site <= n:
            raise ConfigError("initial_site", f"must be in 1..{n}, got {self.initial_site}")
        if not (0 <= self.t_start < self.t_end):
            raise ConfigError("time", "need 0 <= t_start_fs < t_end_fs")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ConfigError("time.n_steps", "must be an integer >= 2")
        mode = normalize_mode(self.mode)
        object.__setattr__(self, "mode", mode)
        if self.bath.correlation.shape != (n, n):
            raise ConfigError("correlation", f"expected {n}x{n}")

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, int(self.n_steps))

    def to_dict(self):
        """JSON-ready form in the config-file schema."""
        return {
            "hamiltonian": self.hamiltonian.h.tolist(),
            "temperature_K": self.bath.temperature,
            "spectral_density": spectral_density_to_dict(self.bath.spectral_density),
            "correlation": self.bath.correlation.tolist(),
            "initial_site": self.initial_site,
            "time": {"t_start_fs": self.t_start, "t_end_fs": self.t_end,
                     "n_steps": int(self.n_steps)},
            "mode": self.mode,
        }


def normalize_mode(mode):
    m = str(mode).replace("-", "_").lower()
    if m not in MODES:
        raise ConfigError("mode", f"expected one of {', '.join(MODES)}, got {mode!r}")
    return m


# ---------------------------------------------------------------------------
# JSON config


def spectral_density_to_dict(sd):
    if isinstance(sd, Drude):
        return {"type": "drude", "lambda_cm": sd.reorganization, "cutoff_cm": sd.cutoff}
    return {
        "type": "adolphs_renger", "s0": sd.s0, "s_h": sd.s_h,
        "omega_h_cm": sd.omega_h, "gamma_p_cm": sd.gamma_p,
        "omega1_cm": sd.omega_1, "omega2_cm": sd.omega_2,
        "discrete_mode": sd.discrete_mode,
    }


def _number(d, key, prefix, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{prefix}{key}", "missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{prefix}{key}", f"expected a finite number, got {v!r}")
    return float(v)


def spectral_density_from_dict(d) -> SpectralDensity:
    p = "spectral_density."
    if not isinstance(d, dict):
        raise ConfigError("spectral_density", "expected an object")
    kind = d.get("type")
    if kind == "drude":
        lam = _number(d, "lambda_cm", p)
        if "cutoff_cm" in d and "cutoff_time_fs" in d:
            raise ConfigError(p + "cutoff_cm", "give cutoff_cm or cutoff_time_fs, not both")
        if "cutoff_time_fs" in d:
            tau = _number(d, "cutoff_time_fs", p)
            if tau <= 0:
                raise ConfigError(p + "cutoff_time_fs", "must be > 0")
            return Drude.from_cutoff_time(lam, tau)
        return Drude(lam, _number(d, "cutoff_cm", p))
    if kind == "adolphs_renger":
        return AdolphsRenger(
            s0=_number(d, "s0", p, 0.5), s_h=_number(d, "s_h", p, 0.22),
            omega_h=_number(d, "omega_h_cm", p, 180.0),
            gamma_p=_number(d, "gamma_p_cm", p, 1.0),
            omega_1=_number(d, "omega1_cm", p, 0.575),
            omega_2=_number(d, "omega2_cm", p, 2.0),
            discrete_mode=d.get("discrete_mode", "modified-lorentz"),
        )
    raise ConfigError(p + "type", f"expected 'drude' or 'adolphs_renger', got {kind!r}")


def config_from_dict(d) -> SimulationConfig:
    """Build a :class:`SimulationConfig` from the JSON config schema."""
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {"hamiltonian", "temperature_K", "spectral_density", "correlation",
             "initial_site", "time", "mode"}
    extra = set(d) - known
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown key")

    if "hamiltonian" not in d:
        raise ConfigError("hamiltonian", "missing")
    h = d["hamiltonian"]
    if h == "fmo":
        ham = fmo_preset()
    elif isinstance(h, str):
        raise ConfigError("hamiltonian", f"unknown preset {h!r} (only 'fmo')")
    else:
        try:
            arr = np.array(h, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("hamiltonian", "expected 'fmo' or an NxN numeric array") from None
        ham = ExcitonHamiltonian(arr)
    n = ham.n_sites

    temperature = _number(d, "temperature_K", "")
    if "spectral_density" not in d:
        raise ConfigError("spectral_density", "missing")
    sd = spectral_density_from_dict(d["spectral_density"])
    corr = d.get("correlation")
    corr = correlation_matrix(np.eye(n) if corr is None else corr, n)
    bath = BathSpec(temperature, sd, corr)

    site = d.get("initial_site")
    if isinstance(site, bool) or not isinstance(site, int):
        raise ConfigError("initial_site", f"expected an integer, got {site!r}")
    time = d.get("time", {})
    if not isinstance(time, dict):
        raise ConfigError("time", "expected an object")
    n_steps = time.get("n_steps", 1001)
    if isinstance(n_steps, bool) or not isinstance(n_steps, int):
        raise ConfigError("time.n_steps", f"expected an integer, got {n_steps!r}")
    return SimulationConfig(
        hamiltonian=ham, bath=bath, initial_site=site,
        t_start=_number(time, "t_start_fs", "time.", 0.0),
        t_end=_number(time, "t_end_fs", "time.", 1000.0),
        n_steps=n_steps, mode=d.get("mode", "full"),
    )


def load_config(path: Union[str, Path]) -> SimulationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
    return config_from_dict(data)
