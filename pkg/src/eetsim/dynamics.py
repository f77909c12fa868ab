"""Reduced density matrix of the exciton system in the site basis.

Populations of the exciton states evolve under the rate generator,
coherences between them oscillate, dephase and decay; the site-basis
matrix is assembled from both blocks at every grid time.
"""
from dataclasses import dataclass
from math import factorial
from typing import Optional

import numpy as np

from .eigen import diagonalize, overlap_products
from .lineshape import PhiBase, dephasing_table, phi_base
from .model import UNITS, SimulationConfig
from .relaxation import coherence_decay_rates, gamma_rates

PADE_ORDER = 6


@dataclass(frozen=True)
class DensityTrajectory:
    """``rho[i]`` is the site-basis density matrix at ``times[i]`` (fs)."""

    times: np.ndarray
    rho: np.ndarray
    mode: str
    rho_eigen: Optional[np.ndarray] = None

    @property
    def populations(self):
        return np.real(np.einsum("tbb->tb", self.rho))


def _pade_coefficients(q):
    f = factorial
    return [f(2 * q - k) * f(q) / (f(2 * q) * f(k) * f(q - k)) for k in range(q + 1)]


def expm(a, order=PADE_ORDER):
    """Matrix exponential by scaling and squaring with a diagonal Pade kernel.

    The matrix is halved until its 1-norm is below 0.5, exponentiated with
    the [order/order] Pade approximant and squared back.
    """
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix exponential of a non-finite matrix")
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm >= 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
        if norm / 2.0**s >= 0.5:
            s += 1
    x = a / 2.0**s
    c = _pade_coefficients(order)
    eye = np.eye(a.shape[0], dtype=x.dtype)
    num = c[0] * eye
    den = c[0] * eye
    power = eye
    for k in range(1, order + 1):
        power = power @ x
        num = num + c[k] * power
        den = den + (-1) ** k * c[k] * power
    e = np.linalg.solve(den, num)
    for _ in range(s):
        e = e @ e
    return e


def propagate_populations(generator, w0, times):
    """Exciton populations ``exp(G t) w0`` at every time of a uniform grid.

    The propagator over one grid step is built once and applied repeatedly.
    """
    g = np.asarray(generator, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("rate generator has non-finite entries")
    w0 = np.asarray(w0, dtype=float)
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, w0.size))
    if times.size == 0:
        return out
    w = expm(g * times[0]) @ w0 if times[0] != 0 else w0.copy()
    out[0] = w
    if times.size > 1:
        dt = times[1] - times[0]
        if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
            raise ValueError("propagate_populations needs a uniform time grid")
        step = expm(g * dt)
        for i in range(1, times.size):
            w = step @ w
            out[i] = w
    return out


def boltzmann(energies, temperature):
    x = UNITS.dimensionless_thermal(np.asarray(energies) - np.min(energies), temperature)
    p = np.exp(-x)
    return p / p.sum()


def equilibrium_site_populations(eig, temperature):
    """Thermal site populations sum_m |<b|m>|^2 e^{-beta eps_m} / Z."""
    return eig.u**2 @ boltzmann(eig.energies, temperature)


def unitary_reference(h, a, times):
    """Closed-system site populations |<b| e^{-i H t/hbar} |a>|^2.

    ``a`` is a 0-based site index.  Uses numpy's symmetric eigensolver so it
    stays independent of the Jacobi path.
    """
    e, u = np.linalg.eigh(np.asarray(getattr(h, "h", h), dtype=float))
    times = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.outer(times, UNITS.angular(e)))          # (T, N)
    amp = (phases * u[a][None, :]) @ u.T                                # (T, sites)
    return np.abs(amp) ** 2


def assemble_density(cfg: SimulationConfig, eig, table, rates, kappa, keep_eigen=False):
    """Site-basis density matrices for an excitation starting on one site.

    Exciton populations start at ``|<a|n>|^2`` and evolve as ``P(t) = e^{G t}``;
    the coherence between n and n' carries
    ``<a|n><a|n'> exp(-i w_nn' t - phi_nn'(t) - kappa_nn' t)``.
    In ``closed`` mode phi, kappa and G are dropped, in ``decoherence_only``
    mode kappa and G are dropped.
    """
    times = cfg.times
    a = cfg.initial_site - 1
    u = eig.u
    n = eig.n
    ua = u[a]
    w0 = ua**2

    if cfg.mode == "full":
        pops = propagate_populations(rates.generator, w0, times)
    else:
        pops = np.broadcast_to(w0, (times.size, n))

    arg = -1j * table.omega[:, :, None] * times[None, None, :]
    if cfg.mode != "closed":
        arg = arg - table.phi
    if cfg.mode == "full":
        arg = arg - kappa.kappa[:, :, None] * times[None, None, :]
    coh = np.outer(ua, ua)[:, :, None] * np.exp(arg)
    idx = np.arange(n)
    coh[idx, idx, :] = 0.0
    rho_e = np.moveaxis(coh, 2, 0)                        # (T, N, N)
    rho_e[:, idx, idx] = pops
    rho = np.einsum("bm,tmn,cn->tbc", u, rho_e, u)
    return DensityTrajectory(times, rho, cfg.mode, rho_e if keep_eigen else None)


@dataclass(frozen=True)
class Simulation:
    """Everything a run produces, for reporting."""

    config: SimulationConfig
    eigensystem: object
    rates: object
    kappa: object
    table: object
    trajectory: DensityTrajectory


def simulate(cfg: SimulationConfig, keep_eigen=False, **phi_kw) -> Simulation:
    """Run the full pipeline for one configuration."""
    eig = diagonalize(cfg.hamiltonian)
    overlap = overlap_products(eig)
    bath = cfg.bath
    times = cfg.times
    if cfg.mode == "closed":
        zeros = np.zeros_like(times)
        base = PhiBase(times, zeros, zeros)
    else:
        base = phi_base(bath.spectral_density, bath.temperature, times, **phi_kw)
    table = dephasing_table(base, overlap, bath.correlation, eig)
    rates = gamma_rates(eig, overlap, bath.spectral_density, bath.temperature, bath.correlation)
    kappa = coherence_decay_rates(rates)
    traj = assemble_density(cfg, eig, table, rates, kappa, keep_eigen)
    return Simulation(cfg, eig, rates, kappa, table, traj)
