"""Population relaxation between exciton states.

Golden-rule rates from the non-adiabatic coupling, the rate generator for
populations, the secular coherence damping and, for inspection only, the
full second-order master-equation superoperator.
"""
from dataclasses import dataclass

import numpy as np

from .model import UNITS

DEGENERACY_GUARD = 1e-9   # rad/fs


@dataclass(frozen=True)
class RateMatrix:
    """``gamma[m, n]`` is the rate (1/fs) into state m from state n.

    ``generator`` has the rates off the diagonal and minus the total
    outflow of each state on it, so every column sums to zero.
    """

    gamma: np.ndarray
    generator: np.ndarray


@dataclass(frozen=True)
class SecularRates:
    kappa: np.ndarray


def _ro(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def _bose_weights(w, temperature):
    """n(w) = 1/(e^{beta hbar w} - 1) for w in rad/fs."""
    x = UNITS.dimensionless_thermal(UNITS.wavenumber(w), temperature)
    return 1.0 / np.expm1(x)


def occupation_factor(j_at_w, w, temperature, sign="down"):
    """Bath occupation factor X of the master equation (1/fs^3).

    ``"up"`` is the thermally activated branch ``(pi/hbar) J w^2 n(w)`` and
    ``"down"`` the emission branch ``(pi/hbar) J w^2 / (1 - e^{-beta hbar w})``.

    Parameters
    ----------
    j_at_w : float
        J evaluated at the transition frequency, cm^-1.
    w : float
        Transition frequency, rad/fs; must be positive.
    """
    if not w > 0:
        raise ValueError("occupation factor needs w > 0; degenerate pairs take the limit path")
    n = _bose_weights(w, temperature)
    pref = np.pi * float(UNITS.angular(j_at_w)) * w * w
    if sign == "up":
        return pref * n
    if sign == "down":
        return pref * (n + 1.0)
    raise ValueError(f"sign must be 'up' or 'down', got {sign!r}")


def coupling_strengths(overlap, correlation=None):
    """``s[m, n] = sum_ij C_ij k[n, m, i] k[n, m, j]``."""
    k = overlap.k
    if correlation is None:
        return np.einsum("nmj,nmj->mn", k, k)
    return np.einsum("nmi,ij,nmj->mn", k, np.asarray(correlation), k)


def gamma_rates(eig, overlap, sd, temperature, correlation=None) -> RateMatrix:
    """Rates between exciton states for a shared spectral density.

    For eps_m > eps_n the uphill rate is
    ``Gamma_mn = (2 pi/hbar) J(w_mn) n(w_mn) s_mn`` and the downhill rate
    follows from detailed balance, ``Gamma_nm = e^{beta hbar w_mn} Gamma_mn``.
    Pairs closer than 1e-9 rad/fs use the w -> 0 limit
    ``J(w) n(w) -> J'(0) / (beta hbar)`` for both directions.
    """
    n = eig.n
    s = coupling_strengths(overlap, correlation)
    beta = UNITS.c2 / temperature
    gamma = np.zeros((n, n))
    two_pi_over_hbar = 2 * np.pi * UNITS.two_pi_c
    for m in range(n):
        for k in range(m + 1, n):
            hi, lo = (m, k) if eig.energies[m] >= eig.energies[k] else (k, m)
            gap = eig.energies[hi] - eig.energies[lo]          # cm^-1
            if s[hi, lo] == 0.0:
                continue
            if UNITS.two_pi_c * gap < DEGENERACY_GUARD:
                rate = two_pi_over_hbar * sd.low_frequency_slope() / beta * s[hi, lo]
                gamma[hi, lo] = gamma[lo, hi] = rate
                continue
            up = two_pi_over_hbar * float(sd(gap)) / np.expm1(beta * gap) * s[hi, lo]
            gamma[hi, lo] = up
            gamma[lo, hi] = np.exp(beta * gap) * up
    return RateMatrix(_ro(gamma), _ro(population_generator_from(gamma)))


def population_generator_from(gamma):
    g = np.array(gamma, dtype=float)
    np.fill_diagonal(g, 0.0)
    g[np.diag_indices_from(g)] = -g.sum(axis=0)
    return g


def population_generator(rm: RateMatrix):
    return rm.generator


def coherence_decay_rates(rm: RateMatrix) -> SecularRates:
    g = rm.gamma
    kappa = 0.5 * (g + g.T)
    np.fill_diagonal(kappa, 0.0)
    return SecularRates(_ro(kappa))


def nonadiabatic_couplings(eig, overlap):
    """``a[j, n, m] = -i hbar <n|j><j|m> / (eps_n - eps_m)`` in fs (zero on n = m)."""
    w = UNITS.angular(eig.gaps())          # w[n, m] = (eps_n - eps_m)/hbar
    n = eig.n
    off = ~np.eye(n, dtype=bool)
    if np.any(np.abs(w[off]) < DEGENERACY_GUARD):
        raise ValueError("degenerate exciton pair: non-adiabatic couplings are singular")
    inv = np.zeros_like(w)
    inv[off] = 1.0 / w[off]
    return -1j * np.transpose(overlap.k, (2, 0, 1)) * inv[None, :, :]


def occupation_matrix(eig, sd, temperature):
    """``x[r, r']`` following the two-branch definition; zero on the diagonal."""
    w = UNITS.angular(eig.gaps())
    n = eig.n
    x = np.zeros((n, n))
    for r in range(n):
        for rp in range(n):
            if r == rp:
                continue
            wr = w[r, rp]
            jw = float(sd(UNITS.wavenumber(abs(wr))))
            x[r, rp] = occupation_factor(jw, abs(wr), temperature, "up" if wr > 0 else "down")
    return x


def redfield_generator(eig, overlap, sd, temperature, correlation=None, gain="symmetric"):
    """Superoperator of the second-order master equation in the exciton basis.

    Diagnostic only.  Acts on the row-major flattening of an N x N density
    matrix; ``L @ rho.ravel()`` is the time derivative.

    ``gain`` picks the occupation factors on the gain term:
    ``"asymmetric"`` uses ``X[r, r'] + X[s', s]`` as the equation is usually
    written, ``"symmetric"`` uses ``X[r, r'] + X[s, s']``, the ordering that
    keeps the generator Hermiticity-preserving and reduces the population
    gain terms to the golden-rule rates.
    """
    a = nonadiabatic_couplings(eig, overlap)
    c = np.eye(eig.n) if correlation is None else np.asarray(correlation)
    x = occupation_matrix(eig, sd, temperature)
    n = eig.n
    # B[r, r', s] = sum_ij C_ij A^i_{r r'} A^j_{r' s}
    b = np.einsum("ij,iab,jbc->abc", c, a, a)
    # B'[r, r', s', s] = sum_ij C_ij A^i_{r r'} A^j_{s' s}
    bp = np.einsum("ij,iab,jcd->abcd", c, a, a)
    m1 = np.einsum("abc,bc->ac", b, x)       # sum_r' B_{r r' s} X_{r' s}
    m2 = np.einsum("abc,ba->ac", b, x)       # sum_r' B_{r r' s} X_{r' r}
    if gain == "asymmetric":
        xs = x[:, :, None, None] + x[None, None, :, :]      # X_{r r'} + X_{s' s}
    elif gain == "symmetric":
        xs = x[:, :, None, None] + x.T[None, None, :, :]    # X_{r r'} + X_{s s'}
    else:
        raise ValueError(f"gain must be 'asymmetric' or 'symmetric', got {gain!r}")
    g = bp * xs                               # g[r, r', s', s]
    eye = np.eye(n)
    # L[r, s, r', s'] so that d rho_{rs} = sum L[r, s, r', s'] rho_{r' s'}
    L = -np.einsum("ac,bd->abcd", m1, eye) - np.einsum("ac,db->abcd", eye, m2)
    L = L + np.einsum("acdb->abcd", g)
    return L.reshape(n * n, n * n)
