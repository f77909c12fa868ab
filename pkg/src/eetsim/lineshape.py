"""Dephasing functions phi_nn'(t) and decoherence factors.

Every site shares one spectral density, so the frequency integrals factor
out of the pair-dependent coupling sums.  :class:`PhiBase` holds the two
integrals on the time grid (computed once per bath), and
:func:`dephasing_table` contracts them with the gradient coupling sums for
every eigenstate pair.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, NumericalError
from .model import UNITS, Drude

POLE_GUARD = 1e-6
MATSUBARA_TAIL_TOL = 1e-12
MATSUBARA_MAX_TERMS = 10**6
_CHUNK = 4096
OSCILLATIONS_PER_PANEL = 4
QUAD_LIMIT = 20000


@dataclass(frozen=True)
class PhiBase:
    """Pair-independent dephasing integrals on a time grid (dimensionless).

    ``re0`` multiplies the real-part coupling sum and ``im0`` the
    imaginary-part one.
    """

    times: np.ndarray
    re0: np.ndarray
    im0: np.ndarray


@dataclass(frozen=True)
class DephasingTable:
    """``phi[n, n', i]`` for every eigenstate pair at ``times[i]``;
    ``omega[n, n']`` is the pair's transition frequency in rad/fs."""

    times: np.ndarray
    phi: np.ndarray
    omega: np.ndarray


def _ramp(x):
    # e^{-x} + x - 1 without cancellation for small x
    return np.expm1(-x) + x


def _matsubara_tail(a, n):
    """Exact sums over k > n of 1/(k^2 - a^2) and 1/(k (k^2 - a^2))."""
    s2 = (special.digamma(n + 1 + a) - special.digamma(n + 1 - a)) / (2.0 * a)
    s3 = (special.digamma(n + 1) - 0.5 * special.digamma(n + 1 - a)
          - 0.5 * special.digamma(n + 1 + a)) / (a * a)
    return s2, s3


def matsubara_sum(t, nu1, wc, tail_tol=MATSUBARA_TAIL_TOL, max_terms=MATSUBARA_MAX_TERMS):
    """Sum over n >= 1 of (e^{-nu_n t} + nu_n t - 1) / (nu_n (nu_n^2 - wc^2)).

    Frequencies in rad/fs, ``nu_n = n * nu1``.  The algebraic part of every
    term beyond the truncation point is summed exactly through digamma
    functions, so only the exponentially decaying part is truncated.  That
    truncation stops once the bound on the remaining exponential tail is
    below ``tail_tol`` times the magnitude of the sum.

    Returns
    -------
    values : ndarray
        The sum at each time.
    n_terms : int
        Largest number of explicit terms used.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = wc / nu1
    n_min = max(8, int(np.ceil(a)) + 2)
    out = np.zeros_like(t)
    used = 0
    for i, ti in enumerate(t):
        if ti == 0.0:
            continue
        partial = 0.0
        n = 0
        while True:
            stop = n_min if n == 0 else min(n + _CHUNK, max_terms)
            k = np.arange(n + 1, stop + 1, dtype=float)
            nu = k * nu1
            partial += np.sum(_ramp(nu * ti) / (nu * (nu * nu - wc * wc)))
            n = stop
            s2, s3 = _matsubara_tail(a, n)
            total = partial + (ti * s2 / nu1**2) - s3 / nu1**3
            nun = (n + 1) * nu1
            bound = np.exp(-nun * ti) / (nun * (nun * nun - wc * wc)) / -np.expm1(-nu1 * ti)
            if bound <= tail_tol * abs(total):
                break
            if n >= max_terms:
                raise NumericalError(
                    f"Matsubara sum hit the {max_terms}-term cap at t = {ti:g} fs",
                    achieved=bound / abs(total),
                )
        out[i] = total
        used = max(used, n)
    return out, used


def check_pole_guard(cutoff, temperature):
    """Reject temperatures where beta*hbar*omega_c sits on a Matsubara pole."""
    x = float(UNITS.dimensionless_thermal(cutoff, temperature))
    n = int(round(x / (2 * np.pi)))
    if n >= 1 and abs(x - 2 * np.pi * n) <= POLE_GUARD:
        raise ConfigError(
            "temperature_K",
            f"beta*hbar*omega_c = {x:.9g} coincides with Matsubara pole n = {n}",
        )
    return x


def phi_base_drude(reorganization, cutoff, temperature, times,
                   tail_tol=MATSUBARA_TAIL_TOL, max_terms=MATSUBARA_MAX_TERMS) -> PhiBase:
    """Closed-form dephasing integrals for the Drude density.

    The real part is the contour-integral result: a cot(beta hbar omega_c/2)
    term from the Drude pole plus a Matsubara series; the imaginary part is
    a single exponential ramp.

    Parameters
    ----------
    reorganization, cutoff : float
        lambda and omega_c in cm^-1.
    temperature : float
        K.
    times : array_like
        fs.
    """
    if not (reorganization > 0 and cutoff > 0 and temperature > 0):
        raise ConfigError("spectral_density", "lambda, omega_c and T must all be > 0")
    x = check_pole_guard(cutoff, temperature)
    times = np.asarray(times, dtype=float)
    wc = float(UNITS.angular(cutoff))
    beta_hbar = UNITS.c2 / temperature / UNITS.two_pi_c   # fs
    nu1 = 2 * np.pi / beta_hbar

    ratio = reorganization / cutoff
    ramp = _ramp(wc * times)
    re0 = ratio / np.tan(x / 2) * ramp
    msum, _ = matsubara_sum(times, nu1, wc, tail_tol, max_terms)
    # 4 lambda omega_c / (hbar^2 beta), with lambda/hbar and omega_c in rad/fs
    re0 = re0 + 4.0 * float(UNITS.angular(reorganization)) * wc / beta_hbar * msum
    im0 = -ratio * ramp
    return PhiBase(_ro(times), _ro(re0), _ro(im0))


def _ro(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def _sin_minus_x(x):
    # sin x - x, with a series where it would cancel
    out = np.sin(x) - x
    small = np.abs(x) < 0.1
    if small.any():
        xs = x[small]
        x2 = xs * xs
        out[small] = xs * x2 * (-1 / 6 + x2 * (1 / 120 + x2 * (-1 / 5040 + x2 / 362880)))
    return out


def _numeric_integrand(sd, temperature, times):
    """Vector integrand in w (cm^-1): real-part block then imaginary-part block."""
    tau = UNITS.two_pi_c * times       # rad per cm^-1
    half_beta = 0.5 * UNITS.c2 / temperature
    n = tau.size
    slope = sd.low_frequency_slope()

    def f(w):
        out = np.empty(2 * n)
        if w == 0.0:
            out[:n] = slope / half_beta * 0.5 * tau**2
            out[n:] = 0.0
            return out
        x = w * tau
        h = np.sin(0.5 * x)
        jw = float(sd(w)) / (w * w)
        out[:n] = (2.0 * jw / np.tanh(half_beta * w)) * h * h
        out[n:] = jw * _sin_minus_x(x)
        return out

    return f


def lorentz_tail_integrals(amp, pole, w0, tau):
    """Dephasing integrals over (w0, inf) for J(w) = amp w / |w - pole|^2 at coth = 1.

    With g = J / w^2 = amp / (w (w - p)(w - p*)), partial fractions reduce
    the oscillatory integrals to complex exponential integrals E1.

    Parameters
    ----------
    amp : float
        Amplitude, cm^-1.
    pole : complex
        Pole p in the upper half plane, cm^-1.
    w0 : float
        Lower limit, cm^-1; must exceed Re p.
    tau : array_like
        Times in rad per cm^-1 (2 pi c t).

    Returns
    -------
    re, im : ndarray
        The integrals of g (1 - cos w tau) and g (sin w tau - w tau).
    """
    tau = np.asarray(tau, dtype=float)
    p = complex(pole)
    pc = p.conjugate()
    a0 = 1.0 / (p * pc).real
    a1 = 1.0 / (p * (p - pc))
    a2 = a1.conjugate()
    flat = -a0 * np.log(w0) - 2.0 * (a1 * np.log(w0 - p)).real
    wg = (np.pi / 2 - np.arctan((w0 - p.real) / p.imag)) / p.imag
    re = np.zeros_like(tau)
    im = np.zeros_like(tau)
    pos = tau > 0
    tp = tau[pos]

    def osc(q):
        # integral over (w0, inf) of e^{i w tau} / (w - q)
        return np.exp(1j * q * tp) * special.exp1(-1j * tp * (w0 - q))

    e = a0 * osc(0.0) + a1 * osc(p) + a2 * osc(pc)
    re[pos] = amp * (flat - e.real)
    im[pos] = amp * (e.imag - tp * wg)
    return re, im


def phi_base_numeric(sd, temperature, times, epsrel=1e-8) -> PhiBase:
    """Dephasing integrals by adaptive Gauss-Kronrod quadrature in frequency.

    All time points form one vector-valued integrand, integrated over
    segments split at the density's characteristic frequencies.  Past the
    point where the density is a pure Lorentzian tail and coth = 1 to double
    precision, the remaining integrals are taken in closed form; densities
    without such a tail get a final infinite segment instead.
    """
    if not temperature > 0:
        raise ConfigError("temperature_K", "must be > 0")
    if not getattr(sd, "infrared_finite", True):
        raise NumericalError("dephasing integrals diverge for a density with J(0) > 0")
    all_times = np.asarray(times, dtype=float)
    re_out = np.zeros_like(all_times)
    im_out = np.zeros_like(all_times)
    nonzero = all_times != 0.0
    if not nonzero.any():
        return PhiBase(_ro(all_times), _ro(re_out), _ro(im_out))
    times = all_times[nonzero]
    n = times.size
    tau = UNITS.two_pi_c * times
    f = _numeric_integrand(sd, temperature, times)
    bps = [float(b) for b in sd.breakpoints()]
    tail = sd.lorentz_tail() if hasattr(sd, "lorentz_tail") else None
    if tail is not None:
        amp, pole, w0 = tail
        top = max(w0, 40.0 * temperature / UNITS.c2, 2.0 * max(bps, default=0.0))
    else:
        top = max(bps, default=1.0)
    # extra split points every few oscillation periods of the latest time
    # keep the Kronrod error estimate from aliasing on long segments
    points = set(b for b in bps if b < top)
    tmax = float(np.max(tau, initial=0.0))
    if tmax > 0:
        width = OSCILLATIONS_PER_PANEL * 2 * np.pi / tmax
        points.update(np.arange(width, top, width).tolist())
    total, err = integrate.quad_vec(f, 0.0, top, epsrel=epsrel, epsabs=0.0, norm="max",
                                    limit=QUAD_LIMIT, points=sorted(points))
    if tail is None:
        val, e = integrate.quad_vec(f, top, np.inf, epsrel=epsrel, epsabs=0.0, norm="max",
                                    limit=QUAD_LIMIT)
        total = total + val
        err += e
    size = np.max(np.abs(total), initial=0.0)
    if err > 10 * epsrel * max(size, 1e-300):
        raise NumericalError("dephasing quadrature did not converge",
                             achieved=err / max(size, 1e-300))
    re0, im0 = total[:n], total[n:]
    if tail is not None:
        tre, tim = lorentz_tail_integrals(amp, pole, top, tau)
        re0 = re0 + tre
        im0 = im0 + tim
    re_out[nonzero] = re0
    im_out[nonzero] = im0
    return PhiBase(_ro(all_times), _ro(re_out), _ro(im_out))


def phi_base(sd, temperature, times, **kw) -> PhiBase:
    """Analytic route for Drude, quadrature for anything else."""
    if isinstance(sd, Drude):
        return phi_base_drude(sd.reorganization, sd.cutoff, temperature, times, **kw)
    return phi_base_numeric(sd, temperature, times, **kw)


def coupling_sums(grads, correlation=None):
    """Real- and imaginary-part coupling sums for every pair.

    ``re[n, n'] = sum_ij C_ij (d_n - d_n')_i (d_n - d_n')_j`` and
    ``im[n, n'] = sum_ij C_ij (d_n,i d_n,j - d_n',i d_n',j)``.
    """
    d = grads.d
    c = np.eye(d.shape[1]) if correlation is None else np.asarray(correlation)
    diff = d[:, None, :] - d[None, :, :]
    re = np.einsum("abi,ij,abj->ab", diff, c, diff)
    q = np.einsum("ai,ij,aj->a", d, c, d)
    im = q[:, None] - q[None, :]
    return re, im


def dephasing_table(base: PhiBase, grads, correlation, eig) -> DephasingTable:
    re, im = coupling_sums(grads, correlation)
    np.fill_diagonal(re, 0.0)
    phi = re[:, :, None] * base.re0[None, None, :] + 1j * im[:, :, None] * base.im0[None, None, :]
    omega = UNITS.angular(eig.gaps())   # omega[n, n'] = (eps_n - eps_n') / hbar
    return DephasingTable(base.times, _ro(phi), _ro(omega))


def decoherence_factor(table: DephasingTable, n, n2, t):
    """exp(-i omega_nn' t) exp(-phi_nn'(t)) at a grid time ``t`` (fs)."""
    idx = np.flatnonzero(np.isclose(table.times, t, rtol=0, atol=1e-9))
    if idx.size == 0:
        raise ValueError(f"t = {t} fs is not on the dephasing grid")
    i = idx[0]
    return complex(np.exp(-1j * table.omega[n, n2] * table.times[i] - table.phi[n, n2, i]))
