"""Exciton (adiabatic) basis at zero bath displacement.

Cyclic Jacobi diagonalization of the site Hamiltonian and the overlap
products <n|j><j|m> that feed both the energy-gap gradients (dephasing)
and the non-adiabatic couplings (relaxation).
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

MAX_SWEEPS = 100
OFFDIAG_TOLERANCE = 1e-13


@dataclass(frozen=True)
class Eigensystem:
    """``energies`` ascending (cm^-1); ``u[j, m] = <j|m>``."""

    energies: np.ndarray
    u: np.ndarray

    @property
    def n(self):
        return self.energies.shape[0]

    def gaps(self):
        """Matrix of eps_m - eps_n in cm^-1, indexed [m, n]."""
        return self.energies[:, None] - self.energies[None, :]


@dataclass(frozen=True)
class OverlapTensor:
    """``k[n, m, j] = <n|j><j|m>``; ``d[m, j] = k[m, m, j]`` is the
    Hellmann-Feynman gradient of eps_m with respect to Q_j at Q = 0."""

    k: np.ndarray
    d: np.ndarray


def _rotate(a, v, p, q):
    apq = a[p, q]
    diff = a[q, q] - a[p, p]
    if abs(apq) < 1e-300 * max(abs(diff), 1.0):
        a[p, q] = a[q, p] = 0.0
        return
    theta = diff / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta                       # theta^2 would overflow
    elif theta != 0:
        t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    else:
        t = 1.0
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    ap = a[:, p].copy()
    aq = a[:, q].copy()
    a[:, p] = c * ap - s * aq
    a[:, q] = s * ap + c * aq
    ap = a[p, :].copy()
    aq = a[q, :].copy()
    a[p, :] = c * ap - s * aq
    a[q, :] = s * ap + c * aq
    a[p, q] = a[q, p] = 0.0

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def diagonalize(h) -> Eigensystem:
    """Full eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
    below ``1e-13 * ||H||_F``.  Eigenvalues are returned ascending; each
    eigenvector is signed so that its largest-magnitude entry is positive.

    Parameters
    ----------
    h : ExcitonHamiltonian or array_like
        Symmetric matrix (only ``h.h`` is read for a Hamiltonian object).

    Raises
    ------
    NumericalError
        If the rotations have not converged after 100 sweeps.
    """
    a = np.array(getattr(h, "h", h), dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.all(np.isfinite(a)):
        raise ValueError("expected a finite square matrix")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(a))):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    target = OFFDIAG_TOLERANCE * scale

    upper = np.triu_indices(n, 1)

    def off(m):
        return np.sqrt(2.0) * np.linalg.norm(m[upper])

    sweeps = 0
    while off(a) >= target and scale > 0:
        if sweeps == MAX_SWEEPS:
            raise NumericalError("Jacobi iteration did not converge", achieved=off(a) / scale)
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)
        sweeps += 1

    energies = np.diag(a).copy()
    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    v = v[:, order]
    for m in range(n):
        if v[np.argmax(np.abs(v[:, m])), m] < 0:
            v[:, m] = -v[:, m]
    energies.setflags(write=False)
    v.setflags(write=False)
    return Eigensystem(energies, v)


def overlap_products(eig: Eigensystem) -> OverlapTensor:
    u = eig.u
    k = np.einsum("jn,jm->nmj", u, u)
    d = (u**2).T.copy()
    k.setflags(write=False)
    d.setflags(write=False)
    return OverlapTensor(k, d)
