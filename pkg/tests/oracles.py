"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy.linalg import eigh


def random_spd(rng, count, n, spread=1.0):
    """Batch of SPD matrices Q diag(exp(spread * N(0,1))) Q^T."""
    q, _ = np.linalg.qr(rng.standard_normal((count, n, n)))
    lam = np.exp(spread * rng.standard_normal((count, n)))
    return np.einsum("kij,kj,klj->kil", q, lam, q)


def pencil_alphas(g1, g2):
    """Generalized eigenvalues of (g2, g1) one matrix at a time via scipy."""
    return np.array([eigh(b, a, eigvals_only=True) for a, b in zip(g1, g2)])


def dtilde_ref(g1, g2):
    al = pencil_alphas(g1, g2)
    n = al.shape[-1]
    return 2 * np.sinh(n * np.max(np.abs(np.log(al)), axis=-1) / 4)


def rho_ref(g1, g2):
    return np.sqrt(np.linalg.det(g1) / np.linalg.det(g2))


def barrier_t_sq(E, V0, a):
    """Closed-form |t|^2 of a square barrier of height V0 and width a at energy E != V0."""
    if E < V0:
        kap = math.sqrt(V0 - E)
        return 1.0 / (1.0 + V0**2 * math.sinh(kap * a) ** 2 / (4 * E * (V0 - E)))
    q = math.sqrt(E - V0)
    return 1.0 / (1.0 + V0**2 * math.sin(q * a) ** 2 / (4 * E * (E - V0)))
