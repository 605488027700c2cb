"""Independent dense oracles built with plain numpy kron chains.

These never touch the package's lattice/operator machinery, so agreement is
a genuine two-path check.
"""

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def kron_site_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    factors = [ID2] * n
    factors[site] = op
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def chain_hamiltonian(n: int, coupling: float, s: float) -> np.ndarray:
    """H(s) = sum_j (-sz_j + s*coupling*sx_j sx_{j+1 mod n}), site 0 = MSB."""
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        h -= kron_site_op(SZ, j, n)
        h += s * coupling * kron_site_op(SX, j, n) @ kron_site_op(SX, (j + 1) % n, n)
    return h


def ground_pair(h: np.ndarray):
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs[:, 0]
