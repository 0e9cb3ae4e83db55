"""Straight-line Monte Carlo baseline for the mean single-side entanglement entropy.

Haar states are taken as the first column of a Haar unitary built from the QR
decomposition of a complex Ginibre matrix with the phase correction, and the
reduced state is diagonalized directly. None of this touches the library.

Run as a script to print the baseline: ``python3 tests/oracles/haar_entropy_oracle.py``.
"""

import math
import sys

import numpy as np


def haar_unitary(rng, n):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def mean_single_side_entropy(dim_a, dim_b, n_samples, seed=2024):
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(n_samples):
        psi = haar_unitary(rng, dim_a * dim_b)[:, 0]
        m = psi.reshape(dim_a, dim_b)
        rho_a = m @ m.conj().T
        lam = np.linalg.eigvalsh(rho_a)
        s = 0.0
        for value in lam:
            if value > 0:
                s -= value * math.log(value)
        total += s
    return total / n_samples


def page_mean(dim_a, dim_b):
    """Exact average entropy of the smaller side, m <= n."""
    m, n = sorted((dim_a, dim_b))
    return sum(1.0 / k for k in range(n + 1, m * n + 1)) - (m - 1) / (2 * n)


if __name__ == "__main__":
    da, db, ns = (int(a) for a in (sys.argv[1:4] if len(sys.argv) > 3 else (2, 16, 10000)))
    print(f"Monte Carlo: {mean_single_side_entropy(da, db, ns):.6f}")
    print(f"Exact:       {page_mean(da, db):.6f}")
