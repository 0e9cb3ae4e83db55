"""Deliberately naive reference implementations used as test oracles.

Everything here is written with explicit index loops so that it shares no
code path with the vectorized library.
"""

import itertools
import math

import numpy as np


def partial_trace_loops(rho, dims, keep):
    """Reduced matrix by summing over every traced multi-index."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    rest = [i for i in range(n) if i not in keep]
    kdims = [dims[i] for i in keep]
    rdims = [dims[i] for i in rest]
    strides = [math.prod(dims[i + 1:]) for i in range(n)]
    dk = math.prod(kdims)
    out = np.zeros((dk, dk), dtype=complex)

    def flat(kidx, ridx):
        full = [0] * n
        for pos, i in enumerate(keep):
            full[i] = kidx[pos]
        for pos, i in enumerate(rest):
            full[i] = ridx[pos]
        return sum(f * s for f, s in zip(full, strides))

    kranges = list(itertools.product(*[range(d) for d in kdims]))
    rranges = list(itertools.product(*[range(d) for d in rdims]))
    for a, ka in enumerate(kranges):
        for b, kb in enumerate(kranges):
            total = 0j
            for r in rranges:
                total += rho[flat(ka, r), flat(kb, r)]
            out[a, b] = total
    return out


def entropy_eig(rho):
    """Von Neumann entropy from the eigenvalues, with a 0 log 0 guard."""
    total = 0.0
    for lam in np.linalg.eigvalsh(rho):
        if lam > 1e-300:
            total -= lam * math.log(lam)
    return total


def entanglement_loops(vec, dims):
    rho = np.outer(vec, vec.conj())
    return sum(entropy_eig(partial_trace_loops(rho, dims, [i])) for i in range(len(dims)))


def count_groupings(sizes):
    """Number of unordered ways to split ``sum(sizes)`` labelled qubits into groups of ``sizes``."""
    n = sum(sizes)
    count = math.factorial(n)
    for s in sizes:
        count //= math.factorial(s)
    for s in set(sizes):
        count //= math.factorial(sizes.count(s))
    return count
