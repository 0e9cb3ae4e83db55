"""How much entanglement a state has depends on how the space is cut into factors.

A Bell pair on qubits A and B, with C sitting in |0>, is a product state when
A and B are lumped into one factor, and maximally entangled when every qubit is
its own factor. Searching over all rotations of a random two-qubit state then
shows both extremes are always reachable.
"""

import math

from entarrow import (
    Factorization,
    FullUnitary,
    PureState,
    QubitPermutations,
    entanglement_entropy,
    extremize_entropy,
    haar_sample,
    ket,
    tensor,
)

bell = PureState.from_vector((ket(0, 1).amplitudes + ket(1, 0).amplitudes) / math.sqrt(2), (2, 2))
psi = tensor([bell, ket(0)])

print("S_ent with A|B|C :", entanglement_entropy(psi, Factorization.identity((2, 2, 2))))
print("S_ent with AB|C  :", entanglement_entropy(psi.with_dims((4, 2)), Factorization.identity((4, 2))))
print("2 log 2          :", 2 * math.log(2))

# Every way of pairing two of the three qubits
cls = QubitPermutations((4, 2))
best, low = extremize_entropy(psi.with_dims((4, 2)), cls, "min")
worst, high = extremize_entropy(psi.with_dims((4, 2)), cls, "max")
print(f"over regroupings: min {low:.4f} with {best.meta['groups']}, max {high:.4f} with {worst.meta['groups']}")

# Any two-qubit state can be made a product, or maximally entangled, by a rotation
phi = haar_sample(4, seed=1, dims=(2, 2))
_, low = extremize_entropy(phi, FullUnitary((2, 2)), "min")
_, high = extremize_entropy(phi, FullUnitary((2, 2)), "max")
print(f"random state over all rotations: min {low:.2e}, max {high:.6f}")
