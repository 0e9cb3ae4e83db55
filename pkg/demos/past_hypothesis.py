"""Checking whether a state looks unentangled under every factorization.

The strong form ("zero under every factorization") fails for every state:
a rotation can always spread a product state over both factors. Restricting
to qubit regroupings gives a hypothesis that some states satisfy.
"""

import json

from entarrow import EphSpec, FullUnitary, QubitPermutations, check_eph, haar_sample, ket, tensor

product = tensor([ket(0), ket(0), ket(1)])

verdict = check_eph(product, EphSpec.eph_0(FullUnitary((2, 2, 2), restarts=2)))
print("all rotations :", verdict.status.value, f"(reached S_ent = {verdict.extremal_value:.4f})")

verdict = check_eph(product.with_dims((4, 2)), EphSpec.eph_0R(QubitPermutations((4, 2))))
print("regroupings   :", verdict.status.value)

random_state = haar_sample(8, seed=3, dims=(4, 2))
verdict = check_eph(random_state, EphSpec.eph_leq_mR(QubitPermutations((4, 2)), m=0.5))
print("random state, bound 0.5 over regroupings:", verdict.status.value)
print(json.dumps(verdict.to_dict(), indent=2))
