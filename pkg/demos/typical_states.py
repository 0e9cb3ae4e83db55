"""Random states are almost always close to maximally entangled.

For Haar-random states on a 2 x 16 system the average single-side entropy
sits just below log 2, and on an 8 x 8 system no sample out of thousands
comes near a product state. Restricting to a small subspace changes that.
"""

import math

from entarrow.entropy import MacrostateDecomposition
from entarrow.experiments import typicality

stats = typicality(2, 16, 10000, seed=0)
exact = sum(1 / k for k in range(17, 33)) - 1 / 32
print(f"2 x 16: mean single-side entropy {stats.mean_single_side:.4f} (exact average {exact:.4f}, log 2 = {math.log(2):.4f})")
print(f"        standard error of the mean {stats.standard_error / 2:.1e}")

square = typicality(8, 8, 5000, seed=0)
print(f"8 x 8:  fraction below 10% of the maximum {square.fraction_below}, smallest sample {square.min:.3f} of {square.max_possible:.3f}")

# A macrostate made of the eight states with the first factor in |0> holds only products
D = MacrostateDecomposition.from_blocks(64, [list(range(8)), list(range(8, 64))])
inside = typicality(8, 8, 500, seed=0, restriction=(D, 0))
print(f"inside a product-spanned macrostate: mean S_ent {inside.mean:.2e}")
