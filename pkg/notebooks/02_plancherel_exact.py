"""Exact Plancherel law and row growth probabilities.

Run with ``python3 notebooks/02_plancherel_exact.py``.
"""
import math

import numpy as np

from rskpoisson import dimension, partitions, plancherel_pmf, transition_probabilities
from rskpoisson.plancherel import row_growth_table, shape_counts
from rskpoisson.stats import EmpiricalDistribution, expected_plugin_tvd, tvd

# sum of d(lambda)^2 over partitions of n is n!
for n in range(1, 9):
    print(n, sum(dimension(lam) ** 2 for lam in partitions(n)) == math.factorial(n))

# transitions out of a shape, as exact fractions
print(transition_probabilities((2, 1)))

# probability that row r grows at step n, and its partial sums s_n
table = row_growth_table(3, 40)
s = np.array([[float(sum(row[:K + 1])) for K in range(4)] for row in table])
n = np.arange(1, 41)
print(np.column_stack([n, s, (np.arange(1, 5) / np.sqrt(n)[:, None])])[::8].round(4))

# sampled shapes of size 8 against the exact law
law = plancherel_pmf(8)
counts = shape_counts(8, 10 ** 5, np.random.default_rng(2))
print("TVD", float(tvd(EmpiricalDistribution(counts), law)),
      "same-law baseline", expected_plugin_tvd([float(p) for p in law.probabilities], 10 ** 5))
