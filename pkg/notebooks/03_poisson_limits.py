"""Monte Carlo look at the Poisson limits near time n.

Small sizes so it finishes in under a minute; the command-line harness runs
the full campaigns.  Run with ``python3 notebooks/03_poisson_limits.py``.
"""
import numpy as np

from rskpoisson.stats import (counting_paths, exp_tail_test, poisson_process_fit,
                              synthetic_poisson_paths)

rng = np.random.default_rng(3)

# row growth events of RSK around n, as counting paths in units of sqrt(n)
paths = counting_paths(2500, 3.0, 2, 400, rng)
fit = poisson_process_fit(paths, 1.0, rng)
for r in fit.rows:
    print(r.row, round(r.mean, 3), round(r.variance, 3), r.chi2_p, r.ks_p)

# the same estimator on genuine Poisson processes, for comparison
null = poisson_process_fit(synthetic_poisson_paths(2500, 3.0, 2, 400, rng), 1.0, rng)
print([round(r.mean, 3) for r in null.rows], null.rejected(0.01))

# one minus the largest bottom-row entry, times sqrt(n), against Exp(1)
rep = exp_tail_test(2500, 1000, rng)
print(rep.mean, rep.ks_p)
