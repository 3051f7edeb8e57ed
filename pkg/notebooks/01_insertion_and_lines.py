"""Schensted insertion next to the Hammersley multi-line picture.

Run with ``python3 notebooks/01_insertion_and_lines.py``.
"""
import numpy as np

from rskpoisson import Tableau, rsk, run_multiline, schensted_insert, check_rsk_equivalence

# Insert 18 into a small tableau and watch the bumping route
T = Tableau([[16, 37, 41, 82], [23, 53, 70], [74, 99]])
T2, route = schensted_insert(T, 18)
print("route:", route)
print("rows: ", T2.rows)

# RSK of a short word gives the insertion tableau P and recording tableau Q
P, Q, shape = rsk([0.62, 0.17, 0.88, 0.35, 0.51, 0.04])
print("P", P.rows)
print("Q", Q.rows)
print("shape", shape)

# The same word as space-time points (w_i, i): line y carries row y of P
word = np.random.default_rng(1).random(30).tolist()
state = run_multiline([(a, t) for t, a in enumerate(word, start=1)], k=2)
P, _, _ = rsk(word)
for y, line in enumerate(state.lines):
    print(y, np.allclose(line.positions, P.rows[y]))

# and it holds after every single step, not only at the end
print(check_rsk_equivalence(word, 3).passed)
