"""Tabulate how the three constructions scale with the table size K: the
naive encoder grows quadratically, the folded form and the cascade baseline
linearly.

Run: python3 demos/04_gate_count_scaling.py
"""
import numpy as np

import qregress as q

rng = np.random.default_rng(0)
m = 1
print(f"{'K':>5} {'naive':>9} {'optimized':>10} {'prep':>7} {'cascade':>8} {'naive/opt':>10}")
for k in (4, 8, 16, 32, 64, 128, 256):
    naive = q.naive_gate_count_formula(k, m)
    optimized = q.optimized_gate_count(k, m)
    vec = rng.normal(size=k)
    vec /= np.linalg.norm(vec)
    prep, _, _ = q.build_state_prep(vec, normalize=False)
    cascade = q.synthesize_reference_real_state(vec)
    print(
        f"{k:>5} {naive.total:>9} {optimized.total:>10} "
        f"{q.gate_counts(prep).total:>7} {q.gate_counts(cascade).total:>8} "
        f"{naive.total / optimized.total:>10.1f}"
    )

print("\noptimized total is 2(K + M + 1); the naive total carries the K**2 "
      "selector expansion.")
