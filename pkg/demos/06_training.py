"""Train the encoded model end to end on a synthetic linear dataset and
compare against the closed-form least-squares baseline.

Run: python3 demos/06_training.py        (about half a minute, exact mode)
"""
import warnings

import numpy as np

import qregress as q

warnings.filterwarnings("ignore")

table, w_true = q.synthetic_linear_table(32, 3, noise=0.05, seed=11)
train, test = q.split_rows(table, 0.75, seed=11)
train_s, test_s = q.standardize(train, test)

baseline = q.fit_classical_least_squares(train_s)
print("least-squares baseline: weights", np.round(baseline.weights, 4),
      f"train R2 {baseline.train_r2:.4f}")

config = q.TrainConfig(
    learning_rate=0.05, iterations=300, batch_size=8, shots=None, seed=11
)
model = q.fit_quantum(train_s, config, test_s)
print(f"\nencoded model after {config.iterations} iterations "
      f"({model.n_circuit_evaluations} circuit evaluations):")
print("  weights:", np.round(model.weights, 4))
for it in (0, 50, 100, 200, 299):
    h = model.history[it]
    print(f"  iter {h['iteration']:>3}: loss {h['loss']:.6f} "
          f"train R2 {h['train_r2']:+.4f} test R2 {h['test_r2']:+.4f}")
print("  weight gap to baseline:",
      np.round(np.abs(model.weights - baseline.weights), 4))
