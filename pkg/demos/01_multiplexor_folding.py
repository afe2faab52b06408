"""Walk through the core circuit identity: a multi-controlled RZ expands
into a Gray-code cycle of CNOTs and rotations, and a chain of such cycles
folds back into a single cycle with Walsh-combined angles.

Run: python3 demos/01_multiplexor_folding.py
"""
import numpy as np

import qregress as q

# A 3-controlled RZ is not native on any hardware. Expanding it gives
# 2**3 = 8 rotations on the target interleaved with 8 CNOTs whose controls
# follow the closed Gray-code walk 0,1,0,2,0,1,0,2.
theta = 0.9
node = q.mcrz([0, 1, 2], 3, theta)
expanded = q.decompose_mcrz(node)
print("expanded 3-controlled RZ:")
print("  counts:", q.gate_counts(expanded).as_dict())
print("  rotation angles:", [round(g.angle, 4) for g in expanded if g.kind == "rz"])
print("  cnot controls:  ", [g.control for g in expanded if g.kind == "cnot"])
print(
    "  equivalent to the node:",
    q.equivalent_up_to_phase(q.Circuit(4, (node,)), expanded, 1e-10),
)

# Two selector gadgets in a row share the same CNOT skeleton, so their
# rotations merge term by term: 2 x 16 gates collapse to 8.
ti, tj = 0.31, 1.13
gates = []
for angles in ([-ti / 4, -ti / 4, ti / 4, ti / 4], [tj / 4, -tj / 4, tj / 4, -tj / 4]):
    for k, angle in enumerate(angles):
        gates.append(q.rz(2, angle))
        gates.append(q.cnot([0, 1, 0, 1][k], 2))
chain = q.Circuit(3, tuple(gates))
folded, report = q.fold_phases(chain)
print("\nfolding two stacked selector gadgets:")
print("  before:", len(chain), "gates; after:", len(folded), "gates")
print("  merged angles:", [round(g.angle, 4) for g in folded if g.kind == "rz"])
print("  expected:     ", [round(v, 4) for v in
                           [(tj - ti) / 4, -(ti + tj) / 4, (ti + tj) / 4, (ti - tj) / 4]])
print("  rewrites:", list(report.rewrites))

# The same angles come straight out of the Walsh-Hadamard transform of the
# per-selector angles, which is what the direct builder uses.
alphas = np.zeros(4)
alphas[2] = -ti  # selector (0,1)
alphas[3] = tj  # selector (1,1)
print("  walsh angles: ", [round(float(v), 4) for v in q.walsh_angles(alphas)])
