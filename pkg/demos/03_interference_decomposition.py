# %% [markdown]
# # Interference and decoherence
#
# Two equal paths interfere constructively, destructively or not at all
# depending on their relative phase. With many channels and random phases
# the cross terms average out.

# %%
import math

import numpy as np

from qattention.quantum import QuantumParams, decompose, probability

h = 1 / math.sqrt(2)
for theta in (0.0, math.pi / 2, math.pi):
    params = QuantumParams([h, h], [0.6, 0.6 * np.exp(1j * theta)])
    d = decompose(params, {1, 2})
    print(f"theta={theta:.3f}: P={probability(params, {1, 2}):.4f} classical={d.classical_part:.4f} Int={d.interference_total:+.4f}")

# %%
rng = np.random.default_rng(0)
k = 6
ints, classical = [], []
for _ in range(5000):
    psi = np.full(k, 1 / math.sqrt(k)) * np.exp(1j * rng.uniform(0, 2 * np.pi, k))
    d = decompose(QuantumParams(psi, np.full(k, 0.5)), range(1, k + 1))
    ints.append(d.interference_total)
    classical.append(d.classical_part)
print(f"mean interference {np.mean(ints):+.4f} vs mean classical part {np.mean(classical):.4f}")
