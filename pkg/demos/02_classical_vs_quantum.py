# %% [markdown]
# # Classical line vs. interference fit
#
# The classical model can only rise or stay flat as channels are added. A drop
# in P(n) is out of its reach, while the amplitude model absorbs it through
# a destructive phase.

# %%
from qattention.cascade import PatternStats
from qattention.classical import fit_classical, predict_classical
from qattention.quantum import fit_quantum, interference_table, predict_quantum

observed = [0.05, 0.04, 0.06, 0.08, 0.10, 0.07]
stats = PatternStats.from_sequence(observed)

# %%
classical = fit_classical(stats)
quantum = fit_quantum(stats)
print(f"classical: slope {classical.slope:.5f}, residual {classical.residual:.2e}")
print(f"quantum:   q1 {quantum.q1:.4f}, p {quantum.p:.4f}, residual {quantum.residual:.2e}")

# %%
print(" n  observed  classical  quantum")
for n, y in enumerate(observed, start=1):
    print(f"{n:2d}  {y:.4f}    {predict_classical(classical, n):.4f}     {predict_quantum(quantum, n):.4f}")

# %% [markdown]
# Pairwise interference terms of the fitted state; negative entries pull P(n) down.

# %%
for (i, j), value in interference_table(quantum).items():
    print(f"Int_{i}{j} = {value:+.5f}")
