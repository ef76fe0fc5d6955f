# %% [markdown]
# # Larger registers
#
# Chains of cold/hot pairs share a single environment qubit. With a nearly
# pure environment the plain second law catches the leak only for one pair,
# while negative alpha keeps working as the register grows.

# %%
import numpy as np

from thermoleak.scenarios import ScenarioConfig
from thermoleak.stats import run_protocol

for n in (1, 2, 3, 4):
    cfg = ScenarioConfig(variant="scaleup", scaleup_n=n, scaleup_variant="chain", theta_c="0.25pi",
                         theta_h="0.4pi", theta_e="0.05pi", frameworks=("global_passivity",), executions=1)
    s = run_protocol(cfg).sweeps()["gp_system"]
    print(f"n={n} ({2 * n + 1} qubits)  alpha=1: {s.value_at(1.0):+.4f}"
          f"  negative alpha detects: {bool(np.any(s.values[s.alphas < 0] < 0))}")
