# %% [markdown]
# # Undoing readout bias
#
# Real readout flips bits with state-dependent probabilities. Here the
# preparation angles are read back from sampled shots, once raw and once
# after inverting an estimated confusion matrix.

# %%
import math

from thermoleak.scenarios import ScenarioConfig, preparation_angles

cfg = ScenarioConfig(theta_c="0.25pi", theta_h="0.4pi", theta_e="0.25pi", noise_profile="tenerife", shots=8192)
for label, r in preparation_angles(cfg, seed=0).items():
    print(f"{label}: true {r['theory'] / math.pi:.4f}pi  raw {r['uncompensated'] / math.pi:.4f}pi"
          f"  corrected {r['compensated'] / math.pi:.4f}pi")
