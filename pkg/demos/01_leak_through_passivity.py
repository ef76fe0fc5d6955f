# %% [markdown]
# # Spotting a leak with a passivity sweep
#
# Three qubits start in thermal states: a cold one `c`, a hot one `h` and an
# environment qubit `e` that we pretend we cannot see. A CNOT network lets
# `h` and `e` talk before `h` and `c` exchange energy. Watching only `c` and
# `h`, can we tell that the pair was not closed?

# %%
import math

import numpy as np

from thermoleak.inequality import alpha_sweep, build_B, crossing_points, default_alpha_grid, majorization_test
from thermoleak.qcore import assemble_unitary, leak_circuit, transfer_matrix
from thermoleak.thermal import QubitSpec, ensemble_populations

specs = (QubitSpec(math.pi / 4), QubitSpec(0.4 * math.pi), QubitSpec(math.pi / 4))
p0 = ensemble_populations(specs)
alphas = default_alpha_grid()

# %% [markdown]
# The circuits are permutations of the computational basis, so the classical
# transfer matrix carries all the information we need.

# %%
def final_populations(leak):
    return transfer_matrix(assemble_unitary(leak_circuit(leak=leak))) @ p0

for leak in (True, False):
    sweep = alpha_sweep(build_B(specs, ["c", "h"]), p0, final_populations(leak), alphas)
    print(f"leak={leak!s:5}  min over alpha {sweep.values.min():+.4f}  at alpha=1 {sweep.value_at(1.0):+.4f}")

# %% [markdown]
# With the leak on, negative values show up for negative alpha and for small
# positive alpha while alpha = 1 (the plain second law) stays positive.

# %%
b = build_B(specs, ["c", "h"])
pf = final_populations(True)
print("sign change in (0, 1]:", [round(r, 4) for r in crossing_points(b, p0, pf, 1e-6, 1.0)])

# %% [markdown]
# Including `e` closes the system and every check becomes consistent again.

# %%
full = alpha_sweep(build_B(specs, ["c", "h", "e"]), p0, pf, alphas)
print(f"full register: min {full.values.min():+.4f}; majorization {majorization_test(p0, pf).majorizes}")
