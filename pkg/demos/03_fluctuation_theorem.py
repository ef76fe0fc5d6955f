# %% [markdown]
# # Two-point trajectories and the fluctuation relation
#
# Tracing out the environment leaves a stochastic map on `c`+`h`. Sampling
# initial and final energies gives a heat distribution whose exponential
# average equals one exactly when nothing escaped.

# %%
import math

from thermoleak.inequality import (
    fluctuation_theorem,
    process_majorization,
    reduced_transfer_matrix,
    trajectory_ensemble,
)
from thermoleak.qcore import assemble_unitary, leak_circuit, transfer_matrix
from thermoleak.thermal import QubitSpec, ensemble_populations

specs = (QubitSpec(math.pi / 4), QubitSpec(0.4 * math.pi), QubitSpec(math.pi / 4))
betas = [s.beta for s in specs[:2]]
p_sys = ensemble_populations(specs[:2])

for leak in (False, True):
    t = transfer_matrix(assemble_unitary(leak_circuit(leak=leak)))
    t_red = reduced_transfer_matrix(t, specs[2].populations, ["c", "h"])
    traj = trajectory_ensemble(t_red, p_sys, specs[:2])
    print(f"leak={leak!s:5}  <exp(-sum beta Q)> = {fluctuation_theorem(traj, betas):.6f}"
          f"   reduced map bistochastic: {process_majorization(t_red).majorizes}")

# %% [markdown]
# The trajectory table can be exported for plotting elsewhere.

# %%
print(traj.to_csv().splitlines()[:4])
