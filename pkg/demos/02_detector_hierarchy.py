# %% [markdown]
# # Which check sees which leak
#
# Passivity, its energy-weighted deformation and the Renyi-divergence test
# are not equally sensitive. Two settings show the ordering.

# %%
import math

from thermoleak.inequality import (
    alpha_sweep,
    build_B,
    default_alpha_grid,
    default_renyi_grid,
    energy_observable,
    subsystem_rt_test,
)
from thermoleak.qcore import assemble_unitary, leak_circuit, swap_leak_circuit, transfer_matrix
from thermoleak.thermal import QubitSpec, ensemble_populations

PI = math.pi
alphas = default_alpha_grid()


def run(specs, circuit):
    p0 = ensemble_populations(specs)
    return p0, transfer_matrix(assemble_unitary(circuit)) @ p0

# %% [markdown]
# Hot qubit at infinite temperature: passivity of `c`+`h` is blind, the
# energy-based deformation is not, even at alpha = 1.

# %%
specs = (QubitSpec(PI / 4), QubitSpec(PI / 2), QubitSpec(PI / 4))
p0, pf = run(specs, leak_circuit())
gp = alpha_sweep(build_B(specs, ["c", "h"]), p0, pf, alphas)
pd = alpha_sweep(energy_observable(specs, ["c", "h"]), p0, pf, alphas)
print(f"passivity min {gp.values.min():+.4f}   deformation at alpha=1 {pd.value_at(1.0):+.4f}")

# %% [markdown]
# SWAP interaction with a warmer environment: both Renyi sweeps stay positive
# while passivity flags the leak for small alpha.

# %%
specs = (QubitSpec(PI / 4), QubitSpec(0.4 * PI), QubitSpec(0.35 * PI))
p0, pf = run(specs, swap_leak_circuit())
for sys_, bath in (("c", "h"), ("h", "c")):
    rt = subsystem_rt_test(specs, p0, pf, sys_, bath, alpha_tilde=default_renyi_grid())
    print(f"Renyi test with {sys_} as system: min {rt.values.min():+.5f}")
gp = alpha_sweep(build_B(specs, ["c", "h"]), p0, pf, alphas)
print("passivity detects at alpha:", [round(float(a), 2) for a in gp.alphas[gp.values < 0]][:6], "...")
