# %% [markdown]
# # Recovering unknown gate errors
#
# A synthetic device adds hidden Ry rotations to the circuit. The calibrator
# places correction rotations in fixed slots and tunes them with restarted
# Nelder-Mead until the predicted transfer matrix matches the measured one.

# %%
from thermoleak.calibrate import calibrate, synthetic_problem

for label, kwargs in (("noiseless", {}), ("8192 shots, 10% flips", {"shots": 8192, "noise_profile": "symmetric-0.1"})):
    problem, _ = synthetic_problem(seed=0, **kwargs)
    result = calibrate(problem, seed=0)
    print(f"{label:22} error {result.err_initial:.4f} -> {result.err_final:.2e}"
          f"  ({result.evaluations} evaluations)")
