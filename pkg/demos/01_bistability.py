"""Driven Kerr ancilla: where the mean field splits into three branches.

Run with ``python3 demos/01_bistability.py``.
"""

import numpy as np

from phononqnd import AncillaParams, fold_drives, solve_steady_state

# Red detuned with a strong self-Kerr term: the response folds over.
p = AncillaParams.from_kappa(1.0, delta_omega=-3.0, lambda11=0.5)
lo, hi = fold_drives(p)
print(f"folds at epsilon = {lo:.5f} and {hi:.5f}")

for eps in np.linspace(1.0, 2.2, 13):
    sol = solve_steady_state(p.replace(epsilon=eps))
    desc = ", ".join(f"n0={b.n0:7.4f} ({'stable' if b.stable else 'unstable'})" for b in sol.branches)
    print(f"eps={eps:4.2f}  {desc}")

# The operating branch is the lowest stable one, so the readout sits on the
# lower limb until the drive passes the upper fold.
sol = solve_steady_state(p.replace(epsilon=1.7))
print("operating n0 at eps=1.7:", sol.branch("operating").n0)
