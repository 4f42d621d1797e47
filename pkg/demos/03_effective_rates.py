"""Delta, Theta and Gamma of the reduced system master equation.

Also prints the Gamma/Gamma0 resonance for a few drives: the Kerr term
pulls the peak to negative detuning, makes it taller and narrows it.
"""

import numpy as np

from phononqnd import AncillaParams, CouplingParams, coefficients_for, gamma_ratio_sweep

c = CouplingParams(0.02)
p = AncillaParams.from_kappa(1.0, delta_omega=0.5, lambda11=0.1, epsilon=1.0, N1=0.3)
co = coefficients_for(p, c, lambda00=0.001)
print(f"Delta = {co.delta:.6g}  Theta = {co.theta:.6g}  Gamma = {co.gamma:.6g}  Gamma/Gamma0 = {co.ratio:.4f}")

grid = np.linspace(-3, 3, 601)
for eps in (0.6, 0.9, 1.2):
    r = np.array([row.ratio for row in gamma_ratio_sweep(AncillaParams(), grid, [(eps, 0.3)])])
    above = grid[r >= r.max() / 2]
    print(f"eps={eps}: peak {r.max():.3f} at dw={grid[r.argmax()]:+.2f}, half-max span {above[0]:+.2f}..{above[-1]:+.2f}")
