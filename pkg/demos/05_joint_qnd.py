"""Two-oscillator Lindblad run: number states survive, coherences decay.

Without system damping the coupling only dephases the system; the rate of
that dephasing between |0> and |1> is the measurement rate Gamma.
"""

import math

import numpy as np

from phononqnd import AncillaParams, CouplingParams, ModelParams, SystemParams, coefficients_for, operating_branch, signal_gain
from phononqnd.fock import fit_decay_rate, joint_evolution

anc = AncillaParams.from_kappa(1.0, delta_omega=0.5, lambda11=0.005, epsilon=1.2, N1=0.1)
coup = CouplingParams(0.02)
model = ModelParams(SystemParams(nu=0.0), anc, coup)
gamma = coefficients_for(anc, coup).gamma

T = 3.0 / gamma
js = joint_evolution(3, 20, model, T, times=np.linspace(0, T, 301))
rate = fit_decay_rate(js.times, js.rho_sys[:, 0, 1], 3.0, T)
print(f"Gamma = {gamma:.4e}, fitted coherence decay = {rate:.4e}")
print("population drift:", np.abs(js.populations - js.populations[0]).max())

# Readout: each extra phonon moves the locked quadrature by the gain.
sig = signal_gain(operating_branch(anc), anc, coup)
levels = []
for n in range(3):
    rho = np.zeros((3, 3), dtype=complex)
    rho[n, n] = 1
    j = joint_evolution(3, 20, model, 30.0, times=[0, 30.0], rho_sys0=rho, quadrature_phase=sig.quadrature_phase)
    levels.append(math.sqrt(2 * anc.mu) * j.quadrature[-1])
print("quadrature steps:", np.round(np.diff(levels), 5), " gain:", round(sig.gain, 5))
