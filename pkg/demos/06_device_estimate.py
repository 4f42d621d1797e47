"""Order-of-magnitude numbers for a GaAs beam.

Self-Kerr coefficient from the beam formula, bath occupation at 100 mK
and the Gamma0/nu figure of merit for the quoted rates.
"""

import math

from phononqnd import BeamGeometry, beam_anharmonicity, bose_occupation, distinguishability_time, qnd_figure_of_merit

beam = BeamGeometry(bulk_modulus=75e9, rho=5317, length=0.6e-6, width=0.04e-6, thickness=0.01e-6, omega=2 * math.pi * 0.36e9)
print(f"lambda11 = {beam_anharmonicity(beam):.4e} rad/s")
print(f"thermal occupation at 0.1 K: {bose_occupation(beam.omega, 0.1):.3f}")

rep = qnd_figure_of_merit(1.5e4, 1.2e6)
d = distinguishability_time(1.5e4, 1.2e6)
print(f"Gamma0/nu = {rep.gamma_over_nu:.4f} (resolvable: {rep.verdict})")
print(f"localization time {d.localization_time:.2e} s vs dwell time {d.dwell_time:.2e} s")
