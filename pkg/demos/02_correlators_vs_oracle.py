"""Linearized two-time correlators against the Fock-space oracle.

The oracle integrates the full Lindblad equation and applies the quantum
regression theorem; the linear model keeps only fluctuations around the
mean field.  For weak Kerr terms they should agree to a few percent.
"""

import numpy as np

from phononqnd import AncillaParams, build_model, operating_branch, operator_correlators
from phononqnd.fock import ancilla_steady_state, destroy, regression_correlator

p = AncillaParams.from_kappa(1.0, delta_omega=0.3, lambda11=0.01, epsilon=0.8, N1=0.2)
br = operating_branch(p)
ss, gen, cert = ancilla_steady_state(p)
print(f"truncation {gen.dim}, steady-state residual {cert.residual:.1e}")
print("oracle <b> =", np.round(ss.expect(destroy(gen.dim)), 6), " mean field beta0 =", np.round(br.beta0, 6))

taus = np.linspace(0.0, 5.0, 11)
lin = operator_correlators(build_model(br, p), taus)
for ch in ("b_bdag", "bdag_b", "bb"):
    fock = regression_correlator(ss, gen, ch, taus)
    print(f"\n{ch}:  tau   linear            oracle")
    for t, a, b in zip(taus, lin[ch], fock):
        print(f"      {t:3.1f}  {a.real:+.5f}{a.imag:+.5f}j  {b.real:+.5f}{b.imag:+.5f}j")

# The residual gap grows like lambda11 times the thermal occupation: the
# linear model leaves out the Hartree shift from <b1^dag b1>.
