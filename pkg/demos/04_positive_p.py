"""Positive-P ensemble for the ancilla compared with the linear theory.

A small ensemble keeps the run short; error bars come from batch means.
The step is small because Euler-Maruyama biases the covariances at dt=0.01.
"""

from phononqnd import AncillaParams, build_model, operating_branch, run_ensemble

p = AncillaParams.from_kappa(1.0, delta_omega=0.5, lambda11=0.005, epsilon=2.0)
br = operating_branch(p)
C = build_model(br, p).one_time

st = run_ensemble(p, n_traj=1000, dt=0.002, t_final=25.0, transient=10.0, seed=3)
print(f"<beta>       {st.mean_beta:.5f} +- {st.se_beta:.1e}   (beta0 {br.beta0:.5f})")
print(f"<b1^dag b1>  {st.cov_ba.real:.5f} +- {st.se_ba:.1e}   (linear {C[0, 1].real:.5f})")
print(f"<b1 b1>      {st.cov_bb:.5f} +- {st.se_bb:.1e}   (linear {C[0, 0]:.5f})")
print("diverged trajectories:", st.divergence_count)
