"""Fields, norms and conserved quantities along the flow.

Builds a random spectral field, shows the two norm conventions, and tracks
mass and Hamiltonian along the defocusing physical evolution.
"""

import numpy as np

from bnls import FlowSpec, SpectralField, evolve, hamiltonian, mass, sobolev_norm
from bnls.measures import GaussianSpec, sample

field = sample(GaussianSpec(s=1.0, sample_cutoff=12, r=2.0, seed=1), 1).fields[0]

print("l2 coefficient norm :", sobolev_norm(field, 0.0))
print("H^1 norm            :", sobolev_norm(field, 1.0))
print("mass (2*pi weighted):", mass(field))
print("hamiltonian         :", hamiltonian(field, +1))

spec = FlowSpec(variant="physical", dt=1e-4, integrator="filon")
traj = evolve(spec, field, 0.0, 0.05)

m0, h0 = mass(traj.initial), hamiltonian(traj.initial, +1)
print("\n   t        mass drift      hamiltonian drift")
for i in range(0, len(traj), len(traj) // 5):
    state = traj.state(i)
    print(
        f"{traj.times[i]:6.3f}   {abs(mass(state) - m0) / m0:12.3e}   "
        f"{abs(hamiltonian(state, +1) - h0) / abs(h0):12.3e}"
    )
