"""
Structure checks: symplecticity of one step, convergence orders and the NHP
residual ``xi''' - xi'' x xi`` along discrete trajectories.
"""
import numpy as np

from lie_cubics import algebra as al
from lie_cubics import diagnostics as dg
from lie_cubics.integrators import HOHPState, StepParams, flow

rng = np.random.default_rng(1)
s = HOHPState.make(al.cay(rng.normal(size=3)), *rng.normal(size=(3, 3)))

# %% the finite-difference symplecticity defect shrinks like eps^2
for scheme in ("euler", "sv"):
    devs = [dg.check_symplectic(scheme, s, StepParams(0.5), e) for e in (1e-3, 1e-4, 1e-5)]
    print(scheme, ["%.2e" % d for d in devs],
          "slope %.3f" % dg.fit_slope([1e-3, 1e-4, 1e-5], devs))

# a map that rescales mu is not symplectic, and the check notices
bad = lambda s, p: HOHPState(s.g, s.xi + p.h * s.nu, 1.1 * s.mu, s.nu)
print("rescaled-momentum map:", dg.check_symplectic(bad, s, StepParams(0.5), 1e-4))

# %% convergence orders against a fine reference
s0 = HOHPState.make(np.eye(3), xi=(-6, 1, 0), mu=(0, 36, 0), nu=(0, 0, 6))
hs = [1 / 100, 1 / 200, 1 / 400, 1 / 800]
for scheme in ("euler", "sv"):
    rep = dg.convergence_order(scheme, s0, 1.0, hs)
    print(scheme, "errors", ["%.2e" % e for e in rep.errors], "slope %.3f" % rep.slope)

# %% NHP residual
for n in (100, 200, 400, 800):
    traj = flow(s0, StepParams(1 / n), n, "sv")
    print(n, "max NHP residual %.3e" % max(dg.nhp_residual(traj, 1 / n)))
