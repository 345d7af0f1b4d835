"""Preparing jumpy data for the viscous solver without losing its shape.

The viscous junction conditions are differential: admissible states
must satisfy them pointwise, which a raw piecewise-constant profile
never does. The preparation step replaces each profile with a smooth
surrogate, at viscosity scale epsilon_n = 2^-n, that

  * enters the generator's domain (membership residual ~ 0),
  * converges back to the raw data in L1 as n grows,
  * keeps its derivative mass within a fixed budget of the raw total
    variation, and
  * keeps epsilon_n times its W^{2,1} size level, not blowing up.

The table below reports all four along the sweep. The data is chosen
node-active (the jump leaves value 1 sitting at the junction end) so
the junction corrections actually do work.
"""

from __future__ import annotations

from starflux import (
    ArcProfile,
    CouplingMatrix,
    PiecewiseConstantField,
    build_compatible,
    build_network,
)

net = build_network([(1.0, 1.0, "in"), (1.0, 2.0, "out")])
K = CouplingMatrix.from_array([[0.0, 0.8], [0.8, 0.0]], net)
raw = PiecewiseConstantField(
    (
        ArcProfile.from_lists(1.0, [0.4], [0.0, 1.0]),
        ArcProfile.from_lists(1.0, [], [0.6]),
    )
)
boundary = [0.0, 0.6]
print(f"raw total variation: {raw.total_variation():.3f}")
print()
print("  n   epsilon_n    l1 gap     deriv mass  eps*W21   membership")
for n in range(3, 11):
    eps_n = 2.0**-n
    compat = build_compatible(raw, boundary, net, K, eps_n, theta=1.5)
    print(
        f"  {n:2d}  {eps_n:9.6f}  {compat.l1_error:.3e}  "
        f"{sum(compat.deriv_norms):9.5f}  {eps_n * sum(compat.w21_norms):7.4f}  "
        f"{compat.membership_residual:.2e}"
    )
print()
print(
    "the l1 gap halves with epsilon_n, the derivative mass drifts back"
    " down toward the raw total variation, and the scaled W^{2,1} column"
    " stays flat: exactly the uniformity the viscous limit needs."
)
