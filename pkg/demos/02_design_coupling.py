"""Working backwards: choosing K to hit prescribed flux splits.

The forward map goes from exchange coefficients K to transmission
weights. Both design routes here invert it for families the algebra
solves in closed form:

  * proportional: every incoming arc is split by the same fractions
    across the outgoing arcs;
  * two-outgoing: exactly two outgoing arcs, and each incoming arc j
    may send its own fraction to the first one.

Each design is verified by pushing the produced K through the forward
map and measuring the worst deviation from the requested weights.
"""

from __future__ import annotations

import numpy as np

from starflux import (
    ProportionalTarget,
    TwoOutTarget,
    build_network,
    compute_gamma,
    design_proportional,
    design_two_outgoing,
    proportional_gamma_matrix,
    roundtrip_error,
    two_out_gamma_matrix,
)

net = build_network(
    [
        (1.0, 1.0, "in"),
        (1.0, 2.5, "in"),
        (1.0, 1.5, "out"),
        (1.0, 0.7, "out"),
        (1.0, 3.0, "out"),
    ]
)

target = ProportionalTarget((0.2, 0.3, 0.5))
K = design_proportional(net, target)
print("proportional design, splits 20/30/50:")
print(np.array_str(K.k, precision=5, suppress_small=True))
err = roundtrip_error(net, K, proportional_gamma_matrix(net, target))
print(f"round-trip error through the forward map: {err:.3e}")
print()
print("achieved weights:")
print(compute_gamma(net, K).gamma)
print()

two = build_network(
    [
        (1.0, 1.0, "in"),
        (1.0, 2.0, "in"),
        (1.0, 0.8, "in"),
        (1.0, 1.5, "out"),
        (1.0, 2.5, "out"),
    ]
)
# incoming arc j sends fractions[j] to the first outgoing arc and the
# rest to the second; unequal entries make the weights genuinely 2D
fractions = TwoOutTarget((0.25, 0.6, 0.8))
K2 = design_two_outgoing(two, fractions)
print("two-outgoing design, per-incoming fractions (0.25, 0.6, 0.8):")
print(np.array_str(K2.k, precision=5, suppress_small=True))
err2 = roundtrip_error(two, K2, two_out_gamma_matrix(two, fractions))
print(f"round-trip error: {err2:.3e}")
print()
print("achieved weights:")
print(compute_gamma(two, K2).gamma)
