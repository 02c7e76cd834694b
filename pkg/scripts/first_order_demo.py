"""First-order walk-through: closed-form sets and an interior precursor reaching an endpoint."""

import numpy as np

from exactsme import geometry as geo
from exactsme.oracle import ProblemHistory, exact_set_recursion
from exactsme.plant import System
from exactsme.propagation import Front, propagate_front, propagate_zero_dual, successor_interval

plant = System.from_coefficients([0.0, 1.0], [1.0, -0.5])
S1 = Front.from_polytope(geo.interval(-1.0, 1.0), 1, [0.0])

for z2 in (0.0, 1.5):
    S2 = propagate_front(S1, z2, plant).polytope
    exact = exact_set_recursion(ProblemHistory(plant, np.zeros(1), np.array([0.0, z2])))[-1]
    print(f"z = (0, {z2}):  propagated S_2 = [{S2.vertices.min():g}, {S2.vertices.max():g}]"
          f"  exact S_2 = [{exact.vertices.min():g}, {exact.vertices.max():g}]")

# x_1 = 0.5 is interior to S_1, yet with v_2 = -1 it lands on the endpoint -0.75 of S_2
print("successor disturbances for x_1 = 0.5, z_2 = 1.5:", successor_interval([0.5], 1.5, plant.plant, plant.est))
for pair in propagate_zero_dual([0.5], 1.5, plant).pairs:
    print(f"  zero-direction successor x_2 = {pair.x[0]:g} with direction {pair.x_star[0]:g}")
