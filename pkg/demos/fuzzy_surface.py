# Fuzzy controller surface
#
# The shipped rule base maps line offset, line angle, three sonar ranges and
# the current speed to a steering bias and two wheel speed commands. Here we
# sweep the line inputs with the sonar clear and print the steering surface.

import numpy as np

from agvsim.fuzzy import default_controller, infer

ctrl = default_controller()
print("inputs: ", ctrl.input_names)
print("outputs:", [v.name for v in ctrl.outputs])

offsets = np.linspace(-0.8, 0.8, 9)
angles = np.linspace(-0.8, 0.8, 9)

print("\nsteer bias, rows = line angle (rad), columns = line offset (m)")
print("        " + "".join(f"{o:+7.2f}" for o in offsets))
for a in angles:
    row = [infer(ctrl, [o, a, 10.0, 10.0, 10.0, 0.5]).outputs[0] for o in offsets]
    print(f"{a:+7.2f} " + "".join(f"{v:+7.3f}" for v in row))

# An obstacle close on the left steers the vehicle right and slows the right wheel.

for rng_left in [3.0, 1.0, 0.5, 0.3]:
    r = infer(ctrl, [0.0, 0.0, rng_left, 10.0, 10.0, 0.5])
    steer, left, right = r.outputs
    print(f"left sonar {rng_left:4.1f} m: steer {steer:+.3f}, wheels {left:.3f} / {right:.3f}")
