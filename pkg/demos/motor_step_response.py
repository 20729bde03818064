# Wheel servo step response
#
# Each wheel speed follows its target through an underdamped second-order
# response fitted to a measured step: final value 0.5, peak 0.7 at 2.4 s.

import numpy as np

from agvsim.vehicle import VehicleParams, second_order_from_step, step_response

zeta, wn = second_order_from_step(0.5, 0.7, 2.4)
print(f"damping ratio {zeta:.4f}, natural frequency {wn:.4f} rad/s")

t, y = map(np.array, step_response(VehicleParams(), 0.5, 20.0, dt=0.01))
k = np.argmax(y)
print(f"peak {y[k]:.4f} at t = {t[k]:.2f} s")

# Coarse text plot of the response, one row per second.

for ti, yi in zip(t[::100], y[::100]):
    print(f"{ti:5.1f} s  {yi:6.3f}  " + "#" * int(round(yi * 60)))

# Time after which the speed stays within 5% of the final value.

outside = np.flatnonzero(np.abs(y - 0.5) > 0.025)
print(f"inside the 5% band from t = {t[outside[-1] + 1]:.2f} s")
