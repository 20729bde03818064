# Camera calibration walkthrough
#
# The camera maps a ground point (xg, yg, zg) to an image point (xi, yi)
# through two rows of four affine coefficients. Twelve correspondences are
# enough to fit both rows by least squares; with noiseless data the fit
# recovers the generating model to round-off.

import numpy as np

from agvsim.camera import (CalibrationSet, back_project, calibrate_with_residuals,
                           calibration_rig_points, default_camera, project)

# The reference model used to synthesise data.

truth = default_camera()
print("reference rows")
print(truth.rows)

# Twelve rig points on three heights, projected through the reference model.

ground = calibration_rig_points()
image = np.array([project(truth, g) for g in ground])
cset = CalibrationSet(ground, image)

fit = calibrate_with_residuals(cset, truth.zg_fixed)
print("\nfitted rows")
print(fit.model.rows)
print("max relative coefficient error:", np.max(np.abs(fit.model.rows - truth.rows) / np.abs(truth.rows)))
print("rms residual (px):", fit.rms)

# Add half a pixel of noise and refit. The residuals now carry the noise and
# the coefficients move by a corresponding amount.

rng = np.random.default_rng(0)
noisy = CalibrationSet(ground, image + rng.normal(0.0, 0.5, image.shape))
fit_noisy = calibrate_with_residuals(noisy, truth.zg_fixed)
print("\nnoisy rms residual (px):", round(fit_noisy.rms, 3))

# Back-projection works on the plane zg = zg_fixed. Pixels map back to ground
# coordinates, which is how the line detector turns image points into metres.

for xg, yg in [(0.5, 0.0), (1.0, 0.3), (1.5, -0.4)]:
    ip = project(fit.model, (xg, yg, truth.zg_fixed))
    g = back_project(fit.model, ip)
    print(f"({xg:+.2f}, {yg:+.2f}) -> pixel ({ip.xpi:8.2f}, {ip.ypi:8.2f}) -> ({g.xg:+.6f}, {g.yg:+.6f})")
