#pragma once

#include <vector>

#include "expeval/error.hpp"

namespace expeval {

/// Squared-error comparison of a system exposure vector against a target:
///   ee_l = ||e - t||^2      (loss)
///   ee_d = ||e||^2          (disparity)
///   ee_r = 2 e.t            (relevance)
/// and ee_l = ee_d - ee_r + ||t||^2.
struct EEBreakdown {
  double ee_l = 0.0;
  double ee_d = 0.0;
  double ee_r = 0.0;
  double target_norm_sq = 0.0;
};

/// One point on a disparity-relevance curve.
struct CurvePoint {
  double param = 0.0;   // randomization parameter that produced the point
  double d_norm = 0.0;  // normalized disparity in [0, 1]
  double r_norm = 0.0;  // relevance relative to the oracle policy
  EEBreakdown ee;
  double expected_rbp = 0.0;  // expected static metrics over the same samples
  double expected_err = 0.0;
};

/// Disparity-relevance curve traced by sweeping a policy parameter.
/// Points are kept sorted by ascending d_norm.
struct SweepCurve {
  std::vector<CurvePoint> points;
  int warnings = 0;  // grid points skipped due to per-parameter errors
};

/// Trapezoidal area of r_norm over d_norm on [0, 1]. The curve is extended
/// with (0, 0) and with a flat segment from the largest observed d_norm to 1;
/// duplicate d_norm values keep the maximum r_norm. Requires >= 2 points.
double ee_auc(const SweepCurve& curve);

}  // namespace expeval
