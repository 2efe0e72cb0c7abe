#pragma once

#include <span>
#include <vector>

#include "exogait/trial.hpp"

namespace exogait {

struct SmoothingSpec {
  double target_mse = 10.0;  ///< mm^2 per coordinate
  int max_iterations = 200;
  double mse_tolerance = 0.05;  ///< relative

  void validate() const;
};

struct GapFillSpec {
  int max_gap = 10;  ///< frames

  void validate() const;
};

/// Fills interior gaps of at most `max_gap` frames with a natural cubic spline
/// through all valid frames (per axis). Boundary gaps and longer gaps stay
/// invalid; valid frames are returned untouched.
MarkerTrajectory fill_gaps(const MarkerTrajectory& series, const GapFillSpec& spec);

/// Same rule on a scalar series; `valid` marks usable samples and is updated.
std::vector<double> fill_gaps(std::span<const double> samples, std::vector<bool>& valid,
                              const GapFillSpec& spec);

struct SmoothingResult {
  std::vector<double> smoothed;
  double achieved_mse = 0.0;
  bool met_target = false;
  /// Coefficient of the third-difference normal matrix, lambda / h^5.
  double penalty_weight = 0.0;
};

/// Penalized least squares  sum (y - f)^2 + lambda * h * sum (D3 f / h^3)^2
/// with lambda chosen by bisection on log(lambda) so the residual MSE hits the
/// target. When the lambda -> infinity limit (best quadratic) already has MSE
/// below target, that limit is returned with met_target = false.
SmoothingResult smooth_to_mse(std::span<const double> samples, double rate, const SmoothingSpec& spec);

/// Variant for time-stamped samples; throws NonUniformSampling if the stamps are not evenly spaced.
SmoothingResult smooth_to_mse(std::span<const double> times, std::span<const double> samples,
                              const SmoothingSpec& spec);

/// Solves the penalized problem for a fixed normalized weight (lambda / h^5).
std::vector<double> smooth_fixed(std::span<const double> samples, double penalty_weight);

/// h * sum (D3 f / h^3)^2
double roughness(std::span<const double> samples, double rate);

double mean_squared_difference(std::span<const double> a, std::span<const double> b);

struct MarkerSmoothingReport {
  std::string label;
  double achieved_mse = 0.0;  ///< mean over smoothed runs and axes
  std::size_t runs_smoothed = 0;
  std::size_t runs_skipped = 0;  ///< valid runs shorter than 7 frames
  bool met_target = true;
};

/// Smooths each contiguous valid run of each axis independently.
MarkerTrajectory smooth_marker(const MarkerTrajectory& marker, double rate, const SmoothingSpec& spec,
                               MarkerSmoothingReport* report = nullptr);

}  // namespace exogait
