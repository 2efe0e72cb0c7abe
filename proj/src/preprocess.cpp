#include "exogait/preprocess.hpp"

#include <Eigen/Sparse>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "exogait/error.hpp"

namespace exogait {

void SmoothingSpec::validate() const {
  if (!(target_mse > 0.0)) throw Error(ErrorCode::InvalidArgument, "target_mse must be > 0");
  if (!(mse_tolerance > 0.0 && mse_tolerance < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "mse_tolerance must lie in (0, 1)");
  }
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

void GapFillSpec::validate() const {
  if (max_gap < 1) throw Error(ErrorCode::InvalidArgument, "max_gap must be >= 1");
}

namespace {

constexpr std::size_t kMinSmoothLength = 7;
constexpr double kLogWeightLow = -12.0 * 2.302585092994046;   // ln(1e-12)
constexpr double kLogWeightHigh = 12.0 * 2.302585092994046;   // ln(1e12)

// Natural cubic spline through (x[i], y[i]); returns second derivatives.
std::vector<double> spline_second_derivatives(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0), c(n, 0.0), d(n, 0.0);
  if (n < 3) return m;
  // Thomas algorithm on the interior equations.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double a = h0 / 6.0;
    const double b = (h0 + h1) / 3.0;
    const double cc = h1 / 6.0;
    const double rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    const double denom = b - a * c[i - 1];
    c[i] = cc / denom;
    d[i] = (rhs - a * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = d[i] - c[i] * m[i + 1];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& m,
                   double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - x.begin(), 1,
                                                                       static_cast<std::ptrdiff_t>(x.size()) - 1));
  const std::size_t lo = hi - 1;
  const double h = x[hi] - x[lo];
  const double a = (x[hi] - t) / h;
  const double b = (t - x[lo]) / h;
  return a * y[lo] + b * y[hi] + ((a * a * a - a) * m[lo] + (b * b * b - b) * m[hi]) * h * h / 6.0;
}

// Indices of frames belonging to fillable interior gaps.
std::vector<std::size_t> fillable_frames(const std::vector<bool>& valid, int max_gap) {
  std::vector<std::size_t> out;
  const std::size_t n = valid.size();
  std::size_t i = 0;
  while (i < n && !valid[i]) ++i;  // leading gap stays
  while (i < n) {
    if (valid[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !valid[j]) ++j;
    if (j < n && j - i <= static_cast<std::size_t>(max_gap)) {
      for (std::size_t k = i; k < j; ++k) out.push_back(k);
    }
    i = j;
  }
  return out;
}

Eigen::SparseMatrix<double> third_difference_normal(std::size_t n) {
  // D3^T D3 for rows (-1, 3, -3, 1).
  static constexpr double coeff[4] = {-1.0, 3.0, -3.0, 1.0};
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve((n - 3) * 16);
  for (std::size_t r = 0; r + 3 < n; ++r) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        trips.emplace_back(static_cast<int>(r) + a, static_cast<int>(r) + b, coeff[a] * coeff[b]);
      }
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Least-squares quadratic on a centred, scaled abscissa.
std::vector<double> quadratic_fit(std::span<const double> y) {
  const std::size_t n = y.size();
  const double mid = 0.5 * static_cast<double>(n - 1);
  const double scale = std::max(mid, 1.0);
  Eigen::MatrixXd X(static_cast<int>(n), 3);
  Eigen::VectorXd v(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) - mid) / scale;
    X(static_cast<int>(i), 0) = 1.0;
    X(static_cast<int>(i), 1) = u;
    X(static_cast<int>(i), 2) = u * u;
    v(static_cast<int>(i)) = y[i];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(v);
  const Eigen::VectorXd f = X * beta;
  return {f.data(), f.data() + n};
}

class PenalizedSolver {
 public:
  explicit PenalizedSolver(std::span<const double> y)
      : y_(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))),
        normal_(third_difference_normal(y.size())) {
    identity_.resize(static_cast<int>(y.size()), static_cast<int>(y.size()));
    identity_.setIdentity();
  }

  std::vector<double> solve(double weight) {
    const Eigen::SparseMatrix<double> a = identity_ + weight * normal_;
    if (first_) {
      ldlt_.analyzePattern(a);
      first_ = false;
    }
    ldlt_.factorize(a);
    if (ldlt_.info() != Eigen::Success) {
      throw Error(ErrorCode::NonFiniteState, "smoothing system factorization failed");
    }
    const Eigen::VectorXd f = ldlt_.solve(y_);
    return {f.data(), f.data() + f.size()};
  }

 private:
  Eigen::VectorXd y_;
  Eigen::SparseMatrix<double> normal_;
  Eigen::SparseMatrix<double> identity_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool first_ = true;
};

}  // namespace

std::vector<double> fill_gaps(std::span<const double> samples, std::vector<bool>& valid, const GapFillSpec& spec) {
  spec.validate();
  if (valid.size() != samples.size()) throw Error(ErrorCode::InvalidArgument, "validity mask length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (valid[i]) {
      x.push_back(static_cast<double>(i));
      y.push_back(samples[i]);
    }
  }
  if (x.size() < 4) {
    throw Error(ErrorCode::TooFewValidFrames, "gap filling needs at least 4 valid frames");
  }
  std::vector<double> out(samples.begin(), samples.end());
  const auto targets = fillable_frames(valid, spec.max_gap);
  if (targets.empty()) return out;
  const auto m = spline_second_derivatives(x, y);
  for (auto k : targets) {
    out[k] = spline_eval(x, y, m, static_cast<double>(k));
    valid[k] = true;
  }
  return out;
}

MarkerTrajectory fill_gaps(const MarkerTrajectory& series, const GapFillSpec& spec) {
  spec.validate();
  std::vector<bool> valid;
  valid.reserve(series.frames.size());
  for (const auto& f : series.frames) valid.push_back(f.valid);
  if (series.valid_count() < 4) {
    throw Error(ErrorCode::TooFewValidFrames,
                "marker '" + series.label + "' has fewer than 4 valid frames");
  }
  MarkerTrajectory out = series;
  const auto targets = fillable_frames(valid, spec.max_gap);
  if (targets.empty()) return out;

  std::vector<double> x;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (valid[i]) x.push_back(static_cast<double>(i));
  }
  for (std::size_t axis = 0; axis < 3; ++axis) {
    std::vector<double> y;
    for (const auto& f : series.frames) {
      if (f.valid) y.push_back(f.xyz[axis]);
    }
    const auto m = spline_second_derivatives(x, y);
    for (auto k : targets) out.frames[k].xyz[axis] = spline_eval(x, y, m, static_cast<double>(k));
  }
  for (auto k : targets) {
    out.frames[k].valid = true;
    out.frames[k].residual = 0.0f;
  }
  return out;
}

double mean_squared_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::InvalidArgument, "series length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double roughness(std::span<const double> samples, double rate) {
  if (!(rate > 0.0)) throw Error(ErrorCode::NonUniformSampling, "rate must be positive");
  const double h = 1.0 / rate;
  double s = 0.0;
  for (std::size_t i = 0; i + 3 < samples.size(); ++i) {
    const double d3 = (samples[i + 3] - 3.0 * samples[i + 2] + 3.0 * samples[i + 1] - samples[i]) / (h * h * h);
    s += d3 * d3;
  }
  return h * s;
}

std::vector<double> smooth_fixed(std::span<const double> samples, double penalty_weight) {
  if (samples.size() < kMinSmoothLength) {
    throw Error(ErrorCode::SeriesTooShort, "smoothing needs at least 7 samples");
  }
  if (!(penalty_weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "penalty weight must be >= 0");
  PenalizedSolver solver(samples);
  return solver.solve(penalty_weight);
}

SmoothingResult smooth_to_mse(std::span<const double> samples, double rate, const SmoothingSpec& spec) {
  spec.validate();
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::NonUniformSampling, "sampling rate must be positive");
  }
  if (samples.size() < kMinSmoothLength) {
    throw Error(ErrorCode::SeriesTooShort, "smoothing needs at least 7 samples");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "series contains gaps or non-finite values");
  }

  // lambda -> infinity leaves only the penalty null space (quadratics).
  SmoothingResult limit;
  limit.smoothed = quadratic_fit(samples);
  limit.achieved_mse = mean_squared_difference(samples, limit.smoothed);
  limit.penalty_weight = std::numeric_limits<double>::infinity();
  if (limit.achieved_mse <= spec.target_mse * (1.0 - spec.mse_tolerance)) {
    limit.met_target = false;
    return limit;
  }

  PenalizedSolver solver(samples);
  const double target = spec.target_mse;
  auto evaluate = [&](double log_w) {
    SmoothingResult r;
    r.penalty_weight = std::exp(log_w);
    r.smoothed = solver.solve(r.penalty_weight);
    r.achieved_mse = mean_squared_difference(samples, r.smoothed);
    return r;
  };

  double lo = kLogWeightLow, hi = kLogWeightHigh;
  SmoothingResult best = evaluate(hi);
  if (best.achieved_mse < target) {
    // Target sits between the bracket top and the quadratic limit.
    best.met_target = std::abs(best.achieved_mse - target) <= spec.mse_tolerance * target;
    if (std::abs(limit.achieved_mse - target) < std::abs(best.achieved_mse - target)) {
      limit.met_target = std::abs(limit.achieved_mse - target) <= spec.mse_tolerance * target;
      return limit;
    }
    return best;
  }
  for (int it = 0; it < spec.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    SmoothingResult r = evaluate(mid);
    if (std::abs(r.achieved_mse - target) < std::abs(best.achieved_mse - target)) best = r;
    if (std::abs(r.achieved_mse - target) <= 1e-4 * spec.mse_tolerance * target) break;
    if (r.achieved_mse < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12) break;
  }
  best.met_target = std::abs(best.achieved_mse - target) <= spec.mse_tolerance * target;
  return best;
}

SmoothingResult smooth_to_mse(std::span<const double> times, std::span<const double> samples,
                              const SmoothingSpec& spec) {
  if (times.size() != samples.size()) throw Error(ErrorCode::InvalidArgument, "time/sample length mismatch");
  if (times.size() < kMinSmoothLength) throw Error(ErrorCode::SeriesTooShort, "smoothing needs at least 7 samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorCode::NonUniformSampling, "time stamps must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt) {
      throw Error(ErrorCode::NonUniformSampling, "time stamps are not evenly spaced");
    }
  }
  return smooth_to_mse(samples, 1.0 / dt, spec);
}

MarkerTrajectory smooth_marker(const MarkerTrajectory& marker, double rate, const SmoothingSpec& spec,
                               MarkerSmoothingReport* report) {
  MarkerTrajectory out = marker;
  MarkerSmoothingReport rep;
  rep.label = marker.label;
  double mse_sum = 0.0;
  std::size_t mse_count = 0;
  const std::size_t n = marker.frames.size();
  std::size_t i = 0;
  while (i < n) {
    if (!marker.frames[i].valid) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && marker.frames[j].valid) ++j;
    if (j - i < kMinSmoothLength) {
      ++rep.runs_skipped;
    } else {
      ++rep.runs_smoothed;
      for (std::size_t axis = 0; axis < 3; ++axis) {
        std::vector<double> y;
        for (std::size_t k = i; k < j; ++k) y.push_back(marker.frames[k].xyz[axis]);
        const auto r = smooth_to_mse(y, rate, spec);
        for (std::size_t k = i; k < j; ++k) out.frames[k].xyz[axis] = r.smoothed[k - i];
        mse_sum += r.achieved_mse;
        ++mse_count;
        rep.met_target = rep.met_target && r.met_target;
      }
    }
    i = j;
  }
  rep.achieved_mse = mse_count > 0 ? mse_sum / static_cast<double>(mse_count) : 0.0;
  if (mse_count == 0) rep.met_target = false;
  if (report != nullptr) *report = rep;
  return out;
}

}  // namespace exogait
