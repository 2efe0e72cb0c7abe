#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "exogait/equivalence_stats.hpp"
#include "exogait/error.hpp"

namespace exogait {
namespace {

constexpr double kLogLambdaMin = -12.0;
constexpr double kLogLambdaMax = 12.0;
constexpr int kCoarsePoints = 97;
constexpr double kGoldenTolerance = 1e-10;

struct TrialSummary {
  std::string id;
  int condition = 0;
  double n = 0.0;
  double sum = 0.0;     // of centred values
  double sumsq = 0.0;   // of centred values
};

struct Design {
  std::vector<TrialSummary> trials;
  double centre = 0.0;
  double n_obs = 0.0;
  bool degenerate = false;
};

// Groups observations by trial and checks the design is estimable.
Design summarize(std::span<const StrideObservation> obs) {
  Design d;
  if (obs.empty()) throw Error(ErrorCode::SingularDesign, "no observations");
  double total = 0.0;
  for (const auto& o : obs) {
    if (o.condition != 0 && o.condition != 1) {
      throw Error(ErrorCode::InvalidArgument, "condition must be 0 or 1");
    }
    if (!std::isfinite(o.value)) throw Error(ErrorCode::InvalidArgument, "observation is not finite");
    total += o.value;
  }
  d.n_obs = static_cast<double>(obs.size());
  d.centre = total / d.n_obs;

  std::map<std::string, std::size_t> index;
  for (const auto& o : obs) {
    auto [it, fresh] = index.emplace(o.trial_id, d.trials.size());
    if (fresh) d.trials.push_back({o.trial_id, o.condition, 0.0, 0.0, 0.0});
    TrialSummary& t = d.trials[it->second];
    if (t.condition != o.condition) {
      throw Error(ErrorCode::InvalidArgument, "trial '" + o.trial_id + "' appears under both conditions");
    }
    const double v = o.value - d.centre;
    t.n += 1.0;
    t.sum += v;
    t.sumsq += v * v;
  }
  bool has0 = false, has1 = false;
  for (const auto& t : d.trials) (t.condition == 0 ? has0 : has1) = true;
  if (!has0 || !has1) throw Error(ErrorCode::SingularDesign, "each condition needs at least one trial");
  if (obs.size() <= 2) throw Error(ErrorCode::SingularDesign, "need more observations than fixed effects");
  return d;
}

// Profiled REML with per-trial compound symmetry: H_j = I + lambda 11'.
LmeFit evaluate(const Design& d, double lambda) {
  double a00 = 0.0, a01 = 0.0, a11 = 0.0, b0 = 0.0, b1 = 0.0, yhy = 0.0, logdet_h = 0.0;
  for (const auto& t : d.trials) {
    const double denom = 1.0 + lambda * t.n;
    const double c = t.condition;
    const double w = t.n / denom;
    a00 += w;
    a01 += w * c;
    a11 += w * c * c;
    b0 += t.sum / denom;
    b1 += c * t.sum / denom;
    yhy += t.sumsq - lambda / denom * t.sum * t.sum;
    logdet_h += std::log1p(lambda * t.n);
  }
  const double det = a00 * a11 - a01 * a01;
  LmeFit fit;
  fit.lambda = lambda;
  if (!(det > 0.0)) throw Error(ErrorCode::SingularDesign, "fixed-effect design is singular");
  const double inv11 = a00 / det;
  fit.beta0 = (a11 * b0 - a01 * b1) / det;
  fit.beta1 = (a00 * b1 - a01 * b0) / det;
  const double q = std::max(0.0, yhy - (fit.beta0 * b0 + fit.beta1 * b1));
  const double dof = d.n_obs - 2.0;
  fit.sigma_e2 = q / dof;
  fit.sigma_b2 = lambda * fit.sigma_e2;
  fit.beta0 += d.centre;
  if (q > 0.0) {
    fit.log_reml = -0.5 * (dof * (std::log(2.0 * std::numbers::pi * fit.sigma_e2) + 1.0) + logdet_h + std::log(det));
    fit.se_beta1 = std::sqrt(fit.sigma_e2 * inv11);
    fit.p_wald = wald_p(fit.beta1, fit.se_beta1);
  } else {
    fit.log_reml = -std::numeric_limits<double>::infinity();
  }
  return fit;
}

LmeFit degenerate_fit(const Design& d) {
  LmeFit fit = evaluate(d, 0.0);
  fit.sigma_b2 = fit.sigma_e2 = fit.se_beta1 = 0.0;
  fit.p_wald = fit.beta1 == 0.0 ? 1.0 : 0.0;
  fit.log_reml = std::numeric_limits<double>::infinity();
  fit.converged = true;
  fit.degenerate = true;
  return fit;
}

}  // namespace

LmeFit lme_at_ratio(std::span<const StrideObservation> observations, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be finite and >= 0");
  return evaluate(summarize(observations), lambda);
}

LmeFit fit_lme(std::span<const StrideObservation> observations) {
  const Design d = summarize(observations);

  const LmeFit boundary = evaluate(d, 0.0);
  double scale = 0.0;
  for (const auto& t : d.trials) scale += t.sumsq;
  if (boundary.sigma_e2 * (d.n_obs - 2.0) <= 1e-24 * std::max(1.0, scale)) return degenerate_fit(d);

  auto crit = [&](double u) { return evaluate(d, std::exp(u)).log_reml; };

  const double step = (kLogLambdaMax - kLogLambdaMin) / (kCoarsePoints - 1);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kCoarsePoints; ++i) {
    const double v = crit(kLogLambdaMin + step * i);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  double a = kLogLambdaMin + step * std::max(best - 1, 0);
  double b = kLogLambdaMin + step * std::min(best + 1, kCoarsePoints - 1);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = crit(x1), f2 = crit(x2);
  bool converged = false;
  for (int it = 0; it < 500; ++it) {
    if (b - a < kGoldenTolerance) {
      converged = true;
      break;
    }
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = crit(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = crit(x2);
    }
  }

  LmeFit interior = evaluate(d, std::exp(f1 >= f2 ? x1 : x2));
  const LmeFit coarse = evaluate(d, std::exp(kLogLambdaMin + step * best));
  if (coarse.log_reml > interior.log_reml) interior = coarse;
  LmeFit fit = boundary.log_reml >= interior.log_reml ? boundary : interior;
  if (!std::isfinite(fit.log_reml)) {
    throw Error(ErrorCode::DidNotConverge, "REML criterion is not finite at the optimum");
  }
  fit.converged = converged;
  return fit;
}

LmeFit lme_oracle(std::span<const StrideObservation> observations, std::span<const double> lambda_grid) {
  if (lambda_grid.empty()) throw Error(ErrorCode::InvalidArgument, "lambda grid is empty");
  const Design d = summarize(observations);  // design checks only

  const auto n = static_cast<Eigen::Index>(observations.size());
  const auto ntrials = static_cast<Eigen::Index>(d.trials.size());
  std::map<std::string, Eigen::Index> trial_col;
  for (Eigen::Index j = 0; j < ntrials; ++j) trial_col[d.trials[static_cast<std::size_t>(j)].id] = j;

  Eigen::MatrixXd X(n, 2), Z = Eigen::MatrixXd::Zero(n, ntrials);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = observations[static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    X(i, 1) = o.condition;
    Z(i, trial_col[o.trial_id]) = 1.0;
    y(i) = o.value;
  }
  const Eigen::MatrixXd zzt = Z * Z.transpose();
  const double dof = static_cast<double>(n) - 2.0;

  LmeFit best;
  best.log_reml = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double lambda : lambda_grid) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorCode::InvalidArgument, "lambda grid must be finite and >= 0");
    }
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) + lambda * zzt;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    const Eigen::MatrixXd hinv_x = ldlt.solve(X);
    const Eigen::VectorXd hinv_y = ldlt.solve(y);
    const Eigen::Matrix2d a = X.transpose() * hinv_x;
    const Eigen::Vector2d beta = a.ldlt().solve(X.transpose() * hinv_y);
    const Eigen::VectorXd r = y - X * beta;
    const double q = r.dot(ldlt.solve(r));
    double logdet_h = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet_h += std::log(ldlt.vectorD()(i));

    LmeFit fit;
    fit.lambda = lambda;
    fit.beta0 = beta(0);
    fit.beta1 = beta(1);
    fit.sigma_e2 = q / dof;
    fit.sigma_b2 = lambda * fit.sigma_e2;
    fit.converged = true;
    if (q > 0.0) {
      fit.log_reml = -0.5 * (dof * (std::log(2.0 * std::numbers::pi * fit.sigma_e2) + 1.0) + logdet_h +
                             std::log(a.determinant()));
      fit.se_beta1 = std::sqrt(fit.sigma_e2 * a.inverse()(1, 1));
      fit.p_wald = wald_p(fit.beta1, fit.se_beta1);
    } else {
      fit.log_reml = -std::numeric_limits<double>::infinity();
    }
    if (!any || fit.log_reml > best.log_reml) {
      best = fit;
      any = true;
    }
  }
  return best;
}

TrialMeans trial_means(std::span<const StrideObservation> observations) {
  struct Acc {
    int condition;
    double sum = 0.0;
    double n = 0.0;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& o : observations) {
    if (o.condition != 0 && o.condition != 1) throw Error(ErrorCode::InvalidArgument, "condition must be 0 or 1");
    auto [it, fresh] = acc.emplace(o.trial_id, Acc{o.condition});
    if (fresh) order.push_back(o.trial_id);
    if (it->second.condition != o.condition) {
      throw Error(ErrorCode::InvalidArgument, "trial '" + o.trial_id + "' appears under both conditions");
    }
    it->second.sum += o.value;
    it->second.n += 1.0;
  }
  TrialMeans out;
  for (const auto& id : order) {
    const Acc& a = acc[id];
    if (a.condition == 0) {
      out.condition0.push_back(a.sum / a.n);
      out.ids0.push_back(id);
    } else {
      out.condition1.push_back(a.sum / a.n);
      out.ids1.push_back(id);
    }
  }
  return out;
}

}  // namespace exogait
