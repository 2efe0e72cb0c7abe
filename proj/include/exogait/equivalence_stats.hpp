#pragma once

#include <span>
#include <string>
#include <vector>

namespace exogait {

struct StrideObservation {
  double value = 0.0;
  int condition = 0;  ///< 0 = NoExo, 1 = ExoOff
  std::string trial_id;
};

/// Random-intercept LME fitted by REML:
///   y_ij = beta0 + beta1 * cond_j + b_j + e_ij,  b_j ~ N(0, sigma_b2),  e_ij ~ N(0, sigma_e2).
struct LmeFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double sigma_b2 = 0.0;
  double sigma_e2 = 0.0;
  double se_beta1 = 0.0;
  double p_wald = 1.0;
  bool converged = false;
  double log_reml = 0.0;
  double lambda = 0.0;  ///< sigma_b2 / sigma_e2 at the optimum
  /// All residuals vanish at the OLS fit; variances and se are reported as 0.
  bool degenerate = false;
};

struct TostResult {
  double diff = 0.0;
  double se_welch = 0.0;
  double df_welch = 0.0;
  double t_lower = 0.0;
  double t_upper = 0.0;
  double p_lower = 1.0;
  double p_upper = 1.0;
  bool equivalent = false;
  double bound = 0.0;
  double alpha = 0.05;
  /// Both sample variances were zero; p-values are the se -> 0 limits.
  bool degenerate_variance = false;
};

struct StatConfig {
  double alpha = 0.05;
  double angle_bound = 2.0;      ///< deg
  double duration_bound = 0.05;  ///< s

  void validate() const;
};

struct TrialMeans {
  std::vector<double> condition0;
  std::vector<double> condition1;
  std::vector<std::string> ids0;
  std::vector<std::string> ids1;
};

/// Golden-section REML over log(lambda) in [-12, 12] after a coarse scan, plus the
/// lambda = 0 boundary. Throws SingularDesign when a condition has no trials.
LmeFit fit_lme(std::span<const StrideObservation> observations);

/// Profiled REML log-likelihood at a fixed variance ratio, evaluated with the
/// per-trial closed forms used by fit_lme.
LmeFit lme_at_ratio(std::span<const StrideObservation> observations, double lambda);

/// Exhaustive evaluation of the profiled REML criterion over `lambda_grid`
/// using dense matrix algebra (independent of fit_lme); returns the best point.
LmeFit lme_oracle(std::span<const StrideObservation> observations, std::span<const double> lambda_grid);

/// Arithmetic mean per trial, grouped by condition, in first-seen trial order.
TrialMeans trial_means(std::span<const StrideObservation> observations);

/// Two one-sided tests with a Welch standard error; diff = mean(a) - mean(b).
TostResult tost_welch(std::span<const double> means_a, std::span<const double> means_b, double bound,
                      double alpha = 0.05);

/// Two-sided normal-reference Wald p-value 2 (1 - Phi(|beta1 / se|)).
double wald_p(double beta1, double se);

// Distribution functions.
double normal_cdf(double z);
/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

}  // namespace exogait
