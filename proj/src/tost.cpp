#include <cmath>
#include <numeric>

#include "exogait/equivalence_stats.hpp"
#include "exogait/error.hpp"

namespace exogait {

void StatConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (!(angle_bound > 0.0) || !(duration_bound > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "equivalence bounds must be positive");
  }
}

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // sample variance
};

Moments moments(std::span<const double> v) {
  Moments m;
  m.n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

}  // namespace

TostResult tost_welch(std::span<const double> means_a, std::span<const double> means_b, double bound,
                      double alpha) {
  if (means_a.size() < 2 || means_b.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "TOST needs at least two trial means per group");
  }
  if (!(bound > 0.0)) throw Error(ErrorCode::InvalidArgument, "equivalence bound must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");

  const Moments a = moments(means_a);
  const Moments b = moments(means_b);
  TostResult r;
  r.bound = bound;
  r.alpha = alpha;
  r.diff = a.mean - b.mean;
  const double va = a.var / a.n;
  const double vb = b.var / b.n;
  r.se_welch = std::sqrt(va + vb);

  if (!(r.se_welch > 0.0)) {
    r.degenerate_variance = true;
    r.df_welch = a.n + b.n - 2.0;
    const double inf = std::numeric_limits<double>::infinity();
    r.t_lower = r.diff - bound < 0.0 ? -inf : inf;
    r.t_upper = r.diff + bound > 0.0 ? inf : -inf;
    r.p_lower = r.diff - bound < 0.0 ? 0.0 : 1.0;
    r.p_upper = r.diff + bound > 0.0 ? 0.0 : 1.0;
    r.equivalent = std::abs(r.diff) < bound;
    return r;
  }

  r.df_welch = (va + vb) * (va + vb) / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  r.t_lower = (r.diff - bound) / r.se_welch;
  r.t_upper = (r.diff + bound) / r.se_welch;
  // H0: diff >= +bound rejected in the lower tail; H0: diff <= -bound in the upper tail.
  r.p_lower = student_t_cdf(r.t_lower, r.df_welch);
  r.p_upper = student_t_cdf(-r.t_upper, r.df_welch);
  r.equivalent = r.p_lower < alpha && r.p_upper < alpha;
  return r;
}

}  // namespace exogait
