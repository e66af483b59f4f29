#include "core/stats.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace fairaudit {

namespace {

// Continued fraction for the incomplete beta, evaluated with the modified
// Lentz algorithm. Converges quickly for x < (a+1)/(a+b+2); the caller uses
// the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) outside that region.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIterations = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  raise(ErrorCode::Internal,
        "incomplete beta continued fraction did not converge (a=" +
            std::to_string(a) + ", b=" + std::to_string(b) +
            ", x=" + std::to_string(x) + ")");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    raise(ErrorCode::InvalidParameter,
          "regularized_incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    raise(ErrorCode::InvalidParameter,
          "regularized_incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_distribution_upper_tail(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    raise(ErrorCode::InvalidParameter,
          "f_distribution_upper_tail: degrees of freedom must be positive");
  if (!std::isfinite(f))
    raise(ErrorCode::InvalidParameter, "f_distribution_upper_tail: non-finite F");
  if (f <= 0.0) return 1.0;
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups,
                          double significance_level) {
  const size_t k = groups.size();
  if (k < 2)
    raise(ErrorCode::InsufficientData,
          "one_way_anova: need at least 2 groups, got " + std::to_string(k));
  size_t total = 0;
  for (size_t g = 0; g < k; ++g) {
    if (groups[g].size() < 2)
      raise(ErrorCode::InsufficientData,
            "one_way_anova: group " + std::to_string(g) + " has " +
                std::to_string(groups[g].size()) + " samples (need >= 2)");
    for (double v : groups[g])
      if (!std::isfinite(v))
        raise(ErrorCode::InvalidInput, "one_way_anova: non-finite sample");
    total += groups[g].size();
  }

  double grand_sum = 0.0;
  for (const auto& group : groups)
    for (double v : group) grand_sum += v;
  const double grand_mean = grand_sum / static_cast<double>(total);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& group : groups) {
    double sum = 0.0;
    for (double v : group) sum += v;
    const double mean = sum / static_cast<double>(group.size());
    ss_between += static_cast<double>(group.size()) * (mean - grand_mean) *
                  (mean - grand_mean);
    for (double v : group) ss_within += (v - mean) * (v - mean);
  }

  if (ss_within == 0.0)
    raise(ErrorCode::DegenerateVariance,
          "one_way_anova: zero within-group variance (every group constant)");

  AnovaResult result;
  result.df_between = k - 1;
  result.df_within = total - k;
  const double ms_between = ss_between / static_cast<double>(result.df_between);
  const double ms_within = ss_within / static_cast<double>(result.df_within);
  result.f_statistic = ms_between / ms_within;
  result.p_value = f_distribution_upper_tail(
      result.f_statistic, static_cast<double>(result.df_between),
      static_cast<double>(result.df_within));
  result.significance_level = significance_level;
  result.significant = result.p_value < significance_level;
  return result;
}

}  // namespace fairaudit
