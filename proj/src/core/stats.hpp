#pragma once

#include <cstddef>
#include <vector>

namespace fairaudit {

// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0, 1].
// Continued-fraction evaluation (modified Lentz) with relative tolerance
// below 1e-12 across the parameter range needed for F-distribution tails.
double regularized_incomplete_beta(double a, double b, double x);

// Upper tail P(F >= f) of the F distribution with (d1, d2) degrees of
// freedom. f <= 0 gives 1.
double f_distribution_upper_tail(double f, double d1, double d2);

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  size_t df_between = 0;  // k - 1
  size_t df_within = 0;   // N - k
  double significance_level = 0.05;
  bool significant = false;  // p_value < significance_level
};

// Classical one-way ANOVA across groups of samples.
//   F = (SS_between / (k-1)) / (SS_within / (N-k))
// Errors: fewer than 2 groups or any group with fewer than 2 samples ->
// InsufficientData; zero within-group variance (every group constant) ->
// DegenerateVariance.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups,
                          double significance_level = 0.05);

}  // namespace fairaudit
