#pragma once

#include <span>

namespace vessel4d {

/// Median; an even count averages the two central values. Throws
/// EmptyResultError on empty input.
double median(std::span<const double> values);

double mean(std::span<const double> values);

/// Standard deviation with the n-1 denominator. Needs two values.
double sample_sd(std::span<const double> values);

/// Linear-interpolated percentile, q in [0, 100].
double percentile(std::span<const double> values, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of y on x. Throws InvariantError when x has no spread.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

struct BlandAltman {
  double bias = 0.0;
  double sd = 0.0;
  double loa_lower = 0.0;
  double loa_upper = 0.0;
};

inline constexpr double kLimitsOfAgreementZ = 1.96;

/// Bias and 1.96 sample-SD limits of the differences `test - reference`.
BlandAltman bland_altman(std::span<const double> reference, std::span<const double> test);

}  // namespace vessel4d
