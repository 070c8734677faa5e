#include "vessel4d/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vessel4d/error.hpp"

namespace vessel4d {

double median(std::span<const double> values) {
  if (values.empty()) throw EmptyResultError("median of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw EmptyResultError("mean of an empty set");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw EmptyResultError("sample standard deviation needs at least two values");
  const double m = mean(values);
  double sq = 0.0;
  for (double v : values) sq += (v - m) * (v - m);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw EmptyResultError("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw ConfigError("percentile: q must be in [0, 100]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvariantError("regression: x and y lengths differ");
  if (x.size() < 2) throw EmptyResultError("regression needs at least two pairs");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InvariantError("regression: reference values have zero variance");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

BlandAltman bland_altman(std::span<const double> reference, std::span<const double> test) {
  if (reference.size() != test.size()) throw InvariantError("Bland-Altman: series lengths differ");
  std::vector<double> diff(reference.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = test[i] - reference[i];
  BlandAltman ba;
  ba.bias = mean(diff);
  ba.sd = sample_sd(diff);
  ba.loa_lower = ba.bias - kLimitsOfAgreementZ * ba.sd;
  ba.loa_upper = ba.bias + kLimitsOfAgreementZ * ba.sd;
  return ba;
}

}  // namespace vessel4d
