#include "debiaskit/ttest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace debiaskit {

namespace {

constexpr double kTolerance = 1e-12;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
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
    if (std::fabs(delta - 1.0) < kTolerance) return h;
  }
  throw Error(fmt::format("incomplete beta did not converge for a={}, b={}, x={}", a, b, x));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta needs a > 0 and b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(fmt::format("incomplete beta argument {} outside [0, 1]", x));
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fastest below the mean; use the symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> before, std::span<const double> after) {
  if (before.size() != after.size()) {
    throw DimensionError(fmt::format("paired samples differ in size: {} vs {}", before.size(), after.size()));
  }
  const std::size_t n = before.size();
  if (n < 2) throw ValidationError("paired t-test needs at least 2 paired observations");

  double sum = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = after[i] - before[i];
    sum += diff;
    scale = std::max(scale, std::fabs(diff));
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = (after[i] - before[i]) - mean;
    ss += dev * dev;
  }
  const double variance = ss / static_cast<double>(n - 1);

  TTestResult out;
  out.degrees_of_freedom = static_cast<long>(n - 1);
  out.mean_difference = mean;
  const double noise_floor = 1e-14 * scale;
  if (variance <= noise_floor * noise_floor) {
    out.degenerate_variance = true;
    if (scale == 0.0 || std::fabs(mean) <= noise_floor) {
      out.t_statistic = 0.0;
      out.p_value = 1.0;
    } else {
      out.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
      out.p_value = 0.0;
    }
  } else {
    out.t_statistic = mean / std::sqrt(variance / static_cast<double>(n));
    out.p_value = student_t_two_sided_p(out.t_statistic, static_cast<double>(out.degrees_of_freedom));
  }
  out.significant_at_0_05 = out.p_value < 0.05;
  return out;
}

TTestResult paired_t_test(const Matrix& before, const Matrix& after) {
  if (before.rows() != after.rows() || before.cols() != after.cols()) {
    throw DimensionError(fmt::format("distance matrices differ in shape: {}x{} vs {}x{}", before.rows(), before.cols(),
                                     after.rows(), after.cols()));
  }
  // Row-major storage makes data() the row-major flattening.
  return paired_t_test(std::span<const double>(before.data(), static_cast<std::size_t>(before.size())),
                       std::span<const double>(after.data(), static_cast<std::size_t>(after.size())));
}

}  // namespace debiaskit
