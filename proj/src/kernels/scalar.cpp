#include <algorithm>
#include <cmath>
#include <limits>

#include "skewtail/kernels.hpp"

namespace skewtail::kernels::scalar {

void critical_radius_batch(const Mat2Batch& in, double den_floor, std::span<double> out) {
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = in.r11[i], b = in.r12[i], c = in.r21[i], d = in.r22[i];
    const double den = (1.0 - a * d) + b * c;
    const double diff = a - d;
    const double sum = b + c;
    const double num = diff * diff + sum * sum;
    out[i] = std::fabs(den) < den_floor ? std::numeric_limits<double>::quiet_NaN()
                                        : 1.0 - num / (den * den);
  }
}

std::size_t count_greater(std::span<const double> xs, double threshold) {
  std::size_t count = 0;
  for (double x : xs) count += x > threshold ? 1 : 0;
  return count;
}

double ks_sup_distance(std::span<const double> cdf_at_sorted) {
  const double n = static_cast<double>(cdf_at_sorted.size());
  double best = 0.0;
  for (std::size_t i = 0; i < cdf_at_sorted.size(); ++i) {
    const double f = cdf_at_sorted[i];
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    best = std::max(best, std::max(hi - f, f - lo));
  }
  return best;
}

}  // namespace skewtail::kernels::scalar
