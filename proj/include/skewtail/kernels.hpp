#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// kernels::scalar and, on x86-64, an AVX2 variant in kernels::avx2 that
// produces bit-identical results. The unqualified entry points dispatch at
// runtime on the detected instruction set.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace skewtail::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best instruction set supported by both the build and the running CPU.
Isa detected_isa();

/// Instruction set used by the dispatching entry points.
Isa active_isa();

/// Pins dispatch to `isa` (falls back to scalar if unavailable); nullopt
/// restores detection. Not thread-safe; meant for tests and benchmarks.
void force_isa(std::optional<Isa> isa);

/// Structure-of-arrays batch of 2 x 2 matrices.
struct Mat2Batch {
  std::span<const double> r11;
  std::span<const double> r12;
  std::span<const double> r21;
  std::span<const double> r22;

  std::size_t size() const noexcept { return r11.size(); }
};

/// out[i] = critical-radius objective of matrix i, or NaN where
/// |1 - r11 r22 + r12 r21| < den_floor.
void critical_radius_batch(const Mat2Batch& in, double den_floor, std::span<double> out);

/// Number of xs[i] strictly greater than threshold.
std::size_t count_greater(std::span<const double> xs, double threshold);

/// Kolmogorov-Smirnov sup distance given the model CDF evaluated at the
/// ascending-sorted sample: max_i max((i+1)/N - F_i, F_i - i/N).
double ks_sup_distance(std::span<const double> cdf_at_sorted);

namespace scalar {
void critical_radius_batch(const Mat2Batch& in, double den_floor, std::span<double> out);
std::size_t count_greater(std::span<const double> xs, double threshold);
double ks_sup_distance(std::span<const double> cdf_at_sorted);
}  // namespace scalar

namespace avx2 {
/// True when the AVX2 variants were compiled in.
bool compiled();
void critical_radius_batch(const Mat2Batch& in, double den_floor, std::span<double> out);
std::size_t count_greater(std::span<const double> xs, double threshold);
double ks_sup_distance(std::span<const double> cdf_at_sorted);
}  // namespace avx2

}  // namespace skewtail::kernels
