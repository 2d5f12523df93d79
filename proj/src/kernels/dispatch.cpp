#include <atomic>
#include <stdexcept>

#include "skewtail/kernels.hpp"

namespace skewtail::kernels {

#if !defined(SKEWTAIL_HAVE_AVX2)
namespace avx2 {
// Stubs for builds without the AVX2 translation unit; never dispatched to.
bool compiled() { return false; }
void critical_radius_batch(const Mat2Batch&, double, std::span<double>) {
  throw std::logic_error("AVX2 kernels not compiled");
}
std::size_t count_greater(std::span<const double>, double) {
  throw std::logic_error("AVX2 kernels not compiled");
}
double ks_sup_distance(std::span<const double>) {
  throw std::logic_error("AVX2 kernels not compiled");
}
}  // namespace avx2
#endif

namespace {

Isa probe() {
#if defined(SKEWTAIL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<int> g_forced{-1};

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced < 0) return detected_isa();
  const auto isa = static_cast<Isa>(forced);
  return isa == Isa::avx2 && detected_isa() != Isa::avx2 ? Isa::scalar : isa;
}

void force_isa(std::optional<Isa> isa) {
  g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

void critical_radius_batch(const Mat2Batch& in, double den_floor, std::span<double> out) {
  if (out.size() < in.size()) throw std::invalid_argument("output span too small");
  if (active_isa() == Isa::avx2) return avx2::critical_radius_batch(in, den_floor, out);
  scalar::critical_radius_batch(in, den_floor, out);
}

std::size_t count_greater(std::span<const double> xs, double threshold) {
  if (active_isa() == Isa::avx2) return avx2::count_greater(xs, threshold);
  return scalar::count_greater(xs, threshold);
}

double ks_sup_distance(std::span<const double> cdf_at_sorted) {
  if (active_isa() == Isa::avx2) return avx2::ks_sup_distance(cdf_at_sorted);
  return scalar::ks_sup_distance(cdf_at_sorted);
}

}  // namespace skewtail::kernels
