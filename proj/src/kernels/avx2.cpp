#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "skewtail/kernels.hpp"

// Compiled with -mavx2 and without FMA contraction; each lane performs the
// same IEEE operations in the same order as the scalar reference.

namespace skewtail::kernels::avx2 {

bool compiled() { return true; }

void critical_radius_batch(const Mat2Batch& in, double den_floor, std::span<double> out) {
  const std::size_t n = in.size();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d floor = _mm256_set1_pd(den_floor);
  const __m256d nan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(in.r11.data() + i);
    const __m256d b = _mm256_loadu_pd(in.r12.data() + i);
    const __m256d c = _mm256_loadu_pd(in.r21.data() + i);
    const __m256d d = _mm256_loadu_pd(in.r22.data() + i);
    const __m256d den = _mm256_add_pd(_mm256_sub_pd(one, _mm256_mul_pd(a, d)), _mm256_mul_pd(b, c));
    const __m256d diff = _mm256_sub_pd(a, d);
    const __m256d sum = _mm256_add_pd(b, c);
    const __m256d num = _mm256_add_pd(_mm256_mul_pd(diff, diff), _mm256_mul_pd(sum, sum));
    const __m256d val = _mm256_sub_pd(one, _mm256_div_pd(num, _mm256_mul_pd(den, den)));
    const __m256d excluded = _mm256_cmp_pd(_mm256_and_pd(den, abs_mask), floor, _CMP_LT_OQ);
    _mm256_storeu_pd(out.data() + i, _mm256_blendv_pd(val, nan, excluded));
  }
  if (i < n) {
    const Mat2Batch tail{in.r11.subspan(i), in.r12.subspan(i), in.r21.subspan(i),
                         in.r22.subspan(i)};
    scalar::critical_radius_batch(tail, den_floor, out.subspan(i));
  }
}

std::size_t count_greater(std::span<const double> xs, double threshold) {
  const std::size_t n = xs.size();
  const __m256d thr = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(xs.data() + i);
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, thr, _CMP_GT_OQ));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  return count + scalar::count_greater(xs.subspan(i), threshold);
}

double ks_sup_distance(std::span<const double> cdf_at_sorted) {
  const std::size_t n = cdf_at_sorted.size();
  const double nd = static_cast<double>(n);
  const __m256d total = _mm256_set1_pd(nd);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d f = _mm256_loadu_pd(cdf_at_sorted.data() + i);
    const __m256d lo = _mm256_div_pd(idx, total);
    const __m256d hi = _mm256_div_pd(_mm256_add_pd(idx, one), total);
    best = _mm256_max_pd(best, _mm256_max_pd(_mm256_sub_pd(hi, f), _mm256_sub_pd(f, lo)));
    idx = _mm256_add_pd(idx, four);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double result = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    const double f = cdf_at_sorted[i];
    const double lo = static_cast<double>(i) / nd;
    const double hi = static_cast<double>(i + 1) / nd;
    result = std::max(result, std::max(hi - f, f - lo));
  }
  return result;
}

}  // namespace skewtail::kernels::avx2
