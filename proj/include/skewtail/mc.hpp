#pragma once

// Seeded Monte-Carlo sampling of skew-symmetric Gaussian matrices and
// spectral extraction. Sample i of a run draws from its own generator
// derived from (seed, i), so results do not depend on thread count.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace skewtail {

/// p x p real skew-symmetric matrix stored as its strict upper triangle,
/// row-major: a_12, a_13, ..., a_1p, a_23, ...
class SkewMatrix {
 public:
  /// Zero matrix of order p (p >= 2).
  explicit SkewMatrix(int p);
  SkewMatrix(int p, std::vector<double> upper);

  /// Validates a_ji = -a_ij and a_ii = 0 within `tol`; throws DomainError.
  static SkewMatrix from_dense(const Eigen::MatrixXd& a, double tol = 1e-9);

  int order() const noexcept { return p_; }
  std::span<const double> upper() const noexcept { return upper_; }

  double operator()(int i, int j) const;
  void set(int i, int j, double value);  // requires i < j

  Eigen::MatrixXd dense() const;
  /// tr(A'A)/2 = sum of squared upper entries.
  double half_frobenius_sq() const;

 private:
  std::size_t index(int i, int j) const;

  int p_;
  std::vector<double> upper_;
};

/// Singular values of a skew-symmetric matrix, one per pair, descending.
struct SingularSpectrum {
  int p = 0;
  std::vector<double> sigma;

  double sum_squares() const;
};

/// Leading singular value with its invariant plane: A v = sigma1 u,
/// A u = -sigma1 v.
struct TopPlane {
  double sigma1 = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

/// Per-sample random stream.
using SampleRng = std::mt19937_64;

/// Generator for sample `index` of the run seeded by `seed`.
SampleRng sample_stream(std::uint64_t seed, std::uint64_t index);

/// Upper entries iid N(0, 1).
SkewMatrix sample_skew_gaussian(int p, SampleRng& rng);

/// Singular values via the eigenvalues of A'A, which come in equal pairs
/// (plus one zero for odd p). Throws NumericalError if the pairing fails.
SingularSpectrum singular_values(const SkewMatrix& a);
SingularSpectrum singular_values(const Eigen::MatrixXd& skew);

/// Top plane in the canonical gauge: u's largest-magnitude entry is
/// positive and as large as any rotation of the pair allows (v is zero
/// there). Throws MultiplicityError when sigma_1 is zero or not simple.
TopPlane top_plane(const SkewMatrix& a);
TopPlane top_plane(const Eigen::MatrixXd& skew);

/// Fraction of samples strictly greater than x.
double empirical_upper(std::span<const double> samples, double x);
/// Binomial standard error sqrt(f (1 - f) / n).
double binomial_se(double fraction, std::size_t n);

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// `cdf`. The samples are sorted in place.
double ks_distance(std::span<double> samples, const std::function<double(double)>& cdf);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 or 1 means
/// serial). body must only write state owned by index i.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Per-sample summary used by the validation runs.
struct SpectrumSample {
  double sigma1 = 0.0;
  double sigma2 = 0.0;        // 0 when t = 1
  double standardized = 0.0;  // sigma1 / sqrt(sum sigma_i^2)
};

/// Draws `count` matrices of order p; sample i uses sample_stream(seed, i).
std::vector<SpectrumSample> simulate_spectra(int p, std::size_t count, std::uint64_t seed,
                                             unsigned threads = 1);

}  // namespace skewtail
