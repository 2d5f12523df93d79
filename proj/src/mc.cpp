#include "skewtail/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "skewtail/errors.hpp"
#include "skewtail/kernels.hpp"

namespace skewtail {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_square_skew(const Eigen::MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) throw DomainError("skew matrix must be square");
  if (a.rows() < 2) throw DomainError("skew matrix order must be >= 2");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::fabs(a(i, i)) > tol * scale) throw DomainError("skew matrix has nonzero diagonal");
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::fabs(a(i, j) + a(j, i)) > tol * scale) {
        throw DomainError("matrix is not skew-symmetric at (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ")");
      }
    }
  }
}

// Eigenvalues of A'A in descending order.
Eigen::VectorXd gram_eigenvalues_desc(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues().reverse();
}

}  // namespace

SkewMatrix::SkewMatrix(int p) : p_(p) {
  if (p < 2) throw DomainError("skew matrix order must be >= 2");
  upper_.assign(static_cast<std::size_t>(p) * (p - 1) / 2, 0.0);
}

SkewMatrix::SkewMatrix(int p, std::vector<double> upper) : p_(p), upper_(std::move(upper)) {
  if (p < 2) throw DomainError("skew matrix order must be >= 2");
  if (upper_.size() != static_cast<std::size_t>(p) * (p - 1) / 2) {
    throw DomainError("upper triangle must hold p(p-1)/2 entries");
  }
}

SkewMatrix SkewMatrix::from_dense(const Eigen::MatrixXd& a, double tol) {
  require_square_skew(a, tol);
  SkewMatrix m(static_cast<int>(a.rows()));
  for (int i = 0; i < m.p_; ++i)
    for (int j = i + 1; j < m.p_; ++j) m.set(i, j, a(i, j));
  return m;
}

std::size_t SkewMatrix::index(int i, int j) const {
  // Row i starts after sum_{r<i} (p - 1 - r) entries.
  return static_cast<std::size_t>(i) * (2 * p_ - i - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

double SkewMatrix::operator()(int i, int j) const {
  if (i == j) return 0.0;
  return i < j ? upper_[index(i, j)] : -upper_[index(j, i)];
}

void SkewMatrix::set(int i, int j, double value) {
  if (!(i < j) || i < 0 || j >= p_) throw DomainError("SkewMatrix::set requires 0 <= i < j < p");
  upper_[index(i, j)] = value;
}

Eigen::MatrixXd SkewMatrix::dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p_, p_);
  std::size_t k = 0;
  for (int i = 0; i < p_; ++i) {
    for (int j = i + 1; j < p_; ++j, ++k) {
      a(i, j) = upper_[k];
      a(j, i) = -upper_[k];
    }
  }
  return a;
}

double SkewMatrix::half_frobenius_sq() const {
  double s = 0.0;
  for (double v : upper_) s += v * v;
  return s;
}

double SingularSpectrum::sum_squares() const {
  double s = 0.0;
  for (double v : sigma) s += v * v;
  return s;
}

SampleRng sample_stream(std::uint64_t seed, std::uint64_t index) {
  return SampleRng(mix64(mix64(seed) ^ index));
}

SkewMatrix sample_skew_gaussian(int p, SampleRng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> upper(static_cast<std::size_t>(p) * (p - 1) / 2);
  for (double& v : upper) v = normal(rng);
  return SkewMatrix(p, std::move(upper));
}

SingularSpectrum singular_values(const Eigen::MatrixXd& skew) {
  require_square_skew(skew, 1e-9);
  const int p = static_cast<int>(skew.rows());
  const int t = p / 2;
  const Eigen::VectorXd lam = gram_eigenvalues_desc(skew);
  const double lead = std::max(lam(0), 0.0);

  SingularSpectrum s;
  s.p = p;
  s.sigma.resize(t);
  for (int k = 0; k < t; ++k) {
    const double a = lam(2 * k);
    const double b = lam(2 * k + 1);
    if (std::fabs(a - b) > 1e-8 * std::fabs(a) + 1e-12 * lead) {
      throw NumericalError("eigenvalues of A'A failed to pair at index " + std::to_string(k));
    }
    s.sigma[k] = std::sqrt(std::max(0.5 * (a + b), 0.0));
  }
  if (p % 2 == 1 && std::fabs(lam(p - 1)) > 1e-10 * lead + 1e-300) {
    throw NumericalError("odd-order skew matrix lacks a null direction");
  }
  return s;
}

SingularSpectrum singular_values(const SkewMatrix& a) { return singular_values(a.dense()); }

TopPlane top_plane(const Eigen::MatrixXd& skew) {
  require_square_skew(skew, 1e-9);
  const int p = static_cast<int>(skew.rows());
  const Eigen::MatrixXd gram = skew.transpose() * skew;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();  // ascending
  const double sigma1 = std::sqrt(std::max(0.5 * (lam(p - 1) + lam(p - 2)), 0.0));
  if (!(sigma1 > 0.0)) throw MultiplicityError("top singular value is zero");
  if (p >= 4) {
    const double sigma2 = std::sqrt(std::max(lam(p - 3), 0.0));
    if (sigma1 - sigma2 <= 1e-8 * sigma1) {
      throw MultiplicityError("top singular pair is not simple");
    }
  }

  Eigen::VectorXd v = es.eigenvectors().col(p - 1);
  v.normalize();
  Eigen::VectorXd u = skew * v;
  u /= u.norm();

  // Gauge: rotate (u, v) within the plane so that at the coordinate of
  // largest u_i^2 + v_i^2, u is positive and v vanishes. Rotations
  // (u cos - v sin, u sin + v cos) preserve A v = s u, A u = -s v.
  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double r2 = u(i) * u(i) + v(i) * v(i);
    if (r2 > best * (1.0 + 1e-12)) {
      best = r2;
      pivot = i;
    }
  }
  const double r = std::sqrt(best);
  const double cos_t = u(pivot) / r;
  const double sin_t = -v(pivot) / r;
  TopPlane plane;
  plane.sigma1 = sigma1;
  plane.u = u * cos_t - v * sin_t;
  plane.v = u * sin_t + v * cos_t;
  plane.v(pivot) = 0.0;
  return plane;
}

TopPlane top_plane(const SkewMatrix& a) { return top_plane(a.dense()); }

double empirical_upper(std::span<const double> samples, double x) {
  if (samples.empty()) throw DomainError("empirical_upper requires at least one sample");
  return static_cast<double>(kernels::count_greater(samples, x)) /
         static_cast<double>(samples.size());
}

double binomial_se(double fraction, std::size_t n) {
  if (n == 0) throw DomainError("binomial_se requires n > 0");
  return std::sqrt(fraction * (1.0 - fraction) / static_cast<double>(n));
}

double ks_distance(std::span<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance requires at least one sample");
  std::sort(samples.begin(), samples.end());
  std::vector<double> f(samples.size());
  std::transform(samples.begin(), samples.end(), f.begin(), cdf);
  return kernels::ks_sup_distance(f);
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  constexpr std::size_t kChunk = 256;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (;;) {
            const std::size_t begin = next.fetch_add(kChunk);
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + kChunk);
            for (std::size_t i = begin; i < end; ++i) body(i);
          }
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<SpectrumSample> simulate_spectra(int p, std::size_t count, std::uint64_t seed,
                                             unsigned threads) {
  if (p < 2) throw DomainError("simulate_spectra requires p >= 2");
  std::vector<SpectrumSample> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    auto rng = sample_stream(seed, i);
    const auto spec = singular_values(sample_skew_gaussian(p, rng));
    SpectrumSample s;
    s.sigma1 = spec.sigma[0];
    s.sigma2 = spec.sigma.size() > 1 ? spec.sigma[1] : 0.0;
    const double total = spec.sum_squares();
    s.standardized = total > 0.0 ? s.sigma1 / std::sqrt(total) : 0.0;
    out[i] = s;
  });
  return out;
}

}  // namespace skewtail
