#pragma once

// Distribution laws of the largest singular value of a p x p skew-symmetric
// Gaussian matrix whose upper-triangular entries are iid N(0, 1):
//
//   * the exact CDF of sigma_1 (a t x t determinant of incomplete gammas),
//   * the Hankel-Gram matrix g_ij = Gamma(p - i - j + 1/2), its closed-form
//     inverse and the tube-method weights built from the two,
//   * the chi-square tail expansion of P(sigma_1 > x),
//   * the exact beta-mixture tail of the standardized statistic
//     sigma_1 / sqrt(sum sigma_i^2) on [1/sqrt(2), 1].
//
// Indices in formulas are 1-based; matrices are stored 0-based.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "skewtail/specfun.hpp"

namespace skewtail {

/// Integer constants derived from the matrix order p.
struct SpectrumLaw {
  int p = 0;
  int t = 0;    // number of singular-value pairs, floor(p/2)
  int eps = 0;  // p - 2t
  int n = 0;    // dimension of the skew-symmetric space, p(p-1)/2
  int d = 0;    // dimension of the index manifold, 2(p-2)

  /// Throws DomainError for p < 2.
  static SpectrumLaw of(int p);
};

/// Smallest x for which the standardized tail formula is exact.
inline constexpr double kStandardizedThreshold = 0.70710678118654752440;

/// Slack allowed below kStandardizedThreshold, so that a printed 1/sqrt(2)
/// such as 0.70710678 is still accepted.
inline constexpr double kThresholdSlack = 1e-8;

/// Volume of U(p) = O(p)/H(p).
double volume_U(int p);
double log_volume_U(int p);

struct NormalizingConstants {
  double c = 0.0;  // joint-density constant
  double d = 0.0;  // CDF determinant constant, c / 2^t
  double log_c = 0.0;
  double log_d = 0.0;
};

NormalizingConstants normalizing_constants(int p);

/// Joint density of sigma_1 > ... > sigma_t > 0. `sigma` must have length t.
double joint_density(std::span<const double> sigma, int p);

/// P(sigma_1 < x).
Probability largest_sv_cdf(int p, double x);
/// P(sigma_1 > x) = 1 - largest_sv_cdf(p, x).
Probability largest_sv_upper(int p, double x);

struct HankelGram {
  int p = 0;
  int t = 0;
  Eigen::MatrixXd g;     // Gamma(p - i - j + 1/2)
  Eigen::MatrixXd ginv;  // closed form of g^{-1}
  /// Element-wise products g^{ij} g_{ij}.
  Eigen::MatrixXd products;
  /// weights[k] = sum_{i+j=k+2} g^{ij} g_{ij}, k = 0..2t-2. weights[k] is
  /// the coefficient of the chi-square / beta tail with 2p-3-2k degrees.
  std::vector<double> weights;

  /// sum_{i,j} g^{ij} g_{ij}; equals t.
  double trace_identity() const;
};

/// Requires p >= 4.
HankelGram hankel_gram(int p);

/// Triangular factorization route to the inverse of
/// G = (Gamma(delta + 2t - i - j + 1)), 1 <= i,j <= t:
///   B_{t-1} ... B_1 G = E T D,  G^{-1} = D^{-1} T^{-1} E^{-1} B.
/// Kept as an independent check on the closed form used by hankel_gram.
struct HankelFactorization {
  double delta = 0.0;
  int t = 0;
  Eigen::MatrixXd g;
  Eigen::MatrixXd b;     // product B_{t-1} ... B_1, unit upper triangular
  Eigen::MatrixXd tri;   // lower triangular binomial matrix T
  Eigen::MatrixXd tri_inv;
  Eigen::VectorXd dgam;  // diagonal of D, Gamma(delta + t - i + 1)
  Eigen::VectorXd efac;  // diagonal of E, (t - i)!
  Eigen::MatrixXd ginv;
  /// ln det(G) from the product of the diagonals of D and E.
  double log_det = 0.0;
  /// max_ij |(B G - E T D)_ij| / max_ij |(E T D)_ij|.
  double factorization_residual = 0.0;
};

/// Requires delta > -1 and t >= 1.
HankelFactorization hankel_inverse_oracle(double delta, int t);

/// sum_{i,j} g^{ij} g_{ij} chi2_upper(2p - 2i - 2j + 1, x^2). Asymptotic
/// approximation to P(sigma_1 > x) as x grows. Requires p >= 4, x > 0.
double largest_sv_tail_asymptotic(int p, double x);

/// P(sigma_1 / sqrt(sum sigma_i^2) > x) for x in [1/sqrt(2), 1], p >= 4.
/// Throws ValidityError below 1/sqrt(2) (the formula is not exact there)
/// and DomainError for p < 4 or x > 1.
Probability standardized_sv_upper(int p, double x);

/// 2 x 2 real matrix, row-major.
struct Mat2 {
  double r11 = 0.0;
  double r12 = 0.0;
  double r21 = 0.0;
  double r22 = 0.0;
};

/// 1 - [(r11 - r22)^2 + (r12 + r21)^2] / (1 - r11 r22 + r12 r21)^2.
/// Throws ExcludedPointError when |1 - r11 r22 + r12 r21| < 1e-9.
double critical_radius_objective(const Mat2& r);

struct CriticalRadiusSearch {
  std::uint64_t evaluated = 0;
  std::uint64_t excluded = 0;
  double max_objective = 0.0;
  double min_objective = 0.0;
  Mat2 argmax;
};

/// Random search of the objective over `count` matrices with entries
/// uniform in [-1, 1], skipping those with |denominator| < den_floor.
CriticalRadiusSearch critical_radius_search(std::uint64_t count, std::uint64_t seed,
                                            double den_floor = 1e-3);

/// Euler characteristic of the index manifold, 2 sum g^{ij} g_{ij}.
int euler_characteristic(int p);

}  // namespace skewtail
