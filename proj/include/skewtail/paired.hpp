#pragma once

// Scheffe's paired-comparison model y_ij = (alpha_i - alpha_j) + gamma_ij +
// e_ij and tests of subtractivity (gamma == 0) based on the singular values
// of the interaction estimate.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skewtail/mc.hpp"
#include "skewtail/specfun.hpp"

namespace skewtail {

/// Win counts of a round robin with n_games games per pair and no ties.
struct ScoreSheet {
  std::vector<std::string> names;
  int n_games = 0;
  Eigen::MatrixXi wins;  // wins(i, j) = games i won against j; diagonal 0

  int size() const noexcept { return static_cast<int>(wins.rows()); }

  /// Throws DataError (1-based row/column) on any violated invariant.
  void validate() const;
};

/// Skew-symmetric preference matrix y.
struct SkewObservations {
  Eigen::MatrixXd y;

  int size() const noexcept { return static_cast<int>(y.rows()); }

  /// Checks squareness and y_ij + y_ji = 0 within `tol`; throws DataError.
  static SkewObservations from_matrix(const Eigen::MatrixXd& y, double tol = 1e-9);
};

/// Least-squares fit under sum(alpha) = 0 and zero row sums of gamma.
struct ScheffeFit {
  Eigen::VectorXd alpha_hat;
  Eigen::MatrixXd gamma_hat;

  int size() const noexcept { return static_cast<int>(alpha_hat.size()); }
};

/// Win fraction transform f(q) = 2 sqrt(n) (asin(sqrt(q)) - pi/4).
double stabilize_fraction(double q, int n_games);

/// Pairs (i < j, 0-based) whose record is a sweep (0 or n wins); the
/// transform stays finite there but the normal approximation is poor.
std::vector<std::pair<int, int>> boundary_pairs(const ScoreSheet& sheet);

SkewObservations variance_stabilize(const ScoreSheet& sheet);

/// Requires m >= 3.
ScheffeFit scheffe_fit(const SkewObservations& obs);

struct ChiSquareResult {
  double stat = 0.0;
  int df = 0;
  Probability p;
};

struct LargestSvResult {
  double stat = 0.0;
  Probability p;
};

struct StandardizedResult {
  double stat = 0.0;
  /// Empty when stat < 1/sqrt(2), where the exact tail formula does not hold.
  std::optional<Probability> p;
};

struct Deadlock {
  std::array<int, 3> triple{};  // 0-based, oriented so that value >= 0
  double value = 0.0;           // (g_ij + g_jk + g_ki) / sqrt(3)
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

ChiSquareResult chi_square_test(const ScheffeFit& fit, double sigma2);
LargestSvResult largest_sv_test(const ScheffeFit& fit, double sigma2);
/// Requires m >= 5.
StandardizedResult lrt_standardized_test(const ScheffeFit& fit);

/// (g_ij + g_jk + g_ki) / sqrt(3) for the oriented triple (i, j, k).
double cycle_contrast(const Eigen::MatrixXd& gamma, int i, int j, int k);

/// Exhaustive maximum of the three-way deadlock contrast over all triples
/// in both orientations. For an unordered triple a < b < c the reported
/// orientation is (a, b, c) if its cycle sum is non-negative, else (c, b, a).
Deadlock max_deadlock(const ScheffeFit& fit);

/// Points (sqrt(s1) u_i, sqrt(s1) v_i) of the rank-2 approximation
/// gamma ~ s1 (u v' - v u'), in the top_plane gauge.
std::vector<Point2> residual_embedding(const ScheffeFit& fit);

/// Signed area of triangle (P_i, P_j, P_k), counterclockwise positive.
double signed_area(const std::vector<Point2>& points, int i, int j, int k);

/// Every statistic of one analysis.
struct TestReport {
  int m = 0;
  double sigma2 = 1.0;
  ChiSquareResult chi2;
  LargestSvResult largest_sv;
  StandardizedResult standardized;
  SingularSpectrum spectrum;
  Deadlock deadlock;
  std::vector<Point2> embedding;  // empty if the top pair is degenerate
  /// 2 S_ijk / sqrt(3) of the deadlock triple in the embedding.
  std::optional<double> deadlock_area;
  ScheffeFit fit;
};

/// Full pipeline from stabilized observations. Requires m >= 5 (the
/// standardized test needs p = m - 1 >= 4).
TestReport analyze(const SkewObservations& obs, double sigma2 = 1.0);

/// sigma_1 of the interaction estimate for `count` simulated null data sets
/// y_ij ~ N(0, 1); replicate i uses sample_stream(seed, i).
std::vector<double> simulate_null_largest_sv(int m, std::size_t count, std::uint64_t seed,
                                             unsigned threads = 1);

}  // namespace skewtail
