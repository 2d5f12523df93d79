#include "skewtail/paired.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "skewtail/errors.hpp"
#include "skewtail/rmtdist.hpp"

namespace skewtail {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

void require_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be positive");
}

}  // namespace

void ScoreSheet::validate() const {
  const int m = size();
  if (wins.rows() != wins.cols()) throw DataError("score sheet must be square");
  if (m < 2) throw DataError("score sheet needs at least two objects");
  if (static_cast<int>(names.size()) != m) throw DataError("one name per object is required");
  if (n_games < 1) throw DataError("n_games must be >= 1");
  for (int i = 0; i < m; ++i) {
    if (wins(i, i) != 0) throw DataError("diagonal cell must be empty", i + 1, i + 1);
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const int r = wins(i, j);
      if (r < 0 || r > n_games) {
        throw DataError("win count " + std::to_string(r) + " outside [0, " +
                            std::to_string(n_games) + "]",
                        i + 1, j + 1);
      }
      if (r + wins(j, i) != n_games) {
        throw DataError("cells (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") and (" +
                            std::to_string(j + 1) + "," + std::to_string(i + 1) + ") sum to " +
                            std::to_string(r + wins(j, i)) + ", expected " +
                            std::to_string(n_games) + " (ties are not supported)",
                        i + 1, j + 1);
      }
    }
  }
}

SkewObservations SkewObservations::from_matrix(const Eigen::MatrixXd& y, double tol) {
  if (y.rows() != y.cols()) throw DataError("observation matrix must be square");
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (std::fabs(y(i, i)) > tol) {
      throw DataError("diagonal must be zero", static_cast<int>(i + 1), static_cast<int>(i + 1));
    }
    for (Eigen::Index j = i + 1; j < y.cols(); ++j) {
      if (std::fabs(y(i, j) + y(j, i)) > tol) {
        throw DataError("matrix is not skew-symmetric", static_cast<int>(i + 1),
                        static_cast<int>(j + 1));
      }
    }
  }
  // Store the exactly skew part.
  SkewObservations obs;
  obs.y = 0.5 * (y - y.transpose());
  return obs;
}

double stabilize_fraction(double q, int n_games) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("win fraction must lie in [0, 1]");
  if (n_games < 1) throw DomainError("n_games must be >= 1");
  return 2.0 * std::sqrt(static_cast<double>(n_games)) *
         (std::asin(std::sqrt(q)) - 0.25 * std::numbers::pi);
}

std::vector<std::pair<int, int>> boundary_pairs(const ScoreSheet& sheet) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < sheet.size(); ++i)
    for (int j = i + 1; j < sheet.size(); ++j)
      if (sheet.wins(i, j) == 0 || sheet.wins(i, j) == sheet.n_games) out.emplace_back(i, j);
  return out;
}

SkewObservations variance_stabilize(const ScoreSheet& sheet) {
  sheet.validate();
  const int m = sheet.size();
  const double n = sheet.n_games;
  SkewObservations obs;
  obs.y = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double forward = stabilize_fraction(sheet.wins(i, j) / n, sheet.n_games);
      const double backward = stabilize_fraction(sheet.wins(j, i) / n, sheet.n_games);
      // asin(sqrt(q)) + asin(sqrt(1 - q)) = pi/2, so forward = -backward.
      if (std::fabs(forward + backward) > 1e-12) {
        throw NumericalError("variance-stabilizing transform lost skew-symmetry");
      }
      obs.y(i, j) = 0.5 * (forward - backward);
      obs.y(j, i) = -obs.y(i, j);
    }
  }
  return obs;
}

ScheffeFit scheffe_fit(const SkewObservations& obs) {
  const int m = obs.size();
  if (m < 3) throw DomainError("scheffe_fit requires m >= 3");
  ScheffeFit fit;
  fit.alpha_hat = obs.y.rowwise().sum() / static_cast<double>(m);
  fit.gamma_hat = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      fit.gamma_hat(i, j) = obs.y(i, j) - (fit.alpha_hat(i) - fit.alpha_hat(j));
      fit.gamma_hat(j, i) = -fit.gamma_hat(i, j);
    }
  }
  return fit;
}

ChiSquareResult chi_square_test(const ScheffeFit& fit, double sigma2) {
  require_sigma2(sigma2);
  const int m = fit.size();
  if (m < 3) throw DomainError("chi_square_test requires m >= 3");
  double ss = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) ss += fit.gamma_hat(i, j) * fit.gamma_hat(i, j);
  ChiSquareResult r;
  r.stat = ss / sigma2;
  r.df = (m - 1) * (m - 2) / 2;
  r.p = chi2_upper(r.df, r.stat);
  return r;
}

LargestSvResult largest_sv_test(const ScheffeFit& fit, double sigma2) {
  require_sigma2(sigma2);
  const int m = fit.size();
  if (m < 3) throw DomainError("largest_sv_test requires m >= 3");
  const auto spec = singular_values(fit.gamma_hat);
  LargestSvResult r;
  r.stat = spec.sigma[0] / std::sqrt(sigma2);
  r.p = largest_sv_upper(m - 1, r.stat);
  return r;
}

StandardizedResult lrt_standardized_test(const ScheffeFit& fit) {
  const int m = fit.size();
  if (m < 5) throw DomainError("standardized test requires m >= 5");
  const auto spec = singular_values(fit.gamma_hat);
  const double total = spec.sum_squares();
  StandardizedResult r;
  if (total == 0.0) return r;
  r.stat = std::min(1.0, spec.sigma[0] / std::sqrt(total));
  if (r.stat >= kStandardizedThreshold - kThresholdSlack) {
    r.p = standardized_sv_upper(m - 1, r.stat);
  }
  return r;
}

double cycle_contrast(const Eigen::MatrixXd& gamma, int i, int j, int k) {
  return (gamma(i, j) + gamma(j, k) + gamma(k, i)) / kSqrt3;
}

Deadlock max_deadlock(const ScheffeFit& fit) {
  const int m = fit.size();
  if (m < 3) throw DomainError("max_deadlock requires m >= 3");
  Deadlock best;
  best.value = -1.0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      for (int c = b + 1; c < m; ++c) {
        const double s = cycle_contrast(fit.gamma_hat, a, b, c);
        const double value = std::fabs(s);
        if (value > best.value) {
          best.value = value;
          best.triple = s >= 0.0 ? std::array{a, b, c} : std::array{c, b, a};
        }
      }
    }
  }
  return best;
}

std::vector<Point2> residual_embedding(const ScheffeFit& fit) {
  const auto plane = top_plane(fit.gamma_hat);
  const double scale = std::sqrt(plane.sigma1);
  std::vector<Point2> points(fit.size());
  for (int i = 0; i < fit.size(); ++i) points[i] = {scale * plane.u(i), scale * plane.v(i)};
  return points;
}

double signed_area(const std::vector<Point2>& points, int i, int j, int k) {
  const int n = static_cast<int>(points.size());
  if (i == j || j == k || i == k) throw DomainError("signed_area requires distinct apexes");
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) {
    throw DomainError("signed_area index out of range");
  }
  const Point2& a = points[i];
  const Point2& b = points[j];
  const Point2& c = points[k];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

TestReport analyze(const SkewObservations& obs, double sigma2) {
  TestReport report;
  report.m = obs.size();
  if (report.m < 5) throw DomainError("analysis requires at least 5 objects");
  report.sigma2 = sigma2;
  report.fit = scheffe_fit(obs);
  report.chi2 = chi_square_test(report.fit, sigma2);
  report.largest_sv = largest_sv_test(report.fit, sigma2);
  report.standardized = lrt_standardized_test(report.fit);
  report.spectrum = singular_values(report.fit.gamma_hat);
  report.deadlock = max_deadlock(report.fit);
  try {
    report.embedding = residual_embedding(report.fit);
    const auto& t = report.deadlock.triple;
    report.deadlock_area = 2.0 * signed_area(report.embedding, t[0], t[1], t[2]) / kSqrt3;
  } catch (const MultiplicityError&) {
    report.embedding.clear();
  }
  return report;
}

std::vector<double> simulate_null_largest_sv(int m, std::size_t count, std::uint64_t seed,
                                             unsigned threads) {
  if (m < 3) throw DomainError("simulate_null_largest_sv requires m >= 3");
  std::vector<double> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    auto rng = sample_stream(seed, i);
    SkewObservations obs;
    obs.y = sample_skew_gaussian(m, rng).dense();
    out[i] = singular_values(scheffe_fit(obs).gamma_hat).sigma[0];
  });
  return out;
}

}  // namespace skewtail
