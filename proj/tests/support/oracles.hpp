#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's special functions: densities use std::tgamma / std::erf and
// integrals use tanh-sinh quadrature.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gmpxx.h>
#include <Eigen/Dense>

namespace oracle {

/// Tanh-sinh (double exponential) quadrature of f over [a, b]. Tolerates
/// integrable endpoint singularities; f is never evaluated at a or b.
template <class F>
double tanh_sinh(F&& f, double a, double b, double tol = 1e-14, int max_level = 10) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  constexpr double kTMax = 6.0;  // reaches ~1e-300 from an endpoint at 0
  const double half = 0.5 * (b - a);
  double previous = 0.0;
  for (int level = 0; level <= max_level; ++level) {
    const double step = std::ldexp(1.0, -level);
    double sum = 0.0;
    for (double t = 0.0; t <= kTMax; t += step) {
      const double u = kHalfPi * std::sinh(t);
      const double cu = std::cosh(u);
      const double w = half * kHalfPi * std::cosh(t) / (cu * cu);
      const double delta = half / (std::exp(u) * cu);  // half * (1 - tanh u)
      if (t == 0.0) {
        sum += w * f(a + half);
        continue;
      }
      const double right = b - delta;
      const double left = a + delta;
      if (right < b && right > a) sum += w * f(right);
      if (left > a && left < b) sum += w * f(left);
    }
    const double estimate = step * sum;
    if (level > 3 && std::fabs(estimate - previous) <= tol * std::max(1.0, std::fabs(estimate))) {
      return estimate;
    }
    previous = estimate;
  }
  return previous;
}

inline double chi2_density(double nu, double s) {
  return std::pow(s, 0.5 * nu - 1.0) * std::exp(-0.5 * s) /
         (std::pow(2.0, 0.5 * nu) * std::tgamma(0.5 * nu));
}

/// Chi-square tails by direct quadrature of the density. The upper tail is
/// split so each piece spans only a few e-folds of the exponential.
inline double chi2_lower(double nu, double y) {
  if (y == 0.0) return 0.0;
  return tanh_sinh([nu](double s) { return chi2_density(nu, s); }, 0.0, y);
}
inline double chi2_upper(double nu, double y) {
  auto f = [nu](double s) { return chi2_density(nu, s); };
  const double far = y + 2.0 * nu + 400.0;
  double total = 0.0;
  double lo = y;
  for (double width = 4.0; lo < far; width *= 2.0) {
    const double hi = std::min(far, lo + width);
    total += tanh_sinh(f, lo, hi);
    lo = hi;
  }
  return total;
}

/// Beta(a, b) upper tail, integrated in r = 1 - s so the endpoint at s = 1
/// is represented exactly.
inline double beta_upper(double a, double b, double y) {
  if (y >= 1.0) return 0.0;
  const double log_b = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  auto f = [=](double r) {
    return std::exp((b - 1.0) * std::log(r) + (a - 1.0) * std::log1p(-r) - log_b);
  };
  return tanh_sinh(f, 0.0, 1.0 - y);
}

/// 2 Phi(x) - 1: half-normal CDF.
inline double half_normal_cdf(double x) { return std::erf(x / std::numbers::sqrt2); }

/// CDF of the chi distribution with 3 degrees of freedom.
inline double chi3_cdf(double x) {
  return std::erf(x / std::numbers::sqrt2) -
         std::sqrt(2.0 / std::numbers::pi) * x * std::exp(-0.5 * x * x);
}

inline double chi3_density(double x) {
  return std::sqrt(2.0 / std::numbers::pi) * x * x * std::exp(-0.5 * x * x);
}

/// Vol(U(p)) through Vol(U(p)) = Vol(G(2,p)) Vol(U(p-2)),
/// Vol(G(2,p)) = 2 Omega_p Omega_{p-1} / (Omega_2 Omega_1).
inline double volume_U_recurrence(int p) {
  auto omega = [](int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); };
  if (p == 1) return 1.0;
  if (p == 2) return 2.0;
  return 2.0 * omega(p) * omega(p - 1) / (omega(2) * omega(1)) * volume_U_recurrence(p - 2);
}

/// Gamma(h + 1/2) / sqrt(pi) = (2h)! / (4^h h!) as an exact rational.
inline mpq_class half_integer_gamma_over_sqrt_pi(int h) {
  mpz_class num = 1, den = 1;
  for (int k = 1; k <= h; ++k) {
    num *= (2 * k - 1);
    den *= 2;
  }
  return mpq_class(num, den);
}

struct ExactHankel {
  Eigen::MatrixXd ginv;  // inverse of (Gamma(p - i - j + 1/2))
  double log_det = 0.0;  // ln det of the same matrix
};

/// Exact Gauss-Jordan inversion of G / sqrt(pi) over the rationals.
inline ExactHankel exact_hankel_inverse(int p) {
  const int t = p / 2;
  std::vector<std::vector<mpq_class>> a(t, std::vector<mpq_class>(2 * t));
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) a[i][j] = half_integer_gamma_over_sqrt_pi(p - (i + 1) - (j + 1));
    a[i][t + i] = 1;
  }
  mpq_class det = 1;
  for (int col = 0; col < t; ++col) {
    int pivot = col;
    while (a[pivot][col] == 0) ++pivot;
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      det = -det;
    }
    const mpq_class piv = a[col][col];
    det *= piv;
    for (auto& v : a[col]) v /= piv;
    for (int r = 0; r < t; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const mpq_class factor = a[r][col];
      for (int c = 0; c < 2 * t; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  ExactHankel out;
  out.ginv.resize(t, t);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) out.ginv(i, j) = a[i][t + j].get_d() / sqrt_pi;
  // ln det = ln(det of rational part) + (t/2) ln pi
  long exp_num = 0, exp_den = 0;
  const double mant_num = mpz_get_d_2exp(&exp_num, det.get_num_mpz_t());
  const double mant_den = mpz_get_d_2exp(&exp_den, det.get_den_mpz_t());
  out.log_det = std::log(std::fabs(mant_num)) - std::log(mant_den) +
                static_cast<double>(exp_num - exp_den) * std::numbers::ln2 +
                0.5 * t * std::log(std::numbers::pi);
  return out;
}

/// max_ij |x_ij - y_ij| / |y_ij|.
inline double max_relative(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      worst = std::max(worst, std::fabs(x(i, j) - y(i, j)) / std::fabs(y(i, j)));
  return worst;
}

}  // namespace oracle
