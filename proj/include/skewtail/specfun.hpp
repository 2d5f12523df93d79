#pragma once

// Special functions used by the distribution formulas: log-gamma and the
// regularized incomplete gamma / beta functions. All functions are pure and
// thread-safe.

namespace skewtail {

/// A probability in [0, 1]. Construction asserts the range.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

  /// 1 - value.
  Probability complement() const;

 private:
  double value_ = 0.0;
};

namespace specfun {

/// ln Gamma(x) for x > 0.
double log_gamma(double x);
/// Extended-precision variant for the ill-conditioned Hankel algebra.
long double log_gamma(long double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// without cancellation in either tail.
double gamma_q(double a, double x);
/// ln P(a, x); finite even where P underflows. Returns -inf at x = 0.
double log_gamma_p(double a, double x);

/// Regularized incomplete beta I_y(a, b).
double beta_inc(double a, double b, double y);
/// 1 - I_y(a, b), computed directly in the upper tail.
double beta_inc_upper(double a, double b, double y);

}  // namespace specfun

/// Upper tail of the chi-square law with nu degrees of freedom at y.
Probability chi2_upper(double nu, double y);
/// Lower tail, i.e. the chi-square CDF.
Probability chi2_lower(double nu, double y);
/// Upper tail of Beta(a, b) at y in [0, 1].
Probability beta_upper(double a, double b, double y);

}  // namespace skewtail
