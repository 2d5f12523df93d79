#include "skewtail/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "skewtail/errors.hpp"

namespace skewtail {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Round-off can leave a tail a few ulps outside [0, 1].
double clamp_unit(double v) {
  if (!(v >= -1e-14 && v <= 1.0 + 1e-14)) {
    throw NumericalError("probability out of range: " + std::to_string(v));
  }
  return std::clamp(v, 0.0, 1.0);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// Power series for the lower tail; valid (fast) when x < a + 1.
// Returns ln P(a, x).
double log_lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEpsilon) {
      return std::log(sum) + a * std::log(x) - x - specfun::log_gamma(a);
    }
  }
  throw NumericalError("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for the upper tail; valid when
// x >= a + 1. Returns ln Q(a, x).
double log_upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) {
      return std::log(h) + a * std::log(x) - x - specfun::log_gamma(a);
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

// Continued fraction for I_y(a, b), good for y < (a + 1) / (a + b + 2).
double beta_fraction(double a, double b, double y) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * y / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * y / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * y / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

// Returns {I_y(a,b), 1 - I_y(a,b)}, each computed without cancellation on
// the side where it is small.
std::pair<double, double> beta_both_tails(double a, double b, double y) {
  require_positive(a, "beta parameter a");
  require_positive(b, "beta parameter b");
  if (!(y >= 0.0 && y <= 1.0)) {
    throw DomainError("beta argument must lie in [0, 1]");
  }
  if (y == 0.0) return {0.0, 1.0};
  if (y == 1.0) return {1.0, 0.0};
  const double log_front = a * std::log(y) + b * std::log1p(-y) +
                           specfun::log_gamma(a + b) - specfun::log_gamma(a) -
                           specfun::log_gamma(b);
  const double front = std::exp(log_front);
  if (y < (a + 1.0) / (a + b + 2.0)) {
    const double lower = front * beta_fraction(a, b, y) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = front * beta_fraction(b, a, 1.0 - y) / b;
  return {1.0 - upper, upper};
}

// Returns {P, Q}.
std::pair<double, double> gamma_both_tails(double a, double x) {
  require_positive(a, "gamma shape");
  if (!(x >= 0.0) || std::isnan(x)) {
    throw DomainError("incomplete gamma argument must be non-negative");
  }
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (x < a + 1.0) {
    const double p = std::exp(log_lower_series(a, x));
    return {p, 1.0 - p};
  }
  const double q = std::exp(log_upper_fraction(a, x));
  return {1.0 - q, q};
}

}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("probability outside [0, 1]: " + std::to_string(value));
  }
}

Probability Probability::complement() const { return Probability(1.0 - value_); }

namespace specfun {

double log_gamma(double x) {
  require_positive(x, "log_gamma argument");
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);  // std::lgamma writes the global signgam
#else
  return std::lgamma(x);
#endif
}

long double log_gamma(long double x) {
  if (!(x > 0.0L) || !std::isfinite(x)) {
    throw DomainError("log_gamma argument must be positive and finite");
  }
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double gamma_p(double a, double x) { return gamma_both_tails(a, x).first; }

double gamma_q(double a, double x) { return gamma_both_tails(a, x).second; }

double log_gamma_p(double a, double x) {
  require_positive(a, "gamma shape");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma argument must be non-negative");
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x < a + 1.0) return log_lower_series(a, x);
  return std::log1p(-std::exp(log_upper_fraction(a, x)));
}

double beta_inc(double a, double b, double y) { return beta_both_tails(a, b, y).first; }

double beta_inc_upper(double a, double b, double y) {
  return beta_both_tails(a, b, y).second;
}

}  // namespace specfun

Probability chi2_upper(double nu, double y) {
  require_positive(nu, "degrees of freedom");
  if (!(y >= 0.0)) throw DomainError("chi-square argument must be non-negative");
  return Probability(clamp_unit(specfun::gamma_q(0.5 * nu, 0.5 * y)));
}

Probability chi2_lower(double nu, double y) {
  require_positive(nu, "degrees of freedom");
  if (!(y >= 0.0)) throw DomainError("chi-square argument must be non-negative");
  return Probability(clamp_unit(specfun::gamma_p(0.5 * nu, 0.5 * y)));
}

Probability beta_upper(double a, double b, double y) {
  return Probability(clamp_unit(specfun::beta_inc_upper(a, b, y)));
}

}  // namespace skewtail
