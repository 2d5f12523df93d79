#include "skewtail/rmtdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "skewtail/errors.hpp"
#include "skewtail/kernels.hpp"

namespace skewtail {

namespace {

using specfun::log_gamma;

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLnPi = 1.14472988584940017414;  // ln(pi)
constexpr double kUnderflowLog = -690.7755278982137;  // ln(1e-300)

void require_tube_order(int p) {
  if (p < 4) throw DomainError("tube formula requires p >= 4, got p = " + std::to_string(p));
}

// ln P(sigma_1 < x) pieces: ln of the unnormalized incomplete integral
//   int_0^{x^2} phi^{nu/2 - 1} e^{-phi/2} dphi = 2^{nu/2} Gamma(nu/2) P(nu/2, x^2/2).
double log_incomplete_integral(int nu, double x) {
  const double a = 0.5 * nu;
  return a * kLn2 + log_gamma(a) + specfun::log_gamma_p(a, 0.5 * x * x);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

SpectrumLaw SpectrumLaw::of(int p) {
  if (p < 2) throw DomainError("matrix order p must be >= 2, got " + std::to_string(p));
  SpectrumLaw law;
  law.p = p;
  law.t = p / 2;
  law.eps = p - 2 * law.t;
  law.n = p * (p - 1) / 2;
  law.d = 2 * (p - 2);
  return law;
}

double log_volume_U(int p) {
  if (p < 1) throw DomainError("volume_U requires p >= 1");
  const int t = p / 2;
  double log_vol = t * kLn2 + 0.25 * p * (p - 1) * kLnPi;
  for (int i = (p % 2 == 0 ? 1 : 2); i <= p; ++i) log_vol -= log_gamma(0.5 * i);
  return log_vol;
}

double volume_U(int p) { return std::exp(log_volume_U(p)); }

NormalizingConstants normalizing_constants(int p) {
  const auto law = SpectrumLaw::of(p);
  NormalizingConstants k;
  k.log_c = log_volume_U(p) - 0.25 * p * (p - 1) * (kLn2 + kLnPi);
  k.log_d = k.log_c - law.t * kLn2;
  k.c = std::exp(k.log_c);
  k.d = std::exp(k.log_d);
  return k;
}

double joint_density(std::span<const double> sigma, int p) {
  const auto law = SpectrumLaw::of(p);
  if (static_cast<int>(sigma.size()) != law.t) {
    throw DomainError("joint_density expects " + std::to_string(law.t) + " singular values");
  }
  for (double s : sigma) {
    if (!std::isfinite(s) || s < 0.0) throw DomainError("singular values must be finite and >= 0");
  }
  double log_density = normalizing_constants(p).log_c;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double s = sigma[i];
    log_density -= 0.5 * s * s;
    if (law.eps == 1) {
      if (s == 0.0) return 0.0;
      log_density += 2.0 * std::log(s);
    }
    for (std::size_t j = i + 1; j < sigma.size(); ++j) {
      const double gap = s * s - sigma[j] * sigma[j];
      if (gap == 0.0) return 0.0;
      log_density += 2.0 * std::log(std::fabs(gap));
    }
  }
  return std::exp(log_density);
}

namespace {

HankelGram build_gram(int p) {
  const auto law = SpectrumLaw::of(p);
  const int t = law.t;
  const long double eps = law.eps;

  // The inverse has entries of alternating sign and magnitude up to ~1e6 at
  // p = 18; work in extended precision and round once at the end.
  auto lg = [](long double v) { return log_gamma(v); };
  std::vector<long double> log_den(t + 1);
  for (int i = 1; i <= t; ++i) log_den[i] = lg(t + 1 - i) + lg(t + eps + 0.5L - i);

  HankelGram hg;
  hg.p = p;
  hg.t = t;
  hg.g.resize(t, t);
  hg.ginv.resize(t, t);
  hg.products.resize(t, t);
  std::vector<long double> weights(2 * t - 1, 0.0L);
  for (int i = 1; i <= t; ++i) {
    for (int j = 1; j <= t; ++j) {
      const long double log_g = lg(static_cast<long double>(p - i - j) + 0.5L);
      long double sum = 0.0L;
      for (int k = 1; k <= std::min(i, j); ++k) {
        sum += std::exp(lg(t + 1 - k) + lg(t + eps + 0.5L - k) - lg(i + 1 - k) -
                        lg(j + 1 - k) - log_den[i] - log_den[j]);
      }
      const long double sign = (i + j) % 2 == 0 ? 1.0L : -1.0L;
      const long double inv = sign * sum;
      const long double prod = sign * std::exp(std::log(sum) + log_g);
      hg.g(i - 1, j - 1) = static_cast<double>(std::exp(log_g));
      hg.ginv(i - 1, j - 1) = static_cast<double>(inv);
      hg.products(i - 1, j - 1) = static_cast<double>(prod);
      weights[i + j - 2] += prod;
    }
  }
  hg.weights.assign(weights.begin(), weights.end());
  return hg;
}

// Immutable per-p memo; entries are built once and never modified.
const HankelGram& cached_gram(int p) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const HankelGram>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[p];
  if (!slot) slot = std::make_unique<const HankelGram>(build_gram(p));
  return *slot;
}

}  // namespace

namespace {

struct CdfPair {
  double cdf = 0.0;
  double tail = 1.0;
};

// Direct evaluation of d_p det(L(x)). Accurate while the CDF is not close to 1.
double direct_cdf(const SpectrumLaw& law, double x) {
  const int p = law.p;
  const int t = law.t;
  Eigen::MatrixXd log_l(t, t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      const int nu = 2 * p - 2 * (i + 1) - 2 * (j + 1) + 1;
      log_l(i, j) = log_incomplete_integral(nu, x);
    }
  }
  if (log_l.maxCoeff() < kUnderflowLog) return 0.0;

  // Row equilibration: divide row i by its largest entry, keep the log scale.
  double log_scale = normalizing_constants(p).log_d;
  Eigen::MatrixXd scaled(t, t);
  for (int i = 0; i < t; ++i) {
    const double row_max = log_l.row(i).maxCoeff();
    log_scale += row_max;
    scaled.row(i) = (log_l.row(i).array() - row_max).exp().matrix();
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(scaled);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  double sign = lu.permutationP().determinant();
  double log_abs_det = 0.0;
  for (int i = 0; i < t; ++i) {
    const double u = packed(i, i);
    if (u == 0.0) return 0.0;
    if (u < 0.0) sign = -sign;
    log_abs_det += std::log(std::fabs(u));
  }
  return sign * std::exp(log_scale + log_abs_det);
}

// Complementary evaluation. With L = L_inf - U and d_p det(L_inf) = 1,
// the CDF equals det(I - N), N = G^{-1} (G o Q), Q_ij the regularized upper
// incomplete gamma. Small N: ln det(I - N) = -sum_k tr(N^k) / k keeps the
// tail accurate in relative terms.
CdfPair complementary_cdf(const SpectrumLaw& law, double x) {
  const int p = law.p;
  const int t = law.t;
  const HankelGram& gram = cached_gram(p);
  Eigen::MatrixXd weighted(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      weighted(i, j) = gram.g(i, j) * specfun::gamma_q(p - (i + 1) - (j + 1) + 0.5, 0.5 * x * x);
  const Eigen::MatrixXd n = gram.ginv * weighted;

  CdfPair out;
  if (n.cwiseAbs().rowwise().sum().maxCoeff() < 0.5) {
    double log_det = 0.0;
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(t, t);
    for (int k = 1; k <= 200; ++k) {
      power = power * n;
      const double term = power.trace() / k;
      log_det -= term;
      if (std::fabs(term) <= 1e-18 * std::fabs(log_det)) break;
    }
    out.tail = -std::expm1(log_det);
    out.cdf = std::exp(log_det);
    return out;
  }
  out.cdf = (Eigen::MatrixXd::Identity(t, t) - n).determinant();
  out.tail = 1.0 - out.cdf;
  return out;
}

CdfPair cdf_pair(int p, double x) {
  const auto law = SpectrumLaw::of(p);
  if (!(x >= 0.0)) throw DomainError("largest_sv_cdf requires x >= 0");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};

  CdfPair out;
  const double direct = direct_cdf(law, x);
  if (direct < 0.5) {
    out = {direct, 1.0 - direct};
  } else {
    out = complementary_cdf(law, x);
  }
  if (out.cdf < -1e-12 || out.cdf > 1.0 + 1e-10 || std::isnan(out.cdf) || out.tail < -1e-12) {
    throw NumericalError("largest_sv_cdf out of range: " + std::to_string(out.cdf));
  }
  out.cdf = std::clamp(out.cdf, 0.0, 1.0);
  out.tail = std::clamp(out.tail, 0.0, 1.0);
  return out;
}

}  // namespace

Probability largest_sv_cdf(int p, double x) { return Probability(cdf_pair(p, x).cdf); }

Probability largest_sv_upper(int p, double x) { return Probability(cdf_pair(p, x).tail); }

double HankelGram::trace_identity() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

HankelGram hankel_gram(int p) {
  require_tube_order(p);
  return cached_gram(p);
}

HankelFactorization hankel_inverse_oracle(double delta, int t) {
  if (!(delta > -1.0)) throw DomainError("hankel_inverse_oracle requires delta > -1");
  if (t < 1) throw DomainError("hankel_inverse_oracle requires t >= 1");

  HankelFactorization f;
  f.delta = delta;
  f.t = t;
  f.g.resize(t, t);
  for (int i = 1; i <= t; ++i)
    for (int j = 1; j <= t; ++j) f.g(i - 1, j - 1) = std::exp(log_gamma(delta + 2 * t - i - j + 1));

  f.b = Eigen::MatrixXd::Identity(t, t);
  for (int k = 1; k <= t - 1; ++k) {
    Eigen::MatrixXd band = Eigen::MatrixXd::Identity(t, t);
    for (int i = 1; i <= t - k; ++i) band(i - 1, i) = -(delta + t - i);
    f.b = band * f.b;
  }

  f.tri = Eigen::MatrixXd::Zero(t, t);
  f.tri_inv = Eigen::MatrixXd::Zero(t, t);
  for (int i = 1; i <= t; ++i) {
    for (int j = 1; j <= i; ++j) {
      const double c = binomial(t - j, t - i);
      f.tri(i - 1, j - 1) = c;
      f.tri_inv(i - 1, j - 1) = (i + j) % 2 == 0 ? c : -c;
    }
  }

  f.dgam.resize(t);
  f.efac.resize(t);
  f.log_det = 0.0;
  for (int i = 1; i <= t; ++i) {
    const double log_dg = log_gamma(delta + t - i + 1);
    const double log_fact = log_gamma(static_cast<double>(t - i + 1));
    f.dgam(i - 1) = std::exp(log_dg);
    f.efac(i - 1) = std::round(std::exp(log_fact));
    f.log_det += log_dg + log_fact;
  }

  const Eigen::MatrixXd etd = f.efac.asDiagonal() * f.tri * f.dgam.asDiagonal();
  f.factorization_residual = (f.b * f.g - etd).cwiseAbs().maxCoeff() / etd.cwiseAbs().maxCoeff();

  f.ginv = f.dgam.cwiseInverse().asDiagonal() * f.tri_inv * f.efac.cwiseInverse().asDiagonal() * f.b;
  return f;
}

double largest_sv_tail_asymptotic(int p, double x) {
  require_tube_order(p);
  if (!(x > 0.0)) throw DomainError("largest_sv_tail_asymptotic requires x > 0");
  const auto& hg = cached_gram(p);
  double total = 0.0;
  for (std::size_t k = 0; k < hg.weights.size(); ++k) {
    const int nu = 2 * p - 3 - 2 * static_cast<int>(k);
    total += hg.weights[k] * chi2_upper(nu, x * x).value();
  }
  return total;
}

Probability standardized_sv_upper(int p, double x) {
  require_tube_order(p);
  if (std::isnan(x)) throw DomainError("standardized_sv_upper: x is NaN");
  if (x < kStandardizedThreshold - kThresholdSlack) {
    throw ValidityError("standardized tail is exact only for x >= 1/sqrt(2); got x = " +
                        std::to_string(x));
  }
  if (x > 1.0) throw DomainError("standardized statistic cannot exceed 1");

  const auto law = SpectrumLaw::of(p);
  const auto& hg = cached_gram(p);
  const double y = x * x;
  double total = 0.0;
  for (std::size_t k = 0; k < hg.weights.size(); ++k) {
    const int nu = 2 * p - 3 - 2 * static_cast<int>(k);
    total += hg.weights[k] * beta_upper(0.5 * nu, 0.5 * (law.n - nu), y).value();
  }
  if (total < -1e-10 || total > 1.0 + 1e-10) {
    throw NumericalError("standardized tail out of range: " + std::to_string(total));
  }
  return Probability(std::clamp(total, 0.0, 1.0));
}

double critical_radius_objective(const Mat2& r) {
  const double den = (1.0 - r.r11 * r.r22) + r.r12 * r.r21;
  if (std::fabs(den) < 1e-9) {
    throw ExcludedPointError("critical-radius objective undefined near SO(2)");
  }
  const double diff = r.r11 - r.r22;
  const double sum = r.r12 + r.r21;
  return 1.0 - (diff * diff + sum * sum) / (den * den);
}

CriticalRadiusSearch critical_radius_search(std::uint64_t count, std::uint64_t seed,
                                            double den_floor) {
  constexpr std::size_t kBatch = 4096;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> r11(kBatch), r12(kBatch), r21(kBatch), r22(kBatch), out(kBatch);

  CriticalRadiusSearch res;
  res.max_objective = -std::numeric_limits<double>::infinity();
  res.min_objective = std::numeric_limits<double>::infinity();
  std::uint64_t remaining = count;
  while (remaining > 0) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kBatch));
    for (std::size_t i = 0; i < n; ++i) {
      r11[i] = unif(rng);
      r12[i] = unif(rng);
      r21[i] = unif(rng);
      r22[i] = unif(rng);
    }
    const kernels::Mat2Batch batch{{r11.data(), n}, {r12.data(), n}, {r21.data(), n}, {r22.data(), n}};
    kernels::critical_radius_batch(batch, den_floor, {out.data(), n});
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(out[i])) {
        ++res.excluded;
        continue;
      }
      ++res.evaluated;
      if (out[i] > res.max_objective) {
        res.max_objective = out[i];
        res.argmax = {r11[i], r12[i], r21[i], r22[i]};
      }
      res.min_objective = std::min(res.min_objective, out[i]);
    }
    remaining -= n;
  }
  return res;
}

int euler_characteristic(int p) {
  require_tube_order(p);
  const auto& hg = cached_gram(p);
  const double chi = 2.0 * hg.trace_identity();
  if (std::fabs(chi - 2.0 * hg.t) >= 1e-8) {
    throw NumericalError("Gauss-Bonnet sum deviates from 2 floor(p/2): " + std::to_string(chi));
  }
  return static_cast<int>(std::lround(chi));
}

}  // namespace skewtail
