// skewtail: distributions of the largest singular value of skew-symmetric
// Gaussian matrices and subtractivity tests for paired comparisons.
//
// Exit codes: 0 success, 1 validation failure or internal error, 2 usage,
// 3 outside the exact-validity range, 4 data error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "skewtail/errors.hpp"
#include "skewtail/io.hpp"
#include "skewtail/mc.hpp"
#include "skewtail/paired.hpp"
#include "skewtail/rmtdist.hpp"

namespace {

using namespace skewtail;

enum Exit : int { kOk = 0, kFailed = 1, kUsage = 2, kValidity = 3, kData = 4 };

struct Common {
  std::string format = "text";
  std::string out;
  std::uint64_t seed = 20240601;
};

unsigned thread_cap() {
  const char* env = std::getenv("SKEWTAIL_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  return (end != env && *end == '\0' && v >= 1) ? static_cast<unsigned>(v) : 1;
}

// Writes to --out when given, else stdout.
void emit(const Common& common, const std::string& text) {
  if (common.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(common.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file " + common.out);
  file << text;
}

void add_common(CLI::App* cmd, Common& common, bool with_seed) {
  cmd->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--out", common.out, "Write output to this file instead of stdout");
  if (with_seed) cmd->add_option("--seed", common.seed, "Random seed");
}

// ---------------------------------------------------------------- dist

struct DistArgs {
  std::string kind = "cdf";
  int p = 0;
  double x = 0.0;
};

int run_dist(const DistArgs& a, const Common& common) {
  double value = 0.0;
  std::string label;
  try {
    if (a.kind == "cdf") {
      value = largest_sv_cdf(a.p, a.x);
      label = "P(sigma1 < x)";
    } else if (a.kind == "tail") {
      value = largest_sv_upper(a.p, a.x);
      label = "P(sigma1 > x)";
    } else {
      value = standardized_sv_upper(a.p, a.x);
      label = "P(sigma1/sqrt(sum sigma_i^2) > x)";
    }
  } catch (const ValidityError&) {
    std::cerr << "x = " << a.x
              << " is outside exact-validity range: the standardized tail is exact only for x >= "
                 "1/sqrt(2) = 0.70710678\n";
    return kValidity;
  }
  if (common.format == "json") {
    nlohmann::json j{{"kind", a.kind}, {"p", a.p}, {"x", a.x}, {"value", value},
                     {"rounded", io::fixed(value, 4)}};
    emit(common, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << label << " for p = " << a.p << ", x = " << a.x << ": " << std::setprecision(15) << value
       << " (" << io::fixed(value, 4) << ")\n";
    emit(common, os.str());
  }
  return kOk;
}

// ---------------------------------------------------------------- table1

std::string table_cell(double prob) { return prob < 5e-5 ? "<0.0001" : io::fixed(prob, 4); }

int run_table1(int pmin, int pmax, const Common& common) {
  if (pmin < 4 || pmax > 18 || pmin > pmax) {
    std::cerr << "table1 requires 4 <= pmin <= pmax <= 18\n";
    return kUsage;
  }
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream os;
  os << "Upper probabilities at the critical point 1/sqrt(2)\n";
  os << "  p   prob.\n";
  for (int p = pmin; p <= pmax; ++p) {
    const double prob = standardized_sv_upper(p, kStandardizedThreshold);
    os << std::setw(3) << p << "   " << table_cell(prob) << "\n";
    rows.push_back({{"p", p}, {"prob", prob}, {"rendered", table_cell(prob)}});
  }
  emit(common, common.format == "json" ? nlohmann::json{{"table1", rows}}.dump(2) + "\n" : os.str());
  return kOk;
}

// ---------------------------------------------------------------- validate

// x with P(sigma1 > x) = target, by bisection.
double sigma1_quantile(int p, double target) {
  double lo = 0.0;
  double hi = 4.0 * std::sqrt(static_cast<double>(p)) + 8.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (largest_sv_upper(p, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int run_validate(int p, std::size_t samples, const Common& common) {
  if (p < 2) {
    std::cerr << "validate requires p >= 2\n";
    return kUsage;
  }
  if (samples < 1000) {
    std::cerr << "validate requires --samples >= 1000\n";
    return kUsage;
  }
  constexpr double kKsThreshold = 0.005;
  constexpr double kZThreshold = 3.0;

  const auto sims = simulate_spectra(p, samples, common.seed, thread_cap());
  std::vector<double> sigma1(samples), standardized(samples);
  double min_share = 1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    sigma1[i] = sims[i].sigma1;
    standardized[i] = sims[i].standardized;
    const double s1 = sims[i].sigma1 * sims[i].sigma1;
    const double s2 = sims[i].sigma2 * sims[i].sigma2;
    min_share = std::min(min_share, s1 / (s1 + s2));
  }

  bool all_pass = true;
  nlohmann::json j{{"p", p}, {"samples", samples}, {"seed", common.seed}};
  std::ostringstream os;
  os << "Monte-Carlo validation: p = " << p << ", samples = " << samples << ", seed = " << common.seed
     << "\n";

  // Tail checks first: the KS helper sorts its input.
  auto tail_row = [&](const char* what, double x, double exact, std::span<const double> data,
                      nlohmann::json& arr) {
    const double emp = empirical_upper(data, x);
    const double se = binomial_se(exact, data.size());
    const double z = se > 0.0 ? std::fabs(emp - exact) / se : (emp == exact ? 0.0 : INFINITY);
    const bool pass = z <= kZThreshold;
    all_pass = all_pass && pass;
    os << "  " << what << " x = " << io::fixed(x, 4) << "  exact " << io::fixed(exact, 6)
       << "  empirical " << io::fixed(emp, 6) << "  s.e. " << io::fixed(se, 6) << "  |z| "
       << io::fixed(z, 2) << "  " << (pass ? "PASS" : "FAIL") << "\n";
    arr.push_back({{"x", x}, {"exact", exact}, {"empirical", emp}, {"se", se}, {"z", z}, {"pass", pass}});
  };

  os << "sigma1 upper tail (within " << kZThreshold << " binomial s.e.)\n";
  j["sigma1_tail"] = nlohmann::json::array();
  for (double target : {0.5, 0.1, 0.01}) {
    const double x = sigma1_quantile(p, target);
    tail_row("sigma1", x, largest_sv_upper(p, x), sigma1, j["sigma1_tail"]);
  }
  if (p >= 4) {
    os << "standardized upper tail (within " << kZThreshold << " binomial s.e.)\n";
    j["standardized_tail"] = nlohmann::json::array();
    for (double x : {0.75, 0.8, 0.9}) {
      tail_row("standardized", x, standardized_sv_upper(p, x), standardized, j["standardized_tail"]);
    }
  }
  if (p == 4 || p == 5) {
    const bool pass = min_share > 0.5;
    all_pass = all_pass && pass;
    os << "min sigma1^2/(sigma1^2+sigma2^2) = " << io::fixed(min_share, 6) << " (> 0.5 required) "
       << (pass ? "PASS" : "FAIL") << "\n";
    j["min_top_share"] = {{"value", min_share}, {"pass", pass}};
  }
  const double ks = ks_distance(sigma1, [p](double x) { return largest_sv_cdf(p, x).value(); });
  const bool ks_pass = ks < kKsThreshold;
  all_pass = all_pass && ks_pass;
  os << "sigma1 KS distance vs exact CDF = " << io::fixed(ks, 6) << " (< " << kKsThreshold << ") "
     << (ks_pass ? "PASS" : "FAIL") << "\n";
  j["ks"] = {{"distance", ks}, {"threshold", kKsThreshold}, {"pass", ks_pass}};

  os << "overall: " << (all_pass ? "PASS" : "FAIL") << "\n";
  j["pass"] = all_pass;
  emit(common, common.format == "json" ? j.dump(2) + "\n" : os.str());
  return all_pass ? kOk : kFailed;
}

// ---------------------------------------------------------------- analyze / plot

struct AnalyzeArgs {
  std::string input;
  std::optional<int> n_games;
  bool raw = false;
  double sigma2 = 1.0;
  std::string plot;
};

struct Loaded {
  SkewObservations obs;
  std::vector<std::string> names;
};

Loaded load_input(const AnalyzeArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw DataError("cannot open input file " + a.input);
  Loaded loaded;
  if (a.raw) {
    loaded.obs = io::read_raw_matrix(in);
    loaded.names = io::default_names(loaded.obs.size());
    return loaded;
  }
  if (!a.n_games) throw CLI::ValidationError("--n-games", "is required for score-sheet input");
  const auto sheet = io::read_score_sheet(in, *a.n_games);
  for (const auto& [i, j] : boundary_pairs(sheet)) {
    std::cerr << "warning: " << sheet.names[i] << " vs " << sheet.names[j]
              << " is a sweep; the normal approximation is poor there\n";
  }
  loaded.obs = variance_stabilize(sheet);
  loaded.names = sheet.names;
  return loaded;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file " + path);
  file << text;
}

int run_analyze(const AnalyzeArgs& a, const Common& common) {
  if (!(a.sigma2 > 0.0)) throw CLI::ValidationError("--sigma2", "must be positive");
  const auto loaded = load_input(a);
  if (loaded.obs.size() < 5) throw DataError("analysis needs at least 5 objects");
  const auto report = analyze(loaded.obs, a.sigma2);
  emit(common, common.format == "json" ? io::report_to_json(report, loaded.names).dump(2) + "\n"
                                       : io::report_to_text(report, loaded.names));
  if (!a.plot.empty()) write_file(a.plot, io::render_svg(report, loaded.names));
  return kOk;
}

int run_plot(const AnalyzeArgs& a, const Common& common) {
  const auto loaded = load_input(a);
  if (loaded.obs.size() < 5) throw DataError("analysis needs at least 5 objects");
  const auto report = analyze(loaded.obs, a.sigma2);
  if (report.embedding.empty()) throw MultiplicityError("top singular pair is degenerate; nothing to plot");
  emit(common, io::render_svg(report, loaded.names));
  return kOk;
}

void add_input_options(CLI::App* cmd, AnalyzeArgs& a) {
  cmd->add_option("--input,input", a.input, "Score-sheet CSV or raw matrix file")->required();
  cmd->add_option("--n-games", a.n_games, "Games per pair (score sheets)")->check(CLI::PositiveNumber);
  cmd->add_flag("--raw", a.raw, "Input is a whitespace-separated skew matrix of stabilized scores");
  cmd->add_option("--sigma2", a.sigma2, "Known error variance")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Largest-singular-value laws for skew-symmetric Gaussian matrices and paired comparisons"};
  app.require_subcommand(1);

  Common common;
  DistArgs dist_args;
  auto* dist = app.add_subcommand("dist", "Evaluate a distribution function");
  dist->add_option("--kind", dist_args.kind, "cdf | tail | standardized")
      ->check(CLI::IsMember({"cdf", "tail", "standardized"}));
  dist->add_option("--p", dist_args.p, "Matrix order")->required();
  dist->add_option("--x", dist_args.x, "Argument")->required();
  add_common(dist, common, false);

  int pmin = 4, pmax = 18;
  auto* table = app.add_subcommand("table1", "Standardized upper probabilities at 1/sqrt(2)");
  table->add_option("--pmin", pmin, "Smallest p");
  table->add_option("--pmax", pmax, "Largest p");
  add_common(table, common, false);

  int vp = 6;
  std::size_t vsamples = 200000;
  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of the analytic laws");
  validate->add_option("--p", vp, "Matrix order");
  validate->add_option("--samples", vsamples, "Number of simulated matrices");
  add_common(validate, common, true);

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Subtractivity tests for a paired-comparison data set");
  add_input_options(analyze_cmd, analyze_args);
  analyze_cmd->add_option("--plot", analyze_args.plot, "Also write the residual plot (SVG) here");
  add_common(analyze_cmd, common, true);

  AnalyzeArgs plot_args;
  auto* plot = app.add_subcommand("plot", "Write the residual plot (SVG)");
  add_input_options(plot, plot_args);
  add_common(plot, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*dist) return run_dist(dist_args, common);
    if (*table) return run_table1(pmin, pmax, common);
    if (*validate) return run_validate(vp, vsamples, common);
    if (*analyze_cmd) return run_analyze(analyze_args, common);
    if (*plot) return run_plot(plot_args, common);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error";
    if (e.row() > 0) std::cerr << " at line " << e.row();
    if (e.column() > 0) std::cerr << ", column " << e.column();
    std::cerr << ": " << e.what() << "\n";
    return kData;
  } catch (const ValidityError& e) {
    std::cerr << "outside exact-validity range: " << e.what() << "\n";
    return kValidity;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const MultiplicityError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
