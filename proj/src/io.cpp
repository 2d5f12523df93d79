#include "skewtail/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "skewtail/errors.hpp"

namespace skewtail::io {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  for (;;) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string triple_label(const Deadlock& d) {
  return "(" + std::to_string(d.triple[0] + 1) + "," + std::to_string(d.triple[1] + 1) + "," +
         std::to_string(d.triple[2] + 1) + ")";
}

}  // namespace

std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

std::vector<std::string> default_names(int m) {
  std::vector<std::string> names;
  for (int i = 1; i <= m; ++i) names.push_back(std::to_string(i));
  return names;
}

ScoreSheet read_score_sheet(std::istream& in, int n_games) {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_csv(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw DataError("score sheet is empty");

  ScoreSheet sheet;
  sheet.n_games = n_games;
  const auto& header = rows.front();
  if (header.size() < 3) throw DataError("header needs a corner cell and at least two names", line_numbers[0]);
  sheet.names.assign(header.begin() + 1, header.end());
  const int m = static_cast<int>(sheet.names.size());
  if (static_cast<int>(rows.size()) - 1 != m) {
    throw DataError("expected " + std::to_string(m) + " data rows, found " +
                    std::to_string(rows.size() - 1));
  }
  sheet.wins = Eigen::MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const auto& row = rows[i + 1];
    const int ln = line_numbers[i + 1];
    if (static_cast<int>(row.size()) != m + 1) {
      throw DataError("expected " + std::to_string(m + 1) + " cells, found " +
                          std::to_string(row.size()),
                      ln);
    }
    if (row[0] != sheet.names[i]) {
      throw DataError("row name '" + row[0] + "' does not match header name '" + sheet.names[i] + "'",
                      ln, 1);
    }
    for (int j = 0; j < m; ++j) {
      const std::string& cell = row[j + 1];
      if (i == j) {
        if (cell != "-") throw DataError("diagonal cell must be '-'", ln, j + 2);
        continue;
      }
      int value = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError("cell '" + cell + "' is not an integer", ln, j + 2);
      }
      sheet.wins(i, j) = value;
    }
  }
  try {
    sheet.validate();
  } catch (const DataError& e) {
    // Map object indices to file positions (header is one line, names one column).
    const int row = e.row() > 0 ? line_numbers[e.row()] : 0;
    const int col = e.column() > 0 ? e.column() + 1 : 0;
    throw DataError(e.what(), row, col);
  }
  return sheet;
}

SkewObservations read_raw_matrix(std::istream& in) {
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw DataError("token '" + token + "' (entry " + std::to_string(values.size() + 1) +
                      ") is not a number");
    }
    values.push_back(v);
  }
  const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
  if (m < 2 || m * m != static_cast<Eigen::Index>(values.size())) {
    throw DataError("raw matrix must contain m*m numbers, found " + std::to_string(values.size()));
  }
  Eigen::MatrixXd y(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) y(i, j) = values[static_cast<std::size_t>(i * m + j)];
  return SkewObservations::from_matrix(y, 1e-9);
}

nlohmann::json report_to_json(const TestReport& r, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["m"] = r.m;
  j["sigma2"] = r.sigma2;
  j["chi2"] = {{"stat", r.chi2.stat}, {"df", r.chi2.df}, {"p", r.chi2.p.value()}};
  j["largest_sv"] = {{"stat", r.largest_sv.stat}, {"p", r.largest_sv.p.value()}};
  j["standardized"] = {{"stat", r.standardized.stat}};
  if (r.standardized.p) {
    j["standardized"]["p"] = r.standardized.p->value();
  } else {
    j["standardized"]["p"] = "outside_validity";
  }
  j["spectrum"] = r.spectrum.sigma;
  nlohmann::json triple = nlohmann::json::array();
  for (int k : r.deadlock.triple) triple.push_back(k + 1);
  j["deadlock"] = {{"triple", triple}, {"value", r.deadlock.value}};
  if (r.deadlock_area) j["deadlock"]["area_check"] = *r.deadlock_area;
  j["embedding"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.embedding.size(); ++i) {
    j["embedding"].push_back({{"name", names.at(i)}, {"x", r.embedding[i].x}, {"y", r.embedding[i].y}});
  }
  return j;
}

std::string report_to_text(const TestReport& r, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "Subtractivity tests (m = " << r.m << ", sigma2 = " << r.sigma2 << ")\n";
  os << "  chi-square        stat " << fixed(r.chi2.stat, 3) << "  df " << r.chi2.df
     << "  p-value " << fixed(r.chi2.p, 4) << "\n";
  os << "  largest sv        stat " << fixed(r.largest_sv.stat, 3) << "  p-value "
     << fixed(r.largest_sv.p, 4) << "\n";
  os << "  standardized sv   stat " << fixed(r.standardized.stat, 3) << "  p-value "
     << (r.standardized.p ? fixed(*r.standardized.p, 4)
                          : std::string("n/a (outside exact-validity range, stat < 1/sqrt(2))"))
     << "\n";
  os << "  singular values  ";
  for (double s : r.spectrum.sigma) os << " " << fixed(s, 3);
  os << "\n";
  const auto& t = r.deadlock.triple;
  os << "  max deadlock      " << triple_label(r.deadlock) << " " << names.at(t[0]) << " > "
     << names.at(t[1]) << " > " << names.at(t[2]) << "  value " << fixed(r.deadlock.value, 3)
     << "\n";
  if (r.deadlock_area) os << "  embedding 2S/sqrt(3) " << fixed(*r.deadlock_area, 3) << "\n";
  if (!r.embedding.empty()) {
    os << "Residual embedding (sqrt(s1) u, sqrt(s1) v)\n";
    for (std::size_t i = 0; i < r.embedding.size(); ++i) {
      os << "  " << std::left << std::setw(12) << names.at(i) << std::right << std::setw(9)
         << fixed(r.embedding[i].x, 3) << std::setw(9) << fixed(r.embedding[i].y, 3) << "\n";
    }
  }
  return os.str();
}

std::string render_svg(const TestReport& r, const std::vector<std::string>& names) {
  constexpr double kSize = 480.0;
  constexpr double kMargin = 60.0;
  double extent = 1e-9;
  for (const auto& p : r.embedding) extent = std::max({extent, std::fabs(p.x), std::fabs(p.y)});
  const double scale = (kSize / 2.0 - kMargin) / extent;
  const double c = kSize / 2.0;
  // Flip y so counterclockwise in the data is counterclockwise on screen.
  auto sx = [&](double x) { return fixed(c + scale * x, 2); };
  auto sy = [&](double y) { return fixed(c - scale * y, 2); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
     << "\" viewBox=\"0 0 " << kSize << " " << kSize << "\">\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "  <line class=\"axis\" x1=\"" << kMargin / 2 << "\" y1=\"" << c << "\" x2=\""
     << kSize - kMargin / 2 << "\" y2=\"" << c << "\" stroke=\"#888\"/>\n";
  os << "  <line class=\"axis\" x1=\"" << c << "\" y1=\"" << kMargin / 2 << "\" x2=\"" << c
     << "\" y2=\"" << kSize - kMargin / 2 << "\" stroke=\"#888\"/>\n";
  if (!r.embedding.empty()) {
    os << "  <polygon class=\"deadlock\" points=\"";
    for (int k = 0; k < 3; ++k) {
      const auto& p = r.embedding[r.deadlock.triple[k]];
      os << (k ? " " : "") << sx(p.x) << "," << sy(p.y);
    }
    os << "\" fill=\"#f4d03f\" fill-opacity=\"0.25\" stroke=\"#c0392b\"/>\n";
  }
  for (std::size_t i = 0; i < r.embedding.size(); ++i) {
    const auto& p = r.embedding[i];
    const std::string label = escape_xml(names.at(i));
    os << "  <g class=\"object\">\n";
    os << "    <circle class=\"point\" cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
       << "\" r=\"4\" fill=\"#2c3e50\"><title>" << label << "</title></circle>\n";
    os << "    <text x=\"" << fixed(c + scale * p.x + 6, 2) << "\" y=\"" << fixed(c - scale * p.y - 6, 2)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
    os << "  </g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace skewtail::io
