#pragma once

// File formats: score-sheet CSV, raw skew-matrix text, JSON / text reports
// and the SVG residual plot.

#include <istream>
#include <string>
#include <vector>

#include "json.hpp"
#include "skewtail/paired.hpp"

namespace skewtail::io {

/// Score-sheet CSV: a header row "<corner>,<name_1>,...,<name_m>", then one
/// row per object "<name_i>,<r_i1>,...,<r_im>" with "-" on the diagonal.
/// Row names must repeat the header names in order. Throws DataError with
/// 1-based line / column on any problem; the sheet is validated against
/// n_games.
ScoreSheet read_score_sheet(std::istream& in, int n_games);

/// Whitespace-separated m x m reals, skew-symmetric within 1e-9.
SkewObservations read_raw_matrix(std::istream& in);

/// Default labels "1".."m".
std::vector<std::string> default_names(int m);

nlohmann::json report_to_json(const TestReport& report, const std::vector<std::string>& names);
std::string report_to_text(const TestReport& report, const std::vector<std::string>& names);

/// Residual plot: one labeled <circle class="point"> per object, origin
/// axes and the deadlock triangle outlined.
std::string render_svg(const TestReport& report, const std::vector<std::string>& names);

/// Fixed-point rendering with `decimals` digits.
std::string fixed(double v, int decimals);

}  // namespace skewtail::io
