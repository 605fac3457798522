#ifndef GLOBENV_IO_HPP
#define GLOBENV_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "globenv/applications.hpp"
#include "globenv/composite.hpp"

namespace globenv {

/// Curve columns in the layout `r,obs_1..obs_m,sim_1..sim_n` (1D) or
/// `x,y,width,height,obs_1..,sim_1..` (2D); one row per grid position.
CurveSet read_curve_set_csv(std::istream& in, std::string_view source = "<input>");
CurveSet read_curve_set_csv(const std::filesystem::path& path);
void write_curve_set_csv(std::ostream& out, const CurveSet& set);
void write_curve_set_csv(const std::filesystem::path& path, const CurveSet& set);

/// One row per subject. Columns named in `categorical`, and any column with
/// a non-numeric entry, become categorical factors.
FactorTable read_factor_csv(std::istream& in, const std::set<std::string>& categorical,
                            std::string_view source = "<input>");
FactorTable read_factor_csv(const std::filesystem::path& path, const std::set<std::string>& categorical);

struct Samples {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
};

/// One column per sample; blank cells are skipped so columns may differ in length.
Samples read_samples_csv(std::istream& in, std::string_view source = "<input>");
Samples read_samples_csv(const std::filesystem::path& path);

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

nlohmann::json grid_to_json(const ArgGrid& grid);
nlohmann::json to_json(const MeasureResult& m);
nlohmann::json to_json(const GlobalEnvelope& env);
nlohmann::json to_json(const CombinedEnvelope& env);
nlohmann::json to_json(const FTestResult& result);
nlohmann::json to_json(const FBoxplotResult& result);
nlohmann::json to_json(const AdjustedResult& result);
/// 1-based curve indices from the most to the least extreme with their measure values.
nlohmann::json ordering_to_json(const MeasureResult& m);

}  // namespace globenv

#endif
