#include "globenv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace globenv {

namespace {

using nlohmann::json;

std::string where(std::string_view source, std::size_t line, std::size_t column) {
    return std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(column) + ": ";
}

std::string strip(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    s = s.substr(a, b - a);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.push_back(strip(std::string_view(line).substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
};

Table read_table(std::istream& in, std::string_view source, bool allow_short_rows) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (t.header.empty()) {
            if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
                cells = split_line(line.substr(3));
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size() && !(allow_short_rows && cells.size() < t.header.size()))
            throw Error(ErrorCode::ParseError, where(source, lineno, cells.size()) + "expected " +
                                                   std::to_string(t.header.size()) + " fields, found " +
                                                   std::to_string(cells.size()));
        cells.resize(t.header.size());
        t.rows.push_back(std::move(cells));
        t.lines.push_back(lineno);
    }
    if (t.header.empty()) throw Error(ErrorCode::HeaderError, std::string(source) + ": empty file");
    return t;
}

double number_at(const Table& t, std::size_t row, std::size_t col, std::string_view source) {
    double v = 0.0;
    if (!parse_number(t.rows[row][col], v))
        throw Error(ErrorCode::ParseError, where(source, t.lines[row], col + 1) + "not a number: '" +
                                               t.rows[row][col] + "'");
    return v;
}

bool numbered(const std::string& name, std::string_view prefix, std::size_t expected) {
    return name == std::string(prefix) + std::to_string(expected);
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

json optional_p(const std::optional<double>& p) { return p ? json(*p) : json(nullptr); }

void add_p_interval(json& out, const std::optional<PInterval>& p) {
    if (p) out["p_interval"] = {p->liberal, p->conservative};
}

json index_json(const std::vector<std::size_t>& idx) {
    json out = json::array();
    for (std::size_t i : idx) out.push_back(i + 1);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CurveSet read_curve_set_csv(std::istream& in, std::string_view source) {
    const Table t = read_table(in, source, false);
    const std::vector<std::string>& h = t.header;
    std::size_t first_curve = 0;
    bool two_d = false;
    if (!h.empty() && h[0] == "r") {
        first_curve = 1;
    } else if (h.size() >= 4 && h[0] == "x" && h[1] == "y" && h[2] == "width" && h[3] == "height") {
        first_curve = 4;
        two_d = true;
    } else if (!h.empty() && h[0] == "x") {
        throw Error(ErrorCode::HeaderError, std::string(source) + ": 2D header must start with x,y,width,height");
    } else {
        throw Error(ErrorCode::HeaderError, std::string(source) + ": header must start with r or x,y,width,height");
    }
    std::size_t obs = 0, sim = 0;
    for (std::size_t c = first_curve; c < h.size(); ++c) {
        if (sim == 0 && numbered(h[c], "obs_", obs + 1))
            ++obs;
        else if (numbered(h[c], "sim_", sim + 1))
            ++sim;
        else
            throw Error(ErrorCode::HeaderError, where(source, 1, c + 1) + "unexpected column '" + h[c] +
                                                    "' (expected obs_" + std::to_string(obs + 1) + " or sim_" +
                                                    std::to_string(sim + 1) + ")");
    }
    if (t.rows.empty()) throw Error(ErrorCode::ParseError, std::string(source) + ": no data rows");

    const std::size_t d = t.rows.size(), s = obs + sim;
    Matrix values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d));
    std::vector<double> r;
    std::vector<Pixel> pixels;
    for (std::size_t k = 0; k < d; ++k) {
        if (two_d)
            pixels.push_back({number_at(t, k, 0, source), number_at(t, k, 1, source), number_at(t, k, 2, source),
                              number_at(t, k, 3, source)});
        else
            r.push_back(number_at(t, k, 0, source));
        for (std::size_t i = 0; i < s; ++i)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = number_at(t, k, first_curve + i, source);
    }
    ArgGrid grid = two_d ? ArgGrid::two_d(std::move(pixels)) : ArgGrid::one_d(std::move(r));
    return CurveSet(std::move(grid), std::move(values), obs);
}

CurveSet read_curve_set_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_curve_set_csv(in, path.string());
}

void write_curve_set_csv(std::ostream& out, const CurveSet& set) {
    const ArgGrid& grid = set.grid();
    out << (grid.is_2d() ? "x,y,width,height" : "r");
    for (std::size_t i = 0; i < set.curves(); ++i)
        out << ',' << (i < set.obs_count() ? "obs_" + std::to_string(i + 1)
                                           : "sim_" + std::to_string(i - set.obs_count() + 1));
    out << '\n';
    for (std::size_t k = 0; k < set.dim(); ++k) {
        if (grid.is_2d()) {
            const Pixel& p = grid.pixels()[k];
            out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.width) << ','
                << format_double(p.height);
        } else if (grid.kind() == ArgGrid::Kind::OneD && !grid.values().empty()) {
            out << format_double(grid.values()[k]);
        } else {
            out << k + 1;
        }
        for (std::size_t i = 0; i < set.curves(); ++i) out << ',' << format_double(set(i, k));
        out << '\n';
    }
}

void write_curve_set_csv(const std::filesystem::path& path, const CurveSet& set) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_curve_set_csv(out, set);
}

FactorTable read_factor_csv(std::istream& in, const std::set<std::string>& categorical, std::string_view source) {
    const Table t = read_table(in, source, false);
    FactorTable table(t.rows.size());
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const std::string& name = t.header[c];
        if (name.empty()) throw Error(ErrorCode::HeaderError, where(source, 1, c + 1) + "empty column name");
        std::vector<std::string> cells;
        bool numeric = true;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            if (t.rows[i][c].empty())
                throw Error(ErrorCode::ParseError, where(source, t.lines[i], c + 1) + "missing value");
            double v = 0.0;
            numeric = numeric && parse_number(t.rows[i][c], v);
            cells.push_back(t.rows[i][c]);
        }
        if (categorical.count(name) || !numeric) {
            table.add_categorical(name, Grouping::from_strings(cells));
        } else {
            std::vector<double> values;
            for (std::size_t i = 0; i < t.rows.size(); ++i) values.push_back(number_at(t, i, c, source));
            table.add_continuous(name, std::move(values));
        }
    }
    return table;
}

FactorTable read_factor_csv(const std::filesystem::path& path, const std::set<std::string>& categorical) {
    std::ifstream in = open_in(path);
    return read_factor_csv(in, categorical, path.string());
}

Samples read_samples_csv(std::istream& in, std::string_view source) {
    const Table t = read_table(in, source, true);
    Samples out;
    out.names = t.header;
    out.values.resize(t.header.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t c = 0; c < t.header.size(); ++c)
            if (!t.rows[i][c].empty()) out.values[c].push_back(number_at(t, i, c, source));
    return out;
}

Samples read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_samples_csv(in, path.string());
}

json grid_to_json(const ArgGrid& grid) {
    if (!grid.is_2d()) return json(grid.values());
    json x = json::array(), y = json::array(), w = json::array(), h = json::array();
    for (const Pixel& p : grid.pixels()) {
        x.push_back(p.x);
        y.push_back(p.y);
        w.push_back(p.width);
        h.push_back(p.height);
    }
    return {{"x", x}, {"y", y}, {"width", w}, {"height", h}};
}

json to_json(const MeasureResult& m) { return vector_json(m.values); }

json to_json(const GlobalEnvelope& env) {
    json out;
    out["type"] = std::string(to_string(env.type));
    out["alternative"] = std::string(to_string(env.alternative));
    out["alpha"] = env.alpha;
    out["critical"] = env.critical;
    out["p"] = optional_p(env.p);
    add_p_interval(out, env.p_interval);
    out["grid"] = grid_to_json(env.grid);
    out["central"] = vector_json(env.central);
    out["lower"] = vector_json(env.lower);
    out["upper"] = vector_json(env.upper);
    out["lower_informative"] = env.lower_informative;
    out["upper_informative"] = env.upper_informative;
    out["measures"] = to_json(env.measures);
    out["mask"] = env.mask;
    out["warnings"] = env.warnings;
    return out;
}

json to_json(const CombinedEnvelope& env) {
    json out;
    out["mode"] = env.mode == CombineMode::OneStep ? "one-step" : "two-step";
    out["alpha"] = env.alpha;
    out["critical"] = env.critical;
    out["p"] = optional_p(env.p);
    add_p_interval(out, env.p_interval);
    out["joint_measures"] = to_json(env.joint);
    out["components"] = json::array();
    for (const GlobalEnvelope& c : env.components) out["components"].push_back(to_json(c));
    out["warnings"] = env.warnings;
    return out;
}

json to_json(const FTestResult& result) {
    json out;
    out["labels"] = result.labels;
    out["p"] = result.p();
    out["envelope"] = to_json(result.envelope);
    out["observed"] = json::array();
    for (const CurveSet& set : result.statistics) out["observed"].push_back(vector_json(set.curve(0).transpose()));
    out["masks"] = result.masks;
    if (result.sigma2) out["sigma2"] = vector_json(*result.sigma2);
    if (!result.degenerate.empty()) out["degenerate"] = result.degenerate;
    return out;
}

json to_json(const FBoxplotResult& result) {
    json out;
    out["factor"] = result.factor;
    out["central"] = to_json(result.central);
    out["whisker_lower"] = json::array();
    out["whisker_upper"] = json::array();
    for (std::size_t g = 0; g < result.whisker_lower.size(); ++g) {
        out["whisker_lower"].push_back(vector_json(result.whisker_lower[g]));
        out["whisker_upper"].push_back(vector_json(result.whisker_upper[g]));
    }
    out["outliers"] = index_json(result.outlier_indices);
    return out;
}

json to_json(const AdjustedResult& result) {
    json out;
    out["p_adj"] = result.p_adj;
    out["p_alpha"] = result.p_alpha;
    out["stage_p"] = result.stage_pvalues;
    out["envelope"] = to_json(result.envelope);
    return out;
}

json ordering_to_json(const MeasureResult& m) {
    json out;
    out["type"] = std::string(to_string(m.type));
    out["alternative"] = std::string(to_string(m.alternative));
    out["order"] = index_json(extremeness_order(m));
    out["measures"] = to_json(m);
    out["warnings"] = m.warnings;
    return out;
}

}  // namespace globenv
