#include "fixtures.hpp"

#include "globenv/parallel.hpp"

namespace fixtures {

using namespace globenv;

CurveSet random_set(std::mt19937_64& rng, std::size_t s, std::size_t d, std::size_t obs, int levels) {
    Matrix v(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d));
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> integer(0, std::max(levels - 1, 0));
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index k = 0; k < v.cols(); ++k) v(i, k) = levels > 0 ? integer(rng) : normal(rng);
    std::vector<double> r(d);
    for (std::size_t k = 0; k < d; ++k) r[k] = static_cast<double>(k);
    return CurveSet(ArgGrid::one_d(r), std::move(v), obs);
}

CurveSet from_rows(const std::vector<std::vector<double>>& rows, std::size_t obs) {
    Matrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return CurveSet(ArgGrid::index(rows.front().size()), std::move(v), obs);
}

CurveSet d1() { return from_rows({{1, 4}, {2, 3}, {3, 2}, {4, 1}}, 1); }

CurveSet column(const std::vector<double>& values, std::size_t obs) {
    std::vector<std::vector<double>> rows;
    for (double v : values) rows.push_back({v});
    return from_rows(rows, obs);
}

ImagePanel image_panel(std::uint64_t seed, std::size_t width, std::size_t height, std::size_t n, double signal,
                       bool with_covariate) {
    std::vector<Pixel> pixels;
    std::vector<bool> planted;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            pixels.push_back({static_cast<double>(x), static_cast<double>(y), 1.0, 1.0});
            planted.push_back(x >= width / 4 && x < width / 4 + width / 2 && y >= height / 4 &&
                              y < height / 4 + height / 2);
        }
    std::mt19937_64 rng = stream_rng(seed, 0);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> age_law(20.0, 60.0);
    std::vector<std::string> group;
    std::vector<double> age;
    Matrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const bool patient = i % 2 == 1;
        group.push_back(patient ? "patient" : "control");
        age.push_back(age_law(rng));
        for (std::size_t k = 0; k < pixels.size(); ++k) {
            double value = normal(rng) + 0.02 * (age.back() - 40.0);
            if (patient && planted[k]) value += signal;
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = value;
        }
    }
    FactorTable factors(n);
    factors.add_categorical("Group", Grouping::from_strings(group));
    if (with_covariate) factors.add_continuous("Age", age);
    return {CurveSet(ArgGrid::two_d(pixels), std::move(v), 0), std::move(factors), std::move(planted)};
}

std::filesystem::path data_dir() { return GLOBENV_DATA_DIR; }

std::optional<std::filesystem::path> data_file(const std::string& name) {
    const auto p = data_dir() / name;
    if (std::filesystem::exists(p)) return p;
    return std::nullopt;
}

}  // namespace fixtures
