#ifndef GLOBENV_TESTS_FIXTURES_HPP
#define GLOBENV_TESTS_FIXTURES_HPP

#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "globenv/curveset.hpp"
#include "globenv/linear_model.hpp"

namespace fixtures {

using globenv::CurveSet;

/// Gaussian curves, or integers in [0, levels) when levels > 0.
CurveSet random_set(std::mt19937_64& rng, std::size_t s, std::size_t d, std::size_t obs = 1, int levels = 0);

/// A=(1,4), B=(2,3), C=(3,2), D=(4,1) with A observed.
CurveSet d1();

/// One curve per value on a single-point grid.
CurveSet column(const std::vector<double>& values, std::size_t obs = 0);

/// Four-curve sets from rows.
CurveSet from_rows(const std::vector<std::vector<double>>& rows, std::size_t obs = 0);

/// Image panel on a w x h pixel grid: n subjects in two groups; group 1 gets
/// `signal` (in noise sd units) added inside the planted square.
struct ImagePanel {
    CurveSet images;
    globenv::FactorTable factors;
    std::vector<bool> planted;
};
ImagePanel image_panel(std::uint64_t seed, std::size_t width, std::size_t height, std::size_t n, double signal,
                       bool with_covariate = true);

std::filesystem::path data_dir();
std::optional<std::filesystem::path> data_file(const std::string& name);

}  // namespace fixtures

#endif
