#ifndef GLOBENV_CURVESET_HPP
#define GLOBENV_CURVESET_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "globenv/error.hpp"

namespace globenv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Which tail of the pointwise distribution counts as extreme.
enum class Alternative { TwoSided, Less, Greater };

std::string_view to_string(Alternative alt);
Alternative parse_alternative(std::string_view name);

struct Pixel {
    double x = 0.0;
    double y = 0.0;
    double width = 1.0;
    double height = 1.0;
};

/// Argument values of the discretized curves: either increasing 1D values or
/// a set of 2D pixels.
class ArgGrid {
public:
    enum class Kind { OneD, TwoD };

    ArgGrid() = default;

    static ArgGrid one_d(std::vector<double> values);
    static ArgGrid two_d(std::vector<Pixel> pixels);
    /// 1, 2, ..., d
    static ArgGrid index(std::size_t d);

    Kind kind() const noexcept { return kind_; }
    bool is_2d() const noexcept { return kind_ == Kind::TwoD; }
    std::size_t size() const noexcept { return is_2d() ? pixels_.size() : values_.size(); }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<Pixel>& pixels() const noexcept { return pixels_; }

    /// Sub-grid over positions [first, first + count).
    ArgGrid slice(std::size_t first, std::size_t count) const;

    friend bool operator==(const ArgGrid& a, const ArgGrid& b);

private:
    Kind kind_ = Kind::OneD;
    std::vector<double> values_;
    std::vector<Pixel> pixels_;
};

/// s discretized curves sharing one grid. Rows are curves; the first
/// obs_count rows are observed data, the rest simulated or permuted.
class CurveSet {
public:
    CurveSet(ArgGrid grid, Matrix values, std::size_t obs_count = 0);

    const ArgGrid& grid() const noexcept { return grid_; }
    const Matrix& values() const noexcept { return values_; }
    std::size_t curves() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    std::size_t obs_count() const noexcept { return obs_count_; }

    double operator()(std::size_t i, std::size_t k) const { return values_(i, k); }
    auto curve(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)); }

    /// Columns [first, first + count) as a new set with the same obs_count.
    CurveSet slice(std::size_t first, std::size_t count) const;

private:
    ArgGrid grid_;
    Matrix values_;
    std::size_t obs_count_;
};

CurveSet create_curve_set(ArgGrid grid,
                          const std::vector<std::vector<double>>& observed,
                          const std::vector<std::vector<double>>& simulated);

struct JointInfo {
    std::size_t groups = 0;
    std::size_t curves = 0;
    std::vector<std::size_t> dims;
};

JointInfo validate_joint(std::span<const CurveSet> sets);

/// Long vectors (T^1, ..., T^G) over an index grid; used by one-step combining.
CurveSet concatenate(std::span<const CurveSet> sets);

}  // namespace globenv

#endif
