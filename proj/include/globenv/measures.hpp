#ifndef GLOBENV_MEASURES_HPP
#define GLOBENV_MEASURES_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "globenv/curveset.hpp"
#include "globenv/ranks.hpp"

namespace globenv {

enum class MeasureType { Rank, Erl, Cont, Area, Qdir, St, Unscaled };

std::string_view to_string(MeasureType type);
MeasureType parse_measure_type(std::string_view name);

/// Rank-based measures are small for extreme curves; the deviation
/// measures (qdir, st, unscaled) are large for extreme curves.
enum class Orientation { SmallerExtreme, LargerExtreme };

Orientation orientation_of(MeasureType type);

enum class CombineMode { OneStep, TwoStep };

struct MeasureSpec {
    MeasureType type = MeasureType::Area;
    Alternative alternative = Alternative::TwoSided;
    /// Quantile level (percent) used by qdir.
    double beta_percent = 2.5;
    /// Central curve T_0 for qdir/st/unscaled; the pointwise sample mean when unset.
    std::optional<Vector> central;
};

/// Per-position location and scales of a deviation measure. The envelope is
/// central - critical * lower_scale .. central + critical * upper_scale.
struct DeviationScale {
    Vector central;
    Vector lower_scale;
    Vector upper_scale;
};

struct MeasureResult {
    MeasureType type = MeasureType::Area;
    Alternative alternative = Alternative::TwoSided;
    Orientation orientation = Orientation::SmallerExtreme;
    Vector values;
    /// Kept for rank-type measures (needed by the rank envelope and tie breaking).
    std::optional<PointwiseRanks> ranks;
    std::optional<DeviationScale> scale;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Reverse-lexical extreme rank length of each row of sided pointwise ranks,
/// normalized by the number of rows.
Vector erl_from_ranks(const Matrix& sided);

MeasureResult extreme_rank(const CurveSet& set, Alternative alt);
MeasureResult erl(const CurveSet& set, Alternative alt);
MeasureResult cont(const CurveSet& set, Alternative alt);
MeasureResult area(const CurveSet& set, Alternative alt);
MeasureResult qdir(const CurveSet& set, const MeasureSpec& spec);
MeasureResult st(const CurveSet& set, const MeasureSpec& spec);
MeasureResult unscaled(const CurveSet& set, const MeasureSpec& spec);

/// Lower and upper quantiles by linear interpolation of order statistics at
/// h = (n - 1) p + 1.
double quantile_type7(std::span<const double> sorted, double p);

/// Measure of a single set, dispatched on spec.type.
MeasureResult forder(const CurveSet& set, const MeasureSpec& spec);

/// Component measures plus the second-stage one-sided ERL over them.
struct JointMeasure {
    std::vector<MeasureResult> components;
    MeasureResult joint;
};

JointMeasure two_step_measure(std::span<const CurveSet> sets, const MeasureSpec& spec);

/// Measure of several sets combined by concatenation or by two-step ERL.
MeasureResult forder(std::span<const CurveSet> sets, const MeasureSpec& spec, CombineMode combine);

/// Curve indices (0-based) from the most to the least extreme; ties keep
/// index order.
std::vector<std::size_t> extremeness_order(const MeasureResult& m);

/// Monte Carlo p-value of curve `observed` (0-based): share of curves at
/// least as extreme.
double mc_p_value(const MeasureResult& m, std::size_t observed = 0);

}  // namespace globenv

#endif
