#ifndef GLOBENV_RANKS_HPP
#define GLOBENV_RANKS_HPP

#include <span>
#include <vector>

#include "globenv/curveset.hpp"

namespace globenv {

/// Column-wise ranks of an s x d curve set. `raw` ranks the smallest value
/// as 1 and averages ties; `sided` applies the alternative.
struct PointwiseRanks {
    Matrix raw;
    Matrix sided;
};

/// Tie-breaking continuous version of the raw ranks. `values` holds c_ik
/// (in [0, s]), `sided` holds c, s - c or min(c, s - c).
struct ContinuousRanks {
    Matrix values;
    Matrix sided;
    /// Set when a boundary denominator vanished and the tie rule was used.
    bool degenerate = false;
};

/// Average ranks (1-based) of one column.
std::vector<double> average_ranks(std::span<const double> column);

/// Continuous ranks of one column; requires at least 3 values.
/// Returns true through `degenerate` when a boundary formula was undefined.
std::vector<double> continuous_column_ranks(std::span<const double> column, bool& degenerate);

double sided_rank(double raw, double s, Alternative alt);
double sided_continuous_rank(double c, double s, Alternative alt);

PointwiseRanks pointwise_ranks(const CurveSet& set, Alternative alt);
ContinuousRanks continuous_ranks(const CurveSet& set, Alternative alt);

}  // namespace globenv

#endif
