#ifndef GLOBENV_COMPOSITE_HPP
#define GLOBENV_COMPOSITE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "globenv/envelope.hpp"

namespace globenv {

/// Curve sets of a two-stage Monte Carlo test. `primary` holds the data
/// curve followed by s2 - 1 curves simulated from the fitted model; each
/// replicate repeats that construction for data simulated from the fit and
/// refitted.
struct CompositeInput {
    CurveSet primary;
    std::vector<CurveSet> replicates;
};

struct AdjustedResult {
    double p_adj = 1.0;
    /// Lower alpha quantile of the stage p-values; the envelope level.
    double p_alpha = 1.0;
    GlobalEnvelope envelope;
    /// p_1 (primary) followed by the replicates' p-values.
    std::vector<double> stage_pvalues;
};

/// Monte Carlo p-value of the first curve under the measure of `spec`
/// (extreme ranks are tie-broken by ERL).
double stage_p_value(const CurveSet& set, const MeasureSpec& spec);

AdjustedResult adjusted_test(const CompositeInput& input, const MeasureSpec& spec, double alpha);

/// Empirical cdf of `sample` at each grid point, F(r) = #{x <= r} / n.
std::vector<double> ecdf_at(std::span<const double> sample, std::span<const double> grid);

/// `count` equispaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Builds the composite input for testing normality of `data` with ecdf
/// curves on an equispaced grid over the data range.
CompositeInput gaussian_ecdf_pipeline(std::span<const double> data, std::size_t s, std::size_t s2,
                                      std::size_t grid_size, std::uint64_t seed);

}  // namespace globenv

#endif
