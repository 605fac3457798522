#ifndef GLOBENV_APPLICATIONS_HPP
#define GLOBENV_APPLICATIONS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "globenv/ftests.hpp"

namespace globenv {

/// Default ecdf grid: sorted pooled unique values, or `cap` equispaced
/// points over the pooled range when there are more than `cap`.
std::vector<double> default_ecdf_grid(std::span<const std::vector<double>> samples, std::size_t cap = 100);

/// Permutation test of equal distributions for n samples, based on the
/// concatenated group ecdfs.
FTestResult necdf_test(std::span<const std::vector<double>> samples, const std::optional<std::vector<double>>& grid,
                       const PermutationOptions& options, std::vector<std::string> names = {});

struct FBoxplotResult {
    CombinedEnvelope central;
    std::vector<Vector> whisker_lower;
    std::vector<Vector> whisker_upper;
    /// 0-based curves leaving a whisker in some component.
    std::vector<std::size_t> outlier_indices;
    double factor = 1.5;
};

FBoxplotResult fboxplot(std::span<const CurveSet> sets, const MeasureSpec& spec, double coverage = 0.5,
                        double factor = 1.5, CombineMode nstep = CombineMode::TwoStep);
FBoxplotResult fboxplot(const CurveSet& set, const MeasureSpec& spec, double coverage = 0.5, double factor = 1.5);

}  // namespace globenv

#endif
