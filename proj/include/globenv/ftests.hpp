#ifndef GLOBENV_FTESTS_HPP
#define GLOBENV_FTESTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "globenv/envelope.hpp"
#include "globenv/linear_model.hpp"

namespace globenv {

/// Cap used for F values whose denominator vanishes.
inline constexpr double kFSentinel = 1e300;

struct PermutationOptions {
    std::size_t nsim = 999;
    double alpha = 0.05;
    MeasureSpec spec{MeasureType::Erl, Alternative::TwoSided, 2.5, std::nullopt};
    std::uint64_t seed = 0;
};

struct FTestResult {
    /// Component names (group means, contrasts, coefficients or "F").
    std::vector<std::string> labels;
    /// One set per component: observed statistic first, then nsim permutations.
    std::vector<CurveSet> statistics;
    CombinedEnvelope envelope;
    /// Positions where the observed statistic leaves the envelope, per component.
    std::vector<std::vector<bool>> masks;
    /// Residual variance of the full model at each position (GLM tests).
    std::optional<Vector> sigma2;
    /// Positions where the F statistic hit a zero denominator.
    std::vector<bool> degenerate;

    double p() const { return envelope.p.value_or(1.0); }
};

enum class Variances { Equal, Unequal };

/// Rescales each group to the overall pointwise sd while keeping group means.
CurveSet scale_unequal_variances(const CurveSet& set, const Grouping& groups);

/// J x d pointwise group means.
Matrix group_means(const Matrix& values, const Grouping& groups);

struct FStatistic {
    Vector f;
    std::vector<bool> degenerate;
};

/// Classical one-way F at every position.
FStatistic rwise_f_oneway(const Matrix& values, const Grouping& groups);
FStatistic rwise_f_oneway(const CurveSet& set, const Grouping& groups);

FTestResult graph_fanova(const CurveSet& set, const Grouping& groups, bool contrasts, Variances variances,
                         const PermutationOptions& options);

FTestResult frank_fanova(const CurveSet& set, const Grouping& groups, const PermutationOptions& options,
                         Variances variances = Variances::Equal);

/// Response curves plus subject covariates. `varying` holds continuous
/// regressors observed on the same grid as the response.
struct FlmInput {
    CurveSet response;
    FactorTable factors;
    std::vector<std::pair<std::string, CurveSet>> varying;
    std::string formula_full;
    std::string formula_reduced;
};

FTestResult graph_flm(const FlmInput& input, bool contrasts, const PermutationOptions& options);
FTestResult frank_flm(const FlmInput& input, const PermutationOptions& options);

}  // namespace globenv

#endif
