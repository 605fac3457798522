#include "globenv/composite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "globenv/parallel.hpp"

namespace globenv {

double stage_p_value(const CurveSet& set, const MeasureSpec& spec) {
    MeasureResult m = forder(set, spec);
    if (spec.type == MeasureType::Rank) {
        MeasureResult tie_break;
        tie_break.values = erl_from_ranks(m.ranks->sided);
        tie_break.orientation = Orientation::SmallerExtreme;
        return mc_p_value(tie_break, 0);
    }
    return mc_p_value(m, 0);
}

AdjustedResult adjusted_test(const CompositeInput& input, const MeasureSpec& spec, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (input.replicates.empty()) throw Error(ErrorCode::InconsistentReplicates, "at least one replicate set is needed");
    const CurveSet& primary = input.primary;
    for (const CurveSet& rep : input.replicates)
        if (rep.curves() != primary.curves() || !(rep.grid() == primary.grid()))
            throw Error(ErrorCode::InconsistentReplicates, "replicate sets must share the grid and curve count");
    if (primary.obs_count() != 1 ||
        std::any_of(input.replicates.begin(), input.replicates.end(), [](const CurveSet& c) { return c.obs_count() != 1; }))
        throw Error(ErrorCode::InconsistentReplicates, "every set must have exactly one observed curve");

    const std::size_t s = input.replicates.size() + 1;
    if (alpha < 1.0 / static_cast<double>(s) - 1e-12)
        throw Error(ErrorCode::AlphaInfeasible, "alpha is below 1/s for s = " + std::to_string(s) + " stage sets");

    AdjustedResult out;
    out.stage_pvalues.resize(s);
    parallel_for(s, [&](std::size_t i) {
        out.stage_pvalues[i] = stage_p_value(i == 0 ? primary : input.replicates[i - 1], spec);
    });

    const double p1 = out.stage_pvalues.front();
    const auto at_most = std::count_if(out.stage_pvalues.begin(), out.stage_pvalues.end(),
                                       [&](double p) { return p <= p1; });
    out.p_adj = static_cast<double>(at_most) / static_cast<double>(s);

    std::vector<double> sorted = out.stage_pvalues;
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(s) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, s);
    out.p_alpha = sorted[rank - 1];

    const double level = std::min(out.p_alpha, std::nextafter(1.0, 0.0));
    out.envelope = build_envelope(primary, spec, level);
    return out;
}

std::vector<double> ecdf_at(std::span<const double> sample, std::span<const double> grid) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(grid.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), grid[k]) - sorted.begin();
        out[k] = static_cast<double>(count) / n;
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
    out[count - 1] = hi;
    return out;
}

namespace {

struct NormalFit {
    double mean = 0.0;
    double sd = 0.0;
};

NormalFit fit_normal(std::span<const double> x) {
    NormalFit fit;
    fit.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - fit.mean) * (v - fit.mean);
    fit.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return fit;
}

// Observed ecdf followed by s2 - 1 ecdfs of fresh samples from the fit.
CurveSet ecdf_curve_set(const ArgGrid& grid, std::span<const double> observed, NormalFit fit, std::size_t s2,
                        std::mt19937_64& rng) {
    const std::vector<double>& r = grid.values();
    const auto d = static_cast<Eigen::Index>(r.size());
    Matrix values(static_cast<Eigen::Index>(s2), d);
    const std::vector<double> obs = ecdf_at(observed, r);
    for (Eigen::Index k = 0; k < d; ++k) values(0, k) = obs[static_cast<std::size_t>(k)];
    std::normal_distribution<double> normal(fit.mean, fit.sd);
    std::vector<double> sample(observed.size());
    for (std::size_t j = 1; j < s2; ++j) {
        for (double& x : sample) x = normal(rng);
        const std::vector<double> sim = ecdf_at(sample, r);
        for (Eigen::Index k = 0; k < d; ++k) values(static_cast<Eigen::Index>(j), k) = sim[static_cast<std::size_t>(k)];
    }
    return CurveSet(grid, std::move(values), 1);
}

}  // namespace

CompositeInput gaussian_ecdf_pipeline(std::span<const double> data, std::size_t s, std::size_t s2,
                                      std::size_t grid_size, std::uint64_t seed) {
    if (data.size() < 3) throw Error(ErrorCode::DegenerateData, "normality test needs at least 3 observations");
    if (s < 2 || s2 < 2) throw Error(ErrorCode::TooFewCurves, "s and s2 must be at least 2");
    if (grid_size < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be positive");
    const NormalFit fit = fit_normal(data);
    if (!(fit.sd > 0.0)) throw Error(ErrorCode::DegenerateData, "data have zero standard deviation");

    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const ArgGrid grid = grid_size == 1 ? ArgGrid::one_d({*lo}) : ArgGrid::one_d(linspace(*lo, *hi, grid_size));

    std::vector<std::optional<CurveSet>> sets(s);
    parallel_for(s, [&](std::size_t i) {
        std::mt19937_64 rng = stream_rng(seed, i);
        if (i == 0) {
            sets[0] = ecdf_curve_set(grid, data, fit, s2, rng);
            return;
        }
        std::normal_distribution<double> normal(fit.mean, fit.sd);
        std::vector<double> x(data.size());
        for (double& v : x) v = normal(rng);
        sets[i] = ecdf_curve_set(grid, x, fit_normal(x), s2, rng);
    });

    CompositeInput input{std::move(*sets[0]), {}};
    input.replicates.reserve(s - 1);
    for (std::size_t i = 1; i < s; ++i) input.replicates.push_back(std::move(*sets[i]));
    return input;
}

}  // namespace globenv
