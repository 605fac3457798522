#include "globenv/applications.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "globenv/composite.hpp"
#include "globenv/parallel.hpp"

namespace globenv {

std::vector<double> default_ecdf_grid(std::span<const std::vector<double>> samples, std::size_t cap) {
    std::vector<double> pooled;
    for (const auto& s : samples) pooled.insert(pooled.end(), s.begin(), s.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
    if (pooled.size() > cap) return linspace(pooled.front(), pooled.back(), cap);
    return pooled;
}

FTestResult necdf_test(std::span<const std::vector<double>> samples, const std::optional<std::vector<double>>& grid,
                       const PermutationOptions& options, std::vector<std::string> names) {
    if (samples.size() < 2) throw Error(ErrorCode::GroupTooSmall, "at least two samples are needed");
    std::vector<double> pooled;
    std::vector<std::size_t> sizes;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        if (samples[j].empty()) throw Error(ErrorCode::EmptyGroup, "sample " + std::to_string(j + 1) + " is empty");
        for (double v : samples[j])
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "sample " + std::to_string(j + 1) + " has a non-finite value");
        pooled.insert(pooled.end(), samples[j].begin(), samples[j].end());
        sizes.push_back(samples[j].size());
    }
    if (names.empty())
        for (std::size_t j = 0; j < samples.size(); ++j) names.push_back("sample " + std::to_string(j + 1));
    if (names.size() != samples.size()) throw Error(ErrorCode::InvalidArgument, "one name per sample is needed");
    const ArgGrid arg = ArgGrid::one_d(grid ? *grid : default_ecdf_grid(samples));
    const std::vector<double>& r = arg.values();
    if (options.nsim < 1) throw Error(ErrorCode::InvalidArgument, "nsim must be positive");

    const auto groups = static_cast<Eigen::Index>(samples.size());
    const auto d = static_cast<Eigen::Index>(r.size());
    std::vector<Matrix> per_replicate(options.nsim + 1);
    parallel_for(options.nsim + 1, [&](std::size_t rep) {
        std::vector<double> x = pooled;
        if (rep > 0) {
            std::mt19937_64 rng = stream_rng(options.seed, rep);
            std::shuffle(x.begin(), x.end(), rng);
        }
        Matrix stat(groups, d);
        std::size_t offset = 0;
        for (Eigen::Index j = 0; j < groups; ++j) {
            const std::size_t nj = sizes[static_cast<std::size_t>(j)];
            const std::vector<double> f = ecdf_at(std::span<const double>(x).subspan(offset, nj), r);
            for (Eigen::Index k = 0; k < d; ++k) stat(j, k) = f[static_cast<std::size_t>(k)];
            offset += nj;
        }
        per_replicate[rep] = std::move(stat);
    });

    std::vector<CurveSet> components;
    for (Eigen::Index j = 0; j < groups; ++j) {
        Matrix values(static_cast<Eigen::Index>(options.nsim + 1), d);
        for (std::size_t rep = 0; rep <= options.nsim; ++rep)
            values.row(static_cast<Eigen::Index>(rep)) = per_replicate[rep].row(j);
        components.emplace_back(arg, std::move(values), 1);
    }
    FTestResult result;
    result.labels = std::move(names);
    result.envelope = global_envelope_test(components, options.spec, options.alpha, CombineMode::OneStep);
    result.statistics = std::move(components);
    for (const GlobalEnvelope& env : result.envelope.components) result.masks.push_back(env.mask);
    return result;
}

FBoxplotResult fboxplot(std::span<const CurveSet> sets, const MeasureSpec& spec, double coverage, double factor,
                        CombineMode nstep) {
    if (!(factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "the inflation factor must be positive");
    FBoxplotResult out;
    out.factor = factor;
    out.central = central_region(sets, spec, coverage, nstep);
    const std::size_t s = sets.front().curves();
    std::vector<bool> outlier(s, false);
    for (std::size_t g = 0; g < sets.size(); ++g) {
        const GlobalEnvelope& env = out.central.components[g];
        Vector lo(env.lower.size()), hi(env.upper.size());
        for (Eigen::Index k = 0; k < lo.size(); ++k) {
            const double width = env.upper(k) - env.lower(k);
            const double pad = width > 0.0 ? factor * width : 0.0;
            lo(k) = env.lower(k) - pad;
            hi(k) = env.upper(k) + pad;
        }
        for (std::size_t i = 0; i < s; ++i) {
            for (Eigen::Index k = 0; k < lo.size() && !outlier[i]; ++k) {
                const double v = sets[g](i, static_cast<std::size_t>(k));
                if ((env.lower_informative && v < lo(k)) || (env.upper_informative && v > hi(k))) outlier[i] = true;
            }
        }
        out.whisker_lower.push_back(std::move(lo));
        out.whisker_upper.push_back(std::move(hi));
    }
    for (std::size_t i = 0; i < s; ++i)
        if (outlier[i]) out.outlier_indices.push_back(i);
    return out;
}

FBoxplotResult fboxplot(const CurveSet& set, const MeasureSpec& spec, double coverage, double factor) {
    return fboxplot(std::span<const CurveSet>(&set, 1), spec, coverage, factor, CombineMode::TwoStep);
}

}  // namespace globenv
