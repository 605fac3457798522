#include "globenv/ftests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "globenv/parallel.hpp"

namespace globenv {

namespace {

void check_options(const PermutationOptions& options) {
    if (options.nsim < 1) throw Error(ErrorCode::InvalidArgument, "nsim must be positive");
    if (!(options.alpha > 0.0 && options.alpha < 1.0))
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const double s = static_cast<double>(options.nsim + 1);
    if (options.alpha < 1.0 / s - 1e-12)
        throw Error(ErrorCode::AlphaInfeasible,
                    "alpha is below 1/(nsim+1); increase nsim to at least " +
                        std::to_string(static_cast<std::size_t>(std::ceil(1.0 / options.alpha - 1.0))));
}

void check_groups(const CurveSet& set, const Grouping& groups, std::size_t min_size) {
    if (groups.size() != set.curves())
        throw Error(ErrorCode::InconsistentCurveCount, "group labels do not match the number of curves");
    if (groups.levels < 2) throw Error(ErrorCode::GroupTooSmall, "at least two groups are needed");
    const std::vector<std::size_t> counts = groups.counts();
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) throw Error(ErrorCode::EmptyGroup, "group " + groups.names[j] + " is empty");
        if (counts[j] < min_size)
            throw Error(ErrorCode::GroupTooSmall,
                        "group " + groups.names[j] + " needs at least " + std::to_string(min_size) + " curves");
    }
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, std::size_t replicate) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (replicate == 0) return perm;
    std::mt19937_64 rng = stream_rng(seed, replicate);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

// Rows of per-replicate statistic matrices gathered into one set per component.
std::vector<CurveSet> gather(const std::vector<Matrix>& per_replicate, const ArgGrid& grid) {
    const auto s = static_cast<Eigen::Index>(per_replicate.size());
    const Eigen::Index ncomp = per_replicate.front().rows();
    std::vector<CurveSet> out;
    out.reserve(static_cast<std::size_t>(ncomp));
    for (Eigen::Index c = 0; c < ncomp; ++c) {
        Matrix values(s, per_replicate.front().cols());
        for (Eigen::Index r = 0; r < s; ++r) values.row(r) = per_replicate[static_cast<std::size_t>(r)].row(c);
        out.emplace_back(grid, std::move(values), 1);
    }
    return out;
}

// Pairwise differences (0-1, 0-2, ..., (J-2)-(J-1)) as a J(J-1)/2 x J matrix.
Matrix contrast_matrix(Eigen::Index j) {
    Matrix c = Matrix::Zero(j * (j - 1) / 2, j);
    Eigen::Index row = 0;
    for (Eigen::Index a = 0; a < j; ++a)
        for (Eigen::Index b = a + 1; b < j; ++b) {
            c(row, a) = 1.0;
            c(row, b) = -1.0;
            ++row;
        }
    return c;
}

std::vector<std::string> contrast_labels(const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < names.size(); ++a)
        for (std::size_t b = a + 1; b < names.size(); ++b) out.push_back(names[a] + "-" + names[b]);
    return out;
}

CombinedEnvelope wrap(GlobalEnvelope env) {
    CombinedEnvelope out;
    out.mode = CombineMode::OneStep;
    out.alpha = env.alpha;
    out.joint = env.measures;
    out.critical = env.critical;
    out.index_set = env.index_set;
    out.p = env.p;
    out.p_interval = env.p_interval;
    out.warnings = env.warnings;
    out.components.push_back(std::move(env));
    return out;
}

void finish(FTestResult& result, std::vector<CurveSet> components, const PermutationOptions& options) {
    result.envelope = global_envelope_test(components, options.spec, options.alpha, CombineMode::OneStep);
    result.statistics = std::move(components);
    for (const GlobalEnvelope& env : result.envelope.components) result.masks.push_back(env.mask);
}

void finish_f(FTestResult& result, CurveSet fcurves, const PermutationOptions& options) {
    MeasureSpec spec = options.spec;
    spec.alternative = Alternative::Greater;
    result.envelope = wrap(global_envelope_test(fcurves, spec, options.alpha));
    result.statistics.push_back(std::move(fcurves));
    result.labels = {"F"};
    result.masks.push_back(result.envelope.components.front().mask);
}

// F from residual sums of squares with the zero-denominator guard.
double f_ratio(double explained, double df_num, double residual, double df_den, double total, bool& degenerate) {
    explained = std::max(explained, 0.0);
    degenerate = !(residual > 1e-24 * total);
    if (degenerate) return explained > 1e-12 * total ? kFSentinel : 0.0;
    return (explained / df_num) / (residual / df_den);
}

}  // namespace

Matrix group_means(const Matrix& values, const Grouping& groups) {
    Matrix sums = Matrix::Zero(groups.levels, values.cols());
    std::vector<double> counts(static_cast<std::size_t>(groups.levels), 0.0);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const int g = groups.labels[static_cast<std::size_t>(i)];
        sums.row(g) += values.row(i);
        counts[static_cast<std::size_t>(g)] += 1.0;
    }
    for (Eigen::Index j = 0; j < sums.rows(); ++j) sums.row(j) /= counts[static_cast<std::size_t>(j)];
    return sums;
}

CurveSet scale_unequal_variances(const CurveSet& set, const Grouping& groups) {
    check_groups(set, groups, 2);
    const Matrix& y = set.values();
    const auto n = static_cast<double>(y.rows());
    const Matrix means = group_means(y, groups);
    const Vector overall_mean = y.colwise().mean();
    const Vector sd_all =
        ((y.rowwise() - overall_mean.transpose()).colwise().squaredNorm() / (n - 1.0)).cwiseSqrt().transpose();

    const std::vector<std::size_t> counts = groups.counts();
    Matrix ss = Matrix::Zero(groups.levels, y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const int g = groups.labels[static_cast<std::size_t>(i)];
        ss.row(g) += (y.row(i) - means.row(g)).cwiseAbs2();
    }
    Matrix sd(groups.levels, y.cols());
    for (Eigen::Index j = 0; j < sd.rows(); ++j) {
        sd.row(j) = (ss.row(j) / (static_cast<double>(counts[static_cast<std::size_t>(j)]) - 1.0)).cwiseSqrt();
        for (Eigen::Index k = 0; k < sd.cols(); ++k)
            if (!(sd(j, k) > 0.0))
                throw Error(ErrorCode::DegenerateGroupVariance,
                            "group " + groups.names[static_cast<std::size_t>(j)] + " has zero variance at position " +
                                std::to_string(k + 1));
    }
    Matrix out(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const int g = groups.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < y.cols(); ++k)
            out(i, k) = (y(i, k) - means(g, k)) / sd(g, k) * sd_all(k) + means(g, k);
    }
    return CurveSet(set.grid(), std::move(out), set.obs_count());
}

FStatistic rwise_f_oneway(const Matrix& values, const Grouping& groups) {
    const Eigen::Index n = values.rows(), j = groups.levels;
    if (j < 2) throw Error(ErrorCode::GroupTooSmall, "at least two groups are needed");
    if (n <= j) throw Error(ErrorCode::GroupTooSmall, "more curves than groups are needed");
    const Matrix means = group_means(values, groups);
    const Vector grand = values.colwise().mean();
    const std::vector<std::size_t> counts = groups.counts();
    FStatistic out;
    out.f.resize(values.cols());
    out.degenerate.assign(static_cast<std::size_t>(values.cols()), false);
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
        double ssb = 0.0, ssw = 0.0;
        for (Eigen::Index g = 0; g < j; ++g) {
            const double diff = means(g, k) - grand(k);
            ssb += static_cast<double>(counts[static_cast<std::size_t>(g)]) * diff * diff;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double diff = values(i, k) - means(groups.labels[static_cast<std::size_t>(i)], k);
            ssw += diff * diff;
        }
        bool degenerate = false;
        out.f(k) = f_ratio(ssb, static_cast<double>(j - 1), ssw, static_cast<double>(n - j), ssb + ssw, degenerate);
        out.degenerate[static_cast<std::size_t>(k)] = degenerate;
    }
    return out;
}

FStatistic rwise_f_oneway(const CurveSet& set, const Grouping& groups) {
    if (groups.size() != set.curves())
        throw Error(ErrorCode::InconsistentCurveCount, "group labels do not match the number of curves");
    return rwise_f_oneway(set.values(), groups);
}

FTestResult graph_fanova(const CurveSet& set, const Grouping& groups, bool contrasts, Variances variances,
                         const PermutationOptions& options) {
    check_options(options);
    check_groups(set, groups, variances == Variances::Unequal ? 2 : 1);
    const CurveSet data = variances == Variances::Unequal ? scale_unequal_variances(set, groups) : set;
    const Matrix& y = data.values();
    const Matrix transform = contrasts ? contrast_matrix(groups.levels) : Matrix::Identity(groups.levels, groups.levels);

    std::vector<Matrix> per_replicate(options.nsim + 1);
    parallel_for(options.nsim + 1, [&](std::size_t r) {
        Grouping g = groups;
        const std::vector<std::size_t> perm = permutation(g.size(), options.seed, r);
        for (std::size_t i = 0; i < perm.size(); ++i) g.labels[perm[i]] = groups.labels[i];  // same as moving row perm[i] to i
        per_replicate[r] = transform * group_means(y, g);
    });

    FTestResult result;
    result.labels = contrasts ? contrast_labels(groups.names) : groups.names;
    finish(result, gather(per_replicate, set.grid()), options);
    return result;
}

FTestResult frank_fanova(const CurveSet& set, const Grouping& groups, const PermutationOptions& options,
                         Variances variances) {
    check_options(options);
    check_groups(set, groups, variances == Variances::Unequal ? 2 : 1);
    const CurveSet data = variances == Variances::Unequal ? scale_unequal_variances(set, groups) : set;
    const Matrix& y = data.values();

    Matrix f(static_cast<Eigen::Index>(options.nsim + 1), y.cols());
    FTestResult result;
    parallel_for(options.nsim + 1, [&](std::size_t r) {
        Grouping g = groups;
        const std::vector<std::size_t> perm = permutation(g.size(), options.seed, r);
        for (std::size_t i = 0; i < perm.size(); ++i) g.labels[perm[i]] = groups.labels[i];
        FStatistic stat = rwise_f_oneway(y, g);
        f.row(static_cast<Eigen::Index>(r)) = stat.f.transpose();
        if (r == 0) result.degenerate = std::move(stat.degenerate);
    });
    finish_f(result, CurveSet(set.grid(), std::move(f), 1), options);
    return result;
}

namespace {

struct ColumnModel {
    DesignPair design;
    LeastSquares full;
    LeastSquares reduced;
    /// Reported statistics as a linear map of the response (rows x n).
    Matrix statistic_map;

    ColumnModel(DesignPair pair, bool contrasts)
        : design(std::move(pair)), full(design.full), reduced(design.reduced) {
        std::vector<Matrix> blocks;
        for (const TermBlock& block : design.tested_terms) {
            Matrix rows(static_cast<Eigen::Index>(block.columns.size()), full.pseudo_inverse().cols());
            for (std::size_t c = 0; c < block.columns.size(); ++c)
                rows.row(static_cast<Eigen::Index>(c)) =
                    full.pseudo_inverse().row(static_cast<Eigen::Index>(block.columns[c]));
            Matrix reported = block.expansion * rows;
            if (contrasts && block.categorical) reported = contrast_matrix(reported.rows()) * reported;
            blocks.push_back(std::move(reported));
        }
        Eigen::Index total = 0;
        for (const Matrix& b : blocks) total += b.rows();
        statistic_map.resize(total, full.pseudo_inverse().cols());
        Eigen::Index row = 0;
        for (const Matrix& b : blocks) {
            statistic_map.middleRows(row, b.rows()) = b;
            row += b.rows();
        }
    }
};

std::vector<std::string> statistic_labels(const DesignPair& design, bool contrasts) {
    std::vector<std::string> out;
    for (const TermBlock& block : design.tested_terms) {
        const std::vector<std::string> names =
            contrasts && block.categorical ? contrast_labels(block.names) : block.names;
        out.insert(out.end(), names.begin(), names.end());
    }
    return out;
}

// Designs for every grid position (a single shared one without r-varying regressors).
struct FlmSetup {
    std::vector<ColumnModel> models;
    Matrix residuals;  // reduced-model residuals of the response, n x d
    std::size_t n = 0;

    const ColumnModel& at(Eigen::Index k) const {
        return models.size() == 1 ? models.front() : models[static_cast<std::size_t>(k)];
    }
};

FlmSetup prepare(const FlmInput& input, bool contrasts) {
    const CurveSet& y = input.response;
    const std::size_t n = y.curves();
    if (input.factors.rows() != n)
        throw Error(ErrorCode::InconsistentCurveCount, "the factor table does not match the number of curves");
    for (const auto& [name, set] : input.varying)
        if (set.curves() != n || !(set.grid() == y.grid()))
            throw Error(ErrorCode::InconsistentCurveCount,
                        "regressor '" + name + "' must have one curve per subject on the response grid");
    const std::vector<Term> full = parse_formula(input.formula_full);
    const std::vector<Term> reduced = parse_formula(input.formula_reduced);

    FlmSetup setup;
    setup.n = n;
    if (input.varying.empty()) {
        setup.models.emplace_back(build_design(input.factors, full, reduced), contrasts);
    } else {
        setup.models.reserve(y.dim());
        for (std::size_t k = 0; k < y.dim(); ++k) {
            std::vector<std::pair<std::string, std::vector<double>>> column;
            for (const auto& [name, set] : input.varying) {
                std::vector<double> v(n);
                for (std::size_t i = 0; i < n; ++i) v[i] = set(i, k);
                column.emplace_back(name, std::move(v));
            }
            setup.models.emplace_back(build_design(input.factors, full, reduced, column), contrasts);
        }
    }
    setup.residuals.resize(y.values().rows(), y.values().cols());
    for (Eigen::Index k = 0; k < y.values().cols(); ++k)
        setup.residuals.col(k) = setup.at(k).reduced.residuals(y.values().col(k));
    return setup;
}

Vector permuted_column(const CurveSet& y, const FlmSetup& setup, Eigen::Index k, std::span<const std::size_t> perm) {
    Vector out = y.values().col(k);
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out(i) += setup.residuals(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), k) -
                  setup.residuals(i, k);
    return out;
}

}  // namespace

FTestResult graph_flm(const FlmInput& input, bool contrasts, const PermutationOptions& options) {
    check_options(options);
    const FlmSetup setup = prepare(input, contrasts);
    const CurveSet& y = input.response;
    const Eigen::Index d = static_cast<Eigen::Index>(y.dim());
    const Eigen::Index k_out = setup.models.front().statistic_map.rows();

    std::vector<Matrix> per_replicate(options.nsim + 1);
    parallel_for(options.nsim + 1, [&](std::size_t r) {
        const std::vector<std::size_t> perm = permutation(setup.n, options.seed, r);
        Matrix stat(k_out, d);
        for (Eigen::Index k = 0; k < d; ++k) stat.col(k) = setup.at(k).statistic_map * permuted_column(y, setup, k, perm);
        per_replicate[r] = std::move(stat);
    });

    FTestResult result;
    result.labels = statistic_labels(setup.models.front().design, contrasts);
    Vector sigma2(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const ColumnModel& m = setup.at(k);
        sigma2(k) = m.full.residuals(y.values().col(k)).squaredNorm() /
                    static_cast<double>(setup.n - m.full.cols());
    }
    result.sigma2 = std::move(sigma2);
    finish(result, gather(per_replicate, y.grid()), options);
    return result;
}

FTestResult frank_flm(const FlmInput& input, const PermutationOptions& options) {
    check_options(options);
    const FlmSetup setup = prepare(input, false);
    const CurveSet& y = input.response;
    const Eigen::Index d = static_cast<Eigen::Index>(y.dim());

    Matrix f(static_cast<Eigen::Index>(options.nsim + 1), d);
    FTestResult result;
    result.degenerate.assign(static_cast<std::size_t>(d), false);
    Vector sigma2(d);
    parallel_for(options.nsim + 1, [&](std::size_t r) {
        const std::vector<std::size_t> perm = permutation(setup.n, options.seed, r);
        for (Eigen::Index k = 0; k < d; ++k) {
            const ColumnModel& m = setup.at(k);
            const Vector ystar = permuted_column(y, setup, k, perm);
            const double rss_full = m.full.residuals(ystar).squaredNorm();
            const double rss_reduced = m.reduced.residuals(ystar).squaredNorm();
            const double df_num = static_cast<double>(m.full.cols() - m.reduced.cols());
            const double df_den = static_cast<double>(setup.n - m.full.cols());
            bool degenerate = false;
            f(static_cast<Eigen::Index>(r), k) =
                f_ratio(rss_reduced - rss_full, df_num, rss_full, df_den, rss_reduced, degenerate);
            if (r == 0) {
                result.degenerate[static_cast<std::size_t>(k)] = degenerate;
                sigma2(k) = rss_full / df_den;
            }
        }
    });
    result.sigma2 = std::move(sigma2);
    finish_f(result, CurveSet(y.grid(), std::move(f), 1), options);
    return result;
}

}  // namespace globenv
