#include "globenv/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace globenv {

namespace {

// Largest admissible count of excluded curves; the slack absorbs rounding
// in alpha * s (0.29 * 100 must admit 29).
std::size_t exclusion_budget(double alpha, std::size_t s) {
    return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(s) + 1e-9));
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
}

std::vector<double> sorted_column(const Matrix& v, Eigen::Index k) {
    std::vector<double> col(static_cast<std::size_t>(v.rows()));
    for (Eigen::Index i = 0; i < v.rows(); ++i) col[static_cast<std::size_t>(i)] = v(i, k);
    std::sort(col.begin(), col.end());
    return col;
}

void set_informative(GlobalEnvelope& env, const CurveSet& set, Alternative alt) {
    env.lower_informative = alt != Alternative::Greater;
    env.upper_informative = alt != Alternative::Less;
    if (!env.lower_informative) env.lower = set.values().colwise().minCoeff().transpose();
    if (!env.upper_informative) env.upper = set.values().colwise().maxCoeff().transpose();
}

void hull_over(GlobalEnvelope& env, const CurveSet& set, const std::vector<std::size_t>& index_set) {
    const Matrix& v = set.values();
    env.lower = Vector::Constant(v.cols(), std::numeric_limits<double>::infinity());
    env.upper = Vector::Constant(v.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t i : index_set) {
        const auto row = v.row(static_cast<Eigen::Index>(i));
        env.lower = env.lower.cwiseMin(row.transpose());
        env.upper = env.upper.cwiseMax(row.transpose());
    }
}

void finish_test(GlobalEnvelope& env, const CurveSet& set) {
    if (set.obs_count() == 0) return;
    if (!env.p) env.p = mc_p_value(env.measures, 0);
    env.mask = exit_mask(env, set.curve(0));
}

void add_full_hull_warning(std::vector<std::string>& warnings, const CriticalValue& crit) {
    if (crit.full_hull)
        warnings.emplace_back("alpha * s < 1: no curve can be excluded, the envelope is the data hull");
}

}  // namespace

CriticalValue critical_value(const MeasureResult& m, double alpha) {
    check_alpha(alpha);
    const std::size_t s = m.size();
    const std::size_t budget = exclusion_budget(alpha, s);
    // Work on "extremeness" values where smaller is more extreme.
    std::vector<double> e(s);
    const double sign = m.orientation == Orientation::SmallerExtreme ? 1.0 : -1.0;
    for (std::size_t i = 0; i < s; ++i) e[i] = sign * m.values(static_cast<Eigen::Index>(i));
    std::vector<double> sorted = e;
    std::sort(sorted.begin(), sorted.end());

    // Largest observed value v with #{e < v} <= budget. The count of values
    // strictly below sorted[p] is the first index holding that value.
    double chosen = sorted.front();
    std::size_t first = 0;
    while (first < s) {
        if (first > budget) break;
        chosen = sorted[first];
        std::size_t next = first;
        while (next < s && sorted[next] == sorted[first]) ++next;
        first = next;
    }

    CriticalValue out;
    out.value = sign * chosen;
    for (std::size_t i = 0; i < s; ++i)
        if (e[i] >= chosen) out.index_set.push_back(i);
    out.full_hull = budget == 0;
    return out;
}

Vector pointwise_median(const CurveSet& set) {
    const Matrix& v = set.values();
    Vector med(v.cols());
    for (Eigen::Index k = 0; k < v.cols(); ++k) med(k) = quantile_type7(sorted_column(v, k), 0.5);
    return med;
}

GlobalEnvelope rank_envelope(const CurveSet& set, Alternative alt, double alpha) {
    GlobalEnvelope env;
    env.grid = set.grid();
    env.type = MeasureType::Rank;
    env.alternative = alt;
    env.alpha = alpha;
    env.measures = extreme_rank(set, alt);
    const CriticalValue crit = critical_value(env.measures, alpha);
    add_full_hull_warning(env.warnings, crit);
    env.critical = crit.value;
    env.index_set = crit.index_set;

    const std::size_t s = set.curves();
    auto l = static_cast<std::size_t>(std::ceil(crit.value));
    const std::size_t max_l = std::max<std::size_t>(1, s / 2);
    if (l > max_l) {
        env.warnings.emplace_back("critical rank exceeds floor(s/2); envelope clamped to the median band");
        l = max_l;
    }
    l = std::max<std::size_t>(l, 1);

    const Matrix& v = set.values();
    env.lower.resize(v.cols());
    env.upper.resize(v.cols());
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const std::vector<double> col = sorted_column(v, k);
        env.lower(k) = col[l - 1];
        env.upper(k) = col[s - l];
    }
    set_informative(env, set, alt);
    env.central = pointwise_median(set);

    if (set.obs_count() > 0) {
        const Vector& r = env.measures.values;
        std::size_t less = 0;
        std::size_t less_eq = 0;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            less += r(i) < r(0);
            less_eq += r(i) <= r(0);
        }
        env.p_interval = PInterval{static_cast<double>(less) / static_cast<double>(s),
                                   static_cast<double>(less_eq) / static_cast<double>(s)};
        // ties in the extreme rank are broken by the extreme rank length
        MeasureResult tie_break;
        tie_break.values = erl_from_ranks(env.measures.ranks->sided);
        tie_break.orientation = Orientation::SmallerExtreme;
        env.p = mc_p_value(tie_break, 0);
    }
    finish_test(env, set);
    return env;
}

GlobalEnvelope hull_envelope(const CurveSet& set, const MeasureResult& m, double alpha) {
    if (m.size() != set.curves()) throw Error(ErrorCode::DimensionMismatch, "measure length differs from curve count");
    GlobalEnvelope env;
    env.grid = set.grid();
    env.type = m.type;
    env.alternative = m.alternative;
    env.alpha = alpha;
    env.measures = m;
    const CriticalValue crit = critical_value(m, alpha);
    add_full_hull_warning(env.warnings, crit);
    env.critical = crit.value;
    env.index_set = crit.index_set;
    hull_over(env, set, crit.index_set);
    set_informative(env, set, m.alternative);
    env.central = pointwise_median(set);
    env.warnings.insert(env.warnings.end(), m.warnings.begin(), m.warnings.end());
    finish_test(env, set);
    return env;
}

GlobalEnvelope parametric_envelope(const CurveSet& set, const MeasureSpec& spec, double alpha) {
    if (orientation_of(spec.type) != Orientation::LargerExtreme)
        throw Error(ErrorCode::InvalidArgument, "parametric envelopes need a qdir, st or unscaled measure");
    GlobalEnvelope env;
    env.grid = set.grid();
    env.type = spec.type;
    env.alternative = spec.alternative;
    env.alpha = alpha;
    env.measures = forder(set, spec);
    const CriticalValue crit = critical_value(env.measures, alpha);
    add_full_hull_warning(env.warnings, crit);
    env.critical = crit.value;
    env.index_set = crit.index_set;

    const DeviationScale& sc = *env.measures.scale;
    const double u = crit.value;
    const Matrix& v = set.values();
    const Vector& m = env.measures.values;
    const Alternative alt = spec.alternative;
    env.central = sc.central;
    env.lower = sc.central - u * sc.lower_scale;
    env.upper = sc.central + u * sc.upper_scale;

    // Nudge each bound by at most the rounding of the closed form so that
    // "leaves the envelope somewhere" coincides exactly with "measure > u".
    const double inf = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const double t0 = sc.central(k);
        double inside_max = -inf, inside_min = inf, exit_up_min = inf, exit_low_max = -inf;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const double t = v(i, k);
            if (m(i) <= u) {
                inside_max = std::max(inside_max, t);
                inside_min = std::min(inside_min, t);
                continue;
            }
            const bool up_branch = alt == Alternative::Greater || (alt == Alternative::TwoSided && t >= t0);
            const bool low_branch = alt == Alternative::Less || (alt == Alternative::TwoSided && t < t0);
            if (up_branch && (t - t0) / sc.upper_scale(k) > u) exit_up_min = std::min(exit_up_min, t);
            if (low_branch && (t0 - t) / sc.lower_scale(k) > u) exit_low_max = std::max(exit_low_max, t);
        }
        if (env.upper(k) < inside_max) env.upper(k) = inside_max;
        if (env.upper(k) >= exit_up_min) env.upper(k) = std::nextafter(exit_up_min, -inf);
        if (env.lower(k) > inside_min) env.lower(k) = inside_min;
        if (env.lower(k) <= exit_low_max) env.lower(k) = std::nextafter(exit_low_max, inf);
    }
    set_informative(env, set, alt);
    finish_test(env, set);
    return env;
}

GlobalEnvelope build_envelope(const CurveSet& set, const MeasureSpec& spec, double alpha) {
    check_alpha(alpha);
    switch (spec.type) {
    case MeasureType::Rank: return rank_envelope(set, spec.alternative, alpha);
    case MeasureType::Erl:
    case MeasureType::Cont:
    case MeasureType::Area: return hull_envelope(set, forder(set, spec), alpha);
    default: return parametric_envelope(set, spec, alpha);
    }
}

GlobalEnvelope central_region(const CurveSet& set, const MeasureSpec& spec, double coverage) {
    if (!(coverage > 0.0 && coverage < 1.0)) throw Error(ErrorCode::InvalidArgument, "coverage must lie in (0, 1)");
    return build_envelope(set, spec, 1.0 - coverage);
}

CombinedEnvelope central_region(std::span<const CurveSet> sets, const MeasureSpec& spec, double coverage,
                                CombineMode nstep) {
    if (!(coverage > 0.0 && coverage < 1.0)) throw Error(ErrorCode::InvalidArgument, "coverage must lie in (0, 1)");
    return combined_envelope(sets, spec, 1.0 - coverage, nstep);
}

namespace {

void check_test_input(const CurveSet& set, double alpha) {
    check_alpha(alpha);
    if (set.obs_count() == 0) throw Error(ErrorCode::NoObservedCurve, "a global envelope test needs an observed curve");
    if (alpha < 1.0 / static_cast<double>(set.curves()) - 1e-12)
        throw Error(ErrorCode::AlphaInfeasible, "alpha = " + std::to_string(alpha) + " is below 1/s = " +
                                                    std::to_string(1.0 / static_cast<double>(set.curves())));
}

}  // namespace

GlobalEnvelope global_envelope_test(const CurveSet& set, const MeasureSpec& spec, double alpha) {
    check_test_input(set, alpha);
    return build_envelope(set, spec, alpha);
}

CombinedEnvelope global_envelope_test(std::span<const CurveSet> sets, const MeasureSpec& spec, double alpha,
                                      CombineMode nstep) {
    validate_joint(sets);
    check_test_input(sets.front(), alpha);
    return combined_envelope(sets, spec, alpha, nstep);
}

CombinedEnvelope combined_envelope(std::span<const CurveSet> sets, const MeasureSpec& spec, double alpha,
                                   CombineMode nstep) {
    check_alpha(alpha);
    validate_joint(sets);
    CombinedEnvelope out;
    out.mode = nstep;
    out.alpha = alpha;

    if (sets.size() == 1 || nstep == CombineMode::OneStep) {
        const CurveSet joint = concatenate(sets);
        GlobalEnvelope env = build_envelope(joint, spec, alpha);
        out.joint = env.measures;
        out.critical = env.critical;
        out.index_set = env.index_set;
        out.p = env.p;
        out.p_interval = env.p_interval;
        out.warnings = env.warnings;
        if (sets.size() == 1) {
            out.components.push_back(std::move(env));
            return out;
        }
        Eigen::Index offset = 0;
        for (const CurveSet& set : sets) {
            const Eigen::Index d = static_cast<Eigen::Index>(set.dim());
            GlobalEnvelope part = env;
            part.grid = set.grid();
            part.lower = env.lower.segment(offset, d);
            part.upper = env.upper.segment(offset, d);
            part.central = env.central.segment(offset, d);
            part.mask.clear();
            if (set.obs_count() > 0) part.mask = exit_mask(part, set.curve(0));
            out.components.push_back(std::move(part));
            offset += d;
        }
        return out;
    }

    JointMeasure jm = two_step_measure(sets, spec);
    const CriticalValue crit = critical_value(jm.joint, alpha);
    out.joint = jm.joint;
    out.critical = crit.value;
    out.index_set = crit.index_set;
    out.warnings = jm.joint.warnings;
    add_full_hull_warning(out.warnings, crit);
    if (sets.front().obs_count() > 0) out.p = mc_p_value(jm.joint, 0);

    for (std::size_t j = 0; j < sets.size(); ++j) {
        const CurveSet& set = sets[j];
        GlobalEnvelope env;
        env.grid = set.grid();
        env.type = spec.type;
        env.alternative = spec.alternative;
        env.alpha = alpha;
        env.measures = std::move(jm.components[j]);
        env.critical = crit.value;
        env.index_set = crit.index_set;
        hull_over(env, set, crit.index_set);
        set_informative(env, set, spec.alternative);
        env.central = pointwise_median(set);
        env.p = out.p;
        if (set.obs_count() > 0) env.mask = exit_mask(env, set.curve(0));
        out.components.push_back(std::move(env));
    }
    return out;
}

}  // namespace globenv
