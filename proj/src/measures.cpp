#include "globenv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace globenv {

std::string_view to_string(MeasureType type) {
    switch (type) {
    case MeasureType::Rank: return "rank";
    case MeasureType::Erl: return "erl";
    case MeasureType::Cont: return "cont";
    case MeasureType::Area: return "area";
    case MeasureType::Qdir: return "qdir";
    case MeasureType::St: return "st";
    case MeasureType::Unscaled: return "unscaled";
    }
    return "area";
}

MeasureType parse_measure_type(std::string_view name) {
    for (MeasureType t : {MeasureType::Rank, MeasureType::Erl, MeasureType::Cont, MeasureType::Area,
                          MeasureType::Qdir, MeasureType::St, MeasureType::Unscaled})
        if (to_string(t) == name) return t;
    throw Error(ErrorCode::InvalidArgument, "unknown measure type '" + std::string(name) + "'");
}

Orientation orientation_of(MeasureType type) {
    switch (type) {
    case MeasureType::Qdir:
    case MeasureType::St:
    case MeasureType::Unscaled: return Orientation::LargerExtreme;
    default: return Orientation::SmallerExtreme;
    }
}

Vector erl_from_ranks(const Matrix& sided) {
    const auto s = static_cast<std::size_t>(sided.rows());
    const auto d = static_cast<std::size_t>(sided.cols());
    std::vector<double> sorted(s * d);
    for (std::size_t i = 0; i < s; ++i) {
        double* row = sorted.data() + i * d;
        for (std::size_t k = 0; k < d; ++k) row[k] = sided(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        std::sort(row, row + d);
    }
    auto row_less = [&](std::size_t a, std::size_t b) {
        const double* ra = sorted.data() + a * d;
        const double* rb = sorted.data() + b * d;
        return std::lexicographical_compare(ra, ra + d, rb, rb + d);
    };
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), row_less);

    Vector e(static_cast<Eigen::Index>(s));
    std::size_t group_start = 0;
    for (std::size_t p = 0; p < s; ++p) {
        if (p > 0 && row_less(order[p - 1], order[p])) group_start = p;
        // number of rows strictly preceding in reverse-lexical order
        e(static_cast<Eigen::Index>(order[p])) = static_cast<double>(group_start) / static_cast<double>(s);
    }
    return e;
}

MeasureResult extreme_rank(const CurveSet& set, Alternative alt) {
    MeasureResult m;
    m.type = MeasureType::Rank;
    m.alternative = alt;
    m.orientation = Orientation::SmallerExtreme;
    m.ranks = pointwise_ranks(set, alt);
    m.values = m.ranks->sided.rowwise().minCoeff();
    return m;
}

MeasureResult erl(const CurveSet& set, Alternative alt) {
    MeasureResult m;
    m.type = MeasureType::Erl;
    m.alternative = alt;
    m.orientation = Orientation::SmallerExtreme;
    m.ranks = pointwise_ranks(set, alt);
    m.values = erl_from_ranks(m.ranks->sided);
    return m;
}

MeasureResult cont(const CurveSet& set, Alternative alt) {
    const ContinuousRanks c = continuous_ranks(set, alt);
    MeasureResult m;
    m.type = MeasureType::Cont;
    m.alternative = alt;
    m.orientation = Orientation::SmallerExtreme;
    m.values = c.sided.rowwise().minCoeff() / static_cast<double>(set.curves());
    m.ranks = pointwise_ranks(set, alt);
    if (c.degenerate) m.warnings.emplace_back("continuous ranks: degenerate column resolved by the tie rule");
    return m;
}

MeasureResult area(const CurveSet& set, Alternative alt) {
    const ContinuousRanks c = continuous_ranks(set, alt);
    MeasureResult m;
    m.type = MeasureType::Area;
    m.alternative = alt;
    m.orientation = Orientation::SmallerExtreme;
    m.ranks = pointwise_ranks(set, alt);
    const Eigen::Index s = c.sided.rows();
    const Eigen::Index d = c.sided.cols();
    m.values.resize(s);
    for (Eigen::Index i = 0; i < s; ++i) {
        const double r = m.ranks->sided.row(i).minCoeff();
        double shortfall = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            const double ck = c.sided(i, k);
            if (ck < r) shortfall += r - ck;
        }
        m.values(i) = (r - shortfall / static_cast<double>(d)) / static_cast<double>(s);
    }
    if (c.degenerate) m.warnings.emplace_back("continuous ranks: degenerate column resolved by the tie rule");
    return m;
}

double quantile_type7(std::span<const double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

Vector central_curve(const CurveSet& set, const MeasureSpec& spec) {
    if (spec.central) {
        if (static_cast<std::size_t>(spec.central->size()) != set.dim())
            throw Error(ErrorCode::DimensionMismatch, "central curve has length " +
                                                          std::to_string(spec.central->size()) + ", expected " +
                                                          std::to_string(set.dim()));
        return *spec.central;
    }
    return set.values().colwise().mean().transpose();
}

void check_scale(const CurveSet& set, const Vector& scale, const char* what) {
    const Matrix& v = set.values();
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const double range = v.col(k).maxCoeff() - v.col(k).minCoeff();
        if (!(scale(k) > 1e-12 * range) || scale(k) == 0.0)
            throw Error(ErrorCode::DegenerateScale,
                        std::string(what) + " vanishes at position " + std::to_string(k + 1));
    }
}

MeasureResult deviation_measure(const CurveSet& set, MeasureType type, Alternative alt, DeviationScale scale) {
    const Matrix& v = set.values();
    MeasureResult m;
    m.type = type;
    m.alternative = alt;
    m.orientation = Orientation::LargerExtreme;
    m.values.resize(v.rows());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        double worst = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < v.cols(); ++k) {
            const double t = v(i, k);
            const double t0 = scale.central(k);
            double dev;
            switch (alt) {
            case Alternative::Less: dev = (t0 - t) / scale.lower_scale(k); break;
            case Alternative::Greater: dev = (t - t0) / scale.upper_scale(k); break;
            default: dev = t >= t0 ? (t - t0) / scale.upper_scale(k) : (t0 - t) / scale.lower_scale(k); break;
            }
            worst = std::max(worst, dev);
        }
        m.values(i) = worst;
    }
    m.scale = std::move(scale);
    return m;
}

}  // namespace

MeasureResult qdir(const CurveSet& set, const MeasureSpec& spec) {
    const double s = static_cast<double>(set.curves());
    if (!(spec.beta_percent > 100.0 / s))
        throw Error(ErrorCode::BetaTooSmall, "beta must exceed 100/s = " + std::to_string(100.0 / s));
    if (!(spec.beta_percent < 50.0)) throw Error(ErrorCode::InvalidArgument, "beta must be below 50");
    DeviationScale scale;
    scale.central = central_curve(set, spec);
    const Matrix& v = set.values();
    scale.lower_scale.resize(v.cols());
    scale.upper_scale.resize(v.cols());
    std::vector<double> column(static_cast<std::size_t>(v.rows()));
    const double p = spec.beta_percent / 100.0;
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        for (Eigen::Index i = 0; i < v.rows(); ++i) column[static_cast<std::size_t>(i)] = v(i, k);
        std::sort(column.begin(), column.end());
        scale.lower_scale(k) = std::abs(quantile_type7(column, p) - scale.central(k));
        scale.upper_scale(k) = std::abs(quantile_type7(column, 1.0 - p) - scale.central(k));
    }
    if (spec.alternative != Alternative::Greater) check_scale(set, scale.lower_scale, "lower quantile distance");
    if (spec.alternative != Alternative::Less) check_scale(set, scale.upper_scale, "upper quantile distance");
    return deviation_measure(set, MeasureType::Qdir, spec.alternative, std::move(scale));
}

MeasureResult st(const CurveSet& set, const MeasureSpec& spec) {
    DeviationScale scale;
    scale.central = central_curve(set, spec);
    const Matrix& v = set.values();
    const Eigen::RowVectorXd mean = v.colwise().mean();
    const double denom = static_cast<double>(v.rows() - 1);
    scale.lower_scale = ((v.rowwise() - mean).array().square().colwise().sum() / denom).sqrt().transpose();
    check_scale(set, scale.lower_scale, "standard deviation");
    scale.upper_scale = scale.lower_scale;
    return deviation_measure(set, MeasureType::St, spec.alternative, std::move(scale));
}

MeasureResult unscaled(const CurveSet& set, const MeasureSpec& spec) {
    DeviationScale scale;
    scale.central = central_curve(set, spec);
    scale.lower_scale = Vector::Ones(static_cast<Eigen::Index>(set.dim()));
    scale.upper_scale = scale.lower_scale;
    return deviation_measure(set, MeasureType::Unscaled, spec.alternative, std::move(scale));
}

MeasureResult forder(const CurveSet& set, const MeasureSpec& spec) {
    switch (spec.type) {
    case MeasureType::Rank: return extreme_rank(set, spec.alternative);
    case MeasureType::Erl: return erl(set, spec.alternative);
    case MeasureType::Cont: return cont(set, spec.alternative);
    case MeasureType::Area: return area(set, spec.alternative);
    case MeasureType::Qdir: return qdir(set, spec);
    case MeasureType::St: return st(set, spec);
    case MeasureType::Unscaled: return unscaled(set, spec);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown measure type");
}

JointMeasure two_step_measure(std::span<const CurveSet> sets, const MeasureSpec& spec) {
    const JointInfo info = validate_joint(sets);
    JointMeasure out;
    Matrix stage(static_cast<Eigen::Index>(info.curves), static_cast<Eigen::Index>(info.groups));
    for (std::size_t j = 0; j < sets.size(); ++j) {
        out.components.push_back(forder(sets[j], spec));
        const MeasureResult& m = out.components.back();
        // second stage treats small values as extreme
        stage.col(static_cast<Eigen::Index>(j)) =
            m.orientation == Orientation::LargerExtreme ? Vector(-m.values) : m.values;
    }
    const CurveSet stage_set(ArgGrid::index(info.groups), std::move(stage), sets.front().obs_count());
    out.joint = erl(stage_set, Alternative::Less);
    for (const MeasureResult& m : out.components)
        out.joint.warnings.insert(out.joint.warnings.end(), m.warnings.begin(), m.warnings.end());
    return out;
}

MeasureResult forder(std::span<const CurveSet> sets, const MeasureSpec& spec, CombineMode combine) {
    validate_joint(sets);
    if (sets.size() == 1) return forder(sets.front(), spec);
    if (combine == CombineMode::OneStep) return forder(concatenate(sets), spec);
    return two_step_measure(sets, spec).joint;
}

std::vector<std::size_t> extremeness_order(const MeasureResult& m) {
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Vector& v = m.values;
    if (m.orientation == Orientation::SmallerExtreme)
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return v(static_cast<Eigen::Index>(a)) < v(static_cast<Eigen::Index>(b));
        });
    else
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return v(static_cast<Eigen::Index>(a)) > v(static_cast<Eigen::Index>(b));
        });
    return order;
}

double mc_p_value(const MeasureResult& m, std::size_t observed) {
    const double obs = m.values(static_cast<Eigen::Index>(observed));
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < m.values.size(); ++i)
        count += m.orientation == Orientation::SmallerExtreme ? (m.values(i) <= obs) : (m.values(i) >= obs);
    return static_cast<double>(count) / static_cast<double>(m.values.size());
}

}  // namespace globenv
