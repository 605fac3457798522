#include "globenv/curveset.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace globenv {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TooFewCurves: return "TooFewCurves";
    case ErrorCode::InconsistentCurveCount: return "InconsistentCurveCount";
    case ErrorCode::InconsistentObsCount: return "InconsistentObsCount";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::BetaTooSmall: return "BetaTooSmall";
    case ErrorCode::AlphaInfeasible: return "AlphaInfeasible";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoObservedCurve: return "NoObservedCurve";
    case ErrorCode::InconsistentReplicates: return "InconsistentReplicates";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::DegenerateGroupVariance: return "DegenerateGroupVariance";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::UnknownTerm: return "UnknownTerm";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::HeaderError: return "HeaderError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

std::string_view to_string(Alternative alt) {
    switch (alt) {
    case Alternative::TwoSided: return "two.sided";
    case Alternative::Less: return "less";
    case Alternative::Greater: return "greater";
    }
    return "two.sided";
}

Alternative parse_alternative(std::string_view name) {
    if (name == "two.sided" || name == "two-sided" || name == "two_sided") return Alternative::TwoSided;
    if (name == "less") return Alternative::Less;
    if (name == "greater") return Alternative::Greater;
    throw Error(ErrorCode::InvalidArgument, "unknown alternative '" + std::string(name) + "'");
}

ArgGrid ArgGrid::one_d(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::InvalidGrid, "grid must have at least one point");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) throw Error(ErrorCode::NonFinite, "grid value at position " + std::to_string(k));
        if (k > 0 && !(values[k] > values[k - 1]))
            throw Error(ErrorCode::InvalidGrid, "grid values must be strictly increasing (position " + std::to_string(k) + ")");
    }
    ArgGrid g;
    g.kind_ = Kind::OneD;
    g.values_ = std::move(values);
    return g;
}

ArgGrid ArgGrid::two_d(std::vector<Pixel> pixels) {
    if (pixels.empty()) throw Error(ErrorCode::InvalidGrid, "grid must have at least one pixel");
    std::set<std::pair<double, double>> seen;
    for (std::size_t k = 0; k < pixels.size(); ++k) {
        const Pixel& p = pixels[k];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.width) || !std::isfinite(p.height))
            throw Error(ErrorCode::NonFinite, "pixel " + std::to_string(k));
        if (!(p.width > 0.0) || !(p.height > 0.0))
            throw Error(ErrorCode::InvalidGrid, "pixel " + std::to_string(k) + " must have positive width and height");
        if (!seen.emplace(p.x, p.y).second)
            throw Error(ErrorCode::InvalidGrid, "duplicate pixel at position " + std::to_string(k));
    }
    ArgGrid g;
    g.kind_ = Kind::TwoD;
    g.pixels_ = std::move(pixels);
    return g;
}

ArgGrid ArgGrid::index(std::size_t d) {
    std::vector<double> v(d);
    for (std::size_t k = 0; k < d; ++k) v[k] = static_cast<double>(k + 1);
    return one_d(std::move(v));
}

ArgGrid ArgGrid::slice(std::size_t first, std::size_t count) const {
    if (first + count > size() || count == 0) throw Error(ErrorCode::DimensionMismatch, "grid slice out of range");
    if (is_2d()) return two_d({pixels_.begin() + first, pixels_.begin() + first + count});
    return one_d({values_.begin() + first, values_.begin() + first + count});
}

bool operator==(const ArgGrid& a, const ArgGrid& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == ArgGrid::Kind::OneD) return a.values_ == b.values_;
    if (a.pixels_.size() != b.pixels_.size()) return false;
    for (std::size_t k = 0; k < a.pixels_.size(); ++k) {
        const Pixel& p = a.pixels_[k];
        const Pixel& q = b.pixels_[k];
        if (p.x != q.x || p.y != q.y || p.width != q.width || p.height != q.height) return false;
    }
    return true;
}

CurveSet::CurveSet(ArgGrid grid, Matrix values, std::size_t obs_count)
    : grid_(std::move(grid)), values_(std::move(values)), obs_count_(obs_count) {
    if (static_cast<std::size_t>(values_.cols()) != grid_.size())
        throw Error(ErrorCode::DimensionMismatch, "curves have length " + std::to_string(values_.cols()) +
                                                      " but the grid has " + std::to_string(grid_.size()) + " points");
    if (values_.rows() < 2) throw Error(ErrorCode::TooFewCurves, "a curve set needs at least 2 curves");
    if (obs_count_ > curves()) throw Error(ErrorCode::InvalidArgument, "obs_count exceeds the number of curves");
    if (!values_.allFinite()) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i)
            for (Eigen::Index k = 0; k < values_.cols(); ++k)
                if (!std::isfinite(values_(i, k)))
                    throw Error(ErrorCode::NonFinite,
                                "curve " + std::to_string(i + 1) + ", position " + std::to_string(k + 1));
    }
}

CurveSet CurveSet::slice(std::size_t first, std::size_t count) const {
    return CurveSet(grid_.slice(first, count),
                    values_.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)),
                    obs_count_);
}

CurveSet create_curve_set(ArgGrid grid,
                          const std::vector<std::vector<double>>& observed,
                          const std::vector<std::vector<double>>& simulated) {
    const std::size_t d = grid.size();
    const std::size_t s = observed.size() + simulated.size();
    if (s < 2) throw Error(ErrorCode::TooFewCurves, "a curve set needs at least 2 curves");
    Matrix values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d));
    std::size_t row = 0;
    for (const auto* block : {&observed, &simulated}) {
        for (const auto& curve : *block) {
            if (curve.size() != d)
                throw Error(ErrorCode::DimensionMismatch, "curve " + std::to_string(row + 1) + " has length " +
                                                              std::to_string(curve.size()) + ", expected " +
                                                              std::to_string(d));
            for (std::size_t k = 0; k < d; ++k) values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) = curve[k];
            ++row;
        }
    }
    return CurveSet(std::move(grid), std::move(values), observed.size());
}

JointInfo validate_joint(std::span<const CurveSet> sets) {
    if (sets.empty()) throw Error(ErrorCode::InvalidArgument, "no curve sets given");
    JointInfo info;
    info.groups = sets.size();
    info.curves = sets.front().curves();
    for (const CurveSet& set : sets) {
        if (set.curves() != info.curves)
            throw Error(ErrorCode::InconsistentCurveCount, "curve sets have " + std::to_string(info.curves) +
                                                               " and " + std::to_string(set.curves()) + " curves");
        if (set.obs_count() != sets.front().obs_count())
            throw Error(ErrorCode::InconsistentObsCount, "curve sets disagree on the number of observed curves");
        info.dims.push_back(set.dim());
    }
    return info;
}

CurveSet concatenate(std::span<const CurveSet> sets) {
    const JointInfo info = validate_joint(sets);
    if (sets.size() == 1) return sets.front();
    std::size_t total = 0;
    for (std::size_t d : info.dims) total += d;
    Matrix values(static_cast<Eigen::Index>(info.curves), static_cast<Eigen::Index>(total));
    Eigen::Index col = 0;
    for (const CurveSet& set : sets) {
        values.middleCols(col, set.values().cols()) = set.values();
        col += set.values().cols();
    }
    return CurveSet(ArgGrid::index(total), std::move(values), sets.front().obs_count());
}

}  // namespace globenv
