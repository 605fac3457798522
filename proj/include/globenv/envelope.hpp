#ifndef GLOBENV_ENVELOPE_HPP
#define GLOBENV_ENVELOPE_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "globenv/curveset.hpp"
#include "globenv/measures.hpp"

namespace globenv {

/// Critical measure value chosen so that at most alpha*s curves are more
/// extreme, together with the index set of curves that are not.
struct CriticalValue {
    double value = 0.0;
    std::vector<std::size_t> index_set;
    /// alpha*s < 1: nothing can be excluded and the envelope is the data hull.
    bool full_hull = false;
};

CriticalValue critical_value(const MeasureResult& m, double alpha);

struct PInterval {
    double liberal = 0.0;       // p_-
    double conservative = 0.0;  // p_+
};

struct GlobalEnvelope {
    ArgGrid grid;
    MeasureType type = MeasureType::Erl;
    Alternative alternative = Alternative::TwoSided;
    double alpha = 0.05;
    Vector lower;
    Vector upper;
    /// Pointwise median for rank-type envelopes (display only), T_0 otherwise.
    Vector central;
    double critical = 0.0;
    std::vector<std::size_t> index_set;
    MeasureResult measures;
    std::optional<double> p;
    std::optional<PInterval> p_interval;
    /// One-sided envelopes keep the untested bound at the data extreme.
    bool lower_informative = true;
    bool upper_informative = true;
    /// Grid positions where the first (observed) curve leaves the envelope.
    std::vector<bool> mask;
    std::vector<std::string> warnings;
};

struct CombinedEnvelope {
    CombineMode mode = CombineMode::TwoStep;
    double alpha = 0.05;
    std::vector<GlobalEnvelope> components;
    /// Joint measure deciding the index set (second-stage ERL for two-step).
    MeasureResult joint;
    double critical = 0.0;
    std::vector<std::size_t> index_set;
    std::optional<double> p;
    std::optional<PInterval> p_interval;
    std::vector<std::string> warnings;
};

/// Positions where `curve` is strictly below an informative lower bound or
/// strictly above an informative upper bound.
template <typename Row>
std::vector<bool> exit_mask(const GlobalEnvelope& env, const Row& curve) {
    std::vector<bool> out(static_cast<std::size_t>(env.lower.size()));
    for (Eigen::Index k = 0; k < env.lower.size(); ++k)
        out[static_cast<std::size_t>(k)] = (env.lower_informative && curve(k) < env.lower(k)) ||
                                           (env.upper_informative && curve(k) > env.upper(k));
    return out;
}

template <typename Row>
bool exits(const GlobalEnvelope& env, const Row& curve) {
    for (Eigen::Index k = 0; k < env.lower.size(); ++k)
        if ((env.lower_informative && curve(k) < env.lower(k)) || (env.upper_informative && curve(k) > env.upper(k)))
            return true;
    return false;
}

/// Pointwise median over all curves.
Vector pointwise_median(const CurveSet& set);

GlobalEnvelope rank_envelope(const CurveSet& set, Alternative alt, double alpha);
GlobalEnvelope hull_envelope(const CurveSet& set, const MeasureResult& m, double alpha);
GlobalEnvelope parametric_envelope(const CurveSet& set, const MeasureSpec& spec, double alpha);

/// Envelope of the requested type at level alpha (no feasibility checks).
GlobalEnvelope build_envelope(const CurveSet& set, const MeasureSpec& spec, double alpha);

GlobalEnvelope central_region(const CurveSet& set, const MeasureSpec& spec, double coverage);
CombinedEnvelope central_region(std::span<const CurveSet> sets, const MeasureSpec& spec, double coverage,
                                CombineMode nstep = CombineMode::TwoStep);

GlobalEnvelope global_envelope_test(const CurveSet& set, const MeasureSpec& spec, double alpha);
CombinedEnvelope global_envelope_test(std::span<const CurveSet> sets, const MeasureSpec& spec, double alpha,
                                      CombineMode nstep = CombineMode::TwoStep);

CombinedEnvelope combined_envelope(std::span<const CurveSet> sets, const MeasureSpec& spec, double alpha,
                                   CombineMode nstep);

}  // namespace globenv

#endif
