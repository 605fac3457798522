#include "globenv/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace globenv {

namespace {

std::vector<std::size_t> sorted_order(std::span<const double> column) {
    std::vector<std::size_t> order(column.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
    return order;
}

template <typename Fn>
Matrix map_columns(const CurveSet& set, Fn&& fn) {
    const Matrix& values = set.values();
    Matrix out(values.rows(), values.cols());
    std::vector<double> column(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) column[static_cast<std::size_t>(i)] = values(i, k);
        const std::vector<double> ranked = fn(std::span<const double>(column));
        for (Eigen::Index i = 0; i < values.rows(); ++i) out(i, k) = ranked[static_cast<std::size_t>(i)];
    }
    return out;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> column) {
    const std::size_t n = column.size();
    const std::vector<std::size_t> order = sorted_order(column);
    std::vector<double> ranks(n);
    std::size_t first = 0;
    while (first < n) {
        std::size_t last = first;
        while (last + 1 < n && column[order[last + 1]] == column[order[first]]) ++last;
        // positions first..last (0-based) share the mean of ranks first+1..last+1
        const double rank = 0.5 * static_cast<double>(first + last) + 1.0;
        for (std::size_t p = first; p <= last; ++p) ranks[order[p]] = rank;
        first = last + 1;
    }
    return ranks;
}

std::vector<double> continuous_column_ranks(std::span<const double> column, bool& degenerate) {
    const std::size_t n = column.size();
    if (n < 3) throw Error(ErrorCode::TooFewCurves, "continuous ranks need at least 3 curves");
    const std::vector<std::size_t> order = sorted_order(column);
    std::vector<double> v(n);
    for (std::size_t p = 0; p < n; ++p) v[p] = column[order[p]];

    const double s = static_cast<double>(n);
    std::vector<double> ranks(n);
    std::size_t first = 0;
    while (first < n) {
        std::size_t last = first;
        while (last + 1 < n && v[last + 1] == v[first]) ++last;
        if (last > first) {
            // tied block at 1-based positions i..j gets (i + j)/2 - 1/2
            const double c = 0.5 * static_cast<double>(first + last + 1);
            for (std::size_t p = first; p <= last; ++p) ranks[order[p]] = c;
        } else {
            const std::size_t p = first;
            double c;
            if (p == 0) {
                const double denom = v[n - 1] - v[1];
                if (denom > 0.0) {
                    c = std::exp(-(v[1] - v[0]) / denom);
                } else {
                    degenerate = true;
                    c = 0.5;
                }
            } else if (p == n - 1) {
                const double denom = v[n - 2] - v[0];
                if (denom > 0.0) {
                    c = s - std::exp(-(v[n - 1] - v[n - 2]) / denom);
                } else {
                    degenerate = true;
                    c = s - 0.5;
                }
            } else {
                c = static_cast<double>(p) + (v[p] - v[p - 1]) / (v[p + 1] - v[p - 1]);
            }
            ranks[order[p]] = c;
        }
        first = last + 1;
    }
    return ranks;
}

double sided_rank(double raw, double s, Alternative alt) {
    switch (alt) {
    case Alternative::Less: return raw;
    case Alternative::Greater: return s + 1.0 - raw;
    case Alternative::TwoSided: return std::min(raw, s + 1.0 - raw);
    }
    return raw;
}

double sided_continuous_rank(double c, double s, Alternative alt) {
    switch (alt) {
    case Alternative::Less: return c;
    case Alternative::Greater: return s - c;
    case Alternative::TwoSided: return std::min(c, s - c);
    }
    return c;
}

PointwiseRanks pointwise_ranks(const CurveSet& set, Alternative alt) {
    PointwiseRanks out;
    out.raw = map_columns(set, [](std::span<const double> col) { return average_ranks(col); });
    const double s = static_cast<double>(set.curves());
    out.sided = out.raw.unaryExpr([&](double r) { return sided_rank(r, s, alt); });
    return out;
}

ContinuousRanks continuous_ranks(const CurveSet& set, Alternative alt) {
    if (set.curves() < 3) throw Error(ErrorCode::TooFewCurves, "continuous ranks need at least 3 curves");
    ContinuousRanks out;
    bool degenerate = false;
    out.values = map_columns(set, [&](std::span<const double> col) { return continuous_column_ranks(col, degenerate); });
    out.degenerate = degenerate;
    const double s = static_cast<double>(set.curves());
    out.sided = out.values.unaryExpr([&](double c) { return sided_continuous_rank(c, s, alt); });
    return out;
}

}  // namespace globenv
