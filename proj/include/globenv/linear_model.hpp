#ifndef GLOBENV_LINEAR_MODEL_HPP
#define GLOBENV_LINEAR_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "globenv/curveset.hpp"

namespace globenv {

/// Group labels 0..levels-1 for n subjects.
struct Grouping {
    std::vector<int> labels;
    int levels = 0;
    std::vector<std::string> names;

    std::size_t size() const noexcept { return labels.size(); }
    std::vector<std::size_t> counts() const;

    /// Labels in first-appearance order of the given strings.
    static Grouping from_strings(std::span<const std::string> values);
    static Grouping from_labels(std::vector<int> labels);
};

struct Factor {
    enum class Kind { Continuous, Categorical };
    std::string name;
    Kind kind = Kind::Continuous;
    std::vector<double> values;  // continuous
    Grouping groups;             // categorical
};

/// Subject-level covariates, one entry per curve.
class FactorTable {
public:
    FactorTable() = default;
    explicit FactorTable(std::size_t n) : n_(n) {}

    std::size_t rows() const noexcept { return n_; }
    const std::vector<Factor>& factors() const noexcept { return factors_; }

    void add_continuous(std::string name, std::vector<double> values);
    void add_categorical(std::string name, Grouping groups);

    const Factor* find(std::string_view name) const;

private:
    std::size_t n_ = 0;
    std::vector<Factor> factors_;
};

/// A model term: one factor or an interaction of several ("A:B").
using Term = std::vector<std::string>;

/// Parses "Y ~ A + B + A:B" (or just "A + B + A:B"); the intercept is implicit.
std::vector<Term> parse_formula(std::string_view formula);
std::string term_label(const Term& term);

/// Coefficients of one tested term as reported: `expansion` maps the fitted
/// (identifiable) coefficients in `columns` of the full design to `names.size()`
/// coefficients that sum to zero over each categorical factor.
struct TermBlock {
    std::string label;
    std::vector<std::size_t> columns;
    Matrix expansion;
    std::vector<std::string> names;
    bool categorical = false;
};

struct DesignPair {
    Matrix full;
    Matrix reduced;
    std::vector<std::size_t> tested_columns;
    std::vector<TermBlock> tested_terms;

    /// Number of reported coefficients of interest.
    std::size_t tested_count() const;
};

/// Builds full and reduced designs (intercept + terms). Categorical factors
/// are sum-to-zero coded. `varying` supplies per-subject values of r-varying
/// continuous regressors at one grid position; they shadow table entries.
DesignPair build_design(const FactorTable& factors, std::span<const Term> full_terms,
                        std::span<const Term> reduced_terms,
                        std::span<const std::pair<std::string, std::vector<double>>> varying = {});

/// Least squares through a Householder QR of the design.
class LeastSquares {
public:
    explicit LeastSquares(const Matrix& design);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(q_.cols()); }

    /// p x d coefficients for the n x d responses.
    Matrix coefficients(const Matrix& y) const;
    Matrix fitted(const Matrix& y) const;
    Matrix residuals(const Matrix& y) const;
    /// (X'X)^{-1} X' as a p x n matrix.
    const Matrix& pseudo_inverse() const noexcept { return pinv_; }

private:
    Matrix q_;
    Matrix pinv_;
};

/// Y* = fitted_reduced + P residuals_reduced with (P e)_i = e_{perm[i]}.
Vector freedman_lane_permute(const Vector& y, const Matrix& reduced, std::span<const std::size_t> perm);

}  // namespace globenv

#endif
