#include <algorithm>
#include <functional>

#include "doctest.h"
#include "fixtures.hpp"
#include "globenv/applications.hpp"
#include "globenv/parallel.hpp"

using namespace globenv;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

PermutationOptions options(std::size_t nsim, std::uint64_t seed) {
    PermutationOptions o;
    o.nsim = nsim;
    o.seed = seed;
    return o;
}

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, double shift) {
    std::normal_distribution<double> normal(shift, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = normal(rng);
    return x;
}

MeasureSpec area_spec() {
    MeasureSpec s;
    s.type = MeasureType::Area;
    return s;
}

}  // namespace

TEST_CASE("default ecdf grid") {
    const std::vector<std::vector<double>> small{{3, 1}, {2, 3}};
    CHECK(default_ecdf_grid(small) == std::vector<double>{1, 2, 3});
    std::mt19937_64 rng(81);
    const std::vector<std::vector<double>> big{draw(rng, 80, 0), draw(rng, 80, 0)};
    const std::vector<double> grid = default_ecdf_grid(big);
    CHECK(grid.size() == 100);
    CHECK(grid.front() == std::min(*std::min_element(big[0].begin(), big[0].end()),
                                   *std::min_element(big[1].begin(), big[1].end())));
}

TEST_CASE("n-sample ecdf statistic curves") {
    std::mt19937_64 rng(82);
    const std::vector<std::vector<double>> samples{draw(rng, 30, 0), draw(rng, 20, 0), draw(rng, 25, 0)};
    const FTestResult r = necdf_test(samples, std::nullopt, options(99, 1));
    REQUIRE(r.statistics.size() == 3);
    CHECK(r.labels == std::vector<std::string>{"sample 1", "sample 2", "sample 3"});
    for (const CurveSet& set : r.statistics) {
        const Matrix& v = set.values();
        CHECK(v.minCoeff() >= 0.0);
        CHECK(v.maxCoeff() <= 1.0);
        CHECK((v.col(v.cols() - 1).array() == 1.0).all());
        for (Eigen::Index k = 1; k < v.cols(); ++k) CHECK((v.col(k).array() >= v.col(k - 1).array()).all());
    }
    const std::vector<double> grid{-1.0, 0.0, 1.0};
    CHECK(necdf_test(samples, grid, options(99, 1)).statistics.front().dim() == 3);
}

TEST_CASE("n-sample ecdf test detects a location shift") {
    std::mt19937_64 rng(83);
    const std::vector<std::vector<double>> samples{draw(rng, 60, 0), draw(rng, 60, 1.5)};
    const FTestResult r = necdf_test(samples, std::nullopt, options(199, 2), {"a", "b"});
    CHECK(r.p() <= 0.05);
    CHECK(std::any_of(r.masks[0].begin(), r.masks[0].end(), [](bool b) { return b; }));
    CHECK(r.labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("n-sample ecdf test input checks and determinism") {
    std::mt19937_64 rng(84);
    const std::vector<std::vector<double>> one{draw(rng, 5, 0)};
    CHECK(code_of([&] { necdf_test(one, std::nullopt, options(99, 1)); }) == ErrorCode::GroupTooSmall);
    const std::vector<std::vector<double>> empty{draw(rng, 5, 0), {}};
    CHECK(code_of([&] { necdf_test(empty, std::nullopt, options(99, 1)); }) == ErrorCode::EmptyGroup);
    const std::vector<std::vector<double>> samples{draw(rng, 15, 0), draw(rng, 12, 0)};
    CHECK(code_of([&] { necdf_test(samples, std::nullopt, options(9, 1)); }) == ErrorCode::AlphaInfeasible);
    set_thread_count(3);
    const FTestResult a = necdf_test(samples, std::nullopt, options(99, 5));
    set_thread_count(1);
    const FTestResult b = necdf_test(samples, std::nullopt, options(99, 5));
    CHECK(a.statistics[0].values() == b.statistics[0].values());
    CHECK(a.p() == b.p());
}

TEST_CASE("functional boxplot whiskers and outliers") {
    std::mt19937_64 rng(85);
    CurveSet base = fixtures::random_set(rng, 60, 10, 0);
    Matrix v = base.values();
    v.row(7).array() += 15.0;
    const CurveSet set(base.grid(), v, 0);
    const FBoxplotResult box = fboxplot(set, area_spec());
    const GlobalEnvelope& env = box.central.components.front();
    const Vector width = env.upper - env.lower;
    for (Eigen::Index k = 0; k < 10; ++k) {
        CHECK(box.whisker_lower[0](k) == doctest::Approx(env.lower(k) - 1.5 * width(k)));
        CHECK(box.whisker_upper[0](k) == doctest::Approx(env.upper(k) + 1.5 * width(k)));
    }
    CHECK(std::find(box.outlier_indices.begin(), box.outlier_indices.end(), 7) != box.outlier_indices.end());
    for (std::size_t i = 0; i < 60; ++i) {
        bool out = false;
        for (Eigen::Index k = 0; k < 10; ++k)
            out = out || set(i, static_cast<std::size_t>(k)) < box.whisker_lower[0](k) ||
                  set(i, static_cast<std::size_t>(k)) > box.whisker_upper[0](k);
        CHECK(out == (std::find(box.outlier_indices.begin(), box.outlier_indices.end(), i) != box.outlier_indices.end()));
    }
    CHECK(fboxplot(set, area_spec(), 0.5, 1e6).outlier_indices.empty());
    CHECK(code_of([&] { fboxplot(set, area_spec(), 0.5, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("outliers shrink as the factor grows") {
    std::mt19937_64 rng(86);
    const CurveSet a = fixtures::random_set(rng, 80, 8, 0);
    const CurveSet b = fixtures::random_set(rng, 80, 5, 0);
    const std::vector<CurveSet> sets{a, b};
    std::vector<std::size_t> previous;
    bool first = true;
    for (double factor : {0.1, 0.3, 0.6, 1.0, 1.5, 3.0}) {
        const FBoxplotResult box = fboxplot(sets, area_spec(), 0.5, factor);
        if (!first) CHECK(std::includes(previous.begin(), previous.end(), box.outlier_indices.begin(), box.outlier_indices.end()));
        previous = box.outlier_indices;
        first = false;
    }
}

TEST_CASE("identical curves give a zero-width boxplot without outliers") {
    Matrix v(6, 4);
    v.rowwise() = Eigen::RowVector4d(1, 2, 3, 4);
    const CurveSet set(ArgGrid::index(4), v, 0);
    MeasureSpec spec;
    spec.type = MeasureType::Erl;
    const FBoxplotResult box = fboxplot(set, spec);
    CHECK(box.whisker_lower[0] == box.whisker_upper[0]);
    CHECK(box.outlier_indices.empty());
}
