#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "fixtures.hpp"
#include "globenv/composite.hpp"
#include "globenv/parallel.hpp"

using namespace globenv;

namespace {

MeasureSpec erl_spec() {
    MeasureSpec s;
    s.type = MeasureType::Erl;
    return s;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

// Observed curve placed `offset` above a cloud of simulated curves.
CurveSet shifted(std::mt19937_64& rng, std::size_t s2, double offset) {
    CurveSet base = fixtures::random_set(rng, s2, 8, 1);
    Matrix v = base.values();
    v.row(0).array() += offset;
    return CurveSet(base.grid(), v, 1);
}

}  // namespace

TEST_CASE("identical stage sets give p_adj = 1") {
    std::mt19937_64 rng(51);
    const CurveSet set = fixtures::random_set(rng, 39, 6, 1);
    CompositeInput input{set, {set, set, set}};
    const AdjustedResult r = adjusted_test(input, erl_spec(), 0.25);
    CHECK(r.p_adj == 1.0);
    CHECK(std::all_of(r.stage_pvalues.begin(), r.stage_pvalues.end(), [&](double p) { return p == r.stage_pvalues[0]; }));
}

TEST_CASE("two stage sets with a smaller primary p give p_adj = 1/2") {
    std::mt19937_64 rng(52);
    CompositeInput input{shifted(rng, 39, 10.0), {shifted(rng, 39, 0.0)}};
    const AdjustedResult r = adjusted_test(input, erl_spec(), 0.5);
    REQUIRE(r.stage_pvalues[0] < r.stage_pvalues[1]);
    CHECK(r.p_adj == 0.5);
    CHECK(r.p_alpha == r.stage_pvalues[0]);
}

TEST_CASE("adjusted p and level follow from the stage p-values") {
    std::mt19937_64 rng(53);
    CompositeInput input{shifted(rng, 49, 1.0), {}};
    for (int i = 0; i < 19; ++i) input.replicates.push_back(shifted(rng, 49, 0.5 * (i % 4)));
    for (MeasureType type : {MeasureType::Erl, MeasureType::Rank, MeasureType::Area, MeasureType::St}) {
        MeasureSpec spec;
        spec.type = type;
        const AdjustedResult r = adjusted_test(input, spec, 0.1);
        const double p1 = r.stage_pvalues[0];
        const auto count = std::count_if(r.stage_pvalues.begin(), r.stage_pvalues.end(), [&](double p) { return p <= p1; });
        CHECK(r.p_adj == static_cast<double>(count) / 20.0);
        std::vector<double> sorted = r.stage_pvalues;
        std::sort(sorted.begin(), sorted.end());
        CHECK(r.p_alpha == sorted[1]);
        CHECK(r.p_adj > 0.0);
        CHECK(r.p_adj <= 1.0);
        CHECK(r.envelope.alpha == doctest::Approx(std::min(r.p_alpha, 1.0)));
        CHECK(r.stage_pvalues[0] == stage_p_value(input.primary, spec));
    }
}

TEST_CASE("composite input validation") {
    std::mt19937_64 rng(54);
    const CurveSet a = fixtures::random_set(rng, 20, 4, 1);
    const CurveSet b = fixtures::random_set(rng, 21, 4, 1);
    const CurveSet c = fixtures::random_set(rng, 20, 4, 0);
    CHECK(code_of([&] { adjusted_test({a, {}}, erl_spec(), 0.5); }) == ErrorCode::InconsistentReplicates);
    CHECK(code_of([&] { adjusted_test({a, {b}}, erl_spec(), 0.5); }) == ErrorCode::InconsistentReplicates);
    CHECK(code_of([&] { adjusted_test({a, {c}}, erl_spec(), 0.5); }) == ErrorCode::InconsistentReplicates);
    CHECK(code_of([&] { adjusted_test({a, {a}}, erl_spec(), 0.2); }) == ErrorCode::AlphaInfeasible);
}

TEST_CASE("ecdf and linspace") {
    const std::vector<double> sample{1, 2, 3};
    const std::vector<double> grid{1.5, 2.5};
    const std::vector<double> f = ecdf_at(sample, grid);
    CHECK(f[0] == doctest::Approx(1.0 / 3));
    CHECK(f[1] == doctest::Approx(2.0 / 3));
    CHECK(ecdf_at(sample, std::vector<double>{0.0, 3.0, 9.0}) == std::vector<double>{0, 1, 1});
    const std::vector<double> l = linspace(0, 1, 5);
    CHECK(l == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
}

TEST_CASE("gaussian ecdf pipeline") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> normal(3.0, 2.0);
    std::vector<double> data(60);
    for (double& x : data) x = normal(rng);
    const CompositeInput a = gaussian_ecdf_pipeline(data, 20, 30, 25, 7);
    CHECK(a.replicates.size() == 19);
    CHECK(a.primary.curves() == 30);
    CHECK(a.primary.dim() == 25);
    CHECK(a.primary.grid().values().front() == *std::min_element(data.begin(), data.end()));
    CHECK(a.primary.grid().values().back() == *std::max_element(data.begin(), data.end()));
    CHECK(a.primary.curve(0)(24) == 1.0);

    set_thread_count(4);
    const CompositeInput b = gaussian_ecdf_pipeline(data, 20, 30, 25, 7);
    set_thread_count(1);
    CHECK(a.primary.values() == b.primary.values());
    for (std::size_t i = 0; i < 19; ++i) CHECK(a.replicates[i].values() == b.replicates[i].values());

    const std::vector<double> one{1.0};
    CHECK(code_of([&] { gaussian_ecdf_pipeline(one, 20, 30, 25, 7); }) == ErrorCode::DegenerateData);
    const std::vector<double> flat(10, 2.0);
    CHECK(code_of([&] { gaussian_ecdf_pipeline(flat, 20, 30, 25, 7); }) == ErrorCode::DegenerateData);
}

TEST_CASE("lognormal data are rejected on the right tail side") {
    std::mt19937_64 rng(56);
    std::lognormal_distribution<double> lognormal(0.0, 1.0);
    std::vector<double> data(115);
    for (double& x : data) x = lognormal(rng);
    const CompositeInput input = gaussian_ecdf_pipeline(data, 99, 99, 50, 11);
    const AdjustedResult r = adjusted_test(input, erl_spec(), 0.05);
    CHECK(r.p_adj <= 0.05);
    CHECK(std::any_of(r.envelope.mask.begin(), r.envelope.mask.end(), [](bool b) { return b; }));
}
