#include <cmath>
#include <functional>

#include "doctest.h"
#include "fixtures.hpp"
#include "globenv/measures.hpp"
#include "oracle.hpp"

using namespace globenv;

namespace {

MeasureSpec spec_of(MeasureType type, Alternative alt = Alternative::TwoSided, double beta = 2.5) {
    MeasureSpec s;
    s.type = type;
    s.alternative = alt;
    s.beta_percent = beta;
    return s;
}

std::vector<double> values(const MeasureResult& m) { return {m.values.data(), m.values.data() + m.values.size()}; }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("extreme rank and ERL of D1") {
    const CurveSet d1 = fixtures::d1();
    CHECK(values(extreme_rank(d1, Alternative::TwoSided)) == std::vector<double>{1, 2, 2, 1});
    CHECK(values(erl(d1, Alternative::TwoSided)) == std::vector<double>{0, 0.5, 0.5, 0});
    const auto rows = oracle::rows_of(d1);
    CHECK(values(extreme_rank(d1, Alternative::Less)) == oracle::extreme_rank(rows, Alternative::Less));
    CHECK(values(erl(d1, Alternative::Less)) == oracle::erl(rows, Alternative::Less));
}

TEST_CASE("identical curves are equally extreme") {
    const CurveSet same = fixtures::from_rows({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
    const Vector r = extreme_rank(same, Alternative::TwoSided).values;
    CHECK(r.minCoeff() == r.maxCoeff());
    CHECK(erl(same, Alternative::TwoSided).values.isZero());
}

TEST_CASE("cont and area of D0") {
    const CurveSet d0 = fixtures::column({1, 2, 4});
    const Vector c = cont(d0, Alternative::Less).values;
    const Vector a = area(d0, Alternative::Less).values;
    CHECK(c(0) == doctest::Approx(0.20218).epsilon(1e-4));
    CHECK(c(1) == doctest::Approx(0.44444).epsilon(1e-4));
    CHECK(c(2) == doctest::Approx(0.95489).epsilon(1e-4));
    CHECK(a(0) == doctest::Approx((1 - (1 - std::exp(-0.5))) / 3).epsilon(1e-14));
    for (int i = 0; i < 3; ++i) CHECK(a(i) == doctest::Approx(c(i)).epsilon(1e-14));
}

TEST_CASE("cont takes the deepest excursion and duplicates tie") {
    const CurveSet set = fixtures::from_rows({{0, 0}, {1, 1}, {2, -5}, {3, 3}, {0, 0}});
    const Vector c = cont(set, Alternative::TwoSided).values;
    const auto rows = oracle::rows_of(set);
    const std::vector<double> expected = oracle::cont(rows, Alternative::TwoSided);
    for (int i = 0; i < 5; ++i) CHECK(oracle::close(c(i), expected[static_cast<std::size_t>(i)]));
    CHECK(c(0) == c(4));
}

TEST_CASE("area stays below the scaled extreme rank") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const CurveSet set = fixtures::random_set(rng, 5 + rep, 7, 0);
        const Vector a = area(set, Alternative::TwoSided).values;
        const Vector r = extreme_rank(set, Alternative::TwoSided).values / static_cast<double>(set.curves());
        CHECK((a.array() <= r.array()).all());
    }
}

TEST_CASE("area ranks curves that share an extreme rank") {
    const CurveSet set = fixtures::from_rows({{0, 5}, {1, 0}, {2, 2}, {3, 3}, {4, 4}});
    const auto rows = oracle::rows_of(set);
    const std::vector<double> r = oracle::extreme_rank(rows, Alternative::TwoSided);
    const std::vector<double> expected = oracle::area(rows, Alternative::TwoSided);
    CHECK(r[0] == r[1]);
    CHECK(expected[0] != expected[1]);
    const Vector a = area(set, Alternative::TwoSided).values;
    for (int i = 0; i < 5; ++i) CHECK(oracle::close(a(i), expected[static_cast<std::size_t>(i)]));
}

TEST_CASE("qdir on 1..5") {
    const CurveSet col = fixtures::column({1, 2, 3, 4, 5});
    const MeasureResult q = qdir(col, spec_of(MeasureType::Qdir, Alternative::TwoSided, 25));
    CHECK(q.values(4) == 2.0);
    CHECK(q.values(0) == 2.0);
    CHECK(q.orientation == Orientation::LargerExtreme);
    CHECK(code_of([] { qdir(fixtures::column({2, 2, 2, 2, 2}), spec_of(MeasureType::Qdir, Alternative::TwoSided, 25)); }) ==
          ErrorCode::DegenerateScale);
    CHECK(code_of([] { qdir(fixtures::column({1, 2, 3, 4, 5}), spec_of(MeasureType::Qdir, Alternative::TwoSided, 20)); }) ==
          ErrorCode::BetaTooSmall);
    CHECK(quantile_type7(std::vector<double>{1, 2, 3, 4, 5}, 0.25) == 2.0);
    CHECK(quantile_type7(std::vector<double>{1, 2, 3, 4}, 0.5) == 2.5);
}

TEST_CASE("st on 1..5") {
    const CurveSet col = fixtures::column({1, 2, 3, 4, 5});
    const MeasureResult s = st(col, spec_of(MeasureType::St));
    CHECK(s.values(4) == doctest::Approx(2.0 / std::sqrt(2.5)).epsilon(1e-14));
    CHECK(s.values(4) == doctest::Approx(1.26491).epsilon(1e-5));
    const MeasureResult shifted = st(fixtures::column({11, 12, 13, 14, 15}), spec_of(MeasureType::St));
    for (int i = 0; i < 5; ++i) CHECK(shifted.values(i) == doctest::Approx(s.values(i)).epsilon(1e-12));
    CHECK(code_of([] { st(fixtures::column({2, 2, 2}), spec_of(MeasureType::St)); }) == ErrorCode::DegenerateScale);
}

TEST_CASE("unscaled on 1..5") {
    const CurveSet col = fixtures::column({1, 2, 3, 4, 5});
    CHECK(values(unscaled(col, spec_of(MeasureType::Unscaled))) == std::vector<double>{2, 1, 0, 1, 2});
    MeasureSpec provided = spec_of(MeasureType::Unscaled);
    provided.central = Vector::Constant(1, 3.0);
    CHECK(values(unscaled(col, provided)) == std::vector<double>{2, 1, 0, 1, 2});
    const Vector scaled = unscaled(fixtures::column({2.5, 5, 7.5, 10, 12.5}), spec_of(MeasureType::Unscaled)).values;
    for (int i = 0; i < 5; ++i) CHECK(scaled(i) == doctest::Approx(2.5 * unscaled(col, provided).values(i)));
}

TEST_CASE("ERL refines the extreme rank ordering") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t s = 4 + rep % 40;
        const CurveSet set = fixtures::random_set(rng, s, 1 + rep % 9, 0, rep % 3 == 0 ? 5 : 0);
        const Vector r = extreme_rank(set, Alternative::TwoSided).values;
        const Vector e = erl(set, Alternative::TwoSided).values;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            for (Eigen::Index j = 0; j < r.size(); ++j)
                if (r(i) < r(j)) CHECK(e(i) < e(j));
        CHECK(e.minCoeff() == 0.0);
        CHECK(e.maxCoeff() <= static_cast<double>(s - 1) / static_cast<double>(s));
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            const double scaled = e(i) * static_cast<double>(s);
            CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
        }
    }
}

TEST_CASE("rank and ERL ignore increasing column transforms and global negation") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 30; ++rep) {
        const CurveSet set = fixtures::random_set(rng, 10 + rep, 6, 0);
        Matrix transformed = set.values();
        for (Eigen::Index k = 0; k < transformed.cols(); ++k)
            transformed.col(k) = transformed.col(k).unaryExpr([k](double v) { return std::exp(v * (1.0 + static_cast<double>(k))); });
        const CurveSet other(set.grid(), transformed, 0);
        const CurveSet negated(set.grid(), -set.values(), 0);
        for (MeasureType type : {MeasureType::Rank, MeasureType::Erl}) {
            const Vector a = forder(set, spec_of(type)).values;
            const Vector b = forder(other, spec_of(type)).values;
            for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
        }
        for (MeasureType type : {MeasureType::Rank, MeasureType::Erl}) {
            CHECK(forder(set, spec_of(type)).values == forder(negated, spec_of(type)).values);
        }
    }
}

TEST_CASE("all measures agree with the direct formulas on small integer sets") {
    std::mt19937_64 rng(24);
    const MeasureType types[] = {MeasureType::Rank, MeasureType::Erl, MeasureType::Cont, MeasureType::Area,
                                 MeasureType::Qdir, MeasureType::St, MeasureType::Unscaled};
    const Alternative alts[] = {Alternative::TwoSided, Alternative::Less, Alternative::Greater};
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t s = 3 + rep % 4, d = 1 + rep % 3;
        const CurveSet set = fixtures::random_set(rng, s, d, 0, 6);
        const auto rows = oracle::rows_of(set);
        for (MeasureType type : types)
            for (Alternative alt : alts) {
                const MeasureSpec spec = spec_of(type, alt, 40);
                std::vector<double> expected;
                bool degenerate = false;
                switch (type) {
                case MeasureType::Rank: expected = oracle::extreme_rank(rows, alt); break;
                case MeasureType::Erl: expected = oracle::erl(rows, alt); break;
                case MeasureType::Cont: expected = oracle::cont(rows, alt); break;
                case MeasureType::Area: expected = oracle::area(rows, alt); break;
                default: expected = oracle::deviation(rows, type, alt, 40, degenerate);
                }
                if (degenerate) {
                    CHECK(code_of([&] { forder(set, spec); }) == ErrorCode::DegenerateScale);
                    continue;
                }
                const Vector got = forder(set, spec).values;
                for (std::size_t i = 0; i < s; ++i) CHECK(oracle::close(got(static_cast<Eigen::Index>(i)), expected[i]));
            }
    }
}

TEST_CASE("two-step combining applies a one-sided ERL to oriented component measures") {
    std::mt19937_64 rng(25);
    const CurveSet a = fixtures::random_set(rng, 30, 5, 0);
    const CurveSet b = fixtures::random_set(rng, 30, 4, 0);
    const std::vector<CurveSet> sets{a, b};
    for (MeasureType type : {MeasureType::Area, MeasureType::St}) {
        const MeasureSpec spec = spec_of(type);
        const MeasureResult joint = forder(sets, spec, CombineMode::TwoStep);
        Matrix stage(30, 2);
        const double sign = orientation_of(type) == Orientation::LargerExtreme ? -1.0 : 1.0;
        stage.col(0) = sign * forder(a, spec).values;
        stage.col(1) = sign * forder(b, spec).values;
        const auto expected = oracle::erl(oracle::rows_of(CurveSet(ArgGrid::index(2), stage, 0)), Alternative::Less);
        for (int i = 0; i < 30; ++i) CHECK(joint.values(i) == expected[static_cast<std::size_t>(i)]);
        CHECK(joint.orientation == Orientation::SmallerExtreme);
    }
    const MeasureResult one = forder(sets, spec_of(MeasureType::Erl), CombineMode::OneStep);
    CHECK(one.values == erl(concatenate(sets), Alternative::TwoSided).values);
    const std::vector<CurveSet> single{a};
    CHECK(forder(single, spec_of(MeasureType::Area), CombineMode::TwoStep).values ==
          area(a, Alternative::TwoSided).values);
}

TEST_CASE("ordering and Monte Carlo p-values") {
    MeasureResult m;
    m.values = Vector(5);
    m.values << 0.4, 0.1, 0.4, 0.0, 0.9;
    m.orientation = Orientation::SmallerExtreme;
    CHECK(extremeness_order(m) == std::vector<std::size_t>{3, 1, 0, 2, 4});
    CHECK(mc_p_value(m, 0) == doctest::Approx(0.8));
    m.orientation = Orientation::LargerExtreme;
    CHECK(extremeness_order(m) == std::vector<std::size_t>{4, 0, 2, 1, 3});
    CHECK(mc_p_value(m, 0) == doctest::Approx(0.6));
    CHECK(parse_measure_type("area") == MeasureType::Area);
    CHECK(to_string(MeasureType::Unscaled) == "unscaled");
    CHECK_THROWS_AS(parse_measure_type("bogus"), Error);
}
