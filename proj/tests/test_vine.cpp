#include <doctest.h>

#include <cmath>

#include "oracle_support.hpp"
#include "vinecens/errors.hpp"
#include "vinecens/vine.hpp"

using namespace vinecens;

namespace {

DVineModel ccf3() {
    DVineModel m;
    m.d = 3;
    m.order = {0, 1, 2};
    m.edges = {make_copula(Family::Clayton, 3.0), make_copula(Family::Clayton, 3.0),
               make_copula(Family::Frank, 2.92)};
    return m;
}

DVineModel indep(int d) {
    DVineModel m;
    m.d = d;
    m.order.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) m.order[static_cast<std::size_t>(k)] = k;
    m.edges.assign(static_cast<std::size_t>(edge_count(d)), make_copula(Family::Independence, 0.0));
    return m;
}

// mixed-family 4-dimensional model used across the derivative checks
DVineModel mixed4() {
    DVineModel m;
    m.d = 4;
    m.order = {0, 1, 2, 3};
    m.edges = {make_copula(Family::Clayton, 3.0), make_copula(Family::Frank, 6.3),
               make_copula(Family::Gumbel, 2.5),  make_copula(Family::Frank, 1.7),
               make_copula(Family::Frank, 2.8),   make_copula(Family::Frank, 3.7)};
    return m;
}

CensoringPattern pattern_of(std::initializer_list<int> delta) {
    std::vector<int> d(delta);
    return censoring_pattern(d);
}

}  // namespace

TEST_CASE("density: independence and term-by-term oracle") {
    const DVineModel m3 = indep(3);
    CHECK(vine_density(m3, std::vector<double>{0.3, 0.6, 0.9}) == doctest::Approx(1.0));
    const DVineModel m4 = indep(4);
    CHECK(vine_density(m4, std::vector<double>{0.3, 0.6, 0.9, 0.2}) == doctest::Approx(1.0));

    // hand-composed product of pair terms for the 3-dimensional path
    const DVineModel m = ccf3();
    const double u1 = 0.5, u2 = 0.5, u3 = 0.5;
    const double t12 = copula_pdf(m.edges[0], u1, u2);
    const double t23 = copula_pdf(m.edges[1], u2, u3);
    const double h12 = hfunc(m.edges[0], u1, u2, HDir::UGivenV);
    const double h32 = hfunc(m.edges[1], u2, u3, HDir::VGivenU);
    const double expected = t12 * t23 * copula_pdf(m.edges[2], h12, h32);
    CHECK(vine_density(m, std::vector<double>{u1, u2, u3}) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("density integrates to one (quasi Monte Carlo)") {
    const DVineModel m = ccf3();
    const auto points = oracle::quasi_random(1000000, 3);
    double sum = 0.0;
    for (const auto& p : points) sum += vine_density(m, p);
    CHECK(sum / static_cast<double>(points.size()) == doctest::Approx(1.0).epsilon(0.01));

    const DVineModel m4 = mixed4();
    const auto points4 = oracle::quasi_random(1000000, 4);
    double sum4 = 0.0;
    for (const auto& p : points4) sum4 += vine_density(m4, p);
    CHECK(sum4 / static_cast<double>(points4.size()) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("density symmetry under path reversal") {
    const DVineModel m = mixed4();
    DVineModel reversed = m;
    reversed.order = {3, 2, 1, 0};
    reversed.edges = {m.edges[2], m.edges[1], m.edges[0],
                      m.edges[4], m.edges[3], m.edges[5]};
    for (const auto& u : oracle::quasi_random(50, 4)) {
        CHECK(vine_density(reversed, u) == doctest::Approx(vine_density(m, u)).epsilon(1e-10));
    }
}

TEST_CASE("conditional cdf: single conditioning equals the edge hfunc") {
    const DVineModel m = ccf3();
    const std::vector<double> u = {0.4, 0.7, 0.2};
    const std::vector<int> given = {1};
    CHECK(vine_conditional_cdf(m, 0, given, u) ==
          doctest::Approx(hfunc(m.edges[0], 0.4, 0.7, HDir::UGivenV)));
    const DVineModel mi = indep(3);
    CHECK(vine_conditional_cdf(mi, 0, std::vector<int>{1, 2}, u) == doctest::Approx(0.4));
}

TEST_CASE("conditional cdf rejects requests off the structure") {
    const DVineModel m = mixed4();
    const std::vector<double> u = {0.4, 0.7, 0.2, 0.6};
    CHECK_THROWS_AS(vine_conditional_cdf(m, 0, std::vector<int>{3}, u), StructureError);
    CHECK_THROWS_AS(vine_conditional_cdf(m, 0, std::vector<int>{2, 3}, u), StructureError);
    CHECK_THROWS_AS(vine_conditional_cdf(m, 1, std::vector<int>{0, 2}, u), StructureError);
}

TEST_CASE("conditional cdf matches finite differences of the integrated joint cdf") {
    const DVineModel m = mixed4();
    const std::vector<std::vector<double>> points = {{0.3, 0.5, 0.6, 0.5},
                                                     {0.7, 0.4, 0.3, 0.5},
                                                     {0.5, 0.8, 0.7, 0.5},
                                                     {0.2, 0.3, 0.8, 0.5},
                                                     {0.6, 0.6, 0.4, 0.5}};
    const CensoringPattern all_censored = pattern_of({0, 0, 0, 0});
    for (const auto& p : points) {
        // C_{1|23} = d^2 C(u1,u2,u3,1) / du2 du3 divided by c23(u2,u3)
        auto joint3 = [&](std::vector<double> q) {
            q.push_back(1.0 - 1e-9);
            return vine_partial_derivative(m, all_censored, q, 41);
        };
        const double numer = oracle::mixed_central_diff(
            joint3, {p[0], p[1], p[2]}, {1, 2}, 0, 2e-3);
        const double denom = copula_pdf(m.edges[1], p[1], p[2]);
        const double expected = numer / denom;
        const double got = vine_conditional_cdf(m, 0, std::vector<int>{1, 2}, p);
        CHECK(got == doctest::Approx(expected).epsilon(1e-4 / std::max(expected, 0.05)));
    }
}

TEST_CASE("partial derivative: complete pattern is the density") {
    const DVineModel m = mixed4();
    const std::vector<double> u = {0.3, 0.6, 0.4, 0.7};
    CHECK(vine_partial_derivative(m, pattern_of({1, 1, 1, 1}), u) ==
          doctest::Approx(vine_density(m, u)).epsilon(1e-12));
}

TEST_CASE("partial derivative: independence collapses case 3(d) to a product") {
    const DVineModel m = indep(4);
    const std::vector<double> u = {0.3, 0.6, 0.4, 0.7};
    CHECK(vine_partial_derivative(m, pattern_of({0, 1, 1, 0}), u) ==
          doctest::Approx(0.3 * 0.7).epsilon(1e-10));
}

TEST_CASE("partial derivative: uniform margins of the all-censored case") {
    const DVineModel m = mixed4();
    for (double u1 : {0.2, 0.5, 0.8}) {
        const std::vector<double> u = {u1, 1.0 - 1e-9, 1.0 - 1e-9, 1.0 - 1e-9};
        CHECK(vine_partial_derivative(m, pattern_of({0, 0, 0, 0}), u) ==
              doctest::Approx(u1).epsilon(1e-3));
    }
    const DVineModel m3 = ccf3();
    for (double u2 : {0.3, 0.7}) {
        const std::vector<double> u = {1.0 - 1e-9, u2, 1.0 - 1e-9};
        CHECK(vine_partial_derivative(m3, pattern_of({0, 0, 0}), u) ==
              doctest::Approx(u2).epsilon(1e-3));
    }
}

TEST_CASE("partial derivative consistency: one more derivative per coordinate") {
    // differentiating the k-uncensored case in a further coordinate reproduces
    // the (k+1)-uncensored case
    const DVineModel m = mixed4();
    const std::vector<std::vector<double>> points = {{0.3, 0.5, 0.6, 0.4},
                                                     {0.6, 0.4, 0.5, 0.7},
                                                     {0.45, 0.65, 0.35, 0.55},
                                                     {0.7, 0.3, 0.6, 0.5},
                                                     {0.5, 0.5, 0.5, 0.5}};
    const std::vector<std::pair<std::vector<int>, int>> steps = {
        {{0, 0, 0, 0}, 0}, {{0, 0, 0, 0}, 1}, {{0, 0, 0, 0}, 3},
        {{1, 0, 0, 0}, 3}, {{0, 1, 0, 0}, 2}, {{0, 0, 0, 1}, 1},
        {{1, 0, 0, 1}, 1}, {{0, 1, 1, 0}, 0}, {{1, 1, 0, 0}, 2},
        {{1, 1, 1, 0}, 3}, {{0, 1, 1, 1}, 0}};
    for (const auto& [base, coord] : steps) {
        std::vector<int> next = base;
        next[static_cast<std::size_t>(coord)] = 1;
        const CensoringPattern base_pattern = censoring_pattern(base);
        const CensoringPattern next_pattern = censoring_pattern(next);
        for (const auto& p : points) {
            auto f = [&](std::vector<double> q) {
                return vine_partial_derivative(m, base_pattern, q, 21);
            };
            const double fd = oracle::mixed_central_diff(f, p, {coord}, 0, 1e-3);
            const double direct = vine_partial_derivative(m, next_pattern, p, 21);
            CHECK(direct == doctest::Approx(fd).epsilon(1e-3));
        }
    }
}

TEST_CASE("all-censored cdf agrees with a vine sampling estimate (d=3)") {
    const DVineModel m = ccf3();
    const auto sample = sample_vine(m, 1000000, 99);
    const std::vector<double> point = {0.5, 0.6, 0.4};
    std::size_t below = 0;
    for (const auto& s : sample)
        if (s[0] <= point[0] && s[1] <= point[1] && s[2] <= point[2]) ++below;
    const double estimate = static_cast<double>(below) / static_cast<double>(sample.size());
    const double se = std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(sample.size()));
    const double value = vine_partial_derivative(m, pattern_of({0, 0, 0}), point);
    CHECK(std::abs(value - estimate) < 3.0 * se);
}

TEST_CASE("sample_vine: independence and dependence calibration") {
    const DVineModel mi = indep(3);
    const auto si = sample_vine(mi, 10000, 5);
    std::vector<std::array<double, 2>> pair12(si.size());
    for (std::size_t i = 0; i < si.size(); ++i) pair12[i] = {si[i][0], si[i][1]};
    CHECK(std::abs(oracle::kendall_tau(pair12)) < 0.03);

    const DVineModel m = ccf3();
    const auto s = sample_vine(m, 10000, 5);
    std::vector<std::array<double, 2>> e12(s.size()), e23(s.size());
    std::vector<double> u2(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        e12[i] = {s[i][0], s[i][1]};
        e23[i] = {s[i][1], s[i][2]};
        u2[i] = s[i][1];
    }
    CHECK(oracle::kendall_tau(e12) == doctest::Approx(0.60).epsilon(0.03 / 0.60));
    CHECK(oracle::kendall_tau(e23) == doctest::Approx(0.60).epsilon(0.03 / 0.60));
    CHECK(oracle::ks_uniform_pvalue(u2) > 0.01);

    // first-tree neighbours of the 4-dimensional mixed model
    const DVineModel m4 = mixed4();
    const auto s4 = sample_vine(m4, 10000, 29);
    for (int k = 0; k < 3; ++k) {
        std::vector<std::array<double, 2>> pair(s4.size());
        for (std::size_t i = 0; i < s4.size(); ++i)
            pair[i] = {s4[i][static_cast<std::size_t>(k)], s4[i][static_cast<std::size_t>(k + 1)]};
        const double target = theta_to_tau(m4.edges[static_cast<std::size_t>(k)].family,
                                           m4.edges[static_cast<std::size_t>(k)].theta);
        CHECK(std::abs(oracle::kendall_tau(pair) - target) < 0.03);
    }
}

TEST_CASE("sample_vine density self-consistency") {
    // E[1/c(U)] over draws from c equals the cube volume; the all-Frank model
    // keeps the density bounded away from zero so the estimator has finite
    // variance
    DVineModel m;
    m.d = 3;
    m.order = {0, 1, 2};
    m.edges = {make_copula(Family::Frank, 2.92), make_copula(Family::Frank, 2.92),
               make_copula(Family::Frank, 2.0)};
    const auto s = sample_vine(m, 200000, 17);
    double acc = 0.0;
    for (const auto& p : s) acc += 1.0 / vine_density(m, p);
    CHECK(acc / static_cast<double>(s.size()) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("censoring patterns identify the joint indicator") {
    CHECK(pattern_label(censoring_pattern(std::vector<int>{1, 1, 1, 1})) == "D(1,2,3,4)");
    CHECK(pattern_label(censoring_pattern(std::vector<int>{1, 0, 0, 1})) == "D(1,4)");
    CHECK(pattern_label(censoring_pattern(std::vector<int>{0, 0, 0, 0})) == "D()");
    CHECK_THROWS_AS(censoring_pattern(std::vector<int>{1, 2, 0, 0}), DataError);
}

TEST_CASE("model validation") {
    DVineModel bad = ccf3();
    bad.order = {0, 0, 2};
    CHECK_THROWS_AS(validate_model(bad), StructureError);
    DVineModel wrong_edges = ccf3();
    wrong_edges.edges.pop_back();
    CHECK_THROWS_AS(validate_model(wrong_edges), StructureError);
    CHECK(edge_labels(mixed4()) ==
          std::vector<std::string>{"12", "23", "34", "13;2", "24;3", "14;23"});
}
