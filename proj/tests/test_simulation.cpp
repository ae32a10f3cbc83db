#include <doctest.h>

#include <cmath>

#include "oracle_support.hpp"
#include "vinecens/errors.hpp"
#include "vinecens/simulation.hpp"

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

StudyConfig table_study(bool heavy) {
    StudyConfig cfg;
    cfg.model = ccf3();
    cfg.margins = {{3.39, 3.32}, {4.20, 2.21}, {3.53, 2.68}};
    cfg.censor = heavy ? WeibullMargin{6.72, 2.17} : WeibullMargin{6.72, 3.11};
    return cfg;
}

}  // namespace

TEST_CASE("performance measures: direct arithmetic") {
    const std::vector<double> est = {2.9, 3.0, 3.1};
    const PerfMeasures pm = performance_measures(est, 3.0);
    CHECK(pm.mean == doctest::Approx(3.0));
    CHECK(pm.bias == doctest::Approx(0.0));
    CHECK(pm.s2 == doctest::Approx(0.02 / 3.0).epsilon(1e-12));
    CHECK(pm.mse == doctest::Approx(pm.bias * pm.bias + pm.s2).epsilon(1e-12));

    const std::vector<double> constant(7, 2.5);
    const PerfMeasures c = performance_measures(constant, 2.0);
    CHECK(c.bias == doctest::Approx(0.5));
    CHECK(c.s2 == doctest::Approx(0.0));
    CHECK(c.mse == doctest::Approx(0.25));
}

TEST_CASE("generated marginal censoring rates match the design") {
    StudyConfig heavy = table_study(true);
    heavy.n = 10000;
    heavy.seed = 61;
    const auto data = generate_dataset(heavy, 0);
    std::array<double, 3> rate{};
    for (const ObservedCluster& cl : data)
        for (std::size_t j = 0; j < 3; ++j) rate[j] += cl.delta[j] == 0 ? 1.0 : 0.0;
    for (double& r : rate) r /= static_cast<double>(data.size());
    CHECK(rate[0] == doctest::Approx(0.82).epsilon(0.02 / 0.82));
    CHECK(rate[1] == doctest::Approx(0.49).epsilon(0.02 / 0.49));
    CHECK(rate[2] == doctest::Approx(0.67).epsilon(0.02 / 0.67));

    StudyConfig moderate = table_study(false);
    moderate.n = 10000;
    moderate.seed = 62;
    const auto data2 = generate_dataset(moderate, 0);
    std::array<double, 3> rate2{};
    for (const ObservedCluster& cl : data2)
        for (std::size_t j = 0; j < 3; ++j) rate2[j] += cl.delta[j] == 0 ? 1.0 : 0.0;
    for (double& r : rate2) r /= static_cast<double>(data2.size());
    CHECK(std::abs(rate2[0] - 0.52) < 0.02);
    CHECK(std::abs(rate2[1] - 0.12) < 0.02);
    CHECK(std::abs(rate2[2] - 0.29) < 0.02);
}

TEST_CASE("no censor configuration yields complete data") {
    StudyConfig cfg = table_study(false);
    cfg.censor.reset();
    cfg.n = 50;
    const auto data = generate_dataset(cfg, 0);
    for (const ObservedCluster& cl : data)
        for (int d : cl.delta) CHECK(d == 1);
}

TEST_CASE("decreasing the censoring scale increases the censored fraction") {
    StudyConfig cfg = table_study(false);
    cfg.n = 4000;
    cfg.seed = 17;
    auto fraction = [&](double lambda) {
        StudyConfig c = cfg;
        c.censor = WeibullMargin{6.72, lambda};
        const auto data = generate_dataset(c, 0);
        double censored = 0.0;
        for (const ObservedCluster& cl : data)
            for (int d : cl.delta) censored += d == 0 ? 1.0 : 0.0;
        return censored / (3.0 * static_cast<double>(data.size()));
    };
    CHECK(fraction(2.17) > fraction(3.11));
}

TEST_CASE("empirical tau of generated complete data matches the model") {
    StudyConfig cfg = table_study(false);
    cfg.censor.reset();
    cfg.n = 10000;
    cfg.seed = 23;
    const auto data = generate_dataset(cfg, 0);
    std::vector<std::array<double, 2>> t12(data.size()), t23(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        // times are monotone transforms of the copula draws, tau is rank-based
        t12[i] = {-data[i].y[0], -data[i].y[1]};
        t23[i] = {-data[i].y[1], -data[i].y[2]};
    }
    CHECK(std::abs(oracle::kendall_tau(t12) - 0.60) < 0.02);
    CHECK(std::abs(oracle::kendall_tau(t23) - 0.60) < 0.02);
}

TEST_CASE("study determinism and single-replicate degeneracy") {
    StudyConfig cfg = table_study(false);
    cfg.censor.reset();
    cfg.n = 120;
    cfg.replicates = 1;
    cfg.seed = 99;
    cfg.margin_method = MarginMethod::Known;
    const StudyResult a = run_study(cfg);
    const StudyResult b = run_study(cfg);
    for (std::size_t e = 0; e < a.theta.size(); ++e) {
        CHECK(a.theta[e].mean == b.theta[e].mean);
        CHECK(a.theta[e].s2 == doctest::Approx(0.0));
        CHECK(a.theta[e].mse == doctest::Approx(a.theta[e].bias * a.theta[e].bias).epsilon(1e-12));
    }
}

TEST_CASE("small complete-data study lands near the truth") {
    StudyConfig cfg = table_study(false);
    cfg.censor.reset();
    cfg.n = 200;
    cfg.replicates = 5;
    cfg.seed = 42;
    cfg.margin_method = MarginMethod::Known;
    const StudyResult r = run_study(cfg);
    CHECK(r.completed == 5);
    CHECK(std::abs(r.tau[0].mean - 0.60) < 0.03);
    CHECK(std::abs(r.tau[1].mean - 0.60) < 0.03);
    CHECK(std::abs(r.tau[2].mean - 0.30) < 0.04);
}

TEST_CASE("config validation") {
    StudyConfig cfg = table_study(false);
    cfg.n = 5;
    CHECK_THROWS_AS(generate_dataset(cfg, 0), DataError);
    cfg.n = 100;
    cfg.margins.pop_back();
    CHECK_THROWS_AS(generate_dataset(cfg, 0), DataError);
    CHECK_THROWS_AS(performance_measures(std::vector<double>{}, 1.0), DataError);
}
