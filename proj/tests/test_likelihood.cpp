#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle_support.hpp"
#include "vinecens/errors.hpp"
#include "vinecens/likelihood.hpp"
#include "vinecens/margins.hpp"
#include "vinecens/rng.hpp"

using namespace vinecens;

namespace {

DVineModel indep4() {
    DVineModel m;
    m.d = 4;
    m.order = {0, 1, 2, 3};
    m.edges.assign(6, make_copula(Family::Independence, 0.0));
    return m;
}

DVineModel mixed4() {
    DVineModel m;
    m.d = 4;
    m.order = {0, 1, 2, 3};
    m.edges = {make_copula(Family::Clayton, 3.0), make_copula(Family::Frank, 6.3),
               make_copula(Family::Gumbel, 2.5),  make_copula(Family::Frank, 1.7),
               make_copula(Family::Frank, 2.8),   make_copula(Family::Frank, 3.7)};
    return m;
}

DVineModel ccf3() {
    DVineModel m;
    m.d = 3;
    m.order = {0, 1, 2};
    m.edges = {make_copula(Family::Clayton, 3.0), make_copula(Family::Clayton, 3.0),
               make_copula(Family::Frank, 2.92)};
    return m;
}

std::vector<PseudoCluster> simulated_pseudo(const DVineModel& m, std::size_t n,
                                            std::uint64_t seed, double censor_quantile) {
    // common right-censoring applied directly on the survival scale: u = S(t)
    // decreases in t, so a censored coordinate has its true value below the
    // recorded one
    const auto points = sample_vine(m, n, seed);
    UniformRng rng(derive_seed(seed, 9));
    std::vector<PseudoCluster> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        PseudoCluster& pc = out[i];
        const std::size_t d = points[i].size();
        pc.u.resize(d);
        pc.delta.assign(d, 1);
        const double c = censor_quantile < 1.0
                             ? censor_quantile * rng.next() + (1.0 - censor_quantile)
                             : 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (points[i][j] >= c) {
                pc.u[j] = points[i][j];
            } else {
                pc.u[j] = c;
                pc.delta[j] = 0;
            }
        }
        for (double& uj : pc.u) uj = std::clamp(uj, kPseudoEps, 1.0 - kPseudoEps);
    }
    return out;
}

}  // namespace

TEST_CASE("cluster_loglik closed cases") {
    const DVineModel mi = indep4();
    PseudoCluster all_censored{{0.5, 0.5, 0.5, 0.5}, {0, 0, 0, 0}};
    CHECK(cluster_loglik(mi, all_censored) == doctest::Approx(std::log(0.0625)).epsilon(1e-10));

    const DVineModel m = mixed4();
    PseudoCluster complete{{0.3, 0.6, 0.4, 0.7}, {1, 1, 1, 1}};
    CHECK(cluster_loglik(m, complete) ==
          doctest::Approx(std::log(vine_density(m, complete.u))).epsilon(1e-12));
}

TEST_CASE("cluster_loglik agrees with the finite-difference oracle") {
    const DVineModel m = mixed4();
    PseudoCluster pc{{0.7, 0.6, 0.5, 0.8}, {1, 0, 0, 1}};
    const CensoringPattern base = censoring_pattern(std::vector<int>{0, 0, 0, 0});
    auto joint = [&](std::vector<double> q) {
        return vine_partial_derivative(m, base, q, 41);
    };
    const double fd = oracle::mixed_central_diff(joint, pc.u, {0, 3}, 0, 2e-3);
    CHECK(cluster_loglik(m, pc) == doctest::Approx(std::log(fd)).epsilon(1e-3));
}

TEST_CASE("total_loglik additivity and permutation invariance") {
    const DVineModel m = ccf3();
    std::vector<PseudoCluster> data = simulated_pseudo(m, 60, 4, 0.8);

    const double single = cluster_loglik(m, data[0]);
    CHECK(total_loglik(m, std::vector<PseudoCluster>{data[0]}) ==
          doctest::Approx(single).epsilon(1e-14));

    const double base = total_loglik(m, data);
    std::vector<PseudoCluster> doubled = data;
    doubled.insert(doubled.end(), data.begin(), data.end());
    CHECK(total_loglik(m, doubled) == doctest::Approx(2.0 * base).epsilon(1e-12));

    std::vector<PseudoCluster> shuffled = data;
    std::mt19937 gen(3);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(total_loglik(m, shuffled) == base);  // exact, reduction sorts first

    CHECK(total_loglik(m, data, 21, false) == base);  // thread count cannot matter
}

TEST_CASE("complete data reduces to the sum of log densities") {
    const DVineModel m = ccf3();
    const std::vector<PseudoCluster> data = simulated_pseudo(m, 40, 8, 1.0);
    double expected = 0.0;
    for (const PseudoCluster& pc : data) expected += std::log(vine_density(m, pc.u));
    CHECK(total_loglik(m, data) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("flipping an indicator changes one term and never yields NaN") {
    const DVineModel m = mixed4();
    std::vector<PseudoCluster> data = simulated_pseudo(m, 20, 12, 0.7);
    const double base = total_loglik(m, data);
    for (std::size_t j = 0; j < 4; ++j) {
        std::vector<PseudoCluster> mod = data;
        mod[5].delta[j] = 1 - mod[5].delta[j];
        const double changed = total_loglik(m, mod);
        CHECK(std::isfinite(changed));
        const double delta_one = cluster_loglik(m, mod[5]) - cluster_loglik(m, data[5]);
        CHECK(changed - base == doctest::Approx(delta_one).epsilon(1e-9));
    }
}

TEST_CASE("true parameters beat perturbed parameters on average (smoke)") {
    const DVineModel m = ccf3();
    const std::vector<PseudoCluster> data = simulated_pseudo(m, 2000, 31, 0.8);
    const double at_truth = total_loglik(m, data);
    for (double factor : {0.75, 1.25}) {
        DVineModel perturbed = m;
        for (PairCopula& e : perturbed.edges)
            e = make_copula(e.family, e.theta * factor);
        CHECK(at_truth > total_loglik(perturbed, data));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const DVineModel m = ccf3();
    PseudoCluster wrong{{0.5, 0.5}, {1, 1}};
    CHECK_THROWS_AS(cluster_loglik(m, wrong), StructureError);
    CHECK_THROWS_AS(total_loglik(m, std::vector<PseudoCluster>{}), DataError);
}
