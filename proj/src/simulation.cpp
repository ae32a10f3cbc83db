#include "vinecens/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "vinecens/errors.hpp"
#include "vinecens/rng.hpp"

namespace vinecens {

PerfMeasures performance_measures(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw DataError("performance_measures: no estimates");
    PerfMeasures pm;
    for (double e : estimates) pm.mean += e;
    pm.mean /= static_cast<double>(estimates.size());
    pm.bias = pm.mean - truth;
    for (double e : estimates) pm.s2 += (e - pm.mean) * (e - pm.mean);
    pm.s2 /= static_cast<double>(estimates.size());
    pm.mse = pm.bias * pm.bias + pm.s2;
    return pm;
}

std::vector<ObservedCluster> generate_dataset(const StudyConfig& cfg, int replicate_index) {
    validate_model(cfg.model);
    if (cfg.margins.size() != static_cast<std::size_t>(cfg.model.d))
        throw DataError("generate_dataset: need one margin per coordinate");
    if (cfg.n < 10) throw DataError("generate_dataset: need n >= 10");

    const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(replicate_index));
    const std::size_t d = static_cast<std::size_t>(cfg.model.d);
    auto copula_points = sample_vine(cfg.model, static_cast<std::size_t>(cfg.n),
                                     derive_seed(rep_seed, 1));
    UniformRng crng(derive_seed(rep_seed, 2));

    std::vector<ObservedCluster> data(static_cast<std::size_t>(cfg.n));
    for (std::size_t i = 0; i < data.size(); ++i) {
        ObservedCluster& cl = data[i];
        cl.id = static_cast<long>(i + 1);
        cl.y.resize(d);
        cl.delta.resize(d);
        const double c = cfg.censor ? weibull_inv(*cfg.censor, crng.next())
                                    : std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d; ++j) {
            const double t = weibull_inv(cfg.margins[j], copula_points[i][j]);
            cl.y[j] = std::min(t, c);
            cl.delta[j] = t <= c ? 1 : 0;
        }
    }
    return data;
}

StudyResult run_study(const StudyConfig& cfg) {
    validate_model(cfg.model);
    if (cfg.replicates < 1) throw DataError("run_study: need at least one replicate");

    const std::size_t edges = cfg.model.edges.size();
    StudyResult result;
    result.theta_true.resize(edges);
    result.tau_true.resize(edges);
    for (std::size_t e = 0; e < edges; ++e) {
        result.theta_true[e] = cfg.model.edges[e].theta;
        result.tau_true[e] = theta_to_tau(cfg.model.edges[e].family, cfg.model.edges[e].theta);
    }

    const int R = cfg.replicates;
    std::vector<std::vector<double>> theta_hat(static_cast<std::size_t>(R));
    std::vector<std::vector<double>> tau_hat(static_cast<std::size_t>(R));
    std::vector<double> cens_frac(static_cast<std::size_t>(R), 0.0);
    std::vector<int> ok(static_cast<std::size_t>(R), 0);

    FitOptions fit_options = cfg.fit;

    auto run_replicate = [&](std::size_t r) {
        const std::vector<ObservedCluster> data = generate_dataset(cfg, static_cast<int>(r));
        long censored = 0;
        for (const ObservedCluster& cl : data)
            for (int dj : cl.delta) censored += 1 - dj;
        cens_frac[r] = static_cast<double>(censored) /
                       (static_cast<double>(data.size()) * static_cast<double>(cfg.model.d));
        const PseudoData pseudo =
            pseudo_observations(data, cfg.margin_method,
                                cfg.margin_method == MarginMethod::Known ? &cfg.margins : nullptr);
        const FitResult fr = fit_global(cfg.model, pseudo.clusters, fit_options);
        theta_hat[r] = fr.theta_hat;
        tau_hat[r] = fr.tau_hat;
        ok[r] = 1;
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned workers = std::min<unsigned>(std::min<unsigned>(hw, 8u),
                                                static_cast<unsigned>(R));
    if (workers > 1) fit_options.parallel = false;  // replicates already fill the cores
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                const std::size_t r = next.fetch_add(1);
                if (r >= static_cast<std::size_t>(R)) break;
                try {
                    run_replicate(r);
                } catch (const std::exception&) {
                    ok[r] = 0;
                }
            }
        });
    }
    for (std::thread& t : threads) t.join();

    std::vector<std::vector<double>> kept_theta, kept_tau;
    double cens_sum = 0.0;
    for (std::size_t r = 0; r < static_cast<std::size_t>(R); ++r) {
        if (!ok[r]) {
            ++result.failed;
            continue;
        }
        kept_theta.push_back(theta_hat[r]);
        kept_tau.push_back(tau_hat[r]);
        cens_sum += cens_frac[r];
        ++result.completed;
    }
    if (result.failed * 10 > R)
        throw NumericalError("run_study: more than 10% of replicate fits failed (" +
                             std::to_string(result.failed) + "/" + std::to_string(R) + ")");
    result.censored_fraction = cens_sum / static_cast<double>(result.completed);

    result.theta.resize(edges);
    result.tau.resize(edges);
    std::vector<double> column(kept_theta.size());
    for (std::size_t e = 0; e < edges; ++e) {
        for (std::size_t r = 0; r < kept_theta.size(); ++r) column[r] = kept_theta[r][e];
        result.theta[e] = performance_measures(column, result.theta_true[e]);
        for (std::size_t r = 0; r < kept_tau.size(); ++r) column[r] = kept_tau[r][e];
        result.tau[e] = performance_measures(column, result.tau_true[e]);
    }
    return result;
}

}  // namespace vinecens
