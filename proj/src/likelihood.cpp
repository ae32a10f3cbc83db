#include "vinecens/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

#include "vinecens/errors.hpp"

namespace vinecens {

namespace {

unsigned worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    hw = std::min(hw, 8u);
    return static_cast<unsigned>(std::min<std::size_t>(hw, jobs));
}

double kahan_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        const double t = v - comp;
        const double next = sum + t;
        comp = (next - sum) - t;
        sum = next;
    }
    return sum;
}

}  // namespace

double cluster_loglik(const DVineModel& m, const PseudoCluster& pc, int quad_nodes,
                      long cluster_index) {
    if (pc.u.size() != static_cast<std::size_t>(m.d) || pc.delta.size() != pc.u.size())
        throw StructureError("cluster dimension must match the model");
    const CensoringPattern pattern = censoring_pattern(pc.delta);
    const double value = vine_partial_derivative(m, pattern, pc.u, quad_nodes);
    if (!(value > 0.0)) {
        if (value == 0.0) return std::log(kLogFloor);
        throw NumericalError("cluster " + std::to_string(cluster_index) +
                             ": nonpositive likelihood contribution for pattern " +
                             pattern_label(pattern));
    }
    return std::log(std::max(value, kLogFloor));
}

double total_loglik(const DVineModel& m, std::span<const PseudoCluster> data, int quad_nodes,
                    bool parallel) {
    if (data.empty()) throw DataError("total_loglik: no clusters");
    validate_model(m);
    std::vector<double> values(data.size());

    auto run_block = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            values[i] = cluster_loglik(m, data[i], quad_nodes, static_cast<long>(i));
    };

    const unsigned workers = parallel ? worker_count(data.size()) : 1u;
    if (workers <= 1 || data.size() < 32) {
        run_block(0, data.size());
    } else {
        std::vector<std::thread> threads;
        std::exception_ptr error;
        std::mutex error_mutex;
        const std::size_t chunk = (data.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(data.size(), begin + chunk);
            if (begin >= end) break;
            threads.emplace_back([&, begin, end] {
                try {
                    run_block(begin, end);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (std::thread& t : threads) t.join();
        if (error) std::rethrow_exception(error);
    }
    return kahan_sum(values);
}

}  // namespace vinecens
