#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vinecens/estimation.hpp"
#include "vinecens/margins.hpp"
#include "vinecens/types.hpp"
#include "vinecens/vine.hpp"

namespace vinecens {

// Replication-study setup: sample from the vine, transform to event times
// through the Weibull margins, apply one common censoring time per cluster.
struct StudyConfig {
    DVineModel model;                     // true model, parameters set
    std::vector<WeibullMargin> margins;   // one per coordinate
    std::optional<WeibullMargin> censor;  // absent = complete data
    int n = 100;                          // clusters per replicate
    int replicates = 1;
    MarginMethod margin_method = MarginMethod::KME;
    std::uint64_t seed = 0;
    FitOptions fit;
};

struct PerfMeasures {
    double mean = 0.0;
    double bias = 0.0;
    double s2 = 0.0;   // population variance (divisor R)
    double mse = 0.0;  // bias^2 + s2 by construction
};

PerfMeasures performance_measures(std::span<const double> estimates, double truth);

struct StudyResult {
    std::vector<double> theta_true;
    std::vector<double> tau_true;
    std::vector<PerfMeasures> theta;  // per edge
    std::vector<PerfMeasures> tau;
    int completed = 0;
    int failed = 0;
    double censored_fraction = 0.0;  // observation-level, averaged over replicates
};

std::vector<ObservedCluster> generate_dataset(const StudyConfig& cfg, int replicate_index);

// Per replicate: generate, build pseudo-observations, fit globally with the
// sequential start, aggregate the performance measures.
StudyResult run_study(const StudyConfig& cfg);

}  // namespace vinecens
