#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vinecens/types.hpp"

namespace vinecens {

// Product-limit survival estimate. Right-continuous step function starting
// at 1; steps only at event times.
struct KaplanMeierCurve {
    std::vector<double> times;  // distinct event times, increasing
    std::vector<double> surv;   // survival just after each event time
    double max_time = 0.0;      // largest observation (event or censored)
    bool all_censored = false;
};

struct TimeObs {
    double y = 0.0;
    int delta = 0;  // 1 = event, 0 = censored
};

// Ties between events and censorings at equal times count the events first.
KaplanMeierCurve km_fit(std::span<const TimeObs> obs);

double km_eval(const KaplanMeierCurve& curve, double t);

// Generalized inverse: smallest t with S(t) <= p. p = 1 gives 0; p below the
// final survival level gives the largest observed time.
double km_inverse(const KaplanMeierCurve& curve, double p);

// Weibull survival S(t) = exp(-(t/lambda)^alpha).
struct WeibullMargin {
    double alpha = 1.0;   // shape
    double lambda = 1.0;  // scale
};

double weibull_surv(const WeibullMargin& m, double t);
double weibull_inv(const WeibullMargin& m, double p);

// Right-censored maximum likelihood fit; needs at least 2 events.
WeibullMargin weibull_mle(std::span<const TimeObs> obs);

// Scale maximizing the censored likelihood for a fixed shape.
double weibull_scale_for_shape(std::span<const TimeObs> obs, double alpha);

// Gradient of the censored Weibull loglikelihood in (log alpha, log lambda).
std::array<double, 2> weibull_loglik_gradient(std::span<const TimeObs> obs,
                                              const WeibullMargin& m);
double weibull_loglik(std::span<const TimeObs> obs, const WeibullMargin& m);

enum class MarginMethod { KME, WeibullMLE, Known };

struct PseudoData {
    std::vector<PseudoCluster> clusters;
    long clamp_count = 0;  // pseudo-observations pulled off the 0/1 boundary
};

// u_ij = S_j(y_ij) per coordinate, margins fitted over all clusters. For
// Known, `known` supplies the d margins.
PseudoData pseudo_observations(std::span<const ObservedCluster> data, MarginMethod method,
                               const std::vector<WeibullMargin>* known = nullptr);

// Clamp applied to pseudo-observations before likelihood evaluation; the KME
// can reach 0 at the largest event time.
inline constexpr double kPseudoEps = 1e-5;

}  // namespace vinecens
