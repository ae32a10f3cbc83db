#include "vinecens/margins.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "vinecens/errors.hpp"

namespace vinecens {

KaplanMeierCurve km_fit(std::span<const TimeObs> obs) {
    if (obs.empty()) throw DataError("km_fit: empty input");
    std::vector<TimeObs> sorted(obs.begin(), obs.end());
    for (const TimeObs& o : sorted) {
        if (!(o.y >= 0.0) || !std::isfinite(o.y))
            throw DataError("km_fit: times must be finite and nonnegative");
        if (o.delta != 0 && o.delta != 1) throw DataError("km_fit: delta must be 0 or 1");
    }
    // events first at tied times
    std::sort(sorted.begin(), sorted.end(), [](const TimeObs& a, const TimeObs& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.delta > b.delta;
    });

    KaplanMeierCurve curve;
    curve.max_time = sorted.back().y;
    double s = 1.0;
    std::size_t at_risk = sorted.size();
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double t = sorted[i].y;
        std::size_t events = 0, total = 0;
        while (i < sorted.size() && sorted[i].y == t) {
            events += static_cast<std::size_t>(sorted[i].delta);
            ++total;
            ++i;
        }
        if (events > 0) {
            s *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
            curve.times.push_back(t);
            curve.surv.push_back(s);
        }
        at_risk -= total;
    }
    curve.all_censored = curve.times.empty();
    return curve;
}

double km_eval(const KaplanMeierCurve& curve, double t) {
    // value just after the largest event time <= t
    auto it = std::upper_bound(curve.times.begin(), curve.times.end(), t);
    if (it == curve.times.begin()) return 1.0;
    return curve.surv[static_cast<std::size_t>(it - curve.times.begin()) - 1];
}

double km_inverse(const KaplanMeierCurve& curve, double p) {
    if (!(p > 0.0) || p > 1.0) throw std::domain_error("km_inverse: p must be in (0,1]");
    if (p >= 1.0) return 0.0;
    // smallest event time whose survival level is <= p
    for (std::size_t k = 0; k < curve.times.size(); ++k)
        if (curve.surv[k] <= p) return curve.times[k];
    return curve.max_time;
}

double weibull_surv(const WeibullMargin& m, double t) {
    if (t <= 0.0) return 1.0;
    return std::exp(-std::pow(t / m.lambda, m.alpha));
}

double weibull_inv(const WeibullMargin& m, double p) {
    if (!(p > 0.0) || p > 1.0) throw std::domain_error("weibull_inv: p must be in (0,1]");
    if (p >= 1.0) return 0.0;
    return m.lambda * std::pow(-std::log(p), 1.0 / m.alpha);
}

double weibull_loglik(std::span<const TimeObs> obs, const WeibullMargin& m) {
    double ll = 0.0;
    for (const TimeObs& o : obs) {
        const double z = std::pow(o.y / m.lambda, m.alpha);
        if (o.delta == 1)
            ll += std::log(m.alpha) - std::log(m.lambda) +
                  (m.alpha - 1.0) * (std::log(o.y) - std::log(m.lambda)) - z;
        else
            ll += -z;
    }
    return ll;
}

std::array<double, 2> weibull_loglik_gradient(std::span<const TimeObs> obs,
                                              const WeibullMargin& m) {
    // in (log alpha, log lambda)
    double da = 0.0, dl = 0.0;
    for (const TimeObs& o : obs) {
        const double r = std::log(o.y) - std::log(m.lambda);
        const double z = std::exp(m.alpha * r);
        if (o.delta == 1) {
            da += 1.0 + m.alpha * r - z * m.alpha * r;
            dl += -m.alpha + z * m.alpha;
        } else {
            da += -z * m.alpha * r;
            dl += z * m.alpha;
        }
    }
    return {da, dl};
}

double weibull_scale_for_shape(std::span<const TimeObs> obs, double alpha) {
    double sum = 0.0;
    std::size_t events = 0;
    double tmax = 0.0;
    for (const TimeObs& o : obs) {
        tmax = std::max(tmax, o.y);
        events += static_cast<std::size_t>(o.delta);
    }
    if (events == 0) throw NumericalError("weibull fit needs at least one event");
    if (tmax <= 0.0) throw DataError("weibull fit needs positive times");
    for (const TimeObs& o : obs) sum += std::pow(o.y / tmax, alpha);
    return tmax * std::pow(sum / static_cast<double>(events), 1.0 / alpha);
}

WeibullMargin weibull_mle(std::span<const TimeObs> obs) {
    std::size_t events = 0;
    double tmax = 0.0;
    for (const TimeObs& o : obs) {
        if (o.delta == 1) {
            ++events;
            if (o.y <= 0.0) throw DataError("weibull_mle: event times must be positive");
        }
        tmax = std::max(tmax, o.y);
    }
    if (events < 2) throw NumericalError("weibull_mle: need at least 2 events");

    // Profile the scale out analytically; Newton in log alpha on the score
    // g(a) = 1/a - sum(s^a ln s)/sum(s^a) + mean event ln s, s = y/tmax.
    std::vector<double> ls(obs.size());
    double mean_event_ls = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double s = std::max(obs[i].y / tmax, 1e-300);
        ls[i] = std::log(s);
        if (obs[i].delta == 1) mean_event_ls += ls[i];
    }
    mean_event_ls /= static_cast<double>(events);

    auto score = [&](double a, double& g, double& dg) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const double w = std::exp(a * ls[i]);
            s0 += w;
            s1 += w * ls[i];
            s2 += w * ls[i] * ls[i];
        }
        const double ratio = s1 / s0;
        g = 1.0 / a - ratio + mean_event_ls;
        dg = -1.0 / (a * a) - (s2 / s0 - ratio * ratio);
    };

    double lo = 1e-3, hi = 1e3, a = 1.0;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        double g, dg;
        score(a, g, dg);
        if (std::abs(g) < 1e-12) {
            converged = true;
            break;
        }
        if (g > 0.0) lo = a; else hi = a;  // g is strictly decreasing in a
        double next = a - g / dg;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - a) < 1e-14 * a) {
            a = next;
            converged = true;
            break;
        }
        a = next;
    }
    if (!converged) throw NumericalError("weibull_mle: Newton iteration did not converge");
    return WeibullMargin{a, weibull_scale_for_shape(obs, a)};
}

PseudoData pseudo_observations(std::span<const ObservedCluster> data, MarginMethod method,
                               const std::vector<WeibullMargin>* known) {
    if (data.empty()) throw DataError("pseudo_observations: no clusters");
    const std::size_t d = data.front().y.size();
    for (const ObservedCluster& c : data)
        if (c.y.size() != d || c.delta.size() != d)
            throw DataError("pseudo_observations: inconsistent cluster dimension");
    if (method == MarginMethod::Known) {
        if (known == nullptr || known->size() != d)
            throw DataError("pseudo_observations: known margins must match dimension");
    }

    std::vector<KaplanMeierCurve> km;
    std::vector<WeibullMargin> wb;
    if (method == MarginMethod::KME) {
        km.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<TimeObs> col(data.size());
            for (std::size_t i = 0; i < data.size(); ++i)
                col[i] = {data[i].y[j], data[i].delta[j]};
            km[j] = km_fit(col);
            if (km[j].all_censored)
                std::cerr << "warning: margin " << j + 1
                          << " has no events, its survival estimate is identically 1\n";
        }
    } else if (method == MarginMethod::WeibullMLE) {
        wb.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<TimeObs> col(data.size());
            for (std::size_t i = 0; i < data.size(); ++i)
                col[i] = {data[i].y[j], data[i].delta[j]};
            wb[j] = weibull_mle(col);
        }
    }

    PseudoData out;
    out.clusters.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        PseudoCluster& pc = out.clusters[i];
        pc.u.resize(d);
        pc.delta = data[i].delta;
        for (std::size_t j = 0; j < d; ++j) {
            double u = 0.0;
            switch (method) {
                case MarginMethod::KME: u = km_eval(km[j], data[i].y[j]); break;
                case MarginMethod::WeibullMLE: u = weibull_surv(wb[j], data[i].y[j]); break;
                case MarginMethod::Known: u = weibull_surv((*known)[j], data[i].y[j]); break;
            }
            const double clamped = std::clamp(u, kPseudoEps, 1.0 - kPseudoEps);
            if (clamped != u) ++out.clamp_count;
            pc.u[j] = clamped;
        }
    }
    return out;
}

}  // namespace vinecens
