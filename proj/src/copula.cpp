#include "vinecens/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vinecens/errors.hpp"
#include "vinecens/quadrature.hpp"
#include "vinecens/rng.hpp"

namespace vinecens {

namespace {

constexpr double kFrankIndepEps = 1e-6;

double clamp_unit(double x) { return std::clamp(x, kUnitEps, 1.0 - kUnitEps); }

// log(u^-t + v^-t - 1), kept in log space so large theta cannot overflow
double clayton_log_s(double u, double v, double t) {
    const double a = -t * std::log(u);
    const double b = -t * std::log(v);
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

double clayton_cdf(double u, double v, double t) {
    return std::exp(-clayton_log_s(u, v, t) / t);
}

// dC/dv = v^(-t-1) (u^-t + v^-t - 1)^(-1/t - 1)
double clayton_h(double u, double v, double t) {
    const double log_s = clayton_log_s(u, v, t);
    return std::exp(-(t + 1.0) * std::log(v) - (1.0 / t + 1.0) * log_s);
}

double clayton_pdf(double u, double v, double t) {
    const double log_s = clayton_log_s(u, v, t);
    return std::exp(std::log1p(t) - (t + 1.0) * (std::log(u) + std::log(v)) -
                    (1.0 / t + 2.0) * log_s);
}

double clayton_hinv(double p, double v, double t) {
    // solve p = v^(-t-1) s^(-1/t-1) for u; u^-t = s - v^-t + 1 evaluated in
    // log space to survive large theta
    const double lv = std::log(v);
    const double log_s = -t * (std::log(p) + (t + 1.0) * lv) / (1.0 + t);
    const double b = -t * lv;  // log(v^-t), log_s >= b always
    const double d = std::expm1(log_s - b) + std::exp(-b);
    if (d <= 0.0) return 1.0 - kUnitEps;  // conditional CDF already above p at u=1
    return clamp_unit(std::exp(-(b + std::log(d)) / t));
}

// log(x^t + y^t) for x = -log u, y = -log v
double gumbel_log_s(double lx, double ly, double t) {
    const double a = t * lx;
    const double b = t * ly;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double gumbel_cdf(double u, double v, double t) {
    const double lx = std::log(-std::log(u));
    const double ly = std::log(-std::log(v));
    return std::exp(-std::exp(gumbel_log_s(lx, ly, t) / t));
}

double gumbel_h(double u, double v, double t) {
    const double lx = std::log(-std::log(u));
    const double ly = std::log(-std::log(v));
    const double log_s = gumbel_log_s(lx, ly, t);
    const double w = std::exp(log_s / t);
    const double log_h = -w + (t - 1.0) * ly + (1.0 / t - 1.0) * log_s - std::log(v);
    return std::exp(log_h);
}

double gumbel_pdf(double u, double v, double t) {
    const double lx = std::log(-std::log(u));
    const double ly = std::log(-std::log(v));
    const double log_s = gumbel_log_s(lx, ly, t);
    const double w = std::exp(log_s / t);
    const double log_c = -w - std::log(u) - std::log(v) + (t - 1.0) * (lx + ly) +
                         (2.0 / t - 2.0) * log_s + std::log1p((t - 1.0) / w);
    return std::exp(log_c);
}

struct FrankParts {
    double g1;  // e^-t - 1
    double gu;  // e^-tu - 1
    double gv;  // e^-tv - 1
    double den; // g1 + gu*gv
};

FrankParts frank_parts(double u, double v, double t) {
    FrankParts p;
    p.g1 = std::expm1(-t);
    p.gu = std::expm1(-t * u);
    p.gv = std::expm1(-t * v);
    p.den = p.g1 + p.gu * p.gv;
    return p;
}

double frank_cdf_pos(double u, double v, double t) {
    const FrankParts p = frank_parts(u, v, t);
    return -std::log1p(p.gu * p.gv / p.g1) / t;
}

double frank_h_pos(double u, double v, double t) {
    const FrankParts p = frank_parts(u, v, t);
    return (p.gv + 1.0) * p.gu / p.den;  // e^-tv = gv + 1
}

double frank_pdf_pos(double u, double v, double t) {
    const FrankParts p = frank_parts(u, v, t);
    return -t * p.g1 * (p.gu + 1.0) * (p.gv + 1.0) / (p.den * p.den);
}

double frank_hinv_pos(double p, double v, double t) {
    const double gv = std::expm1(-t * v);
    const double g1 = std::expm1(-t);
    const double gu = p * g1 / (std::exp(-t * v) - p * gv);
    return clamp_unit(-std::log1p(gu) / t);
}

// Negative Frank dependence is handled through the reflection
// C_{-t}(u,v) = u - C_t(u, 1-v).
double frank_cdf(double u, double v, double t) {
    if (t > 0.0) return frank_cdf_pos(u, v, t);
    return u - frank_cdf_pos(u, 1.0 - v, -t);
}

double frank_h(double u, double v, double t) {
    if (t > 0.0) return frank_h_pos(u, v, t);
    return frank_h_pos(u, 1.0 - v, -t);
}

double frank_pdf(double u, double v, double t) {
    if (t > 0.0) return frank_pdf_pos(u, v, t);
    return frank_pdf_pos(u, 1.0 - v, -t);
}

double frank_hinv(double p, double v, double t) {
    if (t > 0.0) return frank_hinv_pos(p, v, t);
    return frank_hinv_pos(p, 1.0 - v, -t);
}

// core conditional CDF P(U <= u | V = v)
double h_core(const PairCopula& c, double u, double v) {
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (c.family) {
        case Family::Clayton: return std::clamp(clayton_h(u, v, c.theta), 0.0, 1.0);
        case Family::Gumbel: return std::clamp(gumbel_h(u, v, c.theta), 0.0, 1.0);
        case Family::Frank: return std::clamp(frank_h(u, v, c.theta), 0.0, 1.0);
        case Family::Independence: return u;
    }
    return u;
}

// Safeguarded Newton/bisection for families without a closed-form h-inverse.
// Converges on the root bracket, not on the residual; the conditional CDF can
// be extremely flat where the copula concentrates mass elsewhere.
double hinv_numeric(const PairCopula& c, double p, double v) {
    double lo = kUnitEps;
    double hi = 1.0 - kUnitEps;
    double u = std::clamp(p, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = h_core(c, u, v) - p;
        if (f == 0.0) return u;
        if (f > 0.0) hi = u; else lo = u;
        if (hi - lo < 1e-13) return 0.5 * (lo + hi);
        const double deriv = copula_pdf(c, u, v);
        double next = deriv > 0.0 && std::isfinite(deriv) ? u - f / deriv : u;
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        u = next;
    }
    if (hi - lo < 1e-7) return 0.5 * (lo + hi);
    throw NumericalError("hinv: no convergence for " + family_name(c.family) +
                         " theta=" + std::to_string(c.theta) + " p=" + std::to_string(p) +
                         " v=" + std::to_string(v));
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::Clayton: return "clayton";
        case Family::Gumbel: return "gumbel";
        case Family::Frank: return "frank";
        case Family::Independence: return "indep";
    }
    return "indep";
}

Family family_from_name(std::string_view name) {
    if (name == "clayton") return Family::Clayton;
    if (name == "gumbel") return Family::Gumbel;
    if (name == "frank") return Family::Frank;
    if (name == "indep" || name == "independence") return Family::Independence;
    throw DataError("unknown copula family '" + std::string(name) + "'");
}

bool has_parameter(Family f) { return f != Family::Independence; }

void validate_copula(const PairCopula& c) {
    if (!std::isfinite(c.theta) && c.family != Family::Independence)
        throw std::domain_error("copula parameter must be finite");
    switch (c.family) {
        case Family::Clayton:
            if (c.theta <= 0.0) throw std::domain_error("Clayton requires theta > 0");
            break;
        case Family::Gumbel:
            if (c.theta < 1.0) throw std::domain_error("Gumbel requires theta >= 1");
            break;
        case Family::Frank:
            if (c.theta == 0.0) throw std::domain_error("Frank requires theta != 0");
            break;
        case Family::Independence:
            break;
    }
}

PairCopula make_copula(Family family, double theta) {
    if (family == Family::Frank && std::abs(theta) < kFrankIndepEps)
        return PairCopula{Family::Independence, 0.0};
    if (family == Family::Independence) return PairCopula{family, 0.0};
    PairCopula c{family, theta};
    validate_copula(c);
    return c;
}

double copula_cdf(const PairCopula& c, double u, double v) {
    validate_copula(c);
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0 && v >= 1.0) return 1.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (c.family) {
        case Family::Clayton: return clayton_cdf(u, v, c.theta);
        case Family::Gumbel: return gumbel_cdf(u, v, c.theta);
        case Family::Frank: return frank_cdf(u, v, c.theta);
        case Family::Independence: return u * v;
    }
    return u * v;
}

double copula_pdf(const PairCopula& c, double u, double v) {
    validate_copula(c);
    u = clamp_unit(u);
    v = clamp_unit(v);
    double d = 1.0;
    switch (c.family) {
        case Family::Clayton: d = clayton_pdf(u, v, c.theta); break;
        case Family::Gumbel: d = gumbel_pdf(u, v, c.theta); break;
        case Family::Frank: d = frank_pdf(u, v, c.theta); break;
        case Family::Independence: d = 1.0; break;
    }
    if (!std::isfinite(d) || d < 0.0) d = 0.0;
    return d;
}

double hfunc(const PairCopula& c, double u, double v, HDir dir) {
    validate_copula(c);
    return dir == HDir::UGivenV ? h_core(c, u, v) : h_core(c, v, u);
}

double hinv(const PairCopula& c, double p, double v, HDir dir) {
    validate_copula(c);
    (void)dir;  // the families here are exchangeable: both directions share one core
    p = clamp_unit(p);
    v = clamp_unit(v);
    switch (c.family) {
        case Family::Clayton: return clayton_hinv(p, v, c.theta);
        case Family::Frank: return frank_hinv(p, v, c.theta);
        case Family::Independence: return p;
        case Family::Gumbel: return hinv_numeric(c, p, v);
    }
    return p;
}

double debye1(double x) {
    if (x <= 0.0) throw std::domain_error("debye1 requires x > 0");
    // adaptive composite Gauss-Legendre on [0,x]; the integrand t/(e^t-1) is
    // smooth with limit 1 at 0
    auto integrand = [](double t) {
        if (t < 1e-8) return 1.0 - 0.5 * t;
        const double em = std::expm1(t);
        return std::isfinite(em) ? t / em : 0.0;
    };
    const GaussLegendre& rule = gauss_legendre(16);
    double prev = 0.0;
    for (int panels = 1; panels <= 64; panels *= 2) {
        double sum = 0.0;
        const double width = x / panels;
        for (int p = 0; p < panels; ++p) {
            const double left = p * width;
            for (std::size_t k = 0; k < rule.nodes.size(); ++k)
                sum += rule.weights[k] * integrand(left + width * rule.nodes[k]) * width;
        }
        if (panels > 1 && std::abs(sum - prev) < 1e-13 * std::max(1.0, std::abs(sum)))
            return sum / x;
        prev = sum;
    }
    return prev / x;
}

double theta_to_tau(Family f, double theta) {
    switch (f) {
        case Family::Clayton:
            if (theta <= 0.0) throw std::domain_error("Clayton requires theta > 0");
            return theta / (theta + 2.0);
        case Family::Gumbel:
            if (theta < 1.0) throw std::domain_error("Gumbel requires theta >= 1");
            return 1.0 - 1.0 / theta;
        case Family::Frank: {
            if (theta == 0.0) return 0.0;
            const double a = std::abs(theta);
            const double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
            return theta > 0.0 ? tau : -tau;
        }
        case Family::Independence:
            return 0.0;
    }
    return 0.0;
}

double tau_to_theta(Family f, double tau) {
    switch (f) {
        case Family::Clayton:
            if (tau <= 0.0 || tau >= 1.0)
                throw std::domain_error("Clayton tau must lie in (0,1)");
            return 2.0 * tau / (1.0 - tau);
        case Family::Gumbel:
            if (tau < 0.0 || tau >= 1.0)
                throw std::domain_error("Gumbel tau must lie in [0,1)");
            return 1.0 / (1.0 - tau);
        case Family::Frank: {
            if (tau == 0.0) return 0.0;
            const double target = std::abs(tau);
            double lo = 1e-6, hi = 500.0;
            if (target >= theta_to_tau(Family::Frank, hi))
                throw std::domain_error("Frank tau out of attainable range");
            for (int iter = 0; iter < 200 && hi - lo > 1e-10 * (1.0 + hi); ++iter) {
                const double mid = 0.5 * (lo + hi);
                (theta_to_tau(Family::Frank, mid) < target ? lo : hi) = mid;
            }
            const double theta = 0.5 * (lo + hi);
            return tau > 0.0 ? theta : -theta;
        }
        case Family::Independence:
            if (tau != 0.0) throw std::domain_error("Independence has tau = 0");
            return 0.0;
    }
    return 0.0;
}

TailDependence tail_dependence(const PairCopula& c) {
    validate_copula(c);
    TailDependence td;
    if (c.family == Family::Clayton) td.lower = std::pow(2.0, -1.0 / c.theta);
    if (c.family == Family::Gumbel) td.upper = 2.0 - std::pow(2.0, 1.0 / c.theta);
    return td;
}

std::vector<std::array<double, 2>> sample_pair(const PairCopula& c, std::size_t n,
                                               std::uint64_t seed) {
    validate_copula(c);
    UniformRng rng(seed);
    std::vector<std::array<double, 2>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w1 = rng.next();
        const double w2 = rng.next();
        out[i] = {w1, hinv(c, w2, w1, HDir::VGivenU)};
    }
    return out;
}

}  // namespace vinecens
