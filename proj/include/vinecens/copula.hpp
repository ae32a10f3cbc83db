#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vinecens {

enum class Family { Clayton, Gumbel, Frank, Independence };

std::string family_name(Family f);
Family family_from_name(std::string_view name);

// One-parameter bivariate copula. Clayton theta > 0, Gumbel theta >= 1,
// Frank theta != 0 (|theta| < 1e-6 is promoted to Independence).
struct PairCopula {
    Family family = Family::Independence;
    double theta = 0.0;
};

PairCopula make_copula(Family family, double theta);
void validate_copula(const PairCopula& c);
bool has_parameter(Family f);

// Evaluation clamps u,v into [kUnitEps, 1-kUnitEps] first; the Archimedean
// formulas are singular at 0/1.
inline constexpr double kUnitEps = 1e-10;

double copula_cdf(const PairCopula& c, double u, double v);
double copula_pdf(const PairCopula& c, double u, double v);

// Conditional CDF obtained by differentiating the copula CDF in the
// conditioning argument.
enum class HDir { UGivenV, VGivenU };

double hfunc(const PairCopula& c, double u, double v, HDir dir = HDir::UGivenV);

// Inverse of hfunc in its first argument: hinv(hfunc(u|v), v) = u.
// The second argument is the conditioning value for either direction.
double hinv(const PairCopula& c, double p, double v, HDir dir = HDir::UGivenV);

// Kendall's tau maps: Clayton tau = theta/(theta+2), Gumbel tau = 1 - 1/theta,
// Frank via the first Debye function.
double theta_to_tau(Family f, double theta);
double tau_to_theta(Family f, double tau);

struct TailDependence {
    double lower = 0.0;
    double upper = 0.0;
};

TailDependence tail_dependence(const PairCopula& c);

// n draws via conditional inversion: u = w1, v = hinv(w2 | u).
std::vector<std::array<double, 2>> sample_pair(const PairCopula& c, std::size_t n,
                                               std::uint64_t seed);

// First Debye function D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt, x > 0.
double debye1(double x);

}  // namespace vinecens
