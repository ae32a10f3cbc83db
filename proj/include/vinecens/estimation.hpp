#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vinecens/likelihood.hpp"
#include "vinecens/margins.hpp"
#include "vinecens/types.hpp"
#include "vinecens/vine.hpp"

namespace vinecens {

enum class FitMethod { Pairwise, T1Sequential, Global };
std::string fit_method_name(FitMethod m);

struct FitOptions {
    int quad_nodes = 21;
    int max_evals = 2000;
    double tol = 1e-6;  // simplex size in transformed space
    bool parallel = true;
};

struct FitDiagnostics {
    int evaluations = 0;
    bool converged = true;
    int bootstrap_dropped = 0;
    long clamp_count = 0;  // pseudo-observations clamped off the 0/1 boundary
    std::vector<std::string> warnings;
};

struct FitResult {
    DVineModel model;  // template with fitted parameters filled in
    std::vector<double> theta_hat;
    std::vector<double> tau_hat;
    std::vector<TailDependence> tail_dep;
    double loglik = 0.0;
    FitMethod method = FitMethod::Global;
    std::optional<std::vector<double>> se_theta;
    std::optional<std::vector<double>> se_tau;
    FitDiagnostics diagnostics;
};

// Unconstrained optimizer coordinates: Clayton log(theta), Gumbel
// log(theta-1), Frank identity.
double transform_param(Family f, double theta);
double untransform_param(Family f, double x);

// ---- generic Nelder-Mead (minimization) ----------------------------------
struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int evaluations = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> start, double step, double tol,
                             int max_evals);

// ---- censored pair fit -----------------------------------------------------
struct PairObs {
    double u1 = 0.0, u2 = 0.0;
    int d1 = 1, d2 = 1;
};

// Maximizes the bivariate censored loglikelihood (terms: CDF, the two
// h-functions, density; all closed form). Start from the empirical Kendall
// tau of doubly-uncensored pairs.
double fit_pair_censored(Family family, std::span<const PairObs> pairs, const FitOptions& opt = {},
                         FitDiagnostics* diag = nullptr);

double empirical_kendall_tau(std::span<const PairObs> pairs, bool uncensored_only = true);

// ---- vine fits -------------------------------------------------------------

// First-tree edges fitted pairwise on adjacent coordinate pairs, then the
// higher-tree parameters jointly by censored likelihood with the first tree
// frozen.
FitResult fit_t1_sequential(const DVineModel& model_template, std::span<const PseudoCluster> data,
                            const FitOptions& opt = {});

// Joint maximization over all parameters. Starts from `start` (canonical edge
// order) or, by default, from the sequential fit.
FitResult fit_global(const DVineModel& model_template, std::span<const PseudoCluster> data,
                     const FitOptions& opt = {},
                     const std::vector<double>* start = nullptr);

FitResult fit(const DVineModel& model_template, std::span<const PseudoCluster> data,
              FitMethod method, const FitOptions& opt = {});

// ---- parametric bootstrap ---------------------------------------------------
struct BootstrapOptions {
    int B = 100;
    std::uint64_t seed = 0;
    FitMethod method = FitMethod::T1Sequential;  // method used for replicate refits
    FitOptions fit;
};

struct BootstrapResult {
    std::vector<double> se_theta;
    std::vector<double> se_tau;
    int dropped = 0;
    std::vector<std::vector<double>> replicate_theta;
};

// Resampling scheme for common right-censoring: sample copula data from the
// fitted vine, map through the inverse marginal KMEs, censor with draws from
// the KME of the censoring distribution, recompute pseudo-observations and
// refit.
BootstrapResult bootstrap_se(const FitResult& fitted, std::span<const ObservedCluster> data,
                             const BootstrapOptions& opt);

// Component-wise standard deviation across replicates (divisor B-1).
std::vector<double> replicate_stddev(const std::vector<std::vector<double>>& replicates);

}  // namespace vinecens
