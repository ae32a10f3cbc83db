#include "vinecens/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "vinecens/errors.hpp"
#include "vinecens/rng.hpp"

namespace vinecens {

namespace {

constexpr double kWorst = std::numeric_limits<double>::infinity();

double guarded(double x) { return std::isfinite(x) ? x : kWorst; }

// indices of edges that carry a free parameter
std::vector<std::size_t> free_edges(const DVineModel& m, std::size_t first = 0) {
    std::vector<std::size_t> idx;
    for (std::size_t e = first; e < m.edges.size(); ++e)
        if (has_parameter(m.edges[e].family)) idx.push_back(e);
    return idx;
}

// parameter from an unconstrained optimizer coordinate, kept inside the
// family domain regardless of where the simplex wanders
double safe_param(Family f, double x) {
    switch (f) {
        case Family::Clayton: return std::exp(std::clamp(x, -50.0, 50.0));
        case Family::Gumbel: return 1.0 + std::exp(std::clamp(x, -50.0, 50.0));
        case Family::Frank: {
            double t = std::clamp(x, -500.0, 500.0);
            if (std::abs(t) < 1e-6) t = t < 0.0 ? -1e-6 : 1e-6;
            return t;
        }
        case Family::Independence: return 0.0;
    }
    return x;
}

DVineModel with_params(const DVineModel& tmpl, const std::vector<std::size_t>& idx,
                       std::span<const double> transformed) {
    DVineModel m = tmpl;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        PairCopula& edge = m.edges[idx[k]];
        edge.theta = safe_param(edge.family, transformed[k]);
    }
    return m;
}

// assign a fitted parameter without losing the family tag (tiny Frank values
// evaluate as independence but stay Frank edges)
void set_edge_param(PairCopula& edge, double theta) {
    if (edge.family == Family::Frank && std::abs(theta) < 1e-6)
        theta = theta < 0.0 ? -1e-6 : 1e-6;
    edge.theta = theta;
    validate_copula(edge);
}

void finish_result(FitResult& r, std::span<const PseudoCluster> data, const FitOptions& opt) {
    validate_model(r.model);
    r.theta_hat.clear();
    r.tau_hat.clear();
    r.tail_dep.clear();
    for (const PairCopula& e : r.model.edges) {
        r.theta_hat.push_back(e.theta);
        r.tau_hat.push_back(theta_to_tau(e.family, e.theta));
        r.tail_dep.push_back(tail_dependence(e));
    }
    r.loglik = total_loglik(r.model, data, opt.quad_nodes, opt.parallel);
}

}  // namespace

std::string fit_method_name(FitMethod m) {
    switch (m) {
        case FitMethod::Pairwise: return "pairwise";
        case FitMethod::T1Sequential: return "t1-sequential";
        case FitMethod::Global: return "global";
    }
    return "global";
}

double transform_param(Family f, double theta) {
    switch (f) {
        case Family::Clayton: return std::log(theta);
        case Family::Gumbel: return std::log(theta - 1.0);
        case Family::Frank: return theta;
        case Family::Independence: return 0.0;
    }
    return theta;
}

double untransform_param(Family f, double x) {
    switch (f) {
        case Family::Clayton: return std::exp(x);
        case Family::Gumbel: return 1.0 + std::exp(x);
        case Family::Frank: return x;
        case Family::Independence: return 0.0;
    }
    return x;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::span<const double> start, double step, double tol,
                             int max_evals) {
    const std::size_t n = start.size();
    NelderMeadResult result;
    if (n == 0) {
        result.x = {};
        result.f = objective({});
        result.evaluations = 1;
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
    for (std::size_t i = 0; i < n; ++i)
        simplex[i + 1][i] += step * std::max(1.0, std::abs(start[i]));
    std::vector<double> fvals(n + 1);
    int evals = 0;
    auto eval = [&](std::span<const double> x) {
        ++evals;
        return guarded(objective(x));
    };
    for (std::size_t i = 0; i <= n; ++i) fvals[i] = eval(simplex[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            s2[k] = simplex[idx[k]];
            f2[k] = fvals[idx[k]];
        }
        simplex.swap(s2);
        fvals.swap(f2);
    };

    bool converged = false;
    while (evals < max_evals) {
        order();
        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                size = std::max(size, std::abs(simplex[i][j] - simplex[0][j]));
        if (size < tol) {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
            return p;
        };

        const std::vector<double> reflected = blend(1.0);
        const double fr = eval(reflected);
        if (fr < fvals[0]) {
            const std::vector<double> expanded = blend(2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[n] = expanded;
                fvals[n] = fe;
            } else {
                simplex[n] = reflected;
                fvals[n] = fr;
            }
        } else if (fr < fvals[n - 1]) {
            simplex[n] = reflected;
            fvals[n] = fr;
        } else {
            const std::vector<double> contracted = blend(fr < fvals[n] ? 0.5 : -0.5);
            const double fc = eval(contracted);
            if (fc < std::min(fr, fvals[n])) {
                simplex[n] = contracted;
                fvals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {  // shrink toward the best point
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fvals[i] = eval(simplex[i]);
                    if (evals >= max_evals) break;
                }
            }
        }
    }
    order();
    result.x = simplex[0];
    result.f = fvals[0];
    result.evaluations = evals;
    result.converged = converged;
    return result;
}

double empirical_kendall_tau(std::span<const PairObs> pairs, bool uncensored_only) {
    std::vector<const PairObs*> use;
    for (const PairObs& p : pairs)
        if (!uncensored_only || (p.d1 == 1 && p.d2 == 1)) use.push_back(&p);
    if (use.size() < 2) return 0.0;
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < use.size(); ++i) {
        for (std::size_t j = i + 1; j < use.size(); ++j) {
            const double a = (use[i]->u1 - use[j]->u1) * (use[i]->u2 - use[j]->u2);
            if (a > 0.0) ++concordant;
            else if (a < 0.0) ++discordant;
        }
    }
    const double total = 0.5 * static_cast<double>(use.size()) * static_cast<double>(use.size() - 1);
    return (concordant - discordant) / total;
}

double fit_pair_censored(Family family, std::span<const PairObs> pairs, const FitOptions& opt,
                         FitDiagnostics* diag) {
    if (!has_parameter(family))
        throw std::domain_error("fit_pair_censored: family has no parameter");
    if (pairs.size() < 10) throw DataError("fit_pair_censored: need at least 10 pairs");
    bool any_complete = false;
    for (const PairObs& p : pairs)
        if (p.d1 == 1 && p.d2 == 1) any_complete = true;
    if (!any_complete)
        throw DataError("fit_pair_censored: need at least one doubly-uncensored pair");

    auto negloglik = [&](std::span<const double> x) {
        const PairCopula c{family, safe_param(family, x[0])};
        double ll = 0.0;
        for (const PairObs& p : pairs) {
            double term;
            if (p.d1 == 1 && p.d2 == 1) term = copula_pdf(c, p.u1, p.u2);
            else if (p.d1 == 1) term = hfunc(c, p.u1, p.u2, HDir::VGivenU);  // dC/du1
            else if (p.d2 == 1) term = hfunc(c, p.u1, p.u2, HDir::UGivenV);  // dC/du2
            else term = copula_cdf(c, p.u1, p.u2);
            ll += std::log(std::max(term, kLogFloor));
        }
        return -ll;
    };

    // method-of-moments start, floored away from the independence boundary
    const double tau0 = std::max(empirical_kendall_tau(pairs), 0.05);
    const double start = transform_param(family, tau_to_theta(family, std::min(tau0, 0.95)));
    NelderMeadResult nm =
        nelder_mead(negloglik, std::span<const double>(&start, 1), 0.25, opt.tol, opt.max_evals);
    const double theta = safe_param(family, nm.x[0]);
    if (diag != nullptr) {
        diag->evaluations += nm.evaluations;
        diag->converged = diag->converged && nm.converged;
        const double tau = theta_to_tau(family, theta);
        if (std::abs(tau) < 5e-3)
            diag->warnings.push_back("pair fit at the independence boundary (tau ~ 0)");
        if (tau > 0.98)
            diag->warnings.push_back("pair fit at the upper dependence boundary");
    }
    return theta;
}

FitResult fit_t1_sequential(const DVineModel& model_template, std::span<const PseudoCluster> data,
                            const FitOptions& opt) {
    validate_model(model_template);
    if (data.empty()) throw DataError("fit: no clusters");
    FitResult result;
    result.method = FitMethod::T1Sequential;
    result.model = model_template;
    DVineModel& m = result.model;

    // first tree: pairwise censored fits on adjacent coordinates of the path
    for (int k = 0; k + 1 < m.d; ++k) {
        PairCopula& edge = m.edges[static_cast<std::size_t>(k)];
        if (!has_parameter(edge.family)) continue;
        const int va = m.order[static_cast<std::size_t>(k)];
        const int vb = m.order[static_cast<std::size_t>(k + 1)];
        std::vector<PairObs> pairs(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            pairs[i] = {data[i].u[static_cast<std::size_t>(va)], data[i].u[static_cast<std::size_t>(vb)],
                        data[i].delta[static_cast<std::size_t>(va)],
                        data[i].delta[static_cast<std::size_t>(vb)]};
        set_edge_param(edge, fit_pair_censored(edge.family, pairs, opt, &result.diagnostics));
    }

    // higher trees: joint censored likelihood with the first tree frozen;
    // the template's own parameters serve as starting values
    const std::vector<std::size_t> idx = free_edges(m, static_cast<std::size_t>(m.d - 1));
    if (!idx.empty()) {
        std::vector<double> start(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const PairCopula& e = m.edges[idx[k]];
            start[k] = std::clamp(transform_param(e.family, e.theta), -50.0, 50.0);
        }
        auto negloglik = [&](std::span<const double> x) {
            try {
                return -total_loglik(with_params(m, idx, x), data, opt.quad_nodes, opt.parallel);
            } catch (const NumericalError&) {
                return kWorst;
            }
        };
        NelderMeadResult nm = nelder_mead(negloglik, start, 0.25, opt.tol, opt.max_evals);
        if (!nm.converged)
            result.diagnostics.warnings.push_back("higher-tree stage hit the evaluation cap");
        result.diagnostics.evaluations += nm.evaluations;
        result.diagnostics.converged = result.diagnostics.converged && nm.converged;
        m = with_params(m, idx, nm.x);
    }
    finish_result(result, data, opt);
    return result;
}

FitResult fit_global(const DVineModel& model_template, std::span<const PseudoCluster> data,
                     const FitOptions& opt, const std::vector<double>* start_theta) {
    validate_model(model_template);
    if (data.empty()) throw DataError("fit: no clusters");
    FitResult result;
    result.method = FitMethod::Global;
    result.model = model_template;

    std::vector<double> theta0;
    if (start_theta != nullptr) {
        if (start_theta->size() != model_template.edges.size())
            throw StructureError("start vector must have one entry per edge");
        theta0 = *start_theta;
    } else {
        FitResult seq = fit_t1_sequential(model_template, data, opt);
        theta0 = seq.theta_hat;
        result.diagnostics = seq.diagnostics;
    }
    for (std::size_t e = 0; e < result.model.edges.size(); ++e)
        if (has_parameter(result.model.edges[e].family))
            set_edge_param(result.model.edges[e], theta0[e]);

    const std::vector<std::size_t> idx = free_edges(result.model);
    if (!idx.empty()) {
        std::vector<double> start(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const PairCopula& e = result.model.edges[idx[k]];
            start[k] = std::clamp(transform_param(e.family, e.theta), -50.0, 50.0);
        }
        auto negloglik = [&](std::span<const double> x) {
            try {
                return -total_loglik(with_params(result.model, idx, x), data, opt.quad_nodes,
                                     opt.parallel);
            } catch (const NumericalError&) {
                return kWorst;
            }
        };
        NelderMeadResult nm = nelder_mead(negloglik, start, 0.2, opt.tol, opt.max_evals);
        if (!nm.converged)
            result.diagnostics.warnings.push_back("global stage hit the evaluation cap");
        result.diagnostics.evaluations += nm.evaluations;
        result.diagnostics.converged = result.diagnostics.converged && nm.converged;
        result.model = with_params(result.model, idx, nm.x);
    }
    finish_result(result, data, opt);
    return result;
}

FitResult fit(const DVineModel& model_template, std::span<const PseudoCluster> data,
              FitMethod method, const FitOptions& opt) {
    switch (method) {
        case FitMethod::T1Sequential: return fit_t1_sequential(model_template, data, opt);
        case FitMethod::Global: return fit_global(model_template, data, opt);
        case FitMethod::Pairwise:
            throw StructureError("pairwise fitting applies to single edges, not the vine");
    }
    return fit_global(model_template, data, opt);
}

std::vector<double> replicate_stddev(const std::vector<std::vector<double>>& replicates) {
    if (replicates.size() < 2) throw DataError("replicate_stddev: need at least 2 replicates");
    const std::size_t p = replicates.front().size();
    std::vector<double> sd(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (const auto& r : replicates) mean += r[j];
        mean /= static_cast<double>(replicates.size());
        double ss = 0.0;
        for (const auto& r : replicates) ss += (r[j] - mean) * (r[j] - mean);
        sd[j] = std::sqrt(ss / static_cast<double>(replicates.size() - 1));
    }
    return sd;
}

BootstrapResult bootstrap_se(const FitResult& fitted, std::span<const ObservedCluster> data,
                             const BootstrapOptions& opt) {
    if (opt.B < 2) throw DataError("bootstrap_se: need B >= 2");
    if (data.empty()) throw DataError("bootstrap_se: no clusters");
    validate_model(fitted.model);
    const std::size_t d = static_cast<std::size_t>(fitted.model.d);

    // marginal KMEs of the original data, inverted to map copula samples back
    // to the time scale
    std::vector<KaplanMeierCurve> surv(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<TimeObs> col(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) col[i] = {data[i].y[j], data[i].delta[j]};
        surv[j] = km_fit(col);
    }

    // KME of the censoring distribution from (max_j y_ij, 1 - prod delta_ij)
    std::vector<TimeObs> cens(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        double ymax = 0.0;
        int all_events = 1;
        for (std::size_t j = 0; j < d; ++j) {
            ymax = std::max(ymax, data[i].y[j]);
            all_events &= data[i].delta[j];
        }
        cens[i] = {ymax, 1 - all_events};
    }
    const KaplanMeierCurve censor_curve = km_fit(cens);

    const std::size_t n = data.size();
    std::vector<std::vector<double>> theta_reps(static_cast<std::size_t>(opt.B));
    std::vector<int> ok(static_cast<std::size_t>(opt.B), 0);

    // replicates run in parallel, so each inner fit stays single-threaded
    FitOptions replicate_fit_options = opt.fit;
    replicate_fit_options.parallel = false;

    auto run_replicate = [&](std::size_t b) {
        const std::uint64_t rep_seed = derive_seed(opt.seed, b);
        auto copula_points = sample_vine(fitted.model, n, derive_seed(rep_seed, 1));
        UniformRng crng(derive_seed(rep_seed, 2));
        std::vector<ObservedCluster> boot(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double c = km_inverse(censor_curve, crng.next());
            ObservedCluster& cl = boot[i];
            cl.id = static_cast<long>(i + 1);
            cl.y.resize(d);
            cl.delta.resize(d);
            for (std::size_t j = 0; j < d; ++j) {
                const double t = km_inverse(surv[j], copula_points[i][j]);
                cl.y[j] = std::min(t, c);
                cl.delta[j] = t <= c ? 1 : 0;
            }
        }
        const PseudoData pseudo = pseudo_observations(boot, MarginMethod::KME);
        FitResult refit = fit(fitted.model, pseudo.clusters, opt.method, replicate_fit_options);
        theta_reps[b] = refit.theta_hat;
        ok[b] = 1;
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned workers = std::min<unsigned>(std::min<unsigned>(hw, 8u),
                                                static_cast<unsigned>(opt.B));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                const std::size_t b = next.fetch_add(1);
                if (b >= static_cast<std::size_t>(opt.B)) break;
                try {
                    run_replicate(b);
                } catch (const std::exception&) {
                    ok[b] = 0;  // dropped, counted below
                }
            }
        });
    }
    for (std::thread& t : threads) t.join();

    BootstrapResult result;
    for (std::size_t b = 0; b < static_cast<std::size_t>(opt.B); ++b) {
        if (ok[b]) result.replicate_theta.push_back(theta_reps[b]);
        else ++result.dropped;
    }
    if (result.dropped * 5 > opt.B)
        throw NumericalError("bootstrap_se: more than 20% of replicate fits failed (" +
                             std::to_string(result.dropped) + "/" + std::to_string(opt.B) + ")");

    result.se_theta = replicate_stddev(result.replicate_theta);
    std::vector<std::vector<double>> tau_reps(result.replicate_theta.size());
    for (std::size_t b = 0; b < result.replicate_theta.size(); ++b) {
        tau_reps[b].resize(result.replicate_theta[b].size());
        for (std::size_t e = 0; e < fitted.model.edges.size(); ++e)
            tau_reps[b][e] = theta_to_tau(fitted.model.edges[e].family,
                                          result.replicate_theta[b][e]);
    }
    result.se_tau = replicate_stddev(tau_reps);
    return result;
}

}  // namespace vinecens
