// Command line for censored vine-copula estimation: fit, loglik, compare,
// bootstrap, simulate, convert.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vinecens/csv.hpp"
#include "vinecens/errors.hpp"
#include "vinecens/estimation.hpp"
#include "vinecens/model_config.hpp"
#include "vinecens/simulation.hpp"

namespace {

using namespace vinecens;

struct CommonArgs {
    std::string config;
    std::string data;
    std::string out;
    std::optional<int> quad_nodes;
    std::optional<std::uint64_t> seed;
};

ModelConfig load_config(const CommonArgs& args) {
    ModelConfig cfg = load_model_config(args.config);
    if (args.quad_nodes) cfg.quad_nodes = *args.quad_nodes;
    if (args.seed) cfg.seed = *args.seed;
    return cfg;
}

FitOptions fit_options(const ModelConfig& cfg) {
    FitOptions opt;
    opt.quad_nodes = cfg.quad_nodes;
    opt.max_evals = cfg.max_evals;
    return opt;
}

PseudoData make_pseudo(const ModelConfig& cfg, const std::vector<ObservedCluster>& clusters) {
    if (static_cast<int>(clusters.front().y.size()) != cfg.d)
        throw DataError("data dimension does not match the config");
    return pseudo_observations(clusters, cfg.margin_method,
                               cfg.margin_method == MarginMethod::Known ? &cfg.known_margins
                                                                        : nullptr);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
}

std::filesystem::path ensure_out_dir(const std::string& out) {
    std::filesystem::path dir = out.empty() ? std::filesystem::path(".") : std::filesystem::path(out);
    std::filesystem::create_directories(dir);
    return dir;
}

int run_fit(const CommonArgs& args, const std::string& method, int bootstrap_b) {
    const ModelConfig cfg = load_config(args);
    const std::vector<ObservedCluster> clusters = load_clusters(args.data);
    const PseudoData pseudo = make_pseudo(cfg, clusters);
    if (pseudo.clamp_count > 0)
        std::cerr << "note: " << pseudo.clamp_count
                  << " pseudo-observations clamped away from the 0/1 boundary\n";

    const FitMethod fm = method == "seq" ? FitMethod::T1Sequential : FitMethod::Global;
    FitResult result = fit(cfg.template_model(), pseudo.clusters, fm, fit_options(cfg));
    result.diagnostics.clamp_count = pseudo.clamp_count;

    if (bootstrap_b > 0) {
        BootstrapOptions bopt;
        bopt.B = bootstrap_b;
        bopt.seed = cfg.seed;
        bopt.method = fm == FitMethod::Global ? FitMethod::Global : FitMethod::T1Sequential;
        bopt.fit = fit_options(cfg);
        const BootstrapResult boot = bootstrap_se(result, clusters, bopt);
        result.se_theta = boot.se_theta;
        result.se_tau = boot.se_tau;
        result.diagnostics.bootstrap_dropped = boot.dropped;
    }

    const std::filesystem::path dir = ensure_out_dir(args.out);
    write_file((dir / "fit.csv").string(), fit_result_csv(result));
    write_file((dir / "fit.txt").string(), fit_result_summary(result, clusters.size()));
    // fitted model in config form; reusable with loglik/compare/simulate
    ModelConfig fitted_cfg = cfg;
    for (std::size_t e = 0; e < result.theta_hat.size(); ++e)
        fitted_cfg.thetas[e] = result.theta_hat[e];
    write_file((dir / "fitted_model.cfg").string(), write_model_config(fitted_cfg));
    std::cout << fit_result_summary(result, clusters.size());
    return 0;
}

int run_loglik(const CommonArgs& args) {
    const ModelConfig cfg = load_config(args);
    const std::vector<ObservedCluster> clusters = load_clusters(args.data);
    const PseudoData pseudo = make_pseudo(cfg, clusters);
    const double ll = total_loglik(cfg.full_model(), pseudo.clusters, cfg.quad_nodes);
    std::cout.precision(10);
    std::cout << ll << "\n";
    return 0;
}

int run_compare(const std::vector<std::string>& config_paths, const CommonArgs& args,
                const std::string& method) {
    if (config_paths.empty()) throw DataError("compare: no configs given");
    const std::vector<ObservedCluster> clusters = load_clusters(args.data);
    std::vector<CompareRow> rows;
    for (const std::string& path : config_paths) {
        CommonArgs one = args;
        one.config = path;
        const ModelConfig cfg = load_config(one);
        const PseudoData pseudo = make_pseudo(cfg, clusters);
        const FitMethod fm = method == "seq" ? FitMethod::T1Sequential : FitMethod::Global;
        const FitResult result = fit(cfg.template_model(), pseudo.clusters, fm, fit_options(cfg));
        CompareRow row;
        row.label = std::filesystem::path(path).filename().string();
        row.loglik = result.loglik;
        for (const PairCopula& e : result.model.edges)
            if (has_parameter(e.family)) ++row.k;
        row.aic = 2.0 * row.k - 2.0 * row.loglik;
        row.bic = row.k * std::log(static_cast<double>(clusters.size())) - 2.0 * row.loglik;
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const CompareRow& a, const CompareRow& b) { return a.loglik > b.loglik; });
    std::cout << compare_table_text(rows);
    if (!args.out.empty()) {
        const std::filesystem::path dir = ensure_out_dir(args.out);
        write_file((dir / "compare.csv").string(), compare_table_csv(rows));
    }
    return 0;
}

int run_simulate(const CommonArgs& args) {
    const ModelConfig cfg = load_config(args);
    const StudyConfig study = to_study_config(cfg);
    const StudyResult result = run_study(study);
    const std::filesystem::path dir = ensure_out_dir(args.out);
    write_file((dir / "study.csv").string(), study_result_csv(study.model, result));
    std::cout << "replicates completed: " << result.completed << " failed: " << result.failed
              << "\n";
    std::cout << "observation-level censored fraction: " << result.censored_fraction << "\n";
    std::cout << study_result_csv(study.model, result);
    return 0;
}

int run_convert(const std::string& family_name_arg, std::optional<double> tau,
                std::optional<double> theta) {
    const Family family = family_from_name(family_name_arg);
    std::cout.precision(10);
    if (tau && theta) throw DataError("convert: give either --tau or --theta, not both");
    if (tau) {
        std::cout << tau_to_theta(family, *tau) << "\n";
    } else if (theta) {
        std::cout << theta_to_tau(family, *theta) << "\n";
    } else {
        throw DataError("convert: need --tau or --theta");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vine-copula dependence estimation for right-censored clustered event times"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string method = "global";
    int bootstrap_b = 0;
    std::vector<std::string> compare_configs;
    std::string convert_family;
    std::optional<double> convert_tau, convert_theta;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        cmd->add_option("--config", args.config, "model config file")->required();
        if (needs_data) cmd->add_option("--data", args.data, "cluster CSV file")->required();
        cmd->add_option("--out", args.out, "output directory");
        cmd->add_option("--quad-nodes", args.quad_nodes, "quadrature nodes per axis");
        cmd->add_option("--seed", args.seed, "seed override");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit the copula parameters");
    add_common(fit_cmd, true);
    fit_cmd->add_option("--method", method, "seq or global")
        ->check(CLI::IsMember({"seq", "global"}));
    fit_cmd->add_option("--bootstrap", bootstrap_b, "bootstrap replicates for standard errors");

    CLI::App* loglik_cmd = app.add_subcommand("loglik", "evaluate the censored loglikelihood");
    add_common(loglik_cmd, true);

    CLI::App* boot_cmd = app.add_subcommand("bootstrap", "fit and bootstrap standard errors");
    add_common(boot_cmd, true);
    boot_cmd->add_option("--method", method, "seq or global")
        ->check(CLI::IsMember({"seq", "global"}));
    boot_cmd->add_option("--B", bootstrap_b, "bootstrap replicates")->default_val(100);

    CLI::App* compare_cmd = app.add_subcommand("compare", "rank models by loglikelihood");
    compare_cmd->add_option("--configs", compare_configs, "model config files")->required();
    compare_cmd->add_option("--data", args.data, "cluster CSV file")->required();
    compare_cmd->add_option("--out", args.out, "output directory");
    compare_cmd->add_option("--quad-nodes", args.quad_nodes, "quadrature nodes per axis");
    compare_cmd->add_option("--seed", args.seed, "seed override");
    compare_cmd->add_option("--method", method, "seq or global")
        ->check(CLI::IsMember({"seq", "global"}));

    CLI::App* sim_cmd = app.add_subcommand("simulate", "run a replication study");
    add_common(sim_cmd, false);

    CLI::App* convert_cmd = app.add_subcommand("convert", "convert between tau and theta");
    convert_cmd->add_option("--family", convert_family, "clayton|gumbel|frank|indep")->required();
    convert_cmd->add_option("--tau", convert_tau, "Kendall tau to convert to theta");
    convert_cmd->add_option("--theta", convert_theta, "theta to convert to tau");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fit_cmd->parsed()) return run_fit(args, method, bootstrap_b);
        if (loglik_cmd->parsed()) return run_loglik(args);
        if (boot_cmd->parsed()) return run_fit(args, method, bootstrap_b);
        if (compare_cmd->parsed()) return run_compare(compare_configs, args, method);
        if (sim_cmd->parsed()) return run_simulate(args);
        if (convert_cmd->parsed()) return run_convert(convert_family, convert_tau, convert_theta);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const StructureError& e) {
        std::cerr << "structure error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
