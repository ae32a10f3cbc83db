#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vinecens/csv.hpp"
#include "vinecens/errors.hpp"
#include "vinecens/model_config.hpp"
#include "vinecens/simulation.hpp"

using namespace vinecens;

namespace {

const char* kStructureC =
    "dimension = 4\n"
    "order = 1,3,4,2\n"
    "edge.13 = frank, theta=6.5\n"
    "edge.34 = frank, theta=6.3\n"
    "edge.42 = frank, theta=7.0\n"
    "edge.14;3 = frank, theta=1.7\n"
    "edge.32;4 = frank, theta=2.8\n"
    "edge.12;34 = frank, theta=3.7\n"
    "margin.1 = km\n"
    "margin.2 = km\n"
    "margin.3 = km\n"
    "margin.4 = km\n"
    "quad.nodes = 21\n"
    "seed = 11\n";

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string run_cli(const std::string& args, int expected_exit) {
    const std::filesystem::path out =
        std::filesystem::temp_directory_path() / "vinecens_cli_output.txt";
    const std::string command =
        std::string(VINECENS_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(command.c_str());
    const int exit_code = WEXITSTATUS(status);
    std::ifstream in(out);
    std::stringstream buf;
    buf << in.rdbuf();
    INFO("command: ", command, "\noutput: ", buf.str());
    CHECK(exit_code == expected_exit);
    return buf.str();
}

}  // namespace

TEST_CASE("model config parses the structure-(c) file") {
    const ModelConfig cfg = parse_model_config(kStructureC);
    CHECK(cfg.d == 4);
    CHECK(cfg.order == std::vector<int>{0, 2, 3, 1});
    CHECK(cfg.families.size() == 6);
    for (Family f : cfg.families) CHECK(f == Family::Frank);
    CHECK(*cfg.thetas[0] == doctest::Approx(6.5));
    CHECK(*cfg.thetas[5] == doctest::Approx(3.7));
    const DVineModel m = cfg.full_model();
    CHECK(edge_labels(m) ==
          std::vector<std::string>{"13", "34", "42", "14;3", "32;4", "12;34"});
}

TEST_CASE("model config round trips through write/parse") {
    const ModelConfig cfg = parse_model_config(kStructureC);
    const ModelConfig again = parse_model_config(write_model_config(cfg));
    CHECK(again.d == cfg.d);
    CHECK(again.order == cfg.order);
    CHECK(again.families == cfg.families);
    for (std::size_t e = 0; e < cfg.thetas.size(); ++e)
        CHECK(*again.thetas[e] == doctest::Approx(*cfg.thetas[e]).epsilon(1e-15));
    CHECK(again.quad_nodes == cfg.quad_nodes);
    CHECK(again.seed == cfg.seed);
    CHECK(again.margin_method == cfg.margin_method);
}

TEST_CASE("model config rejects unknown keys and bad edges") {
    CHECK_THROWS_AS(parse_model_config(std::string(kStructureC) + "mystery = 1\n"), DataError);
    CHECK_THROWS_AS(parse_model_config(
                        "dimension = 3\norder = 1,2,3\n"
                        "edge.12 = frank, theta=1\nedge.23 = frank, theta=1\n"
                        "edge.99 = frank, theta=1\n"),
                    DataError);
    CHECK_THROWS_AS(parse_model_config("dimension = 5\norder = 1,2,3,4,5\n"), DataError);
}

TEST_CASE("cluster csv: quadruple records with mixed censoring") {
    const std::string text =
        "id,y1,y2,y3,y4,d1,d2,d3,d4\n"
        "1,67,67,119,67,1,1,1,1\n"
        "407,279,279,279,263,0,0,0,1\n";
    const auto clusters = parse_clusters(text, "test");
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].id == 1);
    CHECK(clusters[0].y == std::vector<double>{67, 67, 119, 67});
    CHECK(clusters[0].delta == std::vector<int>{1, 1, 1, 1});
    CHECK(clusters[1].id == 407);
    CHECK(clusters[1].y[3] == 263);
    CHECK(clusters[1].delta == std::vector<int>{0, 0, 0, 1});
}

TEST_CASE("cluster csv errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_clusters("id,y1,d1\n1,2.5,7\n", "f"),
                         doctest::Contains("line 2"), DataError);
    CHECK_THROWS_WITH_AS(parse_clusters("id,y1,d1\n1,abc,1\n", "f"),
                         doctest::Contains("line 2"), DataError);
    CHECK_THROWS_AS(parse_clusters("id,y1,d1\n", "f"), DataError);
    CHECK_THROWS_AS(parse_clusters("", "f"), DataError);
}

TEST_CASE("cli: convert matches the tabulated pairings") {
    const std::string theta = run_cli("convert --family clayton --tau 0.6", 0);
    CHECK(std::abs(std::stod(theta) - 3.0) < 1e-9);
    const std::string tau = run_cli("convert --family gumbel --theta 1.11", 0);
    CHECK(std::abs(std::stod(tau) - 0.10) < 5e-3);
    run_cli("convert --family clayton --tau -0.5", 2);
    run_cli("convert --family clayton", 2);
}

TEST_CASE("cli: fit, loglik and compare on a simulated dataset") {
    // simulate a small structure-(c) dataset on the time scale
    const ModelConfig cfg = parse_model_config(kStructureC);
    StudyConfig study;
    study.model = cfg.full_model();
    study.margins = {{3.39, 3.32}, {4.20, 2.21}, {3.53, 2.68}, {3.39, 3.32}};
    study.n = 150;
    study.seed = 3;
    const auto data = generate_dataset(study, 0);
    std::ostringstream csv;
    csv << "id,y1,y2,y3,y4,d1,d2,d3,d4\n";
    csv.precision(12);
    for (const auto& cl : data) {
        csv << cl.id;
        for (double y : cl.y) csv << "," << y;
        for (int d : cl.delta) csv << "," << d;
        csv << "\n";
    }
    const auto data_path = temp_file("vinecens_data.csv", csv.str());
    const auto cfg_path = temp_file("vinecens_model.cfg", kStructureC);
    const auto out_dir = std::filesystem::temp_directory_path() / "vinecens_out";

    const std::string fit_output = run_cli("fit --config " + cfg_path.string() + " --data " +
                                               data_path.string() + " --method seq --out " +
                                               out_dir.string(),
                                           0);
    CHECK(fit_output.find("loglik") != std::string::npos);
    CHECK(std::filesystem::exists(out_dir / "fit.csv"));
    CHECK(std::filesystem::exists(out_dir / "fit.txt"));
    std::ifstream fit_csv(out_dir / "fit.csv");
    std::string line;
    int rows = 0;
    while (std::getline(fit_csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 7);  // header + 6 edges

    // loglik requires full parameters; the config has them
    const std::string ll = run_cli(
        "loglik --config " + cfg_path.string() + " --data " + data_path.string(), 0);
    CHECK(std::isfinite(std::stod(ll)));

    // compare two identical configs: identical loglik
    const auto cfg_path2 = temp_file("vinecens_model2.cfg", kStructureC);
    const std::string cmp = run_cli("compare --configs " + cfg_path.string() + " " +
                                        cfg_path2.string() + " --data " + data_path.string() +
                                        " --method seq",
                                    0);
    CHECK(cmp.find("loglik") != std::string::npos);

    // data errors exit with code 2
    const auto bad_data = temp_file("vinecens_bad.csv", "id,y1,d1\n1,foo,1\n");
    run_cli("fit --config " + cfg_path.string() + " --data " + bad_data.string(), 2);
    run_cli("fit --config missing.cfg --data " + data_path.string(), 2);
}

TEST_CASE("cli: simulate smoke run emits the study csv") {
    const std::string study_cfg =
        "dimension = 3\n"
        "order = 1,2,3\n"
        "edge.12 = clayton, theta=3\n"
        "edge.23 = clayton, theta=3\n"
        "edge.13;2 = frank, theta=2.92\n"
        "margin.1 = weibull, alpha=3.39, lambda=3.32\n"
        "margin.2 = weibull, alpha=4.20, lambda=2.21\n"
        "margin.3 = weibull, alpha=3.53, lambda=2.68\n"
        "study.n = 10\n"
        "study.replicates = 1\n"
        "study.margin-method = known\n"
        "seed = 4\n";
    const auto cfg_path = temp_file("vinecens_study.cfg", study_cfg);
    const auto out_dir = std::filesystem::temp_directory_path() / "vinecens_study_out";
    run_cli("simulate --config " + cfg_path.string() + " --out " + out_dir.string(), 0);
    std::ifstream in(out_dir / "study.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "edge,family,theta,theta_mean,theta_bias,theta_s2,theta_mse,"
          "tau,tau_mean,tau_bias,tau_s2,tau_mse");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("study config requires generation margins and study keys") {
    const ModelConfig cfg = parse_model_config(kStructureC);
    CHECK_THROWS_AS(to_study_config(cfg), DataError);
}
